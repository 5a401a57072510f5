"""On-disk image bundle: a JSON manifest plus one raw float32 file per band.

Layout of a bundle directory:

    manifest.json   {"version": 1, "finest_rows": R, "finest_cols": C,
                     "dtype": "float32-le", "layout": "row-major",
                     "bands": [{"name", "L", "rows", "cols", "file"}, ...]}
    <name>.f32      rows*cols little-endian IEEE-754 binary32, row-major

Compute runs in double precision; storage quantizes to float32.  Reads
validate the manifest strictly and fail with the offending file named.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BundleIOError, ValidationError
from .image import Band, MultispectralImage, percentile

BUNDLE_VERSION = 1
BUNDLE_DTYPE = "float32-le"
BUNDLE_LAYOUT = "row-major"


@dataclass(frozen=True)
class BundleManifest:
    version: int
    finest_rows: int
    finest_cols: int
    dtype: str
    layout: str
    bands: tuple  # of dicts {name, L, rows, cols, file}

    @classmethod
    def from_json_dict(cls, data):
        required = {"version", "finest_rows", "finest_cols", "dtype", "layout", "bands"}
        missing = required - set(data)
        if missing:
            raise ValidationError(f"manifest missing keys: {sorted(missing)}")
        return cls(
            version=int(data["version"]),
            finest_rows=int(data["finest_rows"]),
            finest_cols=int(data["finest_cols"]),
            dtype=str(data["dtype"]),
            layout=str(data["layout"]),
            bands=tuple(data["bands"]),
        )

    def validate(self):
        if self.version != BUNDLE_VERSION:
            raise ValidationError(f"unsupported bundle version {self.version}")
        if self.dtype != BUNDLE_DTYPE:
            raise ValidationError(f"unknown dtype {self.dtype!r}; expected {BUNDLE_DTYPE!r}")
        if self.layout != BUNDLE_LAYOUT:
            raise ValidationError(f"unknown layout {self.layout!r}; expected {BUNDLE_LAYOUT!r}")
        if not self.bands:
            raise ValidationError("manifest lists no bands")
        for entry in self.bands:
            missing = {"name", "L", "rows", "cols", "file"} - set(entry)
            if missing:
                raise ValidationError(f"band entry missing keys: {sorted(missing)}")
            if int(entry["rows"]) * int(entry["L"]) != self.finest_rows or int(
                entry["cols"]
            ) * int(entry["L"]) != self.finest_cols:
                raise ValidationError(
                    f"band {entry['name']!r}: {entry['rows']}x{entry['cols']} at "
                    f"L={entry['L']} does not cover the "
                    f"{self.finest_rows}x{self.finest_cols} finest grid"
                )


def read_bundle(path):
    """Load a bundle directory into a double-precision image."""
    root = Path(path)
    manifest_path = root / "manifest.json"
    if not manifest_path.is_file():
        raise BundleIOError(f"no manifest.json in {root}")
    try:
        manifest = BundleManifest.from_json_dict(json.loads(manifest_path.read_text()))
    except json.JSONDecodeError as exc:
        raise BundleIOError(f"unreadable manifest {manifest_path}: {exc}") from None
    manifest.validate()
    bands = []
    for entry in manifest.bands:
        band_path = root / entry["file"]
        rows, cols = int(entry["rows"]), int(entry["cols"])
        expected = rows * cols * 4
        if not band_path.is_file():
            raise BundleIOError(f"band file missing: {band_path}")
        raw = band_path.read_bytes()
        if len(raw) != expected:
            raise BundleIOError(
                f"band {entry['name']!r}: {band_path} has {len(raw)} bytes, "
                f"expected {expected}"
            )
        values = np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(rows, cols)
        bands.append(Band(values, int(entry["L"]), str(entry["name"])))
    return MultispectralImage(tuple(bands), manifest.finest_rows, manifest.finest_cols)


def write_bundle(msi, path):
    """Write a bundle directory; byte output is deterministic for equal input."""
    root = Path(path)
    try:
        root.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise BundleIOError(f"cannot create bundle directory {root}: {exc}") from None
    entries = []
    for i, band in enumerate(msi.bands):
        name = band.name or f"band{i}"
        fname = f"{name}.f32"
        data = np.ascontiguousarray(band.values, dtype="<f4").tobytes()
        try:
            (root / fname).write_bytes(data)
        except OSError as exc:
            raise BundleIOError(f"cannot write band file {root / fname}: {exc}") from None
        entries.append(
            {"name": name, "L": band.factor, "rows": band.rows, "cols": band.cols, "file": fname}
        )
    manifest = {
        "version": BUNDLE_VERSION,
        "finest_rows": msi.finest_rows,
        "finest_cols": msi.finest_cols,
        "dtype": BUNDLE_DTYPE,
        "layout": BUNDLE_LAYOUT,
        "bands": entries,
    }
    try:
        (root / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    except OSError as exc:
        raise BundleIOError(f"cannot write manifest in {root}: {exc}") from None


def export_png(band, path, stretch="p2p98"):
    """8-bit grayscale preview with an affine display stretch (lossy)."""
    from PIL import Image

    values = np.asarray(band.values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise ValidationError("cannot export a band with non-finite values")
    if stretch == "minmax":
        lo, hi = float(values.min()), float(values.max())
    elif stretch == "p2p98":
        lo, hi = percentile(values, 2.0), percentile(values, 98.0)
    else:
        raise ValidationError(f"unknown stretch {stretch!r}; use 'p2p98' or 'minmax'")
    scale = hi - lo
    if scale == 0.0:
        scaled = np.zeros_like(values)
    else:
        scaled = (values - lo) / scale * 255.0
    img = np.clip(np.rint(scaled), 0, 255).astype(np.uint8)
    try:
        Image.fromarray(img, mode="L").save(str(path), format="PNG")
    except OSError as exc:
        raise BundleIOError(f"cannot write PNG {path}: {exc}") from None
