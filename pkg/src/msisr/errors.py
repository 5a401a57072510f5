"""Exception types mapped to CLI exit codes."""


class MsisrError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(MsisrError):
    """Invalid inputs: shapes, factors, manifests, config values.  Exit code 2."""


class NumericalError(MsisrError):
    """Numerical failure: singular systems, non-convergence.  Exit code 3."""


class BundleIOError(MsisrError):
    """Bundle or report I/O failure.  Exit code 4."""
