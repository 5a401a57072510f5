"""Build script for the compiled kernel extension.

The package is fully functional without the extension (a pure-numpy
fallback is selected at import time), so a missing Cython toolchain only
costs speed, not correctness.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("msisr.kernels._native", ["src/msisr/kernels/_native.pyx"])],
        language_level="3",
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
