"""Builds the optional compiled kernels.

The package is fully functional without the extension: opsai._kernels falls
back to the pure-Python implementations at import time. Compilation failures
therefore downgrade to a warning instead of failing the install.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/opsai/_kernels/_ckern.pyx"],
        compiler_directives={"language_level": 3},
    )
except Exception as exc:  # pragma: no cover - environment without Cython/cc
    print(f"opsai: skipping compiled kernels ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
