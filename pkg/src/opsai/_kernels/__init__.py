"""Hot-loop kernels with a compiled core and a pure-Python fallback.

Import preference: the Cython extension if it built, else pure Python.
``KERNEL_IMPL`` reports which one is active; ``OPSAI_PURE_KERNELS=1``
forces the fallback (used by the parity tests and the benchmark).
"""

import os

from . import pure

if os.environ.get("OPSAI_PURE_KERNELS") == "1":
    _impl = pure
else:
    try:
        from . import _ckern as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = pure

KERNEL_IMPL = "c" if _impl is not pure else "python"

fnv1a64 = _impl.fnv1a64
levenshtein = _impl.levenshtein
splitmix64_next = _impl.splitmix64_next

FNV64_OFFSET = pure.FNV64_OFFSET
MASK64 = pure.MASK64

__all__ = [
    "KERNEL_IMPL",
    "FNV64_OFFSET",
    "MASK64",
    "fnv1a64",
    "levenshtein",
    "splitmix64_next",
    "pure",
]
