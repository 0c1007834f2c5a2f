"""Selects the kernel implementation at import time.

The compiled ``_ckernels`` extension is preferred. Setting the environment
variable ``DMSCOPE_PURE=1`` forces the pure-Python fallback.
"""
import os

from . import _pykernels

if os.environ.get("DMSCOPE_PURE", "") not in ("", "0"):
    kernels = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as kernels
        BACKEND = "cython"
    except ImportError:
        kernels = _pykernels
        BACKEND = "python"

_MASK64 = (1 << 64) - 1


def mix64(x):
    """splitmix64 finalizer on a Python int."""
    z = x & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_key(*parts):
    """Fold integers into one 64-bit stream key."""
    key = 0x6A09E667F3BCC909
    for part in parts:
        key = mix64(key ^ mix64(int(part) & _MASK64))
    return key
