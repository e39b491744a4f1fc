"""Kernel backend selection.

The compiled module is used when it imports; ``POLYATTN_BACKEND=numpy``
forces the fallback.  Both modules stay importable so tests and the backend
benchmark can compare them side by side.
"""
import os
from contextlib import contextmanager

from . import _pure

try:
    from . import _kernels as compiled
except ImportError:  # extension not built
    compiled = None

pure = _pure


def _select():
    want = os.environ.get("POLYATTN_BACKEND", "").strip().lower()
    if want in ("numpy", "pure", "python"):
        return pure
    if want in ("cython", "compiled") and compiled is None:
        raise ImportError("POLYATTN_BACKEND=cython requested but polyattn._kernels is not built")
    return compiled if compiled is not None else pure


active = _select()


def available():
    return [b for b in (compiled, pure) if b is not None]


@contextmanager
def using(module):
    """Temporarily route every kernel call through ``module``."""
    global active
    prev, active = active, module
    try:
        yield module
    finally:
        active = prev
