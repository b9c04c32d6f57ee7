"""Kernel selection: compiled Mersenne kernel when available, else pure Python.

Set ``DISTRESS_NONCE_PURE=1`` to force the pure-Python kernel.
"""
import os

from ._pykernel import PyKernel

try:
    from ._ckernel import MersenneKernel
except ImportError:  # extension not built
    MersenneKernel = None

FORCE_PURE = os.environ.get("DISTRESS_NONCE_PURE", "") not in ("", "0")
HAVE_COMPILED = MersenneKernel is not None


def is_mersenne(q):
    k = q.bit_length()
    return q == (1 << k) - 1


def make_kernel(q, a, b, backend=None):
    """Return a kernel for y^2 = x^3 + ax + b over GF(q).

    ``backend`` is ``"cython"``, ``"python"`` or ``None`` (automatic).
    """
    if backend is None:
        backend = "python" if FORCE_PURE else "cython"
        if not HAVE_COMPILED or not is_mersenne(q) or q.bit_length() > 127:
            backend = "python"
    if backend == "cython":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled kernel is not available")
        return MersenneKernel(q, a, b)
    if backend == "python":
        return PyKernel(q, a, b)
    raise ValueError(f"unknown backend {backend!r}")
