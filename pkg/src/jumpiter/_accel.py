"""Backend selection for the hot loops.

Kernels are written twice: a numba ``@njit`` loop and a pure numpy version.
The numba path is used when numba imports cleanly and the environment
variable ``JUMPITER_BACKEND`` is not set to ``numpy``.
"""
import os

try:
    import numba
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

BACKENDS = ("numba", "numpy")


def default_backend():
    requested = os.environ.get("JUMPITER_BACKEND", "numba").strip().lower()
    if requested not in BACKENDS:
        raise ValueError(f"JUMPITER_BACKEND must be one of {BACKENDS}, got {requested!r}")
    if requested == "numba" and not HAS_NUMBA:
        return "numpy"
    return requested


def njit(func):
    """``numba.njit(cache=True)`` or the identity when numba is missing."""
    if not HAS_NUMBA:
        return func
    return numba.njit(cache=True)(func)


def resolve(backend):
    backend = default_backend() if backend is None else backend
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    return backend
