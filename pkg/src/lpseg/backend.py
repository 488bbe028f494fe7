"""Kernel backend selection.

The hot inner loops (pixel window statistics, HSV conversion, k-d tree
queries, propagation steps) exist twice: as numba ``@njit`` kernels and as a
pure-numpy path. ``LPSEG_BACKEND=numba`` or ``LPSEG_BACKEND=numpy`` forces
one; when unset, numba is used if it imports. Both paths are written to
produce bit-identical results so switching backends never changes output.
"""

import os

ENV_VAR = "LPSEG_BACKEND"

try:
    import numba  # noqa: F401

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - sandbox always has numba
    HAS_NUMBA = False


def active_backend() -> str:
    """Name of the backend in effect, ``"numba"`` or ``"numpy"``."""
    choice = os.environ.get(ENV_VAR, "").strip().lower()
    if choice == "numba":
        if not HAS_NUMBA:
            raise RuntimeError(f"{ENV_VAR}=numba but numba is not importable")
        return "numba"
    if choice == "numpy":
        return "numpy"
    if choice:
        raise ValueError(f"unknown {ENV_VAR} value {choice!r}; use 'numba' or 'numpy'")
    return "numba" if HAS_NUMBA else "numpy"


def use_numba() -> bool:
    return active_backend() == "numba"
