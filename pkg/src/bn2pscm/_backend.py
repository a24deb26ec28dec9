"""Kernel backend selection: numba-jitted or pure numpy.

The environment variable ``BN2PSCM_BACKEND`` picks the backend:

* ``auto`` (default) — use numba when it is importable, else pure numpy;
* ``numpy``          — force the pure-numpy fallback;
* ``numba``          — require numba, raising if it is not importable.

Kernels are written once in numba-compatible numpy, so both paths share
one source; see ``_kernels.py``.
"""

import os

_REQUESTED = os.environ.get("BN2PSCM_BACKEND", "auto").strip().lower()

try:
    import numba as _numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on the environment
    _numba = None
    HAVE_NUMBA = False

if _REQUESTED not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"BN2PSCM_BACKEND must be one of auto|numba|numpy, got {_REQUESTED!r}"
    )
if _REQUESTED == "numba" and not HAVE_NUMBA:  # pragma: no cover
    raise ImportError("BN2PSCM_BACKEND=numba but numba is not importable")

USE_NUMBA = HAVE_NUMBA if _REQUESTED == "auto" else _REQUESTED == "numba"
BACKEND = "numba" if USE_NUMBA else "numpy"


def jit(fn):
    """Compile ``fn`` with numba when active; otherwise return it unchanged.

    Kernels only touch per-call local arrays, so they release the GIL,
    letting the multi-worker search overlap solves.
    """
    if USE_NUMBA:
        return _numba.njit(cache=True, nogil=True)(fn)
    return fn
