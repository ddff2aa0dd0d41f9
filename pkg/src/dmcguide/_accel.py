"""Backend selection for the hot kernels.

Set ``DMCGUIDE_DISABLE_NUMBA=1`` to force the pure-numpy path. The numba path is
also skipped when numba cannot be imported.
"""

import os

_FALSY = {"", "0", "false", "no", "off"}


def _numba_requested() -> bool:
    return os.environ.get("DMCGUIDE_DISABLE_NUMBA", "0").strip().lower() in _FALSY


try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _numba_requested()
BACKEND = "numba" if USE_NUMBA else "numpy"
