"""Dispatch layer over the numba and numpy kernel implementations."""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from . import _accel
from . import _kernels_numpy

if _accel.USE_NUMBA:
    from . import _kernels_numba as _impl
else:
    _impl = _kernels_numpy

BACKEND = _accel.BACKEND


def backend_module(name: str | None = None):
    """Return the kernel module for ``name`` ("numba" / "numpy"), default the active one."""
    if name is None:
        return _impl
    if name == "numpy":
        return _kernels_numpy
    if name == "numba":
        from . import _kernels_numba

        return _kernels_numba
    raise ValueError(f"unknown backend {name!r}")


class ThreatArrays(NamedTuple):
    x: np.ndarray
    y: np.ndarray
    mu: np.ndarray
    R: np.ndarray
    r: np.ndarray

    @classmethod
    def from_threats(cls, threats: Sequence) -> "ThreatArrays":
        """Pack anything with ``position`` and ``params`` attributes."""
        cols = np.array(
            [[t.position[0], t.position[1], t.params.mu, t.params.R, t.params.r] for t in threats],
            dtype=np.float64,
        ).reshape(-1, 5)
        return cls(*(np.ascontiguousarray(cols[:, i]) for i in range(5)))


def dmc_many(px, py, psi, arrays: ThreatArrays, stayout: bool, backend=None):
    impl = backend_module(backend)
    return impl.dmc_many(
        np.ascontiguousarray(px, dtype=np.float64),
        np.ascontiguousarray(py, dtype=np.float64),
        np.ascontiguousarray(psi, dtype=np.float64),
        *arrays,
        bool(stayout),
    )


def dmc_at(x: float, y: float, psi: float, arrays: ThreatArrays, stayout: bool) -> tuple[float, bool]:
    """Multi-threat signed DMC at a single state: (value, safe_set_empty)."""
    val, empty = dmc_many(np.array([x]), np.array([y]), np.array([psi]), arrays, stayout)
    return float(val[0]), bool(empty[0])


def inside_any_bez(px, py, psi, arrays: ThreatArrays, backend=None):
    impl = backend_module(backend)
    return impl.inside_any_bez(
        np.ascontiguousarray(px, dtype=np.float64),
        np.ascontiguousarray(py, dtype=np.float64),
        np.ascontiguousarray(psi, dtype=np.float64),
        *arrays,
    )
