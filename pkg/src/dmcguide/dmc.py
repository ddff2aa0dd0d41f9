"""Single-threat Dynamic Maneuvering Cue (DMC).

Two variants:

* penetration: the turn that puts the agent exactly on the BEZ boundary
  for its new heading;
* stay-out: the turn that keeps the agent outside the BEZ, switching from the
  boundary construction to tangency with the capturability disc beyond the
  critical distance.

The DMC is the signed turn to apply: new heading = heading + value.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from .geometry import (
    ThreatParams,
    critical_distance,
    max_reach_radius,
    rho,
    wrap_angle,
)

# arccos/arcsin arguments this close to +-1 are clamped instead of classified
CLAMP_TOL = 1e-12


class Mode(enum.Enum):
    ALL_SAFE = "AllSafe"
    BOUNDARY = "Boundary"
    TANGENT = "Tangent"
    ALL_UNSAFE = "AllUnsafe"


class DmcMode(str, enum.Enum):
    PENETRATION = "penetration"
    STAYOUT = "stayout"


@dataclass(frozen=True)
class XiStar:
    """Half-width of the unsafe aspect cone, or a degenerate classification."""

    mode: Mode
    angle: Optional[float] = None

    @property
    def defined(self) -> bool:
        return self.angle is not None


@dataclass(frozen=True)
class DmcResult:
    value: float
    xi_star: Optional[float]
    mode: Mode
    nearest_safe_aspect: Optional[float]


def _check_distance(d: float) -> None:
    if not d > 0.0:
        raise ValueError(f"distance to threat must be positive, got {d}")


def _sign(x: float) -> float:
    return -1.0 if x < 0.0 else 1.0


def xi_star_boundary(params: ThreatParams, d: float) -> XiStar:
    """Aspect angle at which the BEZ boundary passes through range ``d``."""
    _check_distance(d)
    mu_r = params.mu * params.R
    reach = params.R + params.r
    arg = (d * d + mu_r * mu_r - reach * reach) / (2.0 * mu_r * d)
    if arg > 1.0:
        if arg - 1.0 > CLAMP_TOL:
            return XiStar(Mode.ALL_SAFE)
        arg = 1.0
    elif arg < -1.0:
        if -1.0 - arg > CLAMP_TOL:
            return XiStar(Mode.ALL_UNSAFE)
        arg = -1.0
    return XiStar(Mode.BOUNDARY, math.acos(arg))


def xi_star_tangent(params: ThreatParams, d: float) -> float:
    """Aspect angle whose ray is tangent to the capturability disc (radius R + r)."""
    reach = params.R + params.r
    arg = reach / d if d > 0 else math.inf
    if arg > 1.0:
        if arg - 1.0 > CLAMP_TOL:
            raise ValueError(
                f"range {d} is inside the capturability region (R + r = {reach}); no tangent exists"
            )
        arg = 1.0
    return math.asin(arg)


def xi_star_stayout(params: ThreatParams, d: float) -> XiStar:
    _check_distance(d)
    if d >= critical_distance(params):
        return XiStar(Mode.TANGENT, xi_star_tangent(params, d))
    return xi_star_boundary(params, d)


def _saturated(xi: float) -> DmcResult:
    return DmcResult(
        value=_sign(xi) * math.pi,
        xi_star=None,
        mode=Mode.ALL_UNSAFE,
        nearest_safe_aspect=wrap_angle(xi + _sign(xi) * math.pi),
    )


def _turn_to_nearest(xi: float, half_width: float, mode: Mode) -> DmcResult:
    # candidates are -half_width and +half_width; ties go counter-clockwise
    s = _sign(xi)
    target = s * half_width
    return DmcResult(value=target - xi, xi_star=half_width, mode=mode, nearest_safe_aspect=target)


def dmc_penetration(params: ThreatParams, d: float, xi: float) -> DmcResult:
    """Minimum turn placing the agent on the BEZ boundary of its new heading."""
    xi = wrap_angle(xi)
    star = xi_star_boundary(params, d)
    if star.mode is Mode.ALL_SAFE:
        return DmcResult(0.0, None, Mode.ALL_SAFE, xi)
    if star.mode is Mode.ALL_UNSAFE:
        return _saturated(xi)
    if abs(xi) >= star.angle:
        return DmcResult(0.0, star.angle, Mode.BOUNDARY, xi)
    return _turn_to_nearest(xi, star.angle, Mode.BOUNDARY)


def dmc_stayout(params: ThreatParams, d: float, xi: float) -> DmcResult:
    """Minimum turn keeping the agent outside the BEZ (tangent beyond the critical range)."""
    xi = wrap_angle(xi)
    star = xi_star_stayout(params, d)
    if star.mode is Mode.ALL_UNSAFE:
        return _saturated(xi)
    if d > max_reach_radius(params):
        return DmcResult(0.0, star.angle, Mode.ALL_SAFE, xi)
    if d > rho(params, xi):
        return DmcResult(0.0, star.angle, star.mode, xi)
    return _turn_to_nearest(xi, star.angle, star.mode)
