"""Basic engagement zone (BEZ) geometry.

All angles are radians wrapped to ``(-pi, pi]``. The aspect angle ``xi`` is the
agent heading minus the line-of-sight bearing from agent to threat, so
``xi = 0`` means heading straight at the threat.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(angle):
    """Wrap an angle (scalar or array) into ``(-pi, pi]``."""
    if isinstance(angle, np.ndarray):
        inside = (angle > -math.pi) & (angle <= math.pi)
        return np.where(inside, angle, math.pi - np.mod(math.pi - angle, TWO_PI))
    if -math.pi < angle <= math.pi:
        return angle
    return math.pi - math.fmod(math.fmod(math.pi - angle, TWO_PI) + TWO_PI, TWO_PI)


@dataclass(frozen=True)
class ThreatParams:
    """Parameters of one engagement zone.

    mu : speed ratio v_agent / v_threat, strictly inside (0, 1)
    R  : reach distance of the threat
    r  : capture radius
    """

    mu: float
    R: float
    r: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.mu < 1.0):
            raise ValueError(f"mu must lie in (0,1), got {self.mu}")
        if not self.R > 0.0:
            raise ValueError(f"R must be > 0, got {self.R}")
        if not self.r >= 0.0:
            raise ValueError(f"r must be >= 0, got {self.r}")

    @classmethod
    def from_weapon(cls, mu: float, v_weapon: float, t_reaction: float, r: float = 0.0):
        """Build params from weapon speed and reaction time (reach = v * t)."""
        return cls(mu=mu, R=v_weapon * t_reaction, r=r)


def aspect_angle(psi: float, los: float) -> float:
    return wrap_angle(psi - los)


def rho(params: ThreatParams, xi):
    """BEZ boundary distance from the threat at aspect angle ``xi``."""
    mu_r = params.mu * params.R
    reach = params.R + params.r
    c = np.cos(xi)
    # radicand >= reach^2/mu_r^2 - 1 > 0 since mu < 1
    return mu_r * (c + np.sqrt(c * c - 1.0 + (reach / mu_r) ** 2))


def no_escape_radius(params: ThreatParams) -> float:
    return (1.0 - params.mu) * params.R + params.r


def max_reach_radius(params: ThreatParams) -> float:
    """BEZ distance for a head-on aspect, the largest over all aspects."""
    return params.mu * params.R + params.R + params.r


def critical_distance(params: ThreatParams) -> float:
    """Range where the boundary and tangency constructions coincide."""
    return math.hypot(params.R + params.r, params.mu * params.R)


def bez_contains(params: ThreatParams, d: float, xi: float) -> bool:
    if d < 0:
        raise ValueError("distance must be non-negative")
    return bool(d <= rho(params, xi))


def bez_boundary_center(params: ThreatParams, threat_pos, psi: float) -> np.ndarray:
    """Center of the circle (radius R + r) traced by the BEZ boundary for heading ``psi``."""
    offset = params.mu * params.R
    tx, ty = threat_pos
    return np.array([tx - offset * math.cos(psi), ty - offset * math.sin(psi)])
