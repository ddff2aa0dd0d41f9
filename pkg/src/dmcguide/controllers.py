"""Heading controllers that respect a DMC threshold.

* :func:`simple_step` aims at the goal and clips the heading to the safe cone
  inflated by the threshold ``epsilon``.
* :func:`mpc_plan` searches a heading sequence over a short horizon with the
  threats frozen, penalizing samples whose |DMC| exceeds ``epsilon``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .cones import bearing, joint_safe_cone, least_violation_heading
from .dmc import DmcMode
from .geometry import ThreatParams, rho, wrap_angle

# golden-section search settings for each heading coordinate
GOLDEN_ITERATIONS = 24
SEARCH_HALF_WIDTH = math.pi / 4
SWEEP_TOL = 1e-9
FEASIBILITY_TOL = 1e-6


@dataclass(frozen=True)
class MpcConfig:
    horizon_steps: int = 25
    sample_time: float = 0.07
    penalty_weight: float = 100.0
    restarts: int = 8
    max_iterations: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.horizon_steps < 1:
            raise ValueError("horizon_steps must be >= 1")
        if not self.sample_time > 0:
            raise ValueError("sample_time must be > 0")
        if not self.penalty_weight > 0:
            raise ValueError("penalty_weight must be > 0")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")

    @property
    def horizon_time(self) -> float:
        return self.horizon_steps * self.sample_time


@dataclass(frozen=True)
class ControlConfig:
    epsilon: float = 0.0
    dmc_mode: DmcMode = DmcMode.PENETRATION
    controller: str = "simple"
    mpc: Optional[MpcConfig] = None
    commit_steps: int = 0

    def __post_init__(self):
        if not (0.0 <= self.epsilon < math.pi):
            raise ValueError(f"epsilon must lie in [0, pi), got {self.epsilon}")
        object.__setattr__(self, "dmc_mode", DmcMode(self.dmc_mode))
        if self.controller not in ("simple", "mpc"):
            raise ValueError(f"controller must be 'simple' or 'mpc', got {self.controller!r}")
        if self.controller == "mpc" and self.mpc is None:
            object.__setattr__(self, "mpc", MpcConfig())
        if self.commit_steps < 0:
            raise ValueError("commit_steps must be >= 0")

    @property
    def stayout(self) -> bool:
        return self.dmc_mode is DmcMode.STAYOUT


def psi_nominal(agent_pos, goal) -> float:
    """Bearing from the agent to the goal."""
    return bearing(agent_pos, goal)


def _position(agent):
    return agent.position if hasattr(agent, "position") else agent


def clip_to_threshold(psi: float, dmc_value: float, epsilon: float) -> float:
    """Nearest heading to ``psi`` whose |DMC| equals ``epsilon`` when the threshold is exceeded."""
    if abs(dmc_value) <= epsilon:
        return wrap_angle(psi)
    return wrap_angle(psi + dmc_value - math.copysign(epsilon, dmc_value))


@dataclass
class SimpleDecision:
    heading: float
    nominal: float
    nominal_dmc: float
    active: bool
    safe_set_empty: bool


def simple_decision(agent_pos, goal, threats: Sequence, cfg: ControlConfig,
                    arrays: kernels.ThreatArrays | None = None,
                    candidate: float | None = None) -> SimpleDecision:
    """Clip ``candidate`` (default: aim at goal) onto the epsilon-inflated safe cone."""
    nom = psi_nominal(agent_pos, goal) if candidate is None else wrap_angle(candidate)
    if not threats:
        return SimpleDecision(nom, nom, 0.0, False, False)
    if arrays is None:
        arrays = kernels.ThreatArrays.from_threats(threats)
    val, empty = kernels.dmc_at(agent_pos[0], agent_pos[1], nom, arrays, cfg.stayout)
    if empty:
        heading = least_violation_heading(agent_pos, threats, cfg.dmc_mode)
        return SimpleDecision(heading, nom, val, True, True)
    active = abs(val) > cfg.epsilon
    return SimpleDecision(clip_to_threshold(nom, val, cfg.epsilon), nom, val, active, False)


def simple_step(agent, goal, threats: Sequence, cfg: ControlConfig) -> float:
    return simple_decision(_position(agent), goal, threats, cfg).heading


def committed_heading(agent_pos, nominal: float, threats, cfg: ControlConfig, direction: float) -> float:
    """Clip ``nominal`` toward the safe-cone boundary on the ``direction`` side (+1 CCW, -1 CW)."""
    safe = joint_safe_cone(_At(agent_pos), threats, cfg.dmc_mode)
    if safe.is_empty or safe.is_full or safe.contains(nominal):
        return nominal
    cw, ccw = safe.bracket(nominal)
    if direction > 0:
        turn = (ccw - nominal) % (2 * math.pi)
    else:
        turn = -((nominal - cw) % (2 * math.pi))
    return clip_to_threshold(nominal, turn, cfg.epsilon)


@dataclass(frozen=True)
class _At:
    position: tuple


def switching_surface_metric(agent, goal, threats: Sequence, cfg: ControlConfig) -> Optional[float]:
    """Signed switching-surface indicator |psi_nom - psi_hi| - |psi_nom - psi_lo|.

    ``psi_lo`` / ``psi_hi`` are the clockwise / counter-clockwise edges of the
    unsafe gap containing (or nearest to) the nominal heading. Zero on the
    switching surface, negative when the nominal heading sits nearer the
    counter-clockwise edge. Returns None when the safe set has no boundary.
    """
    pos = _position(agent)
    safe = joint_safe_cone(_At(tuple(pos)), threats, cfg.dmc_mode)
    if safe.is_empty or safe.is_full:
        return None
    nom = psi_nominal(pos, goal)
    gaps = safe.complement().intervals
    two_pi = 2 * math.pi
    for gap in gaps:
        if gap.contains(nom):
            to_hi = (gap.hi - nom) % two_pi
            to_lo = (nom - gap.lo) % two_pi
            return to_hi - to_lo
    gap = min(gaps, key=lambda g: min(abs(wrap_angle(nom - g.lo)), abs(wrap_angle(nom - g.hi))))
    return abs(wrap_angle(nom - gap.hi)) - abs(wrap_angle(nom - gap.lo))


def risk_legacy(params: ThreatParams, d: float, xi: float) -> float:
    """Heuristic penetration risk: rho/d - 1 inside the BEZ, else 0."""
    if not d > 0:
        raise ValueError("distance must be positive")
    boundary = rho(params, xi)
    return float(boundary / d - 1.0) if d <= boundary else 0.0


@dataclass
class MpcPlan:
    """Planned headings (H + 1 samples) and how they score.

    ``distance_to_go`` is the optimized quantity: the terminal distance, or
    when the plan reaches the goal inside the horizon, the remaining distance
    minus the unused travel (so it can be negative).
    """

    headings: np.ndarray
    cost: float
    distance_to_go: float
    terminal_distance: float
    max_violation: float
    feasible: bool
    start_index: int
    starts: np.ndarray = field(repr=False, default=None)


def _mpc_starts(agent_pos, speed, goal, threats, cfg, arrays, previous, rng):
    m = cfg.mpc
    n = m.horizon_steps + 1
    nom = psi_nominal(agent_pos, goal)
    impl = kernels.backend_module()
    replay = impl.simple_replay(float(agent_pos[0]), float(agent_pos[1]), float(speed), m.sample_time,
                                float(goal[0]), float(goal[1]), cfg.epsilon, n, *arrays,
                                cfg.stayout, nom)
    if previous is not None and len(previous) == n:
        shifted = np.concatenate([previous[1:], previous[-1:]])
    else:
        shifted = np.full(n, rng.uniform(-math.pi, math.pi))
    starts = [shifted, np.full(n, nom), np.asarray(replay, dtype=float)]
    starts += [np.full(n, rng.uniform(-math.pi, math.pi)) for _ in range(max(m.restarts - 3, 0))]
    if m.restarts < 3:
        # the replayed Simple sequence is always kept so the plan never does worse than it
        starts = [starts[2]] + starts[:2][: m.restarts - 1]
    return np.ascontiguousarray(np.vstack(starts))


def mpc_plan(agent, goal, threats: Sequence, cfg: ControlConfig, previous: np.ndarray | None = None,
             rng: np.random.Generator | None = None, speed: float | None = None) -> MpcPlan:
    """Receding-horizon heading sequence of length H + 1 minimizing terminal distance to goal."""
    if cfg.mpc is None:
        raise ValueError("MPC configuration required")
    m = cfg.mpc
    pos = tuple(map(float, _position(agent)))
    if speed is None:
        speed = agent.speed
    if rng is None:
        rng = np.random.default_rng(m.seed)
    arrays = kernels.ThreatArrays.from_threats(threats)
    starts = _mpc_starts(pos, speed, goal, threats, cfg, arrays, previous, rng)
    impl = kernels.backend_module()
    best, cost, idx = impl.plan(starts, pos[0], pos[1], float(speed), m.sample_time,
                                float(goal[0]), float(goal[1]), cfg.epsilon, m.penalty_weight,
                                *arrays, cfg.stayout, m.max_iterations, GOLDEN_ITERATIONS,
                                SEARCH_HALF_WIDTH, SWEEP_TOL, FEASIBILITY_TOL)
    best = np.asarray(best, dtype=float)
    dist, worst, _ = impl.rollout(best, pos[0], pos[1], float(speed), m.sample_time,
                                  float(goal[0]), float(goal[1]), cfg.epsilon, *arrays, cfg.stayout)
    xs, ys = horizon_positions(best, pos, float(speed), m.sample_time)
    terminal = math.hypot(xs[-1] - goal[0], ys[-1] - goal[1])
    return MpcPlan(best, float(cost), float(dist), terminal, float(worst),
                   bool(worst <= FEASIBILITY_TOL), int(idx), starts)


def horizon_positions(headings, start, speed: float, sample_time: float) -> tuple[np.ndarray, np.ndarray]:
    """Sample positions of a heading sequence; sample k is reached after k headings."""
    headings = np.asarray(headings, dtype=float)
    x = [float(start[0])]
    y = [float(start[1])]
    step = speed * sample_time
    for h in headings[:-1]:
        x.append(x[-1] + step * math.cos(h))
        y.append(y[-1] + step * math.sin(h))
    return np.array(x), np.array(y)
