"""Closed-loop simulation of an agent steering around engagement zones."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import kernels
from .controllers import ControlConfig, committed_heading, mpc_plan, risk_legacy, simple_decision
from .geometry import ThreatParams, wrap_angle

STATIC = "static"
PURE_PURSUIT = "pure_pursuit"


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class AgentState:
    position: tuple[float, float]
    heading: float = 0.0
    speed: float = 1.0

    def __post_init__(self):
        if not self.speed > 0:
            raise ValueError(f"agent speed must be > 0, got {self.speed}")
        object.__setattr__(self, "position", (float(self.position[0]), float(self.position[1])))
        object.__setattr__(self, "heading", wrap_angle(float(self.heading)))


@dataclass(frozen=True)
class ThreatState:
    position: tuple[float, float]
    params: ThreatParams
    motion: str = STATIC
    vehicle_speed: float = 0.0

    def __post_init__(self):
        if self.motion not in (STATIC, PURE_PURSUIT):
            raise ValueError(f"unknown threat motion {self.motion!r}")
        if self.vehicle_speed < 0:
            raise ValueError("vehicle_speed must be >= 0")
        object.__setattr__(self, "position", (float(self.position[0]), float(self.position[1])))


def step_agent(state: AgentState, psi_cmd: float, dt: float) -> AgentState:
    """Simple motion: the heading changes instantly, then one forward-Euler step."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    psi = wrap_angle(psi_cmd)
    x, y = state.position
    step = state.speed * dt
    return replace(state, position=(x + step * math.cos(psi), y + step * math.sin(psi)), heading=psi)


def step_threat(threat: ThreatState, agent_pos, dt: float) -> ThreatState:
    if not dt > 0:
        raise ValueError("dt must be > 0")
    if threat.motion == STATIC or threat.vehicle_speed == 0.0:
        return threat
    tx, ty = threat.position
    dx, dy = agent_pos[0] - tx, agent_pos[1] - ty
    if dx == 0.0 and dy == 0.0:
        return threat
    lam = math.atan2(dy, dx)
    step = threat.vehicle_speed * dt
    return replace(threat, position=(tx + step * math.cos(lam), ty + step * math.sin(lam)))


@dataclass
class TrajectoryRecord:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    psi: np.ndarray
    dmc: np.ndarray
    active: np.ndarray
    risk: np.ndarray
    distances: np.ndarray  # (rows, threats)
    threat_xy: np.ndarray  # (rows, threats, 2)
    reached: bool
    captured: bool
    arrival_time: Optional[float]
    epsilon: float = 0.0
    safe_set_empty: np.ndarray = field(default=None, repr=False)
    infeasible_plans: int = 0

    @property
    def n_threats(self) -> int:
        return self.distances.shape[1]

    @property
    def max_dmc(self) -> float:
        return float(np.max(np.abs(self.dmc))) if len(self.dmc) else 0.0

    @property
    def path_length(self) -> float:
        return float(np.sum(np.hypot(np.diff(self.x), np.diff(self.y))))

    @property
    def accumulated_risk(self) -> float:
        return accumulate_risk(self)

    @property
    def first_activation_time(self) -> Optional[float]:
        idx = np.flatnonzero(self.active)
        return float(self.t[idx[0]]) if idx.size else None

    def metrics(self) -> dict:
        return {
            "arrival_time": self.arrival_time,
            "reached": self.reached,
            "captured": self.captured,
            "max_dmc": self.max_dmc,
            "accumulated_risk": self.accumulated_risk,
            "path_length": self.path_length,
        }


def accumulate_risk(record: TrajectoryRecord) -> float:
    """Trapezoidal time integral of the summed legacy risk channel."""
    if len(record.t) == 0:
        raise ValueError("empty trajectory")
    if len(record.t) == 1:
        return 0.0
    return float(np.trapezoid(record.risk, record.t))


def _total_risk(pos, psi, threats) -> float:
    total = 0.0
    for th in threats:
        d = math.dist(pos, th.position)
        if d == 0.0:
            continue
        lam = math.atan2(th.position[1] - pos[1], th.position[0] - pos[0])
        total += risk_legacy(th.params, d, wrap_angle(psi - lam))
    return total


def run(scenario, cfg: ControlConfig | None = None, seed: int | None = None) -> TrajectoryRecord:
    """Simulate ``scenario`` until the goal is reached, a threat captures, or time runs out.

    ``scenario`` needs ``agent`` (AgentState), ``goal``, ``threats`` (ThreatStates),
    and ``sim`` with ``dt``, ``t_max`` and ``goal_tol`` (None = one step of travel).
    """
    cfg = cfg or scenario.control
    sim = scenario.sim
    dt = sim.dt
    goal = tuple(map(float, scenario.goal))
    agent: AgentState = scenario.agent
    threats: list[ThreatState] = list(scenario.threats)
    goal_tol = sim.goal_tol if sim.goal_tol is not None else agent.speed * dt
    n_threats = len(threats)

    use_mpc = cfg.controller == "mpc"
    if use_mpc:
        mseed = cfg.mpc.seed if seed is None else seed
        rng = np.random.default_rng(mseed)
        hold = max(1, int(round(cfg.mpc.sample_time / dt)))
    plan_prev = None
    planned = None
    infeasible = 0
    commit_dir, commit_left = 0.0, 0

    rows_t, rows_x, rows_y, rows_psi, rows_dmc, rows_act, rows_risk, rows_empty = ([] for _ in range(8))
    rows_d, rows_txy = [], []
    reached = captured = False
    last_heading = agent.heading
    k = 0
    while True:
        t = round(k * dt, 12)
        pos = agent.position
        if not (math.isfinite(pos[0]) and math.isfinite(pos[1])):
            raise SimulationError(f"non-finite agent position {pos} at t={t}")
        dists = [math.dist(pos, th.position) for th in threats]
        reached = math.dist(pos, goal) <= goal_tol
        captured = any(d <= th.params.r for d, th in zip(dists, threats))
        arrays = kernels.ThreatArrays.from_threats(threats) if threats else None
        done = reached or captured or t > sim.t_max

        if done:
            heading, active, empty = last_heading, False, False
        else:
            dec = simple_decision(pos, goal, threats, cfg, arrays)
            active, empty = dec.active, dec.safe_set_empty
            heading = dec.heading
            if use_mpc and math.dist(pos, goal) <= agent.speed * cfg.mpc.sample_time:
                # final approach: a held heading would overshoot the goal disk
                plan_prev = None
            elif use_mpc:
                if k % hold == 0 or planned is None:
                    plan = mpc_plan(agent, goal, threats, cfg, previous=plan_prev, rng=rng)
                    plan_prev = plan.headings
                    planned = float(plan.headings[0])
                    infeasible += 0 if plan.feasible else 1
                # safety filter between replans: threats and agent have moved since the plan
                heading = simple_decision(pos, goal, threats, cfg, arrays, candidate=planned).heading
            elif cfg.commit_steps > 0:
                commit_left = max(commit_left - 1, 0)
                if active and not empty:
                    turn = wrap_angle(heading - dec.nominal)
                    if commit_left > 0 and commit_dir * turn < 0:
                        heading = committed_heading(pos, dec.nominal, threats, cfg, commit_dir)
                    else:
                        commit_dir, commit_left = math.copysign(1.0, turn), cfg.commit_steps

        if threats:
            dmc_val, _ = kernels.dmc_at(pos[0], pos[1], heading, arrays, cfg.stayout)
        else:
            dmc_val = 0.0
        rows_t.append(t)
        rows_x.append(pos[0])
        rows_y.append(pos[1])
        rows_psi.append(heading)
        rows_dmc.append(dmc_val)
        rows_act.append(active)
        rows_empty.append(empty)
        rows_risk.append(_total_risk(pos, heading, threats))
        rows_d.append(dists)
        rows_txy.append([th.position for th in threats])
        if done:
            break

        last_heading = heading
        threats = [step_threat(th, pos, dt) for th in threats]
        agent = step_agent(agent, heading, dt)
        k += 1

    return TrajectoryRecord(
        t=np.array(rows_t),
        x=np.array(rows_x),
        y=np.array(rows_y),
        psi=np.array(rows_psi),
        dmc=np.array(rows_dmc),
        active=np.array(rows_act, dtype=bool),
        risk=np.array(rows_risk),
        distances=np.array(rows_d, dtype=float).reshape(len(rows_t), n_threats),
        threat_xy=np.array(rows_txy, dtype=float).reshape(len(rows_t), n_threats, 2),
        reached=reached,
        captured=captured,
        arrival_time=rows_t[-1] if reached else None,
        epsilon=cfg.epsilon,
        safe_set_empty=np.array(rows_empty, dtype=bool),
        infeasible_plans=infeasible,
    )
