"""Scenario files, trajectory/metrics/grid output, field maps and threshold sweeps.

Scenario documents are JSON objects. Angles are given in degrees in the file
and converted to radians here, nowhere else. Unknown keys are rejected.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from . import kernels
from .controllers import ControlConfig, MpcConfig
from .dmc import DmcMode
from .geometry import ThreatParams, wrap_angle
from .sim import PURE_PURSUIT, STATIC, AgentState, ThreatState, TrajectoryRecord, run

R_CONSISTENCY_TOL = 1e-9
CSV_FORMAT = "%.12g"
METRICS_KEYS = ("arrival_time", "reached", "captured", "max_dmc", "accumulated_risk", "path_length")


class ScenarioError(ValueError):
    """Invalid scenario document; the message names the offending field."""


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.01
    t_max: float = 50.0
    goal_tol: Optional[float] = None


@dataclass(frozen=True)
class Scenario:
    agent: AgentState
    goal: tuple[float, float]
    threats: tuple[ThreatState, ...]
    sim: SimConfig
    control: ControlConfig


# -- parsing -----------------------------------------------------------------

_ALLOWED_KEYS = {
    "": {"agent", "goal", "threats", "sim", "control"},
    "agent": {"x", "y", "heading0", "speed"},
    "goal": {"x", "y"},
    "threat": {"x", "y", "mu", "R", "v_T_weapon", "t_r", "r", "motion", "vehicle_speed"},
    "sim": {"dt", "t_max", "goal_tol"},
    "control": {"controller", "epsilon_deg", "dmc_mode", "mpc", "commit_steps"},
    "mpc": {"H", "ts", "penalty_weight", "restarts", "max_iterations", "seed"},
}


def _obj(value, path: str, kind: str) -> dict:
    if not isinstance(value, dict):
        raise ScenarioError(f"{path or 'document'}: expected an object")
    unknown = sorted(set(value) - _ALLOWED_KEYS[kind])
    if unknown:
        raise ScenarioError(f"{path or 'document'}: unknown key(s) {unknown}")
    return value


def _num(obj: dict, key: str, path: str, default: Any = ..., check=None, rule: str = "") -> Any:
    full = f"{path}.{key}" if path else key
    if key not in obj:
        if default is ...:
            raise ScenarioError(f"{full}: required field missing")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ScenarioError(f"{full}: expected a finite number, got {v!r}")
    if check is not None and not check(v):
        raise ScenarioError(f"{full}: must be {rule}, got {v!r}")
    return float(v)


def _int(obj: dict, key: str, path: str, default: int, low: int) -> int:
    full = f"{path}.{key}"
    v = obj.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScenarioError(f"{full}: expected an integer, got {v!r}")
    if v < low:
        raise ScenarioError(f"{full}: must be >= {low}, got {v}")
    return v


def _choice(obj: dict, key: str, path: str, default: str, options: Sequence[str]) -> str:
    v = obj.get(key, default)
    if v not in options:
        raise ScenarioError(f"{path}.{key}: must be one of {list(options)}, got {v!r}")
    return v


def _parse_threat(obj, path: str) -> ThreatState:
    obj = _obj(obj, path, "threat")
    x = _num(obj, "x", path)
    y = _num(obj, "y", path)
    mu = _num(obj, "mu", path, check=lambda v: 0 < v < 1, rule="in (0,1)")
    r = _num(obj, "r", path, 0.0, lambda v: v >= 0, ">= 0")
    R = _num(obj, "R", path, None, lambda v: v > 0, "> 0")
    vw = _num(obj, "v_T_weapon", path, None, lambda v: v > 0, "> 0")
    tr = _num(obj, "t_r", path, None, lambda v: v > 0, "> 0")
    if (vw is None) != (tr is None):
        raise ScenarioError(f"{path}: v_T_weapon and t_r must be given together")
    if vw is not None:
        reach = vw * tr
        if R is not None and abs(R - reach) > R_CONSISTENCY_TOL:
            raise ScenarioError(f"{path}.R: {R} inconsistent with v_T_weapon * t_r = {reach}")
        R = reach
    if R is None:
        raise ScenarioError(f"{path}.R: required (or v_T_weapon and t_r)")
    motion = _choice(obj, "motion", path, STATIC, (STATIC, PURE_PURSUIT))
    vs = _num(obj, "vehicle_speed", path, 0.0, lambda v: v >= 0, ">= 0")
    if motion == PURE_PURSUIT and "vehicle_speed" not in obj:
        raise ScenarioError(f"{path}.vehicle_speed: required for pure_pursuit motion")
    return ThreatState((x, y), ThreatParams(mu=mu, R=R, r=r), motion, vs)


def _parse_control(obj) -> ControlConfig:
    obj = _obj(obj, "control", "control")
    controller = _choice(obj, "controller", "control", "simple", ("simple", "mpc"))
    eps = _num(obj, "epsilon_deg", "control", 0.0, lambda v: 0 <= v < 180, "in [0, 180)")
    mode = _choice(obj, "dmc_mode", "control", "penetration", ("penetration", "stayout"))
    commit = _int(obj, "commit_steps", "control", 0, 0)
    mpc = None
    if "mpc" in obj or controller == "mpc":
        m = _obj(obj.get("mpc", {}), "control.mpc", "mpc")
        d = MpcConfig()
        mpc = MpcConfig(
            horizon_steps=_int(m, "H", "control.mpc", d.horizon_steps, 1),
            sample_time=_num(m, "ts", "control.mpc", d.sample_time, lambda v: v > 0, "> 0"),
            penalty_weight=_num(m, "penalty_weight", "control.mpc", d.penalty_weight, lambda v: v > 0, "> 0"),
            restarts=_int(m, "restarts", "control.mpc", d.restarts, 1),
            max_iterations=_int(m, "max_iterations", "control.mpc", d.max_iterations, 0),
            seed=_int(m, "seed", "control.mpc", d.seed, 0),
        )
    return ControlConfig(epsilon=math.radians(eps), dmc_mode=DmcMode(mode), controller=controller,
                         mpc=mpc, commit_steps=commit)


def parse_scenario(doc: dict) -> Scenario:
    doc = _obj(doc, "", "")
    a = _obj(doc.get("agent"), "agent", "agent")
    agent = AgentState(
        position=(_num(a, "x", "agent"), _num(a, "y", "agent")),
        heading=math.radians(_num(a, "heading0", "agent", 0.0)),
        speed=_num(a, "speed", "agent", 1.0, lambda v: v > 0, "> 0"),
    )
    g = _obj(doc.get("goal"), "goal", "goal")
    goal = (_num(g, "x", "goal"), _num(g, "y", "goal"))
    raw_threats = doc.get("threats", [])
    if not isinstance(raw_threats, list):
        raise ScenarioError("threats: expected a list")
    threats = tuple(_parse_threat(t, f"threats[{i}]") for i, t in enumerate(raw_threats))
    s = _obj(doc.get("sim", {}), "sim", "sim")
    sim = SimConfig(
        dt=_num(s, "dt", "sim", 0.01, lambda v: v > 0, "> 0"),
        t_max=_num(s, "t_max", "sim", 50.0, lambda v: v > 0, "> 0"),
        goal_tol=_num(s, "goal_tol", "sim", None, lambda v: v > 0, "> 0"),
    )
    control = _parse_control(doc.get("control", {}))
    return Scenario(agent, goal, threats, sim, control)


def load_scenario(text: bytes | str) -> Scenario:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ScenarioError(f"scenario is not valid UTF-8: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return parse_scenario(doc)


def load_scenario_file(path: str | os.PathLike) -> Scenario:
    return load_scenario(Path(path).read_bytes())


def scenario_to_dict(scn: Scenario) -> dict:
    """Fully resolved scenario in file units (degrees), loadable by :func:`load_scenario`."""
    c = scn.control
    control = {
        "controller": c.controller,
        "epsilon_deg": math.degrees(c.epsilon),
        "dmc_mode": c.dmc_mode.value,
        "commit_steps": c.commit_steps,
    }
    if c.mpc is not None:
        m = c.mpc
        control["mpc"] = {"H": m.horizon_steps, "ts": m.sample_time, "penalty_weight": m.penalty_weight,
                          "restarts": m.restarts, "max_iterations": m.max_iterations, "seed": m.seed}
    sim = {"dt": scn.sim.dt, "t_max": scn.sim.t_max}
    if scn.sim.goal_tol is not None:
        sim["goal_tol"] = scn.sim.goal_tol
    return {
        "agent": {"x": scn.agent.position[0], "y": scn.agent.position[1],
                  "heading0": math.degrees(scn.agent.heading), "speed": scn.agent.speed},
        "goal": {"x": scn.goal[0], "y": scn.goal[1]},
        "threats": [
            {"x": t.position[0], "y": t.position[1], "mu": t.params.mu, "R": t.params.R,
             "r": t.params.r, "motion": t.motion, "vehicle_speed": t.vehicle_speed}
            for t in scn.threats
        ],
        "sim": sim,
        "control": control,
    }


def with_epsilon_deg(scn: Scenario, eps_deg: float) -> Scenario:
    if not 0 <= eps_deg < 180:
        raise ScenarioError(f"epsilon_deg must be in [0, 180), got {eps_deg}")
    return replace(scn, control=replace(scn.control, epsilon=math.radians(eps_deg)))


def with_seed(scn: Scenario, seed: int) -> Scenario:
    mpc = scn.control.mpc
    if mpc is None:
        return scn
    return replace(scn, control=replace(scn.control, mpc=replace(mpc, seed=seed)))


# -- trajectory output -------------------------------------------------------

def trajectory_header(n_threats: int) -> list[str]:
    return ["t", "x", "y", "psi", "dmc", "active", "risk"] + [f"d_{i + 1}" for i in range(n_threats)]


def write_trajectory(record: TrajectoryRecord, out) -> None:
    """Write the per-step CSV to a path or text stream."""
    if isinstance(out, (str, os.PathLike)):
        try:
            with open(out, "w", newline="") as fh:
                write_trajectory(record, fh)
        except OSError as exc:
            raise OSError(f"cannot write trajectory to {out}: {exc}") from exc
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(trajectory_header(record.n_threats))
    cols = [record.t, record.x, record.y, record.psi, record.dmc]
    for i in range(len(record.t)):
        row = [CSV_FORMAT % c[i] for c in cols]
        row.append("1" if record.active[i] else "0")
        row.append(CSV_FORMAT % record.risk[i])
        row.extend(CSV_FORMAT % d for d in record.distances[i])
        w.writerow(row)


def read_trajectory_csv(src) -> dict[str, np.ndarray]:
    if isinstance(src, (str, os.PathLike)):
        with open(src, newline="") as fh:
            return read_trajectory_csv(fh)
    rows = list(csv.reader(src))
    header, body = rows[0], rows[1:]
    data = np.array(body, dtype=float).reshape(len(body), len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def metrics_document(record: TrajectoryRecord, scenario: Scenario | None = None) -> dict:
    doc = record.metrics()
    doc["first_activation_time"] = record.first_activation_time
    doc["infeasible_plans"] = record.infeasible_plans
    doc["backend"] = kernels.BACKEND
    if scenario is not None:
        doc["scenario"] = scenario_to_dict(scenario)
    return doc


def write_metrics(record: TrajectoryRecord, path, scenario: Scenario | None = None) -> None:
    try:
        Path(path).write_text(json.dumps(metrics_document(record, scenario), indent=2) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write metrics to {path}: {exc}") from exc


def save_run(record: TrajectoryRecord, scenario: Scenario, out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    traj, met = out / "trajectory.csv", out / "metrics.json"
    write_trajectory(record, traj)
    write_metrics(record, met, scenario)
    return traj, met


# -- field maps --------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    xmin: float
    xmax: float
    ymin: float
    ymax: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid needs nx, ny >= 2")
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError("grid ranges must have max > min")

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        dx = (self.xmax - self.xmin) / self.nx
        dy = (self.ymax - self.ymin) / self.ny
        return (self.xmin + (np.arange(self.nx) + 0.5) * dx,
                self.ymin + (np.arange(self.ny) + 0.5) * dy)


@dataclass
class FieldMap:
    x: np.ndarray  # (nx,)
    y: np.ndarray  # (ny,)
    abs_dmc: np.ndarray  # (ny, nx)
    inside_bez: np.ndarray  # (ny, nx)
    heading: float


def fieldmap(scenario: Scenario, heading: float, grid: Grid, mode: DmcMode | str | None = None,
             backend: str | None = None) -> FieldMap:
    """|DMC| at every cell center for a fixed agent heading, plus BEZ membership."""
    mode = DmcMode(mode) if mode is not None else scenario.control.dmc_mode
    xs, ys = grid.centers()
    gx, gy = np.meshgrid(xs, ys)
    px, py = gx.ravel(), gy.ravel()
    psi = np.full(px.shape, wrap_angle(heading))
    arrays = kernels.ThreatArrays.from_threats(scenario.threats)
    val, _ = kernels.dmc_many(px, py, psi, arrays, mode is DmcMode.STAYOUT, backend=backend)
    inside = kernels.inside_any_bez(px, py, psi, arrays, backend=backend)
    return FieldMap(xs, ys, np.abs(val).reshape(gx.shape), np.asarray(inside).reshape(gx.shape), heading)


def write_fieldmap(fm: FieldMap, out) -> None:
    if isinstance(out, (str, os.PathLike)):
        with open(out, "w", newline="") as fh:
            write_fieldmap(fm, fh)
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["x", "y", "abs_dmc", "inside_bez"])
    for j, y in enumerate(fm.y):
        for i, x in enumerate(fm.x):
            w.writerow([CSV_FORMAT % x, CSV_FORMAT % y, CSV_FORMAT % fm.abs_dmc[j, i],
                        "1" if fm.inside_bez[j, i] else "0"])


# -- threshold sweeps --------------------------------------------------------

SWEEP_HEADER = ["epsilon_deg", "arrival_time", "reached", "max_dmc", "accumulated_risk", "error"]


def _sweep_one(scenario: Scenario, eps_deg: float) -> dict:
    try:
        rec = run(with_epsilon_deg(scenario, eps_deg))
    except Exception as exc:  # recorded per row; the sweep carries on
        return {"epsilon_deg": eps_deg, "arrival_time": None, "reached": False,
                "max_dmc": None, "accumulated_risk": None, "error": f"{type(exc).__name__}: {exc}"}
    return {"epsilon_deg": eps_deg, "arrival_time": rec.arrival_time, "reached": rec.reached,
            "max_dmc": rec.max_dmc, "accumulated_risk": rec.accumulated_risk, "error": ""}


def sweep(scenario: Scenario, epsilons_deg: Iterable[float], workers: int | None = None) -> list[dict]:
    eps = [float(e) for e in epsilons_deg]
    if not eps:
        raise ValueError("sweep needs at least one epsilon")
    workers = workers or min(len(eps), os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda e: _sweep_one(scenario, e), eps))


def write_sweep(rows: Sequence[dict], out) -> None:
    if isinstance(out, (str, os.PathLike)):
        with open(out, "w", newline="") as fh:
            write_sweep(rows, fh)
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for row in rows:
        w.writerow([_cell(row[k]) for k in SWEEP_HEADER])


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return CSV_FORMAT % v
    return str(v)


def trajectory_csv_text(record: TrajectoryRecord) -> str:
    buf = io.StringIO()
    write_trajectory(record, buf)
    return buf.getvalue()
