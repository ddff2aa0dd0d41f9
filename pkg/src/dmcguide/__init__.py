"""Dynamic maneuvering cue (DMC) guidance around basic engagement zones."""

from ._accel import BACKEND
from .cones import (AngularInterval, HeadingSet, bearing, dmc_multi, intersect, joint_safe_cone,
                    safe_cone_for_threat)
from .controllers import (ControlConfig, MpcConfig, MpcPlan, mpc_plan, psi_nominal, risk_legacy,
                          simple_step, switching_surface_metric)
from .dmc import (DmcMode, DmcResult, Mode, XiStar, dmc_penetration, dmc_stayout, xi_star_boundary,
                  xi_star_stayout, xi_star_tangent)
from .geometry import (ThreatParams, aspect_angle, bez_boundary_center, bez_contains, critical_distance,
                       max_reach_radius, no_escape_radius, rho, wrap_angle)
from .scenario import Scenario, ScenarioError, fieldmap, load_scenario, load_scenario_file, sweep, write_trajectory
from .sim import AgentState, ThreatState, TrajectoryRecord, accumulate_risk, run, step_agent, step_threat

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "AngularInterval", "HeadingSet", "bearing", "dmc_multi", "intersect", "joint_safe_cone",
    "safe_cone_for_threat", "ControlConfig", "MpcConfig", "MpcPlan", "mpc_plan", "psi_nominal",
    "risk_legacy", "simple_step", "switching_surface_metric", "DmcMode", "DmcResult", "Mode", "XiStar",
    "dmc_penetration", "dmc_stayout", "xi_star_boundary", "xi_star_stayout", "xi_star_tangent",
    "ThreatParams", "aspect_angle", "bez_boundary_center", "bez_contains", "critical_distance",
    "max_reach_radius", "no_escape_radius", "rho", "wrap_angle", "Scenario", "ScenarioError", "fieldmap",
    "load_scenario", "load_scenario_file", "sweep", "write_trajectory", "AgentState", "ThreatState",
    "TrajectoryRecord", "accumulate_risk", "run", "step_agent", "step_threat",
]
