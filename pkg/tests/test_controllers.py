import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dmcguide import kernels
from dmcguide.controllers import (ControlConfig, MpcConfig, clip_to_threshold, horizon_positions,
                                  mpc_plan, psi_nominal, risk_legacy, simple_decision, simple_step,
                                  switching_surface_metric)
from dmcguide.dmc import DmcMode, dmc_penetration
from dmcguide.geometry import ThreatParams, rho, wrap_angle
from dmcguide.sim import AgentState, ThreatState

from conftest import FIG

XI_STAR_D1 = 1.4594553124539327
EPS10 = math.radians(10)
TWIN = ThreatParams(0.9, 0.947, 0.053)


def dmc_of(pos, psi, threats, stayout=False):
    arr = kernels.ThreatArrays.from_threats(threats)
    return kernels.dmc_at(pos[0], pos[1], psi, arr, stayout)[0]


class TestNominal:
    @pytest.mark.parametrize("a, g, expected", [
        ((0, 0), (1, 0), 0.0), ((0, 0), (-1, 0), math.pi), ((2, 3), (2, 5), math.pi / 2)])
    def test_examples(self, a, g, expected):
        assert psi_nominal(a, g) == pytest.approx(expected)

    def test_coincident(self):
        with pytest.raises(ValueError):
            psi_nominal((1, 1), (1, 1))


class TestSimple:
    def test_no_threats(self):
        assert simple_step(AgentState((0, 0)), (3, 4), [], ControlConfig()) == pytest.approx(math.atan2(4, 3))

    def test_dead_ahead(self):
        a = AgentState((0.0, 0.0))
        t = [ThreatState((1.0, 0.0), FIG)]
        assert simple_step(a, (5.0, 0.0), t, ControlConfig()) == pytest.approx(XI_STAR_D1, abs=1e-12)
        turn = simple_step(a, (5.0, 0.0), t, ControlConfig(epsilon=EPS10))
        assert turn == pytest.approx(XI_STAR_D1 - EPS10, abs=1e-12)
        assert turn == pytest.approx(1.2850, abs=1e-4)

    def test_within_threshold_untouched(self):
        a = AgentState((0.0, 0.0))
        t = [ThreatState((1.0, 0.0), FIG)]
        goal = (math.cos(1.4), 10 * math.sin(1.4))
        nom = psi_nominal((0, 0), goal)
        assert abs(dmc_penetration(FIG, 1.0, nom).value) < EPS10
        assert simple_step(a, goal, t, ControlConfig(epsilon=EPS10)) == nom

    def test_clip_helper(self):
        assert clip_to_threshold(0.2, 0.05, 0.1) == 0.2
        assert clip_to_threshold(0.2, 0.5, 0.1) == pytest.approx(0.6)
        assert clip_to_threshold(0.2, -0.5, 0.1) == pytest.approx(-0.2)

    @given(st.floats(0.62, 1.49), st.floats(-math.pi, math.pi), st.floats(0.0, 0.5))
    def test_threshold_identity(self, d, lam, eps):
        # single threat: once clipped, the applied heading sits exactly at |DMC| = eps
        t = [ThreatState((d * math.cos(lam), d * math.sin(lam)), FIG)]
        goal = (3 * d * math.cos(lam), 3 * d * math.sin(lam))
        cfg = ControlConfig(epsilon=eps)
        dec = simple_decision((0.0, 0.0), goal, t, cfg)
        if abs(dec.nominal_dmc) > eps:
            got = dmc_penetration(FIG, d, wrap_angle(dec.heading - lam)).value
            assert abs(got) == pytest.approx(eps, abs=1e-6)

    def test_clipping_minimal(self):
        rng = np.random.default_rng(4)
        sweep = np.linspace(-math.pi, math.pi, 3600, endpoint=False)
        res = 2 * math.pi / 3600
        checked = 0
        for _ in range(60):
            threats = [ThreatState(tuple(rng.uniform(-1.5, 1.5, 2)), TWIN) for _ in range(int(rng.integers(1, 4)))]
            pos = (0.0, 0.0)
            goal = tuple(rng.uniform(-5, 5, 2))
            eps = float(rng.choice([0.0, EPS10, 0.4]))
            cfg = ControlConfig(epsilon=eps)
            dec = simple_decision(pos, goal, threats, cfg)
            if dec.safe_set_empty:
                continue
            arr = kernels.ThreatArrays.from_threats(threats)
            vals, _ = kernels.dmc_many(np.zeros(3600), np.zeros(3600), sweep, arr, False)
            ok = np.abs(vals) <= eps + 1e-9
            best = np.min(np.abs(wrap_angle(sweep[ok] - dec.nominal)))
            assert abs(wrap_angle(dec.heading - dec.nominal)) <= best + res
            assert abs(dmc_of(pos, dec.heading, threats)) <= eps + 1e-6
            checked += 1
        assert checked > 30

    def test_empty_safe_set_fallback(self):
        threats = [ThreatState((0.55 * math.cos(a), 0.55 * math.sin(a)), FIG) for a in (0, 1.6, 3.2, 4.8)]
        dec = simple_decision((0.0, 0.0), (5.0, 0.0), threats, ControlConfig())
        assert dec.safe_set_empty and dec.active
        assert -math.pi < dec.heading <= math.pi


class TestSwitchingSurface:
    def test_symmetric_single(self):
        a = AgentState((0.0, 0.0))
        assert switching_surface_metric(a, (5, 0), [ThreatState((1, 0), FIG)], ControlConfig()) == pytest.approx(0, abs=1e-12)

    def test_on_upper_edge(self):
        a = AgentState((0.0, 0.0))
        t = [ThreatState((1, 0), FIG)]
        goal = (5 * math.cos(XI_STAR_D1), 5 * math.sin(XI_STAR_D1))
        m = switching_surface_metric(a, goal, t, ControlConfig())
        assert m == pytest.approx(-2 * XI_STAR_D1, abs=1e-9)

    def test_sides(self):
        a = AgentState((0.0, 0.0))
        t = [ThreatState((1, 0), FIG)]
        assert switching_surface_metric(a, (5, 1), t, ControlConfig()) < 0
        assert switching_surface_metric(a, (5, -1), t, ControlConfig()) > 0

    def test_symmetric_pair(self):
        a = AgentState((-2.5, 0.0))
        ts = [ThreatState((-1.0, 0.6), TWIN), ThreatState((-1.0, -0.6), TWIN)]
        assert abs(switching_surface_metric(a, (4, 0), ts, ControlConfig())) < 1e-9

    def test_not_applicable(self):
        a = AgentState((0.0, 0.0))
        assert switching_surface_metric(a, (5, 0), [ThreatState((9, 0), FIG)], ControlConfig()) is None


class TestRisk:
    def test_examples(self):
        assert risk_legacy(FIG, 0.75, 0.0) == pytest.approx(1.0)
        assert risk_legacy(FIG, rho(FIG, 0.7), 0.7) == pytest.approx(0.0, abs=1e-15)
        assert risk_legacy(FIG, 2.0, 0.0) == 0.0

    @given(st.floats(-math.pi, math.pi), st.floats(0.01, 0.99), st.floats(0.01, 0.99))
    def test_decreasing(self, xi, a, b):
        lo, hi = sorted((a, b))
        if hi - lo < 1e-6:
            return
        boundary = rho(FIG, xi)
        assert risk_legacy(FIG, lo * boundary, xi) > risk_legacy(FIG, hi * boundary, xi)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            ControlConfig(epsilon=math.pi)
        with pytest.raises(ValueError):
            ControlConfig(controller="pid")
        with pytest.raises(ValueError):
            MpcConfig(horizon_steps=0)
        with pytest.raises(ValueError):
            MpcConfig(penalty_weight=0)
        assert ControlConfig(controller="mpc").mpc == MpcConfig()
        assert ControlConfig(dmc_mode="stayout").stayout


class TestMpc:
    def test_no_threats_straight(self):
        cfg = ControlConfig(controller="mpc", mpc=MpcConfig(horizon_steps=5, sample_time=0.1))
        a = AgentState((0.0, 0.0))
        plan = mpc_plan(a, (3.0, 4.0), [], cfg)
        assert len(plan.headings) == 6
        np.testing.assert_allclose(plan.headings, math.atan2(4, 3), atol=1e-12)
        # sample k is reached after k headings, so H steps of travel in total
        assert plan.terminal_distance == pytest.approx(max(0.0, 5.0 - 0.5), abs=1e-9)

    def test_far_from_threats_zero_dmc(self):
        cfg = ControlConfig(controller="mpc", mpc=MpcConfig(horizon_steps=5, sample_time=0.1))
        ts = [ThreatState((0.0, 5.0), FIG)]
        plan = mpc_plan(AgentState((0.0, 0.0)), (1.0, 0.0), ts, cfg)
        xs, ys = horizon_positions(plan.headings, (0.0, 0.0), 1.0, 0.1)
        assert all(dmc_of((x, y), h, ts) == 0.0 for x, y, h in zip(xs, ys, plan.headings))

    def test_dominates_simple_replay(self):
        ts = [ThreatState((-1.5, 0.0), TWIN), ThreatState((-0.5, 1.2), TWIN)]
        cfg = ControlConfig(epsilon=EPS10, controller="mpc",
                            mpc=MpcConfig(horizon_steps=25, sample_time=0.07, restarts=4, max_iterations=20))
        impl = kernels.backend_module()
        arr = kernels.ThreatArrays.from_threats(ts)
        for start in [(-4.0, 0.05), (-3.3, 0.1), (-2.8, -0.3), (-2.2, 0.7)]:
            plan = mpc_plan(AgentState(start), (4.0, 0.0), ts, cfg)
            replay = impl.simple_replay(start[0], start[1], 1.0, 0.07, 4.0, 0.0, EPS10, 26, *arr, False,
                                        psi_nominal(start, (4.0, 0.0)))
            xs, ys = horizon_positions(replay, start, 1.0, 0.07)
            replay_dist = math.hypot(xs[-1] - 4.0, ys[-1])
            assert plan.feasible
            assert plan.terminal_distance <= replay_dist + 1e-9

    def test_seeded_determinism(self):
        ts = [ThreatState((-1.5, 0.0), TWIN)]
        cfg = ControlConfig(epsilon=EPS10, controller="mpc", mpc=MpcConfig(restarts=5, max_iterations=5, seed=3))
        a = mpc_plan(AgentState((-3.3, 0.1)), (4, 0), ts, cfg)
        b = mpc_plan(AgentState((-3.3, 0.1)), (4, 0), ts, cfg)
        np.testing.assert_array_equal(a.headings, b.headings)
        np.testing.assert_array_equal(a.starts, b.starts)

    def test_few_restarts_keep_replay(self):
        ts = [ThreatState((-1.5, 0.0), TWIN)]
        cfg = ControlConfig(epsilon=EPS10, controller="mpc", mpc=MpcConfig(restarts=1, max_iterations=2))
        plan = mpc_plan(AgentState((-3.3, 0.1)), (4, 0), ts, cfg)
        assert plan.starts.shape[0] == 1
        assert plan.feasible
