import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from dmcguide.dmc import (Mode, dmc_penetration, dmc_stayout, xi_star_boundary, xi_star_stayout,
                          xi_star_tangent)
from dmcguide.geometry import ThreatParams, bez_boundary_center, critical_distance, rho

from conftest import FIG, bisect, threat_params

XI_STAR_D1 = 1.4594553124539327     # arccos(0.1 / 0.9)
TANGENT_D2 = 0.5527151130967832     # arcsin(0.525)
XI_BAR_12 = 1.0654358165107396      # arcsin(1.05 / 1.2)
CRIT_ANGLE = 1.165904540509813      # both branches at d_crit


class TestXiStarBoundary:
    def test_examples(self):
        s = xi_star_boundary(FIG, 1.0)
        assert s.mode is Mode.BOUNDARY
        assert s.angle == pytest.approx(XI_STAR_D1, abs=1e-12)
        assert s.angle == pytest.approx(math.acos(0.1 / 0.9), abs=1e-15)
        assert xi_star_boundary(FIG, 3.0).mode is Mode.ALL_SAFE
        assert xi_star_boundary(FIG, 0.3).mode is Mode.ALL_UNSAFE
        assert xi_star_boundary(FIG, 1.5).angle == pytest.approx(0.0, abs=1e-9)

    def test_bisection_oracle(self):
        root = bisect(lambda x: rho(FIG, x) - 1.0, 0.0, math.pi)
        assert root == pytest.approx(XI_STAR_D1, abs=1e-12)

    def test_endpoints_clamped(self):
        assert xi_star_boundary(FIG, 0.6).angle == pytest.approx(math.pi, abs=1e-7)
        assert xi_star_boundary(FIG, 0.6).mode is Mode.BOUNDARY

    def test_non_positive_distance(self):
        with pytest.raises(ValueError):
            xi_star_boundary(FIG, 0.0)

    @given(threat_params(), st.floats(0.001, 0.999))
    def test_round_trip(self, p, frac):
        lo, hi = rho(p, math.pi), rho(p, 0.0)
        d = lo + frac * (hi - lo)
        s = xi_star_boundary(p, d)
        assert s.mode is Mode.BOUNDARY
        assert rho(p, s.angle) == pytest.approx(d, abs=1e-9)

    @given(threat_params(), st.floats(0.01, 10.0))
    def test_classification_brute_force(self, p, d):
        xi = np.linspace(-math.pi, math.pi, 3600, endpoint=False)
        inside = d <= rho(p, xi)
        # stay clear of the tangential grazing cases
        assume(abs(d - rho(p, 0.0)) > 1e-9 and abs(d - rho(p, math.pi)) > 1e-9)
        mode = xi_star_boundary(p, d).mode
        if inside.all():
            assert mode is Mode.ALL_UNSAFE
        elif not inside.any():
            assert mode is Mode.ALL_SAFE
        else:
            assert mode is Mode.BOUNDARY


class TestTangent:
    def test_examples(self):
        assert xi_star_tangent(FIG, 2.0) == pytest.approx(TANGENT_D2, abs=1e-12)
        assert 2.0 * math.sin(xi_star_tangent(FIG, 2.0)) == pytest.approx(1.05, abs=1e-12)
        assert xi_star_tangent(FIG, 1.05) == pytest.approx(math.pi / 2, abs=1e-12)
        assert xi_star_tangent(FIG, 1e9) < 1e-8

    def test_inside_capture_region(self):
        with pytest.raises(ValueError):
            xi_star_tangent(FIG, 1.0)

    @given(threat_params(), st.floats(1.0, 50.0))
    def test_identity(self, p, scale):
        d = critical_distance(p) * scale
        assert d * math.sin(xi_star_tangent(p, d)) == pytest.approx(p.R + p.r, abs=1e-9)

    @given(threat_params(), st.floats(1.0, 20.0), st.floats(-math.pi, math.pi), st.sampled_from([-1, 1]))
    def test_ray_clears_capture_disc(self, p, scale, lam, side):
        # agent at origin, threat along bearing lam; tangent heading psi = lam + side * xi_bar
        d = critical_distance(p) * scale
        t = np.array([d * math.cos(lam), d * math.sin(lam)])
        psi = lam + side * xi_star_tangent(p, d)
        u = np.array([math.cos(psi), math.sin(psi)])
        c = bez_boundary_center(p, t, psi)
        s = np.linspace(0.0, 4.0 * d, 4001)
        pts = s[:, None] * u[None, :]
        gap = np.linalg.norm(pts - c[None, :], axis=1) - (p.R + p.r)
        assert gap.min() >= -1e-9 * max(1.0, d)


class TestStayoutBranch:
    def test_examples(self):
        d_c = critical_distance(FIG)
        a = xi_star_boundary(FIG, d_c).angle
        b = xi_star_tangent(FIG, d_c)
        assert a == pytest.approx(b, abs=1e-9)
        assert a == pytest.approx(CRIT_ANGLE, abs=1e-12)
        s = xi_star_stayout(FIG, 2.0)
        assert s.mode is Mode.TANGENT and s.angle == pytest.approx(TANGENT_D2, abs=1e-12)
        assert xi_star_stayout(FIG, 0.3).mode is Mode.ALL_UNSAFE
        assert xi_star_stayout(FIG, 1.0).mode is Mode.BOUNDARY

    @given(threat_params())
    def test_continuity(self, p):
        d_c = critical_distance(p)
        assert xi_star_boundary(p, d_c).angle == pytest.approx(xi_star_tangent(p, d_c), abs=1e-6)


class TestPenetration:
    def test_examples(self):
        r = dmc_penetration(FIG, 1.0, 0.5)
        assert r.value == pytest.approx(XI_STAR_D1 - 0.5, abs=1e-12)
        assert r.nearest_safe_aspect == pytest.approx(XI_STAR_D1, abs=1e-12)
        assert abs(r.value) == pytest.approx(min(abs(0.5 - XI_STAR_D1), abs(0.5 + XI_STAR_D1)))
        assert dmc_penetration(FIG, 1.0, 2.0).value == 0.0
        assert dmc_penetration(FIG, 1.0, -0.5).value == pytest.approx(-(XI_STAR_D1 - 0.5), abs=1e-12)

    def test_outside_and_saturated(self):
        for xi in np.linspace(-math.pi, math.pi, 37):
            assert dmc_penetration(FIG, 1.6, xi).value == 0.0
        r = dmc_penetration(FIG, 0.3, 0.2)
        assert r.mode is Mode.ALL_UNSAFE and r.value == pytest.approx(math.pi)
        assert dmc_penetration(FIG, 0.3, -0.2).value == pytest.approx(-math.pi)

    def test_head_on_tie_turns_ccw(self):
        assert dmc_penetration(FIG, 1.0, 0.0).value == pytest.approx(XI_STAR_D1)

    @given(threat_params(), st.floats(0.05, 10.0), st.floats(1e-6, math.pi - 1e-6))
    def test_odd(self, p, d, xi):
        a = dmc_penetration(p, d, xi).value
        b = dmc_penetration(p, d, -xi).value
        assert a == pytest.approx(-b, abs=1e-12)

    @given(threat_params(), st.floats(0.001, 0.999), st.floats(-math.pi, math.pi))
    def test_lands_on_boundary(self, p, frac, xi):
        lo, hi = rho(p, math.pi), rho(p, 0.0)
        d = lo + frac * (hi - lo)
        r = dmc_penetration(p, d, xi)
        assert r.mode is Mode.BOUNDARY
        if r.value != 0.0:
            xi_c = xi + r.value
            assert d >= rho(p, xi_c) - 1e-9
            assert d == pytest.approx(rho(p, xi_c), abs=1e-9)


class TestStayout:
    def test_examples(self):
        assert dmc_stayout(FIG, 2.0, 0.1).value == 0.0
        r = dmc_stayout(FIG, 1.2, 0.0)
        assert abs(r.value) == pytest.approx(XI_BAR_12, abs=1e-12)
        assert r.mode is Mode.TANGENT

    def test_nonzero_only_inside_band(self):
        # a nonzero stay-out cue always points out of the band |xi| < xi_bar
        for d in np.linspace(0.65, 1.6, 40):
            band = xi_star_stayout(FIG, d)
            for xi in np.linspace(-math.pi, math.pi, 721):
                v = dmc_stayout(FIG, d, xi).value
                if v != 0.0 and band.angle is not None:
                    assert abs(xi) < band.angle + 1e-12
                    assert abs(xi + v) == pytest.approx(band.angle, abs=1e-12)

    @given(threat_params(), st.floats(0.05, 10.0), st.floats(1e-6, math.pi - 1e-6))
    def test_odd(self, p, d, xi):
        assert dmc_stayout(p, d, xi).value == pytest.approx(-dmc_stayout(p, d, -xi).value, abs=1e-12)

    @given(threat_params(), st.floats(0.05, 10.0), st.floats(-math.pi, math.pi))
    def test_dominates_penetration(self, p, d, xi):
        a = dmc_penetration(p, d, xi)
        b = dmc_stayout(p, d, xi)
        if a.value != 0.0 and b.value != 0.0 and a.mode is not Mode.ALL_UNSAFE:
            assert abs(b.value) >= abs(a.value) - 1e-12

    def test_tangent_heading_clears_bez(self):
        # turning by the stay-out cue leaves the agent outside the BEZ at the new aspect
        p = ThreatParams(0.7, 1.0, 0.1)
        for d in np.linspace(critical_distance(p), rho(p, 0.0), 25):
            for xi in np.linspace(-1.0, 1.0, 41):
                v = dmc_stayout(p, d, xi).value
                assert d >= rho(p, xi + v) - 1e-9
