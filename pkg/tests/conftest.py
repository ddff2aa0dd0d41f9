import math
from pathlib import Path

import pytest
from hypothesis import settings, strategies as st

from dmcguide.geometry import ThreatParams

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")

ROOT = Path(__file__).resolve().parent.parent
SCENARIOS = ROOT / "scenarios"

# the parameter set used throughout the worked examples
FIG = ThreatParams(mu=0.5, R=0.9, r=0.15)


@st.composite
def threat_params(draw):
    mu = draw(st.floats(0.05, 0.95))
    R = draw(st.floats(0.1, 5.0))
    r = draw(st.floats(0.0, 2.0))
    return ThreatParams(mu, R, r)


@pytest.fixture
def fig_params():
    return FIG


def scenario_path(name: str) -> Path:
    return SCENARIOS / name


def bisect(f, lo, hi, tol=1e-15, max_iter=200):
    flo = f(lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


TWO_PI = 2 * math.pi
