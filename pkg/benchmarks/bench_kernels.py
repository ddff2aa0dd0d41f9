"""Compare the numba and numpy kernels on a field map and an MPC solve.

    python benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import math
import time
from pathlib import Path

import numpy as np

from dmcguide import kernels
from dmcguide.controllers import FEASIBILITY_TOL, GOLDEN_ITERATIONS, SEARCH_HALF_WIDTH, SWEEP_TOL, _mpc_starts
from dmcguide.scenario import load_scenario_file

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def fieldmap_case(impl, arrays, n=400):
    xs = np.linspace(-2, 2, n)
    gx, gy = np.meshgrid(xs, xs)
    px, py = gx.ravel(), gy.ravel()
    psi = np.zeros_like(px)
    return lambda: impl.dmc_many(px, py, psi, *arrays, False)


def mpc_case(impl, scn):
    cfg = scn.control
    m = cfg.mpc
    arrays = kernels.ThreatArrays.from_threats(scn.threats)
    pos = scn.agent.position
    starts = _mpc_starts(pos, scn.agent.speed, scn.goal, scn.threats, cfg, arrays, None,
                         np.random.default_rng(m.seed))

    def go():
        return impl.plan(starts, pos[0], pos[1], scn.agent.speed, m.sample_time, scn.goal[0], scn.goal[1],
                         cfg.epsilon, m.penalty_weight, *arrays, cfg.stayout, m.max_iterations,
                         GOLDEN_ITERATIONS, SEARCH_HALF_WIDTH, SWEEP_TOL, FEASIBILITY_TOL)
    return go


def best_of(fn, repeat):
    fn()  # warm-up (JIT compile for numba)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    field = load_scenario_file(SCENARIOS / "fieldmap.json")
    mpc = load_scenario_file(SCENARIOS / "two_threats_mpc.json")
    field_arrays = kernels.ThreatArrays.from_threats(field.threats)

    print(f"{'case':<24}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for name, make in [("fieldmap 400x400", lambda impl: fieldmap_case(impl, field_arrays)),
                       ("mpc plan (1 solve)", lambda impl: mpc_case(impl, mpc))]:
        t = {b: best_of(make(kernels.backend_module(b)), args.repeat) for b in ("numba", "numpy")}
        ratio = t["numpy"] / t["numba"] if t["numba"] > 0 else math.inf
        print(f"{name:<24}{t['numba']:>12.4f}{t['numpy']:>12.4f}{ratio:>9.1f}x")


if __name__ == "__main__":
    main()
