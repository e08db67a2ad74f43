#!/usr/bin/env python3
"""Benchmark the compiled kernel backend against the pure-Python fallback.

Times three levels of the stack with each backend:
  * the fused horizon-cost kernel (the solver's inner loop),
  * one full receding-horizon solve,
  * a complete closed-loop scenario run.

Usage: python benchmarks/bench_backends.py [--kernel-calls N]
"""

import argparse
import time

from lanempc import MpcConfig, VehicleParams, kernels, run
from lanempc.dubins import build_lane_change_path
from lanempc.dynamics import VehicleState
from lanempc.mpc import solve_step, zero_sequence
from lanempc.scenario import static_three_vehicle


def time_kernel(backend, n_calls):
    mod = kernels.get(backend)
    params = VehicleParams()
    cfg = MpcConfig()
    state = (10.0, 0.1, 0.05, 30.0, 0.4, 0.02)
    controls = [0.05, 50.0, -0.02, -20.0, 0.01, 10.0]
    refs = (31.0, 0.5, 32.0, 0.7, 33.0, 1.0)
    args = (*state, controls, params.m, params.Iz, params.lf, params.lr,
            params.Caf, params.Car, params.Rw, cfg.dt, cfg.yaw_div_m,
            refs, 5.25, -1.75, cfg.a1, cfg.b1, cfg.b2, cfg.b3,
            cfg.diff_code, (), 0.0)
    fn = mod.horizon_cost
    fn(*args)  # warm-up / sanity
    t0 = time.perf_counter()
    for _ in range(n_calls):
        fn(*args)
    return (time.perf_counter() - t0) / n_calls


def time_solve(backend, n_solves=50):
    kernels.use(backend)
    params = VehicleParams()
    cfg = MpcConfig()
    sc = static_three_vehicle()
    path = build_lane_change_path(sc, 10.0, params)
    state = VehicleState(vx=10.0, X=30.0, Y=0.3, psi=0.02)
    warm = zero_sequence(cfg)
    t0 = time.perf_counter()
    for _ in range(n_solves):
        solve_step(state, sc, path, params, cfg, warm)
    return (time.perf_counter() - t0) / n_solves


def time_run(backend):
    kernels.use(backend)
    params = VehicleParams()
    cfg = MpcConfig()
    sc = static_three_vehicle()
    t0 = time.perf_counter()
    run(sc, params, cfg)
    return time.perf_counter() - t0


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--kernel-calls", type=int, default=200000)
    args = parser.parse_args()

    backends = kernels.available()
    print(f"available backends: {', '.join(backends)}")
    if len(backends) < 2:
        print("compiled backend not built; timing the fallback only")

    rows = []
    for backend in backends:
        k = time_kernel(backend, args.kernel_calls)
        s = time_solve(backend)
        r = time_run(backend)
        rows.append((backend, k, s, r))
    kernels.use(backends[0])

    print(f"\n{'backend':10s} {'horizon_cost':>14s} {'solve_step':>12s} "
          f"{'scenario run':>13s}")
    for backend, k, s, r in rows:
        print(f"{backend:10s} {k * 1e6:>11.2f} us {s * 1e3:>9.2f} ms "
              f"{r:>11.2f} s")
    if len(rows) == 2:
        print(f"\nspeedup (python / compiled): "
              f"kernel {rows[1][1] / rows[0][1]:.1f}x, "
              f"solve {rows[1][2] / rows[0][2]:.1f}x, "
              f"run {rows[1][3] / rows[0][3]:.1f}x")


if __name__ == "__main__":
    main()
