#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Run:  python benchmarks/bench_kernels.py
"""
import time

import numpy as np

import dwlab._kernels_py as pyk

try:
    import dwlab._kernels as cyk
except ImportError:
    cyk = None

from dwlab import Grid, SimConfig, builtin_quartic, evolve, lowest_eigenpairs


def time_it(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_nonlinear_phase(n=1024, reps=2000):
    rng = np.random.default_rng(0)
    psi = (rng.standard_normal(n) + 1j * rng.standard_normal(n)).astype(complex)
    v = rng.uniform(1.0, 5.0, n)

    def run(mod):
        p = psi.copy()
        t0 = time.perf_counter()
        for _ in range(reps):
            mod.nonlinear_phase(p, v, 1e-3, 1e-3, 1)
        return (time.perf_counter() - t0) / reps

    rows = [("python", run(pyk))]
    if cyk is not None:
        rows.append(("cython", run(cyk)))
    return rows


def bench_twomode(nsteps=1_000_000):
    out = np.empty((10, 2), dtype=complex)

    def run(mod):
        t0 = time.perf_counter()
        mod.twomode_rk4(1.0 + 0j, 0j, 1.0, 1.1, 0.5, 1, 1e-3, nsteps, nsteps // 10, out)
        return (time.perf_counter() - t0) / nsteps

    rows = [("python", run(pyk))]
    if cyk is not None:
        rows.append(("cython", run(cyk)))
    return rows


def bench_evolve(n=256, nsteps=2000):
    """Whole-step rate including FFTs (kernel share is the phase rotations)."""
    import dwlab.kernels as sel

    V = builtin_quartic(1.0, 0.1)
    g = Grid(1, 5.0, n)
    S = lowest_eigenpairs(V, g, 0.1, k=3, seed=3)
    dt = S.beat_period / 10000
    cfg = SimConfig(
        hbar=0.1, epsilon=1e-3, sigma=1, dim=1, dt=dt,
        t_final=nsteps * dt, stride=10**9,
    )
    rows = []
    for mod, name in ((pyk, "python"), (cyk, "cython")):
        if mod is None:
            continue
        sel.nonlinear_phase = mod.nonlinear_phase
        t0 = time.perf_counter()
        evolve(S.phi_R, cfg, V, S)
        rows.append((name, (time.perf_counter() - t0) / nsteps))
    sel.nonlinear_phase = sel._impl.nonlinear_phase
    return rows


def report(title, rows, unit=1e6, unit_name="us"):
    print(f"\n{title}")
    base = dict(rows).get("python")
    for name, t in rows:
        speedup = f"  ({base / t:.1f}x vs python)" if name != "python" and base else ""
        print(f"  {name:8s} {t * unit:10.3f} {unit_name}/call{speedup}")


if __name__ == "__main__":
    print(f"compiled extension available: {cyk is not None}")
    report("nonlinear_phase (n=1024)", bench_nonlinear_phase())
    report("twomode_rk4 (per step)", bench_twomode(), unit=1e9, unit_name="ns")
    report("full split step (n=256, incl. FFTs)", bench_evolve())
