"""Command-line interface: spectrum, agmon, evolve, twomode, compare, sweep.

Exit codes: 0 ok, 2 config error, 3 solver failure, 4 blow-up (partial data
written), 5 partial sweep (some workers failed).
"""
from __future__ import annotations

import argparse
import os
import sys
from multiprocessing import Pool
from pathlib import Path

import numpy as np

from .config import ConfigError, build_grid, build_potential, parse_config
from .diagnostics import twomode_error_monitor, invariance_monitor
from .dynamics import CSV_COLUMNS, BlowUpError, ObserverSet, evolve
from .eigen import (
    SolverError,
    SpectralData,
    c_sigma,
    effective_eta,
    epsilon_for_eta,
    fit_splitting,
    lowest_eigenpairs,
)
from .fields import Field, SimConfig, norm0
from .output import write_csv, write_json, write_manifest, write_snapshot
from .potentials import agmon_distance
from .twomode import (
    CSV_COLUMNS as TM_CSV_COLUMNS,
    ScanTable,
    TwoModeParams,
    TwoModeState,
    integrate,
    selftrap_scan,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_BLOWUP = 4
EXIT_PARTIAL = 5


def workers_from_env() -> int:
    """Parallelism degree: DWLAB_WORKERS, default = logical cores."""
    raw = os.environ.get("DWLAB_WORKERS", "")
    if raw.strip():
        try:
            return max(1, int(raw))
        except ValueError as exc:
            raise ConfigError(f"DWLAB_WORKERS must be an integer, got {raw!r}") from exc
    return os.cpu_count() or 1


def _solve_spectrum(cfg, seed) -> SpectralData:
    V = build_potential(cfg)
    grid = build_grid(cfg)
    sol = cfg["solver"]
    return lowest_eigenpairs(
        V, grid, cfg["physics"]["hbar"], k=sol["k"], tol=sol["tol"],
        seed=seed, max_iter=sol["max_iter"],
    )


def _resolve_epsilon(cfg, S: SpectralData) -> float:
    phys = cfg["physics"]
    if phys["epsilon"] is not None:
        return phys["epsilon"]
    if phys["eta"] is not None:
        return epsilon_for_eta(
            phys["eta"], phys["hbar"], phys["sigma"], cfg["grid"]["dim"], S.omega_split
        )
    return 0.0


def _beat_period(cfg, S: SpectralData) -> float:
    T = S.beat_period
    return T if cfg["time"]["rescaled"] else T * cfg["physics"]["hbar"]


def _time_discretization(cfg, S: SpectralData):
    t = cfg["time"]
    T = _beat_period(cfg, S)
    dt = t["dt"] if t["dt"] is not None else T / t["steps_per_period"]
    t_final = t["t_final"] if t["t_final"] is not None else t["periods"] * T
    return dt, t_final


def _initial_state(cfg, S: SpectralData, eps: float) -> Field:
    phys = cfg["physics"]
    base = {
        "phi_R": S.phi_R, "phi_L": S.phi_L,
        "phi1": S.eigenvectors[0], "phi2": S.eigenvectors[1],
    }[phys["init_state"]]
    values = base.values.astype(complex).copy()
    c0 = phys["init_seed_c0"]
    if c0 != 0.0:
        if len(S.eigenvectors) < 3:
            raise ConfigError("init_seed_c0 needs solver k >= 3")
        lam3 = S.eigenvalues[2]
        s = c0 * np.sqrt(abs(eps)) / np.sqrt(lam3)
        values += s * S.eigenvectors[2].values
    f = Field(S.grid, values)
    return Field(S.grid, values / norm0(f))


def _sandwich_counts(traj, S: SpectralData, tol: float = 1e-11):
    mu = traj.column("mu")
    gap = traj.column("h0_gap")
    g = S.relative_gap()
    upper = mu**2 - gap
    lower = gap - g * mu**2
    return {
        "sandwich_upper_violations": int(np.sum(upper < -tol)),
        "sandwich_lower_violations": int(np.sum(lower < -tol)),
        "sandwich_min_upper_margin": float(upper.min()),
        "sandwich_min_lower_margin": float(lower.min()),
        "relative_gap": g,
    }


def _spectrum_rows(S: SpectralData):
    for i, (lam, par, res) in enumerate(
        zip(S.eigenvalues, S.parities, S.residuals), start=1
    ):
        yield (i, lam, par, res, S.omega_mean, S.omega_split)


def cmd_spectrum(cfg, outdir: Path, seed: int) -> int:
    S = _solve_spectrum(cfg, seed)
    outputs = [
        write_csv(
            outdir / "spectrum.csv",
            ("k", "lambda", "parity", "residual", "Omega", "omega"),
            _spectrum_rows(S),
        )
    ]
    if cfg["output"]["snapshots"]:
        for i, phi in enumerate(S.eigenvectors, start=1):
            base = outdir / f"phi_{i:03d}"
            write_snapshot(base, phi, S.hbar, 0.0)
            outputs += [base.with_suffix(".bin"), base.with_suffix(".json")]
    write_manifest(outdir, "spectrum", cfg, seed, outputs)
    return EXIT_OK


def cmd_agmon(cfg, outdir: Path, seed: int) -> int:
    V = build_potential(cfg)
    res = agmon_distance(V, cfg["grid"]["points"])
    out = write_json(outdir / "agmon.json", res.to_dict())
    write_manifest(outdir, "agmon", cfg, seed, [out])
    return EXIT_OK


def _trajectory_rows(traj):
    cols = CSV_COLUMNS
    for i, t in enumerate(traj.times):
        row = [t]
        for name in cols[1:]:
            arr = traj.data.get(name)
            row.append(arr[i] if arr is not None else float("nan"))
        yield row


def cmd_evolve(cfg, outdir: Path, seed: int) -> int:
    S = _solve_spectrum(cfg, seed)
    eps = _resolve_epsilon(cfg, S)
    dt, t_final = _time_discretization(cfg, S)
    sim = SimConfig(
        hbar=cfg["physics"]["hbar"], epsilon=eps, sigma=cfg["physics"]["sigma"],
        dim=cfg["grid"]["dim"], dt=dt, t_final=t_final,
        time_rescaled=cfg["time"]["rescaled"], stride=cfg["output"]["stride"],
    )
    psi0 = _initial_state(cfg, S, eps)
    obs = ObserverSet(
        spectral=S,
        snapshot_stride=cfg["output"]["snapshot_stride"] if cfg["output"]["snapshots"] else 0,
    )
    try:
        traj = evolve(psi0, sim, S.potential, S, obs)
    except BlowUpError as exc:
        outputs = []
        if exc.trajectory is not None and len(exc.trajectory.times):
            outputs.append(
                write_csv(outdir / "trajectory.csv", CSV_COLUMNS, _trajectory_rows(exc.trajectory))
            )
        write_manifest(outdir, "evolve", cfg, seed, outputs, extra={"blow_up_t": exc.t})
        print(f"blow-up at t = {exc.t}", file=sys.stderr)
        return EXIT_BLOWUP
    outputs = [write_csv(outdir / "trajectory.csv", CSV_COLUMNS, _trajectory_rows(traj))]
    report = invariance_monitor(traj, eps, sim.hbar)
    payload = {
        "epsilon": eps,
        "eta": effective_eta(eps, sim.hbar, sim.sigma, sim.dim, S.omega_split) if eps else 0.0,
        "omega": S.omega_split,
        "Omega": S.omega_mean,
        "mu_max": report.mu_max,
        "mu_initial": report.mu_initial,
        "amplification": report.amplification,
        "hypothesis_ok": report.hypothesis_ok,
        "secular_ratio": report.secular_ratio,
        "hbar_cubed_regime": report.hbar_cubed_regime,
    }
    sw = _sandwich_counts(traj, S)
    payload.update(sw)
    payload["sandwich_margins"] = [
        sw["sandwich_min_upper_margin"], sw["sandwich_min_lower_margin"]
    ]
    outputs.append(write_json(outdir / "report.json", payload))
    for i, (t, f) in enumerate(traj.snapshots):
        base = outdir / f"snapshot_{i:04d}"
        write_snapshot(base, f, sim.hbar, t)
        outputs += [base.with_suffix(".bin"), base.with_suffix(".json")]
    write_manifest(outdir, "evolve", cfg, seed, outputs)
    return EXIT_OK


def _twomode_params(cfg, S: SpectralData, eps: float) -> TwoModeParams:
    return TwoModeParams(
        omega_split=S.omega_split,
        omega_mean=S.omega_mean,
        epsilon=eps,
        sigma=cfg["physics"]["sigma"],
        c_sigma=c_sigma(S, cfg["physics"]["sigma"]),
        time_rescaled=cfg["time"]["rescaled"],
        hbar=cfg["physics"]["hbar"],
    )


def _twomode_rows(traj):
    for i, tau in enumerate(traj.taus):
        yield (
            tau,
            traj.c_R[i].real, traj.c_R[i].imag,
            traj.c_L[i].real, traj.c_L[i].imag,
            traj.norm2[i], traj.invariant[i], traj.z[i],
        )


def cmd_twomode(cfg, outdir: Path, seed: int) -> int:
    S = _solve_spectrum(cfg, seed)
    eps = _resolve_epsilon(cfg, S)
    p = _twomode_params(cfg, S, eps)
    sol = cfg["solver"]
    T = p.beat_period
    dt = T / sol["twomode_steps_per_period"]
    t_final = cfg["time"]["periods"] * T
    nsteps = int(round(t_final / dt))
    stride = max(1, min(cfg["output"]["stride"], nsteps))
    traj = integrate(
        TwoModeState(1.0 + 0.0j, 0.0j), p, dt, t_final, stride=stride,
        enforce_beat_resolution=False,
    )
    outputs = [write_csv(outdir / "twomode.csv", TM_CSV_COLUMNS, _twomode_rows(traj))]
    outputs.append(
        write_json(
            outdir / "twomode.json",
            {
                "omega": p.omega_split, "Omega": p.omega_mean,
                "epsilon": eps, "c_sigma": p.c_sigma,
                "min_z_dense": traj.min_z_dense,
                "norm_drift": float(np.max(np.abs(traj.norm2 - traj.norm2[0]))),
                "invariant_drift": float(np.max(np.abs(traj.invariant - traj.invariant[0]))),
            },
        )
    )
    if sol["scan_points"] > 0:
        etas = np.geomspace(sol["scan_eta_min"], sol["scan_eta_max"], sol["scan_points"])
        scan = selftrap_scan(
            p, etas, periods=sol["scan_periods"],
            steps_per_period=sol["scan_steps_per_period"],
            bisect_width=sol["bisect_width"],
        )
        outputs.append(_write_scan(outdir, scan))
        outputs.append(write_json(outdir / "scan.json", scan.to_dict()))
    write_manifest(outdir, "twomode", cfg, seed, outputs)
    return EXIT_OK


def _write_scan(outdir: Path, scan: ScanTable):
    rows = zip(scan.etas, scan.min_z, scan.trapped)
    return write_csv(outdir / "scan.csv", ("eta", "min_z", "trapped"), rows)


def cmd_compare(cfg, outdir: Path, seed: int) -> int:
    S = _solve_spectrum(cfg, seed)
    eps = _resolve_epsilon(cfg, S)
    dt, t_final = _time_discretization(cfg, S)
    sim = SimConfig(
        hbar=cfg["physics"]["hbar"], epsilon=eps, sigma=cfg["physics"]["sigma"],
        dim=cfg["grid"]["dim"], dt=dt, t_final=t_final,
        time_rescaled=cfg["time"]["rescaled"], stride=cfg["output"]["stride"],
    )
    psi0 = _initial_state(cfg, S, eps)
    traj = evolve(psi0, sim, S.potential, S)
    # two-mode initial data = projection of psi0: identical in-span content
    z1 = traj.data["re_zeta1"][0] + 1j * traj.data["im_zeta1"][0]
    z2 = traj.data["re_zeta2"][0] + 1j * traj.data["im_zeta2"][0]
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    state0 = TwoModeState((z1 + z2) * inv_sqrt2, (z1 - z2) * inv_sqrt2)
    p = _twomode_params(cfg, S, eps)
    tm = integrate(
        state0, p, dt, t_final, stride=sim.stride, enforce_beat_resolution=False
    )
    rep = twomode_error_monitor(traj, tm, S)
    outputs = [
        write_csv(outdir / "compare.csv", ("t", "e"), zip(rep.times, rep.errors)),
        write_csv(outdir / "trajectory.csv", CSV_COLUMNS, _trajectory_rows(traj)),
        write_csv(outdir / "twomode.csv", TM_CSV_COLUMNS, _twomode_rows(tm)),
        write_json(
            outdir / "compare.json",
            {
                "epsilon": eps, "e0": rep.e0, "e_final": rep.e_final,
                "slope": rep.slope, "fit_points": rep.fit_points,
            },
        ),
    ]
    write_manifest(outdir, "compare", cfg, seed, outputs)
    return EXIT_OK


def _sweep_point(args):
    cfg, hbar, seed = args
    try:
        V = build_potential(cfg)
        grid = build_grid(cfg)
        sol = cfg["solver"]
        S = lowest_eigenpairs(
            V, grid, hbar, k=2, tol=sol["tol"], seed=seed, max_iter=sol["max_iter"]
        )
        return ("ok", hbar, S.eigenvalues[0], S.eigenvalues[1], S.omega_split, S.omega_mean)
    except Exception as exc:  # worker failures become partial results
        return ("error", hbar, repr(exc))


def cmd_sweep(cfg, outdir: Path, seed: int) -> int:
    hbars = sorted(cfg["solver"]["sweep_hbars"], reverse=True)
    if len(hbars) < 4:
        raise ConfigError("[solver] sweep_hbars needs at least 4 values")
    jobs = [(cfg, hb, seed) for hb in hbars]
    nworkers = min(workers_from_env(), len(jobs))
    if nworkers > 1:
        with Pool(nworkers) as pool:
            results = pool.map(_sweep_point, jobs)  # order follows jobs
    else:
        results = [_sweep_point(j) for j in jobs]

    ok = [r for r in results if r[0] == "ok"]
    failed = [r for r in results if r[0] != "ok"]
    omegas = np.array([r[4] for r in ok])
    hb_ok = np.array([r[1] for r in ok])
    slope, intercept, r2 = fit_splitting(hb_ok, omegas) if len(ok) >= 2 else (
        float("nan"), float("nan"), float("nan")
    )
    rows = [
        (r[1], r[2], r[3], r[4], r[5], slope, r2)
        for r in ok
    ]
    outputs = [
        write_csv(
            outdir / "sweep.csv",
            ("hbar", "lambda1", "lambda2", "omega", "Omega", "gamma_fit_slope", "r2"),
            rows,
        ),
        write_json(
            outdir / "sweep.json",
            {
                "slope": slope, "intercept": intercept, "r2": r2,
                "gamma_estimate": -slope if slope == slope else float("nan"),
                "failed_points": [{"hbar": r[1], "error": r[2]} for r in failed],
            },
        ),
    ]
    write_manifest(
        outdir, "sweep", cfg, seed, outputs,
        extra={"n_failed": len(failed)},
    )
    if failed:
        for r in failed:
            print(f"sweep point hbar={r[1]} failed: {r[2]}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


_COMMANDS = {
    "spectrum": cmd_spectrum,
    "agmon": cmd_agmon,
    "evolve": cmd_evolve,
    "twomode": cmd_twomode,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dwlab",
        description="Double-well NLS laboratory: spectral problem, full PDE "
        "dynamics, two-mode reduction, and their cross-checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="run configuration file")
        p.add_argument("--out", default=None, help="output directory (default: <config>_out)")
        p.add_argument("--seed", type=int, default=None, help="override [solver] seed")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        seed = args.seed if args.seed is not None else cfg["solver"]["seed"]
        outdir = Path(args.out) if args.out else Path(args.config).with_suffix("").parent / (
            Path(args.config).stem + "_out"
        )
        outdir.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](cfg, outdir, seed)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
