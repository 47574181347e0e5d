"""The reduced two-mode (dimer) system

    i c_R' = -omega c_L + Omega c_R + eps C_sigma |c_R|^{2 sigma} c_R
    i c_L' = -omega c_R + Omega c_L + eps C_sigma |c_L|^{2 sigma} c_L

integrated by fixed-step RK4 (compiled kernel when available), its two
conserved quantities, and the beating/self-trapping scan over the effective
nonlinearity eps C_sigma / omega.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels


@dataclass(frozen=True)
class TwoModeState:
    c_R: complex
    c_L: complex

    @property
    def norm2(self) -> float:
        return abs(self.c_R) ** 2 + abs(self.c_L) ** 2

    @property
    def imbalance(self) -> float:
        """Population imbalance z = |c_R|^2 - |c_L|^2."""
        return abs(self.c_R) ** 2 - abs(self.c_L) ** 2


@dataclass
class TwoModeParams:
    omega_split: float
    omega_mean: float
    epsilon: float
    sigma: int
    c_sigma: float
    time_rescaled: bool = True
    hbar: float = 1.0

    def __post_init__(self):
        if self.omega_split <= 0:
            raise ValueError("omega_split must be positive")
        if self.c_sigma <= 0:
            raise ValueError("c_sigma must be positive")
        if self.sigma < 1 or int(self.sigma) != self.sigma:
            raise ValueError("sigma must be a positive integer")
        self.sigma = int(self.sigma)

    @property
    def time_scale(self) -> float:
        return 1.0 if self.time_rescaled else 1.0 / self.hbar

    @property
    def beat_period(self) -> float:
        return 2.0 * np.pi / self.omega_split / self.time_scale


def rhs(state: TwoModeState, p: TwoModeParams) -> TwoModeState:
    """Time derivative (c_R', c_L') of the reduced system."""
    s = p.time_scale
    ec = p.epsilon * p.c_sigma
    dR = -1j * s * (
        -p.omega_split * state.c_L
        + p.omega_mean * state.c_R
        + ec * abs(state.c_R) ** (2 * p.sigma) * state.c_R
    )
    dL = -1j * s * (
        -p.omega_split * state.c_R
        + p.omega_mean * state.c_L
        + ec * abs(state.c_L) ** (2 * p.sigma) * state.c_L
    )
    return TwoModeState(dR, dL)


def invariant_I(state: TwoModeState, p: TwoModeParams) -> float:
    """Integral of motion
    I = Omega(|cR|^2+|cL|^2) - omega(conj(cR) cL + conj(cL) cR)
        + (C_sigma eps/(sigma+1)) (|cR|^{2(sigma+1)} + |cL|^{2(sigma+1)})."""
    cR, cL = state.c_R, state.c_L
    cross = 2.0 * np.real(np.conj(cR) * cL)
    pw = 2 * (p.sigma + 1)
    return float(
        p.omega_mean * (abs(cR) ** 2 + abs(cL) ** 2)
        - p.omega_split * cross
        + p.c_sigma * p.epsilon / (p.sigma + 1) * (abs(cR) ** pw + abs(cL) ** pw)
    )


@dataclass
class TwoModeTrajectory:
    taus: np.ndarray
    c_R: np.ndarray
    c_L: np.ndarray
    norm2: np.ndarray
    invariant: np.ndarray
    z: np.ndarray
    min_z_dense: float       # min of z over every step, not just records
    params: TwoModeParams


CSV_COLUMNS = ("tau", "re_cR", "im_cR", "re_cL", "im_cL", "norm2", "invariant_I", "z")


def integrate(
    state0: TwoModeState,
    p: TwoModeParams,
    dt: float,
    t_final: float,
    stride: int | None = None,
    enforce_beat_resolution: bool = True,
) -> TwoModeTrajectory:
    """Fixed-step RK4 trajectory recording every `stride` steps (and t = 0)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if enforce_beat_resolution and dt > p.beat_period / 1000.0:
        raise ValueError(
            f"dt = {dt} does not resolve the beat: need dt <= T/1000 = "
            f"{p.beat_period / 1000.0:.3e} (pass enforce_beat_resolution=False to override)"
        )
    nsteps = int(round(t_final / dt))
    if stride is None:
        stride = max(1, nsteps // 1000)
    s = p.time_scale
    nrec = nsteps // stride
    out = np.empty((nrec, 2), dtype=complex)
    cR, cL, min_z = kernels.twomode_rk4(
        complex(state0.c_R), complex(state0.c_L),
        p.omega_split * s, p.omega_mean * s, p.epsilon * p.c_sigma * s,
        p.sigma, dt, nsteps, stride, out,
    )
    taus = np.concatenate([[0.0], dt * stride * np.arange(1, nrec + 1)])
    cRs = np.concatenate([[state0.c_R], out[:, 0]])
    cLs = np.concatenate([[state0.c_L], out[:, 1]])
    if nsteps % stride:  # keep the final point even off the stride lattice
        taus = np.append(taus, dt * nsteps)
        cRs = np.append(cRs, cR)
        cLs = np.append(cLs, cL)
    norm2 = np.abs(cRs) ** 2 + np.abs(cLs) ** 2
    z = np.abs(cRs) ** 2 - np.abs(cLs) ** 2
    pw = 2 * (p.sigma + 1)
    invariant = (
        p.omega_mean * norm2
        - p.omega_split * 2.0 * np.real(np.conj(cRs) * cLs)
        + p.c_sigma * p.epsilon / (p.sigma + 1) * (np.abs(cRs) ** pw + np.abs(cLs) ** pw)
    )
    return TwoModeTrajectory(
        taus=taus, c_R=cRs, c_L=cLs, norm2=norm2, invariant=invariant, z=z,
        min_z_dense=float(min_z), params=p,
    )


@dataclass
class ScanTable:
    """Beating/self-trapping map over the effective nonlinearity
    eta = eps C_sigma / omega, starting from maximal imbalance c_R = 1."""

    etas: np.ndarray
    min_z: np.ndarray
    trapped: np.ndarray           # bool per eta
    monotone: bool                # single beating->trapped switch across the scan
    eta_star: float | None        # bisected threshold, None if not bracketed
    bisection_width: float | None

    def to_dict(self) -> dict:
        return {
            "eta_star": self.eta_star,
            "bisection_width": self.bisection_width,
        }


def _scan_min_z(p: TwoModeParams, eta: float, periods: float, steps_per_period: int) -> float:
    run_p = TwoModeParams(
        omega_split=p.omega_split,
        omega_mean=p.omega_mean,
        epsilon=eta * p.omega_split / p.c_sigma,  # realizes eps C_sigma = eta omega
        sigma=p.sigma,
        c_sigma=p.c_sigma,
        time_rescaled=p.time_rescaled,
        hbar=p.hbar,
    )
    T = run_p.beat_period
    dt = T / steps_per_period
    traj = integrate(
        TwoModeState(1.0 + 0.0j, 0.0j), run_p, dt, periods * T,
        stride=steps_per_period, enforce_beat_resolution=False,
    )
    return traj.min_z_dense


def selftrap_scan(
    p_template: TwoModeParams,
    eta_values,
    sigma: int | None = None,
    periods: float = 10.0,
    steps_per_period: int = 10000,
    bisect_width: float = 0.01,
) -> ScanTable:
    """Classify each eta as beating (z changes sign) or self-trapped, then
    bisect the transition between the last beating and first trapped value."""
    etas = np.asarray(sorted(eta_values), dtype=float)
    p = p_template
    if sigma is not None and sigma != p.sigma:
        p = TwoModeParams(
            omega_split=p.omega_split, omega_mean=p.omega_mean, epsilon=p.epsilon,
            sigma=sigma, c_sigma=p.c_sigma, time_rescaled=p.time_rescaled, hbar=p.hbar,
        )

    min_zs = np.array([_scan_min_z(p, eta, periods, steps_per_period) for eta in etas])
    trapped = min_zs >= 0.0

    flips = int(np.sum(trapped[1:] != trapped[:-1]))
    monotone = flips <= 1 and (flips == 0 or not trapped[0])

    eta_star = None
    width = None
    if flips == 1 and not trapped[0] and trapped[-1]:
        i = int(np.argmax(trapped))  # first trapped index
        lo, hi = etas[i - 1], etas[i]
        while hi - lo > bisect_width:
            mid = 0.5 * (lo + hi)
            if _scan_min_z(p, mid, periods, steps_per_period) >= 0.0:
                hi = mid
            else:
                lo = mid
        eta_star = 0.5 * (lo + hi)
        width = hi - lo
    return ScanTable(
        etas=etas, min_z=min_zs, trapped=trapped, monotone=monotone,
        eta_star=eta_star, bisection_width=width,
    )
