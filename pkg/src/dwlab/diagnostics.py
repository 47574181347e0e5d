"""Projections onto the doublet eigenspace, the invariance observable
mu(t) = ||Pi_c psi||_1, the h0 energy-gap identity with its two-sided
spectral bounds, and the monitors for the almost-invariance and two-mode
approximation statements.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigen import SpectralData
from .fields import ConsistencyError, Field, apply_H0, inner, norm0


@dataclass
class ProjectionData:
    """Decomposition of a state into the doublet span and its complement.

    mu is computed directly on the subtracted field (applying H0 to
    Pi_c psi), not as sqrt(||psi||_1^2 - lambda_1|z1|^2 - lambda_2|z2|^2),
    to stay accurate when mu << ||psi||_1.
    """

    zeta1: complex
    zeta2: complex
    pic_field: Field
    mu: float                 # ||Pi_c psi||_1
    pic_norm0: float          # ||Pi_c psi||_0
    pop_R: float              # |<phi_R, psi>|^2
    pop_L: float              # |<phi_L, psi>|^2
    h0_gap: float             # mu^2 - Omega ||Pi_c psi||_0^2


def project(psi: Field, S: SpectralData) -> ProjectionData:
    if psi.grid != S.grid:
        raise ValueError("state and spectral data live on different grids")
    phi1, phi2 = S.eigenvectors[0], S.eigenvectors[1]
    z1 = inner(phi1, psi)
    z2 = inner(phi2, psi)
    pic = Field(psi.grid, psi.values - z1 * phi1.values - z2 * phi2.values)
    rad = float(np.real(inner(pic, apply_H0(pic, S.potential, S.hbar))))
    if rad < -1e-12:
        raise ConsistencyError(
            f"negative <Pi_c psi, H0 Pi_c psi> = {rad:.3e}; H0 >= V_min forbids it"
        )
    mu = float(np.sqrt(max(rad, 0.0)))
    pic0 = norm0(pic)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    zR = (z1 + z2) * inv_sqrt2
    zL = (z1 - z2) * inv_sqrt2
    return ProjectionData(
        zeta1=z1,
        zeta2=z2,
        pic_field=pic,
        mu=mu,
        pic_norm0=pic0,
        pop_R=abs(zR) ** 2,
        pop_L=abs(zL) ** 2,
        h0_gap=mu**2 - S.omega_mean * pic0**2,
    )


@dataclass
class SandwichReport:
    """Margins of the two spectral inequalities around the h0-gap identity:
    upper: h0_gap <= mu^2; lower: h0_gap >= g_rel * mu^2 with
    g_rel = min_{k>=3} (lambda_k - Omega)/lambda_k."""

    upper_margin: float
    lower_margin: float
    g_rel: float
    upper_ok: bool
    lower_ok: bool
    tol: float


def h0_sandwich_check(
    pd: ProjectionData, S: SpectralData, tol: float = 1e-11
) -> SandwichReport:
    g = S.relative_gap()
    upper = pd.mu**2 - pd.h0_gap          # = Omega ||Pi_c psi||_0^2 >= 0
    lower = pd.h0_gap - g * pd.mu**2
    return SandwichReport(
        upper_margin=float(upper),
        lower_margin=float(lower),
        g_rel=g,
        upper_ok=bool(upper >= -tol),
        lower_ok=bool(lower >= -tol),
        tol=tol,
    )


@dataclass
class InvarianceReport:
    """Almost-invariance monitor for one trajectory."""

    mu_max: float
    mu_initial: float
    amplification: float | None      # mu_max / sqrt|eps|, None at eps = 0
    hypothesis_ok: bool              # mu(0) <= c0 sqrt|eps|
    secular_ratio: float             # max mu over 2nd half / max over 1st half
    hbar_cubed_regime: bool          # max h0_gap < hbar^3 (Lemma-2 window flag)


def invariance_monitor(traj, eps: float, hbar: float, c0: float = 1.0) -> InvarianceReport:
    mu = np.asarray(traj.column("mu"))
    half = len(mu) // 2
    first = float(mu[:half].max())
    second = float(mu[half:].max())
    secular = second / first if first > 0 else float("inf")
    sqrt_eps = np.sqrt(abs(eps))
    h0_gap = np.asarray(traj.column("h0_gap"))
    return InvarianceReport(
        mu_max=float(mu.max()),
        mu_initial=float(mu[0]),
        amplification=float(mu.max() / sqrt_eps) if eps != 0 else None,
        hypothesis_ok=bool(mu[0] <= c0 * sqrt_eps + 1e-12),
        secular_ratio=secular,
        hbar_cubed_regime=bool(np.max(h0_gap) < hbar**3),
    )


def scaling_exponent(epsilons, values) -> float:
    """Least-squares slope of log(value) against log|eps| across paired runs."""
    x = np.log(np.abs(np.asarray(epsilons, dtype=float)))
    y = np.log(np.asarray(values, dtype=float))
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


@dataclass
class TwoModeErrorReport:
    """Two-mode approximation error e(t) = ||phi^a(t) - Pi psi(t)||_0 and its
    fitted linear growth rate."""

    e0: float
    e_final: float
    slope: float
    fit_points: int
    times: np.ndarray
    errors: np.ndarray


def twomode_error_monitor(traj, tm_traj, S: SpectralData, fit_threshold: float = 0.1) -> TwoModeErrorReport:
    """Compare Pi psi(t) from a full run with the two-mode trajectory on the
    same output times; both flows must share the initial in-span data."""
    t_full = np.asarray(traj.times)
    t_tm = np.asarray(tm_traj.taus)
    if len(t_full) != len(t_tm) or not np.allclose(t_full, t_tm, rtol=0, atol=1e-9 * max(t_full[-1], 1.0)):
        raise ValueError("time-grid mismatch between the full and two-mode runs")
    z1 = traj.column("re_zeta1") + 1j * traj.column("im_zeta1")
    z2 = traj.column("re_zeta2") + 1j * traj.column("im_zeta2")
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    c1 = (tm_traj.c_R + tm_traj.c_L) * inv_sqrt2
    c2 = (tm_traj.c_R - tm_traj.c_L) * inv_sqrt2
    # phi_1/phi_2 are orthonormal, so the L2 distance is the coefficient distance
    e = np.sqrt(np.abs(c1 - z1) ** 2 + np.abs(c2 - z2) ** 2)
    mask = (e < fit_threshold) & (t_full > 0)
    if mask.sum() >= 2:
        ts, es = t_full[mask], e[mask]
        slope = float(np.sum(ts * es) / np.sum(ts * ts))  # LSQ through origin
    else:
        slope = float("nan")
    return TwoModeErrorReport(
        e0=float(e[0]),
        e_final=float(e[-1]),
        slope=slope,
        fit_points=int(mask.sum()),
        times=t_full,
        errors=e,
    )
