"""Full NLS evolution by Strang split-step Fourier, conserved-quantity
monitoring, and the exact linear beating solution used as the eps = 0 oracle.

Default time convention is the rescaled one (t -> t/hbar), in which the
equation reads i psi_tau = H0 psi + eps |psi|^{2 sigma} psi and the beating
period is 2 pi / omega. Physical-time mode divides the generator by hbar.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.fft as _fft

from . import kernels
from .diagnostics import project
from .eigen import SpectralData
from .fields import Field, SimConfig, apply_H0, inner, norm0, norm_Xs, tail_mass
from .potentials import Potential

TAIL_MASS_LIMIT = 1e-10
BLOWUP_NORM1_FACTOR = 10.0


class BlowUpError(RuntimeError):
    """Evolution produced non-finite values or runaway energy norm; carries
    the partial trajectory and the time reached."""

    def __init__(self, message, trajectory=None, t=None):
        super().__init__(message)
        self.trajectory = trajectory
        self.t = t


@dataclass
class ObserverSet:
    """What to record along a trajectory."""

    spectral: SpectralData | None = None     # enables projection diagnostics
    record_energy: bool = True
    snapshot_stride: int = 0                 # 0 = no field snapshots
    extra: dict = dc_field(default_factory=dict)  # name -> fn(Field, t) -> float


@dataclass
class Trajectory:
    """Observable records along one run; `data` maps column name to array."""

    times: np.ndarray
    data: dict
    snapshots: list = dc_field(default_factory=list)  # (t, Field)

    def column(self, name: str) -> np.ndarray:
        return self.data[name]


CSV_COLUMNS = (
    "t", "norm", "energy", "re_zeta1", "im_zeta1", "re_zeta2", "im_zeta2",
    "mu", "pop_R", "pop_L", "h0_gap",
)


def step(psi: Field, cfg: SimConfig, V: Potential) -> Field:
    """One Strang step: half phase rotation by V + eps|psi|^{2 sigma}, full
    kinetic step in Fourier space, half phase rotation re-evaluating the
    density."""
    scale = cfg.time_scale
    vg = V.on_grid(psi.grid)
    kin = np.exp(-1j * cfg.dt * scale * cfg.hbar**2 * psi.grid.k2)
    values = np.ascontiguousarray(psi.values, dtype=complex)
    out = values.copy()
    _strang_step(out, vg, kin, 0.5 * cfg.dt * scale, cfg.epsilon, cfg.sigma)
    return Field(psi.grid, out)


def _strang_step(values, vg, kin, half_coef, eps, sigma):
    """In-place Strang step on the raw array."""
    fft, ifft = (_fft.fft, _fft.ifft) if values.ndim == 1 else (_fft.fft2, _fft.ifft2)
    kernels.nonlinear_phase(values.ravel(), vg.ravel(), half_coef, eps, sigma)
    values[...] = ifft(kin * fft(values))
    kernels.nonlinear_phase(values.ravel(), vg.ravel(), half_coef, eps, sigma)


def energy(psi: Field, cfg: SimConfig, V: Potential) -> float:
    """E_eps(psi) = <psi, H0 psi> + (eps/(1+sigma)) * int |psi|^{2 sigma + 2}."""
    e0 = float(np.real(inner(psi, apply_H0(psi, V, cfg.hbar))))
    p = float(
        np.sum(np.abs(psi.values) ** (2 * cfg.sigma + 2)) * psi.grid.quad_weight()
    )
    return e0 + cfg.epsilon / (1.0 + cfg.sigma) * p


def evolve(
    psi0: Field,
    cfg: SimConfig,
    V: Potential,
    S: SpectralData | None = None,
    observers: ObserverSet | None = None,
) -> Trajectory:
    """Evolve to t_final recording observables every cfg.stride steps.

    Raises BlowUpError (with the partial trajectory attached) on non-finite
    values or when the energy norm exceeds 10x its initial value.
    """
    if observers is None:
        observers = ObserverSet(spectral=S)
    elif observers.spectral is None:
        observers.spectral = S

    n0 = norm0(psi0)
    if abs(n0 - 1.0) > 1e-10:
        raise ValueError(f"initial datum must be L2-normalized, got {n0}")
    if tail_mass(psi0) > TAIL_MASS_LIMIT:
        raise ValueError(
            "initial datum has boundary tail mass above 1e-10; enlarge the box"
        )
    if psi0.grid.half_width <= 3.0 * np.max(np.abs(np.asarray(V.x_plus))):
        raise ValueError("grid too small for this potential")

    grid = psi0.grid
    scale = cfg.time_scale
    vg = V.on_grid(grid)
    kin = np.exp(-1j * cfg.dt * scale * cfg.hbar**2 * grid.k2)
    half_coef = 0.5 * cfg.dt * scale
    nsteps = int(round(cfg.t_final / cfg.dt))

    values = np.ascontiguousarray(psi0.values, dtype=complex).copy()
    norm1_limit = BLOWUP_NORM1_FACTOR * norm_Xs(psi0, V, cfg.hbar, 1)

    times, records, snapshots = [], [], []

    def record(i):
        t = i * cfg.dt
        f = Field(grid, values)
        row = {"norm": norm0(f)}
        if not np.isfinite(row["norm"]):
            raise BlowUpError(
                f"non-finite field at t = {t}", _finish(times, records, snapshots), t
            )
        if observers.record_energy:
            row["energy"] = energy(f, cfg, V)
        if observers.spectral is not None:
            pd = project(f, observers.spectral)
            row.update(
                re_zeta1=pd.zeta1.real, im_zeta1=pd.zeta1.imag,
                re_zeta2=pd.zeta2.real, im_zeta2=pd.zeta2.imag,
                mu=pd.mu, pop_R=pd.pop_R, pop_L=pd.pop_L, h0_gap=pd.h0_gap,
                pic_norm0=pd.pic_norm0,
            )
            mu_norm1 = np.sqrt(
                max(
                    pd.mu**2
                    + observers.spectral.eigenvalues[0] * abs(pd.zeta1) ** 2
                    + observers.spectral.eigenvalues[1] * abs(pd.zeta2) ** 2,
                    0.0,
                )
            )
            if mu_norm1 > norm1_limit:
                raise BlowUpError(
                    f"energy norm exceeded {BLOWUP_NORM1_FACTOR}x initial at t = {t}",
                    _finish(times, records, snapshots), t,
                )
        for name, fn in observers.extra.items():
            row[name] = fn(f, t)
        if observers.snapshot_stride and i % (cfg.stride * observers.snapshot_stride) == 0:
            snapshots.append((t, f.copy()))
        times.append(t)
        records.append(row)

    record(0)
    for i in range(1, nsteps + 1):
        _strang_step(values, vg, kin, half_coef, cfg.epsilon, cfg.sigma)
        if i % cfg.stride == 0 or i == nsteps:
            record(i)
    return _finish(times, records, snapshots)


def _finish(times, records, snapshots) -> Trajectory:
    data = {}
    if records:
        for key in records[0]:
            data[key] = np.array([r.get(key, np.nan) for r in records])
    return Trajectory(times=np.array(times), data=data, snapshots=snapshots)


def linear_beating_exact(
    zeta_R: complex, zeta_L: complex, t: float, S: SpectralData,
    time_rescaled: bool = True,
) -> Field:
    """Closed-form eps = 0 solution for in-doublet initial data:
    e^{-i Omega tau} [ (zR phi_R + zL phi_L) cos(omega tau)
                       + i (zL phi_R + zR phi_L) sin(omega tau) ],
    tau = t in rescaled time, t/hbar in physical time."""
    nrm = abs(zeta_R) ** 2 + abs(zeta_L) ** 2
    if abs(nrm - 1.0) > 1e-10:
        raise ValueError("|zeta_R|^2 + |zeta_L|^2 must be 1")
    tau = t if time_rescaled else t / S.hbar
    om, Om = S.omega_split, S.omega_mean
    c, s = np.cos(om * tau), np.sin(om * tau)
    vals = np.exp(-1j * Om * tau) * (
        (zeta_R * S.phi_R.values + zeta_L * S.phi_L.values) * c
        + 1j * (zeta_L * S.phi_R.values + zeta_R * S.phi_L.values) * s
    )
    return Field(S.grid, vals)
