"""Matrix-free eigensolver for the discrete H0.

The key numerical mechanism: the lowest doublet splitting is exponentially
small in 1/hbar, so the solver runs Lanczos (full reorthogonalization)
separately on the even and odd parity sectors of x1 -> -x1. Each sector's
ground state is then well separated from the rest of its sector, and the
splitting comes out as a difference of two independently converged
eigenvalues instead of a near-degenerate pair.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .fields import Field, Grid
from .potentials import Potential


class SolverError(RuntimeError):
    """Eigensolver failed; carries the best residuals reached."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


@dataclass
class SpectralData:
    """Lowest eigenpairs of the discrete H0 plus the derived doublet data."""

    hbar: float
    grid: Grid
    potential: Potential
    eigenvalues: np.ndarray          # ascending
    eigenvectors: list               # Fields, L2-normalized, real-valued
    parities: list                   # "even" / "odd" w.r.t. x1 -> -x1
    residuals: np.ndarray            # ||H0 phi_k - lambda_k phi_k||_0
    omega_mean: float                # Omega = (lambda1 + lambda2)/2
    omega_split: float               # omega = (lambda2 - lambda1)/2
    phi_R: Field
    phi_L: Field
    seed: int
    tol: float

    @property
    def beat_period(self) -> float:
        """Beating period in rescaled time, 2 pi / omega."""
        return 2.0 * np.pi / self.omega_split

    def relative_gap(self) -> float:
        """min_{k>=3} (lambda_k - Omega)/lambda_k, the discrete spectral-gap
        fraction entering the lower energy-sandwich bound."""
        if len(self.eigenvalues) < 3:
            raise ValueError("need at least 3 eigenpairs for the spectral gap")
        lam = self.eigenvalues[2:]
        return float(np.min((lam - self.omega_mean) / lam))


def _reflect(values: np.ndarray, grid: Grid) -> np.ndarray:
    return values[grid.reflect_index]


def _symmetrize(values: np.ndarray, grid: Grid, parity: str) -> np.ndarray:
    refl = _reflect(values, grid)
    return 0.5 * (values + refl) if parity == "even" else 0.5 * (values - refl)


def _make_apply_h0_real(vg: np.ndarray, k2: np.ndarray, hbar: float):
    import scipy.fft as _fft

    h2 = hbar * hbar
    fft, ifft = (_fft.fft, _fft.ifft) if vg.ndim == 1 else (_fft.fft2, _fft.ifft2)

    def apply(v):
        out = h2 * ifft(k2 * fft(v)).real
        out += vg * v
        return out

    return apply


def _lanczos_lowest(apply_h, start, nwanted, tol, max_iter, check_every=20,
                    project=None):
    """Lowest `nwanted` eigenpairs by Lanczos with full reorthogonalization.

    Works in the plain Euclidean inner product (the quadrature weight is a
    positive scalar, so eigenpairs are identical); returns Ritz values,
    vectors (rows), and residual estimates. `project` (idempotent, commuting
    with the operator) is re-applied every iteration: roundoff leakage out of
    an invariant subspace would otherwise be amplified by the iteration.
    """
    dim = start.size
    m = int(min(max_iter, dim))
    basis = np.empty((m, dim))
    alphas = np.empty(m)
    betas = np.empty(m)
    v = start / np.linalg.norm(start)
    basis[0] = v
    j = 0
    while True:
        w = apply_h(basis[j])
        if project is not None:
            w = project(w)
        alphas[j] = basis[j] @ w
        w -= alphas[j] * basis[j]
        if j > 0:
            w -= betas[j - 1] * basis[j - 1]
        # full reorthogonalization, twice for stability
        active = basis[: j + 1]
        w -= active.T @ (active @ w)
        w -= active.T @ (active @ w)
        beta = np.linalg.norm(w)
        j += 1
        exhausted = beta < 1e-13 * max(1.0, abs(alphas[: j]).max())
        if j >= nwanted and (j % check_every == 0 or j == m or exhausted):
            theta, y = eigh_tridiagonal(
                alphas[:j], betas[: j - 1], select="i", select_range=(0, nwanted - 1)
            )
            res_est = np.abs(beta * y[-1, :])
            if np.all(res_est <= tol * np.maximum(1.0, np.abs(theta))) or exhausted or j == m:
                vecs = (active.T @ y).T
                return theta, vecs, res_est, j
        if exhausted or j == m:  # pragma: no cover - handled in the check above
            raise SolverError("Lanczos stalled before producing enough Ritz pairs")
        basis[j] = w / beta
        betas[j - 1] = beta


def _solve_sector(vg, grid, hbar, parity, nwanted, tol, max_iter, rng):
    apply_shaped = _make_apply_h0_real(vg, grid.k2, hbar)
    start = _symmetrize(rng.standard_normal(grid.shape), grid, parity)

    def apply_flat(flat):
        return apply_shaped(flat.reshape(grid.shape)).ravel()

    def project(flat):
        return _symmetrize(flat.reshape(grid.shape), grid, parity).ravel()

    theta, vecs, res_est, iters = _lanczos_lowest(
        apply_flat, start.ravel(), nwanted, tol, max_iter, project=project
    )
    # true residuals on the quadrature-normalized vectors
    out = []
    for lam, flat in zip(theta, vecs):
        v = flat.reshape(grid.shape)
        v = _symmetrize(v, grid, parity)  # re-impose exact parity
        v /= np.linalg.norm(v)
        res = np.linalg.norm(apply_shaped(v) - lam * v)
        out.append((float(lam), v, float(res)))
    return out, iters


def lowest_eigenpairs(
    V: Potential,
    grid: Grid,
    hbar: float,
    k: int = 6,
    tol: float = 1e-10,
    seed: int = 1234,
    max_iter: int = 600,
) -> SpectralData:
    """Lowest k eigenpairs of H0 = -hbar^2 Laplacian + V, parity-resolved.

    Signs are fixed so phi_1(x_+) > 0 and phi_2(x_+) > 0, pinning
    phi_R = (phi_1 + phi_2)/sqrt(2) to the right well.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if grid.half_width <= 3.0 * np.max(np.abs(np.asarray(V.x_plus))):
        raise ValueError(
            "grid too small: need half_width > 3 * max(|x_pm| components)"
        )
    vg = V.on_grid(grid)
    per_sector = k
    rng = np.random.default_rng(seed)
    pairs = []
    for parity in ("even", "odd"):
        sector, _ = _solve_sector(
            vg, grid, hbar, parity, per_sector, tol, max_iter, rng
        )
        pairs.extend((lam, v, res, parity) for lam, v, res in sector)

    pairs.sort(key=lambda p: p[0])
    pairs = pairs[:k]
    bad = [(lam, res) for lam, v, res, _ in pairs if res > tol * max(1.0, abs(lam))]
    if bad:
        raise SolverError(
            f"{len(bad)} eigenpairs above residual tolerance {tol}",
            residuals=np.array([r for _, r in bad]),
        )
    if pairs[0][3] != "even" or pairs[1][3] != "odd":
        raise SolverError(
            "sector misclassification: ground state parity order is not (even, odd)"
        )

    # sign convention: positive at the grid point nearest x_plus
    ip = _nearest_index(grid, V.x_plus)
    h_scale = grid.spacing ** (grid.dim / 2.0)
    eigenvalues = np.array([lam for lam, *_ in pairs])
    eigenvectors, parities, residuals = [], [], []
    for lam, v, res, parity in pairs:
        if v[ip] < 0:
            v = -v
        eigenvectors.append(Field(grid, (v / h_scale).astype(complex)))
        parities.append(parity)
        residuals.append(res)

    omega_mean = 0.5 * (eigenvalues[0] + eigenvalues[1])
    omega_split = 0.5 * (eigenvalues[1] - eigenvalues[0])
    if omega_split <= 0:
        raise SolverError("internal consistency: omega_split <= 0")
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    phi_R = Field(grid, (eigenvectors[0].values + eigenvectors[1].values) * inv_sqrt2)
    phi_L = Field(grid, (eigenvectors[0].values - eigenvectors[1].values) * inv_sqrt2)

    return SpectralData(
        hbar=hbar,
        grid=grid,
        potential=V,
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
        parities=parities,
        residuals=np.array(residuals),
        omega_mean=float(omega_mean),
        omega_split=float(omega_split),
        phi_R=phi_R,
        phi_L=phi_L,
        seed=seed,
        tol=tol,
    )


def _nearest_index(grid: Grid, point) -> tuple:
    point = np.atleast_1d(np.asarray(point, dtype=float))
    idx = tuple(int(np.argmin(np.abs(grid.axis - p))) for p in point)
    return idx if grid.dim > 1 else idx[0]


def dense_hamiltonian(V: Potential, grid: Grid, hbar: float) -> np.ndarray:
    """Dense matrix of the same discrete H0 (oracle for coarse grids):
    columns are the matrix-free operator applied to basis vectors."""
    vg = V.on_grid(grid)
    apply_h = _make_apply_h0_real(vg, grid.k2, hbar)
    n = grid.size
    H = np.empty((n, n))
    e = np.zeros(grid.shape)
    flat = e.ravel()
    for i in range(n):
        flat[i] = 1.0
        H[:, i] = apply_h(e).ravel()
        flat[i] = 0.0
    return 0.5 * (H + H.T)


@dataclass
class LocalizationReport:
    """Masses of the single-well states in balls around the wells, and the
    sup norm of their pointwise product."""

    mass_R_plus: float
    mass_R_minus: float
    mass_L_minus: float
    mass_L_plus: float
    overlap_sup: float
    radius: float


def localization_report(S: SpectralData, V: Potential, r: float) -> LocalizationReport:
    if r >= 0.5 * V.well_separation:
        raise ValueError("radius must be smaller than half the well separation")
    grid = S.grid
    w = grid.quad_weight()

    def ball_mass(f: Field, center) -> float:
        if grid.dim == 1:
            mask = np.abs(grid.coords[0] - center[0]) < r
        else:
            mask = (grid.coords[0] - center[0]) ** 2 + (
                grid.coords[1] - center[1]
            ) ** 2 < r**2
        return float(np.sum(np.abs(f.values[mask]) ** 2) * w)

    overlap = float(np.max(np.abs(S.phi_R.values * S.phi_L.values)))
    return LocalizationReport(
        mass_R_plus=ball_mass(S.phi_R, V.x_plus),
        mass_R_minus=ball_mass(S.phi_R, V.x_minus),
        mass_L_minus=ball_mass(S.phi_L, V.x_minus),
        mass_L_plus=ball_mass(S.phi_L, V.x_plus),
        overlap_sup=overlap,
        radius=r,
    )


OMEGA_FLOOR = 1e-14  # below this, double precision cannot certify omega > 0


@dataclass
class SweepTable:
    """Splitting sweep over hbar with the WKB-law fit of log omega vs 1/hbar."""

    hbars: np.ndarray
    lambda1: np.ndarray
    lambda2: np.ndarray
    omegas: np.ndarray
    omega_means: np.ndarray
    excluded: np.ndarray      # True where omega hit the floor and left the fit
    slope: float              # estimate of -Gamma
    intercept: float
    r2: float

    @property
    def gamma_estimate(self) -> float:
        return -self.slope


def fit_splitting(hbars, omegas, excluded=None):
    """Least-squares fit of log omega against 1/hbar; returns slope,
    intercept, R^2."""
    hbars = np.asarray(hbars, dtype=float)
    omegas = np.asarray(omegas, dtype=float)
    if excluded is None:
        excluded = omegas <= OMEGA_FLOOR
    keep = ~excluded
    if keep.sum() < 2:
        return float("nan"), float("nan"), float("nan")
    x = 1.0 / hbars[keep]
    y = np.log(omegas[keep])
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else float("nan")
    return float(slope), float(intercept), r2


def splitting_sweep(
    V: Potential,
    grid: Grid,
    hbars,
    tol: float = 1e-10,
    seed: int = 1234,
    max_iter: int = 600,
) -> SweepTable:
    """Eigensolve the doublet across an hbar sweep and fit the splitting law."""
    hbars = np.asarray(sorted(hbars, reverse=True), dtype=float)
    if len(hbars) < 4:
        raise ValueError("need at least 4 hbar values")
    if np.any(hbars <= 0):
        raise ValueError("hbar values must be positive")
    l1, l2, om, Om = [], [], [], []
    for hb in hbars:
        S = lowest_eigenpairs(V, grid, hb, k=2, tol=tol, seed=seed, max_iter=max_iter)
        l1.append(S.eigenvalues[0])
        l2.append(S.eigenvalues[1])
        om.append(S.omega_split)
        Om.append(S.omega_mean)
    omegas = np.array(om)
    excluded = omegas <= OMEGA_FLOOR
    slope, intercept, r2 = fit_splitting(hbars, omegas, excluded)
    return SweepTable(
        hbars=hbars,
        lambda1=np.array(l1),
        lambda2=np.array(l2),
        omegas=omegas,
        omega_means=np.array(Om),
        excluded=excluded,
        slope=slope,
        intercept=intercept,
        r2=r2,
    )


def effective_eta(
    epsilon: float, hbar: float, sigma: int, dim: int, omega_split: float
) -> float:
    """Effective nonlinearity eta = epsilon * hbar^{-d sigma/2} / omega."""
    if omega_split <= 0:
        raise ValueError("omega_split must be positive")
    return epsilon * hbar ** (-dim * sigma / 2.0) / omega_split


def epsilon_for_eta(
    eta: float, hbar: float, sigma: int, dim: int, omega_split: float
) -> float:
    """Inverse of effective_eta: the epsilon realizing a requested eta."""
    if omega_split <= 0:
        raise ValueError("omega_split must be positive")
    return eta * omega_split * hbar ** (dim * sigma / 2.0)


def c_sigma(S: SpectralData, sigma: int, convention: str = "projection") -> float:
    """Two-mode coupling constant.

    "projection" (default): int |phi_R|^{2 sigma + 2}, the coefficient the
    nonlinearity projects onto phi_R. "paper_literal": int |phi_R|^{4 sigma}.
    The two coincide at sigma = 1.
    """
    w = S.grid.quad_weight()
    if convention == "projection":
        p = 2 * sigma + 2
    elif convention == "paper_literal":
        p = 4 * sigma
    else:
        raise ValueError(f"unknown convention {convention!r}")
    cR = float(np.sum(np.abs(S.phi_R.values) ** p) * w)
    cL = float(np.sum(np.abs(S.phi_L.values) ** p) * w)
    if abs(cR - cL) > 1e-10 * max(1.0, abs(cR)):
        raise SolverError(f"C_sigma symmetry violated: |C_R - C_L| = {abs(cR - cL):.3e}")
    return cR
