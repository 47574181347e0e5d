import numpy as np
import pytest

from dwlab import (
    Field,
    Grid,
    SolverError,
    apply_H0,
    builtin_quartic,
    c_sigma,
    dense_hamiltonian,
    effective_eta,
    inner,
    localization_report,
    lowest_eigenpairs,
    norm0,
    splitting_sweep,
)
from dwlab.eigen import fit_splitting
from tests.conftest import make_harmonic


class TestHarmonicOracle:
    def test_spectrum_closed_form(self, harmonic_spectrum):
        # lambda_n = 1 + hbar (2n - 1) for -hbar^2 d^2 + 1 + x^2
        exact = 1.0 + 0.1 * (2 * np.arange(1, 6) - 1)
        rel = np.abs(harmonic_spectrum.eigenvalues - exact) / exact
        assert rel.max() <= 1e-8

    def test_parity_alternates(self, harmonic_spectrum):
        assert harmonic_spectrum.parities == ["even", "odd", "even", "odd", "even"]

    def test_residual_bound(self, harmonic_spectrum):
        S = harmonic_spectrum
        assert np.all(S.residuals <= S.tol * np.maximum(1.0, S.eigenvalues))

    def test_orthonormality(self, harmonic_spectrum):
        S = harmonic_spectrum
        for j, fj in enumerate(S.eigenvectors):
            assert norm0(fj) == pytest.approx(1.0, abs=1e-10)
            for fk in S.eigenvectors[j + 1:]:
                assert abs(inner(fj, fk)) <= 1e-8


class TestQuarticDoublet:
    def test_wellbottom_harmonic_band(self):
        # lambda_{1,2} ~ 1 + 2 hbar sqrt(beta) a within O(hbar^2)-ish slack
        V = builtin_quartic(1.0, 1.0)
        S = lowest_eigenpairs(V, Grid(1, 4.0, 512), 0.05, k=2, seed=5)
        approx = 1.0 + 2 * 0.05 * 1.0
        assert abs(S.eigenvalues[0] - approx) < 0.015
        assert abs(S.eigenvalues[1] - approx) < 0.015

    def test_splitting_small_but_positive(self):
        V = builtin_quartic(1.0, 1.0)
        S = lowest_eigenpairs(V, Grid(1, 4.0, 512), 0.05, k=2, seed=5)
        assert 0 < S.omega_split < 1e-3

    def test_dense_oracle_agreement(self, quartic_shallow):
        # matrix-free Lanczos vs dense diagonalization of the same operator
        grid = Grid(1, 5.0, 256)
        S = lowest_eigenpairs(quartic_shallow, grid, 0.1, k=6, seed=3)
        H = dense_hamiltonian(quartic_shallow, grid, 0.1)
        lam_dense = np.linalg.eigvalsh(H)[:6]
        np.testing.assert_allclose(S.eigenvalues, lam_dense, rtol=1e-9)

    def test_phi_R_reflection_is_phi_L(self, quartic_spectrum):
        S = quartic_spectrum
        np.testing.assert_allclose(
            S.phi_R.reflect().values, S.phi_L.values, atol=1e-10
        )

    def test_phi_R_localized_right(self, quartic_spectrum):
        x = quartic_spectrum.grid.coords[0]
        dens = np.abs(quartic_spectrum.phi_R.values) ** 2
        assert np.sum(dens[x > 0]) > 0.9 * np.sum(dens)

    def test_sign_convention(self, quartic_spectrum):
        S = quartic_spectrum
        ip = int(np.argmin(np.abs(S.grid.axis - 1.0)))
        assert S.eigenvectors[0].values[ip].real > 0
        assert S.eigenvectors[1].values[ip].real > 0

    def test_variational_upper_bound(self, quartic_spectrum, quartic_shallow):
        S = quartic_spectrum
        rng = np.random.default_rng(0)
        for _ in range(5):
            f = Field(S.grid, rng.standard_normal(S.grid.shape).astype(complex))
            f = Field(S.grid, f.values / norm0(f))
            ray = float(np.real(inner(f, apply_H0(f, quartic_shallow, 0.1))))
            assert S.eigenvalues[0] <= ray + 1e-10

    def test_spectral_gap_scales_with_hbar(self, quartic_shallow):
        grid = Grid(1, 5.0, 256)
        gaps, bands = [], []
        for hb in (0.2, 0.1, 0.05):
            S = lowest_eigenpairs(quartic_shallow, grid, hb, k=3, seed=3)
            gaps.append(S.eigenvalues[2] - S.eigenvalues[1])
            bands.append((S.eigenvalues[0] - 1.0, S.eigenvalues[1] - 1.0))
        # lambda_3 - lambda_2 >= c hbar with one c across the sweep
        cs = [g / hb for g, hb in zip(gaps, (0.2, 0.1, 0.05))]
        assert min(cs) > 0.2
        # 1 + C hbar < lambda_{1,2} < 1 + C^{-1} hbar
        for (lo, hi), hb in zip(bands, (0.2, 0.1, 0.05)):
            assert 0.05 * hb < lo <= hi < 20 * hb

    def test_grid_too_small_rejected(self, quartic_shallow):
        with pytest.raises(ValueError):
            lowest_eigenpairs(quartic_shallow, Grid(1, 2.0, 128), 0.1, k=2)

    def test_nonconvergence_carries_residuals(self, quartic_shallow):
        with pytest.raises(SolverError) as exc:
            lowest_eigenpairs(
                quartic_shallow, Grid(1, 5.0, 256), 0.1, k=4, max_iter=8, seed=3
            )
        assert exc.value.residuals is not None


class TestQuartic2D:
    def test_2d_doublet(self):
        V = builtin_quartic(1.0, 1.0, (1.0,))
        S = lowest_eigenpairs(V, Grid(2, 4.0, 64), 0.2, k=3, seed=9, max_iter=400)
        assert S.parities[0] == "even" and S.parities[1] == "odd"
        assert 0 < S.omega_split < 0.2
        # transverse ground energy shifts both levels by ~ hbar * omega_2
        assert S.eigenvalues[0] > 1.0


class TestLocalization:
    def test_masses(self, quartic_spectrum, quartic_shallow):
        rep = localization_report(quartic_spectrum, quartic_shallow, r=0.5)
        assert rep.mass_R_plus >= 0.8  # shallow well at hbar=0.1
        assert rep.mass_R_plus + rep.mass_R_minus <= 1.0 + 1e-10
        assert rep.mass_L_minus == pytest.approx(rep.mass_R_plus, abs=1e-9)

    def test_deep_well_concentrates(self):
        V = builtin_quartic(1.0, 1.0)
        S = lowest_eigenpairs(V, Grid(1, 4.0, 512), 0.05, k=2, seed=5)
        rep = localization_report(S, V, r=0.5)
        assert rep.mass_R_plus >= 0.99

    def test_overlap_decreases_with_hbar(self):
        V = builtin_quartic(1.0, 1.0)
        grid = Grid(1, 4.0, 512)
        sups = []
        for hb in (0.2, 0.1, 0.05):
            S = lowest_eigenpairs(V, grid, hb, k=2, seed=5)
            sups.append(localization_report(S, V, r=0.4).overlap_sup)
        assert sups[0] > sups[1] > sups[2]

    def test_radius_precondition(self, quartic_spectrum, quartic_shallow):
        with pytest.raises(ValueError):
            localization_report(quartic_spectrum, quartic_shallow, r=1.5)


class TestSweep:
    def test_quartic_wkb_slope(self):
        V = builtin_quartic(1.0, 1.0)
        tab = splitting_sweep(V, Grid(1, 4.0, 512), [0.20, 0.15, 0.12, 0.10, 0.08], seed=11)
        assert abs(tab.slope + 4.0 / 3.0) / (4.0 / 3.0) < 0.15
        assert tab.r2 >= 0.99
        assert not tab.excluded.any()

    def test_single_well_rejected_by_r2(self):
        V = make_harmonic(1)
        tab = splitting_sweep(V, Grid(1, 8.0, 512), [0.20, 0.15, 0.12, 0.10, 0.08], seed=11)
        # omega = hbar is not exponentially small; the log-linear fit degrades
        assert tab.r2 < 0.99

    def test_deeper_barrier_steeper_slope(self):
        grid = Grid(1, 4.0, 512)
        hbars = [0.25, 0.20, 0.15, 0.12]
        t1 = splitting_sweep(builtin_quartic(1.0, 1.0), grid, hbars, seed=11)
        t2 = splitting_sweep(builtin_quartic(1.0, 2.0), grid, hbars, seed=11)
        assert abs(t2.slope) > abs(t1.slope)

    def test_needs_four_points(self):
        with pytest.raises(ValueError):
            splitting_sweep(builtin_quartic(1.0, 1.0), Grid(1, 4.0, 256), [0.2, 0.1, 0.05])

    def test_floor_exclusion(self):
        slope, intercept, r2 = fit_splitting(
            [0.2, 0.1, 0.05, 0.02], [1e-2, 1e-4, 1e-8, 1e-16]
        )
        assert np.isfinite(slope)  # the sub-floor point is dropped, fit remains


class TestScalars:
    def test_eta_zero_epsilon(self):
        assert effective_eta(0.0, 0.1, 1, 1, 1e-3) == 0.0

    def test_eta_definitional(self):
        hbar, om = 0.1, 1e-3
        eps = om * hbar ** (1 * 1 / 2.0)
        assert effective_eta(eps, hbar, 1, 1, om) == pytest.approx(1.0, rel=1e-12)

    def test_eta_arithmetic(self):
        assert effective_eta(1e-4, 0.1, 1, 1, 1e-3) == pytest.approx(
            1e-4 * 0.1**-0.5 / 1e-3, rel=1e-12
        )

    def test_eta_requires_positive_omega(self):
        with pytest.raises(ValueError):
            effective_eta(1e-4, 0.1, 1, 1, 0.0)

    def test_c_sigma_conventions_coincide_at_sigma1(self, quartic_spectrum):
        a = c_sigma(quartic_spectrum, 1, "projection")
        b = c_sigma(quartic_spectrum, 1, "paper_literal")
        assert a == pytest.approx(b, rel=1e-14)
        assert a > 0

    def test_c_sigma_conventions_differ_at_sigma2(self, quartic_spectrum):
        a = c_sigma(quartic_spectrum, 2, "projection")   # int |phi_R|^6
        b = c_sigma(quartic_spectrum, 2, "paper_literal")  # int |phi_R|^8
        assert a != pytest.approx(b, rel=1e-3)

    def test_c_sigma_hbar_scaling(self):
        # C_sigma * hbar^{d sigma/2} bounded above and below across a sweep
        V = builtin_quartic(1.0, 1.0)
        grid = Grid(1, 4.0, 512)
        scaled = []
        for hb in (0.2, 0.1, 0.05):
            S = lowest_eigenpairs(V, grid, hb, k=2, seed=5)
            scaled.append(c_sigma(S, 1) * hb**0.5)
        assert max(scaled) / min(scaled) < 2.0


class TestParityExactness:
    def test_symmetrizer_idempotent(self):
        from dwlab.eigen import _symmetrize

        g = Grid(1, 4.0, 128)
        rng = np.random.default_rng(0)
        v = rng.standard_normal(g.shape)
        for parity in ("even", "odd"):
            once = _symmetrize(v, g, parity)
            twice = _symmetrize(once, g, parity)
            np.testing.assert_array_equal(once, twice)

    def test_sectors_exactly_orthogonal(self):
        from dwlab.eigen import _symmetrize

        g = Grid(1, 4.0, 128)
        rng = np.random.default_rng(1)
        even = _symmetrize(rng.standard_normal(g.shape), g, "even")
        odd = _symmetrize(rng.standard_normal(g.shape), g, "odd")
        assert abs(np.dot(even, odd)) <= 1e-12 * np.linalg.norm(even) * np.linalg.norm(odd)

    def test_cross_parity_eigenvectors_orthogonal(self, quartic_spectrum):
        S = quartic_spectrum
        for j, pj in enumerate(S.parities):
            for k in range(j + 1, len(S.parities)):
                if S.parities[k] != pj:
                    assert abs(inner(S.eigenvectors[j], S.eigenvectors[k])) <= 1e-12
