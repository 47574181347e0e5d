import numpy as np
import pytest

from dwlab import (
    Grid,
    PotentialConstructionError,
    agmon_distance,
    builtin_harmonic_barrier,
    builtin_quartic,
    verify_hypotheses,
)
from tests.conftest import make_harmonic


class TestQuartic:
    def test_eval_at_barrier_top(self):
        V = builtin_quartic(1.0, 1.0)
        assert V(np.array(0.0)) == pytest.approx(2.0, abs=1e-15)

    def test_eval_at_minimum(self):
        V = builtin_quartic(1.0, 1.0)
        assert V(np.array(1.0)) == pytest.approx(1.0, abs=1e-15)

    def test_eval_2d(self):
        V = builtin_quartic(1.0, 2.0, (1.0,))
        assert V(np.array(0.0), np.array(1.0)) == pytest.approx(4.0, abs=1e-15)

    def test_minima_and_metadata(self):
        V = builtin_quartic(1.5, 2.0)
        np.testing.assert_allclose(V.x_plus, [1.5])
        np.testing.assert_allclose(V.x_minus, [-1.5])
        assert V.growth_exponent == 4.0
        assert V.v_min == 1.0

    @pytest.mark.parametrize("a,beta", [(-1.0, 1.0), (1.0, 0.0), (0.0, 2.0)])
    def test_invalid_parameters(self, a, beta):
        with pytest.raises(PotentialConstructionError):
            builtin_quartic(a, beta)


class TestHarmonicBarrier:
    def test_no_barrier_is_single_well(self):
        # B <= omega0^2 s^2 has a single minimum at the origin
        with pytest.raises(PotentialConstructionError):
            builtin_harmonic_barrier(1.0, 0.2, 1.0, dim=1)

    def test_minimum_matches_gradient_root(self):
        # dV/dx = 0 at x with 2x = (2 B x / s^2) exp(-x^2/s^2)
        V = builtin_harmonic_barrier(1.0, 5.0, 0.5, dim=1)
        x = V.x_plus[0]
        expected = np.sqrt(0.25 * np.log(5.0 / (1.0 * 0.25)))
        assert x == pytest.approx(expected, abs=1e-10)
        lhs = 2.0 * x
        rhs = (2.0 * 5.0 * x / 0.25) * np.exp(-(x**2) / 0.25)
        assert lhs == pytest.approx(rhs, abs=1e-10)

    def test_minimum_value_normalized(self):
        V = builtin_harmonic_barrier(1.0, 5.0, 0.5, dim=1)
        assert float(V(V.x_plus[0])) == pytest.approx(1.0, abs=1e-12)
        assert float(V(V.x_minus[0])) == pytest.approx(1.0, abs=1e-12)


class TestVerifyHypotheses:
    def test_quartic_passes(self):
        V = builtin_quartic(1.0, 1.0)
        report = verify_hypotheses(V, Grid(1, 4.0, 512))
        assert report.all_ok
        assert report.assumed  # growth/derivative bounds recorded as assumed

    def test_single_well_fails_two_minima(self):
        V = make_harmonic(1)
        # declare the wells where a double well would have them
        V.minima = (np.array([-1.0]), np.array([1.0]))
        report = verify_hypotheses(V, Grid(1, 4.0, 512))
        assert not report.two_minima_ok

    def test_broken_symmetry_detected(self):
        base = builtin_quartic(1.0, 1.0)

        def broken(x):
            v = base.eval_fn(x)
            return v + np.where(x > 2.5, 1e-6, 0.0)

        V = builtin_quartic(1.0, 1.0)
        V.eval_fn = broken
        V._grid_cache.clear()
        report = verify_hypotheses(V, Grid(1, 4.0, 512))
        assert not report.symmetry_ok

    def test_barrier_family_passes(self):
        V = builtin_harmonic_barrier(1.0, 5.0, 0.5, dim=1)
        report = verify_hypotheses(V, Grid(1, 4.0, 512))
        assert report.all_ok

    def test_quartic_2d_passes(self):
        V = builtin_quartic(1.0, 1.0, (1.0,))
        report = verify_hypotheses(V, Grid(2, 4.0, 128))
        assert report.all_ok


class TestAgmon:
    def test_quartic_closed_form(self):
        V = builtin_quartic(1.0, 1.0)
        res = agmon_distance(V, 64)
        assert res.method == "quadrature_1d"
        assert res.gamma == pytest.approx(4.0 / 3.0, abs=1e-3)

    def test_quartic_beta4(self):
        V = builtin_quartic(1.0, 4.0)
        res = agmon_distance(V, 64)
        assert res.gamma == pytest.approx(8.0 / 3.0, abs=2e-3)

    def test_quadrature_convergence_4x(self):
        # order >= 2: doubling the panel count cuts the error at least 4x
        V = builtin_quartic(1.0, 1.0)
        exact = 4.0 / 3.0
        e1 = abs(agmon_distance(V, 128).gamma - exact)
        e2 = abs(agmon_distance(V, 256).gamma - exact)
        assert e2 <= e1 / 4.0 * 1.01

    def test_monotone_in_beta(self):
        gammas = [agmon_distance(builtin_quartic(1.0, b), 128).gamma for b in (0.5, 1.0, 2.0)]
        assert gammas[0] < gammas[1] < gammas[2]

    def test_2d_separable_matches_1d(self):
        V = builtin_quartic(1.0, 1.0, (1.0,))
        res = agmon_distance(V, 256)
        assert res.method == "eikonal_2d"
        assert abs(res.gamma - 4.0 / 3.0) / (4.0 / 3.0) < 0.02
        # the 1D path is admissible in 2D, so 2D cannot fall far below
        assert res.gamma >= 4.0 / 3.0 - 5e-3
        assert len(res.path) >= 2

    def test_2d_approaches_1d_with_resolution(self):
        V = builtin_quartic(1.0, 1.0, (1.0,))
        e_coarse = abs(agmon_distance(V, 96).gamma - 4.0 / 3.0)
        e_fine = abs(agmon_distance(V, 384).gamma - 4.0 / 3.0)
        assert e_fine < e_coarse

    def test_resolution_floor(self):
        with pytest.raises(ValueError):
            agmon_distance(builtin_quartic(1.0, 1.0), 32)

    def test_closed_form_method(self):
        V = builtin_quartic(1.0, 2.0)
        res = agmon_distance(V, 64, method="closed_form")
        assert res.method == "closed_form_1d"
        assert res.gamma == pytest.approx(np.sqrt(2.0) * 4.0 / 3.0, rel=1e-14)

    def test_barrier_family_agmon_positive(self):
        V = builtin_harmonic_barrier(1.0, 5.0, 0.5, dim=1)
        res = agmon_distance(V, 256)
        assert res.gamma > 0
        # refine and compare: second-order convergence keeps these close
        res2 = agmon_distance(V, 512)
        assert res.gamma == pytest.approx(res2.gamma, rel=1e-3)
