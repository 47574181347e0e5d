"""Cross-checks between the compiled kernels and the numpy fallback."""
import numpy as np
import pytest

import dwlab._kernels_py as pyk

cyk = pytest.importorskip("dwlab._kernels")


@pytest.mark.parametrize("sigma", [1, 2, 3])
def test_nonlinear_phase_backends_agree(sigma):
    rng = np.random.default_rng(0)
    psi0 = rng.standard_normal(257 - 1) + 1j * rng.standard_normal(256)
    v = rng.uniform(1.0, 4.0, 256)
    a = psi0.copy()
    b = psi0.copy()
    cyk.nonlinear_phase(a, v, 0.01, 0.3, sigma)
    pyk.nonlinear_phase(b, v, 0.01, 0.3, sigma)
    np.testing.assert_allclose(a, b, atol=2e-15)


def test_nonlinear_phase_matches_formula():
    rng = np.random.default_rng(1)
    psi0 = rng.standard_normal(128) + 1j * rng.standard_normal(128)
    v = rng.uniform(1.0, 4.0, 128)
    a = psi0.copy()
    cyk.nonlinear_phase(a, v, 0.02, -0.4, 2)
    expected = psi0 * np.exp(-1j * 0.02 * (v - 0.4 * np.abs(psi0) ** 4))
    np.testing.assert_allclose(a, expected, atol=1e-14)


def test_nonlinear_phase_preserves_modulus():
    rng = np.random.default_rng(2)
    psi0 = rng.standard_normal(128) + 1j * rng.standard_normal(128)
    a = psi0.copy()
    cyk.nonlinear_phase(a, rng.uniform(1, 2, 128), 0.5, 1.0, 1)
    np.testing.assert_allclose(np.abs(a), np.abs(psi0), atol=1e-14)


@pytest.mark.parametrize("sigma", [1, 2])
def test_twomode_rk4_backends_agree(sigma):
    out_a = np.empty((20, 2), dtype=complex)
    out_b = np.empty((20, 2), dtype=complex)
    args = (0.8 + 0.1j, 0.5 - 0.3j, 1.0, 1.1, 0.7, sigma, 1e-3, 2000, 100)
    ra = cyk.twomode_rk4(*args, out_a)
    rb = pyk.twomode_rk4(*args, out_b)
    np.testing.assert_allclose(out_a, out_b, atol=1e-12)
    assert ra[0] == pytest.approx(rb[0], abs=1e-12)
    assert ra[2] == pytest.approx(rb[2], abs=1e-12)


def test_twomode_rk4_min_z_tracked_densely():
    # the dense minimum must see the z < 0 excursion even when no record does
    out = np.empty((1, 2), dtype=complex)
    T = 2 * np.pi
    nsteps = 10000
    _, _, min_z = cyk.twomode_rk4(
        1.0 + 0j, 0j, 1.0, 0.0, 0.0, 1, T / nsteps, nsteps, nsteps, out
    )
    assert min_z == pytest.approx(-1.0, abs=1e-6)


def test_backend_selection_env(monkeypatch):
    import importlib

    import dwlab.kernels as sel

    monkeypatch.setenv("DWLAB_DISABLE_EXT", "1")
    importlib.reload(sel)
    assert sel.BACKEND == "python"
    monkeypatch.delenv("DWLAB_DISABLE_EXT")
    importlib.reload(sel)
    assert sel.BACKEND == "cython"
