import numpy as np
import pytest

from dwlab import Grid, Potential, builtin_quartic, lowest_eigenpairs


def make_harmonic(dim=1):
    """Single-well oracle potential V = 1 + |x|^2 (closed-form spectrum)."""
    if dim == 1:
        fn = lambda x: 1.0 + x**2
    else:
        fn = lambda x, y: 1.0 + x**2 + y**2
    zero = np.zeros(dim)
    return Potential(dim=dim, eval_fn=fn, minima=(zero, zero.copy()), family="custom")


@pytest.fixture(scope="session")
def harmonic_1d():
    return make_harmonic(1)


@pytest.fixture(scope="session")
def harmonic_spectrum(harmonic_1d):
    grid = Grid(1, 8.0, 1024)
    return lowest_eigenpairs(harmonic_1d, grid, 0.1, k=5, tol=1e-10, seed=7)


@pytest.fixture(scope="session")
def quartic_shallow():
    """The dynamics workhorse: moderate doublet at hbar = 0.1."""
    return builtin_quartic(1.0, 0.1)


@pytest.fixture(scope="session")
def quartic_spectrum(quartic_shallow):
    grid = Grid(1, 5.0, 256)
    return lowest_eigenpairs(quartic_shallow, grid, 0.1, k=6, tol=1e-10, seed=3)
