"""Uniform periodic grids, complex fields, the discrete Hamiltonian
H0 = -hbar^2 Laplacian + V (spectral Laplacian via FFT), quadrature inner
products, and the graph norms ||.||_s for s in {0, 1}.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


class GridMismatchError(ValueError):
    """Raised when two fields live on different grids."""


class ConsistencyError(RuntimeError):
    """A numerically impossible value was produced (e.g. <psi, H0 psi> < 0)."""


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [-L, L)^d with n points per axis."""

    dim: int
    half_width: float
    points_per_axis: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        n = self.points_per_axis
        if n < 2 or (n & (n - 1)) != 0:
            raise ValueError(f"points_per_axis must be a power of two, got {n}")
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points_per_axis

    @property
    def shape(self) -> tuple:
        return (self.points_per_axis,) * self.dim

    @property
    def size(self) -> int:
        return self.points_per_axis**self.dim

    @cached_property
    def axis(self) -> np.ndarray:
        """Grid coordinates along one axis: -L, -L+h, ..., L-h."""
        n = self.points_per_axis
        return -self.half_width + self.spacing * np.arange(n)

    @cached_property
    def coords(self) -> tuple:
        """Coordinate arrays broadcast to the full grid shape."""
        if self.dim == 1:
            return (self.axis,)
        x1, x2 = np.meshgrid(self.axis, self.axis, indexing="ij")
        return (x1, x2)

    @cached_property
    def k2(self) -> np.ndarray:
        """|k|^2 on the FFT frequency grid, k_j in (pi/L)*{-n/2..n/2-1}."""
        k = 2.0 * np.pi * np.fft.fftfreq(self.points_per_axis, d=self.spacing)
        if self.dim == 1:
            return k**2
        kx, ky = np.meshgrid(k, k, indexing="ij")
        return kx**2 + ky**2

    @cached_property
    def reflect_index(self) -> tuple:
        """Index arrays realizing x1 -> -x1 exactly on the grid."""
        n = self.points_per_axis
        flip = (-np.arange(n)) % n
        if self.dim == 1:
            return (flip,)
        return (flip, slice(None))

    def quad_weight(self) -> float:
        return self.spacing**self.dim


class Field:
    """Complex-valued samples over a grid."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values: np.ndarray):
        values = np.asarray(values)
        if values.shape != grid.shape:
            raise ValueError(f"values shape {values.shape} != grid shape {grid.shape}")
        self.grid = grid
        self.values = values

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())

    def reflect(self) -> "Field":
        """The field composed with x1 -> -x1."""
        return Field(self.grid, self.values[self.grid.reflect_index])

    def __add__(self, other: "Field") -> "Field":
        _check_same_grid(self, other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        _check_same_grid(self, other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, scalar) -> "Field":
        return Field(self.grid, self.values * scalar)

    __rmul__ = __mul__


@dataclass
class SimConfig:
    """Physical and time-discretization parameters of one simulation."""

    hbar: float
    epsilon: float
    sigma: int
    dim: int
    dt: float
    t_final: float
    time_rescaled: bool = True
    stride: int = 1

    def __post_init__(self):
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")
        if self.sigma < 1 or int(self.sigma) != self.sigma:
            raise ValueError("sigma must be a positive integer")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        self.sigma = int(self.sigma)

    @property
    def time_scale(self) -> float:
        """Generator prefactor: 1 in rescaled time (t -> t/hbar), 1/hbar in
        physical time."""
        return 1.0 if self.time_rescaled else 1.0 / self.hbar


def _check_same_grid(f: Field, g: Field):
    if f.grid != g.grid:
        raise GridMismatchError("fields live on different grids")


def inner(f: Field, g: Field) -> complex:
    """Rectangle-rule L2 pairing <f, g>, conjugate-linear in the first slot."""
    _check_same_grid(f, g)
    return complex(np.vdot(f.values, g.values) * f.grid.quad_weight())


def norm0(f: Field) -> float:
    return float(np.linalg.norm(f.values.ravel()) * f.grid.spacing ** (f.grid.dim / 2))


def apply_H0(f: Field, V, hbar: float) -> Field:
    """Apply H0 = -hbar^2 Laplacian + V using the spectral Laplacian."""
    vg = V.on_grid(f.grid)
    fhat = np.fft.fftn(f.values)
    out = hbar**2 * np.fft.ifftn(f.grid.k2 * fhat)
    out += vg * f.values
    return Field(f.grid, out)


def norm_Xs(f: Field, V, hbar: float, s: int) -> float:
    """Graph norm of H0^{s/2}: s=0 is the L2 norm, s=1 the energy norm."""
    if s == 0:
        return norm0(f)
    if s != 1:
        raise ValueError("only s in {0, 1} is implemented")
    rad = float(np.real(inner(f, apply_H0(f, V, hbar))))
    if rad < -1e-12:
        raise ConsistencyError(
            f"negative energy-norm radicand {rad:.3e}: H0 >= V_min > 0 forbids it"
        )
    return float(np.sqrt(max(rad, 0.0)))


def tail_mass(f: Field, margin: float = 0.9) -> float:
    """|f|^2 mass in the outer shell max_j |x_j| >= margin * L."""
    g = f.grid
    edge = margin * g.half_width
    if g.dim == 1:
        mask = np.abs(g.coords[0]) >= edge
    else:
        mask = (np.abs(g.coords[0]) >= edge) | (np.abs(g.coords[1]) >= edge)
    return float(np.sum(np.abs(f.values[mask]) ** 2) * g.quad_weight())
