"""Double-well potentials: builtin families, hypothesis verification on a
probe grid, and the Agmon distance between the wells.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .fields import Grid


class PotentialConstructionError(ValueError):
    """Parameters do not yield an admissible double well."""


@dataclass
class Potential:
    """A reflection-symmetric double-well potential with V_min normalized to 1.

    `eval_fn` takes d coordinate arrays and returns V pointwise; it must be
    vectorized (numpy broadcasting).
    """

    dim: int
    eval_fn: callable
    minima: tuple  # (x_minus, x_plus) as arrays of length dim
    v_min: float = 1.0
    growth_exponent: float = 2.0
    family: str = "custom"
    family_params: dict = field(default_factory=dict)
    _grid_cache: dict = field(default_factory=dict, repr=False)

    def __call__(self, *coords) -> np.ndarray:
        return self.eval_fn(*coords)

    @property
    def x_minus(self) -> np.ndarray:
        return self.minima[0]

    @property
    def x_plus(self) -> np.ndarray:
        return self.minima[1]

    @property
    def well_separation(self) -> float:
        return float(np.linalg.norm(self.x_plus - self.x_minus))

    def on_grid(self, grid: Grid) -> np.ndarray:
        """Sampled values over a grid, cached per grid."""
        if grid.dim != self.dim:
            raise ValueError(f"potential is {self.dim}D, grid is {grid.dim}D")
        cached = self._grid_cache.get(grid)
        if cached is None:
            cached = np.ascontiguousarray(self.eval_fn(*grid.coords), dtype=float)
            self._grid_cache[grid] = cached
        return cached

    def agmon_closed_form(self):
        """Closed-form Agmon distance for families that admit one, else None."""
        if self.family == "quartic":
            a = self.family_params["a"]
            beta = self.family_params["beta"]
            return np.sqrt(beta) * 4.0 * a**3 / 3.0
        return None


def builtin_quartic(a: float, beta: float, transverse_freqs=()) -> Potential:
    """V(x) = 1 + beta (x1^2 - a^2)^2 + sum_j omega_j^2 x_j^2, minima (+-a, 0)."""
    if a <= 0 or beta <= 0:
        raise PotentialConstructionError("a and beta must be positive")
    freqs = tuple(float(w) for w in transverse_freqs)
    dim = 1 + len(freqs)
    if dim not in (1, 2):
        raise PotentialConstructionError("only d in {1, 2} is supported")

    if dim == 1:
        def eval_fn(x1):
            return 1.0 + beta * (x1**2 - a**2) ** 2
    else:
        w2 = freqs[0] ** 2

        def eval_fn(x1, x2):
            return 1.0 + beta * (x1**2 - a**2) ** 2 + w2 * x2**2

    x_plus = np.zeros(dim)
    x_plus[0] = a
    return Potential(
        dim=dim,
        eval_fn=eval_fn,
        minima=(-x_plus, x_plus),
        v_min=1.0,
        growth_exponent=4.0,
        family="quartic",
        family_params={"a": a, "beta": beta, "transverse_freqs": freqs},
    )


def builtin_harmonic(omega0: float, dim: int = 1) -> Potential:
    """Single-well oracle/negative-control family V = 1 + omega0^2 |x|^2.

    Not a double well (both declared minima sit at the origin): used for the
    closed-form spectrum lambda_n = 1 + hbar omega0 (2n - 1) and for negative
    controls; double-well-only operations reject it.
    """
    if omega0 <= 0:
        raise PotentialConstructionError("omega0 must be positive")
    if dim not in (1, 2):
        raise PotentialConstructionError("only d in {1, 2} is supported")
    w2 = omega0**2
    if dim == 1:
        def eval_fn(x1):
            return 1.0 + w2 * x1**2
    else:
        def eval_fn(x1, x2):
            return 1.0 + w2 * (x1**2 + x2**2)
    zero = np.zeros(dim)
    return Potential(
        dim=dim,
        eval_fn=eval_fn,
        minima=(zero, zero.copy()),
        v_min=1.0,
        growth_exponent=2.0,
        family="harmonic",
        family_params={"omega0": omega0},
    )


def builtin_harmonic_barrier(
    omega0: float, barrier_height: float, barrier_width: float, dim: int = 1
) -> Potential:
    """V(x) = 1 + omega0^2 |x|^2 + B exp(-x1^2/s^2), shifted so V_min = 1.

    The wells sit on the x1 axis at the nonzero roots of dV/dx1, located by
    Newton iteration (bisection fallback) to 1e-12; they exist iff
    B > omega0^2 s^2.
    """
    if omega0 <= 0 or barrier_height <= 0 or barrier_width <= 0:
        raise PotentialConstructionError("all parameters must be positive")
    if dim not in (1, 2):
        raise PotentialConstructionError("only d in {1, 2} is supported")
    w2 = omega0**2
    B = barrier_height
    s2 = barrier_width**2

    if B <= w2 * s2:
        raise PotentialConstructionError(
            "not a double well: need barrier_height > omega0^2 * barrier_width^2"
        )

    # dV/dx1 = 2 w2 x - (2 B x / s2) exp(-x^2/s2); nonzero root from the
    # closed form as the Newton start.
    def grad1(x):
        return 2.0 * w2 * x - (2.0 * B * x / s2) * np.exp(-(x**2) / s2)

    def grad1p(x):
        e = np.exp(-(x**2) / s2)
        return 2.0 * w2 - (2.0 * B / s2) * e * (1.0 - 2.0 * x**2 / s2)

    x = float(np.sqrt(s2 * np.log(B / (w2 * s2))))
    for _ in range(100):
        g = grad1(x)
        dg = grad1p(x)
        step = g / dg
        x_new = x - step
        if x_new <= 0:  # bisection fallback toward the bracket (0, x]
            x_new = 0.5 * x
        if abs(x_new - x) <= 1e-12 * max(1.0, abs(x_new)):
            x = x_new
            break
        x = x_new
    else:
        raise PotentialConstructionError("minimum search did not converge")
    if grad1p(x) <= 0:
        raise PotentialConstructionError("not a double well: stationary point is not a minimum")

    raw_min = 1.0 + w2 * x**2 + B * np.exp(-(x**2) / s2)
    shift = raw_min - 1.0

    if dim == 1:
        def eval_fn(x1):
            return 1.0 + w2 * x1**2 + B * np.exp(-(x1**2) / s2) - shift
    else:
        def eval_fn(x1, x2):
            return 1.0 + w2 * (x1**2 + x2**2) + B * np.exp(-(x1**2) / s2) - shift

    x_plus = np.zeros(dim)
    x_plus[0] = x
    return Potential(
        dim=dim,
        eval_fn=eval_fn,
        minima=(-x_plus, x_plus),
        v_min=1.0,
        growth_exponent=2.0,
        family="harmonic_barrier",
        family_params={
            "omega0": omega0,
            "barrier_height": B,
            "barrier_width": barrier_width,
            "shift": shift,
        },
    )


@dataclass
class HypothesisReport:
    """Outcome of the sampled double-well admissibility checks."""

    symmetry_ok: bool
    two_minima_ok: bool
    positive_above_min_ok: bool
    hessian_pd_ok: bool
    assumed: list
    details: dict

    @property
    def all_ok(self) -> bool:
        return (
            self.symmetry_ok
            and self.two_minima_ok
            and self.positive_above_min_ok
            and self.hessian_pd_ok
        )


def _fd_hessian(V: Potential, x0: np.ndarray, step: float = 1e-4) -> np.ndarray:
    d = V.dim
    H = np.zeros((d, d))
    def at(p):
        return float(V(*p))
    for i in range(d):
        for j in range(d):
            ei = np.zeros(d); ei[i] = step
            ej = np.zeros(d); ej[j] = step
            if i == j:
                H[i, i] = (at(x0 + ei) - 2.0 * at(x0) + at(x0 - ei)) / step**2
            else:
                H[i, j] = (
                    at(x0 + ei + ej) - at(x0 + ei - ej)
                    - at(x0 - ei + ej) + at(x0 - ei - ej)
                ) / (4.0 * step**2)
    return H


def verify_hypotheses(V: Potential, probe_grid: Grid) -> HypothesisReport:
    """Check the sampled double-well hypotheses on a probe grid.

    Growth and derivative bounds at infinity cannot be certified on a finite
    grid; they are reported as assumed.
    """
    vg = V.on_grid(probe_grid)
    details = {}

    refl = vg[probe_grid.reflect_index]
    sym_err = np.max(np.abs(refl - vg) / (1.0 + np.abs(vg)))
    symmetry_ok = bool(sym_err <= 1e-12)
    details["symmetry_rel_err"] = float(sym_err)

    vmin_grid = float(vg.min())
    details["grid_min"] = vmin_grid
    tol_min = 1e-12 * (1.0 + abs(vmin_grid))
    near_min = np.argwhere(vg <= vmin_grid + tol_min)
    h = probe_grid.spacing
    pts = np.stack([c[tuple(near_min.T)] for c in probe_grid.coords], axis=-1)
    d_plus = np.linalg.norm(pts - V.x_plus, axis=-1)
    d_minus = np.linalg.norm(pts - V.x_minus, axis=-1)
    two_minima_ok = bool(
        len(pts) >= 2
        and np.any(d_plus <= 2.0 * h)
        and np.any(d_minus <= 2.0 * h)
        and np.all(np.minimum(d_plus, d_minus) <= 2.0 * h)
    )
    details["n_grid_minimizers"] = int(len(pts))

    # strict positivity away from the declared minima
    if probe_grid.dim == 1:
        dist = np.abs(probe_grid.coords[0] - V.x_plus[0])
        dist = np.minimum(dist, np.abs(probe_grid.coords[0] - V.x_minus[0]))
    else:
        dist = np.sqrt(
            (probe_grid.coords[0] - V.x_plus[0]) ** 2
            + (probe_grid.coords[1] - V.x_plus[1]) ** 2
        )
        dist_m = np.sqrt(
            (probe_grid.coords[0] - V.x_minus[0]) ** 2
            + (probe_grid.coords[1] - V.x_minus[1]) ** 2
        )
        dist = np.minimum(dist, dist_m)
    away = dist > 2.0 * h
    positive_above_min_ok = bool(np.all(vg[away] > V.v_min))
    details["min_excess_away"] = float((vg[away] - V.v_min).min()) if away.any() else 0.0

    hess_ok = True
    for x0 in (V.x_minus, V.x_plus):
        Hm = _fd_hessian(V, np.atleast_1d(np.asarray(x0, dtype=float)))
        eig = np.linalg.eigvalsh(Hm)
        details[f"hessian_eigs_at_{'+' if x0 is V.x_plus else '-'}"] = eig.tolist()
        hess_ok = hess_ok and bool(np.all(eig > 0))

    assumed = [
        f"polynomial growth at infinity (m = {V.growth_exponent}) assumed",
        "global derivative bounds assumed",
        "smoothness verified on samples only",
    ]
    return HypothesisReport(
        symmetry_ok=symmetry_ok,
        two_minima_ok=two_minima_ok,
        positive_above_min_ok=positive_above_min_ok,
        hessian_pd_ok=hess_ok,
        assumed=assumed,
        details=details,
    )


@dataclass
class AgmonResult:
    """Agmon distance between the wells and, in 2D, the realizing path."""

    gamma: float
    path: list
    method: str
    resolution: int

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "method": self.method, "resolution": self.resolution}


def _agmon_1d_quadrature(V: Potential, resolution: int, nodes_per_panel: int) -> float:
    a, b = float(V.x_minus[0]), float(V.x_plus[0])
    nodes, weights = np.polynomial.legendre.leggauss(nodes_per_panel)
    edges = np.linspace(a, b, resolution + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1] - edges[0])
    x = (mid[:, None] + half * nodes[None, :]).ravel()
    w = (half * np.broadcast_to(weights, (resolution, nodes_per_panel))).ravel()
    integrand = np.sqrt(np.maximum(V(x) - V.v_min, 0.0))
    return float(np.sum(w * integrand))


def _agmon_2d_dijkstra(V: Potential, resolution: int):
    """Shortest path on a dense 8-neighbor grid graph; edge weight is the
    Euclidean edge length times the endpoint average of sqrt(V - V_min)."""
    xm, xp = V.x_minus, V.x_plus
    sep = V.well_separation
    # axis grid passes exactly through both minima; pad by a quarter
    # separation beyond each well and transversally around the wells' x2
    hx = sep / (resolution - 1)
    pad = int(round(0.25 * resolution))
    n1 = resolution + 2 * pad
    x1 = xm[0] - pad * hx + hx * np.arange(n1)
    nhalf = int(round(0.25 * resolution))
    x2 = xm[1] + hx * np.arange(-nhalf, nhalf + 1)
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    w = np.sqrt(np.maximum(V(X1, X2) - V.v_min, 0.0))

    n2 = len(x2)
    idx = np.arange(n1 * n2).reshape(n1, n2)
    rows, cols, vals = [], [], []
    for di, dj in ((0, 1), (1, 0), (1, 1), (1, -1)):
        si = slice(None, n1 - di) if di else slice(None)
        ti = slice(di, None) if di else slice(None)
        if dj >= 0:
            sj = slice(None, n2 - dj) if dj else slice(None)
            tj = slice(dj, None) if dj else slice(None)
        else:
            sj = slice(-dj, None)
            tj = slice(None, n2 + dj)
        length = hx * np.hypot(di, dj)
        rows.append(idx[si, sj].ravel())
        cols.append(idx[ti, tj].ravel())
        vals.append((length * 0.5 * (w[si, sj] + w[ti, tj])).ravel())
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    graph = csr_matrix((vals, (rows, cols)), shape=(n1 * n2, n1 * n2))

    i_minus = idx[pad, nhalf]
    i_plus = idx[pad + resolution - 1, nhalf]
    dist, pred = dijkstra(
        graph, directed=False, indices=i_minus, return_predecessors=True
    )
    gamma = float(dist[i_plus])
    path = []
    node = i_plus
    while node >= 0:
        path.append((float(X1.ravel()[node]), float(X2.ravel()[node])))
        node = pred[node]
    path.reverse()
    return gamma, path


def agmon_distance(
    V: Potential, resolution: int, nodes_per_panel: int = 1, method: str = "auto"
) -> AgmonResult:
    """Agmon distance Gamma = inf over well-connecting paths of the line
    integral of sqrt(V - V_min).

    1D: composite Gauss-Legendre over [x_-, x_+] with `resolution` panels
    (every admissible 1D path traverses this segment). 2D: Dijkstra on a
    dense 8-neighbor grid graph, first-order accurate.
    """
    if resolution < 64:
        raise ValueError("resolution must be at least 64")
    if V.well_separation == 0.0:
        raise ValueError("not a double well: the declared minima coincide")
    if method == "closed_form":
        gamma = V.agmon_closed_form()
        if gamma is None:
            raise ValueError(f"family {V.family!r} has no closed-form Agmon distance")
        return AgmonResult(gamma, [], "closed_form_1d", resolution)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    if V.dim == 1:
        gamma = _agmon_1d_quadrature(V, resolution, nodes_per_panel)
        return AgmonResult(gamma, [], "quadrature_1d", resolution)
    gamma, path = _agmon_2d_dijkstra(V, resolution)
    return AgmonResult(gamma, path, "eikonal_2d", resolution)
