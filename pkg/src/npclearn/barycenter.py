"""Weighted barycenter (Fréchet mean) solvers.

The barycenter of a finitely supported measure is the unique minimizer of
the variance functional ``F(x) = sum_i w_i d^2(x, y_i)``; uniqueness is a
characteristic property of NPC spaces.  Four routes are provided:

- ``barycenter_closed_form``: chart-weighted mean, exact on flat-chart
  spaces (Euclidean, both SPD metrics, products of those).
- ``barycenter_cpp``: cyclic proximal point, works on every space.  Each
  prox step moves along the geodesic toward one atom by the parameter
  ``t = 2*lam*w / (1 + 2*lam*w)``: minimizing
  ``w * (1-t)^2 * D^2 + t^2 * D^2 / (2*lam)`` over the geodesic (the 1-D
  quadratic prox of ``w * d^2(., y)`` with parameter ``lam``) gives exactly
  that step size.
- ``barycenter_inductive``: stochastic inductive mean
  ``s_{n+1} = geodesic(s_n, Y_{n+1}, 1/(n+1))`` with atoms resampled by
  weight; a law-of-large-numbers cross-check.
- ``barycenter_oracle``: brute-force grid minimization with one refinement
  pass, the independent reference for tests.

``solve_barycenter`` picks the best exact route available (closed form,
two-point interpolation, per-space fast solvers) and falls back to the
proximal solver.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .core import (
    InvalidInputError,
    Point,
    Space,
    UnsupportedOperationError,
    WeightedAtoms,
)
from .spaces.hyperboloid import Hyperboloid
from .spaces.product import ProductSpace
from .spaces.spider import Spider


@dataclass(frozen=True)
class SolverConfig:
    """Iterative-solver knobs.

    ``step_c`` scales the proximal rate schedule ``lam_k = step_c / (k + 1)``
    (square-summable but not summable); ``seed`` drives the stochastic
    inductive mean.
    """

    max_iterations: int = 10_000
    tolerance: float = 1e-8
    step_c: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise InvalidInputError("max_iterations must be >= 1")
        if not self.tolerance > 0:
            raise InvalidInputError("tolerance must be > 0")
        if not self.step_c > 0:
            raise InvalidInputError("step_c must be > 0")


@dataclass(frozen=True)
class BarycenterResult:
    """Solver output; ``objective`` is the variance functional at ``point``."""

    point: Point
    objective: float
    iterations: int
    converged: bool
    solver: str


def prox_step_size(lam: float, weight: float) -> float:
    """Geodesic parameter of one proximal step on ``w * d^2(., y)``."""
    return 2.0 * lam * weight / (1.0 + 2.0 * lam * weight)


def _result(space: Space, atoms: WeightedAtoms, point: Point, iterations: int,
            converged: bool, solver: str) -> BarycenterResult:
    return BarycenterResult(
        point=point,
        objective=space.variance_functional(atoms, point),
        iterations=iterations,
        converged=converged,
        solver=solver,
    )


def barycenter_closed_form(space: Space, atoms: WeightedAtoms) -> BarycenterResult:
    """Chart-weighted mean; exact on spaces isometric to a Euclidean space."""
    if not space.has_chart:
        raise UnsupportedOperationError(
            f"closed-form barycenter needs a flat chart; {space.kind} has none"
        )
    mean = np.zeros(space.chart_dim)
    for p, w in atoms:
        mean += w * space.chart(p)
    return _result(space, atoms, space.chart_inverse(mean), 1, True, "closed_form")


def barycenter_cpp(space: Space, atoms: WeightedAtoms, config: SolverConfig | None = None,
                   init: Point | None = None) -> BarycenterResult:
    """Cyclic proximal point solver.

    Sweeps the atoms in order; sweep ``k`` uses rate ``lam_k = c/(k+1)``.
    Stops when a full sweep moves the iterate by at most ``tolerance`` or
    when ``max_iterations`` sweeps have run; the ``converged`` flag reports
    which happened.  Runs in the chart when one is available (the chart is
    an isometry, so the sweep is the same algorithm on the same geometry
    without per-step round-trips).
    """
    cfg = config or SolverConfig()
    if space.has_chart:
        return _cpp_chart(space, atoms, cfg, init)
    x = init if init is not None else atoms.atoms[int(atoms.weights.argmax())]
    converged = False
    sweeps = 0
    for k in range(cfg.max_iterations):
        sweeps = k + 1
        lam = cfg.step_c / (k + 1.0)
        start = x
        for y, w in atoms:
            if w == 0.0:
                continue
            x = space.geodesic(x, y, prox_step_size(lam, w))
        if space.distance(start, x) <= cfg.tolerance:
            converged = True
            break
    return _result(space, atoms, x, sweeps, converged, "cpp")


def _cpp_chart(space: Space, atoms: WeightedAtoms, cfg: SolverConfig,
               init: Point | None) -> BarycenterResult:
    charts = np.stack([space.chart(p) for p in atoms.atoms])
    weights = atoms.weights
    x = (
        space.chart(init)
        if init is not None
        else charts[int(weights.argmax())]
    ).copy()
    converged = False
    sweeps = 0
    for k in range(cfg.max_iterations):
        sweeps = k + 1
        lam = cfg.step_c / (k + 1.0)
        start = x.copy()
        for j in range(len(weights)):
            w = weights[j]
            if w == 0.0:
                continue
            t = prox_step_size(lam, w)
            x += t * (charts[j] - x)
        if float(np.linalg.norm(start - x)) <= cfg.tolerance:
            converged = True
            break
    return _result(space, atoms, space.chart_inverse(x), sweeps, converged, "cpp")


def barycenter_inductive(space: Space, atoms: WeightedAtoms,
                         config: SolverConfig | None = None) -> BarycenterResult:
    """Stochastic inductive mean: running geodesic average of i.i.d. atom draws.

    Deterministic given ``config.seed``; runs exactly ``max_iterations``
    steps (the first draw is the initial point).
    """
    cfg = config or SolverConfig()
    rng = np.random.default_rng(cfg.seed)
    n = cfg.max_iterations
    draws = rng.choice(len(atoms), size=n, p=atoms.weights)
    if space.has_chart:
        charts = np.stack([space.chart(p) for p in atoms.atoms])
        x = charts[draws[0]].copy()
        for i in range(1, n):
            x += (charts[draws[i]] - x) / (i + 1.0)
        point = space.chart_inverse(x)
    else:
        point = atoms.atoms[draws[0]]
        for i in range(1, n):
            point = space.geodesic(point, atoms.atoms[draws[i]], 1.0 / (i + 1.0))
    return _result(space, atoms, point, n, True, "inductive")


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------


def barycenter_oracle(space: Space, atoms: WeightedAtoms, resolution: float,
                      padding: float | None = None) -> BarycenterResult:
    """Exhaustive grid minimization of the variance functional.

    Searches a box enclosing the atoms (plus ``padding``, default half the
    atom spread plus one resolution step) at ``resolution``, then refines
    once around the best cell at a tenth of the resolution.  If the coarse
    minimum lies on the region boundary the result is flagged as not
    converged and a warning is emitted (the grid failed to bracket).

    Supported: flat-chart spaces with chart dimension <= 3, hyperboloid
    with dimension <= 3, and spiders.
    """
    if not resolution > 0:
        raise InvalidInputError("resolution must be > 0")
    if isinstance(space, Spider):
        return _oracle_spider(space, atoms, resolution)
    if isinstance(space, Hyperboloid):
        if space.dim > 3:
            raise UnsupportedOperationError("oracle grid limited to dimension <= 3")
        coords = np.stack([p.data[1:] for p in atoms.atoms])
        return _oracle_box(space, atoms, coords, resolution, padding,
                           lambda row: space.lift(row))
    if space.has_chart:
        if space.chart_dim > 3:
            raise UnsupportedOperationError("oracle grid limited to chart dimension <= 3")
        coords = np.stack([space.chart(p) for p in atoms.atoms])
        return _oracle_box(space, atoms, coords, resolution, padding,
                           lambda row: space.chart_inverse(row))
    raise UnsupportedOperationError(f"no oracle grid for {space.kind} space")


def _oracle_box(space, atoms, coords, resolution, padding, lift) -> BarycenterResult:
    lo, hi = coords.min(axis=0), coords.max(axis=0)
    if padding is None:
        padding = 0.5 * float((hi - lo).max()) + resolution
    lo, hi = lo - padding, hi + padding

    def sweep(lo_, hi_, step):
        axes = [np.arange(lo_[i], hi_[i] + 0.5 * step, step) for i in range(len(lo_))]
        mesh = np.meshgrid(*axes, indexing="ij")
        grid = np.stack([m.ravel() for m in mesh], axis=1)
        values = np.zeros(len(grid))
        for p, w in atoms:
            d = _grid_distances(space, grid, p)
            values += w * d * d
        best = int(values.argmin())
        on_boundary = any(
            grid[best, i] <= lo_[i] + 0.5 * step or grid[best, i] >= hi_[i] - 0.5 * step
            for i in range(len(lo_))
        )
        return grid[best], len(grid), on_boundary

    best, n1, boundary = sweep(lo, hi, resolution)
    refined, n2, _ = sweep(best - resolution, best + resolution, resolution / 10.0)
    if boundary:
        warnings.warn("oracle grid minimum on region boundary; result may not bracket")
    return _result(space, atoms, lift(refined), n1 + n2, not boundary, "oracle")


def _grid_distances(space, grid: np.ndarray, p: Point) -> np.ndarray:
    """Distances from every grid row to ``p``, vectorized per space."""
    if isinstance(space, Hyperboloid):
        x0 = np.sqrt(1.0 + np.einsum("ij,ij->i", grid, grid))
        dspat = grid - p.data[1:]
        d0 = x0 - p.data[0]
        q = np.einsum("ij,ij->i", dspat, dspat) - d0 * d0
        return 2.0 * np.arcsinh(0.5 * np.sqrt(np.maximum(q, 0.0)))
    return np.linalg.norm(grid - space.chart(p), axis=1)


def _oracle_spider(space: Spider, atoms: WeightedAtoms, resolution: float) -> BarycenterResult:
    rmax = max(p.data[1] for p in atoms.atoms) + resolution
    legs = np.array([p.data[0] for p in atoms.atoms])
    radii = np.array([p.data[1] for p in atoms.atoms])

    def sweep(leg, lo, hi, step):
        mesh = np.arange(max(lo, 0.0), hi + 0.5 * step, step)
        d = np.where(legs[:, None] == leg, np.abs(radii[:, None] - mesh[None, :]),
                     radii[:, None] + mesh[None, :])
        values = atoms.weights @ (d * d)
        j = int(values.argmin())
        return mesh[j], float(values[j]), mesh[j] >= hi - 0.5 * step

    best_leg, best_r, best_val, boundary = 1, 0.0, np.inf, False
    n_cells = 0
    for leg in range(1, space.legs + 1):
        r, val, hit = sweep(leg, 0.0, rmax, resolution)
        n_cells += int(rmax / resolution) + 1
        if val < best_val:
            best_leg, best_r, best_val, boundary = leg, r, val, hit
    r, _, _ = sweep(best_leg, best_r - resolution, best_r + resolution, resolution / 10.0)
    if boundary:
        warnings.warn("oracle grid minimum on region boundary; result may not bracket")
    return _result(space, atoms, space.point(best_leg, r), n_cells, not boundary, "oracle")


# ---------------------------------------------------------------------------
# Dispatcher
# ---------------------------------------------------------------------------


def solve_barycenter(space: Space, atoms: WeightedAtoms,
                     config: SolverConfig | None = None, method: str = "auto",
                     init: Point | None = None) -> BarycenterResult:
    """Solve for the barycenter with the requested method.

    ``method="auto"`` picks the best exact route: single atom, two-point
    geodesic interpolation (the barycenter of two atoms with weights
    ``(1-t, t)`` is the geodesic point at ``t``), chart closed form,
    per-space fast solvers (spider leg scan, hyperboloid fixed point),
    componentwise solves on products, and the cyclic proximal solver as
    the general fallback.
    """
    if method == "closed_form":
        return barycenter_closed_form(space, atoms)
    if method == "cpp":
        return barycenter_cpp(space, atoms, config, init=init)
    if method == "inductive":
        return barycenter_inductive(space, atoms, config)
    if method == "oracle":
        cfg = config or SolverConfig()
        return barycenter_oracle(space, atoms, resolution=max(cfg.tolerance, 1e-3))
    if method != "auto":
        raise InvalidInputError(f"unknown solver method {method!r}")

    n = len(atoms)
    if n == 1:
        return _result(space, atoms, atoms.atoms[0], 1, True, "single_atom")
    if n == 2:
        pt = space.geodesic(atoms.atoms[0], atoms.atoms[1], float(atoms.weights[1]))
        return _result(space, atoms, pt, 1, True, "two_point")
    if space.has_chart:
        return barycenter_closed_form(space, atoms)
    fast = getattr(space, "barycenter_fast", None)
    if fast is not None:
        pt = fast(atoms, init=init)
        if pt is not None:
            return _result(space, atoms, pt, 1, True, "fast")
    if isinstance(space, ProductSpace):
        comps = []
        iters = 0
        ok = True
        for i, factor in enumerate(space.factors):
            res = solve_barycenter(factor, space.component_measure(atoms, i),
                                   config, "auto")
            comps.append(res.point)
            iters = max(iters, res.iterations)
            ok = ok and res.converged
        return _result(space, atoms, space.point(comps), iters, ok, "componentwise")
    return barycenter_cpp(space, atoms, config, init=init)


def check_variance_inequality(space: Space, atoms: WeightedAtoms, x: Point,
                              method: str = "auto",
                              config: SolverConfig | None = None) -> float:
    """Slack of the quadratic-growth inequality at ``x``.

    Returns ``sum_i w_i (d^2(x, y_i) - d^2(x*, y_i)) - d^2(x, x*)`` with
    ``x*`` the solved barycenter.  Nonnegative in every NPC space; zero for
    every ``x`` in Euclidean space, where it is an identity.
    """
    res = solve_barycenter(space, atoms, config, method)
    gain = space.variance_functional(atoms, x) - res.objective
    return gain - space.distance(x, res.point) ** 2
