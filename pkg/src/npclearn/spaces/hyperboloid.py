"""Hyperbolic space in the hyperboloid (Minkowski) model.

Points are vectors ``x = (x0, x1, ..., xd)`` on the upper sheet of
``<x, x>_M = -1`` where ``<x, y>_M = -x0 y0 + sum_i xi yi``.  The model has
closed-form geodesics and no boundary singularity; every interpolation is
re-normalized onto the sheet to contain drift.

Distances are computed from the Minkowski norm of the coordinate
*difference* (``cosh d - 1 = |x - y|_M^2 / 2``), which avoids the
catastrophic cancellation of ``arccosh(-<x,y>_M)`` for nearby points.
"""

from __future__ import annotations

import numpy as np

from ..core import InvalidInputError, InvalidPointError, Point, Space

#: Tolerance on the Minkowski norm constraint of incoming points.
SHEET_TOL = 1e-9

#: Below this separation the geodesic degenerates to its start point.
_DEGENERATE = 1e-12


def minkowski_inner(a: np.ndarray, b: np.ndarray) -> float:
    return float(a[1:] @ b[1:] - a[0] * b[0])


class Hyperboloid(Space):
    """d-dimensional hyperbolic space of curvature -1, hyperboloid model."""

    kind = "hyperboloid"
    point_kind = "hyperboloid"

    def __init__(self, dim: int, diameter: float | None = None):
        super().__init__(diameter)
        if dim < 1:
            raise InvalidPointError("dimension must be >= 1")
        self.dim = int(dim)

    def point(self, coords) -> Point:
        v = np.asarray(coords, dtype=float)
        if v.shape != (self.dim + 1,):
            raise InvalidPointError(f"expected shape ({self.dim + 1},), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidPointError("coordinates must be finite")
        if v[0] <= 0:
            raise InvalidPointError("time-like coordinate must be positive")
        norm = minkowski_inner(v, v)
        if abs(norm + 1.0) > SHEET_TOL * max(1.0, v[0] ** 2):
            raise InvalidPointError(
                f"Minkowski norm must be -1 within {SHEET_TOL}, got {norm!r}"
            )
        return Point(self.point_kind, v)

    def lift(self, spatial) -> Point:
        """Point above the given spatial coordinates: x0 = sqrt(1 + |v|^2)."""
        v = np.asarray(spatial, dtype=float)
        if v.shape != (self.dim,):
            raise InvalidPointError(f"expected shape ({self.dim},), got {v.shape}")
        x = np.empty(self.dim + 1)
        x[0] = np.sqrt(1.0 + v @ v)
        x[1:] = v
        return Point(self.point_kind, x)

    @property
    def base(self) -> Point:
        return self.lift(np.zeros(self.dim))

    def distance(self, x: Point, y: Point) -> float:
        self._require_point(x)
        self._require_point(y)
        diff = x.data - y.data
        q = minkowski_inner(diff, diff)  # = 2(cosh d - 1) >= 0 on the sheet
        if q <= 0.0:
            return 0.0
        return float(2.0 * np.arcsinh(0.5 * np.sqrt(q)))

    def distance_many(self, x: Point, points) -> np.ndarray:
        self._require_point(x)
        stacked = np.stack([p.data for p in points])
        diff = stacked - x.data
        q = np.einsum("ij,ij->i", diff[:, 1:], diff[:, 1:]) - diff[:, 0] ** 2
        return 2.0 * np.arcsinh(0.5 * np.sqrt(np.maximum(q, 0.0)))

    def geodesic(self, x: Point, y: Point, t: float) -> Point:
        self._require_point(x)
        self._require_point(y)
        t = self._check_t(t)
        big_d = self.distance(x, y)
        if big_d < _DEGENERATE:
            return x
        # unit tangent at x toward y
        u = (y.data - np.cosh(big_d) * x.data) / np.sinh(big_d)
        g = np.cosh(t * big_d) * x.data + np.sinh(t * big_d) * u
        return self._renormalize(g)

    def _renormalize(self, v: np.ndarray) -> Point:
        scale = -minkowski_inner(v, v)
        if scale <= 0:
            raise InvalidPointError("interpolation left the hyperboloid sheet")
        v = v / np.sqrt(scale)
        if v[0] < 0:
            v = -v
        return Point(self.point_kind, v)

    # -- tangent-space maps, used by the fast mean and the sampler ----------

    def log_map(self, x: Point, y: Point) -> np.ndarray:
        """Tangent vector at ``x`` pointing to ``y`` with norm d(x, y)."""
        big_d = self.distance(x, y)
        if big_d < _DEGENERATE:
            return np.zeros(self.dim + 1)
        w = y.data - np.cosh(big_d) * x.data
        return w * (big_d / np.sinh(big_d))

    def exp_map(self, x: Point, v: np.ndarray) -> Point:
        """Geodesic from ``x`` with initial velocity ``v`` evaluated at time 1."""
        norm2 = v[1:] @ v[1:] - v[0] ** 2
        if norm2 <= _DEGENERATE**2:
            return x
        r = np.sqrt(norm2)
        return self._renormalize(np.cosh(r) * x.data + np.sinh(r) * (v / r))

    def barycenter_fast(self, atoms, init: Point | None = None,
                        tol: float = 1e-13, max_iter: int = 200) -> Point | None:
        """Weighted mean by tangent-space fixed-point iteration.

        Iterates ``x <- exp_x(sum_i w_i log_x(y_i))`` to machine precision.
        Much faster than the proximal sweep for repeated solves; validated
        against the proximal solver and the grid oracle in the test suite.
        """
        pts = np.stack([p.data for p in atoms.atoms])
        w = atoms.weights
        x = init.data.copy() if init is not None else pts[w.argmax()].copy()
        scale = 1.0 + float(np.abs(pts).max())
        for _ in range(max_iter):
            diff = pts - x
            q = np.einsum("ij,ij->i", diff[:, 1:], diff[:, 1:]) - diff[:, 0] ** 2
            d = 2.0 * np.arcsinh(0.5 * np.sqrt(np.maximum(q, 0.0)))
            # w_i * d_i / sinh(d_i), with the limit 1 at d = 0
            ratio = np.ones_like(d)
            mask = d > _DEGENERATE
            ratio[mask] = d[mask] / np.sinh(d[mask])
            coeff = w * ratio
            step = coeff @ pts - float(coeff @ np.cosh(d)) * x
            if float(np.abs(step).max()) <= tol * scale:
                break
            norm2 = step[1:] @ step[1:] - step[0] ** 2
            if norm2 <= 0:
                break
            r = np.sqrt(norm2)
            x = np.cosh(r) * x + np.sinh(r) * (step / r)
            x = x / np.sqrt(-minkowski_inner(x, x))
        return self._renormalize(x)

    def points_equal(self, x: Point, y: Point, tol: float = 1e-12) -> bool:
        self._require_point(x)
        self._require_point(y)
        return bool(np.all(np.abs(x.data - y.data) <= tol))

    def random_point(self, rng: np.random.Generator, scale: float = 1.0,
                     max_radius: float | None = None) -> Point:
        """Gaussian spatial coordinates projected to the sheet.

        With ``max_radius`` set, rejection-samples until the point lies in
        the geodesic ball of that radius around the base point (needed by
        diameter-bounded checks).
        """
        bound = None if max_radius is None else np.sinh(max_radius)
        for _ in range(1000):
            v = rng.normal(scale=scale, size=self.dim)
            if bound is None or np.linalg.norm(v) <= bound:
                return self.lift(v)
        # pathological scale/max_radius combination: clip to the ball
        v *= bound / np.linalg.norm(v)
        return self.lift(v)

    def format_point(self, x: Point) -> str:
        self._require_point(x)
        return ",".join(repr(float(c)) for c in x.data)

    def parse_point(self, text: str) -> Point:
        return self.point([float(tok) for tok in text.split(",")])
