"""Euclidean space: the flat reference example.

The curvature comparison inequality holds with equality here, so this space
doubles as the ground truth for every identity-case test.
"""

from __future__ import annotations

import numpy as np

from ..core import InvalidPointError, Point, Space


class Euclidean(Space):
    """R^p with the usual metric. The chart is the identity."""

    kind = "euclidean"
    point_kind = "euclidean"
    has_chart = True

    def __init__(self, dim: int, diameter: float | None = None):
        super().__init__(diameter)
        if dim < 1:
            raise InvalidPointError("dimension must be >= 1")
        self.dim = int(dim)

    def point(self, coords) -> Point:
        v = np.asarray(coords, dtype=float)
        if v.shape != (self.dim,):
            raise InvalidPointError(f"expected shape ({self.dim},), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidPointError("coordinates must be finite")
        return Point(self.point_kind, v)

    def distance(self, x: Point, y: Point) -> float:
        self._require_point(x)
        self._require_point(y)
        return float(np.linalg.norm(x.data - y.data))

    def geodesic(self, x: Point, y: Point, t: float) -> Point:
        self._require_point(x)
        self._require_point(y)
        t = self._check_t(t)
        return Point(self.point_kind, (1.0 - t) * x.data + t * y.data)

    def distance_many(self, x: Point, points) -> np.ndarray:
        self._require_point(x)
        stacked = np.stack([p.data for p in points])
        return np.linalg.norm(stacked - x.data, axis=1)

    def points_equal(self, x: Point, y: Point, tol: float = 1e-12) -> bool:
        self._require_point(x)
        self._require_point(y)
        return bool(np.all(np.abs(x.data - y.data) <= tol))

    @property
    def chart_dim(self) -> int:
        return self.dim

    def chart(self, x: Point) -> np.ndarray:
        self._require_point(x)
        return x.data

    def chart_inverse(self, v: np.ndarray) -> Point:
        return self.point(v)

    def random_point(self, rng: np.random.Generator, scale: float = 1.0) -> Point:
        # uniform in the ball of radius `scale`
        direction = rng.normal(size=self.dim)
        norm = np.linalg.norm(direction)
        if norm == 0.0:
            return self.point(np.zeros(self.dim))
        radius = scale * rng.random() ** (1.0 / self.dim)
        return Point(self.point_kind, direction * (radius / norm))

    def format_point(self, x: Point) -> str:
        self._require_point(x)
        return ",".join(repr(float(c)) for c in x.data)

    def parse_point(self, text: str) -> Point:
        return self.point([float(tok) for tok in text.split(",")])
