"""Weighted finite products of NPC spaces.

``d^2(x, y) = sum_i mu_i d_i^2(x_i, y_i)`` over the factors; a curve is a
geodesic exactly when every component is, so geodesics are componentwise.
The product of flat-chart factors is itself flat, with the chart given by
concatenating the factor charts scaled by ``sqrt(mu_i)``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..core import InvalidInputError, InvalidPointError, Point, Space


class ProductSpace(Space):
    """Finite weighted product of NPC factor spaces."""

    kind = "product"
    point_kind = "product"

    def __init__(self, factors: Sequence[Space], weights: Sequence[float] | None = None,
                 diameter: float | None = None):
        super().__init__(diameter)
        if len(factors) == 0:
            raise InvalidInputError("a product needs at least one factor")
        self.factors = tuple(factors)
        if weights is None:
            weights = np.ones(len(self.factors))
        self.factor_weights = np.asarray(weights, dtype=float)
        if self.factor_weights.shape != (len(self.factors),):
            raise InvalidInputError("one weight per factor required")
        if np.any(self.factor_weights <= 0):
            raise InvalidInputError("factor weights must be positive")

    @property
    def has_chart(self) -> bool:  # type: ignore[override]
        return all(f.has_chart for f in self.factors)

    def point(self, components: Sequence[Point]) -> Point:
        components = tuple(components)
        if len(components) != len(self.factors):
            raise InvalidPointError(
                f"expected {len(self.factors)} components, got {len(components)}"
            )
        for f, c in zip(self.factors, components):
            f._require_point(c)
        return Point(self.point_kind, components)

    def component_measure(self, atoms, index: int):
        """Marginal of a product measure on one factor (same weights)."""
        from ..core import WeightedAtoms

        return WeightedAtoms(
            tuple(a.data[index] for a in atoms.atoms), atoms.weights
        )

    def distance(self, x: Point, y: Point) -> float:
        self._require_point(x)
        self._require_point(y)
        sq = 0.0
        for f, mu, cx, cy in zip(self.factors, self.factor_weights, x.data, y.data):
            sq += mu * f.distance(cx, cy) ** 2
        return float(np.sqrt(sq))

    def distance_many(self, x: Point, points) -> np.ndarray:
        self._require_point(x)
        sq = np.zeros(len(points))
        for i, (f, mu) in enumerate(zip(self.factors, self.factor_weights)):
            d = f.distance_many(x.data[i], [p.data[i] for p in points])
            sq += mu * d * d
        return np.sqrt(sq)

    def geodesic(self, x: Point, y: Point, t: float) -> Point:
        self._require_point(x)
        self._require_point(y)
        t = self._check_t(t)
        return Point(
            self.point_kind,
            tuple(f.geodesic(cx, cy, t) for f, cx, cy in zip(self.factors, x.data, y.data)),
        )

    def points_equal(self, x: Point, y: Point, tol: float = 1e-12) -> bool:
        self._require_point(x)
        self._require_point(y)
        return all(
            f.points_equal(cx, cy, tol) for f, cx, cy in zip(self.factors, x.data, y.data)
        )

    @property
    def chart_dim(self) -> int:
        if not self.has_chart:
            return super().chart_dim  # raises UnsupportedOperationError
        return sum(f.chart_dim for f in self.factors)

    def chart(self, x: Point) -> np.ndarray:
        if not self.has_chart:
            return super().chart(x)
        self._require_point(x)
        parts = [
            np.sqrt(mu) * f.chart(c)
            for f, mu, c in zip(self.factors, self.factor_weights, x.data)
        ]
        return np.concatenate(parts)

    def chart_inverse(self, v: np.ndarray) -> Point:
        if not self.has_chart:
            return super().chart_inverse(v)
        v = np.asarray(v, dtype=float)
        components = []
        offset = 0
        for f, mu in zip(self.factors, self.factor_weights):
            size = f.chart_dim
            components.append(f.chart_inverse(v[offset : offset + size] / np.sqrt(mu)))
            offset += size
        return Point(self.point_kind, tuple(components))

    def random_point(self, rng: np.random.Generator, scale: float = 1.0) -> Point:
        return Point(
            self.point_kind, tuple(f.random_point(rng, scale) for f in self.factors)
        )

    def format_point(self, x: Point) -> str:
        self._require_point(x)
        return ";".join(f.format_point(c) for f, c in zip(self.factors, x.data))

    def parse_point(self, text: str) -> Point:
        parts = text.split(";")
        if len(parts) != len(self.factors):
            raise InvalidInputError(
                f"expected {len(self.factors)} components, got {len(parts)}"
            )
        return self.point([f.parse_point(p) for f, p in zip(self.factors, parts)])
