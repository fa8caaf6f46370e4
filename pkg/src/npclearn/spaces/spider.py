"""Spider metric tree: k rays glued at a hub.

The simplest NPC space that is not a manifold.  A point is a pair
``(leg, radius)``; the hub is the single point with radius zero,
canonicalized to ``(1, 0.0)`` so equality is well defined.  Distances and
geodesics route through the hub when the legs differ.
"""

from __future__ import annotations

import numpy as np

from ..core import InvalidInputError, InvalidPointError, Point, Space


class Spider(Space):
    """Star tree with ``legs`` rays of infinite length."""

    kind = "spider"
    point_kind = "spider"

    def __init__(self, legs: int, diameter: float | None = None):
        super().__init__(diameter)
        if legs < 2:
            raise InvalidPointError("a spider needs at least 2 legs")
        self.legs = int(legs)

    def point(self, leg: int, radius: float) -> Point:
        leg = int(leg)
        radius = float(radius)
        if not 1 <= leg <= self.legs:
            raise InvalidPointError(f"leg must be in [1, {self.legs}], got {leg}")
        if not np.isfinite(radius) or radius < 0:
            raise InvalidPointError(f"radius must be a finite nonnegative real, got {radius}")
        if radius == 0.0:
            leg = 1
        return Point(self.point_kind, (leg, radius))

    @property
    def hub(self) -> Point:
        return Point(self.point_kind, (1, 0.0))

    def distance(self, x: Point, y: Point) -> float:
        self._require_point(x)
        self._require_point(y)
        (lx, rx), (ly, ry) = x.data, y.data
        if lx == ly:
            return abs(rx - ry)
        return rx + ry

    def distance_many(self, x: Point, points) -> np.ndarray:
        self._require_point(x)
        lx, rx = x.data
        legs = np.array([p.data[0] for p in points])
        radii = np.array([p.data[1] for p in points])
        return np.where(legs == lx, np.abs(radii - rx), radii + rx)

    def geodesic(self, x: Point, y: Point, t: float) -> Point:
        self._require_point(x)
        self._require_point(y)
        t = self._check_t(t)
        (lx, rx), (ly, ry) = x.data, y.data
        if lx == ly:
            return self.point(lx, (1.0 - t) * rx + t * ry)
        # through the hub: walk t*(rx + ry) of arc length starting from x
        pos = t * (rx + ry)
        if pos <= rx:
            return self.point(lx, rx - pos)
        return self.point(ly, pos - rx)

    def points_equal(self, x: Point, y: Point, tol: float = 1e-12) -> bool:
        self._require_point(x)
        self._require_point(y)
        (lx, rx), (ly, ry) = x.data, y.data
        if lx == ly:
            return abs(rx - ry) <= tol
        return rx + ry <= tol

    def barycenter_fast(self, atoms, init=None) -> Point:
        """Exact weighted barycenter.

        On a candidate leg the objective is a quadratic in the radius whose
        unconstrained minimizer is ``2 * S_leg - S`` with
        ``S_leg = sum of w*r on that leg`` and ``S = sum of all w*r``; it is
        positive for at most one leg (that leg carries more than half of the
        total moment), otherwise the hub is the minimizer.
        """
        s_leg = np.zeros(self.legs + 1)
        for p, w in atoms:
            s_leg[p.data[0]] += w * p.data[1]
        total = s_leg.sum()
        best = int(s_leg.argmax())
        radius = 2.0 * s_leg[best] - total
        if radius <= 0.0:
            return self.hub
        return self.point(best, radius)

    def random_point(self, rng: np.random.Generator, scale: float = 1.0) -> Point:
        leg = int(rng.integers(1, self.legs + 1))
        return self.point(leg, scale * rng.random())

    def format_point(self, x: Point) -> str:
        self._require_point(x)
        leg, radius = x.data
        return f"{leg}:{radius!r}"

    def parse_point(self, text: str) -> Point:
        try:
            leg, radius = text.split(":")
        except ValueError as exc:
            raise InvalidInputError(f"expected 'leg:radius', got {text!r}") from exc
        return self.point(int(leg), float(radius))
