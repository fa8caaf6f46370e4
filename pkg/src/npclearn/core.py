"""Core contracts shared by every concrete space.

A *space* is a geodesic metric space of non-positive curvature (NPC, also
called Hadamard or CAT(0)): for every pair of points there is a unique
constant-speed geodesic, and squared distance to any fixed point is
2-convex along geodesics.  Concrete spaces live in :mod:`npclearn.spaces`;
this module defines the abstract interface they implement, the `Point`
wrapper, and finitely supported probability measures (`WeightedAtoms`).

All operations here are pure functions of immutable inputs and are safe to
call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Sequence

import numpy as np

#: Coordinate-wise tolerance below which two points count as the same point.
POINT_EQ_TOL = 1e-12

#: Absolute tolerance on the sum of measure weights.
WEIGHT_SUM_TOL = 1e-12


class InvalidInputError(ValueError):
    """An operation was called with inputs violating its preconditions."""


class InvalidPointError(InvalidInputError):
    """A point payload fails the validity predicate of its space."""


class UnsupportedOperationError(RuntimeError):
    """The space does not support the requested operation (e.g. no flat chart)."""


class SolverDidNotConvergeError(RuntimeError):
    """A solver stopped before meeting its tolerance.

    The partial result (a :class:`~npclearn.barycenter.BarycenterResult`)
    is attached as ``.result``.
    """

    def __init__(self, message: str, result: Any = None):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True, eq=False)
class Point:
    """Element of a concrete space.

    ``data`` semantics depend on ``kind``:

    - ``"euclidean"``: coordinate vector, shape ``(p,)``
    - ``"hyperboloid"``: ambient vector, shape ``(d+1,)``, on the upper sheet
      of the unit hyperboloid
    - ``"spd"``: symmetric positive-definite matrix, shape ``(d, d)``
      (shared by both SPD metrics)
    - ``"spider"``: ``(leg, radius)`` pair, hub canonicalized to ``(1, 0.0)``
    - ``"product"``: tuple of component `Point` objects

    Construct points through ``Space.point`` so the payload is validated
    once; operations then only re-check cheap structure (kind and shape).
    Points are immutable; equality up to numerical tolerance is decided by
    ``Space.points_equal``, not ``==``.
    """

    kind: str
    data: Any

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Point({self.kind}, {self.data!r})"


class Space:
    """Abstract geodesic NPC space.

    Subclasses set ``kind`` (the handle tag) and ``point_kind`` (the tag
    carried by their points; both SPD metrics share ``"spd"``) and implement
    ``distance``, ``geodesic``, ``point``, ``random_point`` and the
    serialization hooks.  Spaces isometric to a Euclidean space additionally
    expose ``chart`` / ``chart_inverse``.

    Parameters
    ----------
    diameter : float, optional
        Declared diameter bound of the working region.  Not used by the
        metric operations themselves; experiments read it to calibrate
        exp-concavity parameters.
    """

    kind: str = "abstract"
    point_kind: str = "abstract"
    has_chart: bool = False

    def __init__(self, diameter: float | None = None):
        if diameter is not None and not diameter > 0:
            raise InvalidInputError("diameter bound must be strictly positive")
        self.diameter = diameter

    # -- metric operations -------------------------------------------------

    def distance(self, x: Point, y: Point) -> float:
        raise NotImplementedError

    def geodesic(self, x: Point, y: Point, t: float) -> Point:
        """Point at parameter ``t`` on the geodesic from ``x`` to ``y``.

        Satisfies ``d(geodesic(x,y,s), geodesic(x,y,t)) == (t-s) * d(x,y)``
        for ``0 <= s <= t <= 1``.
        """
        raise NotImplementedError

    def variance_functional(self, atoms: "WeightedAtoms", x: Point) -> float:
        """Weighted sum of squared distances ``sum_i w_i d^2(x, y_i)``.

        This is the objective whose minimizer is the barycenter of ``atoms``.
        """
        self._require_point(x)
        d = self.distance_many(x, atoms.atoms)
        return float(np.dot(atoms.weights, d * d))

    def distance_many(self, x: Point, points: Sequence[Point]) -> np.ndarray:
        """Distances from ``x`` to each point. Subclasses vectorize this."""
        return np.array([self.distance(x, y) for y in points])

    def points_equal(self, x: Point, y: Point, tol: float = POINT_EQ_TOL) -> bool:
        """Coordinate-wise equality within ``tol``."""
        raise NotImplementedError

    # -- construction and sampling -----------------------------------------

    def point(self, *args, **kwargs) -> Point:
        """Validating point constructor."""
        raise NotImplementedError

    def random_point(self, rng: np.random.Generator, scale: float = 1.0) -> Point:
        """Sample a point from the space's bounded test region."""
        raise NotImplementedError

    # -- flat chart ---------------------------------------------------------

    @property
    def chart_dim(self) -> int:
        raise UnsupportedOperationError(f"{self.kind} space has no flat chart")

    def chart(self, x: Point) -> np.ndarray:
        """Global chart that is an isometry onto a Euclidean space.

        Only spaces with ``has_chart`` support this; the squared distance
        equals the squared Euclidean norm of the chart difference.
        """
        raise UnsupportedOperationError(f"{self.kind} space has no flat chart")

    def chart_inverse(self, v: np.ndarray) -> Point:
        raise UnsupportedOperationError(f"{self.kind} space has no flat chart")

    # -- serialization (plain-text records for the CLI) ---------------------

    def format_point(self, x: Point) -> str:
        raise NotImplementedError

    def parse_point(self, text: str) -> Point:
        raise NotImplementedError

    # -- internals -----------------------------------------------------------

    def _require_point(self, x: Point) -> None:
        if not isinstance(x, Point) or x.kind != self.point_kind:
            got = getattr(x, "kind", type(x).__name__)
            raise InvalidInputError(
                f"expected a {self.point_kind!r} point for {self.kind} space, got {got!r}"
            )

    @staticmethod
    def _check_t(t: float) -> float:
        t = float(t)
        if not 0.0 <= t <= 1.0:
            raise InvalidInputError(f"geodesic parameter must be in [0, 1], got {t}")
        return t

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"{type(self).__name__}(diameter={self.diameter})"


@dataclass(frozen=True, eq=False)
class WeightedAtoms:
    """Finitely supported probability measure on a space.

    Weights must be nonnegative and sum to one within ``WEIGHT_SUM_TOL``;
    use :meth:`normalized` to build one from unnormalized weights and
    :meth:`uniform` for the uniform measure on a point list.
    """

    atoms: tuple[Point, ...]
    weights: np.ndarray

    def __post_init__(self):
        atoms = tuple(self.atoms)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)
        if len(atoms) == 0:
            raise InvalidInputError("a measure needs at least one atom")
        if weights.shape != (len(atoms),):
            raise InvalidInputError(
                f"got {len(atoms)} atoms but {weights.shape} weights"
            )
        if not np.all(np.isfinite(weights)):
            raise InvalidInputError("weights must be finite")
        if np.any(weights < 0):
            raise InvalidInputError("weights must be nonnegative")
        total = float(weights.sum())
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise InvalidInputError(
                f"weights must sum to 1 within {WEIGHT_SUM_TOL}, got {total!r}"
            )
        kinds = {a.kind for a in atoms}
        if len(kinds) > 1:
            raise InvalidInputError(f"atoms mix point kinds: {sorted(kinds)}")

    @classmethod
    def uniform(cls, atoms: Sequence[Point]) -> "WeightedAtoms":
        n = len(atoms)
        if n == 0:
            raise InvalidInputError("a measure needs at least one atom")
        return cls(tuple(atoms), np.full(n, 1.0 / n))

    @classmethod
    def normalized(cls, atoms: Sequence[Point], weights: Sequence[float]) -> "WeightedAtoms":
        w = np.asarray(weights, dtype=float)
        total = w.sum()
        if not total > 0:
            raise InvalidInputError("weights must have positive sum")
        return cls(tuple(atoms), w / total)

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self) -> Iterator[tuple[Point, float]]:
        return zip(self.atoms, self.weights)


def measured_diameter(space: Space, points: Sequence[Point]) -> float:
    """Largest pairwise distance over a finite point cloud."""
    best = 0.0
    for i, x in enumerate(points[:-1]):
        d = space.distance_many(x, points[i + 1 :])
        m = float(d.max()) if d.size else 0.0
        if m > best:
            best = m
    return best
