"""Symmetric positive-definite matrices under two flat Riemannian metrics.

Both metrics are realized through a global chart in which the metric is
plain Euclidean:

- Log-Euclidean: chart is the matrix logarithm (via symmetric
  eigendecomposition), distance the Frobenius norm of the log difference.
- Log-Cholesky: chart collects the strictly lower triangle of the Cholesky
  factor and the elementwise log of its diagonal.

Because the charts are isometries onto Euclidean spaces, the curvature
comparison inequality is an identity and geodesics are chart-linear.

Charts are memoized on the point objects (keyed by space kind, since a
matrix is a valid point of both metrics), which makes repeated distance
evaluations against a fixed point cloud cheap.
"""

from __future__ import annotations

import numpy as np

from ..core import InvalidPointError, Point, Space

#: Eigenvalues at or below this floor are rejected as numerically singular.
EIGENVALUE_FLOOR = 1e-12

#: Coordinate tolerance for the symmetry check, relative to the matrix scale.
SYMMETRY_TOL = 1e-12


def sym_logm(a: np.ndarray) -> np.ndarray:
    """Matrix log of an SPD matrix via eigendecomposition."""
    w, v = np.linalg.eigh(a)
    if w[0] <= EIGENVALUE_FLOOR:
        raise InvalidPointError(
            f"matrix is not positive definite (min eigenvalue {w[0]!r})"
        )
    return (v * np.log(w)) @ v.T


def sym_expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential of a symmetric matrix via eigendecomposition."""
    w, v = np.linalg.eigh(a)
    out = (v * np.exp(w)) @ v.T
    return 0.5 * (out + out.T)


class _SpdBase(Space):
    """Common machinery: validation, chart memoization, chart-linear geodesics."""

    point_kind = "spd"
    has_chart = True

    def __init__(self, dim: int, diameter: float | None = None):
        super().__init__(diameter)
        if dim < 1:
            raise InvalidPointError("matrix size must be >= 1")
        self.dim = int(dim)

    def point(self, matrix) -> Point:
        a = np.asarray(matrix, dtype=float)
        if a.shape != (self.dim, self.dim):
            raise InvalidPointError(
                f"expected shape ({self.dim}, {self.dim}), got {a.shape}"
            )
        if not np.all(np.isfinite(a)):
            raise InvalidPointError("matrix entries must be finite")
        scale = max(1.0, float(np.abs(a).max()))
        if float(np.abs(a - a.T).max()) > SYMMETRY_TOL * scale:
            raise InvalidPointError("matrix must be symmetric within 1e-12")
        a = 0.5 * (a + a.T)
        eigmin = float(np.linalg.eigvalsh(a)[0])
        if eigmin <= EIGENVALUE_FLOOR:
            raise InvalidPointError(
                f"matrix is not positive definite (min eigenvalue {eigmin!r})"
            )
        return Point(self.point_kind, a)

    def _chart_raw(self, a: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _chart_inverse_raw(self, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def chart(self, x: Point) -> np.ndarray:
        self._require_point(x)
        memo = getattr(x, "_charts", None)
        if memo is None:
            memo = {}
            object.__setattr__(x, "_charts", memo)
        v = memo.get(self.kind)
        if v is None:
            v = self._chart_raw(x.data)
            memo[self.kind] = v
        return v

    def chart_inverse(self, v: np.ndarray) -> Point:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.chart_dim,):
            raise InvalidPointError(f"expected shape ({self.chart_dim},), got {v.shape}")
        pt = Point(self.point_kind, self._chart_inverse_raw(v))
        object.__setattr__(pt, "_charts", {self.kind: v.copy()})
        return pt

    def distance(self, x: Point, y: Point) -> float:
        return float(np.linalg.norm(self.chart(x) - self.chart(y)))

    def distance_many(self, x: Point, points) -> np.ndarray:
        cx = self.chart(x)
        stacked = np.stack([self.chart(p) for p in points])
        return np.linalg.norm(stacked - cx, axis=1)

    def geodesic(self, x: Point, y: Point, t: float) -> Point:
        t = self._check_t(t)
        cx, cy = self.chart(x), self.chart(y)
        return self.chart_inverse((1.0 - t) * cx + t * cy)

    def points_equal(self, x: Point, y: Point, tol: float = 1e-12) -> bool:
        self._require_point(x)
        self._require_point(y)
        return bool(np.all(np.abs(x.data - y.data) <= tol))

    def random_point(self, rng: np.random.Generator, scale: float = 1.0) -> Point:
        # uniform in a chart ball of radius `scale` around the identity chart
        direction = rng.normal(size=self.chart_dim)
        norm = np.linalg.norm(direction)
        radius = scale * rng.random() ** (1.0 / self.chart_dim)
        v = direction * (radius / norm) if norm > 0 else np.zeros(self.chart_dim)
        return self.chart_inverse(v)

    def format_point(self, x: Point) -> str:
        self._require_point(x)
        return ",".join(repr(float(c)) for c in x.data.ravel())

    def parse_point(self, text: str) -> Point:
        vals = [float(tok) for tok in text.split(",")]
        if len(vals) != self.dim * self.dim:
            raise InvalidPointError(
                f"expected {self.dim * self.dim} entries, got {len(vals)}"
            )
        return self.point(np.array(vals).reshape(self.dim, self.dim))


class SpdLogEuclidean(_SpdBase):
    """SPD matrices with the Log-Euclidean metric: d = ||log X - log Y||_F."""

    kind = "spd_log_euclidean"

    @property
    def chart_dim(self) -> int:
        return self.dim * self.dim

    def _chart_raw(self, a: np.ndarray) -> np.ndarray:
        return sym_logm(a).ravel()

    def _chart_inverse_raw(self, v: np.ndarray) -> np.ndarray:
        m = v.reshape(self.dim, self.dim)
        return sym_expm(0.5 * (m + m.T))


class SpdLogCholesky(_SpdBase):
    """SPD matrices with the Log-Cholesky metric.

    The chart of ``A = L L^T`` is ``(strict lower of L, log diag L)``; the
    distance is the Euclidean norm of the chart difference.
    """

    kind = "spd_log_cholesky"

    @property
    def chart_dim(self) -> int:
        return self.dim * (self.dim + 1) // 2

    def __init__(self, dim: int, diameter: float | None = None):
        super().__init__(dim, diameter)
        self._lower = np.tril_indices(self.dim, k=-1)

    def _chart_raw(self, a: np.ndarray) -> np.ndarray:
        try:
            chol = np.linalg.cholesky(a)
        except np.linalg.LinAlgError as exc:
            raise InvalidPointError(f"Cholesky factorization failed: {exc}") from exc
        return np.concatenate([chol[self._lower], np.log(np.diag(chol))])

    def _chart_inverse_raw(self, v: np.ndarray) -> np.ndarray:
        n_lower = self.dim * (self.dim - 1) // 2
        chol = np.zeros((self.dim, self.dim))
        chol[self._lower] = v[:n_lower]
        chol[np.diag_indices(self.dim)] = np.exp(v[n_lower:])
        a = chol @ chol.T
        return 0.5 * (a + a.T)
