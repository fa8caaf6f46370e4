"""Exponentially weighted expert aggregation with barycentric predictions.

The classical exponentially-weighted-average forecaster predicts with the
weighted average of the expert advice; in a general NPC decision space the
average is replaced by the barycenter of the advice under the Gibbs
posterior weights ``w_theta proportional to pi_theta * exp(-beta * L_theta)``.
On a Euclidean decision space this reduces exactly to the classical
forecaster.

The regret guarantee requires the loss to be exp-concave along geodesics:
``exp(-beta * loss(., z))`` geodesically concave for every outcome ``z``.
For squared distance on a region of diameter ``D`` this holds whenever
``beta <= 1 / (2 D^2)``, giving the regret bound ``2 D^2 ln K`` for the
uniform prior over ``K`` experts.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .barycenter import SolverConfig, solve_barycenter
from .core import (
    InvalidInputError,
    Point,
    SolverDidNotConvergeError,
    Space,
    WeightedAtoms,
)

#: Numerical slack allowed on every asserted bound.
BOUND_TOL = 1e-6

_LOSS_KINDS = ("squared", "distance", "custom")


@dataclass(frozen=True)
class LossSpec:
    """Loss function plus its exp-concavity parameter ``beta``.

    ``kind`` is ``"squared"`` (squared distance), ``"distance"``, or
    ``"custom"`` with ``fn(space, m, z) -> float``.  With ``strict=True``
    and a squared-distance loss on a space with a declared diameter ``D``,
    constructing a game with ``beta > 1/(2 D^2)`` raises.

    ``certified`` can assert exp-concavity for custom losses; when the loss
    carries no certificate the theoretical bound is still reported but the
    bound-satisfied flag is suppressed (``None``).
    """

    beta: float
    kind: str = "squared"
    fn: Callable[[Space, Point, Point], float] | None = None
    strict: bool = False
    certified: bool | None = None

    def __post_init__(self):
        if not self.beta > 0:
            raise InvalidInputError("beta must be positive")
        if self.kind not in _LOSS_KINDS:
            raise InvalidInputError(f"kind must be one of {_LOSS_KINDS}")
        if self.kind == "custom" and self.fn is None:
            raise InvalidInputError("custom loss needs fn")

    def __call__(self, space: Space, m: Point, z: Point) -> float:
        if self.kind == "squared":
            return space.distance(m, z) ** 2
        if self.kind == "distance":
            return space.distance(m, z)
        return float(self.fn(space, m, z))

    def many(self, space: Space, points: Sequence[Point], z: Point) -> np.ndarray:
        """Loss of every point against one outcome."""
        if self.kind == "squared":
            return space.distance_many(z, points) ** 2
        if self.kind == "distance":
            return space.distance_many(z, points)
        return np.array([self.fn(space, m, z) for m in points])

    def certified_for(self, space: Space) -> bool:
        """Whether the regret analysis applies at this beta on this space."""
        if self.certified is not None:
            return self.certified
        if self.kind == "squared" and space.diameter is not None:
            return self.beta <= 1.0 / (2.0 * space.diameter**2) * (1.0 + 1e-12)
        return False

    def enforce_strict(self, space: Space) -> None:
        if not self.strict or self.kind != "squared" or space.diameter is None:
            return
        limit = 1.0 / (2.0 * space.diameter**2)
        if self.beta > limit * (1.0 + 1e-12):
            raise InvalidInputError(
                f"strict mode: beta={self.beta} exceeds 1/(2 diam^2)={limit}"
            )


class ExpertLedger:
    """Cumulative expert losses and the Gibbs posterior over experts.

    Losses start at zero, so the first posterior equals the prior.  The
    prior must be strictly positive (drop impossible experts instead of
    giving them zero mass).
    """

    def __init__(self, n_experts: int, beta: float, prior: Sequence[float] | None = None):
        if n_experts < 1:
            raise InvalidInputError("need at least one expert")
        if not beta > 0:
            raise InvalidInputError("beta must be positive")
        if prior is None:
            prior = np.full(n_experts, 1.0 / n_experts)
        prior = np.asarray(prior, dtype=float)
        if prior.shape != (n_experts,):
            raise InvalidInputError("prior length must match the expert count")
        if np.any(prior <= 0):
            raise InvalidInputError("prior entries must be strictly positive")
        if abs(prior.sum() - 1.0) > 1e-12:
            raise InvalidInputError("prior must sum to 1")
        self.n_experts = n_experts
        self.beta = float(beta)
        self.prior = prior
        self.losses = np.zeros(n_experts)

    def posterior_weights(self) -> np.ndarray:
        return posterior_weights(self)

    def update(self, increments: np.ndarray) -> None:
        self.losses += increments

    def copy(self) -> "ExpertLedger":
        clone = ExpertLedger(self.n_experts, self.beta, self.prior)
        clone.losses = self.losses.copy()
        return clone


def posterior_weights(ledger: ExpertLedger) -> np.ndarray:
    """Gibbs weights ``w proportional to prior * exp(-beta * losses)``.

    Computed in the log domain with a max shift, so no finite loss vector
    can underflow to an all-zero weight vector.
    """
    logw = np.log(ledger.prior) - ledger.beta * ledger.losses
    logw -= logw.max()
    w = np.exp(logw)
    total = w.sum()
    assert total > 0.0, "max-shifted weights cannot all underflow"
    return w / total


@dataclass(frozen=True)
class RoundRecord:
    t: int
    prediction: Point
    outcome: Point
    forecaster_loss: float
    expert_losses: np.ndarray


@dataclass(frozen=True)
class RegretReport:
    """Game transcript: realized losses, regret and the theoretical bound.

    ``bound_satisfied`` is ``None`` when the loss carries no exp-concavity
    certificate (the bound is reported but not asserted).
    """

    forecaster_losses: np.ndarray
    expert_loss_increments: np.ndarray
    regret: float
    bound: float
    bound_satisfied: bool | None
    prior: np.ndarray
    beta: float

    @property
    def n_rounds(self) -> int:
        return len(self.forecaster_losses)

    @property
    def forecaster_total(self) -> float:
        return float(self.forecaster_losses.sum())

    @property
    def expert_totals(self) -> np.ndarray:
        return self.expert_loss_increments.sum(axis=0)

    def round_log_rows(self):
        """Rows ``t, forecaster_loss, best_expert_loss, regret, bound``."""
        cum_f = np.cumsum(self.forecaster_losses)
        cum_e = np.cumsum(self.expert_loss_increments, axis=0)
        for t in range(self.n_rounds):
            best = float(cum_e[t].min())
            yield (t + 1, float(self.forecaster_losses[t]), best,
                   float(cum_f[t]) - best, self.bound)

    def write_round_log(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("# schema=1\n")
            fh.write("t,forecaster_loss,best_expert_loss,regret,bound\n")
            for row in self.round_log_rows():
                fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def predict(space: Space, ledger: ExpertLedger, advice: Sequence[Point],
            method: str = "auto", config: SolverConfig | None = None) -> Point:
    """Barycenter of the advice under the current posterior weights."""
    if len(advice) != ledger.n_experts:
        raise InvalidInputError(
            f"got {len(advice)} advice points for {ledger.n_experts} experts"
        )
    atoms = WeightedAtoms(tuple(advice), ledger.posterior_weights())
    result = solve_barycenter(space, atoms, config, method)
    if not result.converged:
        raise SolverDidNotConvergeError(
            f"barycenter solver did not converge after {result.iterations} sweeps",
            result=result,
        )
    return result.point


def observe(space: Space, ledger: ExpertLedger, advice: Sequence[Point],
            outcome: Point, loss: LossSpec, prediction: Point) -> RoundRecord:
    """Charge this round's losses to every expert and record the round.

    Call after ``predict`` — the posterior used for the prediction must not
    see the current outcome.
    """
    increments = loss.many(space, list(advice), outcome)
    ledger.update(increments)
    return RoundRecord(
        t=int(round(ledger.losses.sum() * 0)),  # placeholder, overwritten by run_game
        prediction=prediction,
        outcome=outcome,
        forecaster_loss=loss(space, prediction, outcome),
        expert_losses=increments,
    )


def run_game(space: Space, advice, outcomes, loss: LossSpec,
             prior: Sequence[float] | None = None, method: str = "auto",
             config: SolverConfig | None = None,
             n_rounds: int | None = None) -> RegretReport:
    """Play a full prediction game and account the regret.

    ``advice`` is either a list of K points (constant experts) or a
    per-round sequence of such lists.  ``outcomes`` is a sequence of points
    or a callable ``(t, prediction) -> Point`` (an adaptive adversary), in
    which case ``n_rounds`` is required.  The returned report carries the
    bound ``ln(1/prior[best]) / beta`` — ``(ln K)/beta`` for the uniform
    prior — and asserts it only for certified losses.
    """
    constant_advice = len(advice) > 0 and isinstance(advice[0], Point)
    adaptive = callable(outcomes)
    if adaptive:
        if n_rounds is None:
            raise InvalidInputError("adaptive outcomes need n_rounds")
        total = n_rounds
    else:
        total = len(outcomes)
    if total < 1:
        raise InvalidInputError("need at least one round")
    if not constant_advice and len(advice) != total:
        raise InvalidInputError(
            f"advice stream has {len(advice)} rounds but outcomes have {total}"
        )

    k = len(advice) if constant_advice else len(advice[0])
    ledger = ExpertLedger(k, loss.beta, prior)
    loss.enforce_strict(space)

    f_losses = np.zeros(total)
    increments = np.zeros((total, k))
    for t in range(total):
        advice_t = advice if constant_advice else list(advice[t])
        m_hat = predict(space, ledger, advice_t, method, config)
        z = outcomes(t, m_hat) if adaptive else outcomes[t]
        inc = loss.many(space, advice_t, z)
        ledger.update(inc)
        f_losses[t] = loss(space, m_hat, z)
        increments[t] = inc

    totals = increments.sum(axis=0)
    regret = float(f_losses.sum() - totals.min())
    best = int(totals.argmin())
    bound = float(np.log(1.0 / ledger.prior[best]) / loss.beta)
    satisfied = regret <= bound + BOUND_TOL if loss.certified_for(space) else None
    return RegretReport(
        forecaster_losses=f_losses,
        expert_loss_increments=increments,
        regret=regret,
        bound=bound,
        bound_satisfied=satisfied,
        prior=ledger.prior,
        beta=loss.beta,
    )


def kl_divergence(q: np.ndarray, p: np.ndarray) -> float:
    """KL(q || p) with the 0*log(0) = 0 convention; +inf off p's support."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    mask = q > 0
    if np.any(p[mask] == 0):
        return float("inf")
    return float(np.sum(q[mask] * np.log(q[mask] / p[mask])))


def pac_bound(ledger: ExpertLedger, q: Sequence[float]) -> float:
    """Mixture bound ``sum_theta q_theta L_theta + KL(q || prior) / beta``.

    The forecaster's cumulative loss is below this value for every
    probability vector ``q`` whenever the loss is exp-concave at ``beta``.
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (ledger.n_experts,):
        raise InvalidInputError("q length must match the expert count")
    if abs(q.sum() - 1.0) > 1e-9:
        raise InvalidInputError("q must sum to 1")
    kl = kl_divergence(q, ledger.prior)
    if np.isinf(kl):
        return float("inf")
    return float(q @ ledger.losses + kl / ledger.beta)


def greedy_adversary(space: Space, candidates: Sequence[Point], loss: LossSpec):
    """Adaptive outcome stream maximizing the instantaneous forecaster loss.

    Returns a callable ``(t, prediction) -> Point`` picking, each round, the
    candidate outcome the current prediction is worst against.  Any outcome
    sequence is admissible for the regret bound, so this is a legitimate
    stress generator.
    """
    candidates = list(candidates)
    if not candidates:
        raise InvalidInputError("need at least one candidate outcome")

    def outcome(t: int, prediction: Point) -> Point:
        values = loss.many(space, [prediction], None) if False else np.array(
            [loss(space, prediction, z) for z in candidates]
        )
        return candidates[int(values.argmax())]

    if loss.kind in ("squared", "distance"):
        def outcome(t: int, prediction: Point) -> Point:  # noqa: F811
            d = space.distance_many(prediction, candidates)
            return candidates[int(d.argmax())]

    return outcome
