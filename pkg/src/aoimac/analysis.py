"""Closed-form results for the probabilistic random access (PRA) policy.

Notation: ``m = min(delta, q2)`` is the long-run rate of S2 transmission
attempts. For ``delta < q2`` the battery is a stable chain that is
non-empty with probability ``delta / q2``; otherwise it drifts upward and
S2 behaves as if grid powered.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import SuccessMatrix
from .errors import (
    DegenerateInputError,
    InfeasibleProblemError,
    InvalidParameterError,
    StabilityError,
    UnsupportedRegimeError,
)

__all__ = [
    "AnalyticInputs",
    "RenewalMoments",
    "OptimalProbabilities",
    "attempt_rate",
    "service_probability",
    "stability_threshold",
    "is_stable",
    "prob_queue_nonempty",
    "s2_success_prob",
    "renewal_moments",
    "pmf_T",
    "avg_aoi_closed_form",
    "avg_aoi_moment_path",
    "avg_paoi_closed_form",
    "optimal_probabilities",
    "grid_search_optimum",
    "DEFAULT_XI",
]

DEFAULT_XI = 0.001


@dataclass(frozen=True)
class AnalyticInputs:
    lam: float
    delta: float
    q1: float
    q2: float
    matrix: SuccessMatrix

    def __post_init__(self):
        for name in ("lam", "delta", "q1", "q2"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise InvalidParameterError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class RenewalMoments:
    """Moments of the inter-attempt time T and the inter-delivery time X."""

    e_t: float
    e_t2: float
    e_x: float
    e_x2: float


@dataclass(frozen=True)
class OptimalProbabilities:
    q1_star: float
    q2_star: float
    case_id: str  # "OpenSet" or "Boundary"
    xi: float


def attempt_rate(inp: AnalyticInputs) -> float:
    return min(inp.delta, inp.q2)


def _effective_solo_rate(inp: AnalyticInputs) -> float:
    # p11 - m (p11 - p112): S1 success probability per attempt, averaged over S2 activity
    m = attempt_rate(inp)
    mat = inp.matrix
    return mat.p11 - m * (mat.p11 - mat.p112)


def service_probability(inp: AnalyticInputs) -> float:
    m = attempt_rate(inp)
    mat = inp.matrix
    return inp.q1 * mat.p11 * (1.0 - m) + inp.q1 * mat.p112 * m


def stability_threshold(inp: AnalyticInputs) -> float:
    """Smallest ``q1`` (exclusive) that keeps the S1 queue stable; may exceed 1."""
    denom = _effective_solo_rate(inp)
    if inp.lam == 0.0:
        return 0.0
    if denom <= 0.0:
        return math.inf
    return inp.lam / denom


def is_stable(inp: AnalyticInputs) -> bool:
    # With no arrivals the queue never leaves zero, whatever q1 is.
    if inp.lam == 0.0:
        return True
    if inp.lam >= inp.matrix.p11:
        return False
    return inp.q1 > stability_threshold(inp)


def _require_stable(inp: AnalyticInputs) -> None:
    if not is_stable(inp):
        raise StabilityError(
            f"S1 queue is unstable: lambda={inp.lam}, service probability={service_probability(inp):.6g}"
        )


def prob_queue_nonempty(inp: AnalyticInputs) -> float:
    _require_stable(inp)
    if inp.lam == 0.0:
        return 0.0
    return inp.lam / service_probability(inp)


def s2_success_prob(inp: AnalyticInputs) -> float:
    """Average success probability of an S2 attempt (interference from S1 averaged out)."""
    _require_stable(inp)
    mat = inp.matrix
    return mat.p22 - (mat.p22 - mat.p212) * inp.lam / _effective_solo_rate(inp)


def _require_attempts(inp: AnalyticInputs) -> float:
    m = attempt_rate(inp)
    if m <= 0.0:
        raise DegenerateInputError("min(delta, q2) = 0: S2 never transmits and its age is unbounded")
    return m


def renewal_moments(inp: AnalyticInputs) -> RenewalMoments:
    m = _require_attempts(inp)
    p2 = s2_success_prob(inp)
    if p2 <= 0.0:
        raise DegenerateInputError("S2 success probability is zero")
    e_t = 1.0 / m
    e_t2 = (2.0 - m) / (m * m)
    e_x = e_t / p2
    e_x2 = e_t2 / p2 + e_t * e_t * 2.0 * (1.0 - p2) / (p2 * p2)
    return RenewalMoments(e_t=e_t, e_t2=e_t2, e_x=e_x, e_x2=e_x2)


def pmf_T(k, delta: float, q2: float):
    """P[T = k] for the gap between consecutive S2 attempts.

    Defined for the two regimes that admit a stationary description:
    ``delta <= q2`` (battery chain is positive recurrent or critical) and
    ``delta == 1`` (battery never empties). ``k`` may be an array.
    """
    if not (0.0 < q2 <= 1.0 and 0.0 < delta <= 1.0):
        raise InvalidParameterError("pmf_T needs delta, q2 in (0, 1]")
    if delta < q2:
        p_nonempty = delta / q2
    elif delta == q2 or delta == 1.0:
        p_nonempty = 1.0
    else:
        raise UnsupportedRegimeError(f"pmf_T is only derived for delta <= q2 or delta = 1 (got delta={delta}, q2={q2})")

    k = np.asarray(k)
    if np.any(k < 1):
        raise InvalidParameterError("k must be >= 1")
    kf = k.astype(float)
    stay = (1.0 - q2) ** (kf - 1.0)
    out = p_nonempty * stay * q2
    if p_nonempty < 1.0:
        # sum_{l=1}^{k-1} (1-delta)^(l-1) (1-q2)^(k-l-1), summed as a geometric series (q2 > delta here)
        inner = ((1.0 - delta) ** (kf - 1.0) - stay) / (q2 - delta)
        out = out + (1.0 - p_nonempty) * delta * q2 * inner
    if out.ndim == 0:
        return float(out)
    return out


def avg_aoi_closed_form(inp: AnalyticInputs) -> float:
    m = _require_attempts(inp)
    p2 = s2_success_prob(inp)
    if p2 <= 0.0:
        raise DegenerateInputError("S2 success probability is zero")
    return 1.0 / (p2 * m)


def avg_aoi_moment_path(inp: AnalyticInputs) -> float:
    """Same quantity via E[X^2] / (2 E[X]) + 1/2; an independent formula route."""
    mom = renewal_moments(inp)
    return mom.e_x2 / (2.0 * mom.e_x) + 0.5


def avg_paoi_closed_form(inp: AnalyticInputs) -> float:
    """Mean peak age, E[X] = E[T] / p2bar. Equals the average age under PRA."""
    _require_attempts(inp)
    p2 = s2_success_prob(inp)
    if p2 <= 0.0:
        raise DegenerateInputError("S2 success probability is zero")
    return 1.0 / (p2 * attempt_rate(inp))


def optimal_probabilities(lam: float, delta: float, matrix: SuccessMatrix, xi: float = DEFAULT_XI) -> OptimalProbabilities:
    """Transmit probabilities minimising the closed-form average age under PRA.

    In the open-set case every ``q1`` above the stability threshold with
    ``q2 > delta`` is optimal; ``(1, 1)`` is returned as the representative.
    """
    if not (0.0 <= lam <= 1.0 and 0.0 <= delta <= 1.0):
        raise InvalidParameterError("lambda and delta must be probabilities")
    if not (xi > 0.0 and math.isfinite(xi)):
        raise InvalidParameterError(f"xi must be a small positive number, got {xi!r}")
    if lam >= matrix.p11:
        raise InfeasibleProblemError(f"lambda={lam} >= p11={matrix.p11}: no policy stabilises S1")

    gap = matrix.p11 - matrix.p112
    ratio = math.inf if gap == 0.0 else (matrix.p11 - lam) / gap

    if delta < min(ratio, 1.0):
        out = OptimalProbabilities(1.0, 1.0, "OpenSet", xi)
    else:
        q2 = min(ratio, delta) - xi
        if q2 <= 0.0:
            raise DegenerateInputError(f"xi={xi} is not below the q2 boundary {min(ratio, delta):.6g}")
        out = OptimalProbabilities(1.0, q2, "Boundary", xi)

    if not is_stable(AnalyticInputs(lam, delta, out.q1_star, out.q2_star, matrix)):
        raise DegenerateInputError("back-off xi too small to keep the S1 queue strictly stable")
    return out


def grid_search_optimum(lam: float, delta: float, matrix: SuccessMatrix, step: float = 0.01):
    """Brute-force minimum of the closed-form age over a (q1, q2) grid.

    Only stable grid points with ``min(delta, q2) > 0`` are considered.
    Returns ``(q1, q2, value)``; ties resolve to the first point in
    row-major order (q1 ascending, then q2 ascending).
    """
    n = int(round(1.0 / step))
    q = np.round(np.arange(n + 1) * step, 12)
    q1g, q2g = np.meshgrid(q, q, indexing="ij")
    m = np.minimum(delta, q2g)
    gap = matrix.p11 - matrix.p112
    denom = matrix.p11 - m * gap
    with np.errstate(divide="ignore", invalid="ignore"):
        stable = (lam == 0.0) | (q1g * denom > lam)
        p2 = matrix.p22 - (matrix.p22 - matrix.p212) * lam / denom
        value = 1.0 / (p2 * m)
    ok = stable & (m > 0) & (p2 > 0)
    if not ok.any():
        raise InfeasibleProblemError("no stable grid point")
    value = np.where(ok, value, np.inf)
    idx = np.unravel_index(np.argmin(value), value.shape)
    return float(q1g[idx]), float(q2g[idx]), float(value[idx])
