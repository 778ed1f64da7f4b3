"""Drift-plus-penalty schedulers for average age and average peak age.

Both schedulers are centralised: every slot they see ``Q``, ``H`` and
either the age ``A`` or the virtual queue ``Z`` and pick the decision with
the largest weighted success score. Ties go to the decision with fewer
active transmitters, then to the order (0,0) < (0,1) < (1,0) < (1,1).
"""
from __future__ import annotations

from dataclasses import dataclass

from .channel import DECISIONS, Decision, SuccessMatrix, conditional_probs
from .errors import InfeasibleProblemError, InvalidParameterError

__all__ = [
    "DEFAULT_V",
    "DEFAULT_ALPHA_MAX",
    "DppAoiParams",
    "DppPaoiParams",
    "DppPaoiState",
    "dpp_aoi_decide",
    "dpp_paoi_decide",
    "alpha_select",
    "virtual_queue_update",
    "backlog_bound",
    "DppAoiPolicy",
    "DppPaoiPolicy",
]

DEFAULT_V = 200.0
DEFAULT_ALPHA_MAX = 1.0


@dataclass(frozen=True)
class DppAoiParams:
    v: float = DEFAULT_V

    def __post_init__(self):
        if not self.v > 0:
            raise InvalidParameterError(f"V must be positive, got {self.v!r}")


@dataclass(frozen=True)
class DppPaoiParams:
    v: float = DEFAULT_V
    alpha_max: float = DEFAULT_ALPHA_MAX

    def __post_init__(self):
        if not self.v > 0:
            raise InvalidParameterError(f"V must be positive, got {self.v!r}")
        if not self.alpha_max > 0:
            raise InvalidParameterError(f"alpha_max must be positive, got {self.alpha_max!r}")


@dataclass
class DppPaoiState:
    z: float = 0.0


def _argmax(scores) -> Decision:
    # DECISIONS is already in tie-break order, so only a strict improvement wins.
    best, choice = 0.0, DECISIONS[0]
    for decision, score in zip(DECISIONS, scores):
        if score > best:
            best, choice = score, decision
    return choice


def dpp_aoi_decide(state, matrix: SuccessMatrix, params: DppAoiParams) -> Decision:
    """Maximise ``p1 Q + V p2 H A`` over the four decisions."""
    Q, H, A, v = state.Q, state.H, state.A, params.v
    scores = []
    for decision in DECISIONS:
        p1, p2 = conditional_probs(matrix, decision)
        scores.append(p1 * Q + v * p2 * H * A)
    return _argmax(scores)


def dpp_paoi_decide(state, z: float, matrix: SuccessMatrix) -> Decision:
    """Maximise ``Z H p2 + Q p1`` over the four decisions."""
    Q, H = state.Q, state.H
    scores = []
    for decision in DECISIONS:
        p1, p2 = conditional_probs(matrix, decision)
        scores.append(z * H * p2 + Q * p1)
    return _argmax(scores)


def alpha_select(z: float, params: DppPaoiParams) -> float:
    return params.alpha_max if z <= params.v else 0.0


def virtual_queue_update(z: float, alpha: float, H: int, b2: int) -> float:
    return max(z + alpha - H * b2, 0.0)


def backlog_bound(mode: str, lam: float, delta: float, matrix: SuccessMatrix,
                  v: float = DEFAULT_V, alpha_max: float = DEFAULT_ALPHA_MAX) -> float:
    """Upper bound ``(C + V) / eps`` on the time-average S1 backlog.

    ``eps`` is taken at its largest admissible value
    ``min(p11 - lambda, delta * p212)``, which gives the tightest bound.
    ``mode`` is ``"AoI"`` or ``"PAoI"``.
    """
    eps = min(matrix.p11 - lam, delta * matrix.p212)
    if eps <= 0.0:
        raise InfeasibleProblemError(
            f"no positive epsilon: p11 - lambda = {matrix.p11 - lam:.6g}, delta * p212 = {delta * matrix.p212:.6g}"
        )
    mode_key = mode.lower()
    if mode_key == "aoi":
        c = (lam**2 + 1.0) / 2.0
    elif mode_key == "paoi":
        c = (alpha_max**2 + lam**2 + 2.0) / 2.0
    else:
        raise InvalidParameterError(f"mode must be 'AoI' or 'PAoI', got {mode!r}")
    return (c + v) / eps


class DppAoiPolicy:
    name = "DPP-AoI"

    def __init__(self, matrix: SuccessMatrix, v: float = DEFAULT_V):
        self.matrix = matrix
        self.params = DppAoiParams(v)

    def __repr__(self):
        return f"DppAoiPolicy(v={self.params.v})"

    def reset(self):
        pass

    def decide(self, state, rng) -> Decision:
        return dpp_aoi_decide(state, self.matrix, self.params)

    def observe(self, state, events):
        pass

    def kernel_params(self):
        return (1, 0.0, 0.0, self.params.v, 0.0)


class DppPaoiPolicy:
    """Peak-age scheduler; carries the virtual queue ``Z`` between slots."""

    name = "DPP-PAoI"

    def __init__(self, matrix: SuccessMatrix, v: float = DEFAULT_V, alpha_max: float = DEFAULT_ALPHA_MAX):
        self.matrix = matrix
        self.params = DppPaoiParams(v, alpha_max)
        self.state = DppPaoiState()

    def __repr__(self):
        return f"DppPaoiPolicy(v={self.params.v}, alpha_max={self.params.alpha_max})"

    @property
    def z(self) -> float:
        return self.state.z

    def reset(self):
        self.state = DppPaoiState()

    def decide(self, state, rng) -> Decision:
        return dpp_paoi_decide(state, self.state.z, self.matrix)

    def observe(self, state, events):
        alpha = alpha_select(self.state.z, self.params)
        self.state.z = virtual_queue_update(self.state.z, alpha, state.H, events.b2)

    def kernel_params(self):
        return (2, 0.0, 0.0, self.params.v, self.params.alpha_max)
