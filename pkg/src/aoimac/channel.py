"""Success probabilities of the two-user multiple access channel.

Both links see i.i.d. Rayleigh block fading, so the received power gain
``|h|^2`` is Exp(1). All inputs are linear-scale; dB conversion is done
by the config layer before anything reaches this module.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import InvalidParameterError

__all__ = [
    "LinkBudget",
    "SuccessMatrix",
    "Decision",
    "IDLE",
    "ONLY_S2",
    "ONLY_S1",
    "BOTH",
    "DECISIONS",
    "solo_success",
    "interfered_success",
    "build_matrix",
    "conditional_probs",
    "mpr_class",
    "STRONG_MPR",
    "WEAK_MPR",
]


class Decision(NamedTuple):
    """Scheduling action ``(u1, u2)``; 1 means the node transmits."""

    u1: int
    u2: int

    @property
    def active(self) -> int:
        return self.u1 + self.u2


IDLE = Decision(0, 0)
ONLY_S2 = Decision(0, 1)
ONLY_S1 = Decision(1, 0)
BOTH = Decision(1, 1)

# Tie-break order: fewer active transmitters first, then lexical.
DECISIONS: tuple[Decision, ...] = (IDLE, ONLY_S2, ONLY_S1, BOTH)


def _check_prob(name: str, value: float) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0):
        raise InvalidParameterError(f"{name} must be a probability in [0, 1], got {value!r}")
    return value


@dataclass(frozen=True)
class LinkBudget:
    """Normalised large-scale gain ``beta`` and decoding threshold ``theta`` (linear)."""

    beta: float
    theta: float

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise InvalidParameterError(f"beta must be positive and finite, got {self.beta!r}")
        if not (math.isfinite(self.theta) and self.theta >= 0):
            raise InvalidParameterError(f"theta must be non-negative and finite, got {self.theta!r}")


@dataclass(frozen=True)
class SuccessMatrix:
    """The four conditional success probabilities.

    ``p11``: S1 alone, ``p112``: S1 while S2 also transmits,
    ``p22``: S2 alone, ``p212``: S2 while S1 also transmits.
    """

    p11: float
    p112: float
    p22: float
    p212: float

    def __post_init__(self):
        for name in ("p11", "p112", "p22", "p212"):
            _check_prob(name, getattr(self, name))
        if self.p112 > self.p11:
            raise InvalidParameterError("p112 must not exceed p11 (interference never helps)")
        if self.p212 > self.p22:
            raise InvalidParameterError("p212 must not exceed p22 (interference never helps)")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p11, self.p112, self.p22, self.p212)


def solo_success(link: LinkBudget) -> float:
    """P{SNR >= theta} = exp(-theta / beta)."""
    return math.exp(-link.theta / link.beta)


def interfered_success(link: LinkBudget, beta_j: float) -> float:
    """P{SINR >= theta} when the other node, with gain ``beta_j``, interferes."""
    beta_j = float(beta_j)
    if not (math.isfinite(beta_j) and beta_j >= 0):
        raise InvalidParameterError(f"interferer gain must be non-negative and finite, got {beta_j!r}")
    return solo_success(link) / (1.0 + link.theta * beta_j / link.beta)


def build_matrix(link1: LinkBudget, link2: LinkBudget) -> SuccessMatrix:
    return SuccessMatrix(
        p11=solo_success(link1),
        p112=interfered_success(link1, link2.beta),
        p22=solo_success(link2),
        p212=interfered_success(link2, link1.beta),
    )


def conditional_probs(matrix: SuccessMatrix, decision: Decision) -> tuple[float, float]:
    """Per-node success probabilities ``(p1, p2)`` under ``decision``."""
    u1, u2 = decision
    if u1 and u2:
        return matrix.p112, matrix.p212
    if u1:
        return matrix.p11, 0.0
    if u2:
        return 0.0, matrix.p22
    return 0.0, 0.0


def mpr_ratio_sum(matrix: SuccessMatrix) -> float:
    if matrix.p11 <= 0 or matrix.p22 <= 0:
        raise InvalidParameterError("MPR class needs p11 > 0 and p22 > 0")
    return matrix.p112 / matrix.p11 + matrix.p212 / matrix.p22


def mpr_class(matrix: SuccessMatrix) -> str:
    """``"weak"`` if the interference ratio sum is below 1, else ``"strong"``.

    A sum of exactly 1 is classified strong.
    """
    return "weak" if mpr_ratio_sum(matrix) < 1.0 else "strong"


# Rounded reference matrices (gains 12 dB / 10 dB,
# threshold -1 dB for strong and 1 dB for weak).
STRONG_MPR = SuccessMatrix(p11=0.95, p112=0.63, p22=0.924, p212=0.41)
WEAK_MPR = SuccessMatrix(p11=0.924, p112=0.515, p22=0.882, p212=0.3)
