"""Probabilistic random access: each node flips its own coin every slot."""
from __future__ import annotations

from dataclasses import dataclass

from .channel import Decision
from .errors import InvalidParameterError

__all__ = ["PraParams", "pra_decide", "PraPolicy"]


@dataclass(frozen=True)
class PraParams:
    q1: float
    q2: float

    def __post_init__(self):
        for name in ("q1", "q2"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise InvalidParameterError(f"{name} must lie in [0, 1], got {value!r}")


def pra_decide(state, params: PraParams, rng) -> Decision:
    # Always two draws per slot so the policy stream stays aligned.
    c1, c2 = rng.random(2)
    u1 = 1 if (state.Q > 0 and c1 < params.q1) else 0
    u2 = 1 if (state.B > 0 and c2 < params.q2) else 0
    return Decision(u1, u2)


class PraPolicy:
    name = "PRA"

    def __init__(self, q1: float, q2: float):
        self.params = PraParams(q1, q2)

    def __repr__(self):
        return f"PraPolicy(q1={self.params.q1}, q2={self.params.q2})"

    def reset(self):
        pass

    def decide(self, state, rng) -> Decision:
        return pra_decide(state, self.params, rng)

    def observe(self, state, events):
        pass

    def kernel_params(self):
        return (0, self.params.q1, self.params.q2, 0.0, 0.0)
