"""Slot-by-slot simulation of the data queue, battery and age processes.

Randomness
----------
One root seed is expanded with ``numpy.random.SeedSequence(seed).spawn(4)``
into four PCG64 generators, in this order:

========  =========================================  ==================
stream    use                                        draws per slot
========  =========================================  ==================
data      S1 packet arrival, ``u < lambda``          1
energy    S2 energy arrival, ``u < delta``           1
policy    PRA coins ``(u1, u2)``                     2 (PRA only)
success   reception of S1 and S2                     2
========  =========================================  ==================

Every draw is a uniform double in [0, 1) and an event with probability
``p`` happens iff ``u < p``. In fading mode the two success uniforms are
turned into Exp(1) power gains with ``-log1p(-u)``. Because draw counts
per slot are fixed, the compiled kernel can pull the streams in blocks and
still reproduce the slot-by-slot reference path bit for bit.

Within a slot: observe state, decide, coerce infeasible attempts, draw
receptions, record metrics for the slot, then depart-then-arrive updates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .channel import DECISIONS, Decision, LinkBudget, SuccessMatrix, conditional_probs
from .errors import InvalidConfigError

__all__ = [
    "SimConfig",
    "NetworkState",
    "SlotEvents",
    "Metrics",
    "Streams",
    "INITIAL_STATE",
    "UNSTABLE_SLOPE",
    "aoi_update",
    "coerce",
    "step",
    "run",
    "run_reference",
    "trace",
    "settling_time",
]

UNSTABLE_SLOPE = 1e-3  # packets/slot, least-squares slope of Q over the second half

KIND_PRA = 0
KIND_DPP_AOI = 1
KIND_DPP_PAOI = 2

_CHUNK = 1 << 16


@dataclass(frozen=True)
class SimConfig:
    lam: float
    delta: float
    horizon: int
    burn_in: int = 0
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.lam <= 1.0):
            raise InvalidConfigError(f"lambda must lie in [0, 1], got {self.lam!r}")
        if not (0.0 <= self.delta <= 1.0):
            raise InvalidConfigError(f"delta must lie in [0, 1], got {self.delta!r}")
        if int(self.horizon) != self.horizon or self.horizon <= 0:
            raise InvalidConfigError(f"horizon must be a positive integer, got {self.horizon!r}")
        if int(self.burn_in) != self.burn_in or not (0 <= self.burn_in < self.horizon):
            raise InvalidConfigError(f"burn_in must satisfy 0 <= burn_in < horizon, got {self.burn_in!r}")
        if int(self.seed) != self.seed or not (0 <= self.seed < 2**64):
            raise InvalidConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")


@dataclass(frozen=True)
class NetworkState:
    t: int = 0
    Q: int = 0
    B: int = 0
    A: int = 1

    @property
    def H(self) -> int:
        return 1 if self.B > 0 else 0


INITIAL_STATE = NetworkState()


@dataclass(frozen=True)
class SlotEvents:
    a1: int
    a2: int
    u1: int
    u2: int
    b1: int
    b2: int
    Ts: int


@dataclass(frozen=True)
class Metrics:
    """Time averages over the measured slots ``[burn_in, horizon)``."""

    avg_aoi: float
    avg_paoi: float
    peak_count: int
    throughput1: float
    throughput2: float
    avg_q: float
    decision_fractions: tuple  # aligned with channel.DECISIONS: (0,0), (0,1), (1,0), (1,1)
    unstable: bool
    q_slope: float
    slots: int
    final_state: NetworkState
    final_z: float = 0.0
    checkpoints: np.ndarray | None = field(default=None, compare=False, repr=False)

    def fraction(self, decision) -> float:
        return self.decision_fractions[DECISIONS.index(Decision(*decision))]

    @property
    def peak_rate(self) -> float:
        """Sum of peak ages per measured slot; tends to 1 for bounded-age policies."""
        return self.avg_paoi * self.peak_count / self.slots if self.peak_count else 0.0


class Streams:
    """The four named uniform substreams derived from one root seed."""

    names = ("data", "energy", "policy", "success")

    def __init__(self, seed: int):
        children = np.random.SeedSequence(int(seed)).spawn(4)
        self.data, self.energy, self.policy, self.success = (
            np.random.Generator(np.random.PCG64(s)) for s in children
        )


def aoi_update(A: int, Ts: int) -> int:
    return 1 if Ts else A + 1


def coerce(state: NetworkState, decision) -> Decision:
    """Drop attempts that the state cannot support (empty queue or battery)."""
    u1, u2 = decision
    return Decision(int(bool(u1) and state.Q > 0), int(bool(u2) and state.B > 0))


def _receptions(decision: Decision, matrix: SuccessMatrix, draws, fading) -> tuple[int, int]:
    if fading is None:
        p1, p2 = conditional_probs(matrix, decision)
        return int(draws[0] < p1), int(draws[1] < p2)
    link1, link2 = fading
    g1 = -math.log1p(-draws[0])
    g2 = -math.log1p(-draws[1])
    u1, u2 = decision
    b1 = b2 = 0
    if u1 and u2:
        b1 = int(g1 * link1.beta >= link1.theta * (g2 * link2.beta + 1.0))
        b2 = int(g2 * link2.beta >= link2.theta * (g1 * link1.beta + 1.0))
    elif u1:
        b1 = int(g1 * link1.beta >= link1.theta)
    elif u2:
        b2 = int(g2 * link2.beta >= link2.theta)
    return b1, b2


def step(state: NetworkState, decision, matrix: SuccessMatrix, streams: Streams,
         lam: float, delta: float, fading=None) -> tuple[NetworkState, SlotEvents]:
    """Advance one slot.

    ``fading``, if given, is a ``(LinkBudget, LinkBudget)`` pair and replaces
    the independent-Bernoulli reception model by per-slot SINR thresholding.
    """
    u1, u2 = coerce(state, decision)
    b1, b2 = _receptions(Decision(u1, u2), matrix, streams.success.random(2), fading)
    a1 = int(streams.data.random() < lam)
    a2 = int(streams.energy.random() < delta)
    Ts = state.H * b2 * u2
    new = NetworkState(
        t=state.t + 1,
        Q=max(state.Q - b1, 0) + a1,
        B=max(state.B - u2, 0) + a2,
        A=aoi_update(state.A, Ts),
    )
    return new, SlotEvents(a1=a1, a2=a2, u1=u1, u2=u2, b1=b1, b2=b2, Ts=Ts)


# --------------------------------------------------------------------------
# accumulators shared layout
#   acc (int64): n, sumA, sumQ, peaks, sum_peakA, n_b1, n_Ts, c00, c01, c10, c11, n_ckpt
#   lsq (float64): n, sum t, sum Q, sum tQ, sum tt  (t centred on the second-half midpoint)

def _new_acc():
    return np.zeros(12, dtype=np.int64), np.zeros(5, dtype=np.float64)


def _finalize(acc, lsq, state: NetworkState, z: float, checkpoints) -> Metrics:
    n = int(acc[0])
    peaks = int(acc[3])
    nl = lsq[0]
    denom = nl * lsq[4] - lsq[1] * lsq[1]
    slope = (nl * lsq[3] - lsq[1] * lsq[2]) / denom if denom > 0 else 0.0
    return Metrics(
        avg_aoi=acc[1] / n,
        avg_paoi=acc[4] / peaks if peaks else math.nan,
        peak_count=peaks,
        throughput1=acc[5] / n,
        throughput2=acc[6] / n,
        avg_q=acc[2] / n,
        decision_fractions=tuple(float(c) / n for c in acc[7:11]),
        unstable=bool(slope > UNSTABLE_SLOPE),
        q_slope=float(slope),
        slots=n,
        final_state=state,
        final_z=float(z),
        checkpoints=checkpoints,
    )


@njit(cache=True)
def _kernel(n, kind, lam, delta, p11, p112, p22, p212, q1, q2, v, amax,
            fading, beta1, theta1, beta2, theta2,
            ud, ue, up, us, st, zf, acc, lsq,
            burn_in, half_start, mid, ckpt_every, ckpt):
    t = st[0]
    Q = st[1]
    B = st[2]
    A = st[3]
    Z = zf[0]
    for i in range(n):
        H = 1 if B > 0 else 0
        if kind == 0:
            u1 = 1 if (Q > 0 and up[i, 0] < q1) else 0
            u2 = 1 if (B > 0 and up[i, 1] < q2) else 0
        else:
            if kind == 1:
                s01 = v * p22 * H * A
                s10 = p11 * Q
                s11 = p112 * Q + v * p212 * H * A
            else:
                s01 = Z * H * p22
                s10 = Q * p11
                s11 = Z * H * p212 + Q * p112
            best = 0.0
            u1 = 0
            u2 = 0
            if s01 > best:
                best = s01
                u1 = 0
                u2 = 1
            if s10 > best:
                best = s10
                u1 = 1
                u2 = 0
            if s11 > best:
                best = s11
                u1 = 1
                u2 = 1
            if Q == 0:
                u1 = 0
            if B == 0:
                u2 = 0

        b1 = 0
        b2 = 0
        if fading:
            g1 = -math.log1p(-us[i, 0])
            g2 = -math.log1p(-us[i, 1])
            if u1 == 1 and u2 == 1:
                b1 = 1 if g1 * beta1 >= theta1 * (g2 * beta2 + 1.0) else 0
                b2 = 1 if g2 * beta2 >= theta2 * (g1 * beta1 + 1.0) else 0
            elif u1 == 1:
                b1 = 1 if g1 * beta1 >= theta1 else 0
            elif u2 == 1:
                b2 = 1 if g2 * beta2 >= theta2 else 0
        else:
            if u1 == 1 and u2 == 1:
                p1 = p112
                p2 = p212
            elif u1 == 1:
                p1 = p11
                p2 = 0.0
            elif u2 == 1:
                p1 = 0.0
                p2 = p22
            else:
                p1 = 0.0
                p2 = 0.0
            b1 = 1 if us[i, 0] < p1 else 0
            b2 = 1 if us[i, 1] < p2 else 0
        a1 = 1 if ud[i] < lam else 0
        a2 = 1 if ue[i] < delta else 0
        Ts = H * b2 * u2

        if t >= burn_in:
            acc[0] += 1
            acc[1] += A
            acc[2] += Q
            if Ts == 1:
                acc[3] += 1
                acc[4] += A
            acc[5] += b1
            acc[6] += Ts
            acc[7 + 2 * u1 + u2] += 1
            if ckpt_every > 0 and acc[0] % ckpt_every == 0:
                k = acc[11]
                ckpt[k, 0] = t + 1
                ckpt[k, 1] = acc[1] / acc[0]
                acc[11] = k + 1
        if t >= half_start:
            tc = float(t - mid)
            qf = float(Q)
            lsq[0] += 1.0
            lsq[1] += tc
            lsq[2] += qf
            lsq[3] += tc * qf
            lsq[4] += tc * tc

        if kind == 2:
            alpha = amax if Z <= v else 0.0
            Z = max(Z + alpha - H * b2, 0.0)
        Q = max(Q - b1, 0) + a1
        B = max(B - u2, 0) + a2
        A = 1 if Ts == 1 else A + 1
        t += 1
    st[0] = t
    st[1] = Q
    st[2] = B
    st[3] = A
    zf[0] = Z


def _kernel_params(policy):
    getter = getattr(policy, "kernel_params", None)
    return None if getter is None else getter()


def run(config: SimConfig, policy, matrix: SuccessMatrix, *, fading=None,
        checkpoint_every: int = 0) -> Metrics:
    """Simulate ``config.horizon`` slots from the empty initial state.

    Built-in policies (PRA and both DPP variants) run in a compiled kernel;
    any other object with ``reset``/``decide``/``observe`` goes through
    :func:`run_reference`. ``checkpoint_every > 0`` records the running
    average age every that many measured slots (``Metrics.checkpoints``,
    columns: slot count, running average).
    """
    params = _kernel_params(policy)
    if params is not None and getattr(policy, "matrix", matrix) != matrix:
        # the kernel scores with the channel's own matrix; a scheduler planning
        # with a different one has to take the slow path
        params = None
    if params is None:
        return run_reference(config, policy, matrix, fading=fading, checkpoint_every=checkpoint_every)
    kind, q1, q2, v, amax = params

    streams = Streams(config.seed)
    st = np.array([0, 0, 0, 1], dtype=np.int64)
    zf = np.zeros(1)
    acc, lsq = _new_acc()
    half_start = config.horizon // 2
    mid = (half_start + config.horizon - 1) / 2.0
    n_ckpt = config.horizon // checkpoint_every + 1 if checkpoint_every > 0 else 1
    ckpt = np.zeros((n_ckpt, 2))
    if fading is None:
        fad, l1, l2 = False, LinkBudget(1.0, 0.0), LinkBudget(1.0, 0.0)
    else:
        fad, (l1, l2) = True, fading
    no_policy_draws = np.empty((0, 2))

    left = config.horizon
    while left > 0:
        n = min(_CHUNK, left)
        ud = streams.data.random(n)
        ue = streams.energy.random(n)
        up = streams.policy.random((n, 2)) if kind == KIND_PRA else no_policy_draws
        us = streams.success.random((n, 2))
        _kernel(n, kind, config.lam, config.delta, matrix.p11, matrix.p112, matrix.p22, matrix.p212,
                q1, q2, v, amax, fad, l1.beta, l1.theta, l2.beta, l2.theta,
                ud, ue, up, us, st, zf, acc, lsq,
                config.burn_in, half_start, mid, checkpoint_every, ckpt)
        left -= n

    final = NetworkState(t=int(st[0]), Q=int(st[1]), B=int(st[2]), A=int(st[3]))
    checkpoints = ckpt[: acc[11]].copy() if checkpoint_every > 0 else None
    return _finalize(acc, lsq, final, zf[0], checkpoints)


def run_reference(config: SimConfig, policy, matrix: SuccessMatrix, *, fading=None,
                  checkpoint_every: int = 0) -> Metrics:
    """Pure-Python slot loop built on :func:`step`. Slow; used for
    cross-checking the kernel and for user-defined policies."""
    streams = Streams(config.seed)
    policy.reset()
    state = INITIAL_STATE
    acc, lsq = _new_acc()
    half_start = config.horizon // 2
    mid = (half_start + config.horizon - 1) / 2.0
    ckpt = []
    for _ in range(config.horizon):
        decision = policy.decide(state, streams.policy)
        new, ev = step(state, decision, matrix, streams, config.lam, config.delta, fading)
        t = state.t
        if t >= config.burn_in:
            acc[0] += 1
            acc[1] += state.A
            acc[2] += state.Q
            if ev.Ts:
                acc[3] += 1
                acc[4] += state.A
            acc[5] += ev.b1
            acc[6] += ev.Ts
            acc[7 + 2 * ev.u1 + ev.u2] += 1
            if checkpoint_every > 0 and acc[0] % checkpoint_every == 0:
                ckpt.append((t + 1, acc[1] / acc[0]))
        if t >= half_start:
            tc = float(t - mid)
            qf = float(state.Q)
            lsq[0] += 1.0
            lsq[1] += tc
            lsq[2] += qf
            lsq[3] += tc * qf
            lsq[4] += tc * tc
        policy.observe(state, ev)
        state = new
    checkpoints = np.array(ckpt, dtype=float).reshape(-1, 2) if checkpoint_every > 0 else None
    return _finalize(acc, lsq, state, getattr(policy, "z", 0.0), checkpoints)


def trace(config: SimConfig, policy, matrix: SuccessMatrix, *, fading=None) -> dict:
    """Per-slot record of the reference path, for sample-path checks.

    Returns arrays keyed ``t, Q, B, A, u1, u2, b1, b2, a1, a2, Ts`` (state
    values at slot start) plus ``final`` (the state after the last slot).
    """
    streams = Streams(config.seed)
    policy.reset()
    state = INITIAL_STATE
    keys = ("t", "Q", "B", "A", "u1", "u2", "b1", "b2", "a1", "a2", "Ts")
    out = {k: np.zeros(config.horizon, dtype=np.int64) for k in keys}
    for i in range(config.horizon):
        decision = policy.decide(state, streams.policy)
        new, ev = step(state, decision, matrix, streams, config.lam, config.delta, fading)
        for k in ("t", "Q", "B", "A"):
            out[k][i] = getattr(state, k)
        for k in ("u1", "u2", "b1", "b2", "a1", "a2", "Ts"):
            out[k][i] = getattr(ev, k)
        policy.observe(state, ev)
        state = new
    out["final"] = state
    return out


def settling_time(checkpoints: np.ndarray, rel_tol: float = 0.05) -> int:
    """First recorded slot after which the running average stays within
    ``rel_tol`` of its terminal value."""
    t = checkpoints[:, 0]
    y = checkpoints[:, 1]
    outside = np.abs(y - y[-1]) > rel_tol * abs(y[-1])
    if not outside.any():
        return int(t[0])
    last = int(np.nonzero(outside)[0][-1])
    return int(t[min(last + 1, len(t) - 1)])
