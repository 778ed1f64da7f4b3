"""Independent reference computations used by the tests.

None of these call into the library's formulas; they rebuild the quantity
from the model definition by brute force.
"""
import math

import numpy as np


def rayleigh_success_mc(beta_i, theta, beta_j, n, rng):
    """Monte Carlo P[SINR >= theta] with Exp(1) power gains."""
    gi = rng.exponential(size=n)
    gj = rng.exponential(size=n) if beta_j > 0 else np.zeros(n)
    return float(np.mean(gi * beta_i >= theta * (gj * beta_j + 1.0)))


def gap_pmf_double_sum(k, delta, q2):
    """Inter-attempt gap pmf written as the literal double sum over the
    battery-empty excursion, term by term, with no series folding."""
    if delta < q2:
        p_full = delta / q2
    else:
        p_full = 1.0
    direct = p_full * (1 - q2) ** (k - 1) * q2
    tail = 0.0
    for l in range(1, k):
        tail += (1 - delta) ** (l - 1) * delta * (1 - q2) ** (k - l - 1) * q2
    return direct + (1 - p_full) * tail


def battery_gap_samples(delta, q2, slots, rng):
    """Gaps between S2 attempts from a literal battery simulation.

    Each slot: attempt with prob q2 if the battery is non-empty, consume
    one unit on attempt, then harvest one unit with prob delta.
    """
    B = 0
    last = None
    gaps = []
    coins = rng.random(slots)
    harvest = rng.random(slots) < delta
    for t in range(slots):
        if B > 0 and coins[t] < q2:
            B -= 1
            if last is not None:
                gaps.append(t - last)
            last = t
        if harvest[t]:
            B += 1
    return np.array(gaps, dtype=float)


def exact_age_full_access(lam, matrix, qmax=600, tol=1e-14):
    """Exact average age of S2 when both nodes attempt whenever they can and
    S2's battery never empties (q1 = q2 = delta = 1).

    Builds the data-queue chain jointly with S2's success events, takes the
    stationary queue law and sums the survival function of the time to the
    next S2 success: E[A] = 1 + sum_k P[no success in k slots].
    """
    n = qmax + 1
    P = np.zeros((n, n))
    F = np.zeros((n, n))  # transitions on which S2 fails
    for q in range(n):
        if q == 0:
            p2 = matrix.p22
            moves = ((0, 1 - lam), (min(1, qmax), lam))
        else:
            p1, p2 = matrix.p112, matrix.p212
            moves = []
            for b1, pb in ((1, p1), (0, 1 - p1)):
                for a1, pa in ((1, lam), (0, 1 - lam)):
                    moves.append((min(q - b1 + a1, qmax), pb * pa))
        for q_next, p in moves:
            P[q, q_next] += p
            F[q, q_next] += p * (1 - p2)
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    pi = np.linalg.solve(A, rhs)
    age, x = 1.0, pi
    for _ in range(100_000):
        x = x @ F
        s = x.sum()
        age += s
        if s < tol:
            break
    return age


def dpp_scores_by_hand(Q, A, H, v, matrix):
    """The four DPP-AoI scores enumerated explicitly, keyed by decision."""
    return {
        (0, 0): 0.0,
        (0, 1): v * matrix.p22 * H * A,
        (1, 0): matrix.p11 * Q,
        (1, 1): matrix.p112 * Q + v * matrix.p212 * H * A,
    }


def binomial_band(p, n, z=3.0):
    half = z * math.sqrt(p * (1 - p) / n)
    return p - half, p + half
