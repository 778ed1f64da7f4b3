"""Optimised random access against the drift-plus-penalty schedulers.

Sweeps the data load at delta = 0.6 for both channel regimes and prints
simulated average age, peak age and how the DPP scheduler splits the slots.

Run: python3 demos/02_random_access_vs_scheduling.py
"""
from aoimac import (
    STRONG_MPR, WEAK_MPR, AnalyticInputs, DppAoiPolicy, DppPaoiPolicy, PraPolicy, SimConfig,
    avg_aoi_closed_form, optimal_probabilities, run,
)

HORIZON = 300_000
DELTA = 0.6

for label, matrix in (("strong", STRONG_MPR), ("weak", WEAK_MPR)):
    print(f"\n{label} MPR, delta={DELTA}")
    print("lambda  PRA-opt(closed)  PRA-opt(sim)  DPP-AoI  DPP-PAoI(peak)  idle    S1 only  S2 only  both")
    for lam in (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7):
        cfg = SimConfig(lam, DELTA, HORIZON, seed=1)
        opt = optimal_probabilities(lam, DELTA, matrix)
        closed = avg_aoi_closed_form(AnalyticInputs(lam, DELTA, opt.q1_star, opt.q2_star, matrix))
        pra = run(cfg, PraPolicy(opt.q1_star, opt.q2_star), matrix)
        dpp = run(cfg, DppAoiPolicy(matrix), matrix)
        dpp_peak = run(cfg, DppPaoiPolicy(matrix), matrix)
        f00, f01, f10, f11 = dpp.decision_fractions
        print(f"{lam:.1f}     {closed:15.4f}  {pra.avg_aoi:12.4f}  {dpp.avg_aoi:7.4f}  {dpp_peak.avg_paoi:14.4f}"
              f"  {f00:.4f}  {f10:.4f}   {f01:.4f}   {f11:.4f}")

# Under weak MPR the two nodes never share a slot: a joint attempt can never
# beat the better single attempt when p112/p11 + p212/p22 < 1.
