"""Where simulated random-access age departs from the closed form.

The closed form treats S2's successes as independent across attempts. When
S2 attempts often (delta near 1) and S1 has a real load, S2's successes
cluster: they come in runs while S1's queue is empty and in droughts while
it is busy. Age is sensitive to droughts, so the simulated average age
exceeds the formula, while the mean peak age (an average over updates, not
over slots) still matches it.

Run: python3 demos/04_where_the_closed_form_drifts.py
"""
from aoimac import (
    STRONG_MPR, WEAK_MPR, AnalyticInputs, PraPolicy, SimConfig, avg_aoi_closed_form,
    optimal_probabilities, run,
)

print("mpr     delta  lambda  closed   sim age  sim peak  age err")
for label, matrix in (("strong", STRONG_MPR), ("weak", WEAK_MPR)):
    for delta in (0.2, 0.6, 1.0):
        for lam in (0.1, 0.3, 0.5):
            opt = optimal_probabilities(lam, delta, matrix)
            closed = avg_aoi_closed_form(AnalyticInputs(lam, delta, opt.q1_star, opt.q2_star, matrix))
            m = run(SimConfig(lam, delta, 1_000_000, seed=2), PraPolicy(opt.q1_star, opt.q2_star), matrix)
            print(f"{label:<7} {delta:5.1f}  {lam:6.1f}  {closed:7.4f}  {m.avg_aoi:7.4f}  {m.avg_paoi:8.4f}"
                  f"  {m.avg_aoi / closed - 1:+7.2%}")
