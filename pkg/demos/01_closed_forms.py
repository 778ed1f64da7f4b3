"""Closed-form tour: from link budgets to the best random-access probabilities.

Run: python3 demos/01_closed_forms.py
"""
import numpy as np

from aoimac import (
    AnalyticInputs, LinkBudget, build_matrix, mpr_class, mpr_ratio_sum,
    avg_aoi_closed_form, is_stable, optimal_probabilities, s2_success_prob, service_probability,
)
from aoimac.config import db_to_linear

# %% Success probabilities from the average SNRs (12 dB and 10 dB) and a threshold
for theta_db in (-1.0, 1.0):
    theta = db_to_linear(theta_db)
    m = build_matrix(LinkBudget(db_to_linear(12), theta), LinkBudget(db_to_linear(10), theta))
    print(f"theta={theta_db:+.0f} dB  p11={m.p11:.5f} p112={m.p112:.5f} p22={m.p22:.5f} p212={m.p212:.5f}"
          f"  ratio sum {mpr_ratio_sum(m):.4f} -> {mpr_class(m)} MPR")

strong = build_matrix(LinkBudget(db_to_linear(12), db_to_linear(-1)), LinkBudget(db_to_linear(10), db_to_linear(-1)))

# %% One operating point
x = AnalyticInputs(lam=0.3, delta=0.6, q1=1.0, q2=1.0, matrix=strong)
print("\nservice prob of S1:", round(service_probability(x), 4))
print("stable:", is_stable(x))
print("S2 success prob:", round(s2_success_prob(x), 4))
print("average age of S2:", round(avg_aoi_closed_form(x), 4))

# %% Age vs q2 at fixed q1=1: once q2 passes delta, the attempt rate is capped by energy
print("\nq2    age")
for q2 in np.linspace(0.1, 1.0, 10):
    y = AnalyticInputs(0.3, 0.6, 1.0, float(q2), strong)
    print(f"{q2:.1f}  {avg_aoi_closed_form(y):.4f}")

# %% Optimal probabilities across data load
print("\nlambda  case      q1*  q2*     age")
for lam in (0.1, 0.3, 0.5, 0.7, 0.9):
    opt = optimal_probabilities(lam, 0.9, strong)
    age = avg_aoi_closed_form(AnalyticInputs(lam, 0.9, opt.q1_star, opt.q2_star, strong))
    print(f"{lam:.1f}     {opt.case_id:<9} {opt.q1_star:.0f}    {opt.q2_star:.4f}  {age:.4f}")
