"""
Exact expectations for coefficient sampling
===========================================

When samples are noisy coefficients of an orthonormal system, the first and
second moments of every error coefficient obey a closed recursion. This
script checks a simulation against it and then uses the recursion alone to
read off decay rates in weaker norms, which would need far too many
trials to see by sampling.
"""

import numpy as np

import online_rkhs as ol

# Small problem: the simulation and the recursion should agree within a few
# standard errors at every checkpoint.
problem = ol.make_cons_problem(2.0, 20, 1.0, sigma=0.5)
sched = ol.Schedule(t=2 / 3, A=0.5)
cps = ol.geometric_checkpoints(1000)
res = ol.monte_carlo_error(problem, sched, 1000, trials=1000, checkpoints=cps)
oracle = dict(ol.cons_oracle_curve(problem.cons_spec(), sched, cps))

print(f"{'m':>5} {'simulated':>11} {'exact':>11} {'z':>6}")
for m, mean, se in res.records:
    z = (mean - oracle[m]) / se if se > 0 else 0.0
    print(f"{m:5d} {mean:11.6f} {oracle[m]:11.6f} {z:6.2f}")

# Rates in the weighted norms of order sbar <= 0. The step exponent t is
# chosen per (s, sbar) pair.
big = {s: ol.make_cons_problem(2.0, 2000, s, sigma=0.3) for s in (0.5, 1.0)}
cps = sorted(set(np.geomspace(100, 1e5, 40).round().astype(int)))
print(f"\n{'s':>4} {'sbar':>5} {'t':>7} {'slope':>8} {'envelope':>11}")
for s, sbar in ((1.0, 0.0), (1.0, -1.0), (0.5, 0.0)):
    t = ol.theorem2_t(s, sbar)
    curve = ol.cons_oracle_curve(big[s].cons_spec(), ol.Schedule(t=t, A=0.5), cps, sbar)
    slope = ol.fit_rate(curve, (100, 100_000)).slope
    print(f"{s:4g} {sbar:5g} {t:7.4f} {slope:8.4f} {-ol.theorem2_rate(s, sbar):11.4f}")
