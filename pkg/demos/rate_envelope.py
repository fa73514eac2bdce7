"""
Monte-Carlo error against the rate envelope
===========================================

Learn a boundary-smooth target from noisy coefficient samples and compare
the averaged squared error with the two a-priori envelopes: the generic
``C^2 (m+1)^(-s/(2+s))`` bound and the sharper four-term bound for ``s = 1``.
"""

import numpy as np

import online_rkhs as ol

# A problem with sampling weights rho_i ~ i^-2 on 2000 indices and a target
# that lies in the order-1 smoothness space, but only just.
problem = ol.make_cons_problem(rho_decay=2.0, n=2000, s=1.0, sigma=0.3)
print("Lambda =", problem.Lambda, " noise variance =", ol.noise_variance(problem))

# The rate-optimal schedule for s = 1 is t = 2/3, A = 1/(2 Lambda).
sched = ol.theorem1_schedule(1.0, problem.Lambda)
print(f"schedule: t = {sched.t:.4f}, A = {sched.A}")

N = 10_000
res = ol.monte_carlo_error(problem, sched, N, trials=300)

# Constants entering the envelopes.
C2 = ol.theorem1_constant(problem, None, s=1.0)
u_sq = ol.smoothness_norm_sq(problem.eig, problem.target, 0)
u1_sq = ol.smoothness_norm_sq(problem.eig, problem.target, 1)
sig2 = ol.noise_variance(problem)

print(f"\nC^2 = {C2:.4f}")
print(f"{'m':>6} {'mean':>10} {'stderr':>10} {'refined':>10} {'envelope':>10}")
for m, mean, se in res.records:
    if m == 0:
        continue
    refined = ol.refined_bound_s1(u_sq, u_sq, u1_sq, problem.Lambda, sig2, m)
    print(f"{m:6d} {mean:10.5f} {se:10.2e} {refined:10.5f} {ol.theorem1_bound(C2, 1.0, m):10.5f}")

# The envelope decays like m^(-1/3); the actual error may decay faster for a fixed problem.
fit = ol.fit_rate([(m, v) for m, v, _ in res.records], (100, N))
print(f"\nfitted slope on [100, {N}]: {fit.slope:.3f}  (envelope exponent: -1/3)")
