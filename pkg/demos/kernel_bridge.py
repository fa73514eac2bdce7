"""
Brownian-bridge kernel, scalar and vector valued
================================================

The kernel ``k(w, t) = min(w, t) (1 - max(w, t))`` on ``[0, 1]`` has
eigenvalues ``(k pi)^-2``. A midpoint-rule discretization recovers them,
and iterating in the eigenbasis gives the same function as the kernel
expansion built from the same samples.
"""

import numpy as np

import online_rkhs as ol

bridge = ol.BrownianBridge(n_quad=2000)
lam = bridge.eigensystem().lambdas[:5]
exact = (np.arange(1, 6) * np.pi) ** -2
print("computed :", np.array2string(lam, precision=6))
print("(k pi)^-2:", np.array2string(exact, precision=6))

# Scalar problem: run both representations on one sample stream.
prob = ol.make_bridge_problem(400, s=1.0, sigma=0.1)
sched = ol.Schedule(A=1 / (2 * prob.Lambda))
steps = 500
dual = ol.run_dual(prob, sched, steps, rng_seed=0).u
omegas, ys = prob.draw_samples(np.random.default_rng(0), steps)
state = ol.IterateState.initial(ol.SpectralVector.zeros(prob.eig.dim))
for w, y in zip(omegas, ys):
    state = ol.online_step(state, ol.Sample(w, y), prob.fmap, sched)

probes = np.linspace(0, 1, 11)
gap = max(abs(ol.eval_feature_adjoint(prob.fmap, w, dual)[0]
              - ol.eval_feature_adjoint(prob.fmap, w, state.u)[0]) for w in probes)
print(f"\nanchors in kernel expansion: {dual.size}, max gap between forms: {gap:.2e}")

# Vector-valued outputs via K(w, t) = k(w, t) T.
T = np.array([[1.0, 0.5], [0.5, 2.0]])
vec = ol.make_bridge_problem(300, s=1.0, sigma=0.1, d=2, T=T)
print(f"\nvector problem: Lambda = {vec.Lambda:.4f}, noise variance = {ol.noise_variance(vec)}")
vsched = ol.theorem1_schedule(1.0, vec.Lambda)
for m, err in ol.run(vec, vsched, 2000, [0, 10, 100, 1000, 2000], rng_seed=1):
    print(f"  m = {m:5d}  squared error = {err:.5f}")
