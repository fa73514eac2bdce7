"""
When the mean iterate diverges
==============================

If the right-hand side ``g = E(R_w y)`` is not in the range of the covariance
operator, no minimizer exists in the feature space and the norm of the
expected iterate grows without bound. With ``g`` replaced by ``P u`` for a
fixed ``u`` the expected error shrinks instead.
"""

import argparse

import numpy as np

import online_rkhs as ol

parser = argparse.ArgumentParser(description=__doc__.strip().splitlines()[0])
parser.add_argument("--M", type=int, default=100_000, help="number of steps")
parser.add_argument("--n", type=int, default=10_000, help="retained indices")
args = parser.parse_args()

i = np.arange(1, args.n + 1, dtype=float)
rho = 6 / np.pi ** 2 * i ** -2.0
sched = ol.Schedule(t=2 / 3, A=0.5)
cps = [m for m in (10, 100, 1000, 10_000, 100_000, 1_000_000) if m <= args.M]

# g_i = i^-2 is in the range of P^(1/2) but not of P.
witness = ol.expected_trajectory(rho, i ** -2.0, None, sched, args.M, cps)

# Control: g = P u with u_i = 1/i, reporting ||u - E u_m||^2.
u = 1.0 / i
control = ol.expected_trajectory(rho, rho * u, None, sched, args.M, cps, target=u)

print(f"{'m':>8} {'||E u_m||^2':>14} {'control error':>14}")
for (m, w), (_, c) in zip(witness, control):
    print(f"{m:8d} {w:14.4f} {c:14.4f}")
