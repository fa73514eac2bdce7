"""Exact expectations for the coefficient-sampling (CONS) problem.

When ``Omega`` indexes an orthonormal system and ``y = c_{i} + noise``, the
error coefficients ``e_i^{(m)} = (u - u^{(m)}, psi_i)`` obey, per index,

    e_i^{(m+1)} = (1 - alpha_m) c_i + alpha_m (e_i^{(m)} - delta_i mu_m (e_i^{(m)} + noise))

with ``delta_i ~ Bernoulli(rho_i)``. Their first and second moments satisfy
closed linear recursions, evaluated here without sampling.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .engine import schedule_params
from .errors import ConsistencyError, ParameterError

__all__ = [
    "ConsProblemSpec",
    "MomentState",
    "cons_moment_step",
    "weighted_error",
    "cons_oracle_curve",
    "pi_product",
    "s_sum",
    "expected_trajectory",
    "expected_trajectory_closed_form",
    "theorem2_t",
    "theorem2_rate",
    "theorem3_probe",
]

JENSEN_TOL = 1e-10


@dataclass(frozen=True)
class ConsProblemSpec:
    """Sampling weights, target coefficients and noise level.

    ``rho`` is truncated to the retained indices; ``tail_mass`` is the
    probability of the dropped ones.
    """

    rho: np.ndarray
    c: np.ndarray
    sigma: float = 0.0
    tail_mass: float = 0.0

    def __post_init__(self):
        rho = np.array(self.rho, dtype=np.float64).ravel()
        c = np.array(self.c, dtype=np.float64).ravel()
        if rho.shape != c.shape:
            raise ParameterError("rho and c must have the same length")
        if np.any(rho <= 0) or np.any(np.diff(rho) > 0):
            raise ParameterError("rho must be positive and non-increasing")
        if abs(rho.sum() + self.tail_mass - 1.0) > 1e-12:
            raise ParameterError(f"rho sums to {rho.sum()} with tail {self.tail_mass}, not 1")
        if self.sigma < 0:
            raise ParameterError("sigma must be >= 0")
        rho.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "c", c)

    @property
    def n(self):
        return self.rho.size

    def initial_state(self):
        return MomentState(self.c ** 2, self.c.copy(), 0)


@dataclass
class MomentState:
    """Second moments ``eps`` and first moments ``eps_bar`` of the error coefficients."""

    eps: np.ndarray
    eps_bar: np.ndarray
    m: int = 0


def _check_jensen(state):
    gap = state.eps - state.eps_bar ** 2
    worst = float(np.min(gap / np.maximum(1.0, state.eps))) if gap.size else 0.0
    if worst < -JENSEN_TOL:
        raise ConsistencyError(f"second moment below squared mean by {-worst:.3e} at m={state.m}")


def _moment_update(rho, c, c2, sigma2, eps, eps_bar, alpha, mu):
    abar = 1.0 - alpha
    rmu = rho * mu
    new_eps = (
        alpha ** 2 * (1.0 - rmu * (2.0 - mu)) * eps
        + 2.0 * alpha * abar * (1.0 - rmu) * c * eps_bar
        + abar ** 2 * c2
        + alpha ** 2 * mu ** 2 * sigma2 * rho
    )
    new_bar = alpha * (1.0 - rmu) * eps_bar + abar * c
    return new_eps, new_bar


def cons_moment_step(spec, state, sched):
    """Advance both moment recursions by one step."""
    alpha, mu = schedule_params(sched, state.m)
    if mu * spec.rho[0] > 1.0:
        raise ParameterError(f"mu_m rho_1 = {mu * spec.rho[0]} exceeds 1")
    eps, bar = _moment_update(spec.rho, spec.c, spec.c ** 2, spec.sigma ** 2,
                              state.eps, state.eps_bar, alpha, mu)
    new = MomentState(eps, bar, state.m + 1)
    _check_jensen(new)
    return new


def weighted_error(spec, state, sbar):
    """Expected squared error in the smoothness norm of order ``sbar``."""
    if not (-1.0 <= sbar <= 0.0):
        warnings.warn(f"sbar={sbar} outside [-1, 0]", stacklevel=2)
    if sbar == 0:
        return float(np.sum(state.eps))
    return float(np.sum(spec.rho ** (-sbar) * state.eps))


def cons_oracle_curve(spec, sched, checkpoints, sbar=0.0):
    """Exact ``E||e^{(m)}||^2`` in the order-``sbar`` norm at each checkpoint.

    Runs the moment recursion up to the largest checkpoint; Jensen's
    inequality is verified at every checkpoint.
    """
    cps = sorted(int(m) for m in checkpoints)
    if cps and cps[0] < 0:
        raise ParameterError("checkpoints must be >= 0")
    rho, c = spec.rho, spec.c
    c2, sigma2 = c ** 2, spec.sigma ** 2
    weights = rho ** (-sbar)
    state = spec.initial_state()
    eps, bar = state.eps, state.eps_bar
    mu_rho = schedule_params(sched, 0)[1] * rho[0]
    if mu_rho > 1.0:
        raise ParameterError(f"mu_0 rho_1 = {mu_rho} exceeds 1")
    out = []
    j = 0
    for m in range(cps[-1] + 1 if cps else 0):
        while j < len(cps) and cps[j] == m:
            _check_jensen(MomentState(eps, bar, m))
            out.append((m, float(np.sum(weights * eps))))
            j += 1
        if m == cps[-1]:
            break
        alpha, mu = schedule_params(sched, m)
        eps, bar = _moment_update(rho, c, c2, sigma2, eps, bar, alpha, mu)
    return out


# Products and sums ===========================================================
def _log_factors(a, t, lo, hi):
    """``log(1 - a / l^t)`` for ``l = lo, ..., hi``."""
    ell = np.arange(lo, hi + 1, dtype=np.float64)
    return np.log1p(-a / ell ** t)


def pi_product(a, t, k, m):
    """``prod_{l=k+1}^{m} (1 - a / l^t)``, equal to 1 when ``k = m``."""
    if not (0 <= k <= m):
        raise ParameterError(f"need 0 <= k <= m, got k={k}, m={m}")
    if k == m:
        return 1.0
    if a / (k + 1.0) ** t > 0.5:
        raise ParameterError(f"factor 1 - a/(k+1)^t below 1/2 (a={a}, t={t}, k={k})")
    return math.exp(math.fsum(_log_factors(a, t, k + 1, m)))


def _suffix_products(a, t, m):
    """``P[k] = pi_product(a, t, k, m)`` for ``k = 0, ..., m``."""
    if m == 0:
        return np.ones(1)
    if a > 0.5:
        raise ParameterError(f"factor 1 - a below 1/2 (a={a})")
    logs = _log_factors(a, t, 1, m)
    # suffix sums: logs[k:] for k = 0..m-1, then empty
    suffix = np.concatenate([np.cumsum(logs[::-1])[::-1], [0.0]])
    return np.exp(suffix)


def s_sum(a, t, m):
    """``S_m = sum_{k=0}^{m} pi_product(a, t, k, m)``."""
    if m < 0:
        raise ParameterError("m must be >= 0")
    return float(np.sum(_suffix_products(a, t, m)))


# Expected trajectory =========================================================
def _require_regularized(sched):
    if not sched.regularized or sched.horizon is not None:
        raise ParameterError("expected-trajectory formulas assume the regularized schedule")


def expected_trajectory(lambdas, g, u0, sched, M, checkpoints, target=None):
    """Norm of the mean iterate ``E u^{(m)}`` at each checkpoint.

    Uses the mean recursion ``U_{m+1} = alpha_m ((I - mu_m P) U_m + mu_m g)``
    in the eigenbasis of ``P``. If ``target`` is given, ``||target - E u^{(m)}||^2``
    is reported instead of ``||E u^{(m)}||^2``.
    """
    _require_regularized(sched)
    lam = np.asarray(getattr(lambdas, "lambdas", lambdas), dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    u0 = np.zeros_like(lam) if u0 is None else np.asarray(u0, dtype=np.float64)
    cps = sorted(int(m) for m in checkpoints)
    if any(m < 0 or m > M for m in cps):
        raise ParameterError(f"checkpoints must lie in [0, {M}]")
    ref = None if target is None else np.asarray(target, dtype=np.float64)
    # w_m = (m + 1) U_m obeys w_{m+1} = (1 - mu_m lam) w_m + (m + 1) mu_m g
    w = u0.copy()
    out = []
    j = 0
    for m in range(cps[-1] + 1 if cps else 0):
        while j < len(cps) and cps[j] == m:
            U = w / (m + 1.0)
            v = U if ref is None else ref - U
            out.append((m, float(np.sum(v * v))))
            j += 1
        if m == cps[-1]:
            break
        mu = schedule_params(sched, m)[1]
        w *= 1.0 - mu * lam
        w += ((m + 1.0) * mu) * g
    return out


def expected_trajectory_closed_form(lambdas, g, u0, sched, m, target=None):
    """Coefficients of ``E u^{(m)}`` from the explicit product formula.

    Costs ``O(n m)``; meant as an independent check of
    :func:`expected_trajectory` for moderate ``m``.
    """
    _require_regularized(sched)
    lam = np.asarray(getattr(lambdas, "lambdas", lambdas), dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    u0 = np.zeros_like(lam) if u0 is None else np.asarray(u0, dtype=np.float64)
    A, t = sched.A, sched.t
    k = np.arange(1, m + 1, dtype=np.float64)
    # k * mu_{k-1} = A k^{1-t}
    weights = A * k ** (1.0 - t)
    coeffs = np.empty_like(lam)
    for i, li in enumerate(lam):
        P = _suffix_products(A * li, t, m)
        coeffs[i] = (P[0] * u0[i] + np.sum(weights * P[1:]) * g[i]) / (m + 1.0)
    if target is not None:
        return np.asarray(target, dtype=np.float64) - coeffs
    return coeffs


# Weighted-norm rate helpers =================================================
def _check_theorem2_range(s, sbar):
    if not (-1.0 <= sbar <= 0.0 <= s and sbar < s <= sbar + 2.0):
        raise ParameterError(
            f"(s, sbar)=({s}, {sbar}) violates -1 <= sbar <= 0 <= s, sbar < s <= sbar + 2"
        )


def theorem2_t(s, sbar):
    """Decay exponent ``max((s+1)/(s+2), (sbar+3)/(sbar+4))``."""
    _check_theorem2_range(s, sbar)
    return max((s + 1.0) / (s + 2.0), (sbar + 3.0) / (sbar + 4.0))


def theorem2_rate(s, sbar):
    """Guaranteed decay exponent ``min((s-sbar)/(s+2), 2/(sbar+4))``."""
    _check_theorem2_range(s, sbar)
    return min((s - sbar) / (s + 2.0), 2.0 / (sbar + 4.0))


def theorem3_probe(s, sbar, sigma, sched, m, decays=(1.5, 2.0, 3.0, 4.0),
                   profiles=(0.51, 1.0, 2.0), n=2000):
    """Largest normalized error over a family of weight decays and targets.

    For each ``rho_i ~ i^{-p}`` and ``c_i ~ rho_i^{s/2} i^{-q}`` scaled to unit
    order-``s`` norm, evaluates ``(m+1)^r E||e^{(m)}||^2`` with ``r`` the
    exponent of :func:`theorem2_rate`. The family only exhibits witnesses;
    it does not bound the supremum over all weights.

    Returns ``(value, (p, q))`` for the maximizing member.
    """
    if not (-1.0 <= sbar <= 0.0 <= s and sbar < s):
        raise ParameterError("need -1 <= sbar <= 0 <= s and sbar < s")
    r = min((s - sbar) / (s + 2.0), 2.0 / (sbar + 4.0))
    idx = np.arange(1, n + 1, dtype=np.float64)
    best = (-np.inf, None)
    for p in decays:
        rho = idx ** (-p)
        rho /= rho.sum()
        for q in profiles:
            c = rho ** (s / 2.0) * idx ** (-q)
            c /= np.sqrt(np.sum(rho ** (-s) * c * c))
            spec = ConsProblemSpec(rho, c, sigma)
            val = cons_oracle_curve(spec, sched, [m], sbar)[0][1] * (m + 1.0) ** r
            if val > best[0]:
                best = (val, (p, q))
    return best
