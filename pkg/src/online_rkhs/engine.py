"""Regularized online iteration in feature space and its RKHS (dual) form.

One step processes a sample ``(omega_m, y_m)``::

    u_{m+1} = alpha_m * (u_m + mu_m * R_{omega_m}(y_m - R_{omega_m}^* u_m))

with ``alpha_m = (m+1)/(m+2)`` (regularized) or ``1`` (unregularized) and
``mu_m = A / (m+1)^t``. A finite horizon ``N`` replaces ``mu_m`` by the
constant ``A * (N+1)^(-2/3)``, which equals ``(2 Lambda)^-1 (N+1)^(-2/3)``
for ``A = 1/(2 Lambda)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import HorizonExceededError, ParameterError, RepresentationError
from .hilbert import (
    ConsMap,
    DualVector,
    MultiplicativeKernel,
    SpectralVector,
    apply_feature,
    eval_feature_adjoint,
)

__all__ = [
    "Schedule",
    "IterateState",
    "Sample",
    "schedule_params",
    "theorem1_schedule",
    "finite_horizon_mu",
    "finite_horizon_schedule",
    "online_step",
    "online_step_dual",
    "geometric_checkpoints",
    "run",
    "run_dual",
    "run_trials",
]


@dataclass(frozen=True)
class Schedule:
    """Regularization and step-size sequence.

    Parameters
    ----------
    t : float
        Step-size decay exponent, ``1/2 < t < 1``. Ignored with a horizon.
    A : float
        Step-size scale, ``A > 0``.
    regularized : bool
        ``alpha_m = (m+1)/(m+2)`` if true, else ``alpha_m = 1``.
    horizon : int or None
        If set, ``N >= 1`` steps with constant ``mu = A (N+1)^(-2/3)``.
    averaging : bool
        Track the running mean of the iterates and report errors for it.
    """

    t: float = 2.0 / 3.0
    A: float = 0.5
    regularized: bool = True
    horizon: int | None = None
    averaging: bool = False

    def __post_init__(self):
        if not (self.A > 0 and np.isfinite(self.A)):
            raise ParameterError(f"A={self.A} must be positive")
        if self.horizon is None:
            if not (0.5 < self.t < 1.0):
                raise ParameterError(f"t={self.t} must lie in (1/2, 1)")
        elif int(self.horizon) != self.horizon or self.horizon < 1:
            raise ParameterError(f"horizon={self.horizon} must be a positive integer")

    @property
    def mode(self) -> str:
        if self.horizon is not None:
            return "finite_horizon"
        return "regularized" if self.regularized else "unregularized"

    def check_step_bound(self, Lambda):
        """Raise unless ``A <= 1/(2 Lambda)``, the regime all bounds assume."""
        if self.A > 1.0 / (2.0 * Lambda) * (1 + 1e-12):
            raise ParameterError(f"A={self.A} exceeds 1/(2 Lambda)={1 / (2 * Lambda)}")


class Sample(NamedTuple):
    omega: float
    y: np.ndarray


@dataclass
class IterateState:
    """Current iterate, optional running average, and step counter."""

    u: SpectralVector | DualVector
    u_bar: SpectralVector | DualVector | None = None
    m: int = 0

    @classmethod
    def initial(cls, u0, averaging=False):
        if averaging:
            if isinstance(u0, SpectralVector):
                u_bar = SpectralVector(u0.coeffs.copy())
            else:
                u_bar = DualVector(u0.anchors.copy(), u0.coefs.copy(), u0.output_dim)
            return cls(u0, u_bar, 0)
        return cls(u0, None, 0)


def schedule_params(sched, m):
    """Return ``(alpha_m, mu_m)`` for step ``m >= 0``."""
    if m < 0:
        raise ParameterError("step index must be >= 0")
    alpha = (m + 1.0) / (m + 2.0) if sched.regularized else 1.0
    if sched.horizon is not None:
        if m >= sched.horizon:
            raise HorizonExceededError(f"step {m} beyond horizon N={sched.horizon}")
        return alpha, sched.A * (sched.horizon + 1.0) ** (-2.0 / 3.0)
    return alpha, sched.A / (m + 1.0) ** sched.t


def theorem1_schedule(s, Lambda):
    """Rate-optimal schedule ``t = (1+s)/(2+s)``, ``A = 1/(2 Lambda)`` for ``0 < s <= 1``."""
    if not (0.0 < s <= 1.0):
        raise ParameterError(f"s={s} must lie in (0, 1]")
    if not Lambda > 0:
        raise ParameterError("Lambda must be positive")
    return Schedule(t=(1.0 + s) / (2.0 + s), A=1.0 / (2.0 * Lambda))


def finite_horizon_mu(N, Lambda):
    """Constant step ``(2 Lambda)^-1 (N+1)^(-2/3)`` for a horizon of ``N`` samples."""
    if int(N) != N or N < 1:
        raise ParameterError(f"horizon N={N} must be a positive integer")
    return (N + 1.0) ** (-2.0 / 3.0) / (2.0 * Lambda)


def finite_horizon_schedule(N, Lambda, regularized=True):
    finite_horizon_mu(N, Lambda)
    return Schedule(A=1.0 / (2.0 * Lambda), regularized=regularized, horizon=int(N))


def _check_y(fmap, y):
    y = np.atleast_1d(np.asarray(y, dtype=np.float64)).ravel()
    if y.size != fmap.output_dim:
        raise RepresentationError(f"y has dimension {y.size}, expected {fmap.output_dim}")
    if not np.all(np.isfinite(y)):
        raise ParameterError("sample y is not finite")
    return y


def online_step(state, sample, fmap, sched):
    """One step of the feature-space iteration on a spectral iterate."""
    if not isinstance(state.u, SpectralVector):
        raise RepresentationError("online_step requires a spectral iterate")
    y = _check_y(fmap, sample.y)
    alpha, mu = schedule_params(sched, state.m)
    residual = y - eval_feature_adjoint(fmap, sample.omega, state.u)
    correction = apply_feature(fmap, sample.omega, residual, spectral=True)
    u_new = SpectralVector(alpha * (state.u.coeffs + mu * correction.coeffs))
    u_bar = None
    if state.u_bar is not None:
        m1 = state.m + 1.0
        u_bar = SpectralVector((m1 * state.u_bar.coeffs + u_new.coeffs) / (m1 + 1.0))
    return IterateState(u_new, u_bar, state.m + 1)


def online_step_dual(state, sample, fmap, sched):
    """One step of the kernel form: rescale anchors by ``alpha_m``, append one anchor."""
    if not isinstance(state.u, DualVector):
        raise RepresentationError("online_step_dual requires a dual iterate")
    if not fmap.is_kernel:
        raise RepresentationError("dual iteration needs a kernel feature map")
    y = _check_y(fmap, sample.y)
    alpha, mu = schedule_params(sched, state.m)
    w = fmap.check_point(sample.omega)
    residual = y - eval_feature_adjoint(fmap, w, state.u)
    d = fmap.output_dim
    u = state.u
    anchors = np.append(u.anchors, w)
    coefs = np.vstack([alpha * u.coefs, (alpha * mu * residual)[None, :]])
    u_new = DualVector(anchors, coefs, d)
    u_bar = None
    if state.u_bar is not None:
        m1 = state.m + 1.0
        padded = np.vstack([state.u_bar.coefs, np.zeros((1, d))])
        u_bar = DualVector(anchors, (m1 * padded + coefs) / (m1 + 1.0), d)
    return IterateState(u_new, u_bar, state.m + 1)


def geometric_checkpoints(N):
    """``0, 1, 2, 4, ..., N`` with ``N`` always included."""
    N = int(N)
    pts = {0, N}
    k = 1
    while k < N:
        pts.add(k)
        k *= 2
    return sorted(pts)


def _check_checkpoints(sched, N, checkpoints, allow_intermediate):
    cps = sorted(int(c) for c in checkpoints)
    if any(c < 0 or c > N for c in cps):
        raise ParameterError(f"checkpoints must lie in [0, {N}]")
    if sched.horizon is not None:
        if N > sched.horizon:
            raise HorizonExceededError(f"N={N} exceeds horizon {sched.horizon}")
        if not allow_intermediate and any(c != N for c in cps):
            raise ParameterError("finite-horizon runs only certify m = N; pass allow_intermediate")
    return cps


def _error_sq(eig, target, coeffs, sbar):
    e = target - coeffs
    if sbar == 0:
        return float(np.sum(e * e))
    return float(np.sum(eig.lambdas ** (-sbar) * e * e))


def run(problem, sched, N, checkpoints=None, rng_seed=0, sbar=0.0, u0=None,
        allow_intermediate=False):
    """Run ``N`` steps on one sample stream and record squared errors.

    Returns a list of ``(m, ||u - u_m||^2)`` in the smoothness norm of order
    ``sbar`` (errors of the running mean if the schedule averages).
    """
    N = int(N)
    if checkpoints is None:
        checkpoints = [N] if sched.horizon is not None else geometric_checkpoints(N)
    cps = _check_checkpoints(sched, N, checkpoints, allow_intermediate)
    eig, fmap = problem.eig, problem.fmap
    target = problem.target.coeffs
    state = IterateState.initial(
        SpectralVector(np.zeros(eig.dim) if u0 is None else np.array(u0, dtype=float)),
        sched.averaging,
    )
    rng = np.random.default_rng(rng_seed)
    omegas, ys = problem.draw_samples(rng, N)
    wanted = set(cps)
    out = []
    for m in range(N + 1):
        if m in wanted:
            v = state.u_bar if sched.averaging else state.u
            out.append((m, _error_sq(eig, target, v.coeffs, sbar)))
        if m < N:
            state = online_step(state, Sample(omegas[m], ys[m]), fmap, sched)
    return out


def run_dual(problem, sched, N, rng_seed=0):
    """Run the kernel form on the same sample stream :func:`run` would use.

    Returns the final :class:`IterateState` holding dual vectors.
    """
    fmap = problem.fmap
    rng = np.random.default_rng(rng_seed)
    omegas, ys = problem.draw_samples(rng, int(N))
    state = IterateState.initial(DualVector.empty(fmap.output_dim), sched.averaging)
    for m in range(int(N)):
        state = online_step_dual(state, Sample(omegas[m], ys[m]), fmap, sched)
    return state


# Batched trials ==============================================================
def _weighted_rows(eig, E, sbar):
    if sbar == 0:
        return np.sum(E * E, axis=-1)
    return np.sum(eig.lambdas ** (-sbar) * E * E, axis=-1)


def _run_cons_batch(problem, sched, N, cps, seeds, sbar, u0):
    # u_m = scale_m * W so that the shrinkage costs O(1) per step
    eig = problem.eig
    n = eig.dim
    T = len(seeds)
    idx = np.empty((T, N), dtype=np.int64)
    ys = np.empty((T, N))
    for k, seed in enumerate(seeds):
        om, y = problem.draw_samples(np.random.default_rng(seed), N)
        idx[k] = np.asarray(om, dtype=np.int64) - 1
        ys[k] = y[:, 0]
    W = np.zeros((T, n)) if u0 is None else np.tile(np.asarray(u0, dtype=float), (T, 1))
    rows = np.arange(T)
    target = problem.target.coeffs
    scale = 1.0
    if sched.averaging:
        # running sums of scale_k * W_k, kept lazily per coordinate
        acc = np.zeros((T, n))
        last = np.zeros((T, n), dtype=np.int64)
        prefix = np.zeros(N + 2)
    out = np.empty((T, len(cps)))
    wanted = {c: j for j, c in enumerate(cps)}
    for m in range(N + 1):
        if sched.averaging:
            prefix[m + 1] = prefix[m] + scale
        if m in wanted:
            if sched.averaging:
                total = acc + W * (prefix[m + 1] - prefix[last])
                v = total / (m + 1.0)
            else:
                v = scale * W
            out[:, wanted[m]] = _weighted_rows(eig, target - v, sbar)
        if m == N:
            break
        alpha, mu = schedule_params(sched, m)
        i = idx[:, m]
        r = ys[:, m] - scale * W[rows, i]
        if sched.averaging:
            acc[rows, i] += W[rows, i] * (prefix[m + 1] - prefix[last[rows, i]])
            last[rows, i] = m + 1
        W[rows, i] += mu * r / scale
        scale *= alpha
    return out


def _scalar_node_table(fmap):
    scalar = fmap.scalar if isinstance(fmap, MultiplicativeKernel) else fmap
    return scalar.basis


def _run_dense_batch(problem, sched, N, cps, seeds, sbar, u0):
    eig, fmap = problem.eig, problem.fmap
    d = fmap.output_dim
    T = len(seeds)
    draws = [problem.draw_samples(np.random.default_rng(s), N) for s in seeds]
    omegas = np.array([dr[0] for dr in draws], dtype=float).reshape(T, N)
    ys = np.array([dr[1] for dr in draws], dtype=float).reshape(T, N, d)
    basis = _scalar_node_table(fmap)
    node_idx = None
    if basis is not None and problem.sampling == "nodes":
        node_idx = np.floor(omegas * basis.n).astype(np.int64)

    def feats(m):
        if node_idx is not None:
            f = basis.node_features[node_idx[:, m]]
            if isinstance(fmap, MultiplicativeKernel):
                return fmap.combine(f)
            return f[:, :, None]
        return np.stack([fmap.features(w) for w in omegas[:, m]])

    U = np.zeros((T, eig.dim)) if u0 is None else np.tile(np.asarray(u0, dtype=float), (T, 1))
    Ubar = U.copy() if sched.averaging else None
    target = problem.target.coeffs
    out = np.empty((T, len(cps)))
    wanted = {c: j for j, c in enumerate(cps)}
    for m in range(N + 1):
        if m in wanted:
            v = Ubar if sched.averaging else U
            out[:, wanted[m]] = _weighted_rows(eig, target - v, sbar)
        if m == N:
            break
        alpha, mu = schedule_params(sched, m)
        phi = feats(m)  # (T, dim, d)
        r = ys[:, m, :] - np.einsum("tkd,tk->td", phi, U)
        U = alpha * (U + mu * np.einsum("tkd,td->tk", phi, r))
        if Ubar is not None:
            Ubar = ((m + 1.0) * Ubar + U) / (m + 2.0)
    return out


def run_trials(problem, sched, N, checkpoints, seeds, sbar=0.0, u0=None,
               allow_intermediate=False):
    """Run independent trials, one per seed, in lock step.

    Trial ``k`` consumes exactly the sample stream of ``run(..., rng_seed=seeds[k])``.
    Returns an array of shape ``(len(seeds), len(checkpoints))`` of squared
    errors, columns in sorted checkpoint order.
    """
    N = int(N)
    cps = _check_checkpoints(sched, N, checkpoints, allow_intermediate)
    seeds = list(seeds)
    if isinstance(problem.fmap, ConsMap):
        return _run_cons_batch(problem, sched, N, cps, seeds, sbar, u0)
    return _run_dense_batch(problem, sched, N, cps, seeds, sbar, u0)
