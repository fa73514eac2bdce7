"""Problem generators, Monte-Carlo estimation, error bounds and rate fits."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .engine import run_trials
from .errors import FitError, ParameterError
from .hilbert import (
    BrownianBridge,
    ConsMap,
    Eigensystem,
    MultiplicativeKernel,
    SpectralVector,
    smoothness_norm_sq,
)
from .oracle import ConsProblemSpec

__all__ = [
    "NoiseModel",
    "ProblemInstance",
    "make_cons_problem",
    "make_bridge_problem",
    "draw_sample",
    "noise_variance",
    "theorem1_constant",
    "theorem1_constant_from_norms",
    "theorem1_bound",
    "refined_bound",
    "refined_bound_s1",
    "finite_horizon_bound",
    "MonteCarloResult",
    "monte_carlo_error",
    "RateFit",
    "fit_rate",
    "WORKERS_ENV",
]

WORKERS_ENV = "ONLINE_RKHS_WORKERS"

# exponent of the extra polynomial factor in boundary-smoothness targets
PROFILE_EXPONENT = 0.51


@dataclass(frozen=True)
class NoiseModel:
    """Additive zero-mean noise in ``Y``, independent of the sample point.

    ``kind`` is ``"none"``, ``"gaussian"`` (``scale`` = standard deviation)
    or ``"uniform"`` (``scale`` = half-width ``b``, variance ``b^2/3``).
    """

    kind: str = "none"
    scale: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "gaussian", "uniform"):
            raise ParameterError(f"unknown noise kind {self.kind!r}")
        if not (self.scale >= 0 and np.isfinite(self.scale)):
            raise ParameterError("noise scale must be finite and >= 0")

    @property
    def variance(self) -> float:
        """Variance of one component."""
        if self.kind == "gaussian":
            return self.scale * self.scale
        if self.kind == "uniform":
            return self.scale * self.scale / 3.0
        return 0.0

    def sample(self, rng, size, d):
        if self.kind == "gaussian":
            return self.scale * rng.standard_normal((size, d))
        if self.kind == "uniform":
            return rng.uniform(-self.scale, self.scale, (size, d))
        return np.zeros((size, d))


def _gaussian(sigma):
    return NoiseModel("gaussian", sigma) if sigma > 0 else NoiseModel()


@dataclass(frozen=True)
class ProblemInstance:
    """A synthetic learning task with known minimizer ``target``.

    ``sampling`` is ``"discrete"`` (indices drawn with ``weights``),
    ``"nodes"`` (uniform over the quadrature grid of a kernel map) or
    ``"uniform"`` (uniform on ``[0, 1]``).
    """

    fmap: object
    eig: Eigensystem
    target: SpectralVector
    noise: NoiseModel
    sampling: str
    weights: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def Lambda(self) -> float:
        return self.fmap.uniform_bound()

    @property
    def output_dim(self) -> int:
        return self.fmap.output_dim

    def draw_omegas(self, rng, N):
        if self.sampling == "discrete":
            cdf = np.cumsum(self.weights)
            idx = np.searchsorted(cdf, rng.random(N) * cdf[-1], side="right")
            return np.minimum(idx, cdf.size - 1) + 1
        if self.sampling == "nodes":
            nodes = _basis(self.fmap).nodes
            return nodes[rng.integers(0, nodes.size, N)]
        return rng.random(N)

    def f_u(self, omegas):
        """Noiseless outputs ``R_omega^* u`` as an ``(N, output_dim)`` array."""
        omegas = np.asarray(omegas)
        c = self.target.coeffs
        if isinstance(self.fmap, ConsMap):
            return c[omegas.astype(np.int64) - 1][:, None]
        basis = _basis(self.fmap)
        if self.sampling == "nodes":
            rows = basis.node_features[np.floor(omegas * basis.n).astype(np.int64)]
        else:
            rows = np.stack([basis.features(w) for w in omegas])
        if isinstance(self.fmap, MultiplicativeKernel):
            return np.einsum("nkd,k->nd", self.fmap.combine(rows), c)
        return (rows @ c)[:, None]

    def draw_samples(self, rng, N):
        """Draw ``N`` i.i.d. samples: all points first, then all noise."""
        omegas = self.draw_omegas(rng, int(N))
        ys = self.f_u(omegas) + self.noise.sample(rng, int(N), self.output_dim)
        return omegas, ys

    def cons_spec(self):
        """Expectation-oracle view of a coefficient-sampling problem."""
        if self.sampling != "discrete":
            raise ParameterError("only discrete-index problems have a moment oracle")
        return ConsProblemSpec(self.weights, self.target.coeffs, np.sqrt(self.noise.variance))


def _basis(fmap):
    scalar = fmap.scalar if isinstance(fmap, MultiplicativeKernel) else fmap
    return scalar._require_basis()


def _boundary_target(lambdas, s):
    k = np.arange(1, lambdas.size + 1, dtype=np.float64)
    c = lambdas ** (s / 2.0) * k ** (-PROFILE_EXPONENT)
    return c / np.sqrt(np.sum(lambdas ** (-s) * c * c))


def make_cons_problem(rho_decay, n, s, seed=0, sigma=0.0, noise=None):
    """Coefficient sampling with ``rho_i ~ i^-p`` on ``n`` indices.

    The target has ``c_i ~ rho_i^{s/2} i^{-0.51}`` scaled to unit order-``s``
    norm, which places it in the order-``s`` space and only barely so. The
    weights are normalized over the ``n`` retained indices, so the truncated
    system is itself an exact instance with no tail.
    """
    if not rho_decay > 1:
        raise ParameterError(f"rho_decay={rho_decay} must exceed 1")
    if int(n) != n or n < 1:
        raise ParameterError("n must be a positive integer")
    idx = np.arange(1, int(n) + 1, dtype=np.float64)
    rho = idx ** (-float(rho_decay))
    rho /= rho.sum()
    c = _boundary_target(rho, s)
    meta = {"kind": "cons", "p": rho_decay, "n": int(n), "s": s, "seed": seed,
            "sigma": sigma, "profile_exponent": PROFILE_EXPONENT}
    return ProblemInstance(
        fmap=ConsMap(n, rho),
        eig=Eigensystem(rho, 1.0),
        target=SpectralVector(c),
        noise=noise if noise is not None else _gaussian(sigma),
        sampling="discrete",
        weights=rho,
        metadata=meta,
    )


def make_bridge_problem(n_quad, s, sigma=0.0, d=1, T=None, sampling="nodes", noise=None):
    """Brownian-bridge kernel problem, optionally vector valued via ``k(w, t) T``.

    The eigensystem comes from a midpoint-rule discretization with
    ``n_quad`` nodes. The target is built in that basis with the same
    boundary-smoothness profile as :func:`make_cons_problem`.
    """
    if int(n_quad) < 100:
        raise ParameterError("n_quad must be >= 100")
    if sampling not in ("nodes", "uniform"):
        raise ParameterError(f"unknown sampling {sampling!r}")
    scalar = BrownianBridge(n_quad)
    if T is None and d == 1:
        fmap = scalar
    else:
        T = np.eye(d) if T is None else np.asarray(T, dtype=np.float64)
        if T.shape != (d, d):
            raise ParameterError(f"T must be {d}x{d}")
        fmap = MultiplicativeKernel(scalar, T)
    eig = fmap.eigensystem()
    meta = {"kind": "bridge", "n_quad": int(n_quad), "s": s, "sigma": sigma, "d": d,
            "sampling": sampling, "profile_exponent": PROFILE_EXPONENT}
    return ProblemInstance(
        fmap=fmap,
        eig=eig,
        target=SpectralVector(_boundary_target(eig.lambdas, s)),
        noise=noise if noise is not None else _gaussian(sigma),
        sampling=sampling,
        metadata=meta,
    )


def draw_sample(problem, rng):
    """One ``(omega, y)`` sample."""
    om, ys = problem.draw_samples(rng, 1)
    return om[0], ys[0]


def noise_variance(problem):
    """``E||y - f_u(omega)||^2``; the implemented problems have no misfit term."""
    return problem.output_dim * problem.noise.variance


# Bounds ======================================================================
def theorem1_constant_from_norms(e0_sq, u_sq, us_sq, Lambda, s, sigma2):
    """``2||e0||^2 + 2||u||^2 + 8 Lambda^s ||u||_s^2 + sigma^2 / Lambda``."""
    if not (0.0 < s <= 1.0):
        raise ParameterError(f"s={s} must lie in (0, 1]")
    return 2.0 * e0_sq + 2.0 * u_sq + 8.0 * Lambda ** s * us_sq + sigma2 / Lambda


def theorem1_constant(problem, u0=None, s=1.0):
    """Constant ``C^2`` of the rate bound for ``problem`` started at ``u0``."""
    eig, u = problem.eig, problem.target
    c0 = np.zeros(eig.dim) if u0 is None else getattr(u0, "coeffs", u0)
    e0 = SpectralVector(u.coeffs - np.asarray(c0, dtype=np.float64))
    return theorem1_constant_from_norms(
        smoothness_norm_sq(eig, e0, 0),
        smoothness_norm_sq(eig, u, 0),
        smoothness_norm_sq(eig, u, s),
        problem.Lambda,
        s,
        noise_variance(problem),
    )


def theorem1_bound(C2, s, m):
    """``C^2 (m+1)^{-s/(2+s)}``."""
    if m < 1:
        raise ParameterError("bound holds for m >= 1")
    return C2 * (m + 1.0) ** (-s / (2.0 + s))


def refined_bound(e0_sq, u_sq, u1_sq, Lambda, sigma2, t, A, m):
    """Four-term bound for smoothness order one and general ``t``, ``A``."""
    m1 = m + 1.0
    return (e0_sq / m1 ** 2 + 2.0 * A ** 2 * Lambda * sigma2 / m1 ** (2.0 * t - 1.0)
            + u_sq / m1 + u1_sq / (A * m1 ** (1.0 - t)))


def refined_bound_s1(e0_sq, u_sq, u1_sq, Lambda, sigma2, m):
    """Bound for ``t = 2/3``, ``A = 1/(2 Lambda)``: terms summed as written."""
    m1 = m + 1.0
    return (e0_sq / m1 ** 2 + u_sq / m1
            + (2.0 * Lambda * u1_sq + sigma2 / (2.0 * Lambda)) / m1 ** (1.0 / 3.0))


def finite_horizon_bound(e0_sq, u_sq, u1_sq, Lambda, sigma2, mu, N):
    """Bound on the final error of an ``N``-step run with constant step ``mu``."""
    N1 = N + 1.0
    return e0_sq / N1 ** 2 + 2.0 * Lambda * sigma2 * mu ** 2 * N1 + (u_sq + u1_sq / mu) / N1


# Monte Carlo =================================================================
class MonteCarloResult(NamedTuple):
    records: list  # (m, mean, stderr)
    flagged: list  # trial indices with nonfinite errors
    trials: int


def _worker_count(workers):
    if workers is not None:
        return max(1, int(workers))
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def monte_carlo_error(problem, sched, N, trials, base_seed=0, checkpoints=None, sbar=0.0,
                      u0=None, workers=None, allow_intermediate=False):
    """Mean and standard error of the squared error over independent trials.

    Trial ``k`` uses seed ``base_seed + k``. Trials may be split across
    threads; results are gathered in trial order so the output does not
    depend on the worker count. Trials with nonfinite errors are excluded
    from the statistics and listed in ``flagged``.
    """
    if trials < 2:
        raise ParameterError("need at least two trials")
    N = int(N)
    if checkpoints is None:
        from .engine import geometric_checkpoints

        checkpoints = [N] if sched.horizon is not None else geometric_checkpoints(N)
    cps = sorted(int(c) for c in checkpoints)
    seeds = [base_seed + k for k in range(trials)]
    nw = min(_worker_count(workers), trials)
    chunks = [c for c in np.array_split(np.asarray(seeds), nw) if c.size]

    def work(chunk):
        return run_trials(problem, sched, N, cps, chunk.tolist(), sbar, u0, allow_intermediate)

    if len(chunks) == 1:
        errs = work(chunks[0])
    else:
        with ThreadPoolExecutor(len(chunks)) as pool:
            errs = np.vstack(list(pool.map(work, chunks)))
    finite = np.all(np.isfinite(errs), axis=1)
    flagged = [int(k) for k in np.flatnonzero(~finite)]
    good = errs[finite]
    if good.shape[0] > 1:
        mean = good.mean(axis=0)
        stderr = good.std(axis=0, ddof=1) / np.sqrt(good.shape[0])
    else:
        mean = good[0] if good.shape[0] else np.full(len(cps), np.nan)
        stderr = np.full(len(cps), np.nan)
    records = [(m, float(a), float(b)) for m, a, b in zip(cps, mean, stderr)]
    return MonteCarloResult(records, flagged, trials)


# Rate fitting ================================================================
class RateFit(NamedTuple):
    slope: float
    intercept: float
    window: tuple
    residual: float


def fit_rate(records, window):
    """Least-squares line through ``(log(m+1), log value)`` for ``m`` in ``window``."""
    lo, hi = window
    if not lo < hi:
        raise FitError("window must satisfy m_lo < m_hi")
    pts = [(r[0], r[1]) for r in records if lo <= r[0] <= hi]
    if len(pts) < 4:
        raise FitError(f"need >= 4 records in window, got {len(pts)}")
    m, v = np.array(pts, dtype=np.float64).T
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise FitError("values in window must be finite and positive")
    x, y = np.log(m + 1.0), np.log(v)
    X = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = float(np.sqrt(np.mean((y - X @ np.array([slope, intercept])) ** 2)))
    return RateFit(float(slope), float(intercept), (lo, hi), resid)
