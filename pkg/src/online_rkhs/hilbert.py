"""Feature spaces, feature maps and operator kernels.

A feature map is a family of bounded operators ``R_omega : Y -> V``. Elements
of ``V`` are held either in spectral form (coefficients with respect to the
eigenvectors of the covariance operator ``P = E(R_omega R_omega^*)``) or in
dual form (a finite kernel expansion ``sum_j R_{omega_j} c_j``).

Three maps are provided:

* :class:`ConsMap` -- ``Omega = {1, ..., n}``, ``R_i y = y psi_i`` for an
  orthonormal system ``psi``.
* :class:`BrownianBridge` -- ``Omega = [0, 1]`` with the scalar kernel
  ``k(w, t) = min(w, t) * (1 - max(w, t))`` of ``H^1_0(0, 1)``.
* :class:`MultiplicativeKernel` -- ``K(w, t) = k(w, t) T`` for a scalar
  kernel ``k`` and an SPD matrix ``T``, so that ``Y = R^d``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .errors import DomainError, ParameterError, RepresentationError

__all__ = [
    "Eigensystem",
    "SpectralVector",
    "DualVector",
    "FeatureMap",
    "ConsMap",
    "QuadratureBasis",
    "BrownianBridge",
    "MultiplicativeKernel",
    "eval_feature_adjoint",
    "apply_feature",
    "kernel_eval",
    "covariance_apply",
    "smoothness_norm",
    "smoothness_norm_sq",
    "uniform_bound",
    "to_spectral",
    "dual_inner",
]


# Domain types ================================================================
@dataclass(frozen=True)
class Eigensystem:
    """Truncated eigenvalues of the covariance operator.

    Parameters
    ----------
    lambdas : (n,) array_like
        Eigenvalues in non-increasing order, all strictly positive.
    Lambda : float
        Uniform bound on ``||R_omega||^2``; must dominate ``lambdas[0]``.
    """

    lambdas: np.ndarray
    Lambda: float

    def __post_init__(self):
        lam = np.array(self.lambdas, dtype=np.float64).ravel()
        if lam.size == 0:
            raise ParameterError("eigensystem needs at least one mode")
        if not np.all(np.isfinite(lam)) or np.any(lam <= 0):
            raise ParameterError("eigenvalues must be finite and strictly positive")
        if np.any(np.diff(lam) > 0):
            raise ParameterError("eigenvalues must be non-increasing")
        if not self.Lambda > 0 or lam[0] > self.Lambda * (1 + 1e-12):
            raise ParameterError(
                f"Lambda={self.Lambda} must be positive and >= lambda_1={lam[0]}"
            )
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "Lambda", float(self.Lambda))

    @property
    def dim(self) -> int:
        return self.lambdas.size


@dataclass
class SpectralVector:
    """Element of ``V`` given by its coefficients in the eigenbasis."""

    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.float64).ravel()

    @classmethod
    def zeros(cls, dim):
        return cls(np.zeros(dim))

    @property
    def dim(self) -> int:
        return self.coeffs.size


@dataclass
class DualVector:
    """Element of ``V`` given as ``sum_j R_{anchors[j]} coefs[j]``.

    ``coefs`` has shape ``(m, output_dim)``.
    """

    anchors: np.ndarray
    coefs: np.ndarray
    output_dim: int = field(default=1)

    def __post_init__(self):
        self.anchors = np.asarray(self.anchors, dtype=np.float64).ravel()
        coefs = np.asarray(self.coefs, dtype=np.float64)
        if coefs.size == 0:
            coefs = coefs.reshape(0, self.output_dim)
        elif coefs.ndim == 1 and self.output_dim == 1:
            coefs = coefs.reshape(-1, 1)
        if coefs.ndim != 2 or coefs.shape != (self.anchors.size, self.output_dim):
            raise RepresentationError(
                f"coefficient blocks must have shape ({self.anchors.size}, "
                f"{self.output_dim}), got {coefs.shape}"
            )
        self.coefs = coefs

    @classmethod
    def empty(cls, output_dim=1):
        return cls(np.empty(0), np.empty((0, output_dim)), output_dim)

    @property
    def size(self) -> int:
        return self.anchors.size


# Feature maps ================================================================
class FeatureMap:
    """Base class for feature maps ``R_omega : Y -> V``.

    Subclasses implement :meth:`kernel`, :meth:`check_point`,
    :meth:`uniform_bound` and, when a spectral basis is attached,
    :meth:`features`.
    """

    output_dim = 1
    is_kernel = True

    def check_point(self, omega):
        raise NotImplementedError  # pragma: no cover

    def kernel(self, omega, theta):
        """Return ``K(omega, theta)`` as an ``(output_dim, output_dim)`` array."""
        raise NotImplementedError  # pragma: no cover

    def kernel_apply(self, omega, anchors, coefs):
        """Return ``sum_j K(omega, anchors[j]) coefs[j]``."""
        raise NotImplementedError  # pragma: no cover

    def uniform_bound(self) -> float:
        raise NotImplementedError  # pragma: no cover

    @property
    def spectral_dim(self):
        raise RepresentationError(f"{type(self).__name__} has no spectral basis attached")

    def eigensystem(self) -> Eigensystem:
        raise RepresentationError(f"{type(self).__name__} has no spectral basis attached")

    def features(self, omega) -> np.ndarray:
        """Spectral coordinates of ``R_omega`` as a ``(spectral_dim, output_dim)`` array."""
        raise RepresentationError(f"{type(self).__name__} has no spectral basis attached")


class ConsMap(FeatureMap):
    """Coefficient sampling of an orthonormal system: ``R_i y = y psi_i``.

    Sample points are the 1-based indices ``1, ..., dim``.
    """

    is_kernel = False

    def __init__(self, dim, lambdas=None):
        if int(dim) < 1:
            raise ParameterError("dim must be >= 1")
        self.dim = int(dim)
        self._lambdas = None if lambdas is None else np.asarray(lambdas, dtype=np.float64)

    def __repr__(self):
        return f"ConsMap(dim={self.dim})"

    def check_point(self, omega):
        i = int(omega)
        if i != omega or i < 1 or i > self.dim:
            raise DomainError(f"index {omega!r} outside 1..{self.dim}")
        return i

    def kernel(self, omega, theta):
        i, j = self.check_point(omega), self.check_point(theta)
        return np.array([[1.0 if i == j else 0.0]])

    def kernel_apply(self, omega, anchors, coefs):
        raise RepresentationError("ConsMap iterates are kept in spectral form only")

    def uniform_bound(self):
        return 1.0

    @property
    def spectral_dim(self):
        return self.dim

    def eigensystem(self):
        if self._lambdas is None:
            raise RepresentationError("ConsMap built without sampling weights")
        return Eigensystem(self._lambdas, 1.0)

    def features(self, omega):
        i = self.check_point(omega)
        phi = np.zeros((self.dim, 1))
        phi[i - 1, 0] = 1.0
        return phi


def _bridge_kernel(omega, theta):
    return np.minimum(omega, theta) * (1.0 - np.maximum(omega, theta))


class QuadratureBasis:
    """Eigenbasis of a scalar kernel's integral operator on a midpoint grid.

    The operator ``(P v)(w) = int_0^1 k(w, t) v(t) dt`` is discretized by the
    ``n``-point midpoint rule and diagonalized with a symmetric eigensolver.
    Eigenfunctions are extended off the grid by the Nystrom formula. When
    sampling is uniform over the grid nodes the resulting feature
    coordinates are exact.

    Parameters
    ----------
    kernel : callable
        Vectorized scalar kernel ``kernel(w, t)``.
    n : int
        Number of quadrature nodes.
    """

    def __init__(self, kernel, n):
        n = int(n)
        if n < 2:
            raise ParameterError("need at least two quadrature nodes")
        self.n = n
        self.nodes = (np.arange(n) + 0.5) / n
        self._kernel = kernel
        gram = kernel(self.nodes[:, None], self.nodes[None, :]) / n
        lam, vec = la.eigh(gram)
        order = np.argsort(lam)[::-1]
        lam, vec = lam[order], vec[:, order]
        keep = lam > lam[0] * 1e-14
        self.lambdas = lam[keep]
        self._vec = vec[:, keep]
        # node_features[j, k] = sqrt(lambda_k) * phi_k(x_j)
        self.node_features = self._vec * np.sqrt(n * self.lambdas)

    @property
    def dim(self):
        return self.lambdas.size

    def node_index(self, omega):
        """Index of the grid node equal to ``omega``, or ``None``."""
        j = int(np.floor(omega * self.n))
        if 0 <= j < self.n and abs(self.nodes[j] - omega) <= 1e-14:
            return j
        return None

    def features(self, omega):
        j = self.node_index(omega)
        if j is not None:
            return self.node_features[j]
        k_row = self._kernel(omega, self.nodes)
        return (k_row @ self._vec) / np.sqrt(self.n * self.lambdas)


class BrownianBridge(FeatureMap):
    """Scalar kernel ``(1 - max(w, t)) * min(w, t)`` on ``[0, 1]``.

    Parameters
    ----------
    n_quad : int, optional
        If given, attach a :class:`QuadratureBasis` with this many nodes so
        that spectral iterates can be used.
    """

    def __init__(self, n_quad=None):
        self.basis = None if n_quad is None else QuadratureBasis(_bridge_kernel, n_quad)

    def __repr__(self):
        n = None if self.basis is None else self.basis.n
        return f"BrownianBridge(n_quad={n})"

    def check_point(self, omega):
        w = float(omega)
        if not (0.0 <= w <= 1.0):
            raise DomainError(f"point {omega!r} outside [0, 1]")
        return w

    def scalar_kernel(self, omega, theta):
        return _bridge_kernel(omega, theta)

    def kernel(self, omega, theta):
        w, t = self.check_point(omega), self.check_point(theta)
        return np.array([[_bridge_kernel(w, t)]])

    def kernel_apply(self, omega, anchors, coefs):
        w = self.check_point(omega)
        return _bridge_kernel(w, anchors) @ coefs

    def uniform_bound(self):
        # max of w (1 - w) on [0, 1]
        return 0.25

    def _require_basis(self):
        if self.basis is None:
            raise RepresentationError("BrownianBridge built without n_quad has no spectral basis")
        return self.basis

    @property
    def spectral_dim(self):
        return self._require_basis().dim

    def eigensystem(self):
        return Eigensystem(self._require_basis().lambdas, self.uniform_bound())

    def features(self, omega):
        w = self.check_point(omega)
        return self._require_basis().features(w)[:, None]


class MultiplicativeKernel(FeatureMap):
    """Separable operator kernel ``K(w, t) = k(w, t) T`` with ``Y = R^d``.

    Spectral modes are products of scalar modes and eigenvectors of ``T``,
    ordered by decreasing eigenvalue ``lambda_k * tau_j``.
    """

    def __init__(self, scalar, T):
        T = np.atleast_2d(np.asarray(T, dtype=np.float64))
        if T.shape[0] != T.shape[1] or not np.allclose(T, T.T, rtol=0, atol=1e-14):
            raise ParameterError("T must be a symmetric square matrix")
        tau, tvec = la.eigh(T)
        if np.any(tau <= 0):
            raise ParameterError("T must have strictly positive eigenvalues")
        self.scalar = scalar
        self.T = T
        self.output_dim = T.shape[0]
        self._tau = tau
        self._tvec = tvec
        self._order = None
        if getattr(scalar, "basis", None) is not None:
            prod = np.outer(scalar.basis.lambdas, tau).ravel()
            self._order = np.argsort(prod, kind="stable")[::-1]
            self._lambdas = prod[self._order]

    def __repr__(self):
        return f"MultiplicativeKernel({self.scalar!r}, d={self.output_dim})"

    def check_point(self, omega):
        return self.scalar.check_point(omega)

    def kernel(self, omega, theta):
        return self.scalar.kernel(omega, theta)[0, 0] * self.T

    def kernel_apply(self, omega, anchors, coefs):
        return self.T @ self.scalar.kernel_apply(omega, anchors, coefs)

    def uniform_bound(self):
        return self.scalar.uniform_bound() * float(self._tau[-1])

    def _require_basis(self):
        if self._order is None:
            raise RepresentationError("scalar kernel has no spectral basis attached")

    @property
    def spectral_dim(self):
        self._require_basis()
        return self._lambdas.size

    def eigensystem(self):
        self._require_basis()
        return Eigensystem(self._lambdas, self.uniform_bound())

    def combine(self, scalar_features):
        """Lift scalar feature rows ``(..., n_s)`` to ``(..., spectral_dim, d)``."""
        self._require_basis()
        # row (k, j) of R_w is f_k(w) sqrt(tau_j) t_j^T
        block = (np.sqrt(self._tau)[:, None] * self._tvec.T)  # (d_T, d)
        full = scalar_features[..., :, None, None] * block
        shape = scalar_features.shape[:-1] + (-1, self.output_dim)
        return full.reshape(shape)[..., self._order, :]

    def features(self, omega):
        self._require_basis()
        return self.combine(self.scalar.features(omega)[:, 0])


# Operations ==================================================================
def _as_y(fmap, y):
    y = np.atleast_1d(np.asarray(y, dtype=np.float64)).ravel()
    if y.size != fmap.output_dim:
        raise RepresentationError(f"y has dimension {y.size}, expected {fmap.output_dim}")
    return y


def eval_feature_adjoint(fmap, omega, v):
    """Evaluate ``f_v(omega) = R_omega^* v``; returns an ``(output_dim,)`` array."""
    if isinstance(v, SpectralVector):
        if isinstance(fmap, ConsMap):
            i = fmap.check_point(omega)
            if v.dim != fmap.dim:
                raise RepresentationError(f"vector has {v.dim} modes, map has {fmap.dim}")
            return v.coeffs[i - 1 : i].copy()
        fmap.check_point(omega)
        phi = fmap.features(omega)
        if v.dim != phi.shape[0]:
            raise RepresentationError(f"vector has {v.dim} modes, map has {phi.shape[0]}")
        return phi.T @ v.coeffs
    if isinstance(v, DualVector):
        if v.output_dim != fmap.output_dim:
            raise RepresentationError("dual vector output dimension does not match map")
        if v.size == 0:
            fmap.check_point(omega)
            return np.zeros(fmap.output_dim)
        return np.asarray(fmap.kernel_apply(omega, v.anchors, v.coefs), dtype=np.float64)
    raise RepresentationError(f"unsupported vector type {type(v).__name__}")


def apply_feature(fmap, omega, y, spectral=None):
    """Return ``R_omega y``.

    ``ConsMap`` always yields a spectral vector. Kernel maps yield a single
    anchor dual vector unless ``spectral=True``, which requires an attached
    spectral basis.
    """
    y = _as_y(fmap, y)
    if spectral is None:
        spectral = not fmap.is_kernel
    if spectral:
        if isinstance(fmap, ConsMap):
            i = fmap.check_point(omega)
            coeffs = np.zeros(fmap.dim)
            coeffs[i - 1] = y[0]
            return SpectralVector(coeffs)
        fmap.check_point(omega)
        return SpectralVector(fmap.features(omega) @ y)
    if not fmap.is_kernel:
        raise RepresentationError("ConsMap iterates are kept in spectral form only")
    w = fmap.check_point(omega)
    return DualVector([w], y[None, :], fmap.output_dim)


def kernel_eval(fmap, omega, theta):
    """Operator kernel ``K(omega, theta) = R_omega^* R_theta``."""
    return fmap.kernel(omega, theta)


def uniform_bound(fmap):
    """Constant ``Lambda`` with ``||R_omega||^2 <= Lambda`` for every point."""
    return fmap.uniform_bound()


def _spectral_coeffs(eig, v):
    if not isinstance(v, SpectralVector):
        raise RepresentationError("operation requires a spectral representation")
    if v.dim != eig.dim:
        raise RepresentationError(f"vector has {v.dim} modes, eigensystem has {eig.dim}")
    return v.coeffs


def covariance_apply(eig, v):
    """Apply the covariance operator: ``(P v)_k = lambda_k v_k``."""
    return SpectralVector(eig.lambdas * _spectral_coeffs(eig, v))


def smoothness_norm_sq(eig, v, s):
    """Squared smoothness norm ``sum_k lambda_k^{-s} v_k^2``."""
    c = _spectral_coeffs(eig, v)
    if s == 0:
        return float(np.sum(c * c))
    return float(np.sum(eig.lambdas ** (-s) * c * c))


def smoothness_norm(eig, v, s):
    """Norm of ``v`` in the smoothness space of order ``s``; ``s = 0`` is the V norm."""
    return float(np.sqrt(smoothness_norm_sq(eig, v, s)))


def to_spectral(fmap, v):
    """Convert a dual vector to spectral coordinates (requires a basis)."""
    if isinstance(v, SpectralVector):
        return v
    coeffs = np.zeros(fmap.spectral_dim)
    for w, c in zip(v.anchors, v.coefs):
        coeffs += fmap.features(w) @ c
    return SpectralVector(coeffs)


def dual_inner(fmap, v, w):
    """Inner product ``(v, w)_V`` of two dual vectors via the kernel."""
    total = 0.0
    for a, c in zip(v.anchors, v.coefs):
        total += float(c @ fmap.kernel_apply(a, w.anchors, w.coefs))
    return total
