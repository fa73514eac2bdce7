import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from online_rkhs import (
    BrownianBridge,
    ConsMap,
    DomainError,
    DualVector,
    Eigensystem,
    MultiplicativeKernel,
    ParameterError,
    RepresentationError,
    SpectralVector,
    apply_feature,
    covariance_apply,
    eval_feature_adjoint,
    kernel_eval,
    smoothness_norm,
    uniform_bound,
)
from online_rkhs.hilbert import dual_inner, to_spectral

unit = st.floats(0.0, 1.0, allow_nan=False)


@pytest.fixture(scope="module")
def bridge():
    return BrownianBridge(400)


# evaluation -------------------------------------------------------------------
def test_zero_vector_evaluates_to_zero():
    fmap = ConsMap(5)
    for i in range(1, 6):
        assert eval_feature_adjoint(fmap, i, SpectralVector.zeros(5))[0] == 0.0


def test_unit_coordinate_orthonormality():
    fmap = ConsMap(5)
    e3 = SpectralVector(np.eye(5)[2])
    assert eval_feature_adjoint(fmap, 3, e3)[0] == 1.0
    assert eval_feature_adjoint(fmap, 2, e3)[0] == 0.0


def test_bridge_single_anchor():
    v = DualVector([0.5], [[1.0]], 1)
    got = eval_feature_adjoint(BrownianBridge(), 0.25, v)[0]
    assert got == pytest.approx(0.125, abs=1e-15)


def test_eval_errors():
    with pytest.raises(DomainError):
        eval_feature_adjoint(ConsMap(3), 0, SpectralVector.zeros(3))
    with pytest.raises(DomainError):
        eval_feature_adjoint(ConsMap(3), 4, SpectralVector.zeros(3))
    with pytest.raises(DomainError):
        eval_feature_adjoint(BrownianBridge(), 1.5, DualVector.empty(1))
    with pytest.raises(RepresentationError):
        eval_feature_adjoint(ConsMap(3), 1, SpectralVector.zeros(4))


# apply_feature ----------------------------------------------------------------
def test_apply_feature_cons():
    v = apply_feature(ConsMap(4), 2, 5.0)
    np.testing.assert_array_equal(v.coeffs, [0.0, 5.0, 0.0, 0.0])


def test_apply_feature_zero_is_zero(bridge):
    assert not np.any(apply_feature(ConsMap(4), 3, 0.0).coeffs)
    d = apply_feature(bridge, 0.3, 0.0)
    assert isinstance(d, DualVector) and not np.any(d.coefs)
    assert not np.any(apply_feature(bridge, 0.3, 0.0, spectral=True).coeffs)


def test_apply_feature_dimension_mismatch():
    with pytest.raises(RepresentationError):
        apply_feature(ConsMap(4), 1, [1.0, 2.0])


# kernels ----------------------------------------------------------------------
def test_bridge_kernel_value():
    assert kernel_eval(BrownianBridge(), 0.3, 0.7)[0, 0] == pytest.approx(0.09, abs=1e-15)


def test_multiplicative_kernel_value():
    K = kernel_eval(MultiplicativeKernel(BrownianBridge(), np.diag([1.0, 2.0])), 0.3, 0.7)
    np.testing.assert_allclose(K, 0.09 * np.diag([1.0, 2.0]), atol=1e-15)


def test_multiplicative_rejects_non_spd():
    with pytest.raises(ParameterError):
        MultiplicativeKernel(BrownianBridge(), [[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(ParameterError):
        MultiplicativeKernel(BrownianBridge(), [[1.0, 0.5], [0.0, 1.0]])


@settings(max_examples=200, deadline=None)
@given(unit, unit)
def test_bridge_kernel_symmetric_and_bounded(w, t):
    fmap = BrownianBridge()
    k = kernel_eval(fmap, w, t)[0, 0]
    assert k == kernel_eval(fmap, t, w)[0, 0]
    assert 0.0 <= k <= np.sqrt(kernel_eval(fmap, w, w)[0, 0] * kernel_eval(fmap, t, t)[0, 0]) + 1e-16
    assert kernel_eval(fmap, w, w)[0, 0] <= uniform_bound(fmap)


@settings(max_examples=50, deadline=None)
@given(unit, unit)
def test_kernel_feature_consistency_bridge(w, t):
    # K(w, t) = <R_w, R_t> holds exactly on the quadrature nodes
    fmap = _BRIDGE
    nodes = fmap.basis.nodes
    a, b = nodes[int(w * (nodes.size - 1))], nodes[int(t * (nodes.size - 1))]
    via_features = float(fmap.features(a)[:, 0] @ fmap.features(b)[:, 0])
    assert abs(via_features - kernel_eval(fmap, a, b)[0, 0]) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(unit, unit)
def test_kernel_feature_consistency_vector(w, t):
    fmap = _VECTOR
    nodes = fmap.scalar.basis.nodes
    a, b = nodes[int(w * (nodes.size - 1))], nodes[int(t * (nodes.size - 1))]
    Fa, Fb = fmap.features(a), fmap.features(b)
    np.testing.assert_allclose(Fa.T @ Fb, kernel_eval(fmap, a, b), atol=1e-12)


def test_kernel_feature_consistency_cons():
    fmap = ConsMap(6)
    for i in range(1, 7):
        for j in range(1, 7):
            assert fmap.features(i)[:, 0] @ fmap.features(j)[:, 0] == kernel_eval(fmap, i, j)[0, 0]


_BRIDGE = BrownianBridge(300)
_VECTOR = MultiplicativeKernel(BrownianBridge(200), [[2.0, 0.5], [0.5, 1.0]])


def test_dual_and_spectral_agree(bridge):
    rng = np.random.default_rng(3)
    nodes = bridge.basis.nodes
    anchors = nodes[rng.integers(0, nodes.size, 8)]
    v = DualVector(anchors, rng.normal(size=(8, 1)), 1)
    sv = to_spectral(bridge, v)
    for w in nodes[::37]:
        assert abs(eval_feature_adjoint(bridge, w, v)[0]
                   - eval_feature_adjoint(bridge, w, sv)[0]) <= 1e-12
    assert abs(dual_inner(bridge, v, v) - sv.coeffs @ sv.coeffs) <= 1e-12


# covariance and smoothness ----------------------------------------------------
def test_covariance_apply():
    eig = Eigensystem([0.5, 0.25], 1.0)
    np.testing.assert_array_equal(covariance_apply(eig, SpectralVector([1.0, 1.0])).coeffs,
                                  [0.5, 0.25])
    assert not np.any(covariance_apply(eig, SpectralVector.zeros(2)).coeffs)
    with pytest.raises(RepresentationError):
        covariance_apply(eig, DualVector.empty(1))


def test_smoothness_norm_examples():
    eig = Eigensystem([0.5, 0.25], 1.0)
    assert smoothness_norm(eig, SpectralVector([1.0, 0.0]), 1) == pytest.approx(np.sqrt(2),
                                                                                  rel=1e-15)
    v = SpectralVector([3.0, 4.0])
    assert smoothness_norm(eig, v, 0) == 5.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3),
       st.floats(0.0, 2.0), st.floats(0.0, 2.0))
def test_smoothness_norm_monotone_in_s(c, s1, s2):
    eig = Eigensystem([0.9, 0.3, 0.01], 1.0)
    v = SpectralVector(c)
    lo, hi = sorted((s1, s2))
    # lambda_k <= 1 makes the norms increase with s
    assert smoothness_norm(eig, v, lo) <= smoothness_norm(eig, v, hi) * (1 + 1e-12) + 1e-300


def test_eigensystem_validation():
    with pytest.raises(ParameterError):
        Eigensystem([0.1, 0.2], 1.0)
    with pytest.raises(ParameterError):
        Eigensystem([2.0, 0.2], 1.0)
    with pytest.raises(ParameterError):
        Eigensystem([0.5, 0.0], 1.0)


# uniform bounds and spectra ---------------------------------------------------
def test_uniform_bounds():
    assert uniform_bound(ConsMap(3)) == 1.0
    assert uniform_bound(BrownianBridge()) == 0.25
    assert uniform_bound(MultiplicativeKernel(BrownianBridge(), np.diag([1.0, 2.0]))) == 0.5


def test_bridge_spectrum_matches_sine_series():
    lam = BrownianBridge(2000).eigensystem().lambdas
    k = np.arange(1, 6)
    np.testing.assert_allclose(lam[:5], (k * np.pi) ** -2.0, rtol=1e-2)
    assert abs(lam[0] - np.pi ** -2) <= 0.01 * np.pi ** -2


def test_vector_spectrum_is_product():
    fmap = MultiplicativeKernel(BrownianBridge(200), np.diag([1.0, 2.0]))
    lam = fmap.eigensystem().lambdas
    scalar = fmap.scalar.basis.lambdas
    expected = np.sort(np.concatenate([scalar, 2 * scalar]))[::-1]
    np.testing.assert_allclose(lam, expected, rtol=1e-14)


def test_trace_identity_on_nodes(bridge):
    # E||R_w||^2 over the nodes equals the trace of the covariance operator
    feats = bridge.basis.node_features
    assert np.mean(np.sum(feats ** 2, axis=1)) == pytest.approx(np.sum(bridge.basis.lambdas),
                                                                rel=1e-10)
