import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pumbo.errors import ConfigError, IllConditioned
from pumbo.kernels import KernelSpec, kernel_matrix
from pumbo.local import JITTER_LADDER, eval_local, fit_local

# 2x2 Gaussian system, eps=2, r=0.3, f=(1,3), solved with mpmath at 40 digits
TWO_NODE_COEFFS = (-2.129632308968994716735248172342956570679,
                   4.485794045203655116258045371556216493361)


def test_single_node():
    m = fit_local([[0.4, 0.4]], [2.5], KernelSpec("gaussian", 3.0))
    np.testing.assert_array_equal(m.coeffs, [2.5])
    assert m.jitter_used == 0.0


def test_two_nodes_closed_form():
    m = fit_local([[0.0, 0.0], [0.3, 0.0]], [1.0, 3.0], KernelSpec("gaussian", 2.0))
    np.testing.assert_allclose(m.coeffs, TWO_NODE_COEFFS, rtol=1e-13)


def test_forty_nodes_matern_residual():
    rng = np.random.default_rng(0)
    x = rng.random((40, 2))
    f = np.sin(3 * x[:, 0]) + x[:, 1] ** 2
    spec = KernelSpec("matern", 5.0)
    m = fit_local(x, f, spec)
    k = kernel_matrix(spec, x, x) + m.jitter_used * np.eye(40)
    assert np.max(np.abs(k @ m.coeffs - f)) <= 1e-8 * (1 + np.max(np.abs(f)))


def test_interpolation_at_nodes():
    rng = np.random.default_rng(1)
    x = rng.random((30, 2))
    f = np.cos(4 * x[:, 0] * x[:, 1])
    m = fit_local(x, f, KernelSpec("wendland", 2.0))
    assert m.jitter_used == 0.0
    assert np.max(np.abs(eval_local(m, x) - f)) <= 1e-6 * (1 + np.max(np.abs(f)))


def test_empty_targets():
    m = fit_local([[0.1, 0.1]], [1.0], KernelSpec("gaussian", 1.0))
    assert eval_local(m, np.zeros((0, 2))).shape == (0,)


def test_single_node_prediction():
    m = fit_local([[0.0, 0.0]], [2.0], KernelSpec("gaussian", 3.0))
    r = 0.2
    assert eval_local(m, [[0.0, r]])[0] == pytest.approx(2 * np.exp(-9 * r * r), rel=1e-15)


def test_flat_gaussian_uses_jitter_within_ladder():
    x = np.random.default_rng(2).random((25, 2)) * 0.05
    f = x[:, 0] + x[:, 1]
    spec = KernelSpec("gaussian", 0.5)
    m = fit_local(x, f, spec)
    tau = np.trace(kernel_matrix(spec, x, x)) / 25
    assert m.jitter_used == 0.0 or 1e-12 * tau <= m.jitter_used <= 1e-6 * tau
    k = kernel_matrix(spec, x, x) + m.jitter_used * np.eye(25)
    assert np.max(np.abs(k @ m.coeffs - f)) <= 1e-8 * (1 + np.max(np.abs(f)))


def test_ill_conditioned_raises(monkeypatch):
    monkeypatch.setattr("pumbo.local.JITTER_LADDER", (0.0,))
    x = np.array([[0.0, 0.0], [1e-9, 0.0], [0.0, 1e-9]])
    with pytest.raises(IllConditioned):
        fit_local(x, [0.0, 1.0, -1.0], KernelSpec("gaussian", 1e-3))


def test_ladder_bounds():
    assert JITTER_LADDER[0] == 0.0
    assert JITTER_LADDER[1] == 1e-12 and JITTER_LADDER[-1] == pytest.approx(1e-6)


def test_bad_inputs():
    spec = KernelSpec("gaussian", 1.0)
    with pytest.raises(ConfigError):
        fit_local(np.zeros((0, 2)), [], spec)
    with pytest.raises(ConfigError):
        fit_local([[0, 0], [1, 1]], [1.0], spec)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 30), eps=st.floats(2.0, 20.0),
       family=st.sampled_from(["gaussian", "matern", "wendland"]))
def test_permutation_equivariance(seed, n, eps, family):
    rng = np.random.default_rng(seed)
    x = rng.random((n, 2))
    f = rng.standard_normal(n)
    t = rng.random((15, 2))
    spec = KernelSpec(family, eps)
    m1 = fit_local(x, f, spec)
    perm = rng.permutation(n)
    m2 = fit_local(x[perm], f[perm], spec)
    if m1.jitter_used == m2.jitter_used:
        scale = 1 + np.max(np.abs(m1.coeffs))
        np.testing.assert_allclose(eval_local(m1, t), eval_local(m2, t), rtol=0, atol=1e-12 * scale)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), alpha=st.floats(-1e3, 1e3).filter(lambda a: abs(a) > 1e-3))
def test_scaling_linearity(seed, alpha):
    rng = np.random.default_rng(seed)
    x = rng.random((20, 2))
    f = rng.standard_normal(20)
    t = rng.random((10, 2))
    spec = KernelSpec("matern", 6.0)
    p1 = eval_local(fit_local(x, f, spec), t)
    p2 = eval_local(fit_local(x, alpha * f, spec), t)
    np.testing.assert_allclose(p2, alpha * p1, rtol=1e-10, atol=1e-10 * abs(alpha) * np.max(np.abs(p1)))
