import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from pumbo.bo import (DEGENERATE, EPS_MIN, OK, BoConfig, bo_search, expected_improvement,
                      propose_next, search_box)
from pumbo.errors import ConfigError, SubdomainSearchFailed
from pumbo.gp import gp_fit
from pumbo.kernels import eval_rbf, KernelSpec
from pumbo.spatial import PointSet, build_index


def ei_quadrature(mu, sigma, best, xi):
    """Integrate (g - best - xi) N(g; mu, sigma^2) over g > best + xi."""
    lo = best + xi
    dens = lambda g: (g - lo) * math.exp(-0.5 * ((g - mu) / sigma) ** 2) / (math.sqrt(2 * math.pi) * sigma)
    a = max(lo, mu - 12 * sigma)
    b = max(a, mu + 12 * sigma)
    if b <= a:
        return 0.0
    val, _ = quad(dens, a, b, epsabs=1e-13, epsrel=1e-12, limit=200,
                  points=[mu] if a < mu < b else None)
    return val


def test_ei_zero_std():
    assert expected_improvement(1.0, 0.0, 0.0, 0.15) == 0.0
    assert expected_improvement(-5.0, 0.0, 3.0, 0.0) == 0.0


def test_ei_at_z_zero():
    assert expected_improvement(0.65, 1.0, 0.5, 0.15) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-15)


def test_ei_negative_std_rejected():
    with pytest.raises(ValueError):
        expected_improvement(0.0, -1.0, 0.0)


@settings(max_examples=100, deadline=None)
@given(mu=st.floats(-3, 3), sigma=st.floats(1e-3, 3), best=st.floats(-3, 3), xi=st.floats(0, 1))
def test_ei_matches_quadrature(mu, sigma, best, xi):
    got = expected_improvement(mu, sigma, best, xi)
    assert got >= 0
    assert got == pytest.approx(ei_quadrature(mu, sigma, best, xi), abs=1e-6)


def test_ei_vectorized():
    mu = np.array([0.0, 1.0, -1.0])
    out = expected_improvement(mu, np.array([1.0, 0.0, 2.0]), 0.0, 0.1)
    assert out.shape == (3,) and out[1] == 0.0


# -- proposals -----------------------------------------------------------------

BOX = np.array([[EPS_MIN, 20.0], [0.05, 0.1]])


def fitted_model(seed=0, s=6):
    rng = np.random.default_rng(seed)
    th = rng.uniform(BOX[:, 0], BOX[:, 1], size=(s, 2))
    return gp_fit(th, -np.abs(rng.standard_normal(s)), BOX)


def test_proposal_maximizes_ei_over_drawn_candidates():
    model = fitted_model()
    cfg = BoConfig(n_candidates=256)
    best = float(np.max(model.y * model.y_std + model.y_mean))
    theta = propose_next(model, BOX, best, cfg, np.random.default_rng(5))
    cand = np.random.default_rng(5).uniform(BOX[:, 0], BOX[:, 1], size=(256, 2))
    mean, std = model.predict_standardized(cand)
    ei = expected_improvement(mean, std, (best - model.y_mean) / model.y_std, cfg.xi)
    np.testing.assert_array_equal(theta, cand[np.argmax(ei)])
    assert BOX[0, 0] <= theta[0] <= BOX[0, 1] and BOX[1, 0] <= theta[1] <= BOX[1, 1]


def test_degenerate_ei_picks_first_candidate(monkeypatch):
    model = fitted_model()
    monkeypatch.setattr(type(model), "predict_standardized",
                        lambda self, t: (np.zeros(len(t)), np.zeros(len(t))))
    theta = propose_next(model, BOX, 0.0, BoConfig(n_candidates=64), np.random.default_rng(3))
    cand = np.random.default_rng(3).uniform(BOX[:, 0], BOX[:, 1], size=(64, 2))
    np.testing.assert_array_equal(theta, cand[0])


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_proposals_stay_in_box(seed):
    model = fitted_model(seed)
    theta = propose_next(model, BOX, 0.0, BoConfig(n_candidates=128), np.random.default_rng(seed))
    assert BOX[0, 0] <= theta[0] <= BOX[0, 1]
    assert BOX[1, 0] <= theta[1] <= BOX[1, 1]


def test_config_validation():
    for bad in ({"nstart": 0}, {"niter": -1}, {"split_fraction": 1.0}, {"eps_max": 0.0}, {"xi": -0.1}):
        with pytest.raises(ConfigError):
            BoConfig(**bad)


# -- full search ----------------------------------------------------------------

CENTER = np.array([0.5, 0.5])


@pytest.fixture(scope="module")
def bump_data():
    """200 points sampled from a Gaussian RBF bump with eps0 = 8 at the center."""
    rng = np.random.default_rng(21)
    pts = 0.5 + rng.uniform(-0.15, 0.15, size=(200, 2))
    vals = eval_rbf(KernelSpec("gaussian", 8.0), np.linalg.norm(pts - CENTER, axis=1))
    ps = PointSet(pts, vals)
    return ps, build_index(ps)


def test_exhausts_budget_when_tau_unreachable(bump_data):
    ps, idx = bump_data
    cfg = BoConfig(tau=0.0, seed=1)
    _, trace = bo_search(ps, CENTER, 0.06, cfg, idx)
    assert len(trace) == cfg.nstart + cfg.niter


def test_stops_after_first_trial_when_tau_trivial(bump_data):
    ps, idx = bump_data
    _, trace = bo_search(ps, CENTER, 0.06, BoConfig(tau=10.0, seed=1), idx)
    assert len(trace) == 1


def test_incumbent_beats_warmup(bump_data):
    ps, idx = bump_data
    cfg = BoConfig(tau=0.0, seed=2)
    theta, trace = bo_search(ps, CENTER, 0.06, cfg, idx)
    g = np.array(trace.g)
    ok = np.array(trace.status) == OK
    assert np.all(g[trace.best] >= g[:cfg.nstart][ok[:cfg.nstart]])
    assert np.all(np.diff(trace.incumbent()) >= 0)
    assert tuple(trace.thetas[trace.best]) == theta
    assert search_box(0.06, cfg)[1, 0] <= theta[1] <= 0.12


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 1000), tau=st.sampled_from([0.0, 1e-6, 1e-4, 1e-2]))
def test_budget_early_stop_and_determinism(bump_data, seed, tau):
    ps, idx = bump_data
    cfg = BoConfig(tau=tau, seed=seed, niter=10, n_candidates=256)
    theta, trace = bo_search(ps, CENTER, 0.06, cfg, idx, subdomain=3)
    assert 1 <= len(trace) <= cfg.budget
    if len(trace) < cfg.budget:
        assert -trace.g[trace.best] <= tau
    inc = trace.incumbent()
    assert np.all(np.diff(inc[np.isfinite(inc)]) >= 0)
    theta2, trace2 = bo_search(ps, CENTER, 0.06, cfg, idx, subdomain=3)
    assert theta2 == theta and trace2.g == trace.g


def test_small_balls_are_degenerate_and_fail():
    pts = np.array([[0.5, 0.5], [0.52, 0.5], [0.9, 0.9]])
    ps = PointSet(pts, [1.0, 2.0, 3.0])
    with pytest.raises(SubdomainSearchFailed) as info:
        bo_search(ps, CENTER, 0.03, BoConfig(nstart=2, niter=1), build_index(ps))
    assert set(info.value.trace.status) == {DEGENERATE}
    assert len(info.value.trace) == 3
