import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparse_phase_init.initializers import pri_spca
from sparse_phase_init.refinement import (
    RefinementConfig,
    copram_refine,
    cosamp,
    phase_signs,
)
from sparse_phase_init.signals import make_instance, trial_seeds


def rel_err(est, x):
    return min(np.linalg.norm(x - est), np.linalg.norm(x + est)) / np.linalg.norm(x)


def test_cosamp_exact_recovery():
    # m = 200 >= 4 s log n = 4 * 5 * log(400) = 120
    rng = np.random.default_rng(0)
    for trial in range(10):
        A = rng.standard_normal((200, 400)) / math.sqrt(200)
        support = rng.choice(400, 5, replace=False)
        x = np.zeros(400)
        x[support] = rng.standard_normal(5)
        b = A @ x
        oracle = np.zeros(400)
        oracle[support] = np.linalg.lstsq(A[:, support], b, rcond=None)[0]
        got = cosamp(A, b, 5, inner_iters=50, tol=1e-12)
        assert np.linalg.norm(got - oracle) <= 1e-6


def test_cosamp_full_support_is_least_squares():
    rng = np.random.default_rng(1)
    A = rng.standard_normal((30, 6))
    b = rng.standard_normal(30)
    got = cosamp(A, b, 6)
    np.testing.assert_allclose(got, np.linalg.lstsq(A, b, rcond=None)[0], rtol=1e-10)


def test_cosamp_zero_rhs():
    A = np.random.default_rng(2).standard_normal((10, 20))
    np.testing.assert_array_equal(cosamp(A, np.zeros(10), 3), np.zeros(20))


def test_cosamp_rank_deficient_is_finite():
    A = np.ones((6, 8))
    out = cosamp(A, np.ones(6), 2)
    assert np.all(np.isfinite(out))
    assert np.count_nonzero(out) <= 2


@given(seed=st.integers(0, 10_000), s=st.integers(1, 8))
@settings(max_examples=30, deadline=None)
def test_cosamp_never_worse_than_warm_start(seed, s):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((40, 60))
    b = rng.standard_normal(40)
    warm = np.zeros(60)
    warm[rng.choice(60, s, replace=False)] = rng.standard_normal(s)
    out = cosamp(A, b, s, warm_start=warm)
    assert np.count_nonzero(out) <= s
    assert np.linalg.norm(b - A @ out) <= np.linalg.norm(b - A @ warm) + 1e-9


def test_sign_convention():
    np.testing.assert_array_equal(phase_signs(np.array([-1.0, 0.0, 2.0])), [-1, 1, 1])


def test_refine_fixed_point_at_truth():
    x, meas = make_instance(300, 5, 200, 0.0, trial_seeds(3))
    out = copram_refine(meas.A, meas.y, x.values, RefinementConfig(s=5, T=10))
    assert np.linalg.norm(out.x - x.values) <= 1e-6


def test_refine_fixed_point_at_negated_truth():
    x, meas = make_instance(300, 5, 200, 0.0, trial_seeds(3))
    out = copram_refine(meas.A, meas.y, -x.values, RefinementConfig(s=5, T=10))
    assert np.linalg.norm(out.x + x.values) <= 1e-6


def test_refine_sign_pair_symmetry():
    x, meas = make_instance(200, 4, 150, 0.0, trial_seeds(4))
    x0 = pri_spca(meas.A, meas.y, 4).x0
    a = copram_refine(meas.A, meas.y, x0, RefinementConfig(s=4, T=20)).x
    b = copram_refine(meas.A, meas.y, -x0, RefinementConfig(s=4, T=20)).x
    np.testing.assert_allclose(a, -b, rtol=0, atol=1e-12)


def test_refine_residual_monotone_and_sparse():
    x, meas = make_instance(400, 8, 250, 0.0, trial_seeds(5))
    A, y = meas.A, meas.y
    xt = pri_spca(A, y, 8).x0
    for _ in range(15):
        p = phase_signs(A @ xt)
        before = np.linalg.norm(p * y - A @ xt)
        nxt = copram_refine(A, y, xt, RefinementConfig(s=8, T=1)).x
        assert np.linalg.norm(p * y - A @ nxt) <= before + 1e-6
        assert np.count_nonzero(nxt) <= 8
        xt = nxt


def test_refine_from_random_start_is_sparse_after_first_step():
    x, meas = make_instance(100, 3, 80, 0.0, trial_seeds(6))
    x0 = np.random.default_rng(0).standard_normal(100)
    out = copram_refine(meas.A, meas.y, x0, RefinementConfig(s=3, T=3), keep_history=True)
    assert all(np.count_nonzero(xt) <= 3 for _, xt in out.history)
    times = [t for t, _ in out.history]
    assert times == sorted(times)


def test_refine_rejects_zero_start():
    with pytest.raises(ValueError):
        copram_refine(np.ones((3, 2)), np.ones(3), np.zeros(2), RefinementConfig(s=1))


def test_refine_recovers_at_desk_scale():
    # smaller sibling of the success-rate criterion: n = 1000, s = 10, m = 500
    wins = 0
    for t in range(50):
        x, meas = make_instance(1000, 10, 500, 0.0, trial_seeds(7, t))
        x0 = pri_spca(meas.A, meas.y, 10).x0
        out = copram_refine(meas.A, meas.y, x0, RefinementConfig(s=10))
        wins += rel_err(out.x, x.values) < 0.01
    assert wins > 25


def test_config_validation():
    with pytest.raises(ValueError):
        RefinementConfig(s=0)
    with pytest.raises(ValueError):
        RefinementConfig(s=3, T=0)
