import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparse_phase_init.selftest import oracle_instance, spca_oracle_fraction
from sparse_phase_init.sparse_pca import (
    SpcaConfig,
    exhaustive_spca,
    grqi,
    power_method,
    solve_spca,
    start_vector,
    top_s_indices,
    tpower,
    truncate,
)


def sign_dist(a, b):
    return min(np.linalg.norm(a - b), np.linalg.norm(a + b))


def test_config_validation():
    with pytest.raises(ValueError):
        SpcaConfig(s=0)
    with pytest.raises(ValueError):
        SpcaConfig(s=2, deflation=1.0)
    with pytest.raises(ValueError):
        SpcaConfig(s=2, max_iters=0)
    with pytest.raises(ValueError):
        SpcaConfig(s=2, solver="sdp")


def test_truncate_ties_lowest_index():
    v = np.array([1.0, -2.0, 2.0, 0.5, -2.0])
    assert list(top_s_indices(v, 2)) == [1, 2]
    np.testing.assert_array_equal(truncate(v, 2), [0, -2.0, 2.0, 0, 0])


def test_start_vector_diagonal():
    w, degenerate = start_vector(np.diag([1.0, 3.0, 2.0]))
    assert not degenerate
    np.testing.assert_array_equal(w, [0, 1, 0])


def test_start_vector_rank_one():
    a = np.array([0.3, -1.2, 0.5, 2.0])
    w, _ = start_vector(2.5 * np.outer(a, a))
    assert sign_dist(w, a / np.linalg.norm(a)) < 1e-14


def test_start_vector_tie_lowest_index():
    M = np.diag([2.0, 5.0, 5.0, 1.0])
    for _ in range(3):
        w, _ = start_vector(M)
        np.testing.assert_array_equal(w, [0, 1, 0, 0])


def test_start_vector_zero_operator():
    w, degenerate = start_vector(np.zeros((3, 3)))
    assert degenerate
    np.testing.assert_array_equal(w, [1, 0, 0])


def test_tpower_diagonal():
    start = np.array([1, 1, 1, 0, 0]) / np.sqrt(3)
    res = tpower(np.diag([3.0, 2, 1, 0, 0]), SpcaConfig(s=1, solver="tpower"), start)
    assert res.iters_used <= 3
    assert sign_dist(res.direction, np.eye(5)[0]) == 0
    assert res.objective == 3.0


def test_tpower_rank_one_one_step():
    v = np.zeros(10)
    v[[2, 5, 7]] = [0.6, -0.48, 0.64]
    start = np.ones(10) / np.sqrt(10)
    res = tpower(np.outer(v, v), SpcaConfig(s=3, solver="tpower", max_iters=1), start)
    assert sign_dist(res.direction, v) < 1e-15


def test_grqi_diagonal():
    start = np.array([0.9, 0.3, 0.3])
    res = grqi(np.diag([3.0, 2, 1]), SpcaConfig(s=1), start / np.linalg.norm(start))
    assert sign_dist(res.direction, np.eye(3)[0]) < 1e-12
    assert res.objective == pytest.approx(3.0)


def test_grqi_rank_one():
    v = np.zeros(12)
    v[[0, 4, 9, 10]] = [0.5, 0.5, -0.5, 0.5]
    M = np.outer(v, v)
    res = solve_spca(M, SpcaConfig(s=4))
    assert sign_dist(res.direction, v) < 1e-12


@pytest.mark.parametrize("solver", ["tpower", "grqi"])
def test_exhaustive_oracle_rate(solver):
    assert spca_oracle_fraction(solver) >= 0.8


def test_exhaustive_oracle_self_check():
    # with s = n the exhaustive oracle is the top eigenvalue
    M = oracle_instance(3)
    val, vec = exhaustive_spca(M, 8)
    assert val == pytest.approx(np.linalg.eigvalsh(M)[-1], rel=1e-12)


@pytest.mark.parametrize("solver", ["tpower", "grqi"])
@given(seed=st.integers(0, 5000), s=st.integers(1, 6))
@settings(max_examples=25, deadline=None)
def test_output_feasible(solver, seed, s):
    M = oracle_instance(seed, n=15, s=min(s, 3))
    res = solve_spca(M, SpcaConfig(s=s, solver=solver))
    assert abs(np.linalg.norm(res.direction) - 1) <= 1e-10
    assert np.count_nonzero(res.direction) <= s
    assert res.objective == pytest.approx(res.direction @ M @ res.direction, rel=1e-12, abs=1e-15)


@given(seed=st.integers(0, 5000))
@settings(max_examples=25, deadline=None)
def test_tpower_objective_monotone(seed):
    M = oracle_instance(seed, n=20)
    start, _ = start_vector(M)
    trace = tpower(M, SpcaConfig(s=4, solver="tpower"), start, track=True).objective_trace
    assert np.all(np.diff(trace) >= -1e-10)


@pytest.mark.parametrize("solver", ["tpower", "grqi"])
def test_scaling_equivariance(solver):
    M = oracle_instance(17, n=20)
    cfg = SpcaConfig(s=3, solver=solver)
    a = solve_spca(M, cfg)
    b = solve_spca(4.0 * M, cfg)  # power-of-two scaling is exact in floating point
    np.testing.assert_array_equal(a.direction, b.direction)
    assert b.objective == pytest.approx(4.0 * a.objective, rel=1e-14)


def test_fixed_point_sign_symmetric():
    M = oracle_instance(5, n=12)
    cfg = SpcaConfig(s=3, solver="tpower")
    w = solve_spca(M, cfg).direction
    again = tpower(M, cfg, -w)
    assert sign_dist(again.direction, w) < 1e-8


def test_tpower_zero_image_flagged():
    M = np.diag([1.0, 0.0, 0.0])
    res = tpower(M, SpcaConfig(s=1, solver="tpower"), np.array([0.0, 1.0, 0.0]))
    assert res.degenerate


def test_power_method_diagonal():
    w, degenerate = power_method(np.diag([2.0, 1.0]), 100, np.array([0.6, 0.8]))
    assert not degenerate
    assert sign_dist(w, np.array([1.0, 0.0])) < 1e-6


def test_power_method_identity_keeps_start():
    start = np.array([0.6, 0.0, 0.8])
    w, _ = power_method(np.eye(3), 100, start)
    np.testing.assert_allclose(w, start, rtol=0, atol=1e-15)


def test_power_method_matches_eigh():
    rng = np.random.default_rng(123)
    checked = 0
    while checked < 10:
        Q, _ = np.linalg.qr(rng.standard_normal((50, 50)))
        evals = np.sort(rng.uniform(0, 1, 50))
        evals[-1] = evals[-2] + 0.1 + rng.uniform(0, 0.5)  # gap >= 0.1
        M = (Q * evals) @ Q.T
        # 100 steps leave angle ~ ratio^100; use enough steps for the worst-case gap
        w, _ = power_method(M, 2000, np.ones(50) / np.sqrt(50))
        top = np.linalg.eigh(M)[1][:, -1]
        angle = np.arccos(min(1.0, abs(w @ top)))
        assert angle <= 1e-4
        checked += 1


def test_power_method_zero_image():
    w, degenerate = power_method(np.zeros((2, 2)), 5, np.array([1.0, 0.0]))
    assert degenerate
