import math

import numpy as np
import pytest

from sparse_phase_init.generative import (
    amplitude_loss,
    brute_force_amplitude_min,
    build_latent_net,
    generative_spectral_init,
    linear_toy_instance,
    make_linear_generator,
    make_relu_generator,
    range_projection,
    sample_ball,
)
from sparse_phase_init.sparse_pca import power_method
from sparse_phase_init.spectral import build_truncated_operator


def sign_dist(a, b):
    return min(np.linalg.norm(a - b), np.linalg.norm(a + b))


def test_identity_embedding_lipschitz_one():
    B = np.vstack([np.eye(2), np.zeros((3, 2))])
    assert make_linear_generator(B).lipschitz_bound == pytest.approx(1.0)


def test_lipschitz_scales_with_matrix():
    B = np.random.default_rng(0).standard_normal((6, 2))
    L = make_linear_generator(B).lipschitz_bound
    assert make_linear_generator(3.5 * B).lipschitz_bound == pytest.approx(3.5 * L, rel=1e-12)


def test_lipschitz_matches_power_estimate():
    B = np.random.default_rng(1).standard_normal((20, 3))
    L = make_linear_generator(B).lipschitz_bound
    v, _ = power_method(B.T @ B, 500, np.ones(3) / math.sqrt(3))
    assert L == pytest.approx(math.sqrt(v @ B.T @ B @ v), abs=1e-6)


def test_zero_generator_rejected():
    with pytest.raises(ValueError):
        make_linear_generator(np.zeros((4, 2)))


def test_latent_ball_enforced():
    G = make_linear_generator(np.eye(2), r=1.0)
    with pytest.raises(ValueError):
        G(np.array([1.0, 1.0]))


def test_relu_generator_basics():
    G = make_relu_generator(np.eye(2), np.vstack([np.eye(2), np.zeros((2, 2))]))
    np.testing.assert_array_equal(G(np.array([0.3, 0.4])), [0.3, 0.4, 0, 0])
    np.testing.assert_array_equal(G(np.zeros(2)), np.zeros(4))


@pytest.mark.parametrize("maker", ["linear", "relu"])
def test_lipschitz_certificate_sampled(maker):
    rng = np.random.default_rng(2)
    if maker == "linear":
        G = make_linear_generator(rng.standard_normal((15, 3)))
    else:
        G = make_relu_generator(rng.standard_normal((8, 3)), rng.standard_normal((15, 8)))
    Z1 = sample_ball(rng, 3, 1.0, 10_000)
    Z2 = sample_ball(rng, 3, 1.0, 10_000)
    ratio = np.linalg.norm(G.evaluate(Z1) - G.evaluate(Z2), axis=1) / np.linalg.norm(Z1 - Z2, axis=1)
    assert ratio.max() <= G.lipschitz_bound * (1 + 1e-12)


def test_one_dimensional_net():
    G = make_linear_generator(np.ones((3, 1)), r=1.0)
    net = build_latent_net(G, 0.5)
    np.testing.assert_allclose(net.points[:, 0], [-1, -0.5, 0, 0.5, 1])


@pytest.mark.parametrize("k", [1, 2, 3])
def test_net_covers_ball(k):
    G = make_linear_generator(np.eye(k), r=1.0)
    delta = 0.2 if k < 3 else 0.3
    net = build_latent_net(G, delta)
    Z = sample_ball(np.random.default_rng(k), k, 1.0, 10_000)
    d2 = ((Z[:, None, :] - net.points[None, :, :]) ** 2).sum(-1)
    assert np.sqrt(d2.min(axis=1)).max() <= delta
    assert np.all(np.linalg.norm(net.points, axis=1) <= 1 + 1e-12)


def test_net_point_count_matches_area():
    # disk area / cell area with the pitch target delta/sqrt(2): pi / 0.005 = 628
    G = make_linear_generator(np.eye(2), r=1.0)
    net = build_latent_net(G, 0.1)
    expected = math.pi / (0.1 / math.sqrt(2)) ** 2
    assert 0.8 * expected <= len(net) <= 1.2 * expected


def test_net_guards():
    with pytest.raises(ValueError, match="cap"):
        build_latent_net(make_linear_generator(np.eye(4)), 0.5)
    with pytest.raises(ValueError, match="grid points"):
        build_latent_net(make_linear_generator(np.eye(3), r=10.0), 0.01)
    with pytest.raises(ValueError):
        build_latent_net(make_linear_generator(np.eye(2)), 0.0)


def _planted(seed, m=100):
    rng = np.random.default_rng(seed)
    G = make_linear_generator(rng.standard_normal((10, 2)) / math.sqrt(10))
    net = build_latent_net(G, 0.1)
    x = net.images[len(net) // 3]
    A = rng.standard_normal((m, 10))
    return G, net, x, A


def test_amplitude_min_planted_net_point():
    G, net, x, A = _planted(3)
    fit = brute_force_amplitude_min(G, net, A, np.abs(A @ x))
    assert fit.objective <= 1e-20
    assert sign_dist(fit.q, x) == 0.0
    assert fit.tau == 0.0


def test_amplitude_min_is_exhaustive():
    G, net, x, A = _planted(4)
    y = np.abs(A @ x) + 0.05 * np.random.default_rng(0).standard_normal(A.shape[0])
    fit = brute_force_amplitude_min(G, net, A, y)
    assert np.all(amplitude_loss(A, y, net.images) >= fit.objective)


def test_amplitude_landscape_sign_invariant():
    G, net, x, A = _planted(5)
    np.testing.assert_array_equal(amplitude_loss(A, np.abs(A @ x), net.images),
                                  amplitude_loss(A, np.abs(A @ -x), net.images))


def test_range_projection_cases():
    G, net, x, _ = _planted(6)
    np.testing.assert_array_equal(range_projection(G, net, x), x)
    p0 = range_projection(G, net, np.zeros(10))
    assert np.linalg.norm(p0) == np.linalg.norm(net.images, axis=1).min()


def test_range_projection_matches_closed_form():
    rng = np.random.default_rng(7)
    B = rng.standard_normal((12, 2)) / math.sqrt(12)
    G = make_linear_generator(B)
    net = build_latent_net(G, 0.05)
    for _ in range(10):
        x = rng.standard_normal(12) * 0.3
        # least-squares latent, clipped to the unit ball (exact for the ball-constrained problem only
        # when the unconstrained optimum is inside; the tolerance L * delta absorbs the rest)
        z = np.linalg.lstsq(B, x, rcond=None)[0]
        if np.linalg.norm(z) > 1:
            continue
        p = range_projection(G, net, x)
        assert np.linalg.norm(p - B @ z) <= G.lipschitz_bound * net.delta


def test_spectral_init_one_dimensional_range():
    xbar = np.random.default_rng(8).standard_normal(15)
    xbar /= np.linalg.norm(xbar)
    G = make_linear_generator(xbar[:, None])
    net = build_latent_net(G, 0.1)
    A = np.random.default_rng(9).standard_normal((200, 15))
    res = generative_spectral_init(G, net, A, np.abs(A @ (2 * xbar)))
    assert sign_dist(res.xhat, xbar) <= 1e-14
    assert np.array_equal(res.x0, res.lam * res.xhat)


def test_spectral_init_excludes_small_images():
    G = make_linear_generator(np.eye(2))
    net = build_latent_net(G, 0.5)
    A = np.random.default_rng(0).standard_normal((40, 2))
    res = generative_spectral_init(G, net, A, np.abs(A @ np.array([0.6, 0.8])), r_min=0.6)
    assert res.candidates == int(np.sum(np.linalg.norm(net.images, axis=1) > 0.6))
    with pytest.raises(ValueError):
        generative_spectral_init(G, net, A, np.abs(A[:, 0]), r_min=10.0)


def test_spectral_init_is_net_optimal():
    inst = linear_toy_instance(20, 2, 150, np.random.default_rng(10))
    net = build_latent_net(inst.G, 0.1)
    res = generative_spectral_init(inst.G, net, inst.A, inst.y)
    op = build_truncated_operator(inst.A, inst.y, representation="dense")
    norms = np.linalg.norm(net.images, axis=1)
    cand = net.images[norms > res.r_min] / norms[norms > res.r_min, None]
    best = max(op.quadratic_form(c) for c in cand)
    assert op.quadratic_form(res.xhat) >= best - 1e-12


def test_more_measurements_help():
    errs = {50: [], 400: []}
    for t in range(20):
        inst = linear_toy_instance(20, 2, 400, np.random.default_rng([11, t]))
        net = build_latent_net(inst.G, 0.05)
        xbar = inst.x / np.linalg.norm(inst.x)
        for m in errs:
            r = generative_spectral_init(inst.G, net, inst.A[:m], inst.y[:m])
            errs[m].append(sign_dist(r.xhat, xbar))
    assert np.mean(errs[400]) <= np.mean(errs[50])


def test_sample_ball_shell():
    Z = sample_ball(np.random.default_rng(0), 2, 1.0, 1000, r_lo=0.5)
    r = np.linalg.norm(Z, axis=1)
    assert r.min() >= 0.5 and r.max() <= 1.0
