"""Toy Lipschitz generative models and exhaustive latent-net optimizers.

Everything here is brute force over a grid net of a small latent ball (k <= 3),
so the reported optimizers are exact over the net.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .spectral import TruncationBand, _entries, build_truncated_operator

MAX_LATENT_DIM = 3
MAX_NET_POINTS = 10_000_000
R_MIN_FRACTION = 1e-3


@dataclass(frozen=True)
class GenerativeModel:
    k: int
    r: float
    fn: Callable[[np.ndarray], np.ndarray]  # maps a (N, k) batch to (N, n)
    lipschitz_bound: float
    n: int
    r_min: float | None = None

    def evaluate(self, Z) -> np.ndarray:
        Z = np.atleast_2d(np.asarray(Z, dtype=np.float64))
        if Z.shape[1] != self.k:
            raise ValueError(f"latent vectors must have dimension {self.k}")
        if np.any(np.linalg.norm(Z, axis=1) > self.r * (1 + 1e-12)):
            raise ValueError(f"latent vector outside the ball of radius {self.r}")
        return self.fn(Z)

    def __call__(self, z) -> np.ndarray:
        return self.evaluate(np.asarray(z, dtype=np.float64)[None, :])[0]


def make_linear_generator(B, r: float = 1.0, eps_z: float | None = None) -> GenerativeModel:
    """``G(z) = B z`` with exact Lipschitz constant ``||B||_2``."""
    B = np.array(B, dtype=np.float64)
    if B.ndim != 2:
        raise ValueError("B must be a matrix")
    n, k = B.shape
    if not n >= k >= 1:
        raise ValueError(f"need n >= k >= 1, got B of shape {B.shape}")
    svals = np.linalg.svd(B, compute_uv=False)
    if svals[0] == 0:
        raise ValueError("generator matrix is zero")
    eps_z = R_MIN_FRACTION * r if eps_z is None else eps_z
    B.setflags(write=False)
    return GenerativeModel(k, r, lambda Z: Z @ B.T, float(svals[0]), n, float(svals[-1] * eps_z))


def make_relu_generator(W1, W2, r: float = 1.0) -> GenerativeModel:
    """Two-layer ReLU network without offsets, ``G(z) = W2 max(W1 z, 0)``."""
    W1 = np.array(W1, dtype=np.float64)
    W2 = np.array(W2, dtype=np.float64)
    h, k = W1.shape
    if h < 1 or W2.shape[1] != h:
        raise ValueError(f"incompatible layer shapes {W1.shape} and {W2.shape}")
    bound = float(np.linalg.norm(W1, 2) * np.linalg.norm(W2, 2))
    return GenerativeModel(k, r, lambda Z: np.maximum(Z @ W1.T, 0.0) @ W2.T, bound, W2.shape[0])


@dataclass(frozen=True)
class LatentNet:
    delta: float
    points: np.ndarray  # (N, k)
    images: np.ndarray  # (N, n)
    pitch: float

    def __len__(self):
        return self.points.shape[0]


def _grid_axis(r: float, delta: float, k: int) -> np.ndarray:
    target = delta / math.sqrt(k)
    count = math.ceil(2 * r / target) + 1
    return np.linspace(-r, r, count)


def estimate_net_size(k: int, r: float, delta: float) -> int:
    return len(_grid_axis(r, delta, k)) ** k


def build_latent_net(G: GenerativeModel, delta: float) -> LatentNet:
    """Axis grid of pitch at most ``delta / sqrt(k)``, projected onto the latent ball.

    Grid points within half a cell diagonal of the ball are scaled onto its
    boundary. Every ball point then lies within ``delta / 2`` of a net point.
    """
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    k, r = G.k, G.r
    if k > MAX_LATENT_DIM:
        raise ValueError(f"latent dimension {k} exceeds the brute-force cap of {MAX_LATENT_DIM}")
    size = estimate_net_size(k, r, delta)
    if size > MAX_NET_POINTS:
        raise ValueError(f"net would have about {size} grid points (limit {MAX_NET_POINTS})")
    axis = _grid_axis(r, delta, k)
    pitch = float(axis[1] - axis[0]) if axis.size > 1 else 2 * r
    grid = np.stack(np.meshgrid(*([axis] * k), indexing="ij"), axis=-1).reshape(-1, k)
    norms = np.linalg.norm(grid, axis=1)
    half_diag = pitch * math.sqrt(k) / 2
    grid = grid[norms < r + half_diag]
    norms = np.linalg.norm(grid, axis=1)
    outside = norms > r
    grid[outside] *= (r / norms[outside])[:, None]
    points = np.unique(np.round(grid, 12), axis=0)
    points = np.clip(points, -r, r)
    return LatentNet(delta, points, G.evaluate(points), pitch)


class AmplitudeFit(NamedTuple):
    q: np.ndarray
    tau: float
    index: int
    objective: float
    image_spacing: float


def amplitude_loss(A, y, W) -> np.ndarray:
    """``||y - |A w|||^2`` for every row ``w`` of ``W``."""
    A = _entries(A)
    W = np.atleast_2d(W)
    out = np.empty(W.shape[0])
    for lo in range(0, W.shape[0], 4096):
        AW = np.abs(W[lo:lo + 4096] @ A.T)
        out[lo:lo + 4096] = np.sum((y[None, :] - AW) ** 2, axis=1)
    return out


def brute_force_amplitude_min(G: GenerativeModel, net: LatentNet, A, y) -> AmplitudeFit:
    """Exact minimizer of the amplitude loss over the net image.

    ``tau`` is zero relative to the net; ``image_spacing = L * delta`` bounds how far
    the net image is from any range point.
    """
    if len(net) == 0:
        raise ValueError("empty latent net")
    y = np.asarray(y, dtype=np.float64)
    loss = amplitude_loss(A, y, net.images)
    i = int(np.argmin(loss))
    return AmplitudeFit(net.images[i].copy(), 0.0, i, float(loss[i]), G.lipschitz_bound * net.delta)


def range_projection(G: GenerativeModel, net: LatentNet, x) -> np.ndarray:
    if len(net) == 0:
        raise ValueError("empty latent net")
    d = np.linalg.norm(net.images - np.asarray(x, dtype=np.float64)[None, :], axis=1)
    return net.images[int(np.argmin(d))].copy()


class GenSpectralInit(NamedTuple):
    xhat: np.ndarray
    x0: np.ndarray
    lam: float
    candidates: int
    r_min: float


def generative_spectral_init(G: GenerativeModel, net: LatentNet, A, y,
                             band: TruncationBand = TruncationBand(),
                             r_min: float | None = None) -> GenSpectralInit:
    """Maximize ``w^T V w`` over normalized net images with ``||G(z)|| > r_min``."""
    norms = np.linalg.norm(net.images, axis=1)
    if r_min is None:
        r_min = G.r_min if G.r_min is not None else R_MIN_FRACTION * float(np.median(norms))
    keep = norms > r_min
    if not np.any(keep):
        raise ValueError(f"every net point has ||G(z)|| <= r_min = {r_min}")
    cand = net.images[keep] / norms[keep, None]
    op = build_truncated_operator(A, y, band, representation="matrix_free")
    scores = np.empty(cand.shape[0])
    for lo in range(0, cand.shape[0], 4096):
        proj = cand[lo:lo + 4096] @ op.rows.T
        scores[lo:lo + 4096] = (proj**2) @ op.row_weights
    i = int(np.argmax(scores))
    xhat = cand[i].copy()
    return GenSpectralInit(xhat, op.lam * xhat, op.lam, int(cand.shape[0]), float(r_min))


def sample_ball(rng: np.random.Generator, k: int, r: float, size: int, r_lo: float = 0.0) -> np.ndarray:
    """Uniform draws from the shell ``r_lo <= ||z|| <= r`` (the full ball when ``r_lo = 0``)."""
    d = rng.standard_normal((size, k))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    u = rng.random(size)
    radius = (r_lo**k + u * (r**k - r_lo**k)) ** (1 / k)
    return d * radius[:, None]


@dataclass(frozen=True)
class ToyInstance:
    G: GenerativeModel
    z_true: np.ndarray
    x: np.ndarray
    A: np.ndarray
    y: np.ndarray


def linear_toy_instance(n: int, k: int, m: int, rng: np.random.Generator, r: float = 1.0,
                        sigma: float = 0.0) -> ToyInstance:
    """Random linear generator ``B / sqrt(n)`` with a signal drawn from the outer half-shell."""
    B = rng.standard_normal((n, k)) / math.sqrt(n)
    G = make_linear_generator(B, r)
    z = sample_ball(rng, k, r, 1, r_lo=0.5 * r)[0]
    x = G(z)
    A = rng.standard_normal((m, n))
    eta = sigma * np.linalg.norm(x) * rng.standard_normal(m)
    y = np.abs(A @ x) + eta
    return ToyInstance(G, z, x, A, y)
