"""Norm estimate, truncated weighted spectral operator and its population coefficients.

The operator is ``V = (1/m) sum_i y_i a_i a_i^T 1{l*lam < y_i < u*lam}`` with
``lam = sqrt(pi/2) * mean(y)``. Rows outside the band carry zero weight, so only
the active rows are kept for both the dense and the matrix-free representation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import ndtr

from .signals import SensingMatrix

DENSE_MAX_N = 2048

Representation = Literal["auto", "dense", "matrix_free"]


@dataclass(frozen=True)
class TruncationBand:
    l: float = 1.0
    u: float = 5.0

    def __post_init__(self):
        if not (0 <= self.l < self.u):
            raise ValueError(f"truncation band needs 0 <= l < u, got l={self.l}, u={self.u}")


@dataclass(frozen=True)
class PopulationCoefficients:
    gamma0: float
    beta0: float
    gamma_check: float
    beta_check: float


def _entries(A) -> np.ndarray:
    return A.entries if isinstance(A, SensingMatrix) else np.asarray(A, dtype=np.float64)


def estimate_norm(y) -> float:
    """``sqrt(pi/2) * mean(y)``; unbiased for ``||x||`` under noiseless Gaussian sensing."""
    y = np.asarray(y, dtype=np.float64)
    if y.size == 0:
        raise ValueError("cannot estimate norm from empty measurements")
    return math.sqrt(math.pi / 2) * float(np.mean(y))


class SpectralOperator:
    """Symmetric operator ``sum_i w_i a_i a_i^T`` over the rows with nonzero weight.

    ``weights`` always has length m; ``rows``/``row_weights`` hold only the active rows.
    """

    def __init__(self, A: np.ndarray, weights: np.ndarray, representation: Representation = "auto",
                 lam: float | None = None, band: TruncationBand | None = None):
        self.weights = np.asarray(weights, dtype=np.float64)
        self.weights.setflags(write=False)
        active = np.flatnonzero(self.weights)
        self.rows = np.ascontiguousarray(A[active])
        self.row_weights = self.weights[active]
        self.n = A.shape[1]
        self.lam = lam
        self.band = band
        if representation == "auto":
            representation = "dense" if self.n <= DENSE_MAX_N else "matrix_free"
        if representation not in ("dense", "matrix_free"):
            raise ValueError(f"unknown representation {representation!r}")
        self.representation = representation
        self._dense = None
        if representation == "dense":
            V = self.rows.T @ (self.row_weights[:, None] * self.rows)
            self._dense = 0.5 * (V + V.T)
            self._dense.setflags(write=False)

    @property
    def active_count(self) -> int:
        return int(self.row_weights.size)

    @property
    def is_zero(self) -> bool:
        return self.active_count == 0

    def _check(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=np.float64)
        if w.shape[0] != self.n:
            raise ValueError(f"vector has length {w.shape[0]}, operator acts on R^{self.n}")
        return w

    def apply(self, w) -> np.ndarray:
        w = self._check(w)
        if self._dense is not None:
            return self._dense @ w
        return self.rows.T @ (self.row_weights * (self.rows @ w))

    def quadratic_form(self, w) -> float:
        w = self._check(w)
        if self._dense is not None:
            return float(w @ (self._dense @ w))
        return float(self.row_weights @ (self.rows @ w) ** 2)

    def diagonal(self) -> np.ndarray:
        if self._dense is not None:
            return np.diag(self._dense).copy()
        return self.row_weights @ self.rows**2

    def column(self, j: int) -> np.ndarray:
        if self._dense is not None:
            return self._dense[:, j].copy()
        return self.rows.T @ (self.row_weights * self.rows[:, j])

    def submatrix(self, idx) -> np.ndarray:
        idx = np.asarray(idx)
        if self._dense is not None:
            return self._dense[np.ix_(idx, idx)]
        R = self.rows[:, idx]
        M = R.T @ (self.row_weights[:, None] * R)
        return 0.5 * (M + M.T)

    def to_dense(self) -> np.ndarray:
        if self._dense is not None:
            return np.array(self._dense)
        V = self.rows.T @ (self.row_weights[:, None] * self.rows)
        return 0.5 * (V + V.T)

    def __repr__(self):
        return (f"SpectralOperator(n={self.n}, active={self.active_count}, "
                f"representation={self.representation!r})")


def truncation_weights(y, lam: float, band: TruncationBand) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    m = y.shape[0]
    keep = (band.l * lam < y) & (y < band.u * lam)
    return np.where(keep, y / m, 0.0)


def build_truncated_operator(A, y, band: TruncationBand = TruncationBand(),
                             representation: Representation = "auto") -> SpectralOperator:
    A = _entries(A)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (A.shape[0],):
        raise ValueError(f"y has shape {y.shape}, expected ({A.shape[0]},)")
    lam = estimate_norm(y)
    return SpectralOperator(A, truncation_weights(y, lam, band), representation, lam=lam, band=band)


def build_untruncated_operator(A, y, representation: Representation = "auto") -> SpectralOperator:
    """All weights ``y_i / m``, negative ones included."""
    A = _entries(A)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (A.shape[0],):
        raise ValueError(f"y has shape {y.shape}, expected ({A.shape[0]},)")
    return SpectralOperator(A, y / y.shape[0], representation, lam=estimate_norm(y))


def apply(op: SpectralOperator, w) -> np.ndarray:
    return op.apply(w)


def quadratic_form(op: SpectralOperator, w) -> float:
    return op.quadratic_form(w)


def _phi(t: float) -> float:
    return 0.0 if math.isinf(t) else math.exp(-0.5 * t * t) / math.sqrt(2 * math.pi)


def _t_phi(t: float, power: int) -> float:
    # t**power * phi(t), zero at infinity
    return 0.0 if math.isinf(t) else t**power * _phi(t)


def population_coefficients(band: TruncationBand | tuple[float, float]) -> PopulationCoefficients:
    """Gaussian moments restricted to ``l < |g| < u``, in closed form.

    gamma0 = E|g|1, beta0 = E|g|^3 1 - gamma0, gamma_check = E 1, beta_check = E g^2 1 - gamma_check.
    A degenerate band ``l == u`` gives all zeros.
    """
    l, u = (band.l, band.u) if isinstance(band, TruncationBand) else band
    if l > u:
        raise ValueError(f"need l <= u, got l={l}, u={u}")
    if l < 0:
        raise ValueError(f"need l >= 0, got {l}")
    if l == u:
        return PopulationCoefficients(0.0, 0.0, 0.0, 0.0)
    mass = 2.0 * (float(ndtr(u)) - float(ndtr(l)))
    m1 = 2.0 * (_phi(l) - _phi(u))
    # integral of t^2 phi = -t phi + Phi ; of t^3 phi = -(t^2 + 2) phi
    m2 = 2.0 * (_t_phi(l, 1) - _t_phi(u, 1)) + mass
    m3 = 2.0 * ((_t_phi(l, 2) + 2 * _phi(l)) - (_t_phi(u, 2) + 2 * _phi(u)))
    return PopulationCoefficients(gamma0=m1, beta0=m3 - m1, gamma_check=mass, beta_check=m2 - mass)


def population_matrix(x, band: TruncationBand = TruncationBand()) -> np.ndarray:
    """Expected operator ``||x|| (gamma0 I + beta0 xbar xbar^T)`` for noiseless data with lam = ||x||."""
    x = np.asarray(x, dtype=np.float64)
    nx = np.linalg.norm(x)
    xbar = x / nx
    c = population_coefficients(band)
    return nx * (c.gamma0 * np.eye(x.size) + c.beta0 * np.outer(xbar, xbar))
