"""Alternating-minimization refinement: fix signs, then sparse least squares via CoSaMP."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .sparse_pca import top_s_indices
from .spectral import _entries

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RefinementConfig:
    s: int
    T: int = 100
    inner_iters: int = 25
    inner_tol: float = 1e-6

    def __post_init__(self):
        if self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")
        if self.s < 1:
            raise ValueError(f"s must be >= 1, got {self.s}")


@dataclass
class RefineResult:
    x: np.ndarray
    iters: int
    degenerate: bool = False
    # (seconds since refinement start, iterate) after each outer step
    history: list[tuple[float, np.ndarray]] = field(default_factory=list)


def _prune(x: np.ndarray, s: int) -> np.ndarray:
    out = np.zeros_like(x)
    idx = top_s_indices(x, s)
    out[idx] = x[idx]
    return out


def _lstsq(A_T: np.ndarray, b: np.ndarray) -> np.ndarray:
    coef, _, rank, _ = np.linalg.lstsq(A_T, b, rcond=None)
    if rank < A_T.shape[1]:
        log.debug("rank-deficient least squares (%d < %d); using minimum-norm solution",
                  rank, A_T.shape[1])
    return coef


def cosamp(A, b, s: int, inner_iters: int = 25, tol: float = 1e-6,
           warm_start: np.ndarray | None = None) -> np.ndarray:
    """s-sparse approximate solution of ``min ||b - A x||``.

    The warm start is pruned to its ``s`` largest entries. An iteration that does
    not reduce the residual is discarded and the loop stops, so the returned
    residual never exceeds that of the pruned warm start.
    """
    A = _entries(A)
    b = np.asarray(b, dtype=np.float64)
    m, n = A.shape
    s = min(s, n)
    x = np.zeros(n) if warm_start is None else _prune(np.asarray(warm_start, dtype=np.float64), s)
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return np.zeros(n)
    r = b - A @ x
    rnorm = np.linalg.norm(r)
    for _ in range(inner_iters):
        if rnorm <= tol * bnorm:
            break
        proxy = A.T @ r
        merged = np.union1d(top_s_indices(proxy, min(2 * s, n)), np.flatnonzero(x))
        coef = _lstsq(A[:, merged], b)
        keep = top_s_indices(coef, s)
        x_new = np.zeros(n)
        x_new[merged[keep]] = coef[keep]
        r_new = b - A @ x_new
        rn_new = np.linalg.norm(r_new)
        if rn_new >= rnorm:
            break
        x, r, rnorm = x_new, r_new, rn_new
    return x


def phase_signs(Ax: np.ndarray) -> np.ndarray:
    return np.where(Ax >= 0, 1.0, -1.0)


def copram_refine(A, y, x0, cfg: RefinementConfig, keep_history: bool = False) -> RefineResult:
    """``T`` rounds of ``p = sign(A x)``, ``x = cosamp(A, p * y, s)`` warm-started at ``x``."""
    A = _entries(A)
    y = np.asarray(y, dtype=np.float64)
    x = np.asarray(x0, dtype=np.float64).copy()
    if not np.all(np.isfinite(x)) or not np.any(x):
        raise ValueError("refinement needs a finite nonzero starting vector")
    t0 = time.perf_counter()
    history = []
    for t in range(1, cfg.T + 1):
        Ax = A @ x
        if not np.any(Ax):
            return RefineResult(x, t - 1, True, history)
        p = phase_signs(Ax)
        x_new = cosamp(A, p * y, cfg.s, cfg.inner_iters, cfg.inner_tol, warm_start=x)
        fixed = np.array_equal(x_new, x)
        x = x_new
        if keep_history:
            history.append((time.perf_counter() - t0, x.copy()))
        if fixed:
            return RefineResult(x, t, False, history)
    return RefineResult(x, cfg.T, False, history)
