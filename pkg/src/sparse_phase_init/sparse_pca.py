"""Sparse leading-eigenvector solvers: truncated power method and a support-restricted
Rayleigh quotient iteration (GRQI), plus the plain power method used by baselines.

All ties (largest entries, largest diagonal) are broken toward the lowest index.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpcaConfig:
    s: int
    max_iters: int = 100
    deflation: float = 0.2
    solver: Literal["tpower", "grqi"] = "grqi"
    convergence_tol: float = 1e-8

    def __post_init__(self):
        if self.s < 1:
            raise ValueError(f"sparsity budget must be >= 1, got {self.s}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if not (0 <= self.deflation < 1):
            raise ValueError(f"deflation must lie in [0, 1), got {self.deflation}")
        if self.solver not in ("tpower", "grqi"):
            raise ValueError(f"unknown SPCA solver {self.solver!r}")


@dataclass
class SpcaResult:
    direction: np.ndarray
    objective: float
    iters_used: int
    converged: bool
    degenerate: bool = False
    objective_trace: list[float] | None = None


class PowerResult(NamedTuple):
    vector: np.ndarray
    degenerate: bool


class _Dense:
    """Adapter so plain symmetric arrays can be used wherever an operator is expected."""

    def __init__(self, M):
        self.M = np.asarray(M, dtype=np.float64)
        self.n = self.M.shape[0]

    def apply(self, w):
        return self.M @ w

    def quadratic_form(self, w):
        return float(w @ (self.M @ w))

    def diagonal(self):
        return np.diag(self.M).copy()

    def column(self, j):
        return self.M[:, j].copy()

    def submatrix(self, idx):
        return self.M[np.ix_(idx, idx)]

    @property
    def is_zero(self):
        return not np.any(self.M)


def as_operator(op):
    return _Dense(op) if isinstance(op, np.ndarray) else op


def top_s_indices(v: np.ndarray, s: int) -> np.ndarray:
    """Indices of the ``s`` largest-magnitude entries, ties to the lowest index, sorted."""
    order = np.argsort(-np.abs(v), kind="stable")
    return np.sort(order[:s])


def truncate(v: np.ndarray, s: int) -> np.ndarray:
    out = np.zeros_like(v)
    idx = top_s_indices(v, s)
    out[idx] = v[idx]
    return out


def _close(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    return min(np.linalg.norm(a - b), np.linalg.norm(a + b)) < tol


def start_vector(op) -> PowerResult:
    """Normalized column of the operator at its largest diagonal entry."""
    op = as_operator(op)
    diag = op.diagonal()
    n = diag.shape[0]
    j = int(np.argmax(diag))
    col = op.column(j)
    nrm = np.linalg.norm(col)
    if nrm == 0 or not np.isfinite(nrm):
        e1 = np.zeros(n)
        e1[0] = 1.0
        return PowerResult(e1, True)
    return PowerResult(col / nrm, False)


def tpower(op, cfg: SpcaConfig, start: np.ndarray, track: bool = False) -> SpcaResult:
    """Truncated power method: ``w <- normalize(truncate_s(V w))``."""
    op = as_operator(op)
    w = np.asarray(start, dtype=np.float64)
    w = w / np.linalg.norm(w)
    trace = [] if track else None
    for it in range(1, cfg.max_iters + 1):
        v = truncate(op.apply(w), cfg.s)
        nrm = np.linalg.norm(v)
        if nrm == 0 or not np.isfinite(nrm):
            w = truncate(w, cfg.s)
            w = w / np.linalg.norm(w)
            return SpcaResult(w, op.quadratic_form(w), it, False, True, trace)
        w_new = v / nrm
        if track:
            trace.append(op.quadratic_form(w_new))
        done = _close(w_new, w, cfg.convergence_tol)
        w = w_new
        if done:
            return SpcaResult(w, op.quadratic_form(w), it, True, False, trace)
    return SpcaResult(w, op.quadratic_form(w), cfg.max_iters, False, False, trace)


def grqi(op, cfg: SpcaConfig, start: np.ndarray) -> SpcaResult:
    """Rayleigh quotient iteration on the current support, then support re-selection.

    Each step solves ``(V_SS - theta I) h = w_S`` with ``theta`` the current Rayleigh
    quotient, then keeps the ``s`` largest entries of
    ``(1 - deflation) * h + deflation * V h / ||V h||``.
    """
    op = as_operator(op)
    s, d = cfg.s, cfg.deflation
    w = np.asarray(start, dtype=np.float64)
    w = truncate(w, s)
    nrm = np.linalg.norm(w)
    if nrm == 0:
        return SpcaResult(w, 0.0, 0, False, True)
    w = w / nrm
    for it in range(1, cfg.max_iters + 1):
        S = top_s_indices(w, s)
        M = op.submatrix(S)
        wS = w[S]
        theta = float(wS @ M @ wS)
        try:
            h = np.linalg.solve(M - theta * np.eye(S.size), wS)
        except np.linalg.LinAlgError:
            log.debug("singular shifted system at iteration %d; taking a power step", it)
            h = M @ wS
        hn = np.linalg.norm(h)
        # the shifted solve may head for a lower eigenpair; fall back to ascent
        if hn == 0 or not np.isfinite(hn) or (h @ M @ h) / hn**2 < theta:
            h = M @ wS
            hn = np.linalg.norm(h)
            if hn == 0:
                return SpcaResult(w, op.quadratic_form(w), it, False, True)
        full = np.zeros_like(w)
        full[S] = h / hn
        Vw = op.apply(full)
        vn = np.linalg.norm(Vw)
        if vn == 0:
            return SpcaResult(full, 0.0, it, False, True)
        blend = (1 - d) * full + d * (Vw / vn)
        w_new = truncate(blend, s)
        w_new /= np.linalg.norm(w_new)
        done = _close(w_new, w, cfg.convergence_tol)
        w = w_new
        if done:
            return SpcaResult(w, op.quadratic_form(w), it, True)
    return SpcaResult(w, op.quadratic_form(w), cfg.max_iters, False)


def solve_spca(op, cfg: SpcaConfig, start: np.ndarray | None = None) -> SpcaResult:
    op = as_operator(op)
    if start is None:
        start, degenerate = start_vector(op)
        if degenerate:
            return SpcaResult(start, 0.0, 0, False, True)
    if cfg.solver == "tpower":
        return tpower(op, cfg, start)
    return grqi(op, cfg, start)


def power_method(op, iters: int, start: np.ndarray) -> PowerResult:
    """``iters`` normalized power steps from ``start`` with no sparsification."""
    op = as_operator(op)
    w = np.asarray(start, dtype=np.float64)
    w = w / np.linalg.norm(w)
    for _ in range(iters):
        v = op.apply(w)
        nrm = np.linalg.norm(v)
        if nrm == 0 or not np.isfinite(nrm):
            return PowerResult(w, True)
        w = v / nrm
    return PowerResult(w, False)


def exhaustive_spca(M: np.ndarray, s: int) -> tuple[float, np.ndarray]:
    """Best s-sparse unit vector by scanning every support; brute-force reference for small n."""
    from itertools import combinations

    M = np.asarray(M, dtype=np.float64)
    n = M.shape[0]
    best_val, best_vec = -np.inf, None
    for S in combinations(range(n), s):
        S = list(S)
        vals, vecs = np.linalg.eigh(M[np.ix_(S, S)])
        if vals[-1] > best_val:
            best_val = float(vals[-1])
            best_vec = np.zeros(n)
            best_vec[S] = vecs[:, -1]
    return best_val, best_vec
