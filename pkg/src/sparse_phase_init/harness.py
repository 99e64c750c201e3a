"""Experiment driver: seeded paired trials over parameter grids, CSV output, summaries.

Every method at a given (grid point, trial) sees the same signal, sensing matrix
and noise; the ``checksum`` column lets a reader verify that.
"""
from __future__ import annotations

import csv
import hashlib
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Iterable

import numpy as np

from .generative import (
    brute_force_amplitude_min,
    build_latent_net,
    generative_spectral_init,
    linear_toy_instance,
)
from .initializers import METHODS, run_initializer
from .refinement import RefinementConfig, copram_refine
from .signals import make_instance, trial_seeds
from .sparse_pca import SpcaConfig
from .spectral import TruncationBand

log = logging.getLogger(__name__)

KINDS = ("vary_m", "vary_s", "vary_sigma", "success_rate", "time_budget", "generative_toy")
KIND_CODES = {kind: i for i, kind in enumerate(KINDS)}
SUCCESS_THRESHOLD = 0.01
GENERATIVE_METHODS = ("amplitude_min", "gen_spectral")
QUADRATIC_ONLY = ("thwf",)


def _frange(start, stop, step):
    count = int(round((stop - start) / step)) + 1
    return [round(start + i * step, 10) for i in range(count)]


DEFAULTS = {
    "vary_m": dict(n=1000, s_grid=[10, 20], m_grid=list(range(100, 3001, 100)), sigma_grid=[0.0],
                   repeats=1, methods=["pri_spca", "pri_spca_nt", "sparta", "copram", "thwf"]),
    "vary_s": dict(n=1000, s_grid=list(range(5, 51, 5)), m_grid=[1000, 2000], sigma_grid=[0.0],
                   repeats=1, methods=["pri_spca", "pri_spca_nt", "sparta", "copram", "thwf"]),
    "vary_sigma": dict(n=1000, s_grid=[10, 20], m_grid=[3000], sigma_grid=_frange(0.1, 1.0, 0.1),
                       repeats=1, methods=["pri_spca", "pri_spca_nt", "sparta", "copram"]),
    "success_rate": dict(n=1000, s_grid=[10, 20], m_grid=list(range(100, 1001, 50)), sigma_grid=[0.0],
                         repeats=10, refine=True,
                         methods=["pri_spca", "pri_spca_nt", "sparta", "copram", "thwf", "random"]),
    "time_budget": dict(n=1000, s_grid=[20], m_grid=[500], sigma_grid=[0.1, 0.2], repeats=10,
                        refine=True, methods=["pri_spca", "pri_spca_nt", "sparta", "copram", "random"]),
    "generative_toy": dict(n=20, s_grid=[2], m_grid=[50, 100, 200, 400], sigma_grid=[0.0], repeats=1,
                           methods=list(GENERATIVE_METHODS)),
}


@dataclass
class ExperimentConfig:
    """One sweep. For ``generative_toy`` the ``s`` grid holds the latent dimension k."""

    kind: str
    n: int | None = None
    s_grid: list[int] | None = None
    m_grid: list[int] | None = None
    sigma_grid: list[float] | None = None
    methods: list[str] | None = None
    trials: int = 50
    repeats: int | None = None
    master_seed: int = 0
    band: TruncationBand = field(default_factory=TruncationBand)
    solver: str = "grqi"
    refine: bool | None = None
    refine_T: int = 100
    budgets: list[float] = field(default_factory=lambda: _frange(0.1, 0.5, 0.02))
    latent_delta: float = 0.05
    latent_radius: float = 1.0
    workers: int = 1
    output_path: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        for key, value in DEFAULTS[self.kind].items():
            if getattr(self, key, None) is None:
                setattr(self, key, list(value) if isinstance(value, list) else value)
        if self.refine is None:
            self.refine = False
        if self.kind in ("success_rate", "time_budget"):
            self.refine = True
        for name in ("s_grid", "m_grid", "sigma_grid", "methods"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be nonempty")
        if self.trials < 1 or self.repeats < 1:
            raise ValueError("trials and repeats must be >= 1")
        allowed = GENERATIVE_METHODS if self.kind == "generative_toy" else METHODS
        bad = [mth for mth in self.methods if mth not in allowed]
        if bad:
            raise ValueError(f"methods {bad} not available for {self.kind}")
        if any(sig < 0 for sig in self.sigma_grid):
            raise ValueError("sigma must be nonnegative")
        if self.kind != "generative_toy" and any(s > self.n for s in self.s_grid):
            raise ValueError("sparsity cannot exceed n")
        SpcaConfig(s=1, solver=self.solver)

    @property
    def total_trials(self) -> int:
        return self.trials * self.repeats


@dataclass
class TrialRecord:
    kind: str
    n: int
    m: int
    s: int
    sigma: float
    method: str
    trial_index: int
    repeat: int
    relative_error: float
    success: bool | None
    init_time: float
    refine_time: float
    seed: int
    checksum: str
    budget: float | None = None
    init_error: float | None = None


TIMING_COLUMNS = ("init_time", "refine_time")


def relative_error(estimate, x) -> float:
    """``min(||x - est||, ||x + est||) / ||x||``; ``x`` may be a SparseSignal or an array."""
    x = np.asarray(getattr(x, "values", x), dtype=np.float64)
    est = np.asarray(estimate, dtype=np.float64)
    nx = np.linalg.norm(x)
    if nx == 0:
        raise ValueError("relative error undefined for a zero signal")
    return float(min(np.linalg.norm(x - est), np.linalg.norm(x + est)) / nx)


def data_checksum(*arrays) -> str:
    h = hashlib.blake2b(digest_size=8)
    for a in arrays:
        h.update(np.ascontiguousarray(a, dtype=np.float64).tobytes())
    return h.hexdigest()


def grid_points(cfg: ExperimentConfig) -> list[tuple[int, int, float]]:
    """(m, s, sigma) tuples in sweep order."""
    if cfg.kind == "vary_s":
        return [(m, s, sig) for m in cfg.m_grid for s in cfg.s_grid for sig in cfg.sigma_grid]
    return [(m, s, sig) for s in cfg.s_grid for sig in cfg.sigma_grid for m in cfg.m_grid]


def method_supported(method: str, sigma: float) -> bool:
    return not (method in QUADRATIC_ONLY and sigma > 0)


def skipped_combinations(cfg: ExperimentConfig) -> list[tuple[int, int, float, str]]:
    return [(m, s, sig, mth) for (m, s, sig) in grid_points(cfg) for mth in cfg.methods
            if not method_supported(mth, sig)]


def _seed_for(cfg: ExperimentConfig, m: int, s: int, sigma: float, trial: int) -> int:
    keys = (KIND_CODES[cfg.kind], cfg.n, m, s, int(round(sigma * 1e9)), trial)
    return int(np.random.SeedSequence([cfg.master_seed, *keys]).generate_state(1, np.uint64)[0])


def _sparse_trial(cfg: ExperimentConfig, m: int, s: int, sigma: float, trial: int) -> list[TrialRecord]:
    seed = _seed_for(cfg, m, s, sigma, trial)
    seeds = trial_seeds(seed)
    x, meas = make_instance(cfg.n, s, m, sigma, seeds)
    A, y = meas.A, meas.y
    checksum = data_checksum(x.values, A, y)
    spca_cfg = SpcaConfig(s=s, solver=cfg.solver)
    ref_cfg = RefinementConfig(s=s, T=cfg.refine_T)
    repeat = trial // cfg.trials
    out = []
    for method in cfg.methods:
        if not method_supported(method, sigma):
            continue
        rng = np.random.default_rng([seed, 1])
        t0 = time.perf_counter()
        init = run_initializer(method, A, y, s, cfg.band, spca_cfg, rng=rng)
        init_time = time.perf_counter() - t0
        init_err = relative_error(init.x0, x)
        base = dict(kind=cfg.kind, n=cfg.n, m=m, s=s, sigma=sigma, method=method, trial_index=trial,
                    repeat=repeat, seed=seed, checksum=checksum, init_time=init_time)
        if not cfg.refine:
            out.append(TrialRecord(relative_error=init_err, success=None, refine_time=0.0, **base))
            continue
        t1 = time.perf_counter()
        ref = copram_refine(A, y, init.x0, ref_cfg, keep_history=cfg.kind == "time_budget")
        refine_time = time.perf_counter() - t1
        if cfg.kind != "time_budget":
            err = relative_error(ref.x, x)
            out.append(TrialRecord(relative_error=err, success=err < SUCCESS_THRESHOLD,
                                   refine_time=refine_time, init_error=init_err, **base))
            continue
        # iteration 0 is the initializer output itself
        times = np.array([init_time] + [init_time + t for t, _ in ref.history])
        errors = [init_err] + [relative_error(xt, x) for _, xt in ref.history]
        for budget in cfg.budgets:
            j = int(np.argmin(np.abs(times - budget)))
            out.append(TrialRecord(relative_error=errors[j], success=errors[j] < SUCCESS_THRESHOLD,
                                   refine_time=float(times[j] - init_time), budget=budget,
                                   init_error=init_err, **base))
    return out


def _generative_trial(cfg: ExperimentConfig, m: int, k: int, sigma: float, trial: int) -> list[TrialRecord]:
    seed = _seed_for(cfg, m, k, sigma, trial)
    inst = linear_toy_instance(cfg.n, k, m, np.random.default_rng(seed), cfg.latent_radius, sigma)
    t0 = time.perf_counter()
    net = build_latent_net(inst.G, cfg.latent_delta)
    net_time = time.perf_counter() - t0
    checksum = data_checksum(inst.x, inst.A, inst.y)
    xbar = inst.x / np.linalg.norm(inst.x)
    out = []
    for method in cfg.methods:
        t0 = time.perf_counter()
        if method == "amplitude_min":
            err = relative_error(brute_force_amplitude_min(inst.G, net, inst.A, inst.y).q, inst.x)
        else:
            err = relative_error(generative_spectral_init(inst.G, net, inst.A, inst.y, cfg.band).xhat, xbar)
        out.append(TrialRecord(kind=cfg.kind, n=cfg.n, m=m, s=k, sigma=sigma, method=method,
                               trial_index=trial, repeat=trial // cfg.trials, relative_error=err,
                               success=None, init_time=net_time + time.perf_counter() - t0,
                               refine_time=0.0, seed=seed, checksum=checksum))
    return out


def _run_task(args) -> list[TrialRecord]:
    cfg, m, s, sigma, trial = args
    if cfg.kind == "generative_toy":
        return _generative_trial(cfg, m, s, sigma, trial)
    return _sparse_trial(cfg, m, s, sigma, trial)


def run_experiment(cfg: ExperimentConfig, progress=None) -> list[TrialRecord]:
    """All trial records, ordered by (grid point, method, trial) regardless of worker count."""
    points = grid_points(cfg)
    tasks = [(cfg, m, s, sig, t) for (m, s, sig) in points for t in range(cfg.total_trials)]
    workers = 1 if cfg.kind == "time_budget" else max(1, cfg.workers)
    if workers == 1:
        results = []
        for i, task in enumerate(tasks):
            results.append(_run_task(task))
            if progress is not None:
                progress(i + 1, len(tasks))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    by_point: dict[tuple, dict[str, list[TrialRecord]]] = {}
    for recs in results:
        for r in recs:
            by_point.setdefault((r.m, r.s, r.sigma), {}).setdefault(r.method, []).append(r)
    ordered = []
    for point in points:
        methods = by_point.get(point, {})
        for method in cfg.methods:
            ordered.extend(sorted(methods.get(method, []),
                                  key=lambda r: (r.trial_index, -1 if r.budget is None else r.budget)))
    return ordered


# --- CSV -------------------------------------------------------------------

RECORD_FIELDS = [f.name for f in fields(TrialRecord)]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _parse(name: str, text: str):
    kind = {f.name: f.type for f in fields(TrialRecord)}[name]
    if text == "":
        return None
    if "bool" in kind:
        return text == "true"
    if "int" in kind:
        return int(text)
    if "float" in kind:
        return float(text)
    return text


def records_to_csv(records: Iterable[TrialRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RECORD_FIELDS)
    for r in records:
        writer.writerow([_fmt(getattr(r, name)) for name in RECORD_FIELDS])
    return buf.getvalue()


def records_from_csv(text: str) -> list[TrialRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != RECORD_FIELDS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    return [TrialRecord(**{k: _parse(k, v) for k, v in row.items()}) for row in reader]


def write_records(path, records) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(records_to_csv(records))


def read_records(path) -> list[TrialRecord]:
    with open(path, newline="") as fh:
        return records_from_csv(fh.read())


# --- summaries -------------------------------------------------------------

@dataclass
class SummaryRow:
    kind: str
    n: int
    m: int
    s: int
    sigma: float
    method: str
    budget: float | None
    count: int
    mean_error: float
    std_error: float
    success_rate: float | None
    success_std: float | None
    mean_init_time: float


def _block_std(values: np.ndarray, blocks: np.ndarray) -> float:
    means = [values[blocks == b].mean() for b in np.unique(blocks)]
    return float(np.std(means, ddof=1)) if len(means) > 1 else math.nan


def summarize(records: Iterable[TrialRecord]) -> list[SummaryRow]:
    """Mean over all trials per (grid point, method); std across repeat-block means."""
    groups: dict[tuple, list[TrialRecord]] = {}
    for r in records:
        key = (r.kind, r.n, r.m, r.s, r.sigma, r.method, r.budget)
        groups.setdefault(key, []).append(r)
    rows = []
    for key, recs in groups.items():
        if not recs:
            continue
        errs = np.array([r.relative_error for r in recs])
        blocks = np.array([r.repeat for r in recs])
        succ = [r.success for r in recs]
        if all(v is not None for v in succ):
            sv = np.array(succ, dtype=float)
            rate, rate_std = float(sv.mean()), _block_std(sv, blocks)
        else:
            rate = rate_std = None
        rows.append(SummaryRow(*key, count=len(recs), mean_error=float(errs.mean()),
                               std_error=_block_std(errs, blocks), success_rate=rate,
                               success_std=rate_std,
                               mean_init_time=float(np.mean([r.init_time for r in recs]))))
    return rows


def summary_to_csv(rows: list[SummaryRow]) -> str:
    names = [f.name for f in fields(SummaryRow)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    for row in rows:
        writer.writerow([_fmt(getattr(row, name)) for name in names])
    return buf.getvalue()


def mean_error_table(records: Iterable[TrialRecord]) -> dict[tuple, float]:
    """``{(m, s, sigma, method): mean relative error}`` convenience view."""
    return {(r.m, r.s, r.sigma, r.method): r.mean_error for r in summarize(records) if r.budget is None}


def strip_timing(record: TrialRecord) -> dict:
    d = asdict(record)
    for name in TIMING_COLUMNS:
        d.pop(name)
    return d


def with_config(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    return replace(cfg, **changes)
