"""Fast oracle and property checks, runnable without pytest (``spinit selftest``)."""
from __future__ import annotations

import time

import numpy as np

from .harness import (
    ExperimentConfig,
    records_from_csv,
    records_to_csv,
    run_experiment,
    strip_timing,
)
from .initializers import METHODS, run_initializer
from .signals import NoiseSpec, gen_sensing_matrix, gen_sparse_signal, make_instance, measure, trial_seeds
from .sparse_pca import SpcaConfig, exhaustive_spca, solve_spca, start_vector, tpower
from .spectral import build_truncated_operator

ORACLE_INSTANCES = 100
ORACLE_GAP = 1e-6
ORACLE_PASS_FRACTION = 0.8


def oracle_instance(seed: int, n: int = 8, s: int = 3, m: int = 200) -> np.ndarray:
    """Truncated spectral matrix of a random s-sparse phase retrieval problem."""
    rng = np.random.default_rng([seed, 8, 3])
    x = gen_sparse_signal(n, s, rng)
    A = gen_sensing_matrix(m, n, int(rng.integers(2**63)))
    y = measure(A, x, NoiseSpec(0.0), rng).y
    return build_truncated_operator(A, y).to_dense()


def spca_oracle_fraction(solver: str, instances: int = ORACLE_INSTANCES, s: int = 3) -> float:
    hits = 0
    for seed in range(instances):
        M = oracle_instance(seed, s=s)
        best, _ = exhaustive_spca(M, s)
        res = solve_spca(M, SpcaConfig(s=s, solver=solver))
        hits += best - res.objective <= ORACLE_GAP
    return hits / instances


def check_sign_invariance():
    x, meas = make_instance(200, 5, 400, 0.0, trial_seeds(11))
    flipped = measure(meas.matrix, -x, NoiseSpec(0.0), 0)
    if not np.array_equal(meas.y, flipped.y):
        return False, "noiseless measurements differ under x -> -x"
    x, meas = make_instance(200, 5, 400, 0.2, trial_seeds(12))
    y_neg = np.abs(meas.A @ (-x.values)) + meas.eta
    if not np.array_equal(meas.y, y_neg):
        return False, "noisy measurements differ under x -> -x"
    for method in METHODS:
        a = run_initializer(method, meas.A, meas.y, 5, rng=np.random.default_rng(3))
        b = run_initializer(method, meas.A, y_neg, 5, rng=np.random.default_rng(3))
        if not a.same_output(b):
            return False, f"{method} output changed under x -> -x"
    return True, f"measurements and {len(METHODS)} initializers"


def check_operator_structure():
    worst_sym = worst_psd = worst_rep = 0.0
    for seed in range(5):
        x, meas = make_instance(60, 4, 300, 0.1 * seed, trial_seeds(20 + seed))
        dense = build_truncated_operator(meas.A, meas.y, representation="dense")
        free = build_truncated_operator(meas.A, meas.y, representation="matrix_free")
        rng = np.random.default_rng(seed)
        for _ in range(20):
            w, v = rng.standard_normal((2, 60))
            lhs, rhs = dense.apply(w) @ v, w @ dense.apply(v)
            worst_sym = max(worst_sym, abs(lhs - rhs) / max(abs(lhs), 1e-300))
            worst_psd = min(worst_psd, free.quadratic_form(w) / (w @ w))
            a, b = dense.apply(w), free.apply(w)
            worst_rep = max(worst_rep, np.linalg.norm(a - b) / np.linalg.norm(a))
    ok = worst_sym <= 1e-10 and worst_psd >= -1e-10 and worst_rep <= 1e-8
    return ok, f"sym {worst_sym:.1e}, min w'Vw/|w|^2 {worst_psd:.1e}, dense/free {worst_rep:.1e}"


def check_tpower_monotone_and_feasible():
    worst_drop = 0.0
    for seed in range(20):
        M = oracle_instance(seed, n=30, s=4)
        for solver in ("tpower", "grqi"):
            res = solve_spca(M, SpcaConfig(s=4, solver=solver))
            if abs(np.linalg.norm(res.direction) - 1) > 1e-10 or np.count_nonzero(res.direction) > 4:
                return False, f"{solver} returned an infeasible direction (seed {seed})"
        start, _ = start_vector(M)
        trace = tpower(M, SpcaConfig(s=4, solver="tpower"), start, track=True).objective_trace
        worst_drop = max(worst_drop, max(np.maximum(0, -np.diff(trace)), default=0.0))
    return worst_drop <= 1e-10, f"largest objective decrease {worst_drop:.1e}"


def check_spca_oracle():
    fractions = {solver: spca_oracle_fraction(solver) for solver in ("tpower", "grqi")}
    ok = all(f >= ORACLE_PASS_FRACTION for f in fractions.values())
    return ok, ", ".join(f"{k} {v:.0%}" for k, v in fractions.items())


def _small_config(seed=5):
    return ExperimentConfig(kind="vary_m", n=60, s_grid=[3], m_grid=[120, 240], trials=3,
                            master_seed=seed)


def check_csv_roundtrip():
    records = run_experiment(_small_config())
    back = records_from_csv(records_to_csv(records))
    return back == records, f"{len(records)} records"


def check_determinism():
    a = [strip_timing(r) for r in run_experiment(_small_config(9))]
    b = [strip_timing(r) for r in run_experiment(_small_config(9))]
    return a == b, f"{len(a)} records compared"


CHECKS = [
    ("sign invariance", check_sign_invariance),
    ("operator symmetry/PSD/representations", check_operator_structure),
    ("SPCA feasibility and tpower monotonicity", check_tpower_monotone_and_feasible),
    ("exhaustive-support SPCA oracle", check_spca_oracle),
    ("CSV round trip", check_csv_roundtrip),
    ("run determinism", check_determinism),
]


def run_selftest(verbose: bool = True) -> bool:
    all_ok = True
    t0 = time.perf_counter()
    for name, check in CHECKS:
        ok, detail = check()
        all_ok &= bool(ok)
        if verbose:
            print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    if verbose:
        print(f"selftest {'passed' if all_ok else 'FAILED'} in {time.perf_counter() - t0:.1f}s")
    return all_ok
