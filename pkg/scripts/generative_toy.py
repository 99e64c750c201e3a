#!/usr/bin/env python3
"""Latent-net experiment with a linear generator (k=2, n=20): error against m."""
import argparse

import numpy as np

from sparse_phase_init.harness import ExperimentConfig, run_experiment

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--delta", type=float, default=0.05)
    parser.add_argument("--trials", type=int, default=50)
    args = parser.parse_args()
    cfg = ExperimentConfig(kind="generative_toy", trials=args.trials, repeats=1, latent_delta=args.delta)
    recs = run_experiment(cfg)
    for m in cfg.m_grid:
        for method in cfg.methods:
            e = np.array([r.relative_error for r in recs if r.m == m and r.method == method])
            print(f"m={m:4d} {method:>14}: mean {e.mean():.4f}  90th pct {np.quantile(e, 0.9):.4f}")
