#!/usr/bin/env python3
"""Run the experiment sweeps through the CLI, writing CSVs under results/.

    python scripts/run_sweeps.py                 # every sweep at full size
    python scripts/run_sweeps.py --quick vary-m  # 5 trials, for a smoke run

Extra arguments after ``--`` are forwarded to each sweep.
"""
import argparse
import sys
import time

from sparse_phase_init.cli import SUBCOMMANDS, main

QUICK = ["--trials", "5", "--repeats", "1"]


def run(names, quick, extra, outdir):
    status = 0
    for name in names:
        argv = [name, "--out", f"{outdir}/{name}.csv", "-v", *(QUICK if quick else []), *extra]
        t0 = time.perf_counter()
        code = main(argv)
        print(f"{name}: exit {code} after {time.perf_counter() - t0:.1f}s", flush=True)
        status = status or code
    return status


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("sweeps", nargs="*", help=f"any of {', '.join(SUBCOMMANDS)} (default: all)")
    parser.add_argument("--quick", action="store_true")
    parser.add_argument("--outdir", default="results")
    args, extra = parser.parse_known_args()
    extra = [a for a in extra if a != "--"]
    unknown = set(args.sweeps) - set(SUBCOMMANDS)
    if unknown:
        parser.error(f"unknown sweeps: {', '.join(sorted(unknown))}")
    sys.exit(run(args.sweeps or list(SUBCOMMANDS), args.quick, extra, args.outdir))
