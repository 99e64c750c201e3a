"""Command-line entry point: ``spinit <subcommand> [flags]``.

Exit codes: 0 success, 1 selftest failure, 2 invalid configuration, 3 every
requested combination was skipped.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .harness import (
    ExperimentConfig,
    run_experiment,
    skipped_combinations,
    summarize,
    summary_to_csv,
    write_records,
)
from .spectral import TruncationBand

log = logging.getLogger("sparse_phase_init")

SUBCOMMANDS = {
    "vary-m": "vary_m",
    "vary-s": "vary_s",
    "vary-sigma": "vary_sigma",
    "success-rate": "success_rate",
    "time-budget": "time_budget",
    "gen-toy": "generative_toy",
}

EXIT_OK, EXIT_SELFTEST_FAILED, EXIT_INVALID, EXIT_SKIPPED_ONLY = 0, 1, 2, 3

PLOT_SCRIPT = '''\
"""Plot mean relative error (and success rate when present) from {summary}."""
import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "{summary}"
x_axis = "{x_axis}"
rows = list(csv.DictReader(open(path)))
series = defaultdict(list)
for row in rows:
    series[(row["method"], row["s"], row["sigma"], row["m"] if x_axis != "m" else "")].append(row)

metrics = ["mean_error"] + (["success_rate"] if rows and rows[0]["success_rate"] else [])
fig, axes = plt.subplots(1, len(metrics), figsize=(6 * len(metrics), 4), squeeze=False)
for ax, metric in zip(axes[0], metrics):
    for (method, s, sigma, m), pts in sorted(series.items()):
        pts.sort(key=lambda r: float(r[x_axis]))
        xs = [float(r[x_axis]) for r in pts]
        ys = [float(r[metric]) for r in pts]
        err = [float(r["std_error" if metric == "mean_error" else "success_std"] or "nan") for r in pts]
        ax.errorbar(xs, ys, yerr=err, marker="o", ms=3, label=f"{{method}} s={{s}} sigma={{sigma}}")
    ax.set_xlabel(x_axis)
    ax.set_ylabel(metric)
    ax.legend(fontsize=6)
fig.tight_layout()
fig.savefig(path.replace(".summary.csv", ".png"), dpi=150)
'''

X_AXIS = {"vary_m": "m", "vary_s": "s", "vary_sigma": "sigma", "success_rate": "m",
          "time_budget": "budget", "generative_toy": "m"}


def parse_grid(text: str, cast=float) -> list:
    """``"1,2,5"`` or ``"start:stop:step"`` (inclusive) into a list."""
    text = text.strip()
    if ":" in text:
        start, stop, step = (float(p) for p in text.split(":"))
        if step <= 0:
            raise ValueError(f"grid step must be positive in {text!r}")
        count = int(round((stop - start) / step)) + 1
        return [cast(round(start + i * step, 10)) for i in range(count)]
    return [cast(p) for p in text.split(",") if p.strip()]


def read_config_file(path) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = (p.strip() for p in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


FLAG_KEYS = ("n", "s", "m", "sigma", "trials", "repeats", "seed", "methods", "l", "u", "solver",
             "refine", "out", "workers", "budgets", "delta", "radius", "T")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run the {name} sweep")
        p.add_argument("--config", help="flat key = value file; flags override it")
        p.add_argument("--n", type=int)
        p.add_argument("--s", help="sparsity grid (latent dimension k for gen-toy)")
        p.add_argument("--m", help="measurement-count grid, e.g. 100:3000:100")
        p.add_argument("--sigma", help="noise-level grid")
        p.add_argument("--trials", type=int)
        p.add_argument("--repeats", type=int, help="repeat blocks used for error bars")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--methods", help="comma-separated initializer tags")
        p.add_argument("--l", type=float, help="lower truncation multiplier")
        p.add_argument("--u", type=float, help="upper truncation multiplier")
        p.add_argument("--solver", choices=["grqi", "tpower"])
        p.add_argument("--refine", choices=["yes", "no"], help="run alternating-minimization refinement")
        p.add_argument("--T", type=int, help="refinement iterations")
        p.add_argument("--budgets", help="time budgets in seconds (time-budget only)")
        p.add_argument("--delta", type=float, help="latent net resolution (gen-toy only)")
        p.add_argument("--radius", type=float, help="latent ball radius (gen-toy only)")
        p.add_argument("--workers", type=int)
        p.add_argument("--out", help="CSV path; summary and plot script are written alongside")
        p.add_argument("-v", "--verbose", action="store_true")
    p = sub.add_parser("selftest", help="run the oracle and property checks")
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def config_from_args(kind: str, args: argparse.Namespace) -> tuple[ExperimentConfig, Path]:
    values = read_config_file(args.config) if getattr(args, "config", None) else {}
    for key in FLAG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = str(flag)
    unknown = set(values) - set(FLAG_KEYS)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")

    kw = {"kind": kind}
    if "n" in values:
        kw["n"] = int(values["n"])
    if "s" in values:
        kw["s_grid"] = parse_grid(values["s"], int)
    if "m" in values:
        kw["m_grid"] = parse_grid(values["m"], int)
    if "sigma" in values:
        kw["sigma_grid"] = parse_grid(values["sigma"], float)
    if "budgets" in values:
        kw["budgets"] = parse_grid(values["budgets"], float)
    for key, target, cast in (("trials", "trials", int), ("repeats", "repeats", int),
                              ("seed", "master_seed", int), ("workers", "workers", int),
                              ("T", "refine_T", int), ("delta", "latent_delta", float),
                              ("radius", "latent_radius", float), ("solver", "solver", str)):
        if key in values:
            kw[target] = cast(values[key])
    if "methods" in values:
        kw["methods"] = [v.strip() for v in values["methods"].split(",") if v.strip()]
    if "refine" in values:
        flag = values["refine"].lower()
        if flag not in ("yes", "no", "true", "false", "1", "0"):
            raise ValueError(f"refine must be yes/no, got {values['refine']!r}")
        kw["refine"] = flag in ("yes", "true", "1")
    band = TruncationBand()
    kw["band"] = TruncationBand(float(values.get("l", band.l)), float(values.get("u", band.u)))
    out = Path(values.get("out", f"results/{kind}.csv"))
    kw["output_path"] = str(out)
    return ExperimentConfig(**kw), out


def _summary_path(out: Path) -> Path:
    stem = out.name[:-4] if out.name.endswith(".csv") else out.name
    return out.with_name(stem + ".summary.csv")


def run_sweep(kind: str, args) -> int:
    try:
        cfg, out = config_from_args(kind, args)
    except (ValueError, OSError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    skipped = skipped_combinations(cfg)
    for m, s, sigma, method in skipped:
        log.info("skipping %s at m=%d s=%d sigma=%g (needs noiseless quadratic data)", method, m, s, sigma)

    def progress(done, total):
        if done == total or done % max(1, total // 20) == 0:
            log.info("%s: %d/%d trials", kind, done, total)

    records = run_experiment(cfg, progress=progress)
    if not records:
        print(f"all {len(skipped)} method/grid combinations were skipped; nothing to run",
              file=sys.stderr)
        return EXIT_SKIPPED_ONLY
    out.parent.mkdir(parents=True, exist_ok=True)
    write_records(out, records)
    summary = _summary_path(out)
    summary.write_text(summary_to_csv(summarize(records)))
    plot = summary.with_name(summary.name.replace(".summary.csv", ".plot.py"))
    plot.write_text(PLOT_SCRIPT.format(summary=summary.name, x_axis=X_AXIS[kind]))
    print(f"wrote {len(records)} records to {out}\nsummary: {summary}\nplot script: {plot}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "selftest":
        from .selftest import run_selftest

        return EXIT_OK if run_selftest() else EXIT_SELFTEST_FAILED
    return run_sweep(SUBCOMMANDS[args.command], args)


if __name__ == "__main__":
    sys.exit(main())
