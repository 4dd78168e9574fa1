"""``isingmarket`` command line.

    isingmarket simulate|sweep|nivol|stylized|choice|qdt --config PATH --out DIR
                [--seed N] [--jobs K] [--format csv|json]

Exit status: 0 success, 1 configuration error, 2 model or runtime error.
When ``--out`` is omitted the directory ``$ISINGMARKET_OUTPUT_ROOT/<subcommand>``
is used.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .. import __version__
from ..discrete_choice import ChoiceProblem, logit_probabilities, simulate_choices, total_variation
from ..errors import ConfigError, IsingMarketError
from ..market.dynamics import run_simulation
from ..market.experiments import meanfield_critical_coupling, noise_induced_volatility_experiment, sweep_coupling
from ..persistence import RunManifest, write_run
from ..qdt import evaluate
from ..stylized_stats import stylized_facts_report
from .configfile import SCHEMAS, help_text, load_config, build_job

OUTPUT_ROOT_ENV = "ISINGMARKET_OUTPUT_ROOT"
SUBCOMMANDS = tuple(SCHEMAS)

EXIT_OK, EXIT_CONFIG, EXIT_MODEL = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isingmarket", description="Kinetic Ising market experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")
    blurbs = {
        "simulate": "run one market simulation and write trajectory.csv",
        "sweep": "sweep constant coupling values and write sweep.csv",
        "nivol": "paired field-off / field-on runs (noise-induced volatility)",
        "stylized": "stylized-facts report for a price series",
        "choice": "logit probabilities versus Gumbel Monte Carlo choices",
        "qdt": "QDT prospect probabilities from a JSON prospect document",
    }
    for name in SUBCOMMANDS:
        p = sub.add_parser(
            name,
            help=blurbs[name],
            description=blurbs[name],
            epilog=help_text(name),
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        p.add_argument("--config", required=True, help="configuration file (key = value text or .json)")
        p.add_argument("--out", help=f"output directory (default ${OUTPUT_ROOT_ENV}/{name})")
        p.add_argument("--seed", type=int, help="seed override, recorded in the manifest")
        p.add_argument("--jobs", type=int, default=1, help="parallel jobs for sweep / nivol")
        p.add_argument("--format", choices=("csv", "json"), default="csv", help="data file format")
    return parser


def _output_dir(args: argparse.Namespace) -> tuple[Path, str | None]:
    root = os.environ.get(OUTPUT_ROOT_ENV)
    if args.out:
        return Path(args.out), root
    if root:
        return Path(root) / args.subcommand, root
    raise ConfigError(f"no --out given and ${OUTPUT_ROOT_ENV} is not set")


def _read_prices(path: Path, column: str) -> np.ndarray:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or column not in reader.fieldnames:
                raise ConfigError(f"{path}: no column {column!r}")
            return np.array([float(row[column]) for row in reader])
    except OSError as exc:
        raise ConfigError(f"cannot read input prices: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"{path}: non-numeric price: {exc}") from None


def _run(args: argparse.Namespace) -> tuple[str, RunManifest, Any, str]:
    parsed = load_config(args.config, args.subcommand)
    job = build_job(parsed, args.seed)
    sub = args.subcommand
    extra: dict[str, Any] = {"subcommand": sub, "seed_override": args.seed is not None}

    if sub == "simulate":
        traj = run_simulation(job)
        extra.update(price_mode=job.price_mode, normalization=job.normalization, coupling_kind=job.coupling.kind)
        manifest = RunManifest("trajectory", job.to_dict(), job.seed, extra=extra)
        summary = (f"simulate: {len(traj)} steps, final price {traj.price[-1]:.6g}, "
                   f"mean |m| {np.abs(traj.magnetization).mean():.4f}")
        return sub, manifest, traj, summary

    if sub == "sweep":
        res = sweep_coupling(job.market, job.lambda_grid, job.burn_in, job.measure_steps, jobs=args.jobs)
        cfg = {"market": job.market.to_dict(), "lambda_grid": list(job.lambda_grid),
               "burn_in": job.burn_in, "measure_steps": job.measure_steps}
        try:
            extra["meanfield_lambda_c"] = meanfield_critical_coupling(job.market.noise)
        except IsingMarketError:
            pass
        extra.update(normalization=job.market.normalization, price_mode=job.market.price_mode)
        manifest = RunManifest("sweep", cfg, job.market.seed, extra=extra)
        summary = f"sweep: {len(res.lambda_)} points, susceptibility peak at lambda = {res.peak_lambda:.6g}"
        return sub, manifest, res, summary

    if sub == "nivol":
        res = noise_induced_volatility_experiment(
            job.market, job.field_amplitude, job.field_period, job.n_seeds,
            field_kind=job.field_kind, burn_in=job.burn_in, jobs=args.jobs)
        data = {
            "baseline": [float(v) for v in res.baseline],
            "driven": [float(v) for v in res.driven],
            "baseline_volatility": res.baseline_volatility,
            "driven_volatility": res.driven_volatility,
            "wins": res.wins,
            "ties": res.ties,
            "p_value": res.p_value,
        }
        cfg = {"market": job.market.to_dict(), "field_amplitude": job.field_amplitude,
               "field_period": job.field_period, "field_kind": job.field_kind,
               "n_seeds": job.n_seeds, "burn_in": job.burn_in}
        manifest = RunManifest("result", cfg, job.market.seed, extra=extra)
        summary = f"nivol: driven > baseline in {res.wins}/{res.n_pairs} pairs, sign-test p = {res.p_value:.3g}"
        return sub, manifest, data, summary

    if sub == "stylized":
        prices = _read_prices(job.input, job.column)
        report = stylized_facts_report(prices, max_lag=job.max_lag, hill_fraction=job.hill_fraction, mode=job.mode)
        cfg = {"input": str(job.input), "column": job.column, "mode": job.mode,
               "max_lag": job.max_lag, "hill_fraction": job.hill_fraction}
        manifest = RunManifest("report", cfg, None, extra=extra)
        summary = (f"stylized: n = {report.n}, excess kurtosis {report.excess_kurtosis:.3f}, "
                   f"hill mu {report.hill_mu:.3f} (k = {report.hill_k})")
        return sub, manifest, report, summary

    if sub == "choice":
        problem = ChoiceProblem(job.utilities, job.gamma)
        probs = logit_probabilities(problem)
        freqs = simulate_choices(problem, job.n_samples, np.random.default_rng(job.seed))
        data = {
            "logit": [float(v) for v in probs],
            "simulated": [float(v) for v in freqs],
            "total_variation": total_variation(probs, freqs),
            "n_samples": job.n_samples,
        }
        cfg = {"utilities": list(job.utilities), "gamma": job.gamma, "n_samples": job.n_samples, "seed": job.seed}
        manifest = RunManifest("result", cfg, job.seed, extra=extra)
        summary = f"choice: total variation {data['total_variation']:.5f} over {job.n_samples} draws"
        return sub, manifest, data, summary

    # qdt
    data = evaluate(job.prospects, job.counts)
    cfg = {"labels": list(job.prospects.labels), "utilities": [float(u) for u in job.prospects.utilities],
           "q": [float(v) for v in job.prospects.q], "q_source": job.prospects.q_source,
           "counts": list(job.counts) if job.counts is not None else None}
    manifest = RunManifest("result", cfg, None, extra=extra)
    summary = f"qdt: preferred {job.prospects.labels[data['preferred']]!r}" + (" (tie)" if data["tie"] else "")
    return sub, manifest, data, summary


def execute(argv: Sequence[str] | None = None) -> int:
    """Parse ``argv`` and run the command; returns the exit status."""
    args = build_parser().parse_args(argv)
    try:
        out, root = _output_dir(args)
        _, manifest, data, summary = _run(args)
        if root is not None:
            manifest.extra["output_root"] = root
        write_run(manifest, data, out, fmt=args.format)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IsingMarketError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    print(f"{summary} -> {out}")
    return EXIT_OK


def main() -> None:
    sys.exit(execute())
