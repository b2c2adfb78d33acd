"""Command-line entry point.

Every command is deterministic under a fixed --seed: identical flags
produce byte-identical output files (timing output from `bench`
excepted).  JSON outputs carry schema_version; CSV outputs carry a
header row.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import csv
import json
import sys

import click
import numpy as np

from . import bench as bench_mod
from .criticism import witness_report
from .datasets import BlobsParams, blobs_generate, gauss_vs_laplace, read_dataset, write_dataset
from .errors import DataFormatError, DimensionError, NumericalError
from .estimators import VARIANCE_FLOOR
from .experiments import POWER_CSV_COLUMNS, power_curve
from .kernels import KernelSpec
from .nulldist import two_sample_test
from .selection import (
    CRITERIA,
    DEFAULT_GRID_COUNT,
    TrainConfig,
    default_grid,
    grid_select,
    median_heuristic,
    score_candidates,
    train_ard,
)

SCHEMA_VERSION = 1

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


def _write_json(path, payload: dict) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path is None:
        click.echo(text, nl=False)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _write_csv(path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _load_pair(x_path, y_path, fmt):
    X = read_dataset(x_path, fmt)
    Y = read_dataset(y_path, fmt)
    return X, Y


def _kernel_from_flags(X, Y, bandwidth, weights, median, seed) -> KernelSpec:
    if median:
        if bandwidth is not None:
            raise click.UsageError("--bandwidth and --median are mutually exclusive")
        bandwidth = median_heuristic(X, Y, seed=seed)
    if bandwidth is None:
        raise click.UsageError("one of --bandwidth or --median is required")
    if bandwidth <= 0:
        raise click.UsageError("--bandwidth must be positive")
    if weights is not None:
        w = np.asarray([float(t) for t in weights.split(",")], dtype=np.float64)
        return KernelSpec("ard", float(np.log(bandwidth)), np.log(np.abs(w)))
    return KernelSpec("rbf", float(np.log(bandwidth)))


@click.group()
def cli():
    """Power-optimized MMD two-sample testing."""


@cli.command("gen")
@click.argument("kind", type=click.Choice(["blobs", "gauss-laplace"]))
@click.option("--m", type=int, required=True, help="samples per side")
@click.option("--epsilon", type=float, default=1.0, help="blobs eigenvalue ratio")
@click.option("--grid-size", type=int, default=5)
@click.option("--spacing", type=float, default=10.0)
@click.option("--d", type=int, default=2, help="dimension (gauss-laplace)")
@click.option("--seed", type=int, default=0)
@click.option("--x-out", type=click.Path(), required=True)
@click.option("--y-out", type=click.Path(), required=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "bin"]), default="csv")
def cmd_gen(kind, m, epsilon, grid_size, spacing, d, seed, x_out, y_out, fmt):
    """Generate a synthetic benchmark dataset pair."""
    if kind == "blobs":
        X, Y = blobs_generate(
            BlobsParams(epsilon=epsilon, m=m, grid_size=grid_size, spacing=spacing, seed=seed)
        )
    else:
        X, Y = gauss_vs_laplace(m, d, seed=seed)
    write_dataset(X, x_out, fmt)
    write_dataset(Y, y_out, fmt)


@cli.command("test")
@click.argument("x_path", type=click.Path(exists=True))
@click.argument("y_path", type=click.Path(exists=True))
@click.option("--bandwidth", type=float, default=None)
@click.option("--weights", type=str, default=None, help="comma-separated ARD weights")
@click.option("--median", is_flag=True, help="use the median-heuristic bandwidth")
@click.option("--alpha", type=float, default=0.1)
@click.option("--perms", "B", type=int, default=1000)
@click.option("--seed", type=int, default=0)
@click.option("--threads", type=int, default=1)
@click.option("--format", "fmt", type=click.Choice(["csv", "bin"]), default="csv")
@click.option("--output", type=click.Path(), default=None)
def cmd_test(x_path, y_path, bandwidth, weights, median, alpha, B, seed, threads, fmt, output):
    """Run the permutation two-sample test; result as JSON."""
    X, Y = _load_pair(x_path, y_path, fmt)
    spec = _kernel_from_flags(X, Y, bandwidth, weights, median, seed)
    res = two_sample_test(X, Y, spec, alpha=alpha, B=B, seed=seed, threads=threads)
    _write_json(
        output,
        {
            "statistic": res.statistic,
            "threshold": res.threshold,
            "p_value": res.p_value,
            "reject": res.reject,
            "alpha": res.alpha,
            "B": res.B,
            "m": res.m,
            "seed": res.seed,
            "kernel": spec.to_dict(),
        },
    )


SELECT_CSV_COLUMNS = ["index", "bandwidth", "mmd2", "variance", "t_stat", "power_estimate", "chosen"]


@cli.command("select")
@click.argument("x_path", type=click.Path(exists=True))
@click.argument("y_path", type=click.Path(exists=True))
@click.option("--criterion", type=click.Choice(CRITERIA), default=None)
@click.option("--median", is_flag=True, help="single-candidate median-heuristic report")
@click.option("--grid-min", type=float, default=None)
@click.option("--grid-max", type=float, default=None)
@click.option("--grid-count", type=int, default=DEFAULT_GRID_COUNT)
@click.option("--alpha", type=float, default=0.1)
@click.option("--perms", "B", type=int, default=200)
@click.option("--seed", type=int, default=0)
@click.option("--threads", type=int, default=1)
@click.option("--format", "fmt", type=click.Choice(["csv", "bin"]), default="csv")
@click.option("--output", type=click.Path(), default=None, help="JSON report path")
@click.option("--csv-out", type=click.Path(), default=None, help="per-candidate CSV path")
def cmd_select(x_path, y_path, criterion, median, grid_min, grid_max, grid_count,
               alpha, B, seed, threads, fmt, output, csv_out):
    """Grid-based kernel selection (or the median-heuristic baseline)."""
    X, Y = _load_pair(x_path, y_path, fmt)
    if median:
        if criterion is not None:
            raise click.UsageError("--criterion and --median are mutually exclusive")
        sigma = median_heuristic(X, Y, seed=seed)
        scores = score_candidates(X, Y, [KernelSpec("rbf", float(np.log(sigma)))])
        report_criterion, scores, chosen = "median", scores, 0
    else:
        if criterion is None:
            raise click.UsageError("one of --criterion or --median is required")
        if grid_min is not None and grid_max is not None:
            bws = np.geomspace(grid_min, grid_max, grid_count)
            candidates = [KernelSpec("rbf", float(np.log(b))) for b in bws]
        else:
            candidates = default_grid(median_heuristic(X, Y, seed=seed), grid_count)
        report = grid_select(X, Y, candidates, criterion=criterion,
                             alpha=alpha, B=B, seed=seed, threads=threads)
        report_criterion, scores, chosen = report.criterion, report.candidates, report.chosen
    _write_json(
        output,
        {
            "criterion": report_criterion,
            "chosen": chosen,
            "chosen_kernel": scores[chosen].spec.to_dict(),
            "seed": seed,
            "candidates": [
                {
                    "kernel": s.spec.to_dict(),
                    "mmd2": s.mmd2,
                    "variance": s.variance,
                    "t_stat": s.t_stat,
                    "power_estimate": s.power_estimate,
                }
                for s in scores
            ],
        },
    )
    if csv_out is not None:
        rows = [
            [i, s.spec.bandwidth, s.mmd2, s.variance, s.t_stat,
             "" if s.power_estimate is None else s.power_estimate, int(i == chosen)]
            for i, s in enumerate(scores)
        ]
        _write_csv(csv_out, SELECT_CSV_COLUMNS, rows)


@cli.command("train")
@click.argument("x_path", type=click.Path(exists=True))
@click.argument("y_path", type=click.Path(exists=True))
@click.option("--ard", is_flag=True, help="train per-dimension ARD weights too")
@click.option("--bandwidth", type=float, default=None, help="initial bandwidth")
@click.option("--median", is_flag=True, help="initialize at the median heuristic")
@click.option("--learning-rate", type=float, default=0.05)
@click.option("--iterations", type=int, default=100)
@click.option("--batch-size", type=int, default=None, help="default: min(m, 500)")
@click.option("--seed", type=int, default=0)
@click.option("--format", "fmt", type=click.Choice(["csv", "bin"]), default="csv")
@click.option("--output", type=click.Path(), default=None, help="kernel JSON path")
@click.option("--trace-out", type=click.Path(), default=None, help="objective trace CSV")
def cmd_train(x_path, y_path, ard, bandwidth, median, learning_rate, iterations,
              batch_size, seed, fmt, output, trace_out):
    """Gradient ascent of the t-statistic over kernel log-parameters."""
    X, Y = _load_pair(x_path, y_path, fmt)
    init_rbf = _kernel_from_flags(X, Y, bandwidth, None, median, seed)
    if ard:
        init = KernelSpec("ard", init_rbf.log_bandwidth, np.zeros(X.shape[1]))
    else:
        init = init_rbf
    if batch_size is None:
        batch_size = min(X.shape[0], 500)
    cfg = TrainConfig(learning_rate=learning_rate, iterations=iterations,
                      batch_size=batch_size, seed=seed)
    spec, trace = train_ard(X, Y, init, cfg)
    _write_json(output, {"kernel": spec.to_dict(), "seed": seed,
                         "iterations": iterations})
    if trace_out is not None:
        _write_csv(trace_out, ["iteration", "t_stat"],
                   [[i, float(t)] for i, t in enumerate(trace)])


@cli.command("power-curve")
@click.option("--epsilons", type=str, default="1,2,4,6", help="comma-separated list")
@click.option("--methods", type=str, default="median,max-mmd,max-t")
@click.option("--reps", type=int, default=100)
@click.option("--m", type=int, default=500)
@click.option("--alpha", type=float, default=0.1)
@click.option("--perms", "B", type=int, default=300)
@click.option("--grid-count", type=int, default=DEFAULT_GRID_COUNT)
@click.option("--seed", type=int, default=0)
@click.option("--threads", type=int, default=1)
@click.option("--output", type=click.Path(), required=True, help="CSV path")
def cmd_power_curve(epsilons, methods, reps, m, alpha, B, grid_count, seed, threads, output):
    """Rejection rate vs blobs epsilon for each selection method (CSV)."""
    eps_list = [float(t) for t in epsilons.split(",")]
    method_list = [t.strip() for t in methods.split(",")]
    rows, _ = power_curve(eps_list, reps=reps, m=m, alpha=alpha, B=B,
                          grid_count=grid_count, seed=seed, methods=method_list,
                          threads=threads)
    _write_csv(output, POWER_CSV_COLUMNS, rows)


@cli.command("witness")
@click.argument("x_path", type=click.Path(exists=True))
@click.argument("y_path", type=click.Path(exists=True))
@click.argument("probes_path", type=click.Path(exists=True))
@click.option("--bandwidth", type=float, default=None)
@click.option("--weights", type=str, default=None)
@click.option("--median", is_flag=True)
@click.option("--top", "k", type=int, default=5)
@click.option("--seed", type=int, default=0)
@click.option("--format", "fmt", type=click.Choice(["csv", "bin"]), default="csv")
@click.option("--output", type=click.Path(), default=None, help="extremes JSON path")
@click.option("--csv-out", type=click.Path(), default=None, help="witness values CSV")
def cmd_witness(x_path, y_path, probes_path, bandwidth, weights, median, k, seed,
                fmt, output, csv_out):
    """Evaluate the witness function on probe points."""
    X, Y = _load_pair(x_path, y_path, fmt)
    probes = read_dataset(probes_path, fmt)
    spec = _kernel_from_flags(X, Y, bandwidth, weights, median, seed)
    report = witness_report(spec, X, Y, probes, k)
    _write_json(output, {
        "top_positive": report.top_positive,
        "top_negative": report.top_negative,
        "kernel": spec.to_dict(),
    })
    if csv_out is not None:
        _write_csv(csv_out, ["index", "value"],
                   [[i, float(v)] for i, v in enumerate(report.values)])


@cli.command("bench")
@click.option("--m-list", type=str, default="500,1000")
@click.option("--perms", "B", type=int, default=200)
@click.option("--threads-list", type=str, default="1")
@click.option("--variants", type=str, default="optimized,naive")
@click.option("--reps", type=int, default=3)
@click.option("--seed", type=int, default=0)
@click.option("--output", type=click.Path(), required=True, help="CSV path")
def cmd_bench(m_list, B, threads_list, variants, reps, seed, output):
    """Time the null samplers (CSV of wall-clock records)."""
    bench_mod.run_bench(
        [int(t) for t in m_list.split(",")],
        B=B,
        threads_list=[int(t) for t in threads_list.split(",")],
        variants=tuple(t.strip() for t in variants.split(",")),
        reps=reps,
        seed=seed,
        out_csv=output,
    )


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        return EXIT_USAGE
    except (DataFormatError, DimensionError, FileNotFoundError, OSError) as exc:
        click.echo(f"data error: {exc}", err=True)
        return EXIT_DATA
    except NumericalError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return EXIT_NUMERICAL
    except ValueError as exc:
        click.echo(f"usage error: {exc}", err=True)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
