"""Command-line entry points: one subcommand per figure kind.

Exit codes: 0 success, 1 usage error (click), 2 schema or file error.
"""

import sys

import click

from .render import (
    SchemaError,
    plot_bandwidth_hist,
    plot_power_curve,
    plot_timing,
    plot_witness,
)


@click.group()
def cli():
    """Render mmdpower CSV outputs as PNG figures."""


def _run(fn, *args):
    try:
        fn(*args)
    except (SchemaError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


@cli.command("power-curve")
@click.argument("csv_path", type=click.Path(exists=True))
@click.argument("out_path", type=click.Path())
def cmd_power_curve(csv_path, out_path):
    """Rejection rate vs epsilon, one line per method."""
    _run(plot_power_curve, csv_path, out_path)


@cli.command("timing")
@click.argument("csv_path", type=click.Path(exists=True))
@click.argument("out_path", type=click.Path())
def cmd_timing(csv_path, out_path):
    """Log-log scaling and thread-speedup panels from a bench CSV."""
    _run(plot_timing, csv_path, out_path)


@cli.command("bandwidth-hist")
@click.argument("csv_paths", type=click.Path(exists=True), nargs=-1, required=True)
@click.argument("out_path", type=click.Path())
def cmd_bandwidth_hist(csv_paths, out_path):
    """Histogram of chosen bandwidths from selection-grid CSVs."""
    _run(plot_bandwidth_hist, list(csv_paths), out_path)


@cli.command("witness")
@click.argument("csv_path", type=click.Path(exists=True))
@click.argument("out_path", type=click.Path())
def cmd_witness(csv_path, out_path):
    """Strip plot of witness values."""
    _run(plot_witness, csv_path, out_path)


def main():
    cli(standalone_mode=True)


if __name__ == "__main__":
    main()
