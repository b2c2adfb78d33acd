"""Figure scripts for the CSV files the mmdpower CLI emits."""

from .render import (
    SchemaError,
    plot_bandwidth_hist,
    plot_power_curve,
    plot_timing,
    plot_witness,
)

__all__ = [
    "SchemaError",
    "plot_bandwidth_hist",
    "plot_power_curve",
    "plot_timing",
    "plot_witness",
]
