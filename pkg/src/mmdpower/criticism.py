"""Witness-function evaluation and extremal-sample extraction.

The witness at a probe point t is the gap between the two empirical mean
embeddings, (1/m) sum_i k(X_i, t) - (1/n) sum_j k(Y_j, t).  Its maxima
and minima localize where the two samples differ most; the samples
found there are the model-criticism exhibits.  Unlike the test pipeline,
X and Y may have different sizes here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .kernels import KernelSpec, _check_pair, _kernel_matrix


@dataclass
class WitnessReport:
    values: np.ndarray
    top_positive: list[int]
    top_negative: list[int]
    mean_gap: float | None = None


def witness(spec: KernelSpec, X, Y, probes) -> np.ndarray:
    """Witness values at each probe point."""
    X, probes = _check_pair(X, probes)
    Y, _ = _check_pair(Y, probes)
    if X.shape[0] < 1 or Y.shape[0] < 1:
        raise DimensionError("witness needs at least one sample on each side")
    kx = _kernel_matrix(X, probes, spec).mean(axis=0)
    ky = _kernel_matrix(Y, probes, spec).mean(axis=0)
    return kx - ky


def extremes(values, k: int) -> tuple[list[int], list[int]]:
    """Indices of the k largest (descending) and k smallest (ascending)
    values; ties broken by lower index."""
    values = np.asarray(values, dtype=np.float64)
    if k > values.shape[0]:
        raise DimensionError(f"k={k} exceeds {values.shape[0]} values")
    top_pos = np.argsort(-values, kind="stable")[:k]
    top_neg = np.argsort(values, kind="stable")[:k]
    return [int(i) for i in top_pos], [int(i) for i in top_neg]


def witness_report(
    spec: KernelSpec, X, Y, probes, k: int, probe_labels=None
) -> WitnessReport:
    """Full criticism report; probe_labels (0/1 per probe), when given,
    yields the witness mean gap between the two probe groups."""
    values = witness(spec, X, Y, probes)
    top_pos, top_neg = extremes(values, k)
    mean_gap = None
    if probe_labels is not None:
        labels = np.asarray(probe_labels)
        if labels.shape[0] != values.shape[0]:
            raise DimensionError("probe_labels length must match probe count")
        mean_gap = float(values[labels == 0].mean() - values[labels == 1].mean())
    return WitnessReport(values=values, top_positive=top_pos, top_negative=top_neg,
                         mean_gap=mean_gap)
