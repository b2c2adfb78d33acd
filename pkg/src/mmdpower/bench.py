"""Benchmark harness for the permutation null samplers.

Wall-clock cells cover (m, threads, variant) with the pooled kernel
matrix built outside the timed region and a warm-up rep excluded.
Hardware cache counters are deliberately not used; the portable proxy
for the cache behavior claim is the access-order audit, which replays
each sampler's exact traversal through an instrumented matrix shim and
checks monotonicity and per-entry read counts.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass

import numpy as np

from .datasets import gauss_vs_laplace
from .kernels import JointGram, KernelSpec, joint_gram
from .nulldist import (
    _labels_and_inverse,
    _round_statistic,
    permutation_stream,
    sample_null_naive,
    sample_null_optimized,
)
from .selection import median_heuristic

VARIANTS = ("optimized", "naive")
BENCH_CSV_COLUMNS = ["m", "B", "threads", "variant", "rep", "wall_seconds"]


@dataclass
class BenchRecord:
    m: int
    B: int
    threads: int
    variant: str
    wall_seconds: float  # mean over reps
    min_seconds: float
    reps: int


@dataclass
class AuditReport:
    variant: str
    monotone: bool
    max_reads_per_entry: int
    entries_read: int


class RecordingMatrix:
    """Matrix shim logging the flat address of every element read."""

    def __init__(self, mat: np.ndarray):
        self.mat = mat
        self.n = mat.shape[0]
        self.addresses: list[int] = []

    def reset(self):
        self.addresses = []

    def __getitem__(self, key):
        a, b = key
        self.addresses.append(int(a) * self.n + int(b))
        return self.mat[a, b]


def _audit_round(rec: RecordingMatrix, labels, perm, m, permuted: bool, inv=None):
    """Python mirror of the samplers' per-round traversal (same visit
    order as the compiled kernels), run through the recording shim."""
    n = rec.n
    s_xx = s_yy = s_xy = 0.0
    for a in range(n):
        la = labels[a]
        for b in range(a + 1, n):
            if permuted:
                v = rec[inv[a], inv[b]]
            else:
                v = rec[a, b]
            lb = labels[b]
            if la == lb:
                if la == 0:
                    s_xx += v
                else:
                    s_yy += v
            else:
                s_xy += v
    s_diag = 0.0
    for i in range(m):
        if permuted:
            s_diag += rec[i, m + i]
        else:
            s_diag += rec[perm[i], perm[m + i]]
    return _round_statistic(s_xx, s_yy, s_xy, s_diag, m)


def cache_profile(m: int = 8, B: int = 3, seed: int = 0) -> dict[str, AuditReport]:
    """Replay both samplers' access patterns and audit them.

    The optimized sweep must read addresses in nondecreasing order, each
    entry at most once per round; the naive sampler's reads into its
    permuted copy are expected to be non-monotone.
    """
    X, Y = gauss_vs_laplace(m, 2, seed=seed)
    jg = joint_gram(KernelSpec("rbf", 0.0), X, Y)
    reports = {}
    for variant in VARIANTS:
        monotone = True
        max_reads = 0
        total = 0
        for b in range(B):
            perm = permutation_stream(seed, b).permutation(2 * m)
            labels, inv = _labels_and_inverse(perm, m)
            if variant == "optimized":
                rec = RecordingMatrix(jg.K)
                stat = _audit_round(rec, labels, perm, m, permuted=False)
                # the paired-diagonal gather is an O(m) epilogue; the audit
                # covers the O(m^2) triangle sweep
                sweep = rec.addresses[: -m]
            else:
                Kp = jg.K[np.ix_(perm, perm)]
                rec = RecordingMatrix(Kp)
                stat = _audit_round(rec, labels, perm, m, permuted=True, inv=inv)
                sweep = rec.addresses[: -m]
            expected = sample_null_optimized(jg, B=b + 1, seed=seed).values[b]
            assert stat == expected, "audit traversal diverged from the compiled sampler"
            monotone &= all(x <= y for x, y in zip(sweep, sweep[1:]))
            counts = np.bincount(np.asarray(sweep))
            max_reads = max(max_reads, int(counts.max()))
            total += len(sweep)
        reports[variant] = AuditReport(variant, bool(monotone), max_reads, total)
    return reports


def _time_variant(jg: JointGram, B: int, threads: int, variant: str, seed: int) -> float:
    start = time.perf_counter()
    if variant == "optimized":
        sample_null_optimized(jg, B=B, seed=seed, threads=threads)
    elif variant == "naive":
        sample_null_naive(jg, B=B, seed=seed)
    else:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    return time.perf_counter() - start


def run_bench(
    m_list,
    B: int = 200,
    threads_list=(1,),
    variants=VARIANTS,
    reps: int = 3,
    seed: int = 0,
    out_csv=None,
    warmup_B: int | None = None,
) -> list[BenchRecord]:
    """Time each (m, threads, variant) cell.

    The kernel matrix is precomputed outside the timed region; one
    warm-up call per cell is excluded from the timings.
    """
    for m in m_list:
        if m < 4:
            raise ValueError(f"m must be >= 4, got {m}")
    records = []
    rows = []
    for m in m_list:
        X, Y = gauss_vs_laplace(m, 2, seed=seed)
        spec = KernelSpec("rbf", float(np.log(median_heuristic(X, Y, seed=seed))))
        jg = joint_gram(spec, X, Y)
        for variant in variants:
            for threads in threads_list:
                wb = warmup_B if warmup_B is not None else max(1, min(B, 5))
                _time_variant(jg, wb, threads, variant, seed)  # warm-up, untimed
                times = []
                for rep in range(reps):
                    secs = _time_variant(jg, B, threads, variant, seed)
                    times.append(secs)
                    rows.append([m, B, threads, variant, rep, f"{secs:.6f}"])
                records.append(
                    BenchRecord(
                        m=m, B=B, threads=threads, variant=variant,
                        wall_seconds=float(np.mean(times)),
                        min_seconds=float(np.min(times)), reps=reps,
                    )
                )
        del jg
    if out_csv is not None:
        with open(out_csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(BENCH_CSV_COLUMNS)
            w.writerows(rows)
    return records
