import csv

import numpy as np
import pytest

from mmdpower.bench import BENCH_CSV_COLUMNS, cache_profile, run_bench
from mmdpower.kernels import KernelSpec, joint_gram
from mmdpower.nulldist import sample_null_naive, sample_null_optimized


def test_cache_profile_optimized_is_monotone_single_read():
    reports = cache_profile(m=8, B=3, seed=0)
    opt = reports["optimized"]
    assert opt.monotone
    assert opt.max_reads_per_entry == 1
    # full strict upper triangle of the pooled 16x16 matrix, 3 rounds
    assert opt.entries_read == 3 * (16 * 15 // 2)


def test_cache_profile_naive_is_permuted():
    reports = cache_profile(m=8, B=3, seed=0)
    assert not reports["naive"].monotone


def test_timed_variants_stay_correct():
    # benchmarks never trade correctness: both variants agree bit-exactly
    rng = np.random.default_rng(0)
    X = rng.normal(size=(12, 2))
    Y = rng.normal(size=(12, 2)) + 0.4
    jg = joint_gram(KernelSpec("rbf", 0.0), X, Y)
    opt = sample_null_optimized(jg, B=20, seed=3, threads=2)
    naive = sample_null_naive(jg, B=20, seed=3)
    assert np.array_equal(opt.values, naive.values)


def test_run_bench_records_and_csv(tmp_path):
    out = tmp_path / "bench.csv"
    records = run_bench([8, 16], B=5, threads_list=(1, 2), variants=("optimized",),
                        reps=2, seed=0, out_csv=out)
    assert len(records) == 2 * 1 * 2  # m values x variants x thread counts
    for rec in records:
        assert rec.wall_seconds > 0
        assert rec.min_seconds <= rec.wall_seconds
        assert rec.reps == 2
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == BENCH_CSV_COLUMNS
    assert len(rows) == 1 + 2 * 2 * 2  # header + cells x reps
    for row in rows[1:]:
        assert float(row[-1]) > 0


def test_run_bench_rejects_tiny_m():
    with pytest.raises(ValueError):
        run_bench([2], B=5)
