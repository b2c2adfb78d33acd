import csv
import json

import numpy as np
import pytest

from mmdpower.cli import main
from mmdpower.datasets import read_dataset, write_dataset


@pytest.fixture
def blob_files(tmp_path):
    x, y = tmp_path / "x.csv", tmp_path / "y.csv"
    rc = main(["gen", "blobs", "--epsilon", "4", "--m", "60", "--seed", "7",
               "--x-out", str(x), "--y-out", str(y)])
    assert rc == 0
    return x, y


def test_gen_shapes_and_determinism(tmp_path):
    x1, y1 = tmp_path / "x1.csv", tmp_path / "y1.csv"
    x2, y2 = tmp_path / "x2.csv", tmp_path / "y2.csv"
    for x, y in ((x1, y1), (x2, y2)):
        rc = main(["gen", "blobs", "--epsilon", "6", "--m", "40", "--seed", "3",
                   "--x-out", str(x), "--y-out", str(y)])
        assert rc == 0
    assert x1.read_bytes() == x2.read_bytes()
    assert y1.read_bytes() == y2.read_bytes()
    assert read_dataset(x1, "csv").shape == (40, 2)

    gx, gy = tmp_path / "g.bin", tmp_path / "l.bin"
    rc = main(["gen", "gauss-laplace", "--m", "30", "--d", "3", "--format", "bin",
               "--x-out", str(gx), "--y-out", str(gy)])
    assert rc == 0
    assert read_dataset(gx, "bin").shape == (30, 3)


def test_cmd_test_json_schema_and_determinism(blob_files, tmp_path):
    x, y = blob_files
    out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
    args = ["test", str(x), str(y), "--bandwidth", "1.0", "--perms", "50",
            "--seed", "2"]
    assert main(args + ["--output", str(out1)]) == 0
    assert main(args + ["--output", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    payload = json.loads(out1.read_text())
    assert payload["schema_version"] == 1
    for key in ("statistic", "threshold", "p_value", "reject", "alpha", "B", "m",
                "seed", "kernel"):
        assert key in payload
    assert payload["m"] == 60 and payload["B"] == 50
    assert payload["reject"] == (payload["statistic"] > payload["threshold"])


def test_cmd_test_b1_p_value(blob_files, tmp_path):
    x, y = blob_files
    out = tmp_path / "r.json"
    assert main(["test", str(x), str(y), "--median", "--perms", "1",
                 "--output", str(out)]) == 0
    assert json.loads(out.read_text())["p_value"] in (0.5, 1.0)


def test_cmd_select_median_single_candidate(blob_files, tmp_path):
    x, y = blob_files
    out, csv_out = tmp_path / "s.json", tmp_path / "s.csv"
    assert main(["select", str(x), str(y), "--median",
                 "--output", str(out), "--csv-out", str(csv_out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["criterion"] == "median"
    assert payload["chosen"] == 0
    assert len(payload["candidates"]) == 1
    with open(csv_out) as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 2  # header + one candidate


def test_cmd_select_grid_csv_row_count(blob_files, tmp_path):
    x, y = blob_files
    csv_out = tmp_path / "grid.csv"
    assert main(["select", str(x), str(y), "--criterion", "max-t",
                 "--grid-count", "8", "--csv-out", str(csv_out),
                 "--output", str(tmp_path / "grid.json")]) == 0
    with open(csv_out) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["index", "bandwidth", "mmd2", "variance", "t_stat",
                       "power_estimate", "chosen"]
    assert len(rows) == 1 + 8
    assert sum(int(r[-1]) for r in rows[1:]) == 1


def test_cmd_train_zero_iterations_echoes_init(blob_files, tmp_path):
    x, y = blob_files
    out, trace = tmp_path / "k.json", tmp_path / "t.csv"
    assert main(["train", str(x), str(y), "--bandwidth", "2.0", "--iterations", "0",
                 "--output", str(out), "--trace-out", str(trace)]) == 0
    payload = json.loads(out.read_text())
    assert payload["kernel"]["kind"] == "rbf"
    assert payload["kernel"]["log_bandwidth"] == pytest.approx(np.log(2.0))
    with open(trace) as fh:
        rows = list(csv.reader(fh))
    assert rows == [["iteration", "t_stat"]]


def test_cmd_train_trace_length(blob_files, tmp_path):
    x, y = blob_files
    trace = tmp_path / "t.csv"
    assert main(["train", str(x), str(y), "--ard", "--median", "--iterations", "4",
                 "--batch-size", "30", "--output", str(tmp_path / "k.json"),
                 "--trace-out", str(trace)]) == 0
    with open(trace) as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 1 + 4


def test_cmd_power_curve_rows(tmp_path):
    out = tmp_path / "pc.csv"
    assert main(["power-curve", "--epsilons", "1,4", "--methods", "median,max-t",
                 "--reps", "2", "--m", "40", "--perms", "25", "--grid-count", "4",
                 "--output", str(out)]) == 0
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["epsilon", "method", "rejection_rate", "stderr"]
    assert len(rows) == 1 + 2 * 2


def test_cmd_witness_outputs(blob_files, tmp_path):
    x, y = blob_files
    probes = tmp_path / "p.csv"
    write_dataset(np.array([[20.0, 20.0], [0.0, 0.0], [40.0, 40.0]]), probes, "csv")
    out, csv_out = tmp_path / "w.json", tmp_path / "w.csv"
    assert main(["witness", str(x), str(y), str(probes), "--median", "--top", "1",
                 "--output", str(out), "--csv-out", str(csv_out)]) == 0
    payload = json.loads(out.read_text())
    assert len(payload["top_positive"]) == 1
    with open(csv_out) as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 1 + 3


def test_cmd_bench_csv(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["bench", "--m-list", "8,12", "--perms", "4", "--reps", "1",
                 "--output", str(out)]) == 0
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["m", "B", "threads", "variant", "rep", "wall_seconds"]
    assert len(rows) == 1 + 2 * 2  # two sizes x two variants x one rep


def test_exit_code_usage_errors(blob_files, tmp_path):
    x, y = blob_files
    # no bandwidth source
    assert main(["test", str(x), str(y)]) == 1
    # mutually exclusive flags
    assert main(["test", str(x), str(y), "--bandwidth", "1.0", "--median"]) == 1
    assert main(["select", str(x), str(y), "--criterion", "max-t", "--median"]) == 1
    # missing required option
    assert main(["gen", "blobs", "--m", "10", "--x-out", str(tmp_path / "a")]) == 1


def test_exit_code_data_errors(tmp_path):
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"NOPE" + b"\x00" * 32)
    ok = tmp_path / "ok.bin"
    write_dataset(np.zeros((6, 2)), ok, "bin")
    assert main(["test", str(bad), str(ok), "--bandwidth", "1.0", "--format", "bin"]) == 2

    ragged = tmp_path / "ragged.csv"
    ragged.write_text("1,2\n3,4,5\n")
    ok_csv = tmp_path / "ok.csv"
    write_dataset(np.zeros((2, 2)), ok_csv, "csv")
    assert main(["test", str(ragged), str(ok_csv), "--bandwidth", "1.0"]) == 2


def test_exit_code_numerical_errors(tmp_path):
    x, y = tmp_path / "x.csv", tmp_path / "y.csv"
    rng = np.random.default_rng(0)
    write_dataset(rng.normal(size=(3, 2)), x, "csv")
    write_dataset(rng.normal(size=(3, 2)), y, "csv")
    # selection needs the variance estimator, which needs m >= 4
    assert main(["select", str(x), str(y), "--criterion", "max-t",
                 "--grid-count", "3", "--output", str(tmp_path / "o.json")]) == 3
