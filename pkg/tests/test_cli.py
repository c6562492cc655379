import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from sqcat import __version__
from sqcat.cli import main, sweep


def run(tmp_path, *args, name="out.csv"):
    out = tmp_path / name
    code = main(["--out", str(out), *args])
    return code, out


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# ")
    meta = json.loads(lines[0][2:])
    rows = list(csv.reader(lines[1:]))
    return meta, rows[0], [[float(v) for v in r] for r in rows[1:]]


def test_sweep_is_inclusive():
    assert sweep(0.1, 0.5, 0.1).tolist() == pytest.approx([0.1, 0.2, 0.3, 0.4, 0.5])
    assert sweep(0.0, 0.25, 0.1).tolist() == pytest.approx([0.0, 0.1, 0.2, 0.25])
    assert sweep(0.3, 0.3, 1.0).tolist() == [0.3]


def test_herald_surface_metadata_and_rows(tmp_path):
    code, out = run(tmp_path, "--experiment", "herald-surface", "--r-min", "0.3", "--r-max", "0.5",
                    "--r-step", "0.1", "--q-min", "0.2", "--q-max", "0.4", "--q-step", "0.1")
    assert code == 0
    meta, header, rows = read_csv(out)
    assert header == ["r", "q", "P", "F", "leakage"]
    assert len(rows) == 9
    assert meta["experiment"] == "herald-surface"
    assert meta["version"] == __version__
    cfg = meta["config"]
    assert cfg["cutoff"] == 5 and cfg["displacement_mode"] == "series6"
    assert cfg["r_range"] == [0.3, 0.5, 0.1] and cfg["q_range"] == [0.2, 0.4, 0.1]
    assert all(0 < row[2] <= 1 and 0 < row[3] <= 1 for row in rows)
    assert meta["summary"]["P_max"] == pytest.approx(max(row[2] for row in rows))


def test_byte_identical_reruns_regardless_of_threads(tmp_path):
    args = ["--experiment", "herald-surface", "--r-min", "0.3", "--r-max", "0.4", "--r-step", "0.05",
            "--q-min", "0.3", "--q-max", "0.5", "--q-step", "0.1"]
    _, a = run(tmp_path, *args, "--threads", "1", name="a.csv")
    _, b = run(tmp_path, *args, "--threads", "4", name="b.csv")
    assert a.read_bytes() == b.read_bytes()


def test_q8_scaling_point_is_stable(tmp_path):
    code, out = run(tmp_path, "--experiment", "herald-surface", "--r-min", "0.5", "--r-max", "0.5",
                    "--q-min", "0.01", "--q-max", "0.02", "--q-step", "0.01")
    assert code == 0
    _, _, rows = read_csv(out)
    ratios = [row[2] / row[1] ** 8 for row in rows]
    assert all(math.isfinite(x) for x in ratios)
    assert abs(ratios[1] / ratios[0] - 1) < 0.05


def test_json_mirrors_csv(tmp_path):
    base = ["--experiment", "kerr-demo", "--alpha", "1.0", "2.0"]
    _, c = run(tmp_path, *base)
    _, j = run(tmp_path, *base, "--format", "json", name="out.json")
    meta, header, rows = read_csv(c)
    doc = json.loads(j.read_text())
    assert doc["columns"] == header
    assert np.allclose(doc["rows"], rows)
    assert doc["metadata"]["config"]["output_format"] == "json"


@pytest.mark.parametrize(
    "args",
    [
        ["--experiment", "herald-surface", "--r-min", "0.5", "--r-max", "0.4"],
        ["--experiment", "herald-surface", "--r-min", "0.1"],
        ["--experiment", "herald-surface", "--q-max", "0.95"],
        ["--experiment", "herald-surface", "--q-step", "0"],
        ["--experiment", "kerr-demo", "--alpha", "0"],
        ["--experiment", "wigner", "--cutoff", "3"],
        ["--experiment", "entropy", "--r-max", "1.6"],
    ],
)
def test_usage_errors_leave_no_file(tmp_path, args):
    code, out = run(tmp_path, *args)
    assert code == 2
    assert not out.exists()
    assert list(tmp_path.iterdir()) == []


def test_unknown_state_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--experiment", "wigner", "--state", "banana"])
    assert exc.value.code == 2


def test_leakage_breach_is_a_numerical_failure(tmp_path):
    code, out = run(tmp_path, "--experiment", "entropy", "--cutoff", "24", "--r-min", "1.4", "--r-max", "1.5",
                    "--r-step", "0.1")
    assert code == 3
    assert not out.exists()


def test_wigner_cat_origin_in_metadata(tmp_path):
    code, out = run(tmp_path, "--experiment", "wigner", "--state", "coherent-cat-minus", "--a", "1",
                    "--grid-extent", "1", "--grid-step", "0.25")
    assert code == 0
    meta, header, rows = read_csv(out)
    assert header == ["re_alpha", "im_alpha", "W"]
    assert meta["summary"]["W0"] == pytest.approx(-0.6366, abs=1e-3)
    assert meta["config"]["cutoff"] == 40 and meta["config"]["grid_step"] == 0.25
    assert len(rows) == 81


def test_wigner_plus_cat_origin_positive(tmp_path):
    _, out = run(tmp_path, "--experiment", "wigner", "--state", "squeezed-cat-plus", "--r", "1.0",
                 "--grid-extent", "0.5", "--grid-step", "0.25")
    meta, _, _ = read_csv(out)
    assert meta["summary"]["W0"] > 0
    assert "r=1.0" in meta["summary"]["state_descriptor"]


def test_wigner_vacuum_max(tmp_path):
    _, out = run(tmp_path, "--experiment", "wigner", "--state", "vacuum", "--grid-extent", "1", "--grid-step", "0.5")
    meta, _, rows = read_csv(out)
    assert max(row[2] for row in rows) == pytest.approx(2 / math.pi, abs=1e-12)
    assert meta["summary"]["W_max"] == pytest.approx(2 / math.pi, abs=1e-12)


def test_entropy_command(tmp_path):
    code, out = run(tmp_path, "--experiment", "entropy", "--r-min", "0", "--r-max", "1.0", "--r-step", "0.05")
    assert code == 0
    meta, header, rows = read_csv(out)
    assert header == ["r", "S_minus", "S_plus", "S_tmsv", "leakage"]
    assert 0.777 <= meta["summary"]["crossover_r"] <= 0.797
    assert meta["summary"]["mapping_note"] == "q = tanh(r)"
    assert meta["config"]["cutoff"] >= 24
    assert rows[0][3] == 0.0
    assert max(row[4] for row in rows) <= 1e-6


def test_entropy_small_r_limit(tmp_path):
    _, out = run(tmp_path, "--experiment", "entropy", "--r-min", "0.01", "--r-max", "0.01")
    _, _, rows = read_csv(out)
    assert rows[0][1] == pytest.approx(1.5, abs=0.01)


def test_kerr_demo(tmp_path):
    code, out = run(tmp_path, "--experiment", "kerr-demo", "--alpha", "3.0")
    assert code == 0
    meta, header, rows = read_csv(out)
    row = dict(zip(header, rows[0]))
    assert row["F_plus"] == pytest.approx(1.0, abs=1e-6)
    assert row["F_minus"] == pytest.approx(1.0, abs=1e-6)
    assert row["P_sum"] == pytest.approx(1.0, abs=2 * row["non_orthogonality"])


def test_minus_convert(tmp_path):
    code, out = run(tmp_path, "--experiment", "minus-convert", "--r-min", "0.5", "--r-max", "0.5")
    assert code == 0
    meta, header, rows = read_csv(out)
    row = dict(zip(header, rows[0]))
    assert abs(row["T_scan"] - row["T_analytic"]) <= 1e-3
    assert row["F_analytic"] >= row["F_published_T"]


def test_console_script_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "sqcat.cli", "--experiment", "kerr-demo", "--alpha", "2", "--format", "json"],
        capture_output=True, text=True, check=True,
    )
    doc = json.loads(proc.stdout)
    assert doc["metadata"]["experiment"] == "kerr-demo"
