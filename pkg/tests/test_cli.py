import io
import json
import subprocess
import sys

import numpy as np
import pytest

from accucore.cli import main, read_table
from accucore.coresets import KINDS, size_bound


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def write(path, header, values):
    lines = [",".join(header)] if header else []
    lines += [",".join(format(v, ".17g") for v in row) for row in values]
    path.write_text("\n".join(lines) + "\n")
    return path


def dataset(tmp_path, r, kind, n=40, d=3, name="in.csv"):
    if kind == "one-center":
        pts = np.outer(r.standard_normal(n), r.standard_normal(d))
        w = np.ones(n)
    else:
        pts = r.standard_normal((n, d))
        w = r.uniform(0.1, 2, n)
    header = [f"x{j}" for j in range(d)] + ["w"]
    return write(tmp_path / name, header, np.column_stack([pts, w]))


def kind_flags(kind):
    flags = ["--kind", kind, "--weights-col", "w"]
    if kind == "one-segment":
        flags += ["--time-col", "x0"]
    if kind == "lms":
        flags += ["--label-col", "x2"]
    return flags


def test_read_table_header_detection(tmp_path):
    t = read_table(write(tmp_path / "a.csv", ["a", "b"], [[1, 2], [3, 4]]))
    assert t.has_header and t.names == ["a", "b"]
    t = read_table(write(tmp_path / "b.csv", None, [[1, 2], [3, 4]]))
    assert not t.has_header and t.values.shape == (2, 2)


@pytest.mark.parametrize("kind", KINDS)
def test_round_trip(kind, tmp_path):
    r = np.random.default_rng(5)
    src = dataset(tmp_path, r, kind)
    out = tmp_path / "core.csv"
    report = tmp_path / "report.json"
    code, _, err = run(["compress", src, *kind_flags(kind), "--out", out, "--report", report, "--verify", 20])
    assert code == 0, err
    rep = json.loads(report.read_text())
    assert rep["schema"] == 1
    assert rep["kind"] == kind
    d = 2 if kind in ("one-segment", "lms") else 3
    assert rep["coreset_size"] <= size_bound(kind, d)
    assert rep["max_query_rel_error"] <= 1e-8
    code, _, err = run(["verify", src, out, *kind_flags(kind), "--seed", 42])
    assert code == 0, err
    assert json.loads(err)["passed"] is True


def test_compress_sizes(tmp_path):
    r = np.random.default_rng(9)
    src = write(tmp_path / "in.csv", ["a", "b", "c", "w"],
                np.column_stack([r.standard_normal((100, 3)), r.uniform(0, 1, 100)]))
    code, out, _ = run(["compress", src, "--kind", "one-mean-3", "--weights-col", "w"])
    assert code == 0
    assert len(out.strip().splitlines()) - 1 <= 6
    code, out, _ = run(["compress", src, "--kind", "lms", "--weights-col", "w", "--label-col", "c"])
    assert code == 0
    assert len(out.strip().splitlines()) - 1 <= 10
    assert out.splitlines()[0] == "a,b,c,weight"


def test_one_center_collinear(tmp_path):
    src = write(tmp_path / "line.csv", None, [[t, 2 * t] for t in (0.5, -1.0, 3.0, 2.0)])
    code, out, _ = run(["compress", src, "--kind", "one-center"])
    assert code == 0
    rows = out.strip().splitlines()
    assert rows[0] == "c0,c1,weight" and len(rows) == 3


def test_verify_against_itself(tmp_path):
    r = np.random.default_rng(2)
    src = dataset(tmp_path, r, "one-mean-2")
    copy = write(tmp_path / "copy.csv", ["x0", "x1", "x2", "weight"], read_table(src).values)
    code, _, err = run(["verify", src, copy, "--kind", "one-mean-2", "--weights-col", "w"])
    assert code == 0
    assert json.loads(err)["max_query_rel_error"] == 0.0


def test_corrupted_coreset(tmp_path):
    r = np.random.default_rng(4)
    src = dataset(tmp_path, r, "one-mean-3")
    out = tmp_path / "core.csv"
    assert run(["compress", src, *kind_flags("one-mean-3"), "--out", out])[0] == 0
    t = read_table(out)
    values = t.values.copy()
    values[0, -1] *= 2
    bad = write(tmp_path / "bad.csv", t.names, values)
    code, _, err = run(["verify", src, bad, *kind_flags("one-mean-3"), "--seed", 42])
    assert code == 1
    assert json.loads(err)["max_query_rel_error"] > 1e-8


def test_full_precision_output(tmp_path):
    src = write(tmp_path / "in.csv", ["a", "b"], [[0.1, 1 / 3]])
    code, out, _ = run(["compress", src, "--kind", "vectors-sum-2"])
    assert code == 0
    a, b, w = (float(v) for v in out.splitlines()[1].split(","))
    assert (a, b, w) == (0.1, 1 / 3, 1.0)


@pytest.mark.parametrize(
    "argv, needle",
    [
        (["--kind", "one-segment"], "--time-col"),
        (["--kind", "lms"], "--label-col"),
        (["--kind", "one-mean-2", "--time-col", "a"], "one-segment"),
        (["--kind", "one-mean-2", "--weights-col", "zz"], "'zz' not found"),
        (["--kind", "one-mean-2", "--weights-col", "9"], "out of range"),
        (["--kind", "one-mean-3", "--weights-col", "w"], "row 3"),
        (["--kind", "one-center"], "collinear"),
    ],
)
def test_usage_errors(tmp_path, argv, needle):
    src = write(tmp_path / "in.csv", ["a", "b", "w"], [[0, 1, 1], [2, 3, -1], [1, 5, 1]])
    code, _, err = run(["compress", src, *argv])
    assert code == 2
    assert needle in err


def test_weight_name_clash(tmp_path):
    src = write(tmp_path / "in.csv", ["a", "weight"], [[1, 2], [3, 4]])
    assert run(["compress", src, "--kind", "vectors-sum-2"])[0] == 2
    assert run(["compress", src, "--kind", "vectors-sum-2", "--weights-col", "weight"])[0] == 0


def test_bad_cells(tmp_path):
    src = tmp_path / "bad.csv"
    src.write_text("a,b\n1,2\n3,oops\n")
    code, _, err = run(["compress", src, "--kind", "one-mean-1"])
    assert code == 2 and "row 3" in err and "'b'" in err
    src.write_text("a,b\n1,2\n3\n")
    assert run(["compress", src, "--kind", "one-mean-1"])[0] == 2
    src.write_text("a,b\n")
    assert run(["compress", src, "--kind", "one-mean-1"])[0] == 2


def test_io_errors(tmp_path):
    assert run(["compress", tmp_path / "missing.csv", "--kind", "one-mean-1"])[0] == 3
    src = write(tmp_path / "in.csv", ["a"], [[1.0], [2.0]])
    code, _, _ = run(["compress", src, "--kind", "one-mean-1", "--out", tmp_path / "no" / "dir.csv"])
    assert code == 3


def test_unknown_kind_and_missing_command():
    assert run(["compress", "x.csv", "--kind", "two-center"])[0] == 2
    assert run([])[0] == 2


def test_verify_dimension_mismatch(tmp_path):
    src = write(tmp_path / "in.csv", ["a", "b"], [[1, 2], [3, 4], [5, 7]])
    other = write(tmp_path / "c.csv", ["a", "weight"], [[1, 1]])
    assert run(["verify", src, other, "--kind", "one-mean-2"])[0] == 2


@pytest.mark.parametrize("variant", ["plain", "streaming", "fast"])
def test_bench(variant):
    code, out, _ = run(["bench", "--n", 1000, "--d", 2, "--variant", variant, "--seed", 3])
    assert code == 0
    rep = json.loads(out)
    assert rep["schema"] == 1 and rep["output_size"] <= 3 and rep["seconds"] >= 0


def test_bench_minimal_and_too_small():
    code, out, _ = run(["bench", "--n", 4, "--d", 2, "--variant", "plain"])
    assert code == 0 and json.loads(out)["output_size"] <= 3
    assert run(["bench", "--n", 3, "--d", 2])[0] == 2


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "accucore", "bench", "--n", "50", "--d", "2"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["command"] == "bench"
