import csv
import json

import numpy as np
import pytest

from elscreen.cli import EXIT_INTERNAL, EXIT_OK, EXIT_USAGE, bench_el, main
from elscreen.dataset import Dataset, write_csv
from elscreen.simgen import SimulationSpec, gen_example


@pytest.fixture(scope="module")
def ex1_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "ex1.csv"
    write_csv(gen_example(SimulationSpec(1, n=400, p=60), 0), path)
    return path


@pytest.fixture(scope="module")
def ex5_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "ex5.csv"
    write_csv(gen_example(SimulationSpec(5, n=120, p=12), 0), path)
    return path


def _report(out):
    with open(out / "report.csv", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_screen_el_ranks_actives(ex1_csv, tmp_path, capsys):
    out = tmp_path / "el"
    code = main(["screen", "--input", str(ex1_csv), "--response", "Y", "--method", "el",
                 "--top-d", "4", "--threads", "1", "--out", str(out)])
    assert code == EXIT_OK
    rows = _report(out)
    top = {r["feature"] for r in rows if int(r["rank"]) <= 4}
    assert {"X1", "X3", "X4"} <= top
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["seed"] == 0
    assert len(meta["bandwidths"]) == 60
    assert "numpy" in meta["versions"]
    assert "selected 4 of 60" in capsys.readouterr().out


def test_screen_is_byte_reproducible_from_metadata(ex1_csv, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    argv = ["screen", "--input", str(ex1_csv), "--response", "Y", "--method", "sirs",
            "--out", str(a)]
    assert main(argv) == EXIT_OK
    recorded = json.loads((a / "metadata.json").read_text())["argv"]
    rerun = [str(b) if x == str(a) else x for x in recorded]
    assert main(rerun) == EXIT_OK
    assert (a / "report.csv").read_bytes() == (b / "report.csv").read_bytes()


def test_screen_thread_count_does_not_change_output(ex5_csv, tmp_path):
    base = ["screen", "--input", str(ex5_csv), "--response", "Y", "--index", "Z",
            "--method", "vc_el", "--top-d", "4"]
    assert main(base + ["--threads", "1", "--out", str(tmp_path / "t1")]) == EXIT_OK
    assert main(base + ["--threads", "3", "--out", str(tmp_path / "t3")]) == EXIT_OK
    assert (tmp_path / "t1" / "report.csv").read_bytes() == (tmp_path / "t3" / "report.csv").read_bytes()


def test_vc_without_index_fails(ex5_csv, tmp_path, capsys):
    code = main(["screen", "--input", str(ex5_csv), "--response", "Y", "--method", "vc_el",
                 "--out", str(tmp_path / "x")])
    assert code == EXIT_USAGE
    assert "--index" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["screen", "--input", "a.csv", "--out", "o"],
    ["screen", "--input", "a.csv", "--response", "Y", "--out", "o", "--bogus"],
    ["screen", "--input", "a.csv", "--response", "Y", "--out", "o", "--bandwidth", "-1"],
    ["simulate", "--example", "7", "--n", "10", "--p", "10", "--out", "o"],
    [],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_missing_input_file(tmp_path):
    assert main(["screen", "--input", str(tmp_path / "none.csv"), "--response", "Y",
                 "--out", str(tmp_path / "o")]) == EXIT_USAGE


def test_bad_response_column(ex1_csv, tmp_path, capsys):
    code = main(["screen", "--input", str(ex1_csv), "--response", "Q", "--out", str(tmp_path / "o")])
    assert code == EXIT_USAGE
    assert "Q" in capsys.readouterr().err


def test_inf_token_in_report(tmp_path):
    x = np.linspace(0, 1, 30)
    d = Dataset(x=np.column_stack([x, np.cos(7 * x)]), y=np.where(x < 0.5, 1.0, 2.0),
                response_name="Y")
    write_csv(d, tmp_path / "d.csv")
    out = tmp_path / "o"
    assert main(["screen", "--input", str(tmp_path / "d.csv"), "--response", "Y",
                 "--top-d", "1", "--out", str(out)]) == EXIT_OK
    assert "inf" in [r["stat"] for r in _report(out)]


def test_iterative_method_writes_trace(tmp_path):
    path = tmp_path / "ex3.csv"
    write_csv(gen_example(SimulationSpec(3, n=80, p=15), 0), path)
    out = tmp_path / "it"
    assert main(["screen", "--input", str(path), "--response", "Y", "--method", "iterative_el",
                 "--top-d", "5", "--out", str(out)]) == EXIT_OK
    assert (out / "trace.csv").exists()
    meta = json.loads((out / "metadata.json").read_text())
    assert set(meta["config"]) == {"screening", "iterative"}


def test_simulate_writes_table(tmp_path, capsys):
    out = tmp_path / "sim"
    argv = ["simulate", "--example", "1", "--n", "60", "--p", "20", "--reps", "2",
            "--method", "dcsis", "--seed", "9", "--threads", "1", "--out", str(out)]
    assert main(argv) == EXIT_OK
    first = (out / "frequency.csv").read_bytes()
    rows = list(csv.reader(first.decode().splitlines()))
    assert rows[0] == ["method", "example", "n", "p", "noise", "feature", "count"]
    assert [r[5] for r in rows[1:5]] == ["X1", "X2", "X3", "X4"]
    spec = json.loads((out / "spec.json").read_text())
    assert spec["spec"]["seed"] == 9
    assert "inactive mean" in capsys.readouterr().out
    assert main(argv) == EXIT_OK
    assert (out / "frequency.csv").read_bytes() == first


def test_bench_el(tmp_path):
    res = bench_el(8, 200, 1)
    assert res["hull_mismatches"] == 0 and res["max_abs_diff"] <= 1e-6
    assert main(["bench-el", "--n", "6", "--reps", "50", "--out", str(tmp_path)]) == EXIT_OK
    assert json.loads((tmp_path / "bench_el.json").read_text())["reps"] == 50
    assert main(["bench-el", "--n", "40"]) == EXIT_USAGE


def test_internal_error_exit_code(monkeypatch, ex1_csv, tmp_path):
    import elscreen.cli as cli

    def boom(*a, **k):
        raise RuntimeError("boom")

    monkeypatch.setattr(cli, "screen", boom)
    code = main(["screen", "--input", str(ex1_csv), "--response", "Y", "--out", str(tmp_path / "o")])
    assert code == EXIT_INTERNAL
