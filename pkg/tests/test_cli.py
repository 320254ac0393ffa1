import csv
import json

import pytest

from bensonvs.cli import COMPARE_COLUMNS, main
from bensonvs.driver import LOG_COLUMNS


@pytest.fixture
def disk_doc(tmp_path):
    path = tmp_path / "disk.json"
    assert main(["gen", "--instance", "disk", "--out", str(path)]) == 0
    return path


def test_gen_solve_certify_export(tmp_path, disk_doc, capsys):
    out, log = tmp_path / "res.json", tmp_path / "log.csv"
    assert main(["solve", "--problem", str(disk_doc), "--epsilon", "0.05", "--out", str(out), "--log", str(log), "--jobs", "1"]) == 0
    assert json.loads(out.read_text())["status"] == "Converged"
    with open(log) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == LOG_COLUMNS and len(rows) > 2
    assert main(["certify", "--result", str(out), "--problem", str(disk_doc), "--samples", "500", "--jobs", "1"]) == 0
    assert json.loads(capsys.readouterr().out.split("\n", 1)[1])["passed"] is True
    vcsv = tmp_path / "v.csv"
    assert main(["export", "--result", str(out), "--csv", str(vcsv)]) == 0
    assert vcsv.read_text().startswith("set,index,y1,y2")
    assert main(["export", "--result", str(out), "--off", str(tmp_path / "m.off")]) == 1  # q = 2


def test_ellipsoid_off(tmp_path):
    prob, out, off = tmp_path / "e.json", tmp_path / "r.json", tmp_path / "m.off"
    assert main(["gen", "--instance", "ellipsoid", "--a", "5", "--out", str(prob)]) == 0
    assert main(["solve", "--problem", str(prob), "--epsilon", "0.4", "--out", str(out)]) == 0
    assert main(["export", "--result", str(out), "--off", str(off), "--which", "outer"]) == 0
    assert off.read_text().startswith("OFF\n")


def test_max_iter_exit_code(disk_doc):
    assert main(["solve", "--problem", str(disk_doc), "--epsilon", "0.001", "--max-iter", "2"]) == 2


def test_compare_table(tmp_path, capsys):
    prob, table = tmp_path / "t.json", tmp_path / "cmp.csv"
    assert main(["gen", "--instance", "truss", "--nonneg-loads", "--out", str(prob)]) == 0
    assert main(["compare", "--problem", str(prob), "--epsilon", "0.5", "--seeds", "1", "2", "--csv", str(table)]) == 0
    with open(table) as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == COMPARE_COLUMNS
    assert [r["mode"] for r in rows] == ["vs", "first", "random", "random"]
    assert int(rows[0]["scalarizations"]) <= int(rows[1]["scalarizations"])
    assert "skip_rate" in capsys.readouterr().out


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["solve"],
        ["solve", "--problem", "x.json", "--epsilon", "-1"],
        ["gen", "--instance", "cube", "--out", "x.json"],
        ["solve", "--problem", "/nonexistent.json", "--epsilon", "0.1"],
        ["gen", "--instance", "ellipsoid", "--a", "-3", "--out", "/tmp/never.json"],
        ["export", "--result", "/nonexistent.json"],
    ],
)
def test_errors_exit_one(argv):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 1


def test_tolerance_flags(disk_doc, tmp_path):
    out = tmp_path / "r.json"
    assert main(["solve", "--problem", str(disk_doc), "--epsilon", "0.1", "--tol.cut", "1e-6", "--tol.gap", "1e-10", "--out", str(out)]) == 0


def test_module_entry_point():
    import subprocess
    import sys

    done = subprocess.run([sys.executable, "-m", "bensonvs", "--help"], capture_output=True, text=True)
    assert done.returncode == 0 and "certify" in done.stdout


@pytest.mark.parametrize(
    "gen_args, eps",
    [(["--instance", "truss"], "0.2"), (["--instance", "truss", "--nonneg-loads"], "0.5"), (["--instance", "enet", "--m", "8", "--n", "5", "--seed", "0"], "0.5")],
    ids=["truss", "truss-nonneg", "enet"],
)
def test_round_trip_other_families(tmp_path, gen_args, eps):
    prob, out = tmp_path / "p.json", tmp_path / "r.json"
    assert main(["gen", *gen_args, "--out", str(prob)]) == 0
    assert main(["solve", "--problem", str(prob), "--epsilon", eps, "--out", str(out)]) == 0
    assert main(["certify", "--result", str(out), "--problem", str(prob), "--jobs", "2"]) == 0
