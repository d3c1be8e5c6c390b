from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

import tevelev.grid as grid_module
from tevelev import cli
from tevelev.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("argv, first", [
    (["deg", "--g", "3", "--ell", "-1"], "4"),
    (["deg", "--g", "0", "--ell", "0"], "1"),
    (["deg", "--g", "2", "--ell", "0", "--mu", "1,1;1;1;1"], "3"),
])
def test_deg(capsys, argv, first):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert out.splitlines()[0] == first


def test_deg_json_envelope(capsys):
    code, out, _ = run(capsys, "deg", "--g", "2", "--ell", "0", "--mu", "1,1;1;1;1", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["instance"] == {"g": 2, "ell": 0, "mu": "1,1;1;1;1"}
    assert doc["result"] == {"value": 3}
    assert doc["meta"]["provenance"] == "general"


def test_unsorted_profiles_warn_and_proceed(capsys):
    code, out, err = run(capsys, "deg", "--g", "2", "--ell", "0", "--mu", "1;1;1,1;1")
    assert code == 0 and out.startswith("3")
    assert "reordered" in err


@pytest.mark.parametrize("argv", [
    ["deg", "--g", "1", "--ell", "-1"],
    ["deg", "--g", "2", "--ell", "0", "--mu", "1,x;1"],
    ["deg", "--g", "2", "--ell", "0", "--mu", "1,1;1;1"],
    ["covers", "--g", "2", "--ell", "0", "--mu", "1,1;1;1;1"],
    ["hurwitz", "--d", "3", "--profiles", "3;3"],
    ["deg"],
])
def test_invalid_input_exits_2(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_grid_csv_round_trip(capsys):
    code, out, _ = run(capsys, "grid", "--g", "3", "--ell", "0", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert len(rows) == 8
    assert list(rows[0]) == ["word", "j", "delta", "joined_ends", "merge_size"]


@pytest.mark.parametrize("argv, count", [
    (["grid", "--g", "1", "--ell", "0"], 2),
    (["grid", "--g", "2", "--ell", "-1"], 1),
])
def test_grid_text(capsys, argv, count):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert out.splitlines()[-1] == f"total {count}"
    assert len(out.splitlines()) == count + 2


def test_grid_json_total_matches_degree(capsys):
    _, out, _ = run(capsys, "grid", "--g", "4", "--ell", "1", "--mu", "2;1;1;1;1;1;1;1", "--format", "json")
    doc = json.loads(out)
    _, deg, _ = run(capsys, "deg", "--g", "4", "--ell", "1", "--mu", "2;1;1;1;1;1;1;1")
    assert len(doc["result"]["cells"]) == doc["result"]["total"] == int(deg.split()[0])


def test_covers_json(capsys):
    code, out, _ = run(capsys, "covers", "--g", "2", "--ell", "-1", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert len(doc["result"]["covers"]) == 1
    assert doc["result"]["covers"][0]["multiplicity"] == "1"


def test_covers_dot_files(tmp_path, capsys):
    target = tmp_path / "cover.dot"
    code, _, _ = run(capsys, "covers", "--g", "1", "--ell", "1", "--format", "dot", "--out", str(target))
    assert code == 0
    files = sorted(p.name for p in tmp_path.iterdir())
    assert files == ["cover_1.dot", "cover_2.dot"]
    assert (tmp_path / "cover_1.dot").read_text().startswith("graph")


@pytest.mark.parametrize("argv, want", [
    (["hurwitz", "--d", "3", "--profiles", "3;3;1,1,1", "--unmarked"], "1/3"),
    (["hurwitz", "--d", "3", "--profiles", "3;3;1,1,1"], "1"),
    (["hurwitz", "--d", "1", "--profiles", "1;1;1"], "1"),
    (["hurwitz", "--d", "4", "--profiles", "4;2,1,1;3,1"], "1"),
    # Klein four-group: 3 choices of s1, 2 of s2, over 4!
    (["hurwitz", "--d", "4", "--profiles", "2,2;2,2;2,2"], "1/4"),
])
def test_hurwitz(capsys, argv, want):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert out.strip() == want


def test_hurwitz_out_of_range_exits_3(capsys):
    code, _, err = run(capsys, "hurwitz", "--d", "8", "--profiles", "2,2,2,2;2,2,2,2;2,2,2,2")
    assert code == 3 and "oracle" in err


def test_l2_check_reports_counterexample(capsys):
    code, out, _ = run(capsys, "check", "--lemma", "l2", "--d-max", "12")
    assert code == 1
    assert "FAIL" in out and "d=10 j1=0 j2=0 L1=0 L2=4 L3=4" in out
    code, out, _ = run(capsys, "check", "--lemma", "l2", "--d-max", "9")
    assert code == 0 and "no L2>=4 feasible" in out


def test_outputs_are_deterministic(capsys):
    for argv in (["grid", "--g", "5", "--ell", "1", "--format", "json"],
                 ["covers", "--g", "2", "--ell", "1", "--format", "json"],
                 ["covers", "--g", "2", "--ell", "0", "--format", "dot"]):
        _, a, _ = run(capsys, *argv)
        _, b, _ = run(capsys, *argv)
        assert a == b


def test_checks_pass_on_small_ranges():
    assert cli.check_formula_grid(6, 4).ok
    assert cli.check_widths(8).ok
    assert cli.check_multiplicity(3).ok
    assert cli.check_oracle(4).ok


def test_off_by_one_band_is_caught_at_the_smallest_genus(monkeypatch):
    def wide_band(m, n):
        return range(m + 1, n - m)
    monkeypatch.setattr(grid_module, "column_band", wide_band)
    monkeypatch.setattr(cli, "column_band", wide_band)
    res = cli.check_formula_grid(4, 0)
    assert not res.ok
    assert res.counterexample.startswith("g=1 ")
    assert not cli.check_widths(4).ok


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "tevelev", "deg", "--g", "3", "--ell", "0"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "8"
