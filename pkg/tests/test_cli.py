import json
import subprocess
import sys
from pathlib import Path

import pytest

from qsys.cli import main
from qsys.qsystem import QSystem

FIX = Path(__file__).resolve().parent.parent / "fixtures"


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr()


def test_validate_fixture(capsys):
    code, out = run(["validate", str(FIX / "elliptic.json")], capsys)
    assert code == 0
    rep = json.loads(out.out)
    assert rep["integrable"] and rep["profile"]["l"] == 2


def test_validate_by_name(capsys):
    assert run(["validate", "fixture:euler_half"], capsys)[0] == 0


def test_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{bad")
    code, out = run(["validate", str(bad)], capsys)
    assert code == 2 and "malformed JSON" in out.err


def test_schema_violation(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"schema": "qsys-schema-1", "names": ["t"]}))
    code, out = run(["validate", str(bad)], capsys)
    assert code == 2 and out.err


def test_unknown_flag(capsys):
    with pytest.raises(SystemExit) as err:
        main(["validate", "fixture:elliptic", "--nope"])
    assert err.value.code == 2


def test_fold_fiber_and_roundtrip(tmp_path, capsys):
    out = tmp_path / "fold.json"
    rep_path = tmp_path / "rep.json"
    code, _ = run(["transform", "--op", "fold", "--in", str(FIX / "euler_half.json"),
                   "--out", str(out), "--report", str(rep_path)], capsys)
    assert code == 0
    rep = json.loads(rep_path.read_text())
    assert rep["fiber"]["points"] == [[0.0, 0.0]] and rep["fiber"]["includes_infinity"]
    assert rep["profile"]["d"] == 3 and rep["profile"]["l"] == 2
    Q = QSystem.load(out)
    assert Q.dumps().strip() == out.read_text().strip()
    assert run(["validate", str(out)], capsys)[0] == 0
    assert (tmp_path / "fold.json.manifest.json").exists()


def test_bound_main(tmp_path, capsys):
    out = tmp_path / "b.json"
    code, _ = run(["bound", "--formula", "main", "--params", "s=2,m=1,d=1,l=1,nu=1,k=1",
                   "--out", str(out)], capsys)
    assert code == 0
    assert json.loads(out.read_text())["linear_coefficient"] == 3280


def test_manifest_determinism(tmp_path, capsys):
    outs = []
    for k in range(2):
        out = tmp_path / f"fs{k}.json"
        assert run(["fold-search", "--points", "1+1i,2i", "--dmax", "4", "--restarts", "8",
                    "--out", str(out)], capsys)[0] == 0
        outs.append(out.read_bytes())
        man = json.loads((tmp_path / f"fs{k}.json.manifest.json").read_text())
        assert man["exit_code"] == 0 and man["subcommand"] == "fold-search"
    assert outs[0] == outs[1]


def test_count_keyhole(capsys):
    code, out = run(["count", "--poly=-1,0,1", "--points", "0"], capsys)
    assert code == 0 and json.loads(out.out)["zero_count"] == 1
    code, out = run(["count", "--poly=-1,0,1", "--points", "0", "--boundary", "interior"], capsys)
    assert json.loads(out.out)["zero_count"] == 2


def test_count_triangle(capsys):
    code, out = run(["count", "--poly", "0,1", "--contour", "triangle",
                     "--vertices=-1-1i,1-1i,1i"], capsys)
    assert code == 0 and json.loads(out.out)["zero_count"] == 1


def test_monodromy_euler(capsys):
    code, out = run(["monodromy", "--in", str(FIX / "euler_half.json"), "--point", "0"], capsys)
    assert code == 0
    assert "quasi_unipotent" in out.out


def test_fold_search_artifacts(tmp_path, capsys):
    out, csv, svg = tmp_path / "f.json", tmp_path / "f.csv", tmp_path / "f.svg"
    code, _ = run(["fold-search", "--points", "1i", "--dmax", "3", "--out", str(out),
                   "--csv", str(csv), "--svg", str(svg)], capsys)
    assert code == 0
    assert json.loads(out.read_text())["search"]["candidate"]["degree"] == 2
    assert csv.read_text().startswith("degree,")
    assert "<svg" in svg.read_text()


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "qsys", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for cmd in ("validate", "transform", "bound", "monodromy", "count", "abelian", "fold-search"):
        assert cmd in res.stdout
