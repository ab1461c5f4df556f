import csv
import json
from pathlib import Path

import numpy as np
import pytest

from linkanneal.cli import main
from linkanneal.config import TRACE_COLUMNS
from linkanneal.netlang import parse_network
from linkanneal.oneway import zeno_iterate

DATA = Path(__file__).resolve().parent.parent / "data"
FIXNET = str(DATA / "fixnet.net")
CONTRA = str(DATA / "contradiction.net")
OR2 = str(DATA / "or2.cnf")


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_check_valid(capsys):
    assert main(["check", FIXNET]) == 0
    assert "valid" in capsys.readouterr().out


def test_check_syntax_error(tmp_path, capsys):
    bad = tmp_path / "bad.net"
    bad.write_text("nodes r s\nlink r q\n")
    assert main(["check", str(bad)]) != 0
    assert "line 2, col 8" in capsys.readouterr().err


def test_check_unpaired(tmp_path, capsys):
    bad = tmp_path / "bad.net"
    bad.write_text("nodes r s t\nlink r s\n")
    assert main(["check", str(bad)]) != 0
    assert "not in any link" in capsys.readouterr().err


def test_check_missing_file(tmp_path):
    assert main(["check", str(tmp_path / "nope.net")]) == 1


@pytest.mark.parametrize("engine", ["classical", "oneway", "twoway"])
def test_solve_fixnet(engine, tmp_path):
    out = tmp_path / engine
    assert main(["solve", FIXNET, "--engine", engine, "--out", str(out), "--quiet"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["solution"] == "10" and summary["verdict"] == "solved"
    assert summary["schema_version"] == 1 and "timestamp" in summary
    assert tuple(read_rows(out / "trace.csv")[0]) == TRACE_COLUMNS


def test_solve_contradiction_twoway(tmp_path):
    assert main(["solve", CONTRA, "--engine", "twoway", "--out", str(tmp_path), "--quiet"]) == 2


def test_solve_contradiction_classical(tmp_path):
    args = ["solve", CONTRA, "--engine", "classical", "--max-steps", "200", "--out", str(tmp_path), "--quiet"]
    assert main(args) == 2


def test_solve_oneway_frozen_without_bath(tmp_path):
    args = ["solve", FIXNET, "--engine", "oneway", "--no-bath", "--out", str(tmp_path), "--quiet"]
    assert main(args) == 3
    energies = {row[2] for row in read_rows(tmp_path / "trace.csv")[1:]}
    assert energies == {"2.0"}


def test_solve_cnf_input(tmp_path):
    assert main(["solve", OR2, "--out", str(tmp_path), "--quiet"]) == 0


def test_solve_bad_input(tmp_path):
    bad = tmp_path / "bad.net"
    bad.write_text("link r s\n")
    assert main(["solve", str(bad), "--out", str(tmp_path / "o"), "--quiet"]) == 1


@pytest.mark.parametrize("engine", ["classical", "oneway", "twoway"])
def test_solve_byte_identical(engine, tmp_path):
    for run in ("a", "b"):
        main(["solve", FIXNET, "--engine", engine, "--seed", "11", "--out", str(tmp_path / run), "--quiet"])
    assert (tmp_path / "a" / "trace.csv").read_bytes() == (tmp_path / "b" / "trace.csv").read_bytes()


def test_zeno_rows(tmp_path):
    out = tmp_path / "z.csv"
    assert main(["zeno", "--phi", str(np.pi / 4), "--n", "1", "1000", "2000", "--out", str(out), "--quiet"]) == 0
    rows = read_rows(out)
    assert rows[0] == ["n", "deviation", "scaled"]
    assert float(rows[1][1]) == pytest.approx(zeno_iterate(0.0, np.pi / 4, 1)[1], rel=1e-12)
    # doubling n halves the deviation
    assert float(rows[3][1]) == pytest.approx(float(rows[2][1]) / 2, rel=0.1)


def test_zeno_zero_angle(tmp_path):
    out = tmp_path / "z.csv"
    main(["zeno", "--phi", "0", "--n", "1", "10", "100", "--out", str(out), "--quiet"])
    assert all(float(r[1]) == 0.0 for r in read_rows(out)[1:])


def test_zeno_bad_domain(tmp_path):
    assert main(["zeno", "--theta", "1.5", "--phi", "1.0", "--out", str(tmp_path / "z.csv"), "--quiet"]) == 1


def test_compare_fixnet(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["compare", FIXNET, "--runs", "30", "--out", str(out), "--quiet"]) == 0
    rows = {r[0]: r for r in read_rows(out)[1:]}
    assert float(rows["twoway"][3]) <= float(rows["oneway"][3])


def test_compare_contradiction(tmp_path):
    out = tmp_path / "c.csv"
    main(["compare", CONTRA, "--runs", "3", "--max-steps", "300", "--out", str(out), "--quiet"])
    assert all(r[2] == "0" for r in read_rows(out)[1:])


def test_compare_single_engine(tmp_path):
    out = tmp_path / "c.csv"
    main(["compare", FIXNET, "--engines", "twoway", "--runs", "4", "--out", str(out), "--quiet"])
    assert len(read_rows(out)) == 2


def test_compare_workers_match_serial(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["compare", FIXNET, "--runs", "8", "--out", str(a), "--quiet"])
    main(["compare", FIXNET, "--runs", "8", "--workers", "2", "--out", str(b), "--quiet"])
    assert a.read_bytes() == b.read_bytes()


def test_compile_round_trip(tmp_path):
    out = tmp_path / "or2.net"
    assert main(["compile", OR2, "--out", str(out), "--quiet"]) == 0
    net = parse_network(out.read_text())
    assert net.n == 4 and len(net.gates) == 1


def test_compile_malformed(tmp_path):
    bad = tmp_path / "bad.cnf"
    bad.write_text("p cnf 2 1\n1 5 0\n")
    assert main(["compile", str(bad), "--out", str(tmp_path / "x.net"), "--quiet"]) == 1


def test_compile_contradiction_is_fine(tmp_path):
    src = tmp_path / "c.cnf"
    src.write_text("p cnf 1 2\n1 0\n-1 0\n")
    assert main(["compile", str(src), "--out", str(tmp_path / "c.net"), "--quiet"]) == 0
