import csv
import io
import json

import pytest

from incsnf.cli import main
from incsnf.errors import OutsideTheoremRange, TooLarge
from incsnf.incidence import projective_incidence_matrix
from incsnf.verify import (
    REPORT_HEADER,
    Cell,
    grid_csv,
    grid_json,
    grid_report,
    parse_config,
    verify_affine,
    verify_projective,
)


def runs(rep):
    return rep.compressed_invariants()


def test_verify_projective_examples():
    rep = verify_projective(2, 2, 2)
    assert rep.match is True
    assert rep.integer_invariants == [1, 1, 1, 1, 2, 2, 6]
    rep = verify_projective(2, 4, 2)
    assert rep.match is True
    assert runs(rep) == [[1, 10], [2, 2], [4, 8], [20, 1]]
    rep = verify_projective(3, 2, 2)
    assert rep.match is True and rep.formula_spectrum.total == 15
    assert set(rep.timings) == {"formula", "matrix", "p_local", "integer_snf"}


def test_verify_affine_examples():
    rep = verify_affine(2, 2, 1)
    assert rep.match is True and rep.integer_invariants == [1, 1, 1, 2]
    rep = verify_affine(2, 3, 1)
    assert rep.match is True and runs(rep) == [[1, 6], [3, 3]]
    rep = verify_affine(3, 2, 1)
    assert rep.match is True
    assert rep.difference_spectrum.same_as(rep.formula_spectrum)
    assert rep.oracle_spectrum.mult == rep.formula_spectrum.mult
    with pytest.raises(OutsideTheoremRange):
        verify_affine(2, 2, 2)


def test_degenerate_cells_are_oracle_only():
    rep = verify_projective(2, 3, 1)
    assert rep.match is None and rep.degenerate and rep.formula_spectrum is None
    assert rep.passed
    assert rep.oracle_spectrum.degenerate


def test_row_cap():
    with pytest.raises(TooLarge) as info:
        verify_projective(4, 9, 2, row_cap=5000)
    assert info.value.counts == {"rows": 605242, "cols": 7381, "row_cap": 5000}


def test_mismatch_detected():
    A = projective_incidence_matrix(2, 2, 2).to_dense()
    A[0, 0] ^= 1
    from incsnf.incidence import IncidenceMatrix

    rep = verify_projective(2, 2, 2, matrix=IncidenceMatrix.from_dense(A))
    assert rep.match is False and not rep.passed


def test_parse_config():
    cfg = parse_config("q = 2, 3  # fields\nn = 2..3\nspace = projective\nrow_cap = 100\n")
    assert cfg.row_cap == 100
    assert [(c.q, c.n, c.r) for c in cfg.cells] == [(2, 2, 2), (2, 3, 2), (2, 3, 3), (3, 2, 2), (3, 3, 2), (3, 3, 3)]
    cfg = parse_config("cell = 4 2 2 projective\ncell = 2 3 1 affine /x.mtx\n")
    assert cfg.cells == [Cell(4, 2, 2, "projective"), Cell(2, 3, 1, "affine", "/x.mtx")]
    assert parse_config("").cells == []
    for bad in ["nonsense", "colour = red", "cell = 2 2 2 elliptic"]:
        with pytest.raises(ValueError):
            parse_config(bad)


def test_grid_report_and_jobs():
    cfg = parse_config("q = 2,3\nn = 2..3\nspace = both\n")
    one = grid_report(cfg)
    two = grid_report(cfg, jobs=2)
    assert one["summary"] == two["summary"] == {"pass": 12, "mismatch": 0, "error": 0, "skipped": 0}
    assert grid_json(one, timings=False) == grid_json(two, timings=False)
    rows = list(csv.reader(io.StringIO(grid_csv(one))))
    assert rows[0] == REPORT_HEADER
    assert all(row[8] == "true" for row in rows[1:])


def strip_timing(text):
    """Drop the ms_total column / timings_ms field, the only run-dependent output."""
    if text.startswith("p,t,n,r"):
        return [row[:-1] for row in csv.reader(io.StringIO(text))]
    data = json.loads(text)
    for cell in data.get("cells", [data]):
        rep = cell.get("report", cell)
        rep.pop("timings_ms", None)
    return data


# -- command line -----------------------------------------------------------


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_cli_verify(capsys):
    code, out, _ = run(capsys, "verify", "--q", "2", "--n", "2", "--r", "2")
    assert code == 0
    data = json.loads(out)
    assert data["match"] is True
    assert data["integer_invariants"] == [[1, 4], [2, 2], [6, 1]]
    code, out, _ = run(capsys, "verify", "--q", "2", "--n", "2", "--r", "2", "--format", "csv")
    assert out.splitlines()[0] == ",".join(REPORT_HEADER)


def test_cli_exit_codes(capsys):
    assert run(capsys, "verify", "--q", "9", "--n", "4", "--r", "2")[0] == 3
    assert run(capsys, "verify", "--q", "2")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "verify", "--q", "6", "--n", "2", "--r", "2")[0] == 2
    assert run(capsys, "formula", "--q", "2", "--n", "2", "--r", "2", "--space", "affine")[0] == 2


def test_cli_formula(capsys):
    code, out, _ = run(capsys, "formula", "--q", "4", "--n", "2", "--r", "2")
    data = json.loads(out)
    assert code == 0
    assert data["p_spectrum"] == {"0": 10, "1": 2, "2": 9} and data["last_nonp"] == 5
    code, out, _ = run(capsys, "formula", "--q", "2", "--n", "3", "--r", "1", "--space", "affine", "--format", "csv")
    assert out.splitlines()[0] == "p,t,n,r,space,alpha,multiplicity,last_nonp"
    code, out, _ = run(capsys, "formula", "--q", "2", "--n", "2", "--r", "3")
    data = json.loads(out)
    assert data["degenerate"] is True and data["source"] == "oracle"


def test_cli_incidence_and_snf(tmp_path, capsys):
    path = tmp_path / "fano.mtx"
    assert run(capsys, "incidence", "--q", "2", "--n", "2", "--r", "2", "--out", str(path))[0] == 0
    assert path.exists() and path.with_suffix(".json").exists()
    code, out, _ = run(capsys, "snf", "--matrix", str(path))
    assert code == 0
    assert json.loads(out) == {
        "invariants": [1, 1, 1, 1, 2, 2, 6],
        "p": 2,
        "p_spectrum": {"0": 4, "1": 3},
        "last_nonp": 3,
    }
    code, out, _ = run(capsys, "snf", "--matrix", str(path), "--p", "3", "--format", "csv")
    assert out.splitlines() == ["alpha,multiplicity", "0,6", "1,1"]
    code, out, _ = run(capsys, "incidence", "--q", "3", "--n", "2", "--r", "1", "--space", "affine")
    assert out.splitlines()[:2] == ["%%MatrixMarket matrix coordinate integer general", "12 9 36"]


def test_cli_charsum(capsys):
    code, out, _ = run(capsys, "charsum", "--q", "4", "--n", "2", "--r", "2", "--format", "json")
    assert code == 0 and json.loads(out)["min_equals_alpha"] is True
    code, out, _ = run(capsys, "charsum", "--q", "2", "--n", "2", "--r", "2", "--precision", "6")
    assert out.splitlines()[0] == "b,type,alpha,min_valuation,wan_bound"


def test_cli_grid(tmp_path, capsys):
    cfg = tmp_path / "grid.cfg"
    cfg.write_text("q = 2,3\nn = 2\n")
    out_dir = tmp_path / "out"
    code, _, err = run(capsys, "grid", "--config", str(cfg), "--out", str(out_dir))
    assert code == 0
    assert "4 pass, 0 mismatch" in err
    data = json.loads((out_dir / "grid.json").read_text())
    assert [c["status"] for c in data["cells"]] == ["pass"] * 4
    assert (out_dir / "grid.csv").read_text().startswith(",".join(REPORT_HEADER))


def test_cli_empty_grid(tmp_path, capsys):
    cfg = tmp_path / "empty.cfg"
    cfg.write_text("# nothing requested\n")
    code, out, _ = run(capsys, "grid", "--config", str(cfg))
    assert code == 0
    assert json.loads(out) == {"cells": [], "summary": {"pass": 0, "mismatch": 0, "error": 0, "skipped": 0}}


def test_cli_grid_corrupted_matrix(tmp_path, capsys):
    good = tmp_path / "fano.mtx"
    projective_incidence_matrix(2, 2, 2).write(good)
    lines = good.read_text().splitlines()
    lines[2] = "1 4 1"  # move one incidence
    bad = tmp_path / "bad.mtx"
    bad.write_text("\n".join(lines) + "\n")
    cfg = tmp_path / "grid.cfg"
    cfg.write_text(f"cell = 2 2 2 projective {bad}\ncell = 2 2 2 projective {good}\ncell = 3 2 2 projective\n")
    code, out, err = run(capsys, "grid", "--config", str(cfg), "--quiet")
    assert code == 1
    statuses = sorted(c["status"] for c in json.loads(out)["cells"])
    assert statuses == ["mismatch", "pass", "pass"]
    assert "1 mismatch" in err


def test_cli_determinism(tmp_path, capsys):
    cmds = [
        ("formula", "--q", "8", "--n", "3", "--r", "2"),
        ("incidence", "--q", "3", "--n", "3", "--r", "2"),
        ("snf", "--q", "3", "--n", "2", "--r", "2"),
        ("charsum", "--q", "3", "--n", "2", "--r", "2"),
    ]
    for cmd in cmds:
        assert run(capsys, *cmd)[1] == run(capsys, *cmd)[1]
    for cmd in [("verify", "--q", "4", "--n", "3", "--r", "2"), ("grid", "--format", "csv", "--quiet")]:
        if cmd[0] == "grid":
            cfg = tmp_path / "g.cfg"
            cfg.write_text("q = 2,4\nn = 2..3\n")
            cmd = cmd + ("--config", str(cfg))
        a, b = run(capsys, *cmd)[1], run(capsys, *cmd)[1]
        assert strip_timing(a) == strip_timing(b)
