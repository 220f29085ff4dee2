import json

import numpy as np
import pytest

from nctorus import io, symbols, toroidal
from nctorus.algebra import AlgebraElement
from nctorus.cli import main
from nctorus.lattice import ThetaMatrix, box_points

TH = ThetaMatrix(2, [0.25])


@pytest.fixture
def files(tmp_path):
    io.write_json(tmp_path / "u21.json", io.element_to_json(AlgebraElement.monomial(TH, (2, 1))))
    pts = box_points(32, 2)
    order1 = AlgebraElement.from_arrays(TH, pts, (1.0 + (pts ** 2).sum(1)) ** 0.5, 32)
    io.write_json(tmp_path / "ord1.json", io.element_to_json(order1))
    io.write_json(tmp_path / "table.json",
                  io.toroidal_to_json(toroidal.restrict(symbols.bracket_exact(2, TH), 8)))
    return tmp_path


def test_verify_algebra_passes(tmp_path, capsys):
    out = tmp_path / "rep.json"
    assert main(["verify", "algebra", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["passed"] and all(r["pass"] for r in rep["rows"])
    assert all(r["formula"] for r in rep["rows"])
    assert "PASS" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [["--n", "1", "--theta="], ["--n", "3", "--theta", "0.1,0.2,0.3", "--radius", "2"]])
def test_verify_algebra_other_dimensions(tmp_path, argv):
    out = tmp_path / "rep.json"
    assert main(["verify", "algebra", "--trials", "1", *argv, "--out", str(out)]) == 0
    assert json.loads(out.read_text())["passed"]


def test_verify_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["verify", "symbols", "--seed", "7", "--out", str(a)])
    main(["verify", "symbols", "--seed", "7", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_verify_unattainable_tolerance(tmp_path):
    assert main(["verify", "algebra", "--tol", "1e-30", "--out", str(tmp_path / "r.json")]) == 1


def test_verify_budget_errors_are_reported(tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", "oscint", "--quad-points", "10", "--out", str(out)]) == 1
    rows = json.loads(out.read_text())["rows"]
    assert all("ResourceError" in (r["error"] or "") for r in rows)


def test_verify_plot(tmp_path):
    out = tmp_path / "rep.json"
    assert main(["verify", "psido", "--out", str(out), "--plot"]) == 0
    assert (tmp_path / "rep.png").read_bytes()[:4] == b"\x89PNG"


@pytest.mark.parametrize("argv", [
    ["verify", "nonsense"],
    ["verify", "algebra", "--theta", "0.1,0.2"],
    ["verify", "algebra", "--theta", "abc"],
    ["verify", "algebra", "--plot"],
    [],
])
def test_usage_errors(argv):
    assert main(argv) == 2


def test_apply_laplacian(files):
    out = files / "lap.json"
    assert main(["apply", "laplacian", str(files / "u21.json"), "--out", str(out)]) == 0
    v = io.element_from_json(io.read_json(out))
    assert len(v) == 1 and v.coeff((2, 1)) == 5.0
    assert (files / "lap.decay.csv").read_text().startswith("shell_radius,max_abs\n")


def test_apply_identity_copies(files):
    out = files / "same.json"
    assert main(["apply", "identity", str(files / "ord1.json"), "--out", str(out)]) == 0
    assert io.read_json(out) == io.read_json(files / "ord1.json")


def test_apply_lambda_drops_order(files):
    out = files / "l4.json"
    assert main(["apply", "lambda:-4", str(files / "ord1.json"), "--out", str(out), "--plot"]) == 0
    summary = json.loads((files / "l4.summary.json").read_text())
    assert summary["order_change"] == pytest.approx(-4.0, abs=0.3)
    assert (files / "l4.decay.png").exists()


def test_apply_symbol_file(files):
    sym = files / "sym.json"
    io.write_json(sym, io.symbol_to_json(symbols.polynomial_symbol(TH, {(1, 0): 1.0})))
    out = files / "s.json"
    assert main(["apply", f"symbol:{sym}", str(files / "u21.json"), "--out", str(out)]) == 0
    assert io.element_from_json(io.read_json(out)).coeff((2, 1)) == pytest.approx(2.0)


def test_apply_parse_error(files, capsys):
    bad = files / "bad.json"
    bad.write_text('{"n": 2,\n "theta_upper": [0.25],,\n}')
    assert main(["apply", "identity", str(bad), "--out", str(files / "x.json")]) == 2
    assert "bad.json:2:" in capsys.readouterr().err


@pytest.mark.parametrize("op", ["warp", "lambda:x", "delta:1"])
def test_apply_bad_operator(files, op):
    assert main(["apply", op, str(files / "u21.json"), "--out", str(files / "x.json")]) == 2


def test_extend_reproduces_table(files):
    pts = files / "pts.json"
    io.write_json(pts, {"points": [[0, 0], [2, -3], [6, 6]]})
    out = files / "ext.json"
    assert main(["extend", str(files / "table.json"), str(pts), "--out", str(out)]) == 0
    samples = json.loads(out.read_text())["samples"]
    for s in samples:
        xi = np.array(s["xi"])
        val = io.element_from_json(s["element"]).coeff((0, 0))
        assert val == pytest.approx(1 + xi @ xi, abs=1e-7)


def test_extend_midpoints_and_overshoot(files):
    pts = files / "mid.json"
    io.write_json(pts, {"points": [[0.5, 0.0], [2.5, 1.5], [4.5, -0.5]]})
    out = files / "mid-out.json"
    assert main(["extend", str(files / "table.json"), str(pts), "--out", str(out), "--plot"]) == 0
    rep = json.loads(out.read_text())
    # <xi>^2 is convex and monotone between neighbours: values land inside the cell range
    assert rep["max_overshoot"] < 0.05
    assert (files / "mid-out.png").exists()


def test_extend_empty(files):
    pts = files / "empty.json"
    io.write_json(pts, {"points": []})
    out = files / "e.json"
    assert main(["extend", str(files / "table.json"), str(pts), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["samples"] == []


def test_extend_out_of_window(files, capsys):
    pts = files / "far.json"
    io.write_json(pts, {"points": [[1, 1], [7.5, 0], [0, -9]]})
    assert main(["extend", str(files / "table.json"), str(pts), "--out", str(files / "o.json")]) == 1
    err = capsys.readouterr().err
    assert "[7.5, 0.0]" in err and "[0.0, -9.0]" in err
