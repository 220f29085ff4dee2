import json

import numpy as np
import pytest
from hypothesis import given

from nctorus import io, symbols, toroidal
from nctorus.algebra import AlgebraElement
from nctorus.lattice import ThetaMatrix

from conftest import elements, thetas

TH = ThetaMatrix(2, [0.25])


@given(thetas(), __import__("hypothesis").strategies.data())
def test_element_round_trip_is_exact(th, data):
    u = data.draw(elements(th))
    back = io.element_from_json(json.loads(json.dumps(io.element_to_json(u))))
    assert back.theta == u.theta
    assert back.distance(u) == 0.0


def test_element_parse_errors_locate_problem():
    bad = {"n": 2, "theta_upper": [0.25], "radius": 1, "coeffs": [{"k": [1], "re": 1.0, "im": 0.0}]}
    with pytest.raises(io.ParseError) as exc:
        io.element_from_json(bad)
    assert "coeffs[0]" in exc.value.where
    with pytest.raises(io.ParseError, match="missing field 'radius'"):
        io.element_from_json({"n": 2, "theta_upper": [0.25]})
    with pytest.raises(io.ParseError):
        io.element_from_json({"n": 2, "theta_upper": [0.1, 0.2], "radius": 0, "coeffs": []})


def test_invalid_json_reports_line_and_column(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "n": 2,\n  oops\n}')
    with pytest.raises(io.ParseError) as exc:
        io.read_json(p)
    assert exc.value.where.endswith(":3:3")


def test_symbol_round_trip():
    rho = symbols.bracket_xi_power(1.5, 3, 2, TH)
    back = io.symbol_from_json(json.loads(json.dumps(io.symbol_to_json(rho))), TH)
    pts = [np.array([2.0, 1.0]), np.array([-0.3, 5.0])]
    assert back.max_component_difference(rho, pts) == 0.0


def test_symbol_offsets_must_be_contiguous():
    obj = io.symbol_to_json(symbols.bracket_xi_power(1.0, 2, 2, TH))
    obj["components"][1]["degree_offset"] = 5
    with pytest.raises(io.ParseError):
        io.symbol_from_json(obj, TH)


def test_toroidal_round_trip():
    rho = toroidal.restrict(symbols.bracket_exact(2, TH), 3)
    back = io.toroidal_from_json(json.loads(json.dumps(io.toroidal_to_json(rho))))
    assert back.K == 3 and back.distance(rho) == 0.0


def test_kernel_round_trip():
    k = toroidal.default_kernel()
    back = io.kernel_from_json(json.loads(json.dumps(io.kernel_to_json(k))))
    x = np.linspace(-5, 5, 37)
    assert np.array_equal(back.phi1(x), k.phi1(x))


def test_spectrum_csv_sorted():
    text = io.spectrum_csv([3.0, -1.0, 1j])
    assert text.splitlines() == ["re,im", "-1.0,0.0", "0.0,1.0", "3.0,0.0"]
