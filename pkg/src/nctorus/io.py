"""JSON and CSV formats for elements, symbols, toroidal tables and kernels.

Element JSON::

    {"n": 2, "theta_upper": [0.25], "radius": 3,
     "coeffs": [{"k": [1, 0], "re": 1.0, "im": 0.0}, ...]}

Floats are written with ``repr`` precision, so a write/read cycle is bit-exact.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .algebra import AlgebraElement
from .cutoffs import CutoffSpec
from .errors import InvalidArgument
from .lattice import ThetaMatrix
from .symbols import ClassicalSymbol, HomogeneousSymbol


class ParseError(InvalidArgument):
    """A file does not match the expected format; ``where`` locates the problem."""

    def __init__(self, message: str, where: str = ""):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where


def _require(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"missing field {key!r}", where)
    return obj[key]


# -- elements ---------------------------------------------------------------

def theta_to_json(theta: ThetaMatrix) -> dict:
    return {"n": theta.n, "theta_upper": list(theta.upper)}


def element_to_json(u: AlgebraElement) -> dict:
    out = theta_to_json(u.theta)
    out["radius"] = int(u.radius)
    out["coeffs"] = [{"k": [int(x) for x in k], "re": float(v.real), "im": float(v.imag)}
                     for k, v in zip(u.indices, u.values)]
    return out


def element_from_json(obj, where: str = "element") -> AlgebraElement:
    n = _require(obj, "n", where)
    upper = _require(obj, "theta_upper", where)
    try:
        theta = ThetaMatrix(int(n), upper)
    except (InvalidArgument, TypeError, ValueError) as exc:
        raise ParseError(str(exc), where) from exc
    radius = int(_require(obj, "radius", where))
    coeffs = {}
    for i, c in enumerate(_require(obj, "coeffs", where)):
        here = f"{where}.coeffs[{i}]"
        k = _require(c, "k", here)
        if not isinstance(k, list) or len(k) != theta.n:
            raise ParseError(f"index must be a list of {theta.n} integers", here)
        coeffs[tuple(int(x) for x in k)] = complex(float(_require(c, "re", here)),
                                                  float(_require(c, "im", here)))
    return AlgebraElement(theta, coeffs, radius)


# -- classical symbols ------------------------------------------------------

def symbol_to_json(rho: ClassicalSymbol) -> dict:
    comps = []
    for j, h in enumerate(rho.components):
        comps.append({"degree_offset": j,
                      "terms": [{"alpha": list(a), "coeff": element_to_json(c)} for a, c in h.terms.items()]})
    return {"order_re": rho.order.real, "order_im": rho.order.imag, "components": comps,
            "excision": {"r0": rho.excision.r0, "r1": rho.excision.r1}}


def symbol_from_json(obj, theta: ThetaMatrix | None = None, where: str = "symbol") -> ClassicalSymbol:
    order = complex(float(_require(obj, "order_re", where)), float(obj.get("order_im", 0.0)))
    exc = obj.get("excision", {"r0": 0.25, "r1": 0.75})
    comps_json = sorted(_require(obj, "components", where), key=lambda c: c.get("degree_offset", 0))
    if not comps_json:
        raise ParseError("at least one component is required", where)
    comps = []
    for i, c in enumerate(comps_json):
        here = f"{where}.components[{i}]"
        off = int(_require(c, "degree_offset", here))
        if off != i:
            raise ParseError(f"degree offsets must be 0..J without gaps, found {off} at position {i}", here)
        terms = []
        for t_i, t in enumerate(_require(c, "terms", here)):
            coeff = element_from_json(_require(t, "coeff", f"{here}.terms[{t_i}]"), f"{here}.terms[{t_i}].coeff")
            theta = theta or coeff.theta
            terms.append((tuple(_require(t, "alpha", f"{here}.terms[{t_i}]")), coeff))
        if theta is None:
            raise ParseError("cannot infer theta from an all-zero symbol; pass it explicitly", here)
        comps.append(HomogeneousSymbol(theta, order - i, terms))
    return ClassicalSymbol(order, comps, CutoffSpec("excision", float(exc["r0"]), float(exc["r1"])))


# -- toroidal tables --------------------------------------------------------

def toroidal_to_json(rho) -> dict:
    return {"K": rho.K,
            "entries": [{"k": list(k), "element": element_to_json(v)} for k, v in sorted(rho.items())]}


def toroidal_from_json(obj, where: str = "toroidal"):
    from .toroidal import ToroidalSymbol

    K = int(_require(obj, "K", where))
    entries = _require(obj, "entries", where)
    table, theta = {}, None
    for i, e in enumerate(entries):
        here = f"{where}.entries[{i}]"
        v = element_from_json(_require(e, "element", here), f"{here}.element")
        theta = theta or v.theta
        if v.theta != theta:
            raise ParseError("entries use different theta matrices", here)
        table[tuple(int(x) for x in _require(e, "k", here))] = v
    if theta is None:
        raise ParseError("table has no entries", where)
    return ToroidalSymbol(theta, table, K)


# -- kernel cache -------------------------------------------------------------

def kernel_to_json(kernel) -> dict:
    return {"metadata": kernel.metadata(), "xi": kernel.xi.tolist(), "phi1": kernel.samples.tolist()}


def kernel_from_json(obj):
    from .toroidal import InterpolationKernel

    m = obj["metadata"]
    return InterpolationKernel(m["margin"], m["quadrature_order"], m["panels"], m["step"], m["extent"],
                               m["window"], np.asarray(obj["xi"]), np.asarray(obj["phi1"]),
                               m.get("partition_residual", 0.0), m.get("tail_bound", 0.0))


# -- files --------------------------------------------------------------------

def read_json(path) -> object:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", f"{path}:{exc.lineno}:{exc.colno}") from exc


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")


def spectrum_csv(values) -> str:
    vals = np.asarray(values, dtype=complex)
    order = np.lexsort((vals.imag, vals.real, np.abs(vals)))
    lines = ["re,im"] + [f"{float(v.real)!r},{float(v.imag)!r}" for v in vals[order]]
    return "\n".join(lines) + "\n"
