"""Pseudodifferential and differential operators acting on algebra elements.

Operators with a symbol ``rho`` act through the lattice formula
``P_rho u = sum_k u_k rho(k) U^k``; the oscillating-integral route in
:mod:`nctorus.oscint` is kept as an independent cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import AlgebraElement, derivation, multiply
from .errors import InvalidArgument
from .gns import MetricTensor, functional_calculus, metric_det_sqrt, metric_inverse, trusted_radius
from .lattice import ThetaMatrix, as_order, box_points, multi_binom, sub_orders, unit


class LatticeSymbol:
    """``k -> rho(k)`` on lattice points.

    ``fn`` takes an integer tuple and returns an :class:`AlgebraElement` or a
    scalar (a multiple of the unit).  ``delta_fn(j)`` optionally gives the
    symbol ``k -> delta_j(rho(k))``; when absent it is computed pointwise.
    """

    def __init__(self, theta: ThetaMatrix, fn: Callable, name: str = "symbol"):
        self.theta = theta
        self.n = theta.n
        self.fn = fn
        self.name = name
        self._cache: dict = {}

    @classmethod
    def from_standard(cls, rho, theta: ThetaMatrix | None = None) -> "LatticeSymbol":
        """Lattice evaluation of any evaluable symbol (classical, toroidal extension, ...)."""
        return cls(theta or rho.theta, lambda k: rho(np.asarray(k, dtype=float)), getattr(rho, "name", "standard"))

    @classmethod
    def from_table(cls, table) -> "LatticeSymbol":
        """A :class:`~nctorus.toroidal.ToroidalSymbol`; points outside the table raise."""
        def fn(k):
            if k not in table:
                raise InvalidArgument(f"lattice point {k} lies outside the toroidal table (K={table.K})")
            return table[k]
        return cls(table.theta, fn, "toroidal")

    @classmethod
    def scalar(cls, theta: ThetaMatrix, f: Callable, name: str = "scalar") -> "LatticeSymbol":
        """A scalar function of ``k`` (given as a float array)."""
        return cls(theta, lambda k: complex(f(np.asarray(k, dtype=float))), name)

    @classmethod
    def constant(cls, a: AlgebraElement) -> "LatticeSymbol":
        return cls(a.theta, lambda k: a, "constant")

    @classmethod
    def polynomial(cls, theta: ThetaMatrix, coeffs: dict) -> "LatticeSymbol":
        """``sum_alpha a_alpha k^alpha``."""
        items = [(as_order(a, theta.n), c if isinstance(c, AlgebraElement) else AlgebraElement.identity(theta, c))
                 for a, c in coeffs.items()]

        def fn(k):
            acc = AlgebraElement.zero(theta)
            for alpha, c in items:
                acc = acc + c.scale(float(np.prod(np.asarray(k, dtype=float) ** np.asarray(alpha))))
            return acc
        return cls(theta, fn, "polynomial")

    def __call__(self, k) -> AlgebraElement:
        k = tuple(int(x) for x in k)
        hit = self._cache.get(k)
        if hit is None:
            v = self.fn(k)
            if not isinstance(v, AlgebraElement):
                v = AlgebraElement.identity(self.theta, v)
            self._cache[k] = hit = v
        return hit

    def delta(self, alpha) -> "LatticeSymbol":
        alpha = as_order(alpha, self.n)
        return LatticeSymbol(self.theta, lambda k: derivation(self(k), alpha), f"delta{alpha}{self.name}")


def _check(theta: ThetaMatrix, u: AlgebraElement):
    if u.theta != theta:
        raise InvalidArgument("operator and element live over different theta matrices")


def apply_psido(rho: LatticeSymbol, u: AlgebraElement) -> AlgebraElement:
    """``P_rho u = sum_k u_k rho(k) U^k`` over the support of ``u``."""
    _check(rho.theta, u)
    acc = AlgebraElement.zero(u.theta, u.radius)
    for k, c in zip(u.indices, u.values):
        kt = tuple(int(x) for x in k)
        acc = acc + multiply(rho(kt), AlgebraElement.monomial(u.theta, kt)).scale(c)
    return acc


@dataclass(frozen=True)
class DifferentialOperator:
    """``sum_alpha a_alpha delta^alpha`` with coefficients in the algebra."""

    theta: ThetaMatrix
    terms: tuple  # ((alpha, AlgebraElement), ...)

    @classmethod
    def build(cls, theta: ThetaMatrix, terms) -> "DifferentialOperator":
        merged: dict = {}
        items = terms.items() if isinstance(terms, dict) else terms
        for alpha, c in items:
            alpha = as_order(alpha, theta.n)
            if not isinstance(c, AlgebraElement):
                c = AlgebraElement.identity(theta, c)
            if c.theta != theta:
                raise InvalidArgument("coefficient lives over a different theta")
            merged[alpha] = merged[alpha] + c if alpha in merged else c
        return cls(theta, tuple((a, c) for a, c in sorted(merged.items()) if not c.is_zero()))

    @classmethod
    def identity(cls, theta: ThetaMatrix) -> "DifferentialOperator":
        return cls.build(theta, {(0,) * theta.n: 1.0})

    @classmethod
    def flat_laplacian(cls, theta: ThetaMatrix) -> "DifferentialOperator":
        """``delta_1^2 + ... + delta_n^2`` (the symbol is ``|xi|^2``)."""
        return cls.build(theta, {tuple(2 * x for x in unit(theta.n, j)): 1.0 for j in range(theta.n)})

    @property
    def order(self) -> int:
        return max((sum(a) for a, _ in self.terms), default=0)

    def symbol(self) -> LatticeSymbol:
        return LatticeSymbol.polynomial(self.theta, dict(self.terms))

    def __call__(self, u: AlgebraElement) -> AlgebraElement:
        return apply_differential(self, u)


def apply_differential(P: DifferentialOperator, u: AlgebraElement) -> AlgebraElement:
    _check(P.theta, u)
    acc = AlgebraElement.zero(u.theta, u.radius)
    for alpha, a in P.terms:
        acc = acc + multiply(a, derivation(u, alpha))
    return acc


def compose_differential(P: DifferentialOperator, Q: DifferentialOperator) -> DifferentialOperator:
    """``PQ`` by the Leibniz rule ``a delta^alpha (b delta^beta u)
    = sum C(alpha, alpha') a delta^alpha'(b) delta^(alpha''+beta) u``."""
    if P.theta != Q.theta:
        raise InvalidArgument("operators live over different theta matrices")
    terms = []
    for alpha, a in P.terms:
        for beta, b in Q.terms:
            for a1 in sub_orders(alpha):
                a2 = tuple(x - y for x, y in zip(alpha, a1))
                coeff = multiply(a, derivation(b, a1)).scale(multi_binom(alpha, a1))
                terms.append((tuple(x + y for x, y in zip(a2, beta)), coeff))
    return DifferentialOperator.build(P.theta, terms)


def commutator_check(rho: LatticeSymbol, j: int, u: AlgebraElement):
    """``(delta_j P_rho u - P_rho delta_j u, P_{delta_j rho} u)``."""
    e = unit(rho.n, j)
    lhs = derivation(apply_psido(rho, u), e) - apply_psido(rho, derivation(u, e))
    return lhs, apply_psido(rho.delta(e), u)


def lambda_power(s: complex, u: AlgebraElement) -> AlgebraElement:
    """``Lambda^s U^k = (1 + |k|^2)^(s/2) U^k``."""
    s = complex(s)
    return u.map_diagonal(lambda k: (1.0 + np.sum(k.astype(float) ** 2, axis=1)) ** (s / 2))


class LaplaceBeltrami:
    """``u -> nu^-1 sum_ij delta_i(w_ij delta_j u)``, ``w_ij = sqrt(nu) g^ij sqrt(nu)``.

    The coefficient elements are assembled once from the metric by functional
    calculus on the truncated representation of radius ``R`` and reused.
    """

    def __init__(self, g: MetricTensor, R: int):
        self.metric = g
        self.R = R
        self.theta = g.theta
        nu, nu_inv = metric_det_sqrt(g, R)
        inner = trusted_radius(R)
        self.nu = nu.restrict(inner)
        self.nu_inv = nu_inv.restrict(inner)
        if self.nu.is_scalar():
            sqrt_nu = AlgebraElement.identity(self.theta, np.sqrt(self.nu.coeff((0,) * self.theta.n)))
        else:
            sqrt_nu = functional_calculus(self.nu, "sqrt", R).restrict(inner)
        ginv = metric_inverse(g, R)
        self.ginv_residual = ginv.residual
        size = g.size
        self.weights = [[multiply(multiply(sqrt_nu, ginv[i, j].restrict(inner)), sqrt_nu).restrict(inner)
                         for j in range(size)] for i in range(size)]

    def __call__(self, u: AlgebraElement) -> AlgebraElement:
        _check(self.theta, u)
        n = self.theta.n
        acc = AlgebraElement.zero(self.theta)
        for i in range(n):
            inner = AlgebraElement.zero(self.theta)
            for j in range(n):
                inner = inner + multiply(self.weights[i][j], derivation(u, unit(n, j)))
            acc = acc + derivation(inner, unit(n, i))
        return multiply(self.nu_inv, acc)


def laplace_beltrami(g: MetricTensor, R: int) -> LaplaceBeltrami:
    return LaplaceBeltrami(g, R)


def operator_matrix(op: Callable, theta: ThetaMatrix, R: int) -> np.ndarray:
    """Matrix of ``op`` on ``span{U^k : |k|_inf <= R}``; column ``c`` holds ``op(U^{k_c})``."""
    pts = box_points(R, theta.n)
    lookup = {tuple(int(x) for x in k): i for i, k in enumerate(pts)}
    mat = np.zeros((pts.shape[0], pts.shape[0]), dtype=complex)
    for col, k in enumerate(pts):
        out = op(AlgebraElement.monomial(theta, k))
        for kk, v in zip(out.indices, out.values):
            row = lookup.get(tuple(int(x) for x in kk))
            if row is not None:
                mat[row, col] = v
    return mat


def spectrum_truncated(op: Callable, theta: ThetaMatrix, R: int) -> np.ndarray:
    """Eigenvalues of :func:`operator_matrix`, sorted by modulus then real part."""
    w = np.linalg.eigvals(operator_matrix(op, theta, R))
    order = np.lexsort((w.imag, w.real, np.abs(w)))
    return w[order]
