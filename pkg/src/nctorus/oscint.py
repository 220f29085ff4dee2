"""Quadrature for the oscillating integral on compactly truncated amplitudes.

An amplitude is a map ``(s, xi) -> sum_p a_p(s, xi) U^{k_p}`` over a fixed list
of lattice indices ``k_p``; its evaluator works on batches of points and
returns the (Q, P) array of coefficients.  The algebra operations that the
identities need (left/right multiplication by a constant element, ``delta^alpha``,
involution, the action ``alpha_{-s}``) act on that coefficient array, so the
quadrature never materialises per-point :class:`AlgebraElement` objects.

Everything is restricted to the integrable regime: amplitudes vanish outside
a finite box and ``J_0`` is evaluated by tensor Gauss-Legendre quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .algebra import AlgebraElement, derivation, involution, multiply
from .cutoffs import CutoffSpec, bump
from .errors import InvalidArgument, PreconditionViolation, ResourceError
from .lattice import ThetaMatrix, as_order, multi_binom, sub_orders

DEFAULT_BUDGET = 2_000_000
APPROXIMATE_UNIT = CutoffSpec("approximate-unit", 3.0, 4.0)
LT_CUTOFF = CutoffSpec("approximate-unit", 1.0, 4.0)
FD_STEP = 1e-3
_TWO_PI = 2.0 * np.pi


# --------------------------------------------------------------------------
# quadrature

@dataclass(frozen=True)
class QuadratureSpec:
    """Composite rule on each axis: ``panels`` panels of ``points`` nodes.

    ``scheme`` is ``"gauss-legendre"`` or ``"trapezoid"`` (for the trapezoid
    rule the axis carries ``points * panels + 1`` equispaced nodes).
    """

    points: int = 32
    panels: int = 1
    scheme: str = "gauss-legendre"
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.scheme not in ("gauss-legendre", "trapezoid"):
            raise InvalidArgument(f"unknown quadrature scheme {self.scheme!r}")
        if self.points < 1 or self.panels < 1:
            raise InvalidArgument("points and panels must be positive")

    def per_axis(self) -> int:
        return self.points * self.panels + (1 if self.scheme == "trapezoid" else 0)

    def nodes(self, lo: float, hi: float):
        if self.scheme == "trapezoid":
            x = np.linspace(lo, hi, self.per_axis())
            w = np.full(x.size, (hi - lo) / (x.size - 1))
            w[0] *= 0.5
            w[-1] *= 0.5
            return x, w
        gx, gw = np.polynomial.legendre.leggauss(self.points)
        edges = np.linspace(lo, hi, self.panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        x = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
        w = (half[:, None] * gw[None, :]).ravel()
        return x, w

    def refined(self) -> "QuadratureSpec":
        return QuadratureSpec(2 * self.points, self.panels, self.scheme, self.budget)


def _box(bounds, n: int) -> np.ndarray:
    b = np.asarray(bounds, dtype=float)
    if b.ndim == 0:
        b = np.array([[-float(b), float(b)]] * n)
    b = b.reshape(n, 2)
    if np.any(b[:, 1] <= b[:, 0]):
        raise InvalidArgument("box bounds must satisfy lo < hi on every axis")
    return b


def _tensor(quad: QuadratureSpec, box: np.ndarray):
    """Tensor nodes (N, d) and weights (N,) over a box of shape (d, 2)."""
    xs, ws = zip(*(quad.nodes(lo, hi) for lo, hi in box))
    grids = np.meshgrid(*xs, indexing="ij")
    wgrids = np.meshgrid(*ws, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    w = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=1)
    return pts, w


# --------------------------------------------------------------------------
# amplitudes

class Amplitude:
    """``(s, xi) -> sum_p values[:, p] U^{index[p]}``, zero outside its support box.

    Parameters
    ----------
    theta : ThetaMatrix
    index : (P, n) int array of lattice indices carried by the amplitude.
    fn : callable ``(s, xi) -> (Q, P)`` complex array for point arrays of shape (Q, n).
    s_box, xi_box : float or (n, 2) array; a float ``S`` means ``[-S, S]^n``.
    derivatives : optional callable ``(kind, j) -> Amplitude | None`` with
        ``kind`` in ``{"s", "xi"}``, giving exact partial derivatives.
    order : declared amplitude order (informational).
    """

    def __init__(self, theta: ThetaMatrix, index, fn: Callable, s_box, xi_box,
                 derivatives: Callable | None = None, order: float | None = None,
                 fd_fallback: bool = True):
        self.theta = theta
        self.n = theta.n
        self.index = np.asarray(index, dtype=np.int64).reshape(-1, self.n)
        self.fn = fn
        self.s_box = _box(s_box, self.n)
        self.xi_box = _box(xi_box, self.n)
        self._derivatives = derivatives
        self.order = order
        self.fd_fallback = fd_fallback

    # -- evaluation -------------------------------------------------------
    def values(self, s, xi) -> np.ndarray:
        s = np.asarray(s, dtype=float).reshape(-1, self.n)
        xi = np.asarray(xi, dtype=float).reshape(-1, self.n)
        out = np.asarray(self.fn(s, xi), dtype=complex).reshape(s.shape[0], self.index.shape[0])
        inside = (np.all((s >= self.s_box[:, 0]) & (s <= self.s_box[:, 1]), axis=1)
                  & np.all((xi >= self.xi_box[:, 0]) & (xi <= self.xi_box[:, 1]), axis=1))
        return np.where(inside[:, None], out, 0.0)

    def __call__(self, s, xi) -> AlgebraElement:
        v = self.values(s, xi)[0]
        return AlgebraElement.from_arrays(self.theta, self.index, v)

    def element(self, coeffs) -> AlgebraElement:
        return AlgebraElement.from_arrays(self.theta, self.index, coeffs)

    # -- derivatives ------------------------------------------------------
    def derivative(self, kind: str, j: int) -> "Amplitude":
        """``d/ds_j`` (``kind="s"``) or ``d/dxi_j`` (``kind="xi"``)."""
        if kind not in ("s", "xi") or not 0 <= j < self.n:
            raise InvalidArgument(f"bad derivative request ({kind!r}, {j})")
        if self._derivatives is not None:
            d = self._derivatives(kind, j)
            if d is not None:
                return d
        if not self.fd_fallback:
            raise InvalidArgument("no analytic derivative available and finite differences are disabled")
        return _fd_derivative(self, kind, j)

    def D(self, alpha=None, beta=None) -> "Amplitude":
        """``D_s^alpha D_xi^beta`` with ``D = -i d``."""
        out = self
        for kind, orders in (("s", alpha), ("xi", beta)):
            if orders is None:
                continue
            for j, a in enumerate(as_order(orders, self.n)):
                for _ in range(a):
                    out = out.derivative(kind, j).scale(-1j)
        return out

    # -- linear structure -------------------------------------------------
    def with_fn(self, fn, index=None, derivatives=None, s_box=None, xi_box=None) -> "Amplitude":
        return Amplitude(self.theta, self.index if index is None else index, fn,
                         self.s_box if s_box is None else s_box,
                         self.xi_box if xi_box is None else xi_box,
                         derivatives, self.order, self.fd_fallback)

    def scale(self, c: complex) -> "Amplitude":
        return self.with_fn(lambda s, xi: c * self.fn(s, xi),
                            derivatives=self._lift(lambda d: d.scale(c)))

    def __add__(self, other: "Amplitude") -> "Amplitude":
        if other.theta != self.theta:
            raise InvalidArgument("amplitudes live over different theta matrices")
        idx = np.unique(np.concatenate([self.index, other.index]), axis=0)
        lookup = {tuple(k): i for i, k in enumerate(idx)}
        pa = np.array([lookup[tuple(k)] for k in self.index], dtype=np.int64)
        pb = np.array([lookup[tuple(k)] for k in other.index], dtype=np.int64)
        lo = np.minimum(self.s_box[:, 0], other.s_box[:, 0]), np.minimum(self.xi_box[:, 0], other.xi_box[:, 0])
        hi = np.maximum(self.s_box[:, 1], other.s_box[:, 1]), np.maximum(self.xi_box[:, 1], other.xi_box[:, 1])

        def fn(s, xi):
            out = np.zeros((s.shape[0], idx.shape[0]), dtype=complex)
            out[:, pa] += self.values(s, xi)
            out[:, pb] += other.values(s, xi)
            return out

        def deriv(kind, j):
            return self.derivative(kind, j) + other.derivative(kind, j)

        return Amplitude(self.theta, idx, fn, np.stack([lo[0], hi[0]], 1), np.stack([lo[1], hi[1]], 1),
                         deriv, self.order, self.fd_fallback)

    def __sub__(self, other: "Amplitude") -> "Amplitude":
        return self + other.scale(-1.0)

    def _lift(self, op):
        if self._derivatives is None:
            return None
        return lambda kind, j: op(self.derivative(kind, j))

    def linear_map(self, matrix: np.ndarray, new_index) -> "Amplitude":
        """Apply a constant linear map to the coefficient vector: ``values @ matrix.T``."""
        mat = np.asarray(matrix, dtype=complex)
        return self.with_fn(lambda s, xi: self.values(s, xi) @ mat.T, index=new_index,
                            derivatives=self._lift(lambda d: d.linear_map(mat, new_index)))

    def times_function(self, f: Callable, df: Callable | None = None) -> "Amplitude":
        """Pointwise product with a scalar ``f(s, xi) -> (Q,)``.

        ``df(kind, j)`` may supply the partial derivatives of ``f``.
        """
        def deriv(kind, j):
            if df is None:
                return None
            a = self.derivative(kind, j).times_function(f)
            b = self.times_function(df(kind, j))
            return a + b

        return self.with_fn(lambda s, xi: f(s, xi)[:, None] * self.fn(s, xi),
                            derivatives=deriv if df is not None else None)


def _fd_derivative(a: Amplitude, kind: str, j: int, h: float = FD_STEP) -> Amplitude:
    """Fourth-order central difference; the support box is unchanged."""
    e = np.zeros(a.n)
    e[j] = h

    def fn(s, xi):
        if kind == "s":
            f = lambda t: a.values(s + t * e, xi)
        else:
            f = lambda t: a.values(s, xi + t * e)
        return (-f(2) + 8 * f(1) - 8 * f(-1) + f(-2)) / (12.0 * h)

    return Amplitude(a.theta, a.index, fn, a.s_box, a.xi_box, None, a.order, a.fd_fallback)


def _product_matrix(theta: ThetaMatrix, b: AlgebraElement, index: np.ndarray, side: str):
    """Matrix of ``v -> b v`` (side="left") or ``v -> v b`` on coefficient vectors over ``index``."""
    if side == "left":
        pairs = [(kb, vb, k) for kb, vb in zip(b.indices, b.values) for k in index]
        phases = [theta.phase_pairs(kb[None], k[None])[0] for kb, _, k in pairs]
        targets = [tuple(kb + k) for kb, _, k in pairs]
    else:
        pairs = [(kb, vb, k) for kb, vb in zip(b.indices, b.values) for k in index]
        phases = [theta.phase_pairs(k[None], kb[None])[0] for kb, _, k in pairs]
        targets = [tuple(k + kb) for kb, _, k in pairs]
    new_index = np.array(sorted(set(targets)), dtype=np.int64).reshape(-1, theta.n)
    lookup = {tuple(k): i for i, k in enumerate(new_index)}
    col = {tuple(k): i for i, k in enumerate(index)}
    mat = np.zeros((new_index.shape[0], index.shape[0]), dtype=complex)
    for (kb, vb, k), ph, t in zip(pairs, phases, targets):
        mat[lookup[t], col[tuple(k)]] += vb * np.exp(-2j * np.pi * ph)
    return mat, new_index


def left_multiply(b: AlgebraElement, a: Amplitude) -> Amplitude:
    mat, idx = _product_matrix(a.theta, b, a.index, "left")
    return a.linear_map(mat, idx)


def right_multiply(a: Amplitude, b: AlgebraElement) -> Amplitude:
    mat, idx = _product_matrix(a.theta, b, a.index, "right")
    return a.linear_map(mat, idx)


def delta_amplitude(a: Amplitude, alpha) -> Amplitude:
    alpha = np.asarray(as_order(alpha, a.n))
    return a.linear_map(np.diag(np.prod(a.index.astype(float) ** alpha, axis=1)), a.index)


def involution_amplitude(a: Amplitude) -> Amplitude:
    """``a*(s, xi) = involution(a(-s, xi))``."""
    ph = np.exp(-2j * np.pi * a.theta.phase_pairs(a.index, a.index))
    box = np.stack([-a.s_box[:, 1], -a.s_box[:, 0]], axis=1)

    def fn(s, xi):
        return np.conj(a.values(-s, xi)) * ph[None, :]

    return Amplitude(a.theta, -a.index, fn, box, a.xi_box, None, a.order, a.fd_fallback)


def monomial_weight(a: Amplitude, s_pow=None, xi_pow=None) -> Amplitude:
    """``s^s_pow xi^xi_pow a``."""
    sp = np.asarray(as_order(s_pow if s_pow is not None else (0,) * a.n, a.n))
    xp = np.asarray(as_order(xi_pow if xi_pow is not None else (0,) * a.n, a.n))
    return a.times_function(lambda s, xi: np.prod(s ** sp, axis=1) * np.prod(xi ** xp, axis=1))


def act_product(a: Amplitude, u: AlgebraElement) -> Amplitude:
    """``(s, xi) -> a(s, xi) alpha_{-s}(u)``."""
    if u.theta != a.theta:
        raise InvalidArgument("amplitude and element live over different theta matrices")
    if not len(u):
        return Amplitude(a.theta, np.zeros((0, a.n), dtype=np.int64),
                         lambda s, xi: np.zeros((s.shape[0], 0)), a.s_box, a.xi_box)
    P, Qu = a.index.shape[0], u.indices.shape[0]
    targets = (a.index[:, None, :] + u.indices[None, :, :]).reshape(-1, a.n)
    new_index, inv = np.unique(targets, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    ph = np.exp(-2j * np.pi * a.theta.phase_table(a.index, u.indices))  # (P, Qu)
    coef = (ph * u.values[None, :]).reshape(-1)
    uk = u.indices.astype(float)

    def fn(s, xi):
        av = a.values(s, xi)  # (Q, P)
        shift = np.exp(-1j * (s @ uk.T))  # (Q, Qu)
        terms = (av[:, :, None] * shift[:, None, :]).reshape(s.shape[0], -1) * coef[None, :]
        out = np.zeros((s.shape[0], new_index.shape[0]), dtype=complex)
        for col in range(terms.shape[1]):
            out[:, inv[col]] += terms[:, col]
        return out

    return Amplitude(a.theta, new_index, fn, a.s_box, a.xi_box, None, a.order, a.fd_fallback)


# --------------------------------------------------------------------------
# J_0

@dataclass(frozen=True)
class J0Result:
    value: AlgebraElement
    points: int
    refinement: float | None = None
    points_per_period: float = float("inf")


def _points_per_period(a: Amplitude, quad: QuadratureSpec) -> float:
    """Nodes per oscillation of ``exp(i s.xi)`` along the worst axis."""
    smax = np.abs(a.s_box).max(axis=1)
    xmax = np.abs(a.xi_box).max(axis=1)
    s_len = a.s_box[:, 1] - a.s_box[:, 0]
    x_len = a.xi_box[:, 1] - a.xi_box[:, 0]
    periods = np.concatenate([s_len * xmax, x_len * smax]) / _TWO_PI
    worst = periods.max()
    return float("inf") if worst == 0 else quad.per_axis() / worst


def _j0_raw(a: Amplitude, quad: QuadratureSpec, chunk: int = 1 << 16) -> tuple[np.ndarray, int]:
    n = a.n
    total = quad.per_axis() ** (2 * n)
    if total > quad.budget:
        raise ResourceError(f"{total} quadrature points exceed the budget of {quad.budget}")
    spts, sw = _tensor(quad, a.s_box)
    xpts, xw = _tensor(quad, a.xi_box)
    acc = np.zeros(a.index.shape[0], dtype=complex)
    rows = max(1, chunk // xpts.shape[0])
    for i in range(0, spts.shape[0], rows):
        sb, wb = spts[i:i + rows], sw[i:i + rows]
        S = np.repeat(sb, xpts.shape[0], axis=0)
        X = np.tile(xpts, (sb.shape[0], 1))
        W = np.repeat(wb, xpts.shape[0]) * np.tile(xw, sb.shape[0])
        phase = np.exp(1j * np.einsum("ij,ij->i", S, X))
        acc += (W * phase) @ a.values(S, X)
    return acc / _TWO_PI ** n, total


def j0(a: Amplitude, quad: QuadratureSpec | None = None) -> AlgebraElement:
    """``(2 pi)^-n iint exp(i s.xi) a(s, xi) ds dxi`` by tensor quadrature over the support box."""
    quad = quad or QuadratureSpec()
    vals, _ = _j0_raw(a, quad)
    return a.element(vals)


def j0_report(a: Amplitude, quad: QuadratureSpec | None = None, refine: bool = True) -> J0Result:
    """:func:`j0` plus the change under doubling the nodes per panel."""
    quad = quad or QuadratureSpec()
    vals, total = _j0_raw(a, quad)
    delta = None
    if refine:
        finer, _ = _j0_raw(a, quad.refined())
        delta = float(np.abs(finer - vals).max()) if vals.size else 0.0
    return J0Result(a.element(vals), total, delta, _points_per_period(a, quad))


# --------------------------------------------------------------------------
# the transposed regularisation operator

def apply_Lt(a: Amplitude, chi: CutoffSpec | None = None) -> Amplitude:
    """``L^t a`` for ``L = chi + (1-chi)/r^2 sum_j (xi_j D_{s_j} + s_j D_{xi_j})``.

    With ``r^2 = |s|^2 + |xi|^2``, ``w = (1-chi)/r^2`` and
    ``X = sum_j (xi_j d_{s_j} + s_j d_{xi_j})`` the transpose is

        L^t a = -w sum_j (xi_j D_{s_j} + s_j D_{xi_j}) a
                - 4 i s.xi (1-chi)/r^4 a + (chi - i X(chi)/r^2) a,

    i.e. the compactly supported remainder is ``chi - i X(chi) / r^2``.
    ``chi`` is a radial cutoff on R^{2n} (approximate-unit kind).
    """
    chi = chi or LT_CUTOFF
    n = a.n
    ds = [a.derivative("s", j) for j in range(n)]
    dx = [a.derivative("xi", j) for j in range(n)]
    idx = a.index

    def fn(s, xi):
        z = np.concatenate([s, xi], axis=1)
        c = chi.chi(z)
        g = chi.grad_chi(z)
        r2 = np.einsum("ij,ij->i", z, z)
        safe = np.where(r2 > 0, r2, 1.0)
        w = np.where(r2 > 0, (1.0 - c) / safe, 0.0)
        sxi = np.einsum("ij,ij->i", s, xi)
        xchi = np.einsum("ij,ij->i", xi, g[:, :n]) + np.einsum("ij,ij->i", s, g[:, n:])
        tilde = c - 1j * np.where(r2 > 0, xchi / safe, 0.0)
        mult = -4j * sxi * w / safe + tilde
        out = mult[:, None] * a.values(s, xi)
        transport = np.zeros_like(out)
        for j in range(n):
            transport += xi[:, j:j + 1] * ds[j].values(s, xi) + s[:, j:j + 1] * dx[j].values(s, xi)
        # D = -i d, so -w sum(xi D_s + s D_xi) a = i w sum(xi d_s + s d_xi) a
        return out + 1j * w[:, None] * transport

    return Amplitude(a.theta, idx, fn, a.s_box, a.xi_box, None, a.order, a.fd_fallback)


# --------------------------------------------------------------------------
# J-properties

@dataclass
class JPropertiesReport:
    module: float
    adjoint: float
    derivation: float
    integration_by_parts: float
    details: dict = field(default_factory=dict)

    def max(self) -> float:
        return max(self.module, self.adjoint, self.derivation, self.integration_by_parts)

    def as_dict(self) -> dict:
        return {"module": self.module, "adjoint": self.adjoint, "derivation": self.derivation,
                "integration_by_parts": self.integration_by_parts}


def ibp_weight(a: Amplitude, alpha, beta) -> Amplitude:
    """``e^{-is.xi} D_s^alpha D_xi^beta (e^{is.xi}) a``.

    ``D_xi^beta`` turns the phase into ``s^beta``; ``D_s^alpha`` then also hits
    that monomial, so whenever ``alpha`` and ``beta`` share a coordinate there
    are lower terms ``sum_g C(alpha, g) (-i)^|g| beta!/(beta-g)! s^(beta-g)
    xi^(alpha-g)`` beyond the leading ``s^beta xi^alpha``.
    """
    alpha = as_order(alpha, a.n)
    beta = as_order(beta, a.n)
    out = None
    for g in sub_orders(tuple(min(x, y) for x, y in zip(alpha, beta))):
        c = multi_binom(alpha, g) * (-1j) ** sum(g)
        for bj, gj in zip(beta, g):
            c *= math.perm(bj, gj)
        term = monomial_weight(a, tuple(x - y for x, y in zip(beta, g)),
                               tuple(x - y for x, y in zip(alpha, g))).scale(c)
        out = term if out is None else out + term
    return out


def j_properties_check(a: Amplitude, b1: AlgebraElement, b2: AlgebraElement, alpha, beta,
                       quad: QuadratureSpec | None = None) -> JPropertiesReport:
    """Max coefficient discrepancy of each of the four compatibility identities of ``J``.

    (i) ``J(b1 a b2) = b1 J(a) b2``; (ii) ``J(a)* = J(a*)``;
    (iii) ``delta^alpha J(a) = J(delta^alpha a)``;
    (iv) ``J(D_s^alpha D_xi^beta a) = (-1)^(|alpha|+|beta|) J(s^beta xi^alpha a)`` when
    ``alpha`` and ``beta`` involve disjoint coordinates; in general the right
    side uses :func:`ibp_weight`, which adds the lower Leibniz terms.
    """
    quad = quad or QuadratureSpec()
    alpha = as_order(alpha, a.n)
    beta = as_order(beta, a.n)
    Ja = j0(a, quad)
    lhs1 = j0(right_multiply(left_multiply(b1, a), b2), quad)
    d1 = lhs1.distance(multiply(multiply(b1, Ja), b2))
    d2 = involution(Ja).distance(j0(involution_amplitude(a), quad))
    d3 = derivation(Ja, alpha).distance(j0(delta_amplitude(a, alpha), quad))
    lhs4 = j0(a.D(alpha, beta), quad)
    rhs4 = j0(ibp_weight(a, alpha, beta), quad).scale((-1) ** (sum(alpha) + sum(beta)))
    d4 = lhs4.distance(rhs4)
    return JPropertiesReport(d1, d2, d3, d4, {"alpha": alpha, "beta": beta})


# --------------------------------------------------------------------------
# Fourier transforms and P_a

def inverse_fourier(rho, s, box, quad: QuadratureSpec | None = None, decay_tol: float = 1e-10,
                    theta: ThetaMatrix | None = None) -> AlgebraElement:
    """``rho_check(s) = (2 pi)^-n int exp(i s.xi) rho(xi) dxi`` over ``box``.

    ``rho`` maps ``xi`` to an :class:`AlgebraElement`.  Its norm on the corners
    and face midpoints of the box must stay below ``decay_tol`` (the declared
    truncation bound).
    """
    quad = quad or QuadratureSpec()
    s = np.atleast_1d(np.asarray(s, dtype=float))
    n = s.shape[0]
    b = _box(box, n)
    _check_decay(rho, b, decay_tol)
    pts, w = _tensor(quad, b)
    if pts.shape[0] > quad.budget:
        raise ResourceError(f"{pts.shape[0]} quadrature points exceed the budget of {quad.budget}")
    vals = [rho(x) for x in pts]
    weights = w * np.exp(1j * pts @ s) / _TWO_PI ** n
    acc = AlgebraElement.zero(theta or vals[0].theta)
    for wt, v in zip(weights, vals):
        acc = acc + v.scale(wt)
    return acc


def forward_fourier(f, xi, box, quad: QuadratureSpec | None = None) -> AlgebraElement:
    """``int exp(-i s.xi) f(s) ds`` over ``box`` (the inverse of :func:`inverse_fourier`)."""
    quad = quad or QuadratureSpec()
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    b = _box(box, xi.shape[0])
    pts, w = _tensor(quad, b)
    acc = None
    for p, wt in zip(pts, w * np.exp(-1j * pts @ xi)):
        term = f(p).scale(wt)
        acc = term if acc is None else acc + term
    return acc


def _check_decay(rho, box: np.ndarray, tol: float):
    n = box.shape[0]
    probes = []
    for corner in np.stack(np.meshgrid(*box, indexing="ij"), -1).reshape(-1, n):
        probes.append(corner)
    mid = box.mean(axis=1)
    for j in range(n):
        for side in (0, 1):
            p = mid.copy()
            p[j] = box[j, side]
            probes.append(p)
    worst = max(rho(p).l1() for p in probes)
    if worst > tol:
        raise PreconditionViolation(f"symbol is {worst:.3e} on the box boundary, above {tol:.1e}",
                                    boundary_value=worst)


def symbol_amplitude(rho_scalar: Callable, theta: ThetaMatrix, cutoff: CutoffSpec | None = None,
                     eps: float = 1.0) -> Amplitude:
    """``(s, xi) -> chi(eps s, eps xi) rho(xi) 1`` for a scalar symbol ``rho``.

    ``chi`` is radial on R^{2n}, so the amplitude is supported in the box of
    half-width ``r1 / eps``.  ``rho_scalar`` works on (Q, n) arrays.
    """
    cutoff = cutoff or APPROXIMATE_UNIT
    half = cutoff.r1 / eps
    zero = np.zeros((1, theta.n), dtype=np.int64)

    def fn(s, xi):
        return (cutoff.weight(np.concatenate([s, xi], axis=1), eps) * rho_scalar(xi))[:, None]

    return Amplitude(theta, zero, fn, half, half)


def p_from_amplitude(a: Amplitude, u: AlgebraElement, quad: QuadratureSpec | None = None) -> AlgebraElement:
    """``P_a u = J(a(s, xi) alpha_{-s}(u))`` in the integrable regime."""
    if not len(u):
        return AlgebraElement.zero(u.theta)
    return j0(act_product(a, u), quad)


# --------------------------------------------------------------------------
# reference amplitudes

def _bump_prime(t):
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) < 1.0
    safe = np.where(inside, 1.0 - t * t, 1.0)
    return np.where(inside, bump(t) * (-2.0 * t / safe ** 2), 0.0)


def _separable(theta, index, coeffs, f, df, g, dg, s_box, xi_box) -> Amplitude:
    """``f(s) g(xi) sum_p coeffs_p U^{k_p}`` with exact first derivatives.

    ``df(s, j)`` / ``dg(xi, j)`` return the partial derivatives of ``f`` / ``g``.
    """
    coeffs = np.asarray(coeffs, dtype=complex).reshape(1, -1)

    def make(fs, gs):
        return lambda s, xi: (fs(s) * gs(xi))[:, None] * coeffs

    def deriv(kind, j):
        if kind == "s":
            return Amplitude(theta, index, make(lambda s: df(s, j), g), s_box, xi_box)
        return Amplitude(theta, index, make(f, lambda x: dg(x, j)), s_box, xi_box)

    return Amplitude(theta, index, make(f, g), s_box, xi_box, deriv)


def standard_corpus(theta: ThetaMatrix):
    """Three reference amplitudes with exact first derivatives.

    A Gaussian profile, a separable ``f(s) g(xi)`` with ``f`` real and even,
    and a product of compact bumps.  Boxes are sized so a tensor rule of at
    most 36 nodes per axis resolves them when ``n = 2``.
    """
    n = theta.n
    e0 = tuple(1 if j == 0 else 0 for j in range(n))
    idx = np.array([(0,) * n, e0], dtype=np.int64)
    c = 1.5

    def gauss(x):
        return np.exp(-c * (x ** 2).sum(1))

    def dgauss(x, j):
        return -2.0 * c * x[:, j] * gauss(x)

    def g_sep(x):
        return np.exp(-((x - 0.25) ** 2).sum(1)) * (1.0 + 0.5j * x[:, 0])

    def dg_sep(x, j):
        base = np.exp(-((x - 0.25) ** 2).sum(1))
        out = -2.0 * (x[:, j] - 0.25) * base * (1.0 + 0.5j * x[:, 0])
        if j == 0:
            out = out + 0.5j * base
        return out

    R = 2.5

    def b(x):
        return np.prod(bump(x / R), axis=1)

    def db(x, j):
        others = np.prod(np.delete(bump(x / R), j, axis=1), axis=1)
        return _bump_prime(x[:, j] / R) / R * others

    def b_cos(s):
        return b(s) * np.cos(s[:, 0])

    def db_cos(s, j):
        out = db(s, j) * np.cos(s[:, 0])
        if j == 0:
            out = out - b(s) * np.sin(s[:, 0])
        return out

    L = 3.6
    return [
        ("gaussian", _separable(theta, idx, [1.0, 0.3 + 0.2j], gauss, dgauss, gauss, dgauss, L, L)),
        ("separable", _separable(theta, idx, [0.0, 1.0], gauss, dgauss, g_sep, dg_sep, L, L + 0.5)),
        ("compact bump", _separable(theta, idx, [0.5, 1.0j], b_cos, db_cos, b, db, R, R)),
    ]
