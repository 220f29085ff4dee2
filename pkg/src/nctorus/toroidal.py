"""Discrete calculus on Z^n: toroidal symbols, differences and interpolation.

A toroidal symbol is a table ``k -> rho_k`` of algebra elements on the box
``|k|_inf <= K``.  Standard symbols restrict to such tables; tables extend back
to smooth symbols through the cardinal kernel ``phi`` with ``phi(0) = 1`` and
``phi(k) = 0`` for ``k != 0``.  The kernel is the Fourier transform of an even
bump ``theta_1`` supported in ``(-2 pi, 2 pi)`` with
``theta_1(t) + theta_1(2 pi - t) = 1 / (2 pi)`` on ``[0, 2 pi]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.interpolate import CubicSpline

from .algebra import AlgebraElement, derivation, fit_loglog
from .cutoffs import smooth_step
from .errors import ConstructionError, DomainError, InvalidArgument, PreconditionViolation
from .lattice import ThetaMatrix, as_index, as_order, box_points, orders_up_to, sub_orders, multi_binom
from .symbols import element_norm

TWO_PI = 2.0 * np.pi


def _stack(elements, n: int):
    """Union of supports and the (len(elements), P) coefficient matrix."""
    if not elements:
        return np.zeros((0, n), dtype=np.int64), np.zeros((0, 0), dtype=complex)
    allidx = [e.indices for e in elements]
    union = np.unique(np.concatenate(allidx, axis=0), axis=0) if any(a.shape[0] for a in allidx) \
        else np.zeros((0, n), dtype=np.int64)
    lookup = {tuple(k): i for i, k in enumerate(union)}
    mat = np.zeros((len(elements), union.shape[0]), dtype=complex)
    for row, e in enumerate(elements):
        for k, v in zip(e.indices, e.values):
            mat[row, lookup[tuple(k)]] = v
    return union, mat


class ToroidalSymbol:
    """Lattice table ``k -> rho_k``; ``declared_order`` is ``None`` when unknown."""

    def __init__(self, theta: ThetaMatrix, table: Mapping, K: int | None = None,
                 declared_order: float | None = None, schwartz: bool = False):
        self.theta = theta
        self.n = theta.n
        tab = {}
        for k, v in table.items():
            k = as_index(k, self.n)
            if not isinstance(v, AlgebraElement):
                v = AlgebraElement.identity(theta, v)
            tab[k] = v
        self.table = tab
        if K is None:
            K = max((max(abs(x) for x in k) for k in tab), default=0)
        self.K = int(K)
        self.declared_order = declared_order
        self.schwartz = schwartz

    @classmethod
    def from_function(cls, theta: ThetaMatrix, fn: Callable, K: int, **kw) -> "ToroidalSymbol":
        """Table ``fn(k)`` on the full box; scalar return values become multiples of 1."""
        pts = box_points(K, theta.n)
        return cls(theta, {tuple(int(x) for x in k): fn(k) for k in pts}, K, **kw)

    def __getitem__(self, k) -> AlgebraElement:
        return self.table[as_index(k, self.n)]

    def __contains__(self, k) -> bool:
        return as_index(k, self.n) in self.table

    def __len__(self):
        return len(self.table)

    def keys(self):
        return self.table.keys()

    def items(self):
        return self.table.items()

    def distance(self, other: "ToroidalSymbol", radius: int | None = None) -> float:
        worst = 0.0
        for k, v in self.table.items():
            if radius is not None and max(abs(x) for x in k) > radius:
                continue
            if k in other.table:
                worst = max(worst, v.distance(other.table[k]))
        return worst

    def delta(self, alpha) -> "ToroidalSymbol":
        return ToroidalSymbol(self.theta, {k: derivation(v, alpha) for k, v in self.table.items()},
                              self.K, self.declared_order, self.schwartz)

    def shell_norms(self, norm_radius: int | None = None):
        """``[(r, max_{|k|_inf = r} ||rho_k||)]`` for ``r = 0..K``."""
        best = np.zeros(self.K + 1)
        for k, v in self.table.items():
            r = max((abs(x) for x in k), default=0)
            if r <= self.K:
                best[r] = max(best[r], element_norm(v, norm_radius))
        return list(enumerate(best.tolist()))

    def seminorm(self, m: float, A: int = 0, B: int = 1, norm_radius: int | None = None) -> float:
        """Sampled ``max (1+|k|)^(-m+|beta|) ||delta^alpha Delta^beta rho_k||`` over the table."""
        best = 0.0
        for beta in orders_up_to(self.n, B):
            diff = difference(self, beta) if any(beta) else self
            for alpha in orders_up_to(self.n, A):
                for k, v in diff.items():
                    w = (1.0 + np.linalg.norm(k)) ** (-m + sum(beta))
                    best = max(best, w * element_norm(derivation(v, alpha), norm_radius))
        return best


@dataclass(frozen=True)
class TemperedSequence:
    """Scalar lattice sequence with a verified bound ``|v_k| <= C (1+|k|)^N``."""

    table: dict
    N: float
    C: float

    @classmethod
    def from_table(cls, table: Mapping, N: float) -> "TemperedSequence":
        tab = {as_index(k): complex(v) for k, v in table.items()}
        C = max((abs(v) / (1.0 + np.linalg.norm(k)) ** N for k, v in tab.items()), default=0.0)
        return cls(tab, float(N), float(C))

    @classmethod
    def from_function(cls, fn: Callable, K: int, n: int, N: float) -> "TemperedSequence":
        return cls.from_table({tuple(int(x) for x in k): fn(k) for k in box_points(K, n)}, N)

    def check_growth(self) -> bool:
        return all(abs(v) <= self.C * (1.0 + np.linalg.norm(k)) ** self.N * (1 + 1e-12)
                   for k, v in self.table.items())

    def to_element(self, theta: ThetaMatrix) -> AlgebraElement:
        return AlgebraElement(theta, self.table)


# --------------------------------------------------------------------------
# differences

def _shift_axis(rho: ToroidalSymbol, axis: int, step: int) -> ToroidalSymbol:
    """One forward (step=+1) or backward (step=-1) difference along ``axis``."""
    out = {}
    for k, v in rho.table.items():
        nb = list(k)
        nb[axis] += step
        nb = tuple(nb)
        if nb not in rho.table:
            continue
        out[k] = rho.table[nb] - v if step > 0 else v - rho.table[nb]
    return ToroidalSymbol(rho.theta, out, rho.K, rho.declared_order, rho.schwartz)


def difference(rho: ToroidalSymbol, beta, direction: str = "forward") -> ToroidalSymbol:
    """``Delta^beta`` (forward, ``u_{k+e_i} - u_k``) or backward (``u_k - u_{k-e_i}``).

    The result is defined where every needed neighbour is in the table, so the
    domain loses ``beta_i`` layers along axis ``i``.
    """
    beta = as_order(beta, rho.n)
    if direction not in ("forward", "backward"):
        raise InvalidArgument(f"direction must be forward or backward, not {direction!r}")
    step = 1 if direction == "forward" else -1
    out = rho
    for axis, b in enumerate(beta):
        for _ in range(b):
            out = _shift_axis(out, axis, step)
    if any(beta) and not out.table:
        raise InvalidArgument(f"difference of order {beta} exhausts the table of radius {rho.K}")
    return out


def restrict(rho, K: int, theta: ThetaMatrix | None = None) -> ToroidalSymbol:
    """Evaluate a standard symbol at every lattice point with ``|k|_inf <= K``."""
    theta = theta or rho.theta
    order = getattr(rho, "order", None)
    order = None if order is None else float(np.real(order))
    return ToroidalSymbol.from_function(theta, lambda k: rho(np.asarray(k, dtype=float)), K,
                                        declared_order=order)


def difference_minus_derivative(rho, alpha, points) -> list:
    """``||Delta^alpha rho(k) - d_xi^alpha rho(k)||`` at the given lattice points.

    ``Delta^alpha rho(k) = sum_{gamma <= alpha} (-1)^{|alpha-gamma|} C(alpha, gamma) rho(k + gamma)``.
    Values below the cancellation floor ``1e-12 * sum ||C(alpha, gamma) rho(k + gamma)||``
    are reported as exact zeros.
    """
    alpha = as_order(alpha, rho.n)
    d = rho.dxi(alpha)
    out = []
    for k in points:
        k = np.asarray(k, dtype=float)
        acc, floor = None, 0.0
        for gamma in sub_orders(alpha):
            sign = (-1) ** (sum(alpha) - sum(gamma))
            term = rho(k + np.asarray(gamma, dtype=float)).scale(sign * multi_binom(alpha, gamma))
            floor += term.l1()
            acc = term if acc is None else acc + term
        val = element_norm(acc - d(k))
        out.append(val if val > 1e-12 * floor else 0.0)
    return out


def lattice_shells(n: int, radii, directions: int = 8) -> list:
    """Rounded lattice points ``round(r * omega)`` on each shell, one list per radius."""
    if n == 1:
        dirs = np.array([[1.0], [-1.0]])
    else:
        t = TWO_PI * (np.arange(directions) + 0.5) / directions
        dirs = np.zeros((directions, n))
        dirs[:, 0], dirs[:, 1] = np.cos(t), np.sin(t)
    return [np.unique(np.rint(r * dirs), axis=0) for r in radii]


def difference_order_fit(rho, alpha, radii=None, directions: int = 8, tail: float = 0.5) -> float:
    """Fitted decay order of ``Delta^alpha rho - d^alpha rho`` on lattice shells."""
    radii = 2.0 ** np.arange(3, 11) if radii is None else np.asarray(radii, dtype=float)
    shells = lattice_shells(rho.n, radii, directions)
    vals = np.array([max(difference_minus_derivative(rho, alpha, pts)) for pts in shells])
    if not np.any(vals > 0):
        return float("-inf")
    slope, _ = fit_loglog(radii, vals, tail=tail)
    return float("-inf") if slope is None else slope


# --------------------------------------------------------------------------
# interpolation kernel

@dataclass
class InterpolationKernel:
    """The 1-D profile ``theta_1`` and a spline cache of ``phi_1 = F[theta_1]``.

    ``margin`` compresses the smooth step so that ``theta_1`` equals
    ``1/(2 pi)`` on ``|t| <= 2 pi margin`` and vanishes for
    ``|t| >= 2 pi (1 - margin)``.
    """

    margin: float
    quadrature_order: int
    panels: int
    step: float
    extent: float
    window: float
    xi: np.ndarray = field(repr=False)
    samples: np.ndarray = field(repr=False)
    partition_residual: float = 0.0
    tail_bound: float = 0.0

    def __post_init__(self):
        self._spline = CubicSpline(self.xi, self.samples, bc_type="not-a-knot")

    def theta1(self, t):
        return theta1_profile(t, self.margin)

    def phi1(self, x):
        """Cached ``phi_1``; zero beyond the kernel window."""
        x = np.abs(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        inside = x <= self.window
        out[inside] = self._spline(x[inside])
        return out

    def phi(self, x):
        """Tensor kernel ``phi(x) = prod_j phi_1(x_j)`` for points of shape (..., n)."""
        x = np.asarray(x, dtype=float)
        return np.prod(self.phi1(x), axis=-1)

    def metadata(self) -> dict:
        return {"margin": self.margin, "quadrature_order": self.quadrature_order,
                "panels": self.panels, "step": self.step, "extent": self.extent,
                "window": self.window, "partition_residual": self.partition_residual,
                "tail_bound": self.tail_bound}


def theta1_profile(t, margin: float = 0.05):
    """``(2 pi)^-1 S_m((2 pi - |t|) / 2 pi)`` with ``S_m(x) = S((x - m) / (1 - 2m))``."""
    t = np.abs(np.asarray(t, dtype=float))
    x = (TWO_PI - t) / TWO_PI
    s = smooth_step((x - margin) / (1.0 - 2.0 * margin))
    return np.where(t < TWO_PI, s, 0.0) / TWO_PI


def phi1_quadrature(x, margin: float = 0.05, order: int = 64, panels: int = 64,
                    chunk: int = 2048) -> np.ndarray:
    """``phi_1(x) = 2 int_0^{2 pi} theta_1(t) cos(t x) dt`` by composite Gauss-Legendre."""
    gx, gw = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, TWO_PI, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    weights = (half[:, None] * gw[None, :]).ravel() * theta1_profile(nodes, margin)
    keep = weights != 0.0
    nodes, weights = nodes[keep], weights[keep]
    x = np.asarray(x, dtype=float).ravel()
    out = np.empty_like(x)
    for i in range(0, x.size, chunk):
        out[i:i + chunk] = 2.0 * (np.cos(np.outer(x[i:i + chunk], nodes)) @ weights)
    return out


def build_kernel(quadrature_order: int = 64, panels: int = 64, step: float = 1.0 / 512,
                 window: float = 30.0, margin: float = 0.05) -> InterpolationKernel:
    """Tabulate ``phi_1`` on ``[0, window + 1]`` and check the partition identity."""
    if quadrature_order < 32:
        raise InvalidArgument("quadrature order must be at least 32")
    if not 0.0 < margin < 0.25:
        raise InvalidArgument("margin must lie in (0, 1/4)")
    t = np.linspace(0.0, TWO_PI, 2001)
    resid = float(np.max(np.abs(theta1_profile(t, margin) + theta1_profile(TWO_PI - t, margin)
                                - 1.0 / TWO_PI)))
    if resid > 1e-8:
        raise ConstructionError(f"partition identity residual {resid:.3e} exceeds 1e-8")
    extent = window + 1.0
    xi = np.arange(0.0, extent + step / 2, step)
    samples = phi1_quadrature(xi, margin, quadrature_order, panels)
    tail = float(np.max(np.abs(samples[xi >= window - 1.0])))
    return InterpolationKernel(margin, quadrature_order, panels, step, extent, window,
                               xi, samples, resid, tail)


class ExtendedSymbol:
    """``xi -> sum_k phi(xi - k) rho_k`` over the table, with the kernel window."""

    def __init__(self, rho: ToroidalSymbol, kernel: InterpolationKernel, margin: int = 2):
        self.rho = rho
        self.kernel = kernel
        self.theta = rho.theta
        self.n = rho.n
        self.margin = int(margin)
        self.order = rho.declared_order
        keys = sorted(rho.table)
        self.points = np.array(keys, dtype=float).reshape(-1, self.n)
        self.union, self.matrix = _stack([rho.table[k] for k in keys], self.n)

    @property
    def trusted(self) -> float:
        return self.rho.K - self.margin

    def in_window(self, xi) -> bool:
        return float(np.max(np.abs(np.asarray(xi, dtype=float)))) <= self.trusted

    def __call__(self, xi) -> AlgebraElement:
        xi = np.asarray(xi, dtype=float).reshape(self.n)
        if not self.in_window(xi):
            raise DomainError(f"xi={xi.tolist()} lies outside the trusted window |xi|_inf <= {self.trusted}",
                              point=xi.tolist(), trusted=self.trusted)
        w = self.kernel.phi(xi[None, :] - self.points)
        vals = w @ self.matrix
        return AlgebraElement.from_arrays(self.theta, self.union, vals)

    def dxi(self, beta):
        from .symbols import FiniteDifferenceSymbol
        return FiniteDifferenceSymbol(self, beta)


def extend(rho: ToroidalSymbol, kernel: InterpolationKernel | None = None, margin: int = 2) -> ExtendedSymbol:
    return ExtendedSymbol(rho, kernel or default_kernel(), margin)


_DEFAULT_KERNEL: InterpolationKernel | None = None


def default_kernel() -> InterpolationKernel:
    """Process-wide kernel with default parameters, built on first use."""
    global _DEFAULT_KERNEL
    if _DEFAULT_KERNEL is None:
        _DEFAULT_KERNEL = build_kernel()
    return _DEFAULT_KERNEL


# --------------------------------------------------------------------------
# summation by parts and smoothing

def summation_by_parts_check(u: TemperedSequence, rho: ToroidalSymbol, alpha,
                             boundary_tol: float = 1e-12):
    """Both sides of ``sum (bar-Delta^alpha u)_k rho_k = (-1)^|alpha| sum u_k (Delta^alpha rho)_k``.

    ``u`` is treated as zero outside the region where ``k + alpha`` stays in the
    table; the mass it carries outside that region must be below ``boundary_tol``.
    """
    alpha = as_order(alpha, rho.n)
    limit = rho.K
    inner, outer_mass = {}, 0.0
    for k, v in u.table.items():
        if all(-limit <= x and x + a <= limit for x, a in zip(k, alpha)):
            inner[k] = v
        else:
            outer_mass += abs(v)
    if outer_mass > boundary_tol:
        raise PreconditionViolation(f"sequence carries mass {outer_mass:.3e} near the table edge",
                                    boundary_mass=outer_mass)
    # backward differences of u on all of Z^n
    bar = dict(inner)
    for axis, a in enumerate(alpha):
        for _ in range(a):
            nxt = {}
            for k in set(bar) | {tuple(x + (j == axis) for j, x in enumerate(k)) for k in bar}:
                prev = tuple(x - (j == axis) for j, x in enumerate(k))
                nxt[k] = bar.get(k, 0.0) - bar.get(prev, 0.0)
            bar = nxt
    zero = AlgebraElement.zero(rho.theta)
    lhs = zero
    for k, c in bar.items():
        if c != 0:
            lhs = lhs + rho[k].scale(c)
    diff = difference(rho, alpha) if any(alpha) else rho
    rhs = zero
    for k, c in inner.items():
        if c != 0:
            rhs = rhs + diff[k].scale(c)
    return lhs, rhs.scale((-1) ** sum(alpha))


SCHWARTZ_THRESHOLD = -6.0
RESIDUAL_BOUND = 1.0


@dataclass(frozen=True)
class SmoothingVerdict:
    kind: str  # "schwartz", "order" or "inconclusive"
    order: float | None = None
    residual: float = 0.0
    head_slope: float | None = None

    def __str__(self):
        return f"order({self.order:.3f})" if self.kind == "order" else self.kind


def classify_smoothing(rho: ToroidalSymbol, threshold: float = SCHWARTZ_THRESHOLD,
                       residual_bound: float = RESIDUAL_BOUND,
                       norm_radius: int | None = None) -> SmoothingVerdict:
    """Decide between rapid decay and a polynomial order from the shell maxima of ``||rho_k||``.

    A table is called Schwartz when it vanishes identically, when it vanishes on
    its outer shells, or when the tail slope is below ``threshold`` *and*
    steeper than the head slope (log-log concavity, the signature of
    superpolynomial decay).
    """
    if rho.K < 8:
        raise InvalidArgument("classification needs a table radius of at least 8")
    shells = rho.shell_norms(norm_radius)
    radii = np.array([r for r, _ in shells], dtype=float)
    vals = np.array([v for _, v in shells])
    scale = max(vals.max(), 0.0)
    if scale == 0.0:
        return SmoothingVerdict("schwartz")
    if vals[-1] <= 1e-15 * scale:
        return SmoothingVerdict("schwartz", float("-inf"))
    tail, resid = fit_loglog(radii, vals, tail=0.5)
    head, _ = fit_loglog(radii[: rho.K // 2 + 1], vals[: rho.K // 2 + 1], tail=1.0)
    if tail is None:
        return SmoothingVerdict("inconclusive")
    if tail < threshold and head is not None and tail < head:
        return SmoothingVerdict("schwartz", tail, resid, head)
    if resid > residual_bound:
        return SmoothingVerdict("inconclusive", tail, resid, head)
    return SmoothingVerdict("order", tail, resid, head)
