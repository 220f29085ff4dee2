"""Standard and classical symbols with algebra-valued coefficients.

Homogeneous symbols use the closed grammar ``sum_alpha a_alpha xi^alpha |xi|^(q-|alpha|)``:
differentiation in ``xi``, the derivations ``delta^alpha`` and products all stay
inside it, so classical-symbol arithmetic is exact.  Semi-norms and orders are
only ever *sampled* (sphere directions times dyadic radii) and therefore are
lower bounds of the true suprema.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import itertools
from math import comb
from typing import Callable, Sequence

import numpy as np

from .algebra import AlgebraElement, derivation, fit_loglog, involution, multiply
from .cutoffs import CutoffSpec
from .errors import DomainError, InvalidArgument
from .gns import norm_estimate
from .lattice import ThetaMatrix, as_order, orders_up_to

TERM_DROP = 1e-15


def element_norm(u: AlgebraElement, R: int | None = None) -> float:
    """Operator-norm estimate used by all samplers (exact for scalar multiples of 1)."""
    return norm_estimate(u, R)


def generalized_binomial(z: complex, j: int) -> complex:
    out = 1.0 + 0j
    for i in range(j):
        out *= (z - i) / (i + 1)
    return out


# --------------------------------------------------------------------------
# sampling grids

@dataclass(frozen=True)
class SamplingGrid:
    """Directions on the unit sphere times a list of radii."""

    directions: np.ndarray
    radii: np.ndarray

    def points(self) -> np.ndarray:
        return (self.radii[:, None, None] * self.directions[None, :, :]).reshape(-1, self.directions.shape[1])

    def shells(self):
        for r in self.radii:
            yield float(r), r * self.directions

    def describe(self) -> dict:
        return {"directions": int(self.directions.shape[0]),
                "radii": [float(r) for r in self.radii]}


def sphere_directions(n: int, count: int = 26) -> np.ndarray:
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        t = 2.0 * np.pi * (np.arange(count) + 0.5) / count
        return np.stack([np.cos(t), np.sin(t)], axis=1)
    rng = np.random.default_rng(12345)
    d = rng.standard_normal((count, n))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def dyadic_grid(n: int, lo: float = 1.0, hi: float = 1024.0, count: int = 26,
                per_octave: int = 1) -> SamplingGrid:
    steps = int(round(np.log2(hi / lo) * per_octave))
    radii = lo * 2.0 ** (np.arange(steps + 1) / per_octave)
    return SamplingGrid(sphere_directions(n, count), radii)


# --------------------------------------------------------------------------
# evaluable symbols

class StandardSymbol:
    """A map ``xi -> AlgebraElement``.

    Subclasses implement ``__call__`` and may override :meth:`dxi` with an exact
    derivative; the default is a central finite difference.
    """

    theta: ThetaMatrix
    n: int
    order: complex | None = None

    def __call__(self, xi) -> AlgebraElement:  # pragma: no cover - abstract
        raise NotImplementedError

    def dxi(self, beta) -> "StandardSymbol":
        beta = as_order(beta, self.n)
        if not any(beta):
            return self
        return FiniteDifferenceSymbol(self, beta)

    def derivative(self, alpha, beta) -> "StandardSymbol":
        alpha = as_order(alpha, self.n)
        inner = self.dxi(beta)
        if not any(alpha):
            return inner
        return FunctionSymbol(lambda xi: derivation(inner(xi), alpha), self.theta)

    def __sub__(self, other: "StandardSymbol") -> "StandardSymbol":
        return FunctionSymbol(lambda xi: self(xi) - other(xi), self.theta)

    def __add__(self, other: "StandardSymbol") -> "StandardSymbol":
        return FunctionSymbol(lambda xi: self(xi) + other(xi), self.theta)


class FunctionSymbol(StandardSymbol):
    """Wraps a plain callable ``xi -> AlgebraElement``."""

    def __init__(self, fn: Callable, theta: ThetaMatrix, order: complex | None = None):
        self.fn = fn
        self.theta = theta
        self.n = theta.n
        self.order = order

    def __call__(self, xi):
        return self.fn(np.asarray(xi, dtype=float))


class FiniteDifferenceSymbol(StandardSymbol):
    """Central finite-difference ``d_xi^beta`` of another symbol (second order accurate)."""

    def __init__(self, base: StandardSymbol, beta):
        self.base = base
        self.beta = as_order(beta, base.n)
        self.theta = base.theta
        self.n = base.n

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        total = sum(self.beta)
        h = (1.0 + np.linalg.norm(xi)) * 10.0 ** (-16.0 / (total + 2))
        acc = None
        stencils = []
        for j, b in enumerate(self.beta):
            if b:
                stencils.append([(j, (b / 2.0 - i) * h, (-1) ** i * comb(b, i)) for i in range(b + 1)])
        for combo in itertools.product(*stencils):
            shift = np.zeros(self.n)
            w = 1.0
            for j, off, c in combo:
                shift[j] += off
                w *= c
            term = self.base(xi + shift).scale(w)
            acc = term if acc is None else acc + term
        return acc.scale(h ** -total)


# --------------------------------------------------------------------------
# homogeneous symbols

class HomogeneousSymbol(StandardSymbol):
    """``sum_alpha a_alpha xi^alpha |xi|^(q - |alpha|)``, homogeneous of degree ``q``."""

    def __init__(self, theta: ThetaMatrix, degree: complex, terms=None):
        self.theta = theta
        self.n = theta.n
        self.degree = complex(degree)
        self.order = self.degree
        merged: dict = {}
        for alpha, coeff in (terms.items() if isinstance(terms, dict) else (terms or [])):
            alpha = as_order(alpha, self.n)
            if not isinstance(coeff, AlgebraElement):
                coeff = AlgebraElement.identity(theta, coeff)
            merged[alpha] = merged[alpha] + coeff if alpha in merged else coeff
        self.terms = {a: c for a, c in merged.items() if c.max_abs() > TERM_DROP}

    @classmethod
    def zero(cls, theta: ThetaMatrix, degree: complex) -> "HomogeneousSymbol":
        return cls(theta, degree, {})

    @classmethod
    def radial(cls, theta: ThetaMatrix, degree: complex, coeff=1.0) -> "HomogeneousSymbol":
        """``coeff * |xi|^degree``."""
        return cls(theta, degree, {(0,) * theta.n: coeff})

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self):
        return f"HomogeneousSymbol(degree={self.degree}, terms={len(self.terms)})"

    def scalar_weights(self, xi) -> dict:
        xi = np.asarray(xi, dtype=float)
        r = float(np.linalg.norm(xi))
        if r == 0.0:
            raise DomainError("homogeneous symbols are not defined at xi = 0")
        logr = np.log(r)
        out = {}
        for alpha in self.terms:
            mono = float(np.prod(xi ** np.asarray(alpha)))
            out[alpha] = mono * np.exp((self.degree - sum(alpha)) * logr)
        return out

    def __call__(self, xi) -> AlgebraElement:
        acc = AlgebraElement.zero(self.theta)
        for alpha, w in self.scalar_weights(xi).items():
            acc = acc + self.terms[alpha].scale(w)
        return acc

    def dxi(self, beta) -> "HomogeneousSymbol":
        out = self
        for j, b in enumerate(as_order(beta, self.n)):
            for _ in range(b):
                out = diff_homogeneous(out, j)
        return out

    def delta(self, alpha) -> "HomogeneousSymbol":
        return HomogeneousSymbol(self.theta, self.degree,
                                 {a: derivation(c, alpha) for a, c in self.terms.items()})

    def __add__(self, other):
        if isinstance(other, HomogeneousSymbol):
            if abs(other.degree - self.degree) > 1e-12:
                raise InvalidArgument("cannot add homogeneous symbols of different degrees")
            return HomogeneousSymbol(self.theta, self.degree,
                                     list(self.terms.items()) + list(other.terms.items()))
        return super().__add__(other)

    def __mul__(self, other):
        if isinstance(other, HomogeneousSymbol):
            return homogeneous_product(self, other)
        return HomogeneousSymbol(self.theta, self.degree,
                                 {a: c.scale(other) for a, c in self.terms.items()})

    __rmul__ = __mul__

    def involution(self) -> "HomogeneousSymbol":
        return HomogeneousSymbol(self.theta, self.degree.conjugate(),
                                 {a: involution(c) for a, c in self.terms.items()})

    def max_difference(self, other: "HomogeneousSymbol", points) -> float:
        return max(self(x).distance(other(x)) for x in points)


def eval_homogeneous(h: HomogeneousSymbol, xi) -> AlgebraElement:
    return h(xi)


def diff_homogeneous(h: HomogeneousSymbol, j: int) -> HomogeneousSymbol:
    """``d/dxi_j`` term by term: ``alpha_j xi^(alpha-e_j)|xi|^s + s xi^(alpha+e_j)|xi|^(s-2)``."""
    if not 0 <= j < h.n:
        raise InvalidArgument(f"axis {j} out of range for n={h.n}")
    terms = []
    for alpha, c in h.terms.items():
        s = h.degree - sum(alpha)
        if alpha[j]:
            lower = list(alpha)
            lower[j] -= 1
            terms.append((tuple(lower), c.scale(alpha[j])))
        if s != 0:
            upper = list(alpha)
            upper[j] += 1
            terms.append((tuple(upper), c.scale(s)))
    return HomogeneousSymbol(h.theta, h.degree - 1, terms)


def homogeneous_product(a: HomogeneousSymbol, b: HomogeneousSymbol) -> HomogeneousSymbol:
    terms = []
    for al, ca in a.terms.items():
        for be, cb in b.terms.items():
            terms.append((tuple(x + y for x, y in zip(al, be)), multiply(ca, cb)))
    return HomogeneousSymbol(a.theta, a.degree + b.degree, terms)


# --------------------------------------------------------------------------
# classical symbols

DEFAULT_EXCISION = CutoffSpec("excision", 0.25, 0.75)


class ClassicalSymbol(StandardSymbol):
    """Order ``q`` with homogeneous components of degrees ``q, q-1, ..., q-J``.

    Evaluation realises ``sum_j (1 - chi(xi)) rho_{q-j}(xi)`` with the excision
    cutoff.  :meth:`dxi` and :meth:`delta` act componentwise; for ``|xi| >= r1``
    (where the cutoff is identically 1) this is the exact derivative.
    """

    def __init__(self, order: complex, components: Sequence[HomogeneousSymbol],
                 excision: CutoffSpec = DEFAULT_EXCISION):
        components = list(components)
        if not components:
            raise InvalidArgument("a classical symbol needs at least one component")
        self.order = complex(order)
        for j, c in enumerate(components):
            if abs(c.degree - (self.order - j)) > 1e-12:
                raise InvalidArgument(
                    f"component {j} has degree {c.degree}, expected {self.order - j}")
        self.components = components
        self.theta = components[0].theta
        self.n = self.theta.n
        self.excision = excision

    def __repr__(self):
        return f"ClassicalSymbol(order={self.order}, components={len(self.components)})"

    @property
    def J(self) -> int:
        return len(self.components) - 1

    def __call__(self, xi) -> AlgebraElement:
        return evaluate_classical(self, xi)

    def dxi(self, beta) -> "ClassicalSymbol":
        beta = as_order(beta, self.n)
        return ClassicalSymbol(self.order - sum(beta), [c.dxi(beta) for c in self.components],
                               self.excision)

    def delta(self, alpha) -> "ClassicalSymbol":
        return ClassicalSymbol(self.order, [c.delta(alpha) for c in self.components], self.excision)

    def truncated(self, J: int) -> "ClassicalSymbol":
        return ClassicalSymbol(self.order, self.components[:J + 1], self.excision)

    def homogeneous_sum(self, xi, N: int | None = None) -> AlgebraElement:
        """``sum_{j<N} rho_{q-j}(xi)`` without excision."""
        comps = self.components if N is None else self.components[:N]
        acc = AlgebraElement.zero(self.theta)
        for c in comps:
            acc = acc + c(xi)
        return acc

    def max_component_difference(self, other: "ClassicalSymbol", points, J: int | None = None) -> float:
        J = min(self.J, other.J) if J is None else J
        diff = 0.0
        for j in range(J + 1):
            a, b = self.components[j], other.components[j]
            for x in points:
                diff = max(diff, a(x).distance(b(x)))
        return diff


def evaluate_classical(rho: ClassicalSymbol, xi) -> AlgebraElement:
    xi = np.asarray(xi, dtype=float)
    w = float(rho.excision.weight(xi))
    if w == 0.0:
        return AlgebraElement.zero(rho.theta)
    return rho.homogeneous_sum(xi).scale(w)


def classical_product(rho: ClassicalSymbol, sigma: ClassicalSymbol, J: int) -> ClassicalSymbol:
    """Components ``(rho sigma)_{q+q'-j} = sum_{p+r=j} rho_{q-p} sigma_{q'-r}`` for ``j <= J``."""
    if rho.theta != sigma.theta:
        raise InvalidArgument("symbols live over different theta matrices")
    need = J + 1
    if len(rho.components) < need or len(sigma.components) < need:
        raise InvalidArgument(f"classical_product to J={J} needs {need} components in each factor")
    comps = []
    for j in range(J + 1):
        acc = HomogeneousSymbol.zero(rho.theta, rho.order + sigma.order - j)
        for p in range(j + 1):
            acc = acc + homogeneous_product(rho.components[p], sigma.components[j - p])
        comps.append(acc)
    return ClassicalSymbol(rho.order + sigma.order, comps, rho.excision)


def classical_involution(rho: ClassicalSymbol) -> ClassicalSymbol:
    return ClassicalSymbol(rho.order.conjugate(), [c.involution() for c in rho.components],
                           rho.excision)


def bracket_xi_power(s: complex, J: int, n: int, theta: ThetaMatrix | None = None) -> ClassicalSymbol:
    """Components of ``<xi>^s = sum_j binom(s/2, j) |xi|^(s-2j)`` up to degree offset ``J``."""
    if J < 0:
        raise InvalidArgument("J must be nonnegative")
    theta = ThetaMatrix.zero(n) if theta is None else theta
    comps = []
    for j in range(J + 1):
        if j % 2:
            comps.append(HomogeneousSymbol.zero(theta, s - j))
        else:
            comps.append(HomogeneousSymbol.radial(theta, s - j, generalized_binomial(s / 2, j // 2)))
    return ClassicalSymbol(s, comps)


class BracketSymbol(StandardSymbol):
    """Exact scalar symbols ``sum c * xi^alpha * (1 + |xi|^2)^p`` times the unit.

    Closed under ``d_xi``: ``d_j (xi^alpha <xi>^(2p)) = alpha_j xi^(alpha-e_j) <xi>^(2p)
    + 2p xi^(alpha+e_j) <xi>^(2p-2)``.
    """

    def __init__(self, theta: ThetaMatrix, terms, order: complex | None = None):
        self.theta = theta
        self.n = theta.n
        merged: dict = {}
        for c, alpha, p in terms:
            key = (as_order(alpha, self.n), complex(p))
            merged[key] = merged.get(key, 0.0) + complex(c)
        self.terms = [(c, a, p) for (a, p), c in merged.items() if c != 0]
        self.order = order

    def scalar(self, xi) -> complex:
        xi = np.asarray(xi, dtype=float)
        b = 1.0 + float(np.dot(xi, xi))
        return sum(c * float(np.prod(xi ** np.asarray(a))) * b ** p for c, a, p in self.terms)

    def __call__(self, xi) -> AlgebraElement:
        return AlgebraElement.identity(self.theta, self.scalar(xi))

    def dxi(self, beta) -> "BracketSymbol":
        out = self
        for j, b in enumerate(as_order(beta, self.n)):
            for _ in range(b):
                terms = []
                for c, a, p in out.terms:
                    if a[j]:
                        lo = list(a)
                        lo[j] -= 1
                        terms.append((c * a[j], lo, p))
                    if p != 0:
                        hi = list(a)
                        hi[j] += 1
                        terms.append((2 * p * c, hi, p - 1))
                order = None if out.order is None else out.order - 1
                out = BracketSymbol(self.theta, terms, order)
        return out


def bracket_exact(s: complex, theta: ThetaMatrix) -> BracketSymbol:
    """``<xi>^s = (1 + |xi|^2)^(s/2)`` times the unit, with exact derivatives."""
    return BracketSymbol(theta, [(1.0, (0,) * theta.n, s / 2)], order=s)


def polynomial_symbol(theta: ThetaMatrix, coeffs: dict) -> ClassicalSymbol:
    """``sum_alpha a_alpha xi^alpha`` as a classical symbol (components by total degree)."""
    coeffs = {as_order(a, theta.n): c for a, c in coeffs.items()}
    top = max(sum(a) for a in coeffs)
    comps = []
    for j in range(top + 1):
        deg = top - j
        comps.append(HomogeneousSymbol(theta, deg, {a: c for a, c in coeffs.items() if sum(a) == deg}))
    return ClassicalSymbol(top, comps, CutoffSpec("excision", 0.0, 1e-12))


# --------------------------------------------------------------------------
# Borel realisation

BOREL_CUTOFF = CutoffSpec("excision", 1.0, 2.0)


class BorelSymbol(StandardSymbol):
    """``sum_j (1 - chi(eps_j xi)) rho_{m-j}(xi)`` for a finite list of components."""

    def __init__(self, components: Sequence[HomogeneousSymbol], eps: Sequence[float],
                 cutoff: CutoffSpec = BOREL_CUTOFF):
        self.components = list(components)
        self.eps = [float(e) for e in eps]
        self.cutoff = cutoff
        self.theta = self.components[0].theta
        self.n = self.theta.n
        self.order = self.components[0].degree

    def __call__(self, xi) -> AlgebraElement:
        xi = np.asarray(xi, dtype=float)
        acc = AlgebraElement.zero(self.theta)
        for comp, e in zip(self.components, self.eps):
            w = float(self.cutoff.weight(xi, e))
            if w:
                acc = acc + comp(xi).scale(w)
        return acc


class _CutoffComponent(StandardSymbol):
    def __init__(self, comp: HomogeneousSymbol, eps: float, cutoff: CutoffSpec):
        self.comp, self.eps, self.cutoff = comp, eps, cutoff
        self.theta = comp.theta
        self.n = comp.n

    def __call__(self, xi):
        w = float(self.cutoff.weight(xi, self.eps))
        return self.comp(xi).scale(w) if w else AlgebraElement.zero(self.theta)


def borel_realize(components: Sequence[HomogeneousSymbol], N: int, grid: SamplingGrid | None = None,
                  budget: int = 60, cutoff: CutoffSpec = BOREL_CUTOFF) -> BorelSymbol:
    """Greedy choice of ``eps_j`` so the sampled ``p_j^(m-j+1)`` of each cut-off term is ``<= 2^-(j+1)``.

    ``eps_0`` starts at 1 and every later ``eps_{j+1}`` starts at ``eps_j / 2``;
    each is halved until the sampled bound holds or ``budget`` halvings are spent.
    """
    components = list(components)
    if N > len(components):
        raise InvalidArgument(f"N={N} exceeds the {len(components)} available components")
    if N < 1:
        raise InvalidArgument("N must be at least 1")
    m = components[0].degree.real
    n = components[0].n
    grid = grid or dyadic_grid(n, 0.5, 2.0 ** 14, count=8 if n == 2 else 26, per_octave=2)
    eps_list = []
    eps = 1.0
    for j in range(N):
        if j:
            eps = eps_list[-1] / 2.0
        target = 2.0 ** -(j + 1)
        best = None
        for _ in range(budget + 1):
            est = seminorm_estimate(_CutoffComponent(components[j], eps, cutoff), j, m - j + 1, grid)
            if best is None or est.value < best[1]:
                best = (eps, est.value)
            if est.value <= target:
                break
            eps /= 2.0
        else:
            raise DomainError(
                f"component {j}: sampled semi-norm {best[1]:.3e} above {target:.3e} "
                f"after {budget} halvings", best_eps=best[0], best_value=best[1])
        eps_list.append(eps)
    return BorelSymbol(components[:N], eps_list, cutoff)


# --------------------------------------------------------------------------
# sampled semi-norms and orders

@dataclass(frozen=True)
class SeminormEstimate:
    N: int
    m: float
    value: float
    grid: dict = field(default_factory=dict)
    norm_radius: int | None = None


def seminorm_estimate(rho: StandardSymbol, N: int, m: float, grid: SamplingGrid | None = None,
                      norm_radius: int | None = None) -> SeminormEstimate:
    """Sampled ``max (1+|xi|)^(-m+|beta|) ||delta^alpha d_xi^beta rho(xi)||`` over ``|alpha|+|beta| <= N``."""
    grid = grid or dyadic_grid(rho.n)
    pts = grid.points()
    best = 0.0
    for total in range(N + 1):
        for beta in orders_up_to(rho.n, total):
            rest = total - sum(beta)
            db = rho.dxi(beta)
            for alpha in orders_up_to(rho.n, rest):
                if sum(alpha) != rest:
                    continue
                for xi in pts:
                    val = db(xi)
                    if any(alpha):
                        val = derivation(val, alpha)
                    w = (1.0 + np.linalg.norm(xi)) ** (-m + sum(beta))
                    best = max(best, w * element_norm(val, norm_radius))
    return SeminormEstimate(N, m, best, grid.describe(), norm_radius)


def shell_norms(rho: StandardSymbol, grid: SamplingGrid, norm_radius: int | None = None):
    """Max over directions of ``||rho(xi)||`` on every shell of the grid."""
    radii, vals = [], []
    for r, pts in grid.shells():
        radii.append(r)
        vals.append(max(element_norm(rho(x), norm_radius) for x in pts))
    return np.array(radii), np.array(vals)


def order_fit(rho: StandardSymbol, grid: SamplingGrid | None = None, tail: float = 0.5,
              norm_radius: int | None = None) -> float:
    """Least-squares slope of ``log ||rho(xi)||`` against ``log(1+|xi|)``.

    Returns ``-inf`` when the symbol vanishes on every sampled shell.
    """
    grid = grid or dyadic_grid(rho.n)
    radii, vals = shell_norms(rho, grid, norm_radius)
    if not np.any(vals > 0):
        return float("-inf")
    slope, _ = fit_loglog(radii, vals, tail=tail)
    return float("-inf") if slope is None else slope


def remainder_order_fit(full: StandardSymbol, partial: StandardSymbol, grid: SamplingGrid | None = None,
                        tail: float = 0.5, rel_floor: float = 64 * np.finfo(float).eps) -> float:
    """Order fit of ``full - partial`` with a cancellation floor.

    Shells where the difference is below ``rel_floor * (||full|| + ||partial||)``
    count as zero: there the difference is pure rounding.  Returns ``-inf`` if
    every shell is at the floor.
    """
    grid = grid or dyadic_grid(full.n)
    radii, vals = [], []
    for r, pts in grid.shells():
        worst = 0.0
        for x in pts:
            a, b = full(x), partial(x)
            d = element_norm(a - b)
            if d > rel_floor * (element_norm(a) + element_norm(b)):
                worst = max(worst, d)
        radii.append(r)
        vals.append(worst)
    radii, vals = np.array(radii), np.array(vals)
    keep = vals > 0
    if keep.sum() < 2:
        return float("-inf")
    slope, _ = fit_loglog(radii[keep], vals[keep], tail=tail)
    return float("-inf") if slope is None else slope
