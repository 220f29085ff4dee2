"""Seeded identity suites behind ``nctorus verify``.

Each check produces a :class:`Row`: the identity it tests, the formula it
stands for, the measured value and the bound it must not exceed.  ``kind`` is
``"discrepancy"`` for residuals (affected by a global tolerance override) or
``"bound"`` for fitted orders and similar one-sided limits (never overridden).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import algebra as alg
from . import gns, oscint, psido, symbols, toroidal
from .algebra import AlgebraElement, involution, multiply, random_element
from .errors import NCTorusError
from .lattice import ThetaMatrix, box_points, multi_binom, orders_up_to, sub_orders, unit

SUITES = ("algebra", "symbols", "toroidal", "oscint", "psido")


@dataclass
class RunConfig:
    theta: ThetaMatrix = field(default_factory=lambda: ThetaMatrix(2, [0.25]))
    radius: int = 3
    seed: int = 0
    tol: float | None = None
    quad_budget: int | None = None
    trials: int = 10

    def describe(self) -> dict:
        return {"n": self.theta.n, "theta_upper": list(self.theta.upper), "radius": self.radius,
                "seed": self.seed, "tol": self.tol, "quad_budget": self.quad_budget, "trials": self.trials}


@dataclass
class Row:
    suite: str
    identity: str
    formula: str
    value: float | None
    tolerance: float
    kind: str = "discrepancy"
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and self.value is not None and self.value <= self.tolerance

    def as_dict(self) -> dict:
        d = asdict(self)
        if d["value"] is not None and not np.isfinite(d["value"]):
            d["value"] = str(d["value"])  # JSON has no infinities
        d["pass"] = self.passed
        return d


class _Collector:
    def __init__(self, suite: str, cfg: RunConfig):
        self.suite = suite
        self.cfg = cfg
        self.rows: list[Row] = []

    def check(self, identity: str, formula: str, tolerance: float, fn: Callable[[], float],
              kind: str = "discrepancy"):
        if kind == "discrepancy" and self.cfg.tol is not None:
            tolerance = self.cfg.tol
        try:
            value = float(fn())
            self.rows.append(Row(self.suite, identity, formula, value, tolerance, kind))
        except NCTorusError as exc:
            self.rows.append(Row(self.suite, identity, formula, None, tolerance, kind,
                                 f"{type(exc).__name__}: {exc}"))


def _rng(cfg: RunConfig, salt: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, salt])


# --------------------------------------------------------------------------

def suite_algebra(cfg: RunConfig) -> list[Row]:
    c = _Collector("algebra", cfg)
    th, R = cfg.theta, cfg.radius
    rng = _rng(cfg, 1)
    pairs = [(random_element(th, R, rng), random_element(th, R, rng), random_element(th, R, rng))
             for _ in range(cfg.trials)]

    c.check("traciality", "tau(uv) = tau(vu)", 1e-12,
            lambda: max(abs(alg.trace(multiply(u, v)) - alg.trace(multiply(v, u))) for u, v, _ in pairs))
    c.check("associativity", "(uv)w = u(vw)", 1e-10,
            lambda: max(multiply(multiply(u, v), w).distance(multiply(u, multiply(v, w)))
                        for u, v, w in pairs))
    c.check("involution antimultiplicative", "(uv)* = v* u*", 1e-10,
            lambda: max(involution(multiply(u, v)).distance(multiply(involution(v), involution(u)))
                        for u, v, _ in pairs))

    betas = [b for b in orders_up_to(th.n, 3) if sum(b) > 0][::max(1, th.n)]

    def leibniz():
        worst = 0.0
        for u, v, _ in pairs[:4]:
            for beta in betas:
                lhs = alg.derivation(multiply(u, v), beta)
                rhs = AlgebraElement.zero(th)
                for b1 in sub_orders(beta):
                    b2 = tuple(x - y for x, y in zip(beta, b1))
                    rhs = rhs + multiply(alg.derivation(u, b1), alg.derivation(v, b2)).scale(multi_binom(beta, b1))
                worst = max(worst, lhs.distance(rhs) / max(1.0, lhs.max_abs()))
        return worst

    c.check("Leibniz rule", "delta^b(uv) = sum C(b,b') delta^b'(u) delta^b''(v)", 1e-10, leibniz)
    c.check("inner product", "<u,v> = tau(u v*)", 1e-12,
            lambda: max(abs(alg.inner_product(u, v) - alg.trace(multiply(u, involution(v))))
                        for u, v, _ in pairs))
    c.check("integration by parts", "tau(u delta_j v) = -tau(delta_j(u) v)", 1e-10,
            lambda: max(abs(alg.trace(multiply(u, alg.derivation(v, unit(th.n, 0))))
                            + alg.trace(multiply(alg.derivation(u, unit(th.n, 0)), v)))
                        for u, v, _ in pairs))
    # truncated representations have (2G+1)^n basis vectors
    G = {1: 16, 2: 8}.get(th.n, 5)
    c.check("unitary norm", "||U^k|| = 1", 1e-14,
            lambda: max(abs(gns.norm_estimate(AlgebraElement.monomial(th, k), min(4, G // 2)) - 1.0)
                        for k in box_points(2 if th.n <= 2 else 1, th.n)))

    def inverse():
        worst = 0.0
        for a in (0.3, -0.5, 0.2j):
            u = AlgebraElement(th, {(0,) * th.n: 1.0, unit(th.n, 0): a})
            worst = max(worst, gns.invert(u, G).residual)
        return worst

    c.check("numerical inverse", "u invert(u) = 1 (interior)", 1e-8, inverse)

    def exp_log():
        h = random_element(th, 1, _rng(cfg, 2))
        h = (h + involution(h)).scale(0.05)
        e = gns.functional_calculus(h, "exp", G).restrict(gns.trusted_radius(G))
        # drop the skew part left by truncation; exp(h) is selfadjoint
        e = (e + involution(e)).scale(0.5)
        back = gns.functional_calculus(e, "log", G)
        return back.distance(h, max(1, G // 2 - 1))

    c.check("exp/log round trip", "log(exp(h)) = h", 1e-7, exp_log)
    return c.rows


def suite_symbols(cfg: RunConfig) -> list[Row]:
    c = _Collector("symbols", cfg)
    th = cfg.theta
    rng = _rng(cfg, 3)
    dirs = rng.standard_normal((6, th.n))
    pts = [d / np.linalg.norm(d) * r for d in dirs for r in (0.7, 3.0)]

    def product():
        b1 = symbols.bracket_xi_power(1, 4, th.n, th)
        b2 = symbols.bracket_xi_power(2, 4, th.n, th)
        return symbols.classical_product(b1, b1, 4).max_component_difference(b2, pts, 4)

    c.check("classical product", "<xi>^1 <xi>^1 = <xi>^2 through offset 4", 1e-10, product)

    def pair_law():
        worst = 0.0
        for s1, s2 in [(0.5, -1.5), (1 + 1j, 2 - 0.5j)]:
            a = symbols.bracket_xi_power(s1, 4, th.n, th)
            b = symbols.bracket_xi_power(s2, 4, th.n, th)
            target = symbols.bracket_xi_power(s1 + s2, 4, th.n, th)
            worst = max(worst, symbols.classical_product(a, b, 4).max_component_difference(target, pts, 4))
        return worst

    c.check("bracket powers multiply", "<xi>^s1 <xi>^s2 = <xi>^(s1+s2)", 1e-10, pair_law)

    a = random_element(th, 1, rng)
    h = symbols.HomogeneousSymbol(th, 1.5 - 0.5j, {(1,) + (0,) * (th.n - 1): a, (0,) * th.n: a.scale(0.3)})

    def homogeneity():
        worst = 0.0
        for x in pts:
            for lam in (2.0, 3.7):
                ref = h(x)
                worst = max(worst, h(lam * x).distance(ref.scale(lam ** h.degree)) / max(ref.max_abs(), 1e-300))
        return worst

    c.check("homogeneity", "h(lambda xi) = lambda^q h(xi)", 1e-10, homogeneity)

    def diff_fd():
        worst = 0.0
        for j in range(th.n):
            d = symbols.diff_homogeneous(h, j)
            fd = symbols.FiniteDifferenceSymbol(h, unit(th.n, j))
            for x in pts:
                ref = d(x)
                worst = max(worst, ref.distance(fd(x)) / max(ref.max_abs(), 1e-12))
        return worst

    c.check("derivative matches finite differences", "d_xi_j grammar = central difference", 1e-6, diff_fd)

    grid = symbols.dyadic_grid(th.n, 8.0, 1024.0, count=8)
    for power in (2, 1):
        rho = symbols.bracket_xi_power(power, 3, th.n, th)
        exact = symbols.bracket_exact(power, th)
        for N in (1, 2, 3):
            partial = symbols.FunctionSymbol(rho.truncated(N - 1).homogeneous_sum, th)
            c.check(f"asymptotic remainder <xi>^{power}, N={N}",
                    f"order(<xi>^{power} - sum_(j<N) rho_({power}-j)) <= {power}-N", power - N + 0.3,
                    lambda exact=exact, partial=partial: symbols.remainder_order_fit(exact, partial, grid),
                    kind="bound")
    exact = symbols.bracket_exact(2, th)
    c.check("seminorm of <xi>^2 (m=2)", "sup (1+|xi|)^-2 |<xi>^2| <= 1", 1.0,
            lambda: symbols.seminorm_estimate(exact, 0, 2.0, symbols.dyadic_grid(th.n, count=8)).value,
            kind="bound")
    return c.rows


def _corpus_scalar():
    """Ten rapidly decaying and ten polynomial lattice profiles."""
    fast = [lambda k, c=c: np.exp(-c * np.linalg.norm(k)) for c in (0.7, 1.0, 1.5, 2.0)]
    fast += [lambda k, c=c: np.exp(-c * np.dot(k, k)) for c in (0.1, 0.5, 1.0)]
    fast += [lambda k: 1.0 / np.cosh(np.linalg.norm(k)), lambda k: np.exp(-np.abs(k).sum()),
             lambda k: 0.0]
    poly = [lambda k, m=m: (1.0 + np.dot(k, k)) ** (m / 2)
            for m in (-4, -3, -2, -1, -0.5, 0, 1, 1.5, 2, 3)]
    return fast, poly


def suite_toroidal(cfg: RunConfig) -> list[Row]:
    c = _Collector("toroidal", cfg)
    th = cfg.theta
    kernel = toroidal.default_kernel()
    ints = np.arange(1, 21)
    c.check("kernel at zero", "phi_1(0) = 1", 1e-8, lambda: abs(kernel.phi1(np.array([0.0]))[0] - 1.0))
    c.check("kernel at nonzero integers", "phi_1(j) = 0, 1 <= |j| <= 20", 1e-8,
            lambda: float(np.abs(kernel.phi1(np.concatenate([ints, -ints]).astype(float))).max()))
    c.check("partition identity", "theta_1(t) + theta_1(2 pi - t) = 1/(2 pi)", 1e-10,
            lambda: kernel.partition_residual)

    K = 8
    rho = toroidal.restrict(symbols.bracket_exact(2, th), K)
    ext = toroidal.extend(rho, kernel)
    inner = box_points(K - ext.margin, th.n)
    c.check("extension interpolates", "rho~(k) = rho_k", 1e-7,
            lambda: max(ext(k.astype(float)).distance(rho[tuple(k)]) for k in inner))

    def round_trip():
        again = toroidal.restrict(ext, K - ext.margin)
        return again.distance(toroidal.restrict(symbols.bracket_exact(2, th), K - ext.margin))

    c.check("restrict-extend round trip", "restrict(extend(restrict rho)) = restrict rho", 1e-6, round_trip)

    for s in (2, -1):
        for alpha in ([unit(th.n, 0), tuple(2 * x for x in unit(th.n, 0))]):
            bound = s - sum(alpha) - 0.7
            c.check(f"difference vs derivative s={s} alpha={alpha}",
                    "order(Delta^a rho - d^a rho) <= Re q - |a| - 1", bound,
                    lambda s=s, alpha=alpha: toroidal.difference_order_fit(symbols.bracket_exact(s, th), alpha),
                    kind="bound")

    def sbp():
        rng = _rng(cfg, 4)
        worst = 0.0
        table = toroidal.ToroidalSymbol.from_function(th, lambda k: random_element(th, 1, rng), 10)
        u = toroidal.TemperedSequence.from_function(lambda k: np.exp(-np.dot(k, k)) * (1 + 0.5j * k[0]), 6, th.n, 0)
        for alpha in (unit(th.n, 0), (1,) * th.n, tuple(2 * x for x in unit(th.n, 0))):
            lhs, rhs = toroidal.summation_by_parts_check(u, table, alpha)
            worst = max(worst, lhs.distance(rhs))
        return worst

    c.check("summation by parts", "sum (bar-Delta^a u) rho = (-1)^|a| sum u Delta^a rho", 1e-10, sbp)

    def classifier():
        fast, poly = _corpus_scalar()
        wrong = 0
        for f in fast:
            wrong += toroidal.classify_smoothing(toroidal.ToroidalSymbol.from_function(th, f, 12)).kind != "schwartz"
        for f in poly:
            wrong += toroidal.classify_smoothing(toroidal.ToroidalSymbol.from_function(th, f, 12)).kind != "order"
        return wrong

    c.check("smoothing classifier", "Schwartz iff superpolynomial decay (20-symbol corpus)", 0, classifier,
            kind="bound")
    return c.rows


def suite_oscint(cfg: RunConfig) -> list[Row]:
    c = _Collector("oscint", cfg)
    budget = cfg.quad_budget or oscint.DEFAULT_BUDGET
    th1 = ThetaMatrix(1)

    def quad(points, panels=1):
        return oscint.QuadratureSpec(points, panels, budget=budget)

    gauss = oscint.Amplitude(th1, [[0]], lambda s, x: np.exp(-(s ** 2).sum(1) - (x ** 2).sum(1))[:, None], 8, 8)
    c.check("Gaussian J_0", "J_0(exp(-s^2-xi^2)) = 5^-1/2", 1e-6,
            lambda: abs(oscint.j0(gauss, quad(32, 4)).coeff((0,)) - 5 ** -0.5))

    for name, a in oscint.standard_corpus(cfg.theta):
        q = quad(12, 3) if a.n == 2 else quad(32, 8)
        c.check(f"L^t invariance [{name}]", "J_0(L^t a) = J_0(a)", 1e-6,
                lambda a=a, q=q: oscint.j0(oscint.apply_Lt(a), q).distance(oscint.j0(a, q)))
        b1 = AlgebraElement(a.theta, {(0,) * a.n: 1.0, unit(a.n, 0): 0.5})
        b2 = AlgebraElement(a.theta, {(0,) * a.n: 0.3j, tuple(-x for x in unit(a.n, a.n - 1)): 1.0})

        def props(a=a, q=q, b1=b1, b2=b2):
            return oscint.j_properties_check(a, b1, b2, unit(a.n, 0), unit(a.n, a.n - 1), q).max()

        c.check(f"J-properties [{name}]", "module, adjoint, derivation, integration by parts", 1e-6, props)

    rho = lambda x: (1.0 + (x ** 2).sum(1)) ** -2
    k = 2

    def convergence():
        errs = []
        u = AlgebraElement.monomial(th1, (k,))
        for eps in (1.0, 0.5, 0.25):
            amp = oscint.symbol_amplitude(rho, th1, eps=eps)
            panels = int(np.ceil(8 * 2 * (amp.s_box[0, 1]) ** 2 / (2 * np.pi) / 32))
            v = oscint.p_from_amplitude(amp, u, quad(32, panels))
            errs.append(v.distance(AlgebraElement.monomial(th1, (k,), (1 + k * k) ** -2)))
        monotone = all(b < a for a, b in zip(errs, errs[1:]))
        return errs[-1] if monotone else float("inf")

    c.check("P_a on U^k", "P_a U^k -> rho(k) U^k as eps -> 0", 1e-4, convergence)
    return c.rows


def suite_psido(cfg: RunConfig) -> list[Row]:
    c = _Collector("psido", cfg)
    th = cfg.theta
    rng = _rng(cfg, 5)
    a = random_element(th, 1, rng)
    us = [random_element(th, cfg.radius, rng) for _ in range(cfg.trials)]

    cls = symbols.classical_product(symbols.bracket_xi_power(1, 2, th.n, th),
                                    symbols.ClassicalSymbol(0, [symbols.HomogeneousSymbol(th, 0, {(0,) * th.n: a})]
                                                            + [symbols.HomogeneousSymbol.zero(th, -j) for j in (1, 2)]), 2)
    lat = psido.LatticeSymbol.from_standard(cls)

    def basis():
        worst = 0.0
        for k in box_points(4, th.n):
            kt = tuple(int(x) for x in k)
            got = psido.apply_psido(lat, AlgebraElement.monomial(th, kt))
            want = multiply(symbols.evaluate_classical(cls, k.astype(float)), AlgebraElement.monomial(th, kt))
            worst = max(worst, got.distance(want))
        return worst

    c.check("psido on basis", "P_rho U^k = rho(k) U^k", 1e-12, basis)
    P = psido.DifferentialOperator.build(th, {(0,) * th.n: a, unit(th.n, 0): 1.0,
                                              tuple(2 * x for x in unit(th.n, th.n - 1)): a.scale(0.5)})
    c.check("differential = polynomial symbol", "sum a_alpha delta^alpha = P_{sum a_alpha xi^alpha}", 1e-10,
            lambda: max(psido.apply_differential(P, u).distance(psido.apply_psido(P.symbol(), u)) for u in us))

    def group():
        worst = 0.0
        for s1, s2 in [(1, -1), (0.5 + 1j, 2), (-2.5, 1 - 3j), (3j, -3j), (-4, 1.5)]:
            for u in us[:3]:
                lhs = psido.lambda_power(s1, psido.lambda_power(s2, u))
                worst = max(worst, lhs.distance(psido.lambda_power(s1 + s2, u)) / max(1.0, lhs.max_abs()))
        return worst

    c.check("Lambda group law", "Lambda^s1 Lambda^s2 = Lambda^(s1+s2)", 1e-12, group)

    def commutator():
        worst = 0.0
        for j in range(th.n):
            for u in us[:3]:
                lhs, rhs = psido.commutator_check(lat, j, u)
                worst = max(worst, lhs.distance(rhs))
        return worst

    c.check("commutator", "[delta_j, P_rho] = P_{delta_j rho}", 1e-10, commutator)

    def flat_spectrum():
        lb = psido.laplace_beltrami(gns.MetricTensor.identity(th), 4)
        w = np.sort(psido.spectrum_truncated(lb, th, 4).real)
        want = np.sort([float(np.dot(k, k)) for k in box_points(4, th.n)])
        return float(np.abs(w - want).max())

    c.check("Laplace-Beltrami identity metric", "spec Delta_g = {|k|^2}", 1e-12, flat_spectrum)

    def conformal():
        cval = 2.5
        lb = psido.laplace_beltrami(gns.MetricTensor.identity(th, cval), 4)
        return max(lb(AlgebraElement.monomial(th, k)).distance(
            AlgebraElement.monomial(th, k, float(np.dot(k, k)) / cval)) for k in box_points(3, th.n))

    c.check("Laplace-Beltrami conformal metric", "Delta_{c g} = c^-1 Delta", 1e-7, conformal)
    return c.rows


_RUNNERS = {"algebra": suite_algebra, "symbols": suite_symbols, "toroidal": suite_toroidal,
            "oscint": suite_oscint, "psido": suite_psido}


def run(suite: str, cfg: RunConfig) -> list[Row]:
    if suite == "all":
        rows = []
        for name in SUITES:
            rows += _RUNNERS[name](cfg)
        return rows
    if suite not in _RUNNERS:
        raise KeyError(suite)
    return _RUNNERS[suite](cfg)


def report(suite: str, cfg: RunConfig, rows: list[Row]) -> dict:
    return {"suite": suite, "config": cfg.describe(), "passed": all(r.passed for r in rows),
            "rows": [r.as_dict() for r in rows]}
