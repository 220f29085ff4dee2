import numpy as np
import pytest
from hypothesis import given, strategies as st

from nctorus import symbols
from nctorus.algebra import AlgebraElement
from nctorus.errors import DomainError, InvalidArgument
from nctorus.lattice import ThetaMatrix

TH = ThetaMatrix(2, [0.25])
angles = st.floats(0, 2 * np.pi)
radii = st.floats(0.3, 50)


def point(r, t):
    return np.array([r * np.cos(t), r * np.sin(t)])


def test_generalized_binomial():
    assert symbols.generalized_binomial(0.5, 2) == pytest.approx(-0.125)
    assert symbols.generalized_binomial(3, 4) == 0
    assert symbols.generalized_binomial(1j, 1) == 1j


@given(radii, angles, st.floats(0.5, 4))
def test_homogeneity(r, t, lam):
    a = AlgebraElement(TH, {(0, 0): 1.0, (1, 0): 0.5j})
    h = symbols.HomogeneousSymbol(TH, -1.5 + 0.5j, {(1, 0): a, (0, 2): a.scale(0.3)})
    x = point(r, t)
    ref = h(x).scale(lam ** h.degree)
    assert h(lam * x).distance(ref) <= 1e-10 * max(1.0, ref.max_abs())


@given(radii, angles)
def test_grammar_derivative_against_central_difference(r, t):
    h = symbols.HomogeneousSymbol(TH, 0.7, {(1, 1): 1.0, (0, 0): -2.0, (2, 0): 0.5})
    x = point(r, t)
    for j in range(2):
        d = symbols.diff_homogeneous(h, j)(x).coeff((0, 0))
        e = np.zeros(2)
        e[j] = 1e-5 * max(1.0, r)
        fd = (h(x + e).coeff((0, 0)) - h(x - e).coeff((0, 0))) / (2 * e[j])
        assert d == pytest.approx(fd, rel=1e-5, abs=1e-7 * abs(h(x).coeff((0, 0))) / max(r, 1) + 1e-9)


def test_derivative_of_radial():
    # d_1 |xi|^s = s xi_1 |xi|^(s-2)
    h = symbols.HomogeneousSymbol.radial(TH, 3.0)
    d = symbols.diff_homogeneous(h, 0)
    x = np.array([1.0, 2.0])
    assert d(x).coeff((0, 0)) == pytest.approx(3.0 * 1.0 * np.sqrt(5.0))


def test_homogeneous_undefined_at_origin():
    with pytest.raises(DomainError):
        symbols.HomogeneousSymbol.radial(TH, 1.0)(np.zeros(2))


def test_bracket_components_and_large_xi_agreement():
    rho = symbols.bracket_xi_power(1.0, 4, 2, TH)
    # binom(1/2, j) = 1, 1/2, -1/8 at degree offsets 0, 2, 4
    x = np.array([3.0, 4.0])
    vals = [c(x).coeff((0, 0)) for c in rho.components]
    assert vals == pytest.approx([5.0, 0.0, 0.5 / 5.0, 0.0, -0.125 / 125.0])
    exact = np.sqrt(26.0)
    # next term binom(1/2, 3) |xi|^-5 = 1/16 / 3125
    assert abs(rho.homogeneous_sum(x).coeff((0, 0)) - exact) < 3e-5


@pytest.mark.parametrize("s1,s2", [(1, 1), (0.5, -1.5), (1 + 1j, 2 - 0.5j), (-3, 4)])
def test_bracket_powers_multiply(s1, s2):
    pts = [point(r, t) for r in (0.5, 2.0, 9.0) for t in (0.1, 2.0, 4.0)]
    a = symbols.bracket_xi_power(s1, 4, 2, TH)
    b = symbols.bracket_xi_power(s2, 4, 2, TH)
    prod = symbols.classical_product(a, b, 4)
    target = symbols.bracket_xi_power(s1 + s2, 4, 2, TH)
    assert prod.max_component_difference(target, pts, 4) <= 1e-10 * max(
        1.0, max(abs(target.components[0](p).coeff((0, 0))) for p in pts))


def test_noncommutative_classical_product_order():
    a = AlgebraElement.monomial(TH, (1, 0))
    b = AlgebraElement.monomial(TH, (0, 1))
    A = symbols.ClassicalSymbol(1, [symbols.HomogeneousSymbol(TH, 1, {(1, 0): a}),
                                    symbols.HomogeneousSymbol.zero(TH, 0)])
    B = symbols.ClassicalSymbol(0, [symbols.HomogeneousSymbol(TH, 0, {(0, 0): b}),
                                    symbols.HomogeneousSymbol.zero(TH, -1)])
    x = np.array([2.0, 1.0])
    ab = symbols.classical_product(A, B, 1).components[0](x)
    ba = symbols.classical_product(B, A, 1).components[0](x)
    # U1 U2 and U2 U1 differ by the phase exp(2 i pi theta)
    assert ba.coeff((1, 1)) == pytest.approx(ab.coeff((1, 1)) * np.exp(2j * np.pi * 0.25))


def test_classical_symbol_validates_degrees():
    with pytest.raises(InvalidArgument):
        symbols.ClassicalSymbol(1, [symbols.HomogeneousSymbol.zero(TH, 1), symbols.HomogeneousSymbol.zero(TH, 1)])
    with pytest.raises(InvalidArgument):
        symbols.bracket_xi_power(1, -1, 2)


def test_excision_is_exact_far_out():
    rho = symbols.bracket_xi_power(2, 2, 2, TH)
    x = np.array([0.1, 0.0])
    assert rho(x).coeff((0, 0)) == 0.0
    x = np.array([3.0, 4.0])
    assert rho(x).coeff((0, 0)) == pytest.approx(26.0)


@given(radii, angles)
def test_bracket_exact_derivatives(r, t):
    b = symbols.bracket_exact(-1.0, TH)
    x = point(r, t)
    # d_1 <xi>^-1 = -xi_1 <xi>^-3
    assert b.dxi((1, 0)).scalar(x) == pytest.approx(-x[0] * (1 + r * r) ** -1.5, rel=1e-12, abs=1e-300)
    # d_1^2 <xi>^2 = 2
    assert symbols.bracket_exact(2.0, TH).dxi((2, 0)).scalar(x) == pytest.approx(2.0)


def test_seminorm_of_bracket_square():
    est = symbols.seminorm_estimate(symbols.bracket_exact(2, TH), 0, 2.0,
                                    symbols.dyadic_grid(2, count=8))
    # (1 + r^2) / (1 + r)^2 <= 1
    assert 0.9 < est.value <= 1.0


@pytest.mark.parametrize("s", [2.0, -1.0, 0.5])
def test_order_fit(s):
    grid = symbols.dyadic_grid(2, 8.0, 1024.0, count=8)
    assert symbols.order_fit(symbols.bracket_exact(s, TH), grid) == pytest.approx(s, abs=0.05)


def test_order_fit_of_zero():
    z = symbols.FunctionSymbol(lambda x: AlgebraElement.zero(TH), TH)
    assert symbols.order_fit(z, symbols.dyadic_grid(2, 8.0, 64.0, count=4)) == float("-inf")


@pytest.mark.parametrize("power,bounds", [(2, [1.3, 0.3, -0.7]), (1, [0.3, -0.7, -1.7])])
def test_asymptotic_remainders(power, bounds):
    grid = symbols.dyadic_grid(2, 8.0, 1024.0, count=8)
    rho = symbols.bracket_xi_power(power, 3, 2, TH)
    exact = symbols.bracket_exact(power, TH)
    for N, bound in zip((1, 2, 3), bounds):
        partial = symbols.FunctionSymbol(rho.truncated(N - 1).homogeneous_sum, TH)
        assert symbols.remainder_order_fit(exact, partial, grid) <= bound


def test_borel_realisation_meets_targets():
    comps = symbols.bracket_xi_power(1.0, 2, 1, ThetaMatrix(1)).components
    grid = symbols.dyadic_grid(1, 0.5, 2.0 ** 10, per_octave=2)
    b = symbols.borel_realize(comps, 3, grid)
    assert b.eps[0] == 1.0
    assert all(e2 <= e1 / 2 for e1, e2 in zip(b.eps, b.eps[1:]))
    # far out the realisation agrees with the sum of components
    x = np.array([2.0 ** 12])
    full = sum(c(x).coeff((0,)) for c in comps)
    assert b(x).coeff((0,)) == pytest.approx(full)
    with pytest.raises(InvalidArgument):
        symbols.borel_realize(comps, 4, grid)


def test_polynomial_symbol():
    p = symbols.polynomial_symbol(TH, {(2, 0): 1.0, (0, 1): 3.0, (0, 0): -1.0})
    x = np.array([2.0, 5.0])
    assert p(x).coeff((0, 0)) == pytest.approx(4.0 + 15.0 - 1.0)


def test_involution_of_classical_symbol():
    a = AlgebraElement(TH, {(1, 0): 1j})
    rho = symbols.ClassicalSymbol(1j, [symbols.HomogeneousSymbol(TH, 1j, {(0, 0): a})])
    star = symbols.classical_involution(rho)
    assert star.order == -1j
    x = np.array([3.0, 0.0])
    assert star.components[0](x).coeff((-1, 0)) == pytest.approx(np.conj(1j * 3.0 ** 1j))
