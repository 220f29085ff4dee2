import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nctorus import oscint
from nctorus.algebra import AlgebraElement, multiply
from nctorus.cutoffs import CutoffSpec
from nctorus.errors import InvalidArgument, PreconditionViolation, ResourceError
from nctorus.lattice import ThetaMatrix

TH1 = ThetaMatrix(1)
Q1 = oscint.QuadratureSpec(32, 8)


def gaussian(c_s=1.0, c_x=1.0, box=8.0, theta=TH1):
    return oscint.Amplitude(theta, np.zeros((1, theta.n), dtype=int),
                            lambda s, x: np.exp(-c_s * (s ** 2).sum(1) - c_x * (x ** 2).sum(1))[:, None],
                            box, box)


def test_gaussian_closed_form():
    # (2 pi)^-1 iint exp(i s xi - s^2 - xi^2) = 5^-1/2
    assert oscint.j0(gaussian(), oscint.QuadratureSpec(32, 4)).coeff((0,)) == pytest.approx(5 ** -0.5, abs=1e-12)


@given(st.floats(0.3, 3), st.floats(0.3, 3))
@settings(max_examples=15)
def test_gaussian_family(a, b):
    # (2 pi)^-1 iint exp(i s xi - a s^2 - b xi^2) = (4ab + 1)^-1/2
    got = oscint.j0(gaussian(a, b, 10.0), oscint.QuadratureSpec(32, 6)).coeff((0,))
    assert got == pytest.approx((4 * a * b + 1) ** -0.5, abs=1e-9)


def test_budget_enforced():
    with pytest.raises(ResourceError):
        oscint.j0(gaussian(), oscint.QuadratureSpec(32, 4, budget=10))


def test_quadrature_spec_validation():
    with pytest.raises(InvalidArgument):
        oscint.QuadratureSpec(scheme="simpson")
    with pytest.raises(InvalidArgument):
        oscint.QuadratureSpec(0)
    x, w = oscint.QuadratureSpec(4, 1, "trapezoid").nodes(0.0, 1.0)
    assert w.sum() == pytest.approx(1.0) and x.size == 5


def test_j0_report_refinement():
    rep = oscint.j0_report(gaussian(), oscint.QuadratureSpec(32, 4))
    assert rep.refinement < 1e-10
    assert rep.points == 128 ** 2
    # 128 nodes over 16 * 8 / (2 pi) periods of exp(i s xi) at the box edge
    assert rep.points_per_period == pytest.approx(2 * np.pi)


@pytest.mark.parametrize("name", ["gaussian", "separable", "compact bump"])
def test_Lt_invariance_one_dimension(name):
    a = dict(oscint.standard_corpus(TH1))[name]
    once = oscint.apply_Lt(a)
    ref = oscint.j0(a, Q1)
    assert oscint.j0(once, Q1).distance(ref) <= 1e-6
    assert oscint.j0(oscint.apply_Lt(once), Q1).distance(ref) <= 1e-6


def test_Lt_is_identity_where_chi_is_one():
    a = dict(oscint.standard_corpus(TH1))["compact bump"]
    lt = oscint.apply_Lt(a, CutoffSpec("approximate-unit", 10.0, 12.0))
    s = np.array([[0.3], [-1.0]])
    x = np.array([[0.5], [1.2]])
    assert np.allclose(lt.values(s, x), a.values(s, x), atol=1e-14)


def test_Lt_without_derivatives_and_fallback_disabled():
    a = oscint.Amplitude(TH1, [[0]], lambda s, x: np.exp(-(s ** 2).sum(1))[:, None], 3, 3, fd_fallback=False)
    with pytest.raises(InvalidArgument):
        oscint.apply_Lt(a)


def test_analytic_derivatives_match_finite_differences():
    for _, a in oscint.standard_corpus(ThetaMatrix(2, [0.25])):
        s = np.array([[0.3, -0.4]])
        x = np.array([[-0.7, 0.2]])
        for kind in ("s", "xi"):
            for j in range(2):
                exact = a.derivative(kind, j).values(s, x)
                fd = oscint._fd_derivative(a, kind, j).values(s, x)
                assert np.allclose(exact, fd, atol=1e-9)


@pytest.mark.parametrize("name", ["gaussian", "separable", "compact bump"])
def test_j_properties_one_dimension(name):
    a = dict(oscint.standard_corpus(TH1))[name]
    b1 = AlgebraElement(TH1, {(0,): 1.0, (1,): 0.5})
    b2 = AlgebraElement(TH1, {(0,): 0.3j, (-1,): 1.0})
    rep = oscint.j_properties_check(a, b1, b2, (1,), (1,), Q1)
    assert rep.max() <= 1e-6


def test_ibp_weight_lower_terms():
    # e^{-is xi} D_s D_xi e^{is xi} = s xi - i
    a = gaussian()
    w = oscint.ibp_weight(a, (1,), (1,))
    s = np.array([[0.7]])
    x = np.array([[-0.4]])
    ref = (0.7 * -0.4 - 1j) * a.values(s, x)
    assert np.allclose(w.values(s, x), ref)
    # disjoint coordinates: only the leading monomial
    a2 = gaussian(theta=ThetaMatrix(2, [0.1]), box=4.0)
    w2 = oscint.ibp_weight(a2, (1, 0), (0, 1))
    s2, x2 = np.array([[0.5, 2.0]]), np.array([[3.0, -1.0]])
    assert np.allclose(w2.values(s2, x2), 2.0 * 3.0 * a2.values(s2, x2))


def test_module_property_with_noncommutative_coefficients():
    th = ThetaMatrix(2, [0.25])
    a = oscint.Amplitude(th, [[1, 0]], lambda s, x: np.exp(-(s ** 2).sum(1) - (x ** 2).sum(1))[:, None], 4.5, 4.5)
    b = AlgebraElement.monomial(th, (0, 1))
    q = oscint.QuadratureSpec(18, 1)
    lhs = oscint.j0(oscint.left_multiply(b, a), q)
    assert lhs.distance(multiply(b, oscint.j0(a, q))) < 1e-13


def test_inverse_fourier_gaussian():
    rho = lambda x: AlgebraElement.identity(TH1, np.exp(-0.5 * float(np.dot(x, x))))
    for s in (0.0, 0.8, 2.0):
        got = oscint.inverse_fourier(rho, [s], 12.0, oscint.QuadratureSpec(32, 4)).coeff((0,))
        assert got == pytest.approx((2 * np.pi) ** -0.5 * np.exp(-0.5 * s * s), abs=1e-12)


def test_inverse_fourier_decay_precondition():
    rho = lambda x: AlgebraElement.identity(TH1, 1.0 / (1.0 + float(np.dot(x, x))))
    with pytest.raises(PreconditionViolation):
        oscint.inverse_fourier(rho, [0.0], 5.0)


def test_forward_inverts_inverse_fourier():
    rho = lambda x: AlgebraElement.identity(TH1, np.exp(-float(np.dot(x, x))))
    q = oscint.QuadratureSpec(32, 4)
    check = lambda s: oscint.inverse_fourier(rho, s, 9.0, q, theta=TH1)
    back = oscint.forward_fourier(check, [0.5], 9.0, q).coeff((0,))
    assert back == pytest.approx(np.exp(-0.25), abs=1e-9)


def test_p_a_converges_to_lattice_formula():
    rho = lambda x: (1.0 + (x ** 2).sum(1)) ** -2
    u = AlgebraElement.monomial(TH1, (2,))
    errs = []
    for eps in (1.0, 0.5, 0.25):
        amp = oscint.symbol_amplitude(rho, TH1, eps=eps)
        panels = int(np.ceil(8 * 2 * amp.s_box[0, 1] ** 2 / (2 * np.pi) / 32))
        v = oscint.p_from_amplitude(amp, u, oscint.QuadratureSpec(32, panels))
        errs.append(v.distance(AlgebraElement.monomial(TH1, (2,), 5.0 ** -2)))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] <= 1e-4


def test_act_product_phase():
    th = ThetaMatrix(2, [0.25])
    a = oscint.Amplitude(th, [[0, 1]], lambda s, x: np.ones((s.shape[0], 1)), 1, 1)
    u = AlgebraElement.monomial(th, (1, 0))
    out = oscint.act_product(a, u)
    s = np.array([[0.3, 0.0]])
    # U^(0,1) e^{-i s.k} U^(1,0) = e^{-0.3 i} e^{2 i pi / 4} U^(1,1)
    v = out(s, np.zeros((1, 2)))
    assert v.coeff((1, 1)) == pytest.approx(np.exp(-0.3j) * np.exp(2j * np.pi * 0.25))
