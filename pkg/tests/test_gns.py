import numpy as np
import pytest
from hypothesis import given, strategies as st

from nctorus import gns
from nctorus.algebra import AlgebraElement, involution, multiply, random_element
from nctorus.errors import DomainError, InvalidArgument
from nctorus.lattice import ThetaMatrix, box_points

# modified Bessel I_k(2): Fourier coefficients of exp(2 cos x) = exp(U + U*) when theta = 0
# (scipy.special.iv, frozen)
BESSEL_I_2 = [2.2795853023360673, 1.590636854637329, 0.6889484476987382, 0.21273995923985264]
# I_k(1) for exp(cos x)
BESSEL_I_1 = [1.2660658777520084, 0.565159103992485, 0.1357476697670383, 0.022168424924331905]


def test_trusted_radius():
    assert [gns.trusted_radius(R) for R in (1, 4, 8, 12)] == [0, 3, 6, 9]


def test_representation_is_left_multiplication(theta2, rng):
    u = random_element(theta2, 1, rng)
    v = random_element(theta2, 1, rng)
    rep = gns.represent(u, 4)
    vec = np.array([v.coeff(tuple(k)) for k in rep.points])
    got = rep.read_back(theta2, rep.matrix @ vec)
    assert got.distance(multiply(u, v)) < 1e-13


def test_represent_warns_when_support_exceeds_box():
    u = AlgebraElement.monomial(ThetaMatrix(1), (3,))
    with pytest.warns(UserWarning):
        gns.represent(u, 2)


@pytest.mark.parametrize("k", [(0, 0), (1, 0), (2, -1), (-3, 2)])
def test_unitaries_have_norm_one(theta2, k):
    assert gns.norm_estimate(AlgebraElement.monomial(theta2, k), 4) == 1.0


def test_norm_estimate_lower_bound_converges():
    # || 1 + U/2 || = 3/2 (spectrum of U is the circle)
    u = AlgebraElement(ThetaMatrix(1), {(0,): 1.0, (1,): 0.5})
    vals = [gns.norm_estimate(u, R) for R in (4, 16, 64)]
    assert vals[0] <= vals[1] <= vals[2] <= 1.5 + 1e-12
    assert vals[2] == pytest.approx(1.5, abs=1e-3)


@pytest.mark.parametrize("c,ref", [(1.0, BESSEL_I_2), (0.5, BESSEL_I_1)])
def test_exp_against_bessel_oracle(c, ref):
    th = ThetaMatrix(2, [0.0])
    h = AlgebraElement(th, {(1, 0): c, (-1, 0): c})
    e = gns.functional_calculus(h, "exp", 12)
    for k, v in enumerate(ref):
        assert e.coeff((k, 0)) == pytest.approx(v, abs=1e-12)
        assert e.coeff((-k, 0)) == pytest.approx(v, abs=1e-12)


def test_exp_log_round_trip_noncommutative():
    th = ThetaMatrix(2, [1 / np.sqrt(2)])
    h = AlgebraElement(th, {(1, 0): 0.2, (-1, 0): 0.2, (0, 1): 0.1j, (0, -1): -0.1j * np.exp(0j)})
    h = (h + involution(h)).scale(0.5)
    e = gns.functional_calculus(h, "exp", 8)
    back = gns.functional_calculus(e.restrict(8), "log", 8)
    assert back.distance(h, gns.trusted_radius(8) - 2) < 1e-7


def test_sqrt_squares_back():
    th = ThetaMatrix(2, [0.25])
    a = AlgebraElement(th, {(0, 0): 2.0, (1, 0): 0.3, (-1, 0): 0.3, (0, 1): 0.2, (0, -1): 0.2})
    r = gns.functional_calculus(a, "sqrt", 10).restrict(6)
    assert multiply(r, r).distance(a, 4) < 1e-8


def test_log_rejects_nonpositive():
    th = ThetaMatrix(1)
    h = AlgebraElement(th, {(1,): 1.0, (-1,): 1.0})
    with pytest.raises(DomainError):
        gns.functional_calculus(h, "log", 6)


def test_functional_calculus_needs_selfadjoint():
    th = ThetaMatrix(1)
    with pytest.raises(InvalidArgument):
        gns.functional_calculus(AlgebraElement.monomial(th, (1,)), "exp", 4)


@given(st.complex_numbers(max_magnitude=0.6), st.sampled_from([0.0, 0.25, 0.7071]))
def test_invert_geometric_series(a, t):
    th = ThetaMatrix(2, [t])
    u = AlgebraElement(th, {(0, 0): 1.0, (1, 0): a})
    res = gns.invert(u, 8)
    assert res.residual <= 1e-8
    # (1 + a U_1)^-1 = sum (-a)^j U_1^j
    for j in range(4):
        assert res.element.coeff((j, 0)) == pytest.approx((-a) ** j, abs=1e-8)


def test_invert_singular_truncation():
    # U + U* compressed to 5 points has eigenvalue 2 cos(pi/2) = 0
    th = ThetaMatrix(1)
    u = AlgebraElement(th, {(1,): 1.0, (-1,): 1.0})
    with pytest.raises(DomainError):
        gns.invert(u, 2)


def test_metric_identity_and_conformal():
    th = ThetaMatrix(2, [0.25])
    g = gns.MetricTensor.identity(th, 3.0)
    nu, nu_inv = gns.metric_det_sqrt(g, 4)
    # det(3 id) = 9, sqrt = 3
    assert nu.coeff((0, 0)) == pytest.approx(3.0)
    assert nu_inv.coeff((0, 0)) == pytest.approx(1 / 3)
    inv = gns.metric_inverse(g, 4)
    assert inv[0, 0].coeff((0, 0)) == pytest.approx(1 / 3)
    assert inv.residual < 1e-12


def test_metric_rejects_non_positive():
    th = ThetaMatrix(1)
    with pytest.raises(DomainError):
        gns.MetricTensor([[AlgebraElement.identity(th, -1.0)]])
    with pytest.raises(InvalidArgument):
        gns.MetricTensor([[AlgebraElement.monomial(th, (1,))]])


def test_metric_det_non_scalar():
    th = ThetaMatrix(2, [0.25])
    f = AlgebraElement(th, {(0, 0): 2.0, (1, 0): 0.25, (-1, 0): 0.25})
    z = AlgebraElement.zero(th)
    g = gns.MetricTensor([[f, z], [z, f]])
    nu, nu_inv = gns.metric_det_sqrt(g, 10)
    # det = f^2 (f commutes with itself), so nu = f
    assert nu.distance(f, 7) < 1e-10
    assert multiply(nu.restrict(8), nu_inv.restrict(8)).distance(AlgebraElement.identity(th), 5) < 1e-8
