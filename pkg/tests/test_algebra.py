import numpy as np
import pytest
from hypothesis import given, strategies as st

from nctorus.algebra import (AlgebraElement, act, decay_report, derivation, fit_loglog, inner_product,
                             involution, multiply, random_element, shell_maxima, trace)
from nctorus.errors import InvalidArgument
from nctorus.lattice import ThetaMatrix, multi_binom, sub_orders

from conftest import elements, thetas


def rational_rep(p, q):
    """Clock and shift matrices with B A = exp(2 i pi p/q) A B."""
    w = np.exp(-2j * np.pi * p / q)
    A = np.diag(w ** np.arange(q))
    B = np.roll(np.eye(q), 1, axis=0)
    return A, B


def represent(u, A, B):
    out = np.zeros_like(A)
    for k, c in u.items():
        out = out + c * np.linalg.matrix_power(A, k[0]) @ np.linalg.matrix_power(B, k[1])
    return out


def brute_product(u, v):
    m = u.theta.matrix
    acc = {}
    for k, a in u.items():
        for l, b in v.items():
            c = sum(k[p] * m[p, q] * l[q] for p in range(u.n) for q in range(p))
            key = tuple(x + y for x, y in zip(k, l))
            acc[key] = acc.get(key, 0) + a * b * np.exp(-2j * np.pi * c)
    return acc


def test_generator_relation():
    th = ThetaMatrix(2, [0.25])
    U1, U2 = (AlgebraElement.monomial(th, k) for k in [(1, 0), (0, 1)])
    # U_2 U_1 = exp(2 i pi theta_12) U_1 U_2
    lhs = multiply(U2, U1)
    rhs = multiply(U1, U2).scale(np.exp(2j * np.pi * 0.25))
    assert lhs.distance(rhs) < 1e-15
    assert lhs.coeff((1, 1)) == pytest.approx(1j)


@pytest.mark.parametrize("p,q", [(1, 3), (1, 4), (2, 5)])
def test_product_is_a_matrix_homomorphism(p, q, rng):
    th = ThetaMatrix(2, [p / q])
    A, B = rational_rep(p, q)
    assert np.allclose(B @ A, np.exp(2j * np.pi * p / q) * A @ B)
    for _ in range(5):
        u, v = random_element(th, 2, rng), random_element(th, 2, rng)
        assert np.allclose(represent(multiply(u, v), A, B), represent(u, A, B) @ represent(v, A, B),
                           atol=1e-11)
        assert np.allclose(represent(involution(u), A, B), represent(u, A, B).conj().T, atol=1e-12)


@given(thetas(), st.data())
def test_product_matches_double_sum(th, data):
    u = data.draw(elements(th))
    v = data.draw(elements(th))
    ref = brute_product(u, v)
    got = multiply(u, v)
    for k, c in ref.items():
        assert got.coeff(k) == pytest.approx(c, abs=1e-12)


@given(thetas(), st.data())
def test_associativity(th, data):
    u, v, w = (data.draw(elements(th)) for _ in range(3))
    lhs = multiply(multiply(u, v), w)
    rhs = multiply(u, multiply(v, w))
    assert lhs.distance(rhs) <= 1e-10 * max(1.0, lhs.max_abs())


@given(thetas(), st.data())
def test_trace_is_tracial_and_involution_antimultiplicative(th, data):
    u, v = data.draw(elements(th)), data.draw(elements(th))
    assert abs(trace(multiply(u, v)) - trace(multiply(v, u))) <= 1e-12 * max(1.0, u.l1() * v.l1())
    lhs = involution(multiply(u, v))
    assert lhs.distance(multiply(involution(v), involution(u))) <= 1e-12 * max(1.0, lhs.max_abs())
    assert involution(involution(u)).distance(u) <= 1e-14 * max(1.0, u.max_abs())


@given(thetas(n=2), st.data())
def test_leibniz(th, data):
    u, v = data.draw(elements(th)), data.draw(elements(th))
    beta = data.draw(st.tuples(st.integers(0, 2), st.integers(0, 1)))
    lhs = derivation(multiply(u, v), beta)
    rhs = AlgebraElement.zero(th)
    for b1 in sub_orders(beta):
        b2 = tuple(x - y for x, y in zip(beta, b1))
        rhs = rhs + multiply(derivation(u, b1), derivation(v, b2)).scale(multi_binom(beta, b1))
    assert lhs.distance(rhs) <= 1e-10 * max(1.0, lhs.max_abs())


@given(thetas(), st.data())
def test_action_is_automorphism(th, data):
    u, v = data.draw(elements(th)), data.draw(elements(th))
    s = np.array(data.draw(st.lists(st.floats(-3, 3), min_size=th.n, max_size=th.n)))
    lhs = act(multiply(u, v), s)
    assert lhs.distance(multiply(act(u, s), act(v, s))) <= 1e-11 * max(1.0, lhs.max_abs())
    assert trace(act(u, s)) == pytest.approx(trace(u))


def test_inner_product_positive(theta2, rng):
    u = random_element(theta2, 3, rng)
    ip = inner_product(u, u)
    assert ip.real == pytest.approx(np.sum(np.abs(u.values) ** 2))
    assert abs(ip.imag) < 1e-12


def test_mismatched_theta_rejected():
    u = AlgebraElement.identity(ThetaMatrix(2, [0.1]))
    v = AlgebraElement.identity(ThetaMatrix(2, [0.2]))
    with pytest.raises(InvalidArgument):
        multiply(u, v)


def test_decay_report_on_power_law():
    th = ThetaMatrix(1)
    ks = np.arange(-40, 41)[:, None]
    u = AlgebraElement.from_arrays(th, ks, (1.0 + ks[:, 0] ** 2) ** -1.5, 40)
    rep = decay_report(u)
    assert rep.fitted_order == pytest.approx(-3.0, abs=0.15)
    assert rep.to_csv().splitlines()[0] == "shell_radius,max_abs"
    assert len(shell_maxima(u)) == 41


def test_fit_loglog_needs_two_points():
    assert fit_loglog([0, 1], [1.0, 0.0]) == (None, 0.0)
