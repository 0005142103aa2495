from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from kepler_convexity.polycore import (
    ZW,
    PolyMatrix3,
    Ring,
    SparsePoly,
    identity_on_grid,
    poly_arith,
    poly_det3,
    poly_diff,
    poly_eval,
    pseudo_rem_linear,
)
from kepler_convexity.errors import DegreeError

R3 = Ring(("x", "y", "t"))

coeffs = st.fractions(min_value=-20, max_value=20, max_denominator=7)
monos = st.tuples(*[st.integers(0, 3)] * 3)
polys = st.dictionaries(monos, coeffs, max_size=6).map(lambda d: SparsePoly(d, R3))
points = st.tuples(*[st.fractions(min_value=-5, max_value=5, max_denominator=5)] * 3)


def _F():
    z1, z2, w1, w2, c = ZW.gens()
    a = z1**2 + z2**2 + w1**2 + w2**2
    b = w1 * z2 - z1 * w2
    return -1 + 4 * b * a**2 - 2 * c * a**2, a, b


# -- ring axioms and calculus rules -------------------------------------------


@given(polys, polys, polys)
def test_distributive(p, q, r):
    assert (p + q) * r == p * r + q * r


@given(polys, polys)
def test_commutative(p, q):
    assert p + q == q + p
    assert p * q == q * p


@given(polys, polys, polys)
def test_associative(p, q, r):
    assert (p * q) * r == p * (q * r)
    assert (p + q) + r == p + (q + r)


@given(polys)
def test_additive_inverse(p):
    assert (p - p).is_zero()
    assert (p + (-p)).is_zero()


@given(polys, polys, st.integers(0, 2))
def test_leibniz(p, q, i):
    assert (p * q).diff(i) == p.diff(i) * q + p * q.diff(i)


@given(polys, polys, points)
def test_eval_homomorphism(p, q, x):
    assert (p * q).eval(x) == p.eval(x) * q.eval(x)
    assert (p + q).eval(x) == p.eval(x) + q.eval(x)


@given(polys)
def test_no_zero_coefficients(p):
    assert all(v != 0 for v in p.terms.values())


@given(polys)
def test_text_roundtrip(p):
    assert SparsePoly.parse(p.to_text(), R3) == p


def _to_sympy(P, gens):
    out = sympy.Integer(0)
    for e, v in P.terms.items():
        v = Fraction(v)
        out += sympy.Rational(v.numerator, v.denominator) * sympy.Mul(*[g**k for g, k in zip(gens, e)])
    return out


@given(polys, polys)
def test_product_matches_sympy(p, q):
    gens = sympy.symbols("x y t")
    want = sympy.expand(_to_sympy(p, gens) * _to_sympy(q, gens))
    assert sympy.expand(_to_sympy(p * q, gens) - want) == 0


# -- documented examples ----------------------------------------------------------


def test_small_examples():
    z1 = SparsePoly.var("z1")
    assert poly_arith("add", z1, -z1).is_zero()
    assert poly_arith("mul", z1 + 1, z1 - 1) == z1**2 - 1
    assert poly_arith("sub", z1, z1).is_zero()
    with pytest.raises(ValueError):
        poly_arith("div", z1, z1)
    assert poly_diff(z1**2, 0) == 2 * z1


def test_diff_in_c():
    F, a, _ = _F()
    c = SparsePoly.var("c")
    assert poly_diff(-2 * c * a**2, "c") == -2 * a**2
    assert F.diff("c") == -2 * a**2


def test_dF_dz1_hand_value():
    F, _, _ = _F()
    assert poly_eval(F.diff("z1"), (1, 0, 0, 1, 0)) == -48


def test_eval_examples():
    F, a, b = _F()
    for c0 in (0, Fraction(-3, 2), 17):
        assert poly_eval(F, (0, 0, 0, 0, c0)) == -1
    assert poly_eval(a, (1, 0, 0, 1, 0)) == 2
    h = Fraction(1, 2)
    assert poly_eval(b, (h, 0, 0, h, 0)) == Fraction(-1, 4)


def test_eval_is_exact():
    x = SparsePoly.var("z1")
    v = poly_eval(Fraction(1, 3) * x**3, (Fraction(1, 3), 0, 0, 0, 0))
    assert v == Fraction(1, 81)


def test_pseudo_rem_examples():
    F, a, b = _F()
    c = SparsePoly.var("c")
    assert pseudo_rem_linear(F, F, "c").is_zero()
    p = c * (-2 * a**2) + (4 * b * a**2 - 1)
    assert pseudo_rem_linear(p, F, "c").is_zero()
    # a multiple of F plus a c-free remainder
    r = pseudo_rem_linear((c**2 + a) * F + b, F, "c")
    assert r.degree("c") == 0
    assert not r.is_zero()


def test_pseudo_rem_relation():
    # lc(d)^k p = q d + r for p = c^2, d = 2 x c + 1 in (x, c)
    R = Ring(("x", "c"))
    x, c = R.gens()
    d = 2 * x * c + 1
    r = pseudo_rem_linear(c**2, d, "c")
    assert r == SparsePoly.const(1, R)  # 4x^2 c^2 = (2xc - 1) d + 1


def test_pseudo_rem_degree_error():
    F, a, _ = _F()
    c = SparsePoly.var("c")
    with pytest.raises(DegreeError):
        pseudo_rem_linear(F, c**2 + a, "c")
    with pytest.raises(DegreeError):
        pseudo_rem_linear(F, a, "c")


def test_det3_examples():
    x, y, t = R3.gens()
    z = SparsePoly.zero(R3)
    assert poly_det3(PolyMatrix3([[x, z, z], [z, y, z], [z, z, t]])) == x * y * t
    assert poly_det3([[x, y, t], [x, y, t], [t, x + 1, y]]).is_zero()


@given(st.lists(st.integers(-4, 4), min_size=9, max_size=9))
def test_det3_matches_sympy(entries):
    M = [[SparsePoly.const(entries[3 * i + j], R3) for j in range(3)] for i in range(3)]
    got = poly_det3(M)
    want = sympy.Matrix(3, 3, entries).det()
    assert got == SparsePoly.const(int(want), R3)


def test_polymatrix_symmetric():
    x, y, t = R3.gens()
    assert PolyMatrix3([[x, y, t], [y, x, y], [t, y, x]]).is_symmetric()
    assert not PolyMatrix3([[x, y, t], [t, x, y], [t, y, x]]).is_symmetric()


def test_text_format():
    p = SparsePoly.parse("3/2*z1^2*c - w2 + 1")
    assert p.to_text() == "3/2*z1^2*c - 1*w2 + 1"
    assert SparsePoly.parse(p.to_text()) == p
    assert SparsePoly.zero().to_text() == "0"


def test_grlex_order():
    p = SparsePoly.parse("1 + z1 + c^3 + z1*w2")
    degs = [sum(e) for e in p.terms]
    assert degs == sorted(degs, reverse=True)


def test_degree_and_weights():
    F, _, _ = _F()
    assert F.degree() == 6
    assert F.degree("c") == 1
    assert F.weighted_degrees((1, 1, 1, 1, 2)) == {0, 6}


def test_exact_div():
    x, y, _ = R3.gens()
    assert ((x + y) * (x - y)).exact_div(x + y) == x - y
    with pytest.raises(ArithmeticError):
        (x**2 + 1).exact_div(x + y)


def test_compose_and_substitute():
    x, y, t = R3.gens()
    p = x**2 + y
    assert p.compose([t, t**2, x]) == 2 * t**2
    # den^d * p(num/den) with d = 2 in x
    q = p.substitute_rational("x", y, t)
    assert q == y**2 + y * t**2


def test_identity_on_grid():
    ok, w = identity_on_grid(lambda a, b: (a + b) ** 2, lambda a, b: a * a + 2 * a * b + b * b, (2, 2))
    assert ok and w is None
    ok, w = identity_on_grid(lambda a: a**3, lambda a: a, (3,))
    assert not ok and w is not None


def test_ring_validation():
    with pytest.raises((KeyError, ValueError)):
        ZW.index("q")
    with pytest.raises(ValueError):
        SparsePoly({(1, 2): 1}, ZW)
