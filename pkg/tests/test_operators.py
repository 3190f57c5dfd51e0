import math
from fractions import Fraction

import pytest
from flint import fmpq, fmpq_poly
from hypothesis import given, strategies as st

from holomnum import DiffOperator, ParseError, parse_operator
from holomnum.exact import ExactPoint
from holomnum.numberfield import QQ, KPoly
from holomnum.operators import (PointKind, UnsupportedExponentError, apply, indicial_polynomial,
                                is_regular_singular, ore_mul, rational_roots, singular_points,
                                singularities, theta_form, translate)

from conftest import APERY, BESSEL, KOUTSCHAN, LOG
from helpers import agrees

x, Dx = DiffOperator.x(), DiffOperator.Dx()


def poly(*cs):
    return KPoly(QQ, list(cs))


coeff = st.integers(-5, 5)
polys = st.lists(coeff, min_size=1, max_size=4)


@st.composite
def operators(draw, max_order=3):
    r = draw(st.integers(0, max_order))
    cs = [draw(polys) for _ in range(r)]
    lead = draw(polys.filter(lambda p: any(p)))
    return DiffOperator(cs + [lead])


@st.composite
def rationals(draw, bound=4, max_den=8):
    den = draw(st.integers(1, max_den))
    return Fraction(draw(st.integers(-bound * den, bound * den)), den)


@st.composite
def series(draw, n=12):
    return [Fraction(draw(st.integers(-20, 20)), draw(st.integers(1, 6))) for _ in range(n)]


# -- parsing

def test_parse_examples():
    L = parse_operator(BESSEL)
    assert L.order == 2 and L.coeffs[2] == poly(0, 1)
    A = parse_operator(APERY)
    assert A.order == 4
    assert A.leading_coefficient() == poly(0, 0, 1, -34, 1)
    assert parse_operator("Dx*x") == x * Dx + 1
    assert parse_operator("1/2*x^2 - 0.25").coeffs[0] == poly(fmpq(-1, 4), 0, fmpq(1, 2))


def test_parse_errors():
    with pytest.raises(ParseError, match="zero"):
        parse_operator("Dx*x - (x*Dx + 1)")
    with pytest.raises(ParseError) as err:
        parse_operator("x*Dx + * 2")
    assert err.value.pos is not None
    with pytest.raises(ParseError):
        parse_operator("Dx/x")
    with pytest.raises(ParseError):
        parse_operator("y*Dx")


# -- Ore multiplication

def test_ore_mul_examples():
    assert ore_mul(Dx, x) == x * Dx + 1
    L = parse_operator(BESSEL)
    assert ore_mul(DiffOperator.constant(1), L) == L


def test_squared_euler_action_on_monomials():
    T = ore_mul(Dx * x, Dx * x)
    for k in range(6):
        f = [0] * k + [1] + [0] * 4
        out = apply(T, f)
        assert out[k] == (k + 1) ** 2
        assert all(c == 0 for i, c in enumerate(out) if i != k)


@given(operators(), operators(), operators())
def test_ore_mul_associative_distributive(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a + b) * c == a * c + b * c


@given(operators(), operators(), series(14))
def test_apply_composition(a, b, f):
    lhs = apply(a * b, f)
    rhs = apply(a, apply(b, f))
    assert lhs[:len(rhs)] == rhs


# -- apply

def test_apply_examples():
    N = 10
    expo = [fmpq(1, math.factorial(n)) for n in range(N + 1)]
    out = apply(parse_operator("Dx - 1"), expo)
    assert all(c == 0 for c in out)
    out = apply(x, [1, 2, 3])
    assert list(out[:3]) == [0, 1, 2]
    i0 = [fmpq(0)] * 12
    for m in range(6):
        i0[2 * m] = fmpq(1, 4 ** m * math.factorial(m) ** 2)
    res = apply(parse_operator(BESSEL), i0)
    assert all(c == 0 for c in res)
    with pytest.raises(ValueError):
        apply(parse_operator("Dx^3"), [1, 2])


def test_apply_on_balls():
    from flint import acb
    out = apply(parse_operator("Dx - 1"), [acb(1), acb(1), acb(0.5)], prec=64)
    assert out[0].contains(0) and out[1].contains(0)


# -- translation

def test_translate_examples():
    assert translate(parse_operator("Dx - 1"), 1) == parse_operator("Dx - 1")
    assert translate(parse_operator(LOG), 1) == parse_operator("(x+1)*Dx^2 + Dx")


@given(operators(), rationals(5, 10))
def test_translate_roundtrip(L, a):
    assert translate(translate(L, a), -a) == L


@given(operators(), rationals())
def test_translate_indicial(L, a):
    assert indicial_polynomial(translate(L, a), 0) == indicial_polynomial(L, a)


@given(operators(), rationals(), series(14))
def test_translate_action(L, a, f):
    # M acts on g(x) = f(x + a) as L acts on f, checked on a polynomial f
    fpoly = fmpq_poly([fmpq(c.numerator, c.denominator) for c in f])
    g = fpoly(fmpq_poly([fmpq(a.numerator, a.denominator), 1]))
    lhs = apply(translate(L, a), [g[i] for i in range(len(f))] + [0] * L.order)
    Lf = fmpq_poly([0])
    dk = fpoly
    for p in L.coeffs:
        Lf += p.to_fmpq_poly() * dk
        dk = dk.derivative()
    rhs = Lf(fmpq_poly([fmpq(a.numerator, a.denominator), 1]))
    assert [c.rational() if hasattr(c, "rational") else c for c in lhs] == \
        [rhs[i] for i in range(len(lhs))]


# -- theta form

def test_theta_form_examples():
    tf = theta_form(parse_operator(BESSEL))
    assert tf.w == 1 and tf.qpolys[0] == poly(0, 0, 1) and tf.qpolys[2] == poly(-1)
    tf = theta_form(parse_operator("Dx - 1"))
    assert tf.w == 1 and tf.qpolys[0] == poly(0, 1) and tf.qpolys[1] == poly(-1)
    tf = theta_form(parse_operator("x*Dx + 1"))
    assert tf.w == 0 and tf.qpolys[0] == poly(1, 1)


@given(operators())
def test_theta_form_roundtrip(L):
    tf = theta_form(L)
    assert not tf.qpolys[0].is_zero()
    if tf.w >= 0:
        assert tf.to_operator() == DiffOperator([[0] * tf.w + [1]]) * L * tf.scale
    else:
        assert DiffOperator([[0] * -tf.w + [1]]) * tf.to_operator() == L * tf.scale


def test_theta_form_negative_shift():
    tf = theta_form(parse_operator("x^2*Dx"))
    assert tf.w == -1 and tf.qpolys == (poly(0, 1),)


# -- indicial polynomial and points

def test_indicial_examples(koutschan):
    q = indicial_polynomial(parse_operator(BESSEL), 0)
    assert rational_roots(q) == {0: 2}
    assert rational_roots(indicial_polynomial(parse_operator(APERY), 0)) == {0: 3, 1: 1}
    assert rational_roots(indicial_polynomial(koutschan, 1)) == {0: 1, 1: 2, 2: 1}


@given(operators(), rationals(9, 7))
def test_indicial_roots_at_ordinary_points(L, a):
    if L.order < 1 or L.leading_coefficient()(QQ(fmpq(a.numerator, a.denominator))).is_zero():
        return
    assert rational_roots(indicial_polynomial(L, a)) == {n: 1 for n in range(L.order)}


def test_irrational_exponents_rejected():
    L = parse_operator("x^2*Dx^2 + x*Dx - 2")
    with pytest.raises(UnsupportedExponentError):
        rational_roots(indicial_polynomial(L, 0))


def test_singularities_examples():
    assert singularities(parse_operator("Dx - 1"), 64) == []
    sing = singularities(parse_operator(APERY), 64)
    assert len(sing) == 3
    for b, ref in zip(sing, ["0", "0.029437251522859414", "33.97056274847714"]):
        assert agrees(b, ref)
    for a in sing:
        for b in sing:
            assert a is b or not a.overlaps(b)
    sing = singularities(parse_operator(BESSEL), 64)
    assert len(sing) == 1 and sing[0].contains(0)


def test_singular_points_complex():
    pts = singular_points(parse_operator("(x^2 + 1)*(x^3 - 2)*Dx + 1"))
    assert len(pts) == 5
    assert sum(1 for p in pts if p.is_real()) == 1
    assert {repr(p) for p in pts} >= {"i", "-i"}
    for p in pts:
        z = p.eval_ball(128)
        assert (z * z + 1).contains(0) or (z ** 3 - 2).contains(0)


def test_classification():
    assert is_regular_singular(parse_operator(BESSEL), 0) is PointKind.REGULAR_SINGULAR
    assert is_regular_singular(parse_operator("Dx - 1"), 0) is PointKind.ORDINARY
    assert is_regular_singular(parse_operator("x^2*Dx + 1"), 0) is PointKind.IRREGULAR
