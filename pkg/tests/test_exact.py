import random

import pytest
from flint import acb, arb, fmpq, fmpq_poly
from hypothesis import given, strategies as st

from holomnum import ConstantExpr, DomainError, ExactPoint, parse_operator, parse_point
from holomnum.balls import working_precision
from holomnum.exact import eval_ball, is_singular_point, refine
from holomnum.numberfield import QQ, QQI, AlgebraicRoot, IsolationError, NumberField, common_field

from conftest import APERY, BESSEL
from helpers import agrees

XI_DIGITS = "0.0294372515228594143797353"  # 17 - 12*sqrt(2)


def test_constant_expressions():
    z = ConstantExpr.parse("log(2) - euler_gamma").eval_ball(128)
    assert agrees(z, "0.11593151565841244881")
    assert agrees(ConstantExpr.parse("2/sqrt(pi)").eval_ball(64), "1.1283791670955126")
    w = ConstantExpr.parse("(1+i)^2/2").eval_ball(64)
    assert w.real.contains(0) and w.imag.contains(1)


def test_constant_relative_radius():
    for text in ("log(3)", "sqrt(2)*pi", "1/3", "euler_gamma^3 - 1/7"):
        c = ConstantExpr.parse(text)
        for prec in (16, 64, 300):
            z = c.eval_ball(prec)
            with working_precision(64):
                assert z.rad() <= z.abs_upper() * arb(2) ** (4 - prec)


def test_constant_nested_across_precisions():
    c = ConstantExpr.parse("log(5/2) + sqrt(7)")
    balls_ = [c.eval_ball(p) for p in (10, 40, 160, 640)]
    for a, b in zip(balls_, balls_[1:]):
        assert a.overlaps(b)


@pytest.mark.parametrize("text", ["log(0)", "log(-2)", "1/(1-1)", "sqrt(-1) + log(-1/2)"])
def test_constant_domain_errors(text):
    with pytest.raises(DomainError):
        ConstantExpr.parse(text).eval_ball(64)


def test_rational_points():
    p = parse_point("3/2")
    assert p.is_rational() and p.eval_ball(64).is_exact()
    q = parse_point("0.1")  # decimals are exact rationals
    assert q.value.rational() == fmpq(1, 10)
    z = eval_ball(q, 10)
    with working_precision(64):
        assert z.rad() <= arb(fmpq(1, 10)) * arb(2) ** -6
        assert z.contains(arb(fmpq(1, 10)))


def test_gaussian_points_and_repr():
    p = parse_point("1-i/2")
    assert p.is_gaussian() and not p.is_real()
    assert p.parts() == (fmpq(1), fmpq(-1, 2))
    assert repr(p) == "1-1/2*i"
    assert repr(parse_point("i")) == "i"
    assert repr(parse_point("2+3*i")) == "2+3*i"


def test_algebraic_point_refine():
    p = parse_point("alg(x^2 - 34*x + 1; 0, 1/10)")
    assert not p.is_gaussian() and p.is_real()
    r = refine(p, 128)
    assert r.field.root.width() <= fmpq(1, 2 ** 128)
    assert agrees(r.eval_ball(128), XI_DIGITS)
    rect = r.field.root.rect
    refine(r, 128)
    assert r.field.root.rect == rect  # idempotent


def test_newton_refinement_contracts():
    root = AlgebraicRoot(fmpq_poly([-2, 0, 1]), 1, 2)
    fine = root.refine(60)
    lo, hi = root.rect[:2]
    assert lo <= fine.rect[0] <= fine.rect[1] <= hi
    assert fine.width() <= fmpq(1, 2 ** 60)


def test_algebraic_reduces_to_rational_or_gaussian():
    assert parse_point("alg(x^2 - 4; 1, 3)").value.rational() == 2
    g = parse_point("alg(x^2 + 1; -1, 1, 1/2, 2)")
    assert g.is_gaussian() and g.parts() == (0, 1)


def test_isolation_errors():
    with pytest.raises(IsolationError):
        parse_point("alg(x^2 - 2; -2, 2)")  # two roots
    with pytest.raises(IsolationError):
        parse_point("alg(x^2 - 2; 2, 3)")  # none


def test_is_singular_point():
    L = parse_operator(BESSEL)
    assert is_singular_point(0, L)
    assert not is_singular_point(1, L)
    A = parse_operator(APERY)
    xi = parse_point("alg(x^2 - 34*x + 1; 0, 1/10)")
    assert is_singular_point(xi, A)
    assert not is_singular_point(parse_point("alg(x^2 - 2; 1, 2)"), A)


def test_number_field_arithmetic():
    K = NumberField(fmpq_poly([-2, 0, 1]), AlgebraicRoot(fmpq_poly([-2, 0, 1]), 1, 2), "s")
    s = K.gen()
    assert s * s == K(2)
    inv = (1 + s).inverse()
    assert inv * (1 + s) == K(1)
    with working_precision(128):
        assert agrees(inv.to_ball(128), "0.41421356237309504880")
    with pytest.raises(TypeError):
        common_field(K, QQI)
    assert common_field(QQ, K) is K


@given(st.fractions(), st.fractions(), st.fractions(), st.fractions())
def test_gaussian_field_matches_complex_arithmetic(a, b, c, d):
    x = QQI(a) + QQI(b) * QQI.gen()
    y = QQI(c) + QQI(d) * QQI.gen()
    prod = x * y
    re, im = prod.gaussian_parts()
    assert re == fmpq((a * c - b * d).numerator, (a * c - b * d).denominator)
    assert im == fmpq((a * d + b * c).numerator, (a * d + b * c).denominator)
