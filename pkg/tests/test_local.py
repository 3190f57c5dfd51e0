import math

import pytest
from flint import acb, arb, fmpq
from hypothesis import given, strategies as st

from holomnum import parse_operator
from holomnum.balls import working_precision
from holomnum.exact import parse_point
from holomnum.local import (Cluster, IrregularPointError, evaluate_log_series,
                            expand_local_solution, group_exponents, local_basis_monomials)
from holomnum.operators import translate

from conftest import APERY, BESSEL, KOUTSCHAN
from helpers import agrees

XI = "alg(x^2-34*x+1; 0.02, 0.04)"


# -- structure

def test_monomials_examples(koutschan, apery):
    assert local_basis_monomials(koutschan, 0).monomials() == \
        ["1/6*log(x)^3", "1/2*log(x)^2", "log(x)", "1"]
    assert local_basis_monomials(apery, 0).monomials() == ["1/2*log(x)^2", "log(x)", "1", "x"]
    assert local_basis_monomials(parse_operator(BESSEL), 0).monomials() == ["log(x)", "1"]
    at_xi = local_basis_monomials(apery, parse_point(XI))
    assert [l for l in at_xi] == [(0, 0), (fmpq(1, 2), 0), (1, 0), (2, 0)]
    assert at_xi.monomials()[1].startswith("sqrt(x - 0.029437")
    assert local_basis_monomials(parse_operator("Dx^2 + 1"), 2).monomials() == ["1", "x - 2"]


def test_monomial_order():
    s = local_basis_monomials(parse_operator("4*x^2*Dx^2 - 3"), 0)
    assert s.labels == [(fmpq(-1, 2), 0), (fmpq(3, 2), 0)]
    assert s.monomials() == ["x^(-1/2)", "x^(3/2)"]


def test_irregular_point_rejected():
    with pytest.raises(IrregularPointError):
        local_basis_monomials(parse_operator("x^2*Dx + 1"), 0)


def test_group_exponents():
    g = group_exponents({fmpq(0): 3, fmpq(1): 1})
    assert g == [Cluster(fmpq(0), ((0, 3), (1, 1)))]
    g = group_exponents({fmpq(1, 2): 1, fmpq(-1, 2): 2, fmpq(1, 3): 1, fmpq(5, 2): 1})
    assert g == [Cluster(fmpq(-1, 2), ((0, 2), (1, 1), (3, 1))),
                 Cluster(fmpq(1, 3), ((0, 1),))]
    assert g[0].size == 4 and g[0].max_offset == 3 and g[0].multiplicity(2) == 0


@given(st.dictionaries(st.builds(fmpq, st.integers(-12, 12), st.integers(1, 4)),
                       st.integers(1, 3), min_size=1, max_size=6))
def test_group_exponents_partition(roots):
    clusters = group_exponents(roots)
    seen = {}
    for c in clusters:
        for n, m in c.offsets:
            seen[c.nu + n] = m
    assert seen == roots
    nus = [c.nu for c in clusters]
    assert nus == sorted(nus)
    for i, a in enumerate(nus):
        for b in nus[:i]:
            assert (a - b).q != 1


# -- expansions

def test_expand_examples():
    f = expand_local_solution(parse_operator("Dx - 1"), 0, (0, 0), 12)
    assert [u[0] for u in f.coeffs] == [fmpq(1, math.factorial(n)) for n in range(12)]
    g = expand_local_solution(parse_operator(BESSEL), 0, (0, 0), 12)
    i0 = [fmpq(1, 4 ** (n // 2) * math.factorial(n // 2) ** 2) if n % 2 == 0 else 0
          for n in range(12)]
    assert g.log_part(0) == i0
    h = expand_local_solution(parse_operator(BESSEL), 0, (0, 1), 12)
    assert h.log_part(1) == i0
    assert h.coeffs[0][0] == 0
    assert h.K == 1 and g.K == 0


def test_expand_in_balls_matches_exact(apery):
    ex = expand_local_solution(apery, 0, (0, 2), 20)
    with working_precision(200):
        bl = expand_local_solution(apery, 0, (0, 2), 20, prec=200)
        for u, v in zip(ex.coeffs, bl.coeffs):
            for a, b in zip(u, v):
                exact = acb(arb(a.rational()))
                assert b.contains(exact)
                assert b.rad() <= abs(exact).upper() * arb(2) ** -150


def _apply_to_log_series(dop, f):
    """dop applied to a truncated log-series, by direct differentiation of
    x^a log(x)^k / k! (exact, independent of the recurrence)."""
    terms = {}
    for n, u in enumerate(f.coeffs):
        for k, c in enumerate(u):
            if c != 0:
                terms[(f.nu + n, k)] = c
    out = {}
    cur = dict(terms)
    for p in dop.coeffs:
        for j, pc in enumerate(p.coeffs):
            for (a, k), c in cur.items():
                key = (a + j, k)
                out[key] = out.get(key, 0) + pc * c
        nxt = {}
        for (a, k), c in cur.items():
            if a != 0:
                nxt[(a - 1, k)] = nxt.get((a - 1, k), 0) + a * c
            if k > 0:
                nxt[(a - 1, k - 1)] = nxt.get((a - 1, k - 1), 0) + c
        cur = nxt
    return out


@pytest.mark.parametrize("name,point", [("apery", "0"), ("apery", XI), ("koutschan", "0"),
                                        ("bessel", "0"), ("koutschan", "1")])
def test_residual_exactness(name, point, apery, koutschan):
    dop = {"apery": apery, "koutschan": koutschan, "bessel": parse_operator(BESSEL)}[name]
    x0 = parse_point(point)
    local = translate(dop, x0.value if hasattr(x0, "value") else x0)
    N = 15
    for label in local_basis_monomials(dop, x0):
        f = expand_local_solution(dop, x0, label, N)
        res = _apply_to_log_series(local, f)
        for (a, k), c in res.items():
            if a < f.nu + N - dop.order:
                assert c == 0, (label, a, k)


@pytest.mark.parametrize("name,point", [("apery", "0"), ("apery", XI), ("koutschan", "0"),
                                        ("koutschan", "1")])
def test_distinguished_coefficients(name, point, apery, koutschan):
    dop = {"apery": apery, "koutschan": koutschan}[name]
    x0 = parse_point(point)
    s = local_basis_monomials(dop, x0)
    N = int(max(mu for mu, _ in s) - min(mu for mu, _ in s)) + 2
    for i, (mu, k) in enumerate(s):
        f = expand_local_solution(dop, x0, (mu, k), N)
        for j, (mu2, k2) in enumerate(s):
            if (mu2 - f.nu).q != 1 or not 0 <= mu2 - f.nu < N:
                continue
            n = int(mu2 - f.nu)
            c = f.coeffs[n][k2] if k2 < len(f.coeffs[n]) else 0
            assert c == (1 if i == j else 0)


# -- evaluation

def test_evaluate_log_series_branches():
    f = expand_local_solution(parse_operator(BESSEL), 0, (0, 1), 1)
    with working_precision(128):
        pi = arb.pi()
        v = evaluate_log_series(f, acb(-1), "principal", prec=128)[0]
        assert v.imag.overlaps(pi) and v.real.contains(0)
        v = evaluate_log_series(f, acb(-1), "lower", prec=128)[0]
        assert v.imag.overlaps(-pi)


def test_evaluate_half_power_jet():
    f = expand_local_solution(parse_operator("2*x*Dx - 1"), 0, (fmpq(1, 2), 0), 3)
    with working_precision(128):
        j = evaluate_log_series(f, acb(fmpq(1, 4)), jet_order=2, prec=128)
        assert j[0].contains(acb(fmpq(1, 2))) and j[0].rad() < 1e-30
        assert j[1].contains(acb(1)) and j[1].rad() < 1e-30


def test_evaluate_exp_jet():
    f = expand_local_solution(parse_operator("Dx - 1"), 0, (0, 0), 40)
    with working_precision(128):
        j = evaluate_log_series(f, acb(fmpq(1, 8)), jet_order=3, prec=128)
        e = arb(fmpq(1, 8)).exp()
        for c in j[:2]:
            assert agrees(c, e.str(30, radius=False))
        assert agrees(j[2], (e / 2).str(30, radius=False))
