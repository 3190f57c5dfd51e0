from fractions import Fraction

import pytest
from flint import acb, acb_mat, arb, fmpq

from holomnum import parse_operator
from holomnum.balls import mat_mul, mat_solve, working_precision
from holomnum.exact import as_point
from holomnum.path import (PathError, numerical_solution, numerical_transition_matrix,
                           singular_step, step_transition, subdivide)
from holomnum.operators import singularities

from conftest import APERY, BESSEL, ERF, LOG
from helpers import abs_agrees, agrees

E40 = "2.71828182845904523536028747135266249775725"


def overlaps(a, b):
    return all(a[i, j].overlaps(b[i, j]) for i in range(a.nrows()) for j in range(a.ncols()))


def contains_identity(m):
    return all(m[i, j].contains(1 if i == j else 0)
               for i in range(m.nrows()) for j in range(m.ncols()))


# -- subdivision

def _rho(sing, p):
    with working_precision(64):
        z = as_point(p).eval_ball(64)
        return min(((s - z).abs_lower() for s in sing if not (s - z).contains(0)),
                   default=arb("inf"))


def _check_steps(dop, steps):
    sing = singularities(dop, 64)
    with working_precision(64):
        for st in steps:
            length = (as_point(st.x1).eval_ball(64) - as_point(st.x0).eval_ball(64)).abs_upper()
            assert length <= _rho(sing, st.expansion_point) / 2


def test_subdivide_examples(apery):
    assert len(subdivide([0, 1], parse_operator("Dx - 1"))) == 1
    steps = subdivide([0, "i/20", 1], apery)
    assert len(steps) >= 5
    assert steps[0].kind == "from_singular"
    _check_steps(apery, steps)
    L = parse_operator(LOG)
    steps = subdivide([1, "i", -1], L)
    _check_steps(L, steps)
    with working_precision(64):
        for st in steps:
            x0 = as_point(st.x0).eval_ball(64)
            assert (as_point(st.x1).eval_ball(64) - x0).abs_upper() <= x0.abs_lower() / 2


def test_path_through_singularity(apery):
    # the real segment [0, 1] crosses the singular point near 0.0294
    with pytest.raises(PathError):
        subdivide([0, 1], apery)
    with pytest.raises(PathError):
        numerical_transition_matrix(apery, [0, 1], 1e-10)
    with pytest.raises(PathError):
        subdivide([1, 0, 2], parse_operator(LOG))


def test_irregular_endpoint():
    with pytest.raises(PathError):
        subdivide([0, 1], parse_operator("x^2*Dx + 1"))


# -- steps

def test_step_transition_examples():
    L = parse_operator(LOG)
    m = step_transition(L, 1, 1, 1e-20, 64)
    assert contains_identity(m) and all(m[i, j].is_exact() for i in range(2) for j in range(2))
    # 1 -> 2 has |z| equal to the convergence radius; a legal step instead
    m = step_transition(L, 1, Fraction(3, 2), Fraction(1, 10 ** 30), 128)
    with working_precision(128):
        assert m[0, 0].contains(1) and m[1, 0].contains(0)
        assert m[0, 1].overlaps(arb(fmpq(3, 2)).log())
        assert m[1, 1].overlaps(arb(fmpq(2, 3)))
        assert m[0, 1].rad() < 1e-30


def test_step_composition():
    L = parse_operator("Dx - 1")
    eps = Fraction(1, 10 ** 30)
    whole = step_transition(L, 0, 1, eps, 128)
    half = mat_mul(step_transition(L, Fraction(1, 2), 1, eps, 128),
                   step_transition(L, 0, Fraction(1, 2), eps, 128), 128)
    assert overlaps(whole, half)


def test_singular_step_examples():
    K = parse_operator(BESSEL)
    m = singular_step(K, 0, 1, Fraction(1, 10 ** 15), 80)
    with working_precision(80):
        ini = acb_mat([[-1], [arb(2).log() - arb.const_euler()]])
        assert agrees((m * ini)[0, 0], "0.42102443824")
    m = singular_step(parse_operator(LOG), 0, Fraction(1, 2), Fraction(1, 10 ** 15), 64)
    # canonical basis (log(x), 1): the constant solution has jet (1, 0)
    assert m[0, 1] == acb(1) and m[1, 1] == acb(0)
    with working_precision(64):
        assert agrees(m[0, 0], "-0.69314718055994531")
        assert agrees(m[1, 0], "2")


def test_singular_step_roundtrip():
    K = parse_operator(BESSEL)
    m = singular_step(K, 0, Fraction(1, 3), Fraction(1, 10 ** 20), 100)
    inv = mat_solve(m, acb_mat([[1, 0], [0, 1]]), 100)
    assert contains_identity(mat_mul(inv, m, 100))


# -- full paths

def test_transition_matrix_examples():
    tm = numerical_transition_matrix(parse_operator(LOG), [1, 2], 1e-10)
    assert tm[0, 0].contains(1) and tm[1, 0].contains(0)
    assert agrees(tm[0, 1], "0.69314718056") and agrees(tm[1, 1], "0.50000000000")
    assert tm.radius <= 1e-10 and tm.warning is None
    assert tm.shape == (2, 2)


def test_solution_examples():
    v = numerical_solution(parse_operator("Dx - 1"), [1], [0, 1], Fraction(1, 10 ** 40))
    assert agrees(v, E40) and v.rad() <= 1e-40
    v = numerical_solution(parse_operator(ERF), [0, "2/sqrt(pi)"], [0, "i"], 1e-16)
    assert v.real.contains(0)
    assert agrees(v, "1.6504257587975429", part="imag")
    L = parse_operator(LOG)
    up = numerical_solution(L, [0, 1], [1, "i", -1])
    down = numerical_solution(L, [0, 1], [1, "-i", -1])
    with working_precision(64):
        assert up.imag.overlaps(arb.pi()) and down.imag.overlaps(-arb.pi())
        assert up.real.contains(0) and down.real.contains(0)


def test_solution_at_singular_end():
    # f(2) = 0, f'(2) = 1 gives f = 2*log(x/2): log(x) coefficient 2
    v = numerical_solution(parse_operator(LOG), [0, 1], [2, 0], 1e-20)
    assert v.contains(2) and v.rad() < 1e-20
    v = numerical_solution(parse_operator(LOG), ["log(2)", "1/2"], [2, 0], 1e-20)
    assert v.contains(1)


def test_composition_and_homotopy():
    L = parse_operator(BESSEL)
    eps = 1e-25
    whole = numerical_transition_matrix(L, [1, 2], eps).matrix
    a = numerical_transition_matrix(L, [1, "3/2"], eps).matrix
    b = numerical_transition_matrix(L, ["3/2", 2], eps).matrix
    assert overlaps(whole, mat_mul(b, a, 128))
    bent = numerical_transition_matrix(L, [1, "3/2+i/4", 2], eps).matrix
    assert overlaps(whole, bent)


def test_trivial_loop_and_monodromy_inverse():
    L = parse_operator(LOG)
    loop = numerical_transition_matrix(L, [2, "2+i", 3, 2], 1e-20).matrix
    assert contains_identity(loop)
    around = numerical_transition_matrix(L, [1, "i", -1, "-i", 1], 1e-20).matrix
    back = numerical_transition_matrix(L, [1, "-i", -1, "i", 1], 1e-20).matrix
    assert not contains_identity(around)
    assert contains_identity(mat_mul(back, around, 128))
    with working_precision(64):
        assert around[0, 1].imag.overlaps(2 * arb.pi())


def test_linearity():
    L = parse_operator("Dx^2 - x")
    path = [0, "1/2+i/3", 1]
    u, v = [1, Fraction(1, 3)], [Fraction(-2, 5), 4]
    a, b = Fraction(3, 7), Fraction(-5, 2)
    mix = [a * x + b * y for x, y in zip(u, v)]
    fu = numerical_solution(L, u, path, 1e-30)
    fv = numerical_solution(L, v, path, 1e-30)
    fm = numerical_solution(L, mix, path, 1e-30)
    with working_precision(128):
        comb = acb(fmpq(3, 7)) * fu + acb(fmpq(-5, 2)) * fv
        assert fm.overlaps(comb)


def test_determinant_nonvanishing(apery):
    tm = numerical_transition_matrix(apery, ["1/2", "1+i", 3], 1e-20)
    r = apery.order
    ident = acb_mat([[int(i == j) for j in range(r)] for i in range(r)])
    inv = mat_solve(tm.matrix, ident, tm.prec)
    assert contains_identity(mat_mul(inv, tm.matrix, tm.prec))


def test_jets_match_finite_differences():
    L = parse_operator("Dx^2 - x")
    tm = numerical_transition_matrix(L, [0, 1], 1e-30)
    h = Fraction(1, 10 ** 5)
    for col, ini in enumerate(([1, 0], [0, 1])):
        fp = numerical_solution(L, ini, [0, 1 + h], 1e-30)
        fm = numerical_solution(L, ini, [0, 1 - h], 1e-30)
        f0 = numerical_solution(L, ini, [0, 1], 1e-30)
        with working_precision(128):
            hb = arb(fmpq(1, 10 ** 5))
            d1 = (fp - fm) / (2 * hb)
            d2 = (fp - 2 * f0 + fm) / (hb * hb) / 2
            assert abs(tm[0, col] - f0) < 1e-25
            assert abs(tm[1, col] - d1) < 1e-8
            assert abs(tm[1, col] - d1) < 1e-8
            # second-derivative jet of a second order operator: f''/2 = x f / 2
            assert abs(d2 - f0 / 2) < 1e-4


def test_retry_budget(monkeypatch):
    monkeypatch.setenv("HOLOMNUM_MAX_RETRIES", "x")
    with pytest.raises(ValueError):
        numerical_transition_matrix(parse_operator("Dx - 1"), [0, 1])
    monkeypatch.setenv("HOLOMNUM_MAX_RETRIES", "0")
    tm = numerical_transition_matrix(parse_operator("Dx - 1"), [0, 1], Fraction(1, 10 ** 30))
    assert tm[0, 0].overlaps(arb(1).exp())
