"""Linear differential operators with exact polynomial coefficients.

An operator ``p_r(x) Dx^r + ... + p_1(x) Dx + p_0(x)`` is stored as the
list ``[p_0, ..., p_r]`` of :class:`~holomnum.numberfield.KPoly`.  User
operators have rational coefficients; translating to an algebraic
expansion point moves them into that point's number field.

The theta form ``x^w L = sum_k x^k q_k(theta)`` (theta = x Dx) is what the
rest of the package works with: ``q_0`` is the indicial polynomial and the
``q_k`` give the recurrence satisfied by series coefficients.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from flint import acb, arb, fmpq, fmpq_poly, fmpz

from .balls import working_precision
from .exact import ExactPoint, as_point
from .numberfield import QQ, KPoly, NFElem, common_field, dyadic

__all__ = ["DiffOperator", "ThetaFormRecurrence", "PointKind", "ore_mul",
           "apply", "translate", "theta_form", "indicial_polynomial",
           "rational_roots", "UnsupportedExponentError", "singular_points",
           "singularities", "is_regular_singular", "falling_factorial",
           "parse_operator"]


class UnsupportedExponentError(ValueError):
    """The indicial polynomial has roots outside Q."""


class PointKind(enum.Enum):
    ORDINARY = "ordinary"
    REGULAR_SINGULAR = "regular_singular"
    IRREGULAR = "irregular"


def _kpoly(field, p):
    if isinstance(p, KPoly):
        return p.change_field(common_field(field, p.field))
    if isinstance(p, (int, fmpz, fmpq, NFElem)):
        return KPoly(field, [p])
    if isinstance(p, (list, tuple)):
        return KPoly(field, list(p))
    return KPoly.from_fmpq_poly(field, fmpq_poly(p))


class DiffOperator:
    """Exact differential operator ``sum_i coeffs[i](x) Dx^i``.

    ``coeffs`` may hold KPoly objects, fmpq_poly objects, coefficient lists
    or scalars.  Trailing zero coefficients are dropped; the zero operator
    has order -1.
    """

    __slots__ = ("field", "coeffs")

    def __init__(self, coeffs, field=None):
        coeffs = list(coeffs)
        if field is None:
            field = QQ
            for c in coeffs:
                if isinstance(c, KPoly):
                    field = common_field(field, c.field)
                elif isinstance(c, NFElem):
                    field = common_field(field, c.field)
        cs = [_kpoly(field, c) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        self.field = field
        self.coeffs = tuple(cs)

    # -- constructors

    @classmethod
    def x(cls):
        return cls([[0, 1]])

    @classmethod
    def Dx(cls):
        return cls([[], [1]])

    @classmethod
    def constant(cls, c):
        return cls([[c]] if not isinstance(c, NFElem) else [KPoly(c.field, [c])])

    # -- basic queries

    @property
    def order(self):
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    def leading_coefficient(self):
        return self.coeffs[-1]

    def degree(self):
        return max((c.degree() for c in self.coeffs), default=-1)

    def is_rational(self):
        return self.field.is_rational or all(c.is_rational() for c in self.coeffs)

    # -- arithmetic

    def _lift(self, other):
        if not isinstance(other, DiffOperator):
            other = DiffOperator([_kpoly(self.field, other)])
        k = common_field(self.field, other.field)
        return self.change_field(k), other.change_field(k)

    def change_field(self, k):
        if k is self.field:
            return self
        return DiffOperator([c.change_field(k) for c in self.coeffs], k)

    def __add__(self, other):
        a, b = self._lift(other)
        n = max(len(a.coeffs), len(b.coeffs))
        zero = KPoly(a.field)
        return DiffOperator([(a.coeffs[i] if i < len(a.coeffs) else zero)
                             + (b.coeffs[i] if i < len(b.coeffs) else zero)
                             for i in range(n)], a.field)

    __radd__ = __add__

    def __neg__(self):
        return DiffOperator([-c for c in self.coeffs], self.field)

    def __sub__(self, other):
        a, b = self._lift(other)
        return a + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._lift(other)
        return ore_mul(a, b)

    def __rmul__(self, other):
        a, b = self._lift(other)
        return ore_mul(b, a)

    def __pow__(self, n):
        out = DiffOperator([[1]])
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, DiffOperator):
            return NotImplemented
        a, b = self._lift(other)
        return a.coeffs == b.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        if self.is_zero():
            return "0"
        terms = []
        for i in range(self.order, -1, -1):
            c = self.coeffs[i]
            if c.is_zero():
                continue
            d = "" if i == 0 else ("Dx" if i == 1 else f"Dx^{i}")
            terms.append(f"({c})*{d}" if d else f"({c})")
        return " + ".join(terms)

    # -- convenience wrappers

    def apply(self, f, prec=None):
        return apply(self, f, prec)

    def translate(self, a):
        return translate(self, a)

    def theta_form(self):
        return theta_form(self)

    def indicial_polynomial(self, x0=0):
        return indicial_polynomial(self, x0)

    def singularities(self, prec=53):
        return singularities(self, prec)

    def local_basis_monomials(self, x0):
        from .local import local_basis_monomials
        return local_basis_monomials(self, x0)

    def numerical_solution(self, ini, path, eps=1e-16, **kwds):
        from .path import numerical_solution
        return numerical_solution(self, ini, path, eps, **kwds)

    def numerical_transition_matrix(self, path, eps=1e-16, **kwds):
        from .path import numerical_transition_matrix
        return numerical_transition_matrix(self, path, eps, **kwds)


def ore_mul(a, b):
    """The product ``a * b`` in K[x]<Dx>, i.e. apply ``b`` first.

    Uses Leibniz's rule Dx^i p = sum_k binom(i, k) p^(k) Dx^(i-k).
    """
    a, b = a._lift(b)
    k = a.field
    if a.is_zero() or b.is_zero():
        return DiffOperator([], k)
    out = [KPoly(k) for _ in range(a.order + b.order + 1)]
    for j, bj in enumerate(b.coeffs):
        if bj.is_zero():
            continue
        deriv = bj
        for m in range(a.order + 1):
            # deriv = bj^(m)
            if deriv.is_zero():
                break
            for i in range(m, a.order + 1):
                ai = a.coeffs[i]
                if ai.is_zero():
                    continue
                out[i - m + j] = out[i - m + j] + ai * deriv * math.comb(i, m)
            deriv = deriv.derivative()
    return DiffOperator(out, k)


def apply(dop, f, prec=None):
    """Apply ``dop`` to the truncated power series with coefficients ``f``.

    ``f`` is a list ``[f_0, ..., f_{T-1}]`` standing for sum f_n x^n + O(x^T),
    with entries in Q, the operator's field or complex balls.  The result
    holds the coefficients of ``dop . f`` known exactly from the input,
    that is the first ``T - r`` of them (r the order).
    """
    r = dop.order
    t = len(f)
    if t < r:
        raise ValueError(f"truncation order {t} is smaller than the operator order {r}")
    balls = any(isinstance(c, acb) for c in f)
    if balls:
        from flint import ctx
        prec = prec or ctx.prec
        with working_precision(prec):
            coeffs = [[c.to_ball(prec) for c in p.coeffs] for p in dop.coeffs]
            f = [c if isinstance(c, acb) else acb(_to_q(c)) for c in f]
            zero = acb(0)
            return _apply(coeffs, f, t - r, zero)
    field = dop.field
    f = [c if isinstance(c, NFElem) else field(_to_q(c)) for c in f]
    if f:
        field = common_field(field, *(c.field for c in f))
    coeffs = [[field(c) for c in p.coeffs] for p in dop.coeffs]
    return _apply(coeffs, f, t - r, field.zero())


def _to_q(c):
    from fractions import Fraction
    if isinstance(c, Fraction):
        return fmpq(c.numerator, c.denominator)
    return c


def _apply(coeffs, f, count, zero):
    out = [zero for _ in range(max(count, 0))]
    for i, p in enumerate(coeffs):
        # coefficient m of f^(i) is f[m+i] (m+1)...(m+i)
        for j, pij in enumerate(p):
            for n in range(j, count):
                m = n - j
                fac = 1
                for l in range(1, i + 1):
                    fac *= m + l
                out[n] = out[n] + pij * (f[m + i] * fac)
    return out


def translate(dop, a):
    """The operator M such that g solves M iff x -> g(x - a) solves ``dop``;
    its coefficients are ``p_i(x + a)``."""
    a = as_point(a).value
    k = common_field(dop.field, a.field)
    return DiffOperator([c.change_field(k).taylor_shift(k(a)) for c in dop.coeffs], k)


def falling_factorial(field, i):
    """theta (theta - 1) ... (theta - i + 1) as a KPoly."""
    out = KPoly(field, [1])
    for l in range(i):
        out = out * KPoly(field, [-l, 1])
    return out


@dataclass(frozen=True)
class ThetaFormRecurrence:
    """``sum_k x^k q_k(theta) = scale * x^w * L`` with ``q_0 != 0``.

    The q_k are normalized so that q_0 has integer (or, over an extension,
    integral) coefficients with positive leading coefficient, and the other
    q_k have integral coefficients in the power basis of the field.
    """

    w: int
    qpolys: tuple
    scale: NFElem

    @property
    def span(self):
        return len(self.qpolys) - 1

    @property
    def field(self):
        return self.qpolys[0].field

    def to_operator(self):
        """Expand ``sum_k x^k q_k(theta)`` back into ``sum_i P_i(x) Dx^i``."""
        k = self.field
        out = {}
        for kk, q in enumerate(self.qpolys):
            # theta^m = sum_i S(m, i) x^i Dx^i
            for m, c in enumerate(q.coeffs):
                if c.is_zero():
                    continue
                for i, s in enumerate(_stirling2_row(m)):
                    if s == 0:
                        continue
                    cur = out.get(i, KPoly(k))
                    out[i] = cur + KPoly.monomial(k, i + kk, c * s)
        order = max(out) if out else -1
        return DiffOperator([out.get(i, KPoly(k)) for i in range(order + 1)], k)


def _stirling2_row(m):
    row = [1]
    for n in range(1, m + 1):
        new = [0] * (n + 1)
        for i in range(1, n + 1):
            new[i] = (row[i] if i < len(row) else 0) * i + row[i - 1]
        row = new
    return row


def theta_form(dop):
    """Rewrite ``dop`` (expanded at the origin) as ``x^w L = sum x^k q_k(theta)``
    with ``w`` minimal."""
    if dop.is_zero():
        raise ValueError("zero operator")
    k = dop.field
    # w may be negative, e.g. for x^2*Dx
    w = max(i - j for i, p in enumerate(dop.coeffs)
            for j, c in enumerate(p.coeffs) if not c.is_zero())
    qs = {}
    for i, p in enumerate(dop.coeffs):
        if p.is_zero():
            continue
        ff = falling_factorial(k, i)
        for j, c in enumerate(p.coeffs):
            if c.is_zero():
                continue
            idx = w + j - i
            qs[idx] = qs.get(idx, KPoly(k)) + ff * c
    span = max(qs)
    q = [qs.get(i, KPoly(k)) for i in range(span + 1)]
    # normalize: q_0 monic, then clear denominators of every coefficient
    lc = q[0].leading()
    q = [p * lc.inverse() for p in q]
    den = fmpz(1)
    for p in q:
        for c in p.coeffs:
            den = _lcm(den, fmpz(c.poly.denom()))
    if k.is_rational:
        g = fmpz(0)
        for p in q:
            for c in p.coeffs:
                g = g.gcd(fmpz((c * den).rational().p))
        mult = fmpq(den, g)
    else:
        mult = fmpq(den)
    q = [p * mult for p in q]
    while len(q) > 1 and q[-1].is_zero():
        q.pop()
    return ThetaFormRecurrence(w, tuple(q), lc.inverse() * mult)


def _lcm(a, b):
    return a * b // a.gcd(b)


def indicial_polynomial(dop, x0=0):
    """The indicial polynomial of ``dop`` at ``x0`` (a KPoly in theta)."""
    x0 = as_point(x0)
    op = dop if (x0.value.is_zero()) else translate(dop, x0)
    return theta_form(op).qpolys[0]


def rational_roots(q0):
    """Roots of the KPoly ``q0`` with multiplicities, as ``{fmpq: mult}``.

    Raises :class:`UnsupportedExponentError` if some root is irrational.
    Over an extension field the rational part is the gcd of the rational
    components of ``q0`` in the power basis, which is exact.
    """
    comps = [c for c in q0.components() if not c.is_zero()]
    g = comps[0]
    for c in comps[1:]:
        g = g.gcd(c)
    if g.degree() < q0.degree():
        raise UnsupportedExponentError("indicial polynomial has irrational roots")
    roots = {}
    if g.degree() <= 0:
        return roots
    _, factors = g.factor()
    for f, mult in factors:
        if f.degree() != 1:
            raise UnsupportedExponentError(
                f"indicial polynomial has irrational roots (factor {f})")
        roots[-f[0] / f[1]] = roots.get(-f[0] / f[1], 0) + mult
    return roots


def classify_point(dop, x0):
    return is_regular_singular(dop, x0)


def is_regular_singular(dop, x0):
    """Classify ``x0`` as ordinary, regular singular or irregular singular
    (Fuchs criterion on the theta form)."""
    x0 = as_point(x0)
    if not dop.leading_coefficient()(x0.value).is_zero():
        return PointKind.ORDINARY
    q0 = indicial_polynomial(dop, x0)
    if q0.degree() == dop.order:
        return PointKind.REGULAR_SINGULAR
    return PointKind.IRREGULAR


def singular_points(dop):
    """The roots of the leading coefficient as exact points, each isolated
    from the others."""
    lc = dop.leading_coefficient()
    if not lc.is_rational():
        raise ValueError("singular points are only computed for rational operators")
    p = lc.to_fmpq_poly()
    if p.degree() <= 0:
        return []
    _, factors = p.factor()
    out = []
    for f, _ in factors:
        f = f / f.leading_coefficient()
        if f.degree() == 1:
            out.append(ExactPoint.rational(-f[0]))
            continue
        roots = [z for z, _ in f.numer().complex_roots()]
        sep = min((abs(a - b).lower() for a in roots for b in roots if a is not b),
                  default=arb(1))
        pad = dyadic((sep / 8).lower())
        for z in roots:
            out.append(ExactPoint.algebraic(f, *_rect_of(z, pad)))
    return _separate(out)


def _rect_of(z, pad):
    from .numberfield import arb_bounds
    if z.imag.is_exact() and z.imag.is_zero():
        rlo, rhi = arb_bounds(z.real)
        return rlo, rhi, 0, 0
    # a box much wider than the root enclosure gives Krawczyk room to contract
    re, im = dyadic(z.real.mid()), dyadic(z.imag.mid())
    return re - pad, re + pad, im - pad, im + pad


def _separate(points):
    prec = 64
    while True:
        balls = [p.eval_ball(prec) for p in points]
        ok = all(not balls[i].overlaps(balls[j])
                 for i in range(len(balls)) for j in range(i))
        if ok:
            return points
        prec *= 2
        if prec > 1 << 14:
            raise ArithmeticError("could not separate singular points")


def singularities(dop, prec=53):
    """Pairwise disjoint ball enclosures of the singular points."""
    if prec < 2:
        raise ValueError("precision must be at least 2 bits")
    pts = singular_points(dop)
    while True:
        balls = [p.eval_ball(prec) for p in pts]
        if all(not balls[i].overlaps(balls[j])
               for i in range(len(balls)) for j in range(i)):
            return balls
        prec *= 2


def parse_operator(text):
    """Read an operator such as ``"x*Dx^2 + Dx - x"``.

    Products are taken in the Ore algebra, so ``Dx*x`` is ``x*Dx + 1``.
    Decimals are exact rationals.  The zero operator is rejected.
    """
    from .syntax import ParseError, parse
    dop = _op_from_tree(parse(text))
    if dop.is_zero():
        raise ParseError("the operator is zero")
    return dop


def _op_from_tree(node):
    from .syntax import ParseError
    tag = node[0]
    if tag == "num":
        q = node[1]
        return DiffOperator([[fmpq(q.numerator, q.denominator)]])
    if tag == "name":
        if node[1] == "x":
            return DiffOperator.x()
        if node[1] == "Dx":
            return DiffOperator.Dx()
        raise ParseError(f"unknown name {node[1]!r} in an operator")
    if tag == "neg":
        return -_op_from_tree(node[1])
    if tag == "pow":
        if node[2] < 0:
            raise ParseError("negative power in an operator")
        return _op_from_tree(node[1]) ** node[2]
    if tag == "call":
        raise ParseError(f"function {node[1]!r} not allowed in an operator")
    a, b = _op_from_tree(node[1]), _op_from_tree(node[2])
    if tag == "add":
        return a + b
    if tag == "sub":
        return a - b
    if tag == "mul":
        return a * b
    if b.order == 0 and b.coeffs[0].degree() == 0:
        return a * DiffOperator([[b.coeffs[0][0].inverse()]], b.field)
    raise ParseError("division is only allowed by nonzero constants")
