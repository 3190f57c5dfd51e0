"""Exact path vertices and symbolic initial values.

:class:`ExactPoint` holds a rational, Gaussian rational or algebraic number
exactly; :class:`ConstantExpr` holds a closed-form constant such as
``log(2) - euler_gamma``.  Both convert to complex balls at any precision.
"""

from __future__ import annotations

import math
from fractions import Fraction

from flint import acb, arb, fmpq, fmpq_poly

from . import balls
from .balls import working_precision
from .numberfield import (QQ, QQI, AlgebraicRoot, IsolationError, NFElem,
                          NumberField)
from .syntax import ParseError, parse

__all__ = ["ExactPoint", "ConstantExpr", "DomainError", "eval_ball",
           "is_singular_point", "refine", "as_point", "parse_point"]


class DomainError(ValueError):
    """A constant lies outside the principal domain of a function."""


def _fmpq(x):
    if isinstance(x, fmpq):
        return x
    if isinstance(x, Fraction):
        return fmpq(x.numerator, x.denominator)
    if isinstance(x, str):
        return _fmpq(Fraction(x))
    return fmpq(x)


class ExactPoint:
    """An exact complex number: element ``value`` of the number field
    ``field`` (Q, Q(i) or Q(xi) for an isolated algebraic xi)."""

    __slots__ = ("value",)

    def __init__(self, value):
        if not isinstance(value, NFElem):
            value = QQ(_fmpq(value))
        if value.field is not QQ and value.is_rational():
            value = QQ(value.rational())
        self.value = value

    @property
    def field(self):
        return self.value.field

    @classmethod
    def rational(cls, q):
        return cls(QQ(_fmpq(q)))

    @classmethod
    def gaussian(cls, re, im=0):
        re, im = _fmpq(re), _fmpq(im)
        if im == 0:
            return cls.rational(re)
        return cls(NFElem(QQI, fmpq_poly([re, im])))

    @classmethod
    def algebraic(cls, poly, re_lo, re_hi, im_lo=0, im_hi=0):
        """The unique root of the square-free rational polynomial ``poly``
        inside the given rectangle (certified; raises
        :class:`IsolationError` otherwise).

        The root is re-expressed through its irreducible factor, so a
        rational or Gaussian rational root comes back in Q or Q(i).
        """
        poly = fmpq_poly(poly)
        root = AlgebraicRoot(poly, re_lo, re_hi, im_lo, im_hi)
        _, factors = poly.factor()
        candidates = [f for f, _ in factors]
        prec = 64
        while len(candidates) > 1:
            with working_precision(prec):
                z = root.ball(prec)
                candidates = [f for f in candidates if _eval_q(f, z).contains(0)]
            prec *= 2
            if prec > 1 << 16:
                raise IsolationError("cannot identify the irreducible factor")
        return cls._from_factor(candidates[0], root)

    @classmethod
    def _from_factor(cls, f, root):
        f = f / f.leading_coefficient()
        if f.degree() == 1:
            return cls.rational(-f[0])
        if f.degree() == 2:
            b, c = f[1], f[0]
            disc = b * b - 4 * c
            if disc < 0:
                s = _rational_sqrt(-disc)
                if s is not None:
                    with working_precision(64):
                        up = root.ball(64).imag > 0
                    return cls.gaussian(-b / 2, s / 2 if up else -s / 2)
        sub = AlgebraicRoot(f, *root.rect, _certified=True)
        field = NumberField(f, sub, name="xi")
        return cls(field.gen())

    # -- queries

    def is_rational(self):
        return self.field.is_rational

    def is_gaussian(self):
        return self.field.is_rational or self.field is QQI

    def is_real(self):
        if self.is_gaussian():
            return self.value.gaussian_parts()[1] == 0
        return self.field.root.is_real

    def parts(self):
        return self.value.gaussian_parts()

    def eval_ball(self, prec):
        return self.value.to_ball(prec)

    def refine(self, prec):
        if self.is_gaussian():
            return self
        root = self.field.root.refine(prec)
        self.field.root.rect = root.rect
        return self

    def __eq__(self, other):
        if not isinstance(other, ExactPoint):
            try:
                other = as_point(other)
            except (TypeError, ValueError):
                return False
        try:
            return self.value == other.value
        except TypeError:
            return False

    def __hash__(self):
        return hash(self.value)

    def __sub__(self, other):
        other = as_point(other)
        return ExactPoint(self.value - other.value)

    def __add__(self, other):
        other = as_point(other)
        return ExactPoint(self.value + other.value)

    def __neg__(self):
        return ExactPoint(-self.value)

    def __repr__(self):
        if self.is_gaussian():
            re, im = self.parts()
            if im == 0:
                return str(re)
            imag = "i" if im == 1 else "-i" if im == -1 else f"{im}*i"
            if re == 0:
                return imag
            return f"{re}{imag}" if imag.startswith("-") else f"{re}+{imag}"
        with working_precision(64):
            z = self.eval_ball(64)
            approx = z.real.str(16, radius=False)
            if not (z.imag.is_exact() and z.imag.is_zero()):
                im = z.imag.str(16, radius=False)
                approx += im if im.startswith("-") else "+" + im
                approx += "*i"
            return f"alg({self.field.minpoly}; ~{approx})"


def _rational_sqrt(q):
    ip, iq = int(fmpq(q).p), int(fmpq(q).q)
    rp, rq = math.isqrt(ip), math.isqrt(iq)
    if rp * rp == ip and rq * rq == iq:
        return fmpq(rp, rq)
    return None


def _eval_q(f, z):
    acc = acb(0)
    for c in reversed(f.coeffs()):
        acc = acc * z + arb(c)
    return acc


def as_point(x):
    """Coerce ints, Fractions, strings, complex-rational pairs to ExactPoint."""
    if isinstance(x, ExactPoint):
        return x
    if isinstance(x, NFElem):
        return ExactPoint(x)
    if isinstance(x, str):
        return parse_point(x)
    if isinstance(x, complex):
        return ExactPoint.gaussian(Fraction(x.real), Fraction(x.imag))
    if isinstance(x, float):
        return ExactPoint.rational(Fraction(x))
    return ExactPoint.rational(_fmpq(x))


def parse_point(text):
    """Read an exact point: a Gaussian-rational expression such as
    ``1-i/2`` or ``alg(x^2-34*x+1; 0.02, 0.04, 0, 0)``."""
    s = text.strip()
    if s.startswith("alg(") and s.endswith(")"):
        body = s[4:-1]
        if ";" not in body:
            raise ParseError("alg(...) needs 'poly; re_lo, re_hi, im_lo, im_hi'")
        poly_text, box_text = body.split(";", 1)
        poly = _poly_from_tree(parse(poly_text))
        bounds = [Fraction(b.strip()) for b in box_text.split(",")]
        if len(bounds) == 2:
            bounds += [Fraction(0), Fraction(0)]
        if len(bounds) != 4:
            raise ParseError("alg(...) needs four rectangle bounds")
        return ExactPoint.algebraic(poly, *bounds)
    return ExactPoint(_gaussian_from_tree(parse(s)))


def _gaussian_from_tree(node):
    tag = node[0]
    if tag == "num":
        return QQ(_fmpq(node[1]))
    if tag == "name":
        if node[1] in ("i", "I"):
            return QQI.gen()
        raise ParseError(f"unknown name {node[1]!r} in a point")
    if tag == "neg":
        return -_gaussian_from_tree(node[1])
    if tag == "pow":
        return _gaussian_from_tree(node[1]) ** node[2]
    if tag in ("add", "sub", "mul", "div"):
        a, b = _gaussian_from_tree(node[1]), _gaussian_from_tree(node[2])
        if tag == "add":
            return a + b
        if tag == "sub":
            return a - b
        if tag == "mul":
            return a * b
        return a / b
    raise ParseError(f"unsupported construct {tag!r} in a point")


def _poly_from_tree(node):
    tag = node[0]
    if tag == "num":
        return fmpq_poly([_fmpq(node[1])])
    if tag == "name":
        if node[1] == "x":
            return fmpq_poly([0, 1])
        raise ParseError(f"unknown name {node[1]!r} in a polynomial")
    if tag == "neg":
        return -_poly_from_tree(node[1])
    if tag == "pow":
        if node[2] < 0:
            raise ParseError("negative power in a polynomial")
        return _poly_from_tree(node[1]) ** node[2]
    a, b = _poly_from_tree(node[1]), _poly_from_tree(node[2])
    if tag == "add":
        return a + b
    if tag == "sub":
        return a - b
    if tag == "mul":
        return a * b
    if tag == "div" and b.degree() == 0:
        return a / b[0]
    raise ParseError("unsupported construct in a polynomial")


class ConstantExpr:
    """A closed-form constant over rationals, ``i``, ``pi``,
    ``euler_gamma``, ``sqrt``, ``log`` and the four operations.

    Functions use principal branches; ``log`` of a number on the closed
    negative real axis, or of zero, raises :class:`DomainError`.
    """

    _NAMES = {"i", "I", "pi", "euler_gamma"}
    _FUNCS = {"sqrt", "log"}

    def __init__(self, tree, text=None):
        self.tree = tree
        self.text = text
        self._check(tree)

    @classmethod
    def parse(cls, text):
        return cls(parse(text), text)

    @classmethod
    def coerce(cls, x):
        if isinstance(x, ConstantExpr):
            return x
        if isinstance(x, str):
            return cls.parse(x)
        if isinstance(x, (int, Fraction, fmpq)):
            return cls(("num", Fraction(int(x.p), int(x.q)) if isinstance(x, fmpq)
                        else Fraction(x)))
        raise TypeError(f"cannot read a constant from {type(x).__name__}")

    def _check(self, node):
        tag = node[0]
        if tag == "name" and node[1] not in self._NAMES:
            raise ParseError(f"unknown constant {node[1]!r}")
        if tag == "call":
            if node[1] not in self._FUNCS or len(node[2]) != 1:
                raise ParseError(f"unknown function {node[1]!r}")
            self._check(node[2][0])
        for child in node[1:]:
            if isinstance(child, tuple):
                self._check(child)

    def eval_ball(self, prec):
        """Ball with relative radius at most 2^(4 - prec) holding the value."""
        extra = 20
        while True:
            with working_precision(prec + extra):
                z = self._eval(self.tree, prec + extra)
            if _rel_ok(z, prec) or extra > 8 * prec + 200:
                return z
            extra *= 2

    def _eval(self, node, prec):
        tag = node[0]
        if tag == "num":
            q = node[1]
            return acb(arb(fmpq(q.numerator, q.denominator)))
        if tag == "name":
            name = node[1]
            if name in ("i", "I"):
                return acb(0, 1)
            if name == "pi":
                return acb(arb.pi())
            return acb(arb.const_euler())
        if tag == "neg":
            return -self._eval(node[1], prec)
        if tag == "pow":
            base = self._eval(node[1], prec)
            if node[2] < 0 and base.contains(0):
                raise DomainError("negative power of zero")
            return base ** node[2]
        if tag == "call":
            arg = self._eval(node[2][0], prec)
            if node[1] == "sqrt":
                try:
                    return balls.sqrt(arg, prec)
                except balls.BranchCutError as exc:
                    raise DomainError(str(exc)) from exc
            if arg.contains(0) or (arg.imag.contains(0) and not arg.real > 0):
                raise DomainError("log outside its principal domain")
            return arg.log()
        a, b = self._eval(node[1], prec), self._eval(node[2], prec)
        if tag == "add":
            return a + b
        if tag == "sub":
            return a - b
        if tag == "mul":
            return a * b
        if b.contains(0):
            raise DomainError("division by zero")
        return a / b

    def __repr__(self):
        return f"ConstantExpr({self.text!r})" if self.text else f"ConstantExpr({self.tree!r})"


def _rel_ok(z, prec):
    with working_precision(64):
        mag = z.abs_upper()
        if mag == 0:
            return True
        bound = mag * arb(2) ** (4 - prec)
        return bool(balls.radius(z) <= bound)


def eval_ball(v, prec):
    """Complex ball containing the exact point or constant ``v``."""
    if prec < 2:
        raise ValueError("precision must be at least 2 bits")
    if isinstance(v, ConstantExpr):
        return v.eval_ball(prec)
    return as_point(v).eval_ball(prec)


def refine(p, prec):
    """Shrink the isolating rectangle of an algebraic point below 2^-prec."""
    return p.refine(prec)


def is_singular_point(p, dop):
    """Exact test ``p_r(p) == 0`` for the leading coefficient of ``dop``."""
    p = as_point(p)
    lc = dop.coeffs[-1]
    return lc(p.value).is_zero()
