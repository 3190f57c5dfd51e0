"""Mid-rad ball arithmetic.

Real and complex balls are the ``arb`` and ``acb`` types of python-flint
(Arb).  Complex balls are rectangular: a pair of real balls.  This module
adds the small amount of glue the engine needs on top of them: explicit
precision handling, branch-checked elementary functions, certified
linear solves and a few helpers for tests.

Arb keeps its working precision in a global context.  Every function here
takes ``prec`` explicitly and restores the previous setting on return.
"""

from __future__ import annotations

import contextlib
from fractions import Fraction

from flint import acb, acb_mat, arb, ctx, fmpq, fmpz

RealBall = arb
ComplexBall = acb
BallMatrix = acb_mat

__all__ = [
    "RealBall", "ComplexBall", "BallMatrix", "PrecisionError", "BranchCutError",
    "working_precision", "to_ball", "add", "sub", "mul", "div", "exp", "log",
    "sqrt", "pow_rational", "atan2", "const_pi", "const_euler", "mat_mul",
    "mat_solve", "identity", "contains", "radius", "max_radius", "add_error",
    "is_exact_real",
]


class PrecisionError(ArithmeticError):
    """A certified operation could not succeed at the current precision."""


class BranchCutError(ValueError):
    """The argument ball meets the branch cut of a multivalued function."""


@contextlib.contextmanager
def working_precision(prec):
    if prec < 2:
        raise ValueError("precision must be at least 2 bits")
    saved = ctx.prec
    ctx.prec = int(prec)
    try:
        yield
    finally:
        ctx.prec = saved


def to_ball(value, prec=None):
    """Convert an int, Fraction, fmpq, arb, acb or complex to an ``acb``."""
    if prec is not None:
        with working_precision(prec):
            return to_ball(value)
    if isinstance(value, acb):
        return +value
    if isinstance(value, arb):
        return acb(+value)
    if isinstance(value, Fraction):
        value = fmpq(value.numerator, value.denominator)
    if isinstance(value, (int, fmpz)):
        return acb(value)
    if isinstance(value, fmpq):
        return acb(arb(value))
    if isinstance(value, complex):
        return acb(value.real, value.imag)
    if isinstance(value, float):
        return acb(value)
    if isinstance(value, str):
        return acb(arb(value))
    raise TypeError(f"cannot convert {type(value).__name__} to a ball")


def _binary(op, a, b, prec):
    with working_precision(prec):
        return op(to_ball(a), to_ball(b))


def add(a, b, prec):
    return _binary(lambda u, v: u + v, a, b, prec)


def sub(a, b, prec):
    return _binary(lambda u, v: u - v, a, b, prec)


def mul(a, b, prec):
    return _binary(lambda u, v: u * v, a, b, prec)


def div(a, b, prec, strict=False):
    """Quotient of two balls.

    When ``b`` contains zero the result is the whole complex plane, unless
    ``strict`` is set, in which case :class:`PrecisionError` is raised.
    """
    with working_precision(prec):
        a, b = to_ball(a), to_ball(b)
        if b.contains(0):
            if strict:
                raise PrecisionError("division by a ball containing zero")
            return acb(arb("nan"), arb("nan"))
        return a / b


def is_exact_real(z):
    return z.imag.is_exact() and z.imag.is_zero()


def _check_cut(z, allow_zero=False):
    # The principal cut is the closed negative real axis.  A ball lying
    # exactly on it (exact zero imaginary part) gets the value from above.
    if not allow_zero and z.contains(0):
        raise BranchCutError("argument ball contains zero")
    if is_exact_real(z):
        return
    if z.imag.contains(0) and not (z.real > 0):
        raise BranchCutError("argument ball straddles the negative real axis")


def exp(z, prec):
    with working_precision(prec):
        return to_ball(z).exp()


def log(z, prec):
    """Principal logarithm; ``arg`` in (-pi, pi]."""
    with working_precision(prec):
        z = to_ball(z)
        _check_cut(z)
        return z.log()


def sqrt(z, prec):
    with working_precision(prec):
        z = to_ball(z)
        if z.is_exact() and z.is_zero():
            return acb(0)
        _check_cut(z)
        return z.sqrt()


def pow_rational(z, q, prec):
    """Principal branch of ``z**q`` for an exact rational exponent ``q``."""
    q = fmpq(q) if not isinstance(q, fmpq) else q
    with working_precision(prec):
        z = to_ball(z)
        if q.q == 1:
            return z ** int(q.p)
        _check_cut(z)
        return (z.log() * arb(q)).exp()


def atan2(y, x, prec):
    with working_precision(prec):
        return arb.atan2(arb(y), arb(x))


def const_pi(prec):
    with working_precision(prec):
        return arb.pi()


def const_euler(prec):
    with working_precision(prec):
        return arb.const_euler()


def identity(n):
    return acb_mat([[acb(1) if i == j else acb(0) for j in range(n)] for i in range(n)])


def mat_mul(a, b, prec):
    if a.ncols() != b.nrows():
        raise ValueError(f"dimension mismatch: {a.nrows()}x{a.ncols()} times "
                         f"{b.nrows()}x{b.ncols()}")
    with working_precision(prec):
        return a * b


def mat_solve(a, b, prec):
    """Solve ``a x = b`` with certified pivots.

    Raises :class:`PrecisionError` when no pivot can be certified nonzero,
    which means the caller has to retry at a higher precision (or that the
    matrix is genuinely singular).
    """
    if a.nrows() != a.ncols():
        raise ValueError("matrix must be square")
    if a.nrows() != b.nrows():
        raise ValueError("dimension mismatch")
    with working_precision(prec):
        try:
            x = a.solve(b)
        except ZeroDivisionError as exc:
            raise PrecisionError("pivot contains zero") from exc
    for i in range(x.nrows()):
        for j in range(x.ncols()):
            if not x[i, j].is_finite():
                raise PrecisionError("pivot contains zero")
    return x


def add_error(z, err, real=False):
    """Inflate both parts of the complex ball ``z`` by the real bound ``err``
    (only the real part when the error is known to be real)."""
    e = arb(0, err) if not isinstance(err, arb) else arb(0, err.abs_upper())
    if real:
        return acb(z.real + e, z.imag)
    return acb(z.real + e, z.imag + e)


def radius(z):
    """Upper bound for the larger of the real and imaginary radii."""
    return z.real.rad().max(z.imag.rad())


def max_radius(m):
    r = arb(0)
    for i in range(m.nrows()):
        for j in range(m.ncols()):
            r = r.max(radius(m[i, j]))
    return r


def contains(ball, interval):
    """Test helper: does ``ball`` contain the decimal number or interval given
    as a string?

    ``interval`` is either a decimal ("2.718"), an Arb-style "[m +/- r]"
    string, or a pair of such strings for the real and imaginary parts.
    The string is read at a precision high enough to be exact for the
    digits it carries.
    """
    if isinstance(interval, tuple):
        re_s, im_s = interval
    else:
        re_s, im_s = interval, None
    z = ball if isinstance(ball, acb) else acb(ball)
    with working_precision(max(64, 4 * len(str(interval)) + 64)):
        ok = z.real.contains(_read(re_s))
        if im_s is not None:
            ok = ok and z.imag.contains(_read(im_s))
    return bool(ok)


def _read(s):
    s = s.strip()
    if s.startswith("["):
        return arb(s)
    q = Fraction(s)
    return arb(fmpq(q.numerator, q.denominator))
