"""Comparison helpers for decimal reference values."""

from fractions import Fraction

from flint import acb, arb, fmpq

from holomnum.balls import working_precision


def _interval(decimal, tol=None):
    """A rounded decimal ``d`` stands for ``[d - ulp/2, d + ulp/2]``; an
    explicit tolerance replaces the half ulp."""
    d = Fraction(decimal)
    if tol is None:
        digits = decimal.strip().lstrip("+-").split("e")[0]
        frac = digits.split(".")[1] if "." in digits else ""
        exp = int(decimal.lower().split("e")[1]) if "e" in decimal.lower() else 0
        tol = Fraction(1, 2) * Fraction(10) ** (exp - len(frac))
    tol = Fraction(tol)
    return fmpq(d.numerator, d.denominator), fmpq(tol.numerator, tol.denominator)


def agrees(ball, decimal, tol=None, part="real"):
    """The ball meets the interval denoted by ``decimal`` (see above)."""
    z = ball if isinstance(ball, acb) else acb(ball)
    x = z.real if part == "real" else z.imag
    mid, rad = _interval(decimal, tol)
    with working_precision(max(256, 8 * len(decimal))):
        return bool(x.overlaps(arb(mid, rad)))


def abs_agrees(ball, decimal, tol=None, part="imag"):
    z = ball if isinstance(ball, acb) else acb(ball)
    x = z.real if part == "real" else z.imag
    return agrees(acb(abs(x)), decimal, tol)
