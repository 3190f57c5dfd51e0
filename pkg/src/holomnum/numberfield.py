"""Exact arithmetic in Q, Q(i) and simple algebraic extensions Q(xi).

A field is Q[t]/(m) for a monic irreducible m, together with a certified
enclosure of the complex root t = xi it stands for.  Q itself is Q[t]/(t)
with xi = 0, which keeps every code path uniform.

Polynomials over such a field (:class:`KPoly`) are dense tuples of
elements, lowest degree first.
"""

from __future__ import annotations

from flint import acb, arb, fmpq, fmpq_poly, fmpz, fmpz_poly

from .balls import working_precision

__all__ = ["NumberField", "NFElem", "KPoly", "AlgebraicRoot", "QQ", "QQI",
           "IsolationError", "common_field", "dyadic", "arb_bounds",
           "integer_poly"]


class IsolationError(ValueError):
    """An isolating region could not be certified."""


def _q(x):
    if isinstance(x, fmpq):
        return x
    if isinstance(x, (int, fmpz)):
        return fmpq(x)
    from fractions import Fraction
    if isinstance(x, Fraction):
        return fmpq(x.numerator, x.denominator)
    raise TypeError(f"not a rational: {x!r}")


class AlgebraicRoot:
    """A root of a square-free rational polynomial, isolated in a rectangle
    with rational corners.

    Real roots carry a degenerate rectangle (``im_lo == im_hi == 0``); their
    enclosures then have an exactly zero imaginary part.  Construction
    certifies existence and uniqueness with a Krawczyk test, bisecting the
    rectangle if necessary.
    """

    def __init__(self, poly, re_lo, re_hi, im_lo=0, im_hi=0, _certified=False):
        poly = fmpq_poly(poly)
        if poly.degree() < 1:
            raise IsolationError("polynomial must be nonconstant")
        if poly.gcd(poly.derivative()).degree() > 0:
            raise IsolationError("polynomial must be square-free")
        self.poly = poly / poly.leading_coefficient()
        self.rect = tuple(_q(c) for c in (re_lo, re_hi, im_lo, im_hi))
        if self.rect[0] > self.rect[1] or self.rect[2] > self.rect[3]:
            raise IsolationError("empty rectangle")
        self.is_real = self.rect[2] == 0 and self.rect[3] == 0
        if not _certified:
            self.rect = self._certify(self.rect)

    # -- geometry helpers

    def width(self):
        lo_r, hi_r, lo_i, hi_i = self.rect
        return max(hi_r - lo_r, hi_i - lo_i)

    def _ball(self, rect):
        lo_r, hi_r, lo_i, hi_i = rect
        re = arb((lo_r + hi_r) / 2) + arb(0, arb((hi_r - lo_r) / 2).abs_upper())
        if self.is_real:
            return acb(re)
        im = arb((lo_i + hi_i) / 2) + arb(0, arb((hi_i - lo_i) / 2).abs_upper())
        return acb(re, im)

    def _eval(self, poly, z):
        acc = acb(0)
        for c in reversed(poly.coeffs()):
            acc = acc * z + arb(c)
        return acc

    # -- interval Newton / Krawczyk

    def _krawczyk(self, rect, prec):
        """Return (image rectangle ball, inside) where ``inside`` says the
        Krawczyk image lies strictly inside ``rect``."""
        with working_precision(prec):
            box = self._ball(rect)
            lo_r, hi_r, lo_i, hi_i = rect
            mid = acb(arb((lo_r + hi_r) / 2), arb((lo_i + hi_i) / 2))
            if self.is_real:
                mid = acb(arb((lo_r + hi_r) / 2))
            d = self.poly.derivative()
            dm = self._eval(d, mid)
            if dm.contains(0):
                return None, False
            dbox = self._eval(d, box)
            if dbox.contains(0):
                return None, False
            c = acb(dm.mid()) if not self.is_real else acb(dm.real.mid())
            k = mid - self._eval(self.poly, mid) / c + (1 - dbox / c) * (box - mid)
            if self.is_real:
                k = acb(k.real)
            inside = (k.real.lower() > arb(lo_r) and k.real.upper() < arb(hi_r))
            if not self.is_real:
                inside = inside and (k.imag.lower() > arb(lo_i)
                                     and k.imag.upper() < arb(hi_i))
            return k, bool(inside)

    def _certify(self, rect):
        """Return a sub-rectangle of ``rect`` certified to hold the unique root
        of the polynomial in ``rect``."""
        if self.is_real and self._real_certified(rect):
            return rect
        work, found = [rect], []
        for _ in range(4000):
            if not work:
                break
            box = work.pop()
            with working_precision(128):
                if not self._eval(self.poly, self._ball(box)).contains(0):
                    continue
            if self.is_real and self._real_certified(box):
                found.append(box)
                continue
            _, inside = self._krawczyk(box, 128)
            if inside:
                found.append(box)
            else:
                work.extend(self._split(box))
        if work or len(found) != 1:
            raise IsolationError("region does not isolate exactly one root")
        return found[0]

    def _real_certified(self, rect):
        # a sign change plus a derivative free of zeros pins one real root
        lo, hi = rect[0], rect[1]
        flo, fhi = self.poly(lo), self.poly(hi)
        if flo == 0 or fhi == 0 or (flo > 0) == (fhi > 0):
            return False
        with working_precision(128):
            dbox = self._eval(self.poly.derivative(), self._ball(rect))
        return not dbox.contains(0)

    def _split(self, rect):
        # off-centre cuts keep "nice" roots away from box boundaries
        lo_r, hi_r, lo_i, hi_i = rect
        mr = lo_r + (hi_r - lo_r) * fmpq(31, 64)
        if self.is_real:
            return [(lo_r, mr, lo_i, hi_i), (mr, hi_r, lo_i, hi_i)]
        mi = lo_i + (hi_i - lo_i) * fmpq(33, 64)
        return [(lo_r, mr, lo_i, mi), (mr, hi_r, lo_i, mi),
                (lo_r, mr, mi, hi_i), (mr, hi_r, mi, hi_i)]

    def refine(self, bits):
        """Shrink the rectangle until its width is at most 2^-bits."""
        target = fmpq(1, 2 ** bits) if bits >= 0 else fmpq(2 ** (-bits))
        rect = self.rect
        prec = 64
        while max(rect[1] - rect[0], rect[3] - rect[2]) > target:
            prec = max(prec, bits + 32)
            k, _ = self._krawczyk(rect, prec)
            if k is None:
                rect = self._bisect_real(rect) if self.is_real else rect
                prec *= 2
                continue
            new = self._intersect(rect, k)
            if new == rect:
                prec *= 2
                if prec > 64 * (bits + 64):
                    raise IsolationError("refinement stalled")
            rect = new
        out = AlgebraicRoot(self.poly, *rect, _certified=True)
        return out

    def _bisect_real(self, rect):
        lo, hi = rect[0], rect[1]
        mid = (lo + hi) / 2
        fm = self.poly(mid)
        if fm == 0:
            return (mid, mid, 0, 0)
        if (self.poly(lo) > 0) != (fm > 0):
            return (lo, mid, 0, 0)
        return (mid, hi, 0, 0)

    @staticmethod
    def _intersect(rect, k):
        rlo, rhi = arb_bounds(k.real)
        out_r = (max(rect[0], rlo), min(rect[1], rhi))
        if rect[2] == rect[3]:
            out_i = (rect[2], rect[3])
        else:
            ilo, ihi = arb_bounds(k.imag)
            out_i = (max(rect[2], ilo), min(rect[3], ihi))
        return (out_r[0], out_r[1], out_i[0], out_i[1])

    def ball(self, prec):
        """Enclosure of the root with radius about 2^-prec."""
        root = self
        if self.width() > fmpq(1, 2 ** (prec + 2)):
            root = self.refine(prec + 2)
            self.rect = root.rect
        with working_precision(prec + 16):
            b = self._ball(self.rect)
        with working_precision(prec):
            return +b

    def __repr__(self):
        return f"AlgebraicRoot({self.poly}, {[str(c) for c in self.rect]})"


class NumberField:
    """Q[t]/(minpoly) embedded in C by sending t to ``root``."""

    def __init__(self, minpoly, root=None, name="xi"):
        minpoly = fmpq_poly(minpoly)
        self.minpoly = minpoly / minpoly.leading_coefficient()
        self.degree = self.minpoly.degree()
        self.root = root
        self.name = name

    @property
    def is_rational(self):
        return self.degree == 1

    def __call__(self, x):
        if isinstance(x, NFElem):
            if x.field is self:
                return x
            if x.field.is_rational:
                return NFElem(self, x.poly)
            if x.field == self:
                return NFElem(self, x.poly)
            raise TypeError("incompatible number fields")
        return NFElem(self, fmpq_poly([_q(x)]))

    def gen(self):
        return NFElem(self, fmpq_poly([0, 1]))

    def zero(self):
        return NFElem(self, fmpq_poly([]))

    def one(self):
        return NFElem(self, fmpq_poly([1]))

    def generator_ball(self, prec):
        if self.is_rational:
            return acb(0)
        if self is QQI:
            return acb(0, 1)
        return self.root.ball(prec)

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, NumberField):
            return NotImplemented
        if self.minpoly != other.minpoly:
            return False
        if self.degree == 1:
            return True
        if self.root is None or other.root is None:
            return self.root is other.root
        a, b = self.root.rect, other.root.rect
        return not (a[1] < b[0] or b[1] < a[0] or a[3] < b[2] or b[3] < a[2])

    def __hash__(self):
        return hash(str(self.minpoly))

    def __repr__(self):
        if self.is_rational:
            return "QQ"
        if self is QQI:
            return "QQ(i)"
        return f"QQ[{self.name}]/({self.minpoly})"


QQ = NumberField(fmpq_poly([0, 1]), name="0")
QQI = NumberField(fmpq_poly([1, 0, 1]), name="i")


def common_field(*fields):
    """The single non-rational field among ``fields`` (or QQ)."""
    out = QQ
    for f in fields:
        if f.is_rational:
            continue
        if out.is_rational:
            out = f
        elif not out == f:
            raise TypeError("elements live in different number fields")
    return out


class NFElem:
    """An element of a :class:`NumberField`, stored as a reduced polynomial."""

    __slots__ = ("field", "poly")

    def __init__(self, field, poly):
        self.field = field
        if poly.degree() >= field.degree:
            poly = poly % field.minpoly
        self.poly = poly

    def _coerce(self, other):
        if isinstance(other, NFElem):
            if other.field is self.field:
                return self, other
            k = common_field(self.field, other.field)
            return k(self), k(other)
        return self, self.field(other)

    def __add__(self, other):
        a, b = self._coerce(other)
        return NFElem(a.field, a.poly + b.poly)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._coerce(other)
        return NFElem(a.field, a.poly - b.poly)

    def __rsub__(self, other):
        a, b = self._coerce(other)
        return NFElem(a.field, b.poly - a.poly)

    def __mul__(self, other):
        a, b = self._coerce(other)
        return NFElem(a.field, a.poly * b.poly)

    __rmul__ = __mul__

    def __neg__(self):
        return NFElem(self.field, -self.poly)

    def inverse(self):
        if self.poly.is_zero():
            raise ZeroDivisionError("division by zero in a number field")
        if self.poly.degree() == 0:
            return NFElem(self.field, fmpq_poly([1 / self.poly[0]]))
        g, s, _ = self.poly.xgcd(self.field.minpoly)
        return NFElem(self.field, s / g[0])

    def __truediv__(self, other):
        a, b = self._coerce(other)
        return a * b.inverse()

    def __rtruediv__(self, other):
        a, b = self._coerce(other)
        return b * a.inverse()

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        out = self.field.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        try:
            a, b = self._coerce(other)
        except TypeError:
            return False
        return a.poly == b.poly

    def __hash__(self):
        if self.poly.degree() <= 0:
            return hash(str(self.poly))
        return hash((str(self.poly), repr(self.field)))

    def is_zero(self):
        return self.poly.is_zero()

    def is_rational(self):
        return self.poly.degree() <= 0

    def rational(self):
        if not self.is_rational():
            raise ValueError("element is not rational")
        return self.poly[0] if self.poly.degree() == 0 else fmpq(0)

    def gaussian_parts(self):
        """(re, im) when the element lies in Q or Q(i)."""
        if self.field.is_rational or self.is_rational():
            return self.rational(), fmpq(0)
        if self.field is QQI or self.field.minpoly == QQI.minpoly:
            return self.poly[0], self.poly[1]
        raise ValueError("element is not a Gaussian rational")

    def integral(self):
        """Return ``(numerators, den)`` with integer power-basis numerators."""
        num = self.poly.numer()
        den = self.poly.denom()
        coeffs = [fmpz(c) for c in num.coeffs()]
        coeffs += [fmpz(0)] * (self.field.degree - len(coeffs))
        return coeffs, fmpz(den)

    def to_ball(self, prec=None):
        from flint import ctx
        prec = prec or ctx.prec
        with working_precision(prec):
            if self.field.is_rational or self.poly.degree() <= 0:
                return acb(arb(self.rational()))
            if self.field is QQI or self.field.minpoly == QQI.minpoly:
                return acb(arb(self.poly[0]), arb(self.poly[1]))
        g = self.field.generator_ball(prec + 10)
        with working_precision(prec + 10):
            acc = acb(0)
            for c in reversed(self.poly.coeffs()):
                acc = acc * g + arb(c)
        with working_precision(prec):
            return +acc

    def __repr__(self):
        if self.is_rational():
            return str(self.rational())
        if self.field is QQI:
            return f"({self.poly[0]}) + ({self.poly[1]})*i"
        return f"{self.poly}".replace("x", self.field.name)


class KPoly:
    """Dense univariate polynomial over a :class:`NumberField`."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field, coeffs=()):
        cs = [c if isinstance(c, NFElem) and c.field is field else field(c)
              for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        self.field = field
        self.coeffs = tuple(cs)

    @classmethod
    def from_fmpq_poly(cls, field, p):
        return cls(field, [field(c) for c in fmpq_poly(p).coeffs()])

    @classmethod
    def monomial(cls, field, n, c=1):
        return cls(field, [field(0)] * n + [field(c)])

    def degree(self):
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    def __getitem__(self, i):
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return self.field.zero()

    def leading(self):
        return self.coeffs[-1] if self.coeffs else self.field.zero()

    def _lift(self, other):
        if isinstance(other, KPoly):
            if other.field is self.field:
                return self, other
            k = common_field(self.field, other.field)
            return self.change_field(k), other.change_field(k)
        return self, KPoly(self.field, [other])

    def change_field(self, k):
        if k is self.field:
            return self
        return KPoly(k, [k(c) for c in self.coeffs])

    def __add__(self, other):
        a, b = self._lift(other)
        n = max(len(a.coeffs), len(b.coeffs))
        return KPoly(a.field, [a[i] + b[i] for i in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return KPoly(self.field, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other if isinstance(other, KPoly) else -self.field(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, KPoly):
            c = self.field(other) if not isinstance(other, NFElem) else other
            return KPoly(common_field(self.field, c.field),
                         [x * c for x in self.coeffs])
        a, b = self._lift(other)
        if a.is_zero() or b.is_zero():
            return KPoly(a.field)
        if a.field.is_rational:
            pa = fmpq_poly([c.rational() for c in a.coeffs])
            pb = fmpq_poly([c.rational() for c in b.coeffs])
            return KPoly.from_fmpq_poly(a.field, pa * pb)
        out = [a.field.zero()] * (len(a.coeffs) + len(b.coeffs) - 1)
        for i, x in enumerate(a.coeffs):
            if x.is_zero():
                continue
            for j, y in enumerate(b.coeffs):
                out[i + j] = out[i + j] + x * y
        return KPoly(a.field, out)

    __rmul__ = __mul__

    def __pow__(self, n):
        out = KPoly(self.field, [1])
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, KPoly):
            other = KPoly(self.field, [other])
        a, b = self._lift(other)
        return a.coeffs == b.coeffs

    def __hash__(self):
        return hash(tuple(hash(c) for c in self.coeffs))

    def derivative(self):
        return KPoly(self.field, [c * i for i, c in enumerate(self.coeffs)][1:])

    def __call__(self, x):
        acc = self.field.zero() if not isinstance(x, NFElem) else x.field.zero()
        if not isinstance(x, NFElem):
            x = self.field(x)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def taylor_shift(self, a):
        """The polynomial ``p(x + a)``."""
        a = a if isinstance(a, NFElem) else self.field(a)
        k = common_field(self.field, a.field)
        cs = [k(c) for c in self.coeffs]
        a = k(a)
        n = len(cs)
        for i in range(n):
            for j in range(n - 2, i - 1, -1):
                cs[j] = cs[j] + a * cs[j + 1]
        return KPoly(k, cs)

    def taylor_coeffs(self, a, count):
        """``[p(a), p'(a), p''(a)/2, ...]`` (``count`` entries)."""
        shifted = self.taylor_shift(a)
        return [shifted[j] for j in range(count)]

    def is_rational(self):
        return all(c.is_rational() for c in self.coeffs)

    def to_fmpq_poly(self):
        return fmpq_poly([c.rational() for c in self.coeffs])

    def components(self):
        """Write the polynomial as sum_j xi^j c_j(x) with rational c_j."""
        d = self.field.degree
        rows = [[fmpq(0)] * len(self.coeffs) for _ in range(d)]
        for i, c in enumerate(self.coeffs):
            for j in range(d):
                rows[j][i] = c.poly[j] if j <= c.poly.degree() else fmpq(0)
        return [fmpq_poly(r) for r in rows]

    def to_balls(self, prec):
        return [c.to_ball(prec) for c in self.coeffs]

    def __repr__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            terms.append(f"({c})*{mono}" if mono else f"({c})")
        return " + ".join(reversed(terms))


def dyadic(x):
    """Exact rational value of an exact ``arb`` (a dyadic number)."""
    man, exp = x.mid().man_exp()
    if exp >= 0:
        return fmpq(man * 2 ** int(exp))
    return fmpq(man, 2 ** int(-exp))


def arb_bounds(x):
    """Rational lower and upper bounds of a real ball."""
    m, r = dyadic(x.mid()), dyadic(x.rad())
    return m - r, m + r


def integer_poly(p):
    """Primitive integer polynomial proportional to the rational polynomial p."""
    coeffs = [fmpz(c) for c in fmpq_poly(p).numer().coeffs()]
    g = fmpz(0)
    for c in coeffs:
        g = g.gcd(c)
    if g == 0:
        return fmpz_poly([])
    if coeffs[-1] < 0:
        g = -g
    return fmpz_poly([c // g for c in coeffs])
