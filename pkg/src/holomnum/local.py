"""Local solutions at ordinary and regular singular points.

Near a regular singular point ``x0`` every solution is a finite sum of
log-series

    sum_n sum_k u[n][k] (x - x0)^(nu + n) log(x - x0)^k / k!

over exponents ``nu`` that are roots of the indicial polynomial.  Roots
differing by integers are grouped into a cluster sharing one recurrence
on vectors ``u[n] = (u[n][0], u[n][1], ...)`` of log coefficients.

The canonical local basis is indexed by distinguished monomials: the
pairs ``(nu + n, k)`` with ``k`` below the multiplicity of ``nu + n`` as a
root.  Basis element ``(mu, k)`` has coefficient 1 on its own monomial and
0 on every other distinguished one.  At an ordinary point this is the
basis of Taylor series with initial values ``f(x0), f'(x0), f''(x0)/2,
...``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from flint import acb, arb, fmpq, fmpq_poly

from . import balls
from .balls import BranchCutError, working_precision
from .exact import ExactPoint, as_point
from .operators import (PointKind, UnsupportedExponentError, is_regular_singular,
                        rational_roots, theta_form, translate)

__all__ = ["Cluster", "LocalBasisStructure", "LogSeries", "LocalRecurrence",
           "group_exponents", "local_basis_monomials", "expand_local_solution",
           "evaluate_log_series", "IrregularPointError", "jet_log", "jet_pow",
           "jet_mul", "local_recurrence"]


class IrregularPointError(ValueError):
    """The expansion point is an irregular singular point."""


@dataclass(frozen=True)
class Cluster:
    """Indicial roots ``nu + n`` for the offsets ``n`` in ``offsets``."""

    nu: fmpq
    offsets: tuple  # ((n, multiplicity), ...) sorted by n

    @property
    def size(self):
        return sum(m for _, m in self.offsets)

    @property
    def max_offset(self):
        return self.offsets[-1][0]

    def multiplicity(self, n):
        for off, m in self.offsets:
            if off == n:
                return m
        return 0


def group_exponents(roots):
    """Partition ``{root: multiplicity}`` into integer-spaced clusters.

    Clusters are sorted by their smallest root.
    """
    groups = {}
    for rho, mult in roots.items():
        rho = fmpq(rho)
        frac = rho - (rho.p // rho.q)
        groups.setdefault(frac, []).append((rho, mult))
    out = []
    for members in groups.values():
        members.sort(key=lambda t: t[0])
        nu = members[0][0]
        offsets = tuple((int(rho - nu), m) for rho, m in members)
        out.append(Cluster(nu, offsets))
    out.sort(key=lambda c: c.nu)
    return out


class LocalBasisStructure:
    """The ordered distinguished monomials ``(mu, k)`` at a point.

    Order: ascending exponent, then descending log power.
    """

    def __init__(self, point, clusters, ordinary=False):
        self.point = point
        self.clusters = tuple(clusters)
        self.ordinary = ordinary
        labels = []
        for ci, c in enumerate(self.clusters):
            for n, m in c.offsets:
                for k in range(m):
                    labels.append((c.nu + n, k, ci, n))
        labels.sort(key=lambda t: (t[0], -t[1]))
        self._full = labels
        self.labels = [(mu, k) for mu, k, _, _ in labels]

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __getitem__(self, i):
        return self.labels[i]

    def __eq__(self, other):
        return (isinstance(other, LocalBasisStructure)
                and self.point == other.point and self.labels == other.labels)

    def locate(self, i):
        """``(cluster index, offset n, log power k)`` of label ``i``."""
        mu, k, ci, n = self._full[i]
        return ci, n, k

    def monomials(self, var="x"):
        """Readable monomials such as ``1/2*log(x)^2`` or ``sqrt(x - 1)``."""
        return [_render_monomial(mu, k, self.point, var) for mu, k in self.labels]

    def __repr__(self):
        return "[" + ", ".join(self.monomials()) + "]"


def _render_monomial(mu, k, point, var):
    if point.value.is_zero():
        base = var
    elif point.is_gaussian() and point.is_real():
        c = point.parts()[0]
        base = f"{var} - {c}" if c > 0 else f"{var} + {-c}"
    else:
        with working_precision(64):
            approx = point.eval_ball(64)
            re = approx.real.mid().str(16, radius=False)
            im = approx.imag.mid().str(16, radius=False)
        base = f"{var} - {re}?" if point.is_real() else f"{var} - ({re}? + {im}?*I)"
    wrapped = base if base == var else f"({base})"
    parts = []
    if mu == 1:
        parts.append(base if k == 0 else wrapped)
    elif mu == fmpq(1, 2):
        parts.append(f"sqrt({base})")
    elif mu != 0:
        parts.append(f"{wrapped}^{mu}" if mu.q == 1 else f"{wrapped}^({mu})")
    if k >= 1:
        logpart = f"log({base})" + (f"^{k}" if k > 1 else "")
        if k > 1:
            logpart = f"1/{math.factorial(k)}*" + logpart
        parts.append(logpart)
    return "*".join(parts) if parts else "1"


def local_basis_monomials(dop, x0):
    """The canonical local basis structure of ``dop`` at ``x0``."""
    return local_recurrence(dop, x0).structure


class LocalRecurrence:
    """Recurrence data for local expansions of ``dop`` at ``x0``.

    ``tpoly(ci, k, j)`` is the polynomial in ``n`` giving the coefficient of
    ``X^j`` in ``q_k(nu - k + n + X)``, for the cluster ``ci`` of base
    exponent ``nu``.  Polynomials are ``fmpq_poly`` over Q and ``KPoly``
    otherwise.
    """

    def __init__(self, dop, x0):
        x0 = as_point(x0)
        kind = is_regular_singular(dop, x0)
        if kind is PointKind.IRREGULAR:
            raise IrregularPointError(f"{x0!r} is an irregular singular point")
        self.dop = dop
        self.point = x0
        self.ordinary = kind is PointKind.ORDINARY
        self.op = dop if x0.value.is_zero() else translate(dop, x0)
        self.theta = theta_form(self.op)
        self.q = self.theta.qpolys
        self.field = self.op.field
        self.order = dop.order
        self.span = len(self.q) - 1
        self.degree = self.q[0].degree()
        self.rational = self.field.is_rational
        roots = rational_roots(self.q[0])
        self.clusters = group_exponents(roots)
        self.structure = LocalBasisStructure(x0, self.clusters, self.ordinary)
        if len(self.structure) != self.order:
            raise UnsupportedExponentError("indicial polynomial has too few roots")
        self._tp = {}
        self._ball_cache = {}

    def width(self, ci):
        """Length of log-coefficient vectors in cluster ``ci``."""
        return 1 if self.ordinary else self.clusters[ci].size

    def tpoly(self, ci, k, j):
        key = (ci, k, j)
        p = self._tp.get(key)
        if p is None:
            q = self.q[k]
            shift = self.field(self.clusters[ci].nu - k)
            p = q.taylor_shift(shift)
            for _ in range(j):
                p = p.derivative()
            p = p * self.field(fmpq(1, math.factorial(j)))
            if self.rational:
                p = p.to_fmpq_poly()
            self._tp[key] = p
        return p

    def exact_coeff(self, ci, k, j, n):
        p = self.tpoly(ci, k, j)
        if self.rational:
            return p(n)
        return p(self.field(n))

    def ball_coeffs(self, ci, prec):
        """Per (k, j), a function n -> ball value of the coefficient."""
        key = (ci, prec)
        if key not in self._ball_cache:
            w = self.width(ci)
            table = []
            for k in range(self.span + 1):
                row = []
                for j in range(w):
                    p = self.tpoly(ci, k, j)
                    if self.rational:
                        row.append(None if p.is_zero() else p)
                    else:
                        row.append(None if p.is_zero() else p.to_balls(prec + 20))
                table.append(row)
            self._ball_cache[key] = table
        return self._ball_cache[key]

    # -- one step of the recurrence, generic over the coefficient ring

    def step(self, ci, n, hist, label, coeff, zero, inv):
        """Compute ``u[n]`` from ``hist[k - 1] = u[n - k]``.

        ``coeff(k, j)`` returns the ring value of the (k, j) coefficient at
        ``n`` (or None when it is structurally zero), ``inv`` inverts an
        exact nonzero coefficient, and ``label`` is the ``(n0, k0)`` pair
        of the basis element being expanded.
        """
        w = self.width(ci)
        rhs = [zero] * w
        for k in range(1, self.span + 1):
            if k > len(hist):
                break
            u = hist[k - 1]
            if u is None:
                continue
            for j in range(w):
                c = coeff(k, j)
                if c is None:
                    continue
                for l in range(w - j):
                    rhs[l] = rhs[l] - c * u[l + j]
        m = self.clusters[ci].multiplicity(n)
        h = [coeff(0, j + m) for j in range(w - m)] if m < w else []
        out = [zero] * w
        if h:
            h0inv = inv(m)
            for l in range(w - 1, m - 1, -1):
                acc = rhs[l - m]
                for j in range(1, w - l):
                    if h[j] is not None:
                        acc = acc - h[j] * out[l + j]
                out[l] = acc * h0inv
        n0, k0 = label
        for l in range(min(m, w)):
            out[l] = zero + 1 if (n == n0 and l == k0) else zero
        return out


_RECURRENCES = {}


def local_recurrence(dop, x0):
    """Cached :class:`LocalRecurrence` for ``(dop, x0)``."""
    x0 = as_point(x0)
    key = (id(dop), x0)
    rec = _RECURRENCES.get(key)
    if rec is None or rec.dop is not dop:
        rec = LocalRecurrence(dop, x0)
        if len(_RECURRENCES) > 256:
            _RECURRENCES.clear()
        _RECURRENCES[key] = rec
    return rec


@dataclass(frozen=True)
class LogSeries:
    """``sum_{n < N} sum_k coeffs[n][k] (x - x0)^(nu + n) log(x - x0)^k / k!``.

    Coefficients are exact field elements or complex balls.
    """

    point: ExactPoint
    nu: fmpq
    coeffs: tuple
    label: tuple = None

    @property
    def N(self):
        return len(self.coeffs)

    @property
    def K(self):
        """Largest log power with a (possibly) nonzero coefficient."""
        kmax = 0
        for u in self.coeffs:
            for k, c in enumerate(u):
                if not _is_zero(c):
                    kmax = max(kmax, k)
        return kmax

    def log_part(self, k):
        """Coefficients of ``log^k/k!`` as a list indexed by ``n``."""
        return [u[k] if k < len(u) else 0 for u in self.coeffs]


def _is_zero(c):
    if isinstance(c, acb):
        return c.is_exact() and c.is_zero()
    if hasattr(c, "is_zero"):
        return c.is_zero()
    return c == 0


def expand_local_solution(dop, x0, label, N, prec=None):
    """The basis element ``label = (mu, k)`` at ``x0`` truncated to ``N`` terms.

    Exact coefficients (in the field of ``x0``) unless ``prec`` is given, in
    which case they are complex balls.
    """
    if N < 1:
        raise ValueError("truncation order must be at least 1")
    rec = local_recurrence(dop, x0)
    mu, k0 = fmpq(label[0]), label[1]
    try:
        idx = rec.structure.labels.index((mu, k0))
    except ValueError:
        raise ValueError(f"{label} is not a distinguished monomial at {rec.point!r}")
    ci, n0, k0 = rec.structure.locate(idx)
    nu = rec.clusters[ci].nu
    if prec is None:
        K = rec.field
        zero = K.zero()

        def run():
            hist, out = [], []
            for n in range(N):
                def coeff(k, j, n=n):
                    p = rec.tpoly(ci, k, j)
                    if p.is_zero():
                        return None
                    return K(rec.exact_coeff(ci, k, j, n))
                def inv(m, n=n):
                    return K(rec.exact_coeff(ci, 0, m, n)).inverse()
                u = rec.step(ci, n, hist, (n0, k0), coeff, zero, inv)
                out.append(tuple(u))
                hist = [u] + hist[:rec.span - 1]
            return out
        coeffs = run()
    else:
        coeffs = []
        it = BallIterator(rec, ci, (n0, k0), prec)
        with working_precision(prec):
            for _ in range(N):
                coeffs.append(tuple(it.next()))
    return LogSeries(rec.point, nu, tuple(coeffs), (mu, k0))


class BallIterator:
    """Iterate the recurrence of one basis element in ball arithmetic."""

    def __init__(self, rec, ci, label, prec):
        self.rec, self.ci, self.label, self.prec = rec, ci, label, prec
        self.n = 0
        self.hist = []
        self.table = rec.ball_coeffs(ci, prec)
        self.zero = acb(0)

    def coeff(self, n):
        table = self.table
        if self.rec.rational:
            nn = fmpq(n)
            def coeff(k, j):
                p = table[k][j] if j < len(table[k]) else None
                if p is None:
                    return None
                v = p(nn)
                return None if v == 0 else acb(arb(v))
        else:
            nb = acb(n)
            def coeff(k, j):
                cs = table[k][j] if j < len(table[k]) else None
                if cs is None:
                    return None
                acc = acb(0)
                for c in reversed(cs):
                    acc = acc * nb + c
                return acc
        return coeff

    def next(self):
        rec, n = self.rec, self.n
        coeff = self.coeff(n)
        if rec.rational:
            def inv(m):
                return acb(arb(1 / rec.exact_coeff(self.ci, 0, m, n)))
        else:
            def inv(m):
                return 1 / coeff(0, m)
        u = rec.step(self.ci, n, self.hist, self.label, coeff, self.zero, inv)
        self.hist = [u] + self.hist[:rec.span - 1]
        self.n += 1
        return u


class ExactIterator:
    """Iterate a recurrence with rational coefficients exactly, returning
    ball vectors.  Avoids the wrapping effect of ball iteration, whose
    radii may grow faster than the coefficients themselves."""

    def __init__(self, rec, ci, label, prec):
        if not rec.rational:
            raise ValueError("exact iteration needs rational coefficients")
        self.rec, self.ci, self.label, self.prec = rec, ci, label, prec
        self.n = 0
        self.hist = []
        w = rec.width(ci)
        self.table = [[rec.tpoly(ci, k, j) for j in range(w)]
                      for k in range(rec.span + 1)]

    def next(self):
        rec, n, table = self.rec, self.n, self.table
        nn = fmpq(n)

        def coeff(k, j):
            p = table[k][j] if j < len(table[k]) else None
            if p is None or p.is_zero():
                return None
            v = p(nn)
            return None if v == 0 else v

        def inv(m):
            return 1 / table[0][m](nn)

        u = rec.step(self.ci, n, self.hist, self.label, coeff, fmpq(0), inv)
        self.hist = [u] + self.hist[:rec.span - 1]
        self.n += 1
        with working_precision(self.prec):
            return [acb(arb(c)) if c != 0 else acb(0) for c in u]


# -- jets: lists [c_0, ..., c_{J-1}] standing for sum c_j delta^j + O(delta^J)

def jet_mul(a, b, J):
    out = [acb(0)] * J
    for i, x in enumerate(a[:J]):
        if _is_zero(x):
            continue
        for j in range(min(len(b), J - i)):
            out[i + j] = out[i + j] + x * b[j]
    return out


def _principal_log(z, branch):
    if z.contains(0):
        raise BranchCutError("evaluation point ball contains the expansion point")
    exact_neg = balls.is_exact_real(z) and z.real < 0
    if not exact_neg and z.imag.contains(0) and not z.real > 0:
        raise BranchCutError("evaluation point straddles the branch cut")
    lg = z.log()
    if exact_neg and branch == "lower":
        lg = lg - acb(0, 2) * arb.pi()
    return lg


def jet_log(z, J, branch="principal"):
    """Jet of ``log(z + delta)``; ``branch`` picks arg in (-pi, pi]
    ("principal") or [-pi, pi) ("lower") for points on the cut."""
    out = [_principal_log(z, branch)]
    if J > 1:
        zi = 1 / z
        p = acb(1)
        for j in range(1, J):
            p = p * zi
            out.append(p / j if j % 2 else -p / j)
    return out


def jet_pow(z, nu, J, branch="principal"):
    """Jet of ``(z + delta)^nu`` for rational ``nu``."""
    nu = fmpq(nu)
    if nu.q == 1 and nu >= 0:
        e = int(nu)
        out = []
        for j in range(J):
            out.append(acb(math.comb(e, j)) * z ** (e - j) if j <= e else acb(0))
        return out
    if nu.q == 1:
        if z.contains(0):
            raise BranchCutError("evaluation point ball contains zero")
        base = z ** int(nu)
    else:
        base = (_principal_log(z, branch) * arb(nu)).exp()
    out = [base]
    zi = 1 / z
    c = acb(1)
    for j in range(1, J):
        # binom(nu, j) z^-j
        c = c * zi * arb(nu - (j - 1)) / j
        out.append(base * c)
    return out


def evaluate_log_series(f, z, branch="principal", jet_order=1, prec=None):
    """Jet of order ``jet_order`` of the truncated log-series ``f`` at
    ``x0 + z`` (``z`` a complex ball, the displacement from the expansion
    point).  No tail bound is included."""
    from flint import ctx
    prec = prec or ctx.prec
    J = jet_order
    if J < 1:
        raise ValueError("jet order must be at least 1")
    with working_precision(prec):
        z = balls.to_ball(z)
        coeffs = [[c if isinstance(c, acb) else c.to_ball(prec) for c in u]
                  for u in f.coeffs]
        width = max((len(u) for u in coeffs), default=1)
        inner = [inner_jets([u[k] if k < len(u) else acb(0) for u in coeffs], z, J)
                 for k in range(width)]
        return combine_jets(inner, f.nu, z, J, branch)


def inner_jets(cs, z, J):
    """Jet of ``sum_n cs[n] (z + delta)^n``, by Horner's rule on jets."""
    acc = [acb(0)] * J
    for c in reversed(cs):
        # acc = acc * (z + delta) + c
        new = [acb(0)] * J
        for j in range(J):
            t = acc[j] * z
            if j > 0:
                t = t + acc[j - 1]
            new[j] = t
        new[0] = new[0] + c
        acc = new
    return acc


def combine_jets(inner, nu, z, J, branch="principal"):
    """``(z+delta)^nu * sum_k inner[k] * log(z+delta)^k / k!`` as a jet."""
    total = [acb(0)] * J
    width = len(inner)
    nonzero = [k for k in range(width) if not all(_is_zero(c) for c in inner[k])]
    if not nonzero:
        return total
    if max(nonzero) > 0:
        lg = jet_log(z, J, branch)
    lpow = [acb(1)] + [acb(0)] * (J - 1)
    for k in range(max(nonzero) + 1):
        if k > 0:
            lpow = jet_mul(lpow, lg, J)
            lpow = [c / k for c in lpow]
        if k in nonzero:
            total = [a + b for a, b in zip(total, jet_mul(inner[k], lpow, J))]
    if nu != 0:
        total = jet_mul(total, jet_pow(z, nu, J, branch), J)
    return total
