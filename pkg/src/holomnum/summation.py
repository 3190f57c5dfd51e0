"""Summation of local expansions to a target accuracy.

Two summation strategies share one tail bound:

* :func:`sum_naive` runs the recurrence term by term (exactly when its
  coefficients are rational, in ball arithmetic otherwise);
* :func:`sum_binary_splitting` multiplies exact integer matrices with a
  product tree and converts to balls once at the end.

Both return, for each requested basis element, the jet
``[g(z), g'(z), g''(z)/2, ...]`` of the partial sum with the tail bound
already added.

Tail bound
----------
Stack ``U_n = (u[n], ..., u[n-s+1])`` so the recurrence reads
``U_n = C(n) U_{n-1}``.  For a weighting matrix ``W`` and
``kappa >= sup_{n >= N} ||W C(n) W^-1||``, induction gives
``|u[n][k]| <= ||W^-1|| ||W U_{N-1}|| kappa^(n-N+1)``, and the tail of the
jet coefficient ``j`` is dominated by a geometric series.  ``W`` comes
from a Schur form of the limit of ``C(n)``, rescaled by a positive
diagonal so that the weighted norm approaches the Perron root of the
entrywise bound, and the supremum is taken by evaluating ``C`` as a
rational function of ``1/n`` on the ball ``[0, 1/N]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from flint import acb, acb_mat, arb, fmpq, fmpz, fmpz_mat

from . import balls
from .balls import PrecisionError, working_precision
from .local import BallIterator, ExactIterator, combine_jets, local_recurrence
from .numberfield import NFElem, common_field

__all__ = ["SummationPlan", "SummationResult", "SummationError", "TailBounder",
           "sum_naive", "sum_binary_splitting", "summation", "tail_bound",
           "binsplit_partial_sums", "exact_partial_sums", "BINSPLIT_THRESHOLD"]

BINSPLIT_THRESHOLD = 256


class SummationError(PrecisionError):
    """No certified tail bound could be established (retry signal)."""


@dataclass
class SummationPlan:
    """Sum the basis elements ``labels`` (indices into the local basis,
    default all) of ``dop`` at ``x0`` evaluated at ``x0 + z``.

    ``z`` is an exact field element (needed for binary splitting) or a
    complex ball.  ``jet_order`` is the number of jet coefficients.
    """

    dop: object
    x0: object
    z: object
    jet_order: int
    eps: object
    prec: int
    algorithm: str = "auto"
    branch: str = "principal"
    labels: tuple = None
    max_terms: int = None

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.algorithm not in ("auto", "naive", "binsplit"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")


@dataclass
class SummationResult:
    jets: list
    terms: int
    algorithm: str
    tail: list = field(default_factory=list)


def _z_ball(z, prec):
    if isinstance(z, NFElem):
        return z.to_ball(prec)
    return balls.to_ball(z, prec)


def _eps_arb(eps):
    if isinstance(eps, arb):
        return eps
    if isinstance(eps, fmpq):
        return arb(eps)
    from fractions import Fraction
    q = Fraction(eps) if not isinstance(eps, Fraction) else eps
    return arb(fmpq(q.numerator, q.denominator))


def _exact_zero(z):
    if isinstance(z, NFElem):
        return z.is_zero()
    return z.is_exact() and z.is_zero()


# -- tail bound

class TailBounder:
    """Certified tail bounds for one cluster of a local recurrence.

    The weighting is ``W = D^-1 Q^H`` (blockwise), with ``Q`` unitary from
    a Schur form of the limit companion matrix and ``D`` a positive
    diagonal.  Candidates for ``D`` are a numerical Perron vector of the
    entrywise bound on ``Q^H C(n) Q^-H`` and the powers ``diag(delta^i)``;
    each is rigorous on its own and the smallest bound is kept.
    """

    def __init__(self, rec, ci, t, prec):
        self.rec, self.ci, self.prec = rec, ci, prec
        self.t = t
        self.s = rec.span
        self.w = rec.width(ci)
        self.d = rec.degree
        self._kappa = None
        if self.s == 0:
            return
        with working_precision(prec):
            self._setup()

    def _setup(self):
        s, rec, w = self.s, self.rec, self.w
        lc0 = rec.q[0][self.d]
        lead = []
        for k in range(1, s + 1):
            z = (rec.q[k][self.d] / lc0).to_ball(64)
            lead.append(-complex(float(z.real.mid()), float(z.imag.mid())))
        comp = np.zeros((s, s), dtype=complex)
        comp[0, :] = lead
        for i in range(1, s):
            comp[i, i - 1] = 1
        T, Q = scipy.linalg.schur(comp, output="complex")
        # the scale of delta follows the spectral size, so that the search
        # below is invariant under rescaling of the variable
        radius = max(abs(T[i, i]) for i in range(s))
        with working_precision(64):
            inv_t = float(1 / arb(self.t)) if self.t > 0 else 1.0
        scale = max(radius, inv_t, 1e-300)
        e = math.ceil(math.log2(scale))
        self.deltas = tuple(fmpq(2) ** (e - k) for k in range(0, 40))
        qh = Q.conj().T
        n = s * w
        rows = [[acb(0)] * n for _ in range(n)]
        for a in range(s):
            for b in range(s):
                v = qh[a, b]
                if v == 0:
                    continue
                e = acb(float(v.real), float(v.imag))
                for l in range(w):
                    rows[a * w + l][b * w + l] = e
        self.Qh = acb_mat(rows)
        try:
            self.Qhinv = self.Qh.inv()
        except ZeroDivisionError as exc:
            raise SummationError("weighting matrix not invertible") from exc
        self.block = [i // w for i in range(n)]
        self.absQhinv = _abs_entries(self.Qhinv)

    def _companion(self, N):
        """Ball matrix containing C(n) for every n >= N, or None."""
        rec, s, w, d = self.rec, self.s, self.w, self.d
        eps = arb(fmpq(1, 2 * N), fmpq(1, 2 * N))  # [0, 1/N]

        def at(k, j):
            p = rec.tpoly(self.ci, k, j)
            cs = [arb(c) for c in p.coeffs()] if rec.rational else p.to_balls(self.prec)
            if not cs:
                return acb(0)
            if len(cs) > d + 1:
                raise SummationError("recurrence is not Fuchsian at this point")
            cs = cs + [acb(0)] * (d + 1 - len(cs))
            acc = acb(0)
            for c in cs:  # p(n) / n^d as a polynomial in eps = 1/n
                acc = acc * eps + c
            return acc

        a = [at(0, j) for j in range(w)]
        if a[0].contains(0):
            return None
        # b = 1/a as a power series in X mod X^w
        b = [1 / a[0]]
        for i in range(1, w):
            acc = acb(0)
            for j in range(1, i + 1):
                acc += a[j] * b[i - j]
            b.append(-acc * b[0])
        n = s * w
        rows = [[acb(0)] * n for _ in range(n)]
        for k in range(1, s + 1):
            t = [at(k, j) for j in range(w)]
            # block = -b(S) t(S), where (f(S))[l][l + j] = f_j
            prod = [acb(0)] * w
            for i in range(w):
                for j in range(w - i):
                    prod[i + j] += b[i] * t[j]
            for l in range(w):
                for j in range(w - l):
                    rows[l][(k - 1) * w + l + j] = -prod[j]
        for i in range(w, n):
            rows[i][i - w] = acb(1)
        return acb_mat(rows)

    def kappa_matrix(self, N):
        """Entrywise bounds on ``|Q^H C(n) Q^-H|`` valid for all n >= N."""
        if self._kappa is not None and self._kappa[0] <= N < 2 * self._kappa[0]:
            return self._kappa[1]
        # valid for any N' >= N; refreshed as N doubles so that the
        # enclosure of C over [0, 1/N] keeps tightening
        if N <= self.rec.clusters[self.ci].max_offset:
            return None
        with working_precision(self.prec):
            C = self._companion(N)
            if C is None:
                return None
            M = _abs_entries(self.Qh * C * self.Qhinv)
        if any(not x.is_finite() for row in M for x in row):
            return None
        self._kappa = (N, M)
        self._weights = self._weightings(M)
        return M

    def _weightings(self, M):
        """Candidate positive weights ``v`` with ``kap = max (M v)_i / v_i``
        and ``winv = max_i sum_j |Q^-H|_ij v_j``."""
        cands = [self._perron(M)]
        cands += [[arb(d) ** b for b in self.block] for d in self.deltas]
        out = []
        with working_precision(self.prec):
            for v in cands:
                if v is None:
                    continue
                kap = arb(0)
                for i, row in enumerate(M):
                    acc = arb(0)
                    for j, x in enumerate(row):
                        if x != 0:
                            acc += x * v[j]
                    kap = kap.max(acc / v[i])
                winv = arb(0)
                for row in self.absQhinv:
                    acc = arb(0)
                    for j, x in enumerate(row):
                        acc += x * v[j]
                    winv = winv.max(acc)
                out.append((v, arb(kap.upper()), arb(winv.upper())))
        return out

    @staticmethod
    def _perron(M):
        # For nonnegative M the weighted norm max (Mv)_i / v_i approaches the
        # Perron root as v approaches the Perron vector.
        n = len(M)
        try:
            a = np.array([[float(x.mid()) for x in row] for row in M])
        except (OverflowError, ValueError):
            return None
        if not np.all(np.isfinite(a)):
            return None
        top = a.max()
        if top <= 0:
            return None
        a = a + top * 1e-12  # irreducible, so the Perron vector is positive
        vals, vecs = np.linalg.eig(a)
        v = np.abs(vecs[:, int(np.argmax(vals.real))].real)
        if not np.all(np.isfinite(v)) or v.max() <= 0:
            return None
        v = np.maximum(v / v.max(), 1e-250)
        return [arb(float(x)) for x in v]

    def kappa(self, N, delta=1):
        M = self.kappa_matrix(N)
        if M is None:
            return None
        with working_precision(self.prec):
            return self._scaled_norm(M, arb(delta))

    def _scaled_norm(self, M, delta):
        blk = self.block
        pw = [delta ** (b) for b in range(self.s)]
        best = arb(0)
        for i, row in enumerate(M):
            acc = arb(0)
            for j, x in enumerate(row):
                if x != 0:
                    acc += x * pw[blk[j]] / pw[blk[i]]
            best = best.max(acc)
        return arb(best.upper())

    def bound(self, N, hist, t, J):
        """Bounds ``B_j`` (j < J) on ``sum_{n >= N} |u[n][k]| binom(n, j) t^(n-j)``
        given ``hist = [u[N-1], ..., u[N-s]]``.  Returns None on failure."""
        if self.s == 0:
            return [arb(0)] * J
        if len(hist) < self.s or N < J:
            return None
        if all(all(_is_exact_zero(c) for c in u) for u in hist[:self.s]):
            return [arb(0)] * J
        if self.kappa_matrix(N) is None:
            return None
        with working_precision(self.prec):
            t = arb(t)
            vec = acb_mat([[hist[i][l] if l < len(hist[i]) else acb(0)]
                           for i in range(self.s) for l in range(self.w)])
            qu = [x.abs_upper() for x in _column(self.Qh * vec)]
            best = None
            for v, kap, winv in self._weights:
                wu = arb(0)
                for i, x in enumerate(qu):
                    wu = wu.max(x / v[i])
                A = winv * wu
                out = []
                for j in range(J):
                    gamma = kap * t * arb(N + 1) / arb(N + 1 - j)
                    if not gamma < 1:
                        out = None
                        break
                    out.append(arb((A * kap * t ** (N - j) * math.comb(N, j)
                                    / (1 - gamma)).upper()))
                if out is None:
                    continue
                best = out if best is None else [x.min(y) for x, y in zip(best, out)]
        return best


def _abs_entries(m):
    return [[arb(m[i, j].abs_upper().upper()) for j in range(m.ncols())]
            for i in range(m.nrows())]


def _column(m):
    return [m[i, 0] for i in range(m.nrows())]


def _is_exact_zero(c):
    if isinstance(c, acb):
        return c.is_exact() and c.is_zero()
    return c == 0


def tail_bound(rec, ci, N, t, hist, J=1, prec=128):
    """Certified bound on the jet tails after ``N`` terms, see
    :meth:`TailBounder.bound`.  ``hist`` holds the last ``s`` computed
    coefficient vectors, most recent first.  Returns None when the
    validation fails."""
    hist = [[c if isinstance(c, acb) else _to_acb(c, prec) for c in u] for u in hist]
    return TailBounder(rec, ci, t, prec).bound(N, hist, t, J)


def _to_acb(c, prec):
    if isinstance(c, NFElem):
        return c.to_ball(prec)
    return balls.to_ball(c, prec)


# -- amplification of inner-sum errors through logs and powers

def _amplification(rec, ci, z, J, prec):
    with working_precision(64):
        az = z.abs_upper()
        nu = rec.clusters[ci].nu
        w = rec.width(ci)
        amp = arb(1)
        if nu != 0:
            amp = amp.max(az ** arb(nu))
            amp *= (1 + 1 / z.abs_lower()) ** (J - 1) * 2 ** J
        if w > 1:
            lg = az.log().abs_upper() + arb.pi() + J / z.abs_lower()
            amp *= (1 + lg) ** (w - 1) * w
        return amp


def _real_setting(rec, z):
    """True when every term of the local sums is real."""
    K = rec.field
    real_field = K.is_rational or (K.root is not None and K.root.is_real)
    return real_field and z.imag.is_exact() and z.imag.is_zero()


def _collect(rec, labels):
    out = {}
    for i in labels:
        ci, n0, k0 = rec.structure.locate(i)
        out.setdefault(ci, []).append((i, n0, k0))
    return out


def _select(plan):
    rec = local_recurrence(plan.dop, plan.x0)
    labels = tuple(range(rec.order)) if plan.labels is None else tuple(plan.labels)
    return rec, labels


def summation(plan):
    """Dispatch on ``plan.algorithm``; ``auto`` uses binary splitting
    above 256 bits when the evaluation point is exact and the expansion
    point ordinary.  At singular points the exact iteration of the naive
    method is much cheaper at the term counts met in practice."""
    alg = plan.algorithm
    if alg == "auto":
        rec, _ = _select(plan)
        exact = isinstance(plan.z, NFElem)
        alg = "binsplit" if (plan.prec > BINSPLIT_THRESHOLD and exact and rec.ordinary
                             and _binsplit_ok(rec, plan.z)) else "naive"
    if alg == "binsplit":
        return sum_binary_splitting(plan)
    return sum_naive(plan)


# -- naive summation

def sum_naive(plan):
    """Iterate the recurrence until a certified tail bound drops below
    ``eps/2`` (after amplification).  Terms are computed exactly over Q,
    since ball iteration can lose about a bit per term to overestimation."""
    rec, labels = _select(plan)
    prec, J = plan.prec, plan.jet_order
    jets = {}
    total_terms = 0
    with working_precision(prec):
        z = _z_ball(plan.z, prec)
        eps = _eps_arb(plan.eps)
        for ci, members in _collect(rec, labels).items():
            res, terms = _naive_cluster(rec, ci, members, z, J, eps, prec, plan)
            jets.update(res)
            total_terms = max(total_terms, terms)
    return SummationResult([jets[i] for i in labels], total_terms, "naive")


def _naive_cluster(rec, ci, members, z, J, eps, prec, plan):
    w = rec.width(ci)
    zero_z = z.is_exact() and z.is_zero()
    t = z.abs_upper()
    kind = ExactIterator if rec.rational else BallIterator
    iters = [kind(rec, ci, (n0, k0), prec) for _, n0, k0 in members]
    # inner[m][k][j] = sum_n u[n][k] binom(n, j) z^(n-j)
    inner = [[[acb(0)] * J for _ in range(w)] for _ in members]
    hists = [[] for _ in members]
    pows = [acb(1)]  # z^0 .. z^n, last J kept
    amp = _amplification(rec, ci, z, J, prec) if not zero_z else arb(1)
    tol = eps / (2 * amp)
    real = _real_setting(rec, z)
    bounder = None
    n_min = max(rec.clusters[ci].max_offset + 1, rec.span, J)
    limit = plan.max_terms or (20 * prec + 2000)
    next_check = n_min
    n = 0
    while True:
        if n > 0:
            pows.append(pows[-1] * z)
            if len(pows) > J:
                pows.pop(0)
        zp = pows[::-1]  # zp[j] = z^(n-j)
        binoms = [math.comb(n, j) for j in range(J)]
        for m, it in enumerate(iters):
            u = it.next()
            hists[m] = [u] + hists[m][:rec.span - 1]
            for k in range(w):
                c = u[k]
                if _is_exact_zero(c):
                    continue
                for j in range(min(J, n + 1)):
                    inner[m][k][j] += c * (binoms[j] * zp[j])
        n += 1
        if zero_z and n >= J and n > rec.clusters[ci].max_offset:
            break
        if n < next_check:
            continue
        # cheap estimate before the rigorous bound
        est = arb(0)
        mags, rads = arb(0), arb(0)
        for h in hists:
            for u in h:
                for c in u:
                    est = est.max(c.abs_upper())
                    mags = mags.max(c.mid().abs_upper())
                    rads = rads.max(c.rad())
        if rads > mags:
            # the wrapping effect has eaten every significant bit
            raise SummationError(f"precision exhausted after {n} terms")
        est = est * (t ** (n - J + 1) if n >= J else arb(1)) * (n + 1) ** J
        if est < tol * 2 ** -4:
            if bounder is None:
                bounder = TailBounder(rec, ci, t, prec)
            ok = True
            tails = []
            for h in hists:
                b = bounder.bound(n, h, t, J)
                if b is None or not all(x <= tol for x in b):
                    ok = False
                    break
                tails.append(b)
            if ok:
                for m in range(len(members)):
                    for k in range(w):
                        for j in range(J):
                            inner[m][k][j] = balls.add_error(inner[m][k][j], tails[m][j], real)
                break
            next_check = n + max(4, n // 8)
        else:
            next_check = n + 1
        if n > limit:
            raise SummationError(f"no certified tail bound after {n} terms")
    nu = rec.clusters[ci].nu
    out = {}
    for m, (i, _, _) in enumerate(members):
        if zero_z:
            out[i] = _zero_point_jet(inner[m], nu, J)
        else:
            out[i] = combine_jets(inner[m], nu, z, J, plan.branch)
    return out, n


def _zero_point_jet(inner, nu, J):
    # Only defined for analytic expansions (nu = 0, no logs used).
    if nu != 0 or any(not _is_exact_zero(c) for row in inner[1:] for c in row):
        raise PrecisionError("cannot evaluate a singular expansion at its center")
    return list(inner[0])


# -- binary splitting

class _ZXi:
    """Arithmetic on matrices over Z[xi]/(m) for a monic integer m,
    stored as lists of fmpz_mat (coefficient of xi^e)."""

    def __init__(self, minpoly_int):
        self.m = [fmpz(c) for c in minpoly_int]  # monic, low to high
        self.d = len(self.m) - 1

    def mul(self, A, B):
        d = self.d
        if d == 1:
            return [A[0] * B[0]]
        prod = [None] * (2 * d - 1)
        for e, a in enumerate(A):
            for f, b in enumerate(B):
                p = a * b
                prod[e + f] = p if prod[e + f] is None else prod[e + f] + p
        for top in range(2 * d - 2, d - 1, -1):
            c = prod[top]
            if c is None:
                continue
            # xi^top = xi^(top-d) * xi^d, xi^d = -sum m_i xi^i
            for i in range(d):
                if self.m[i] != 0:
                    term = c * (-self.m[i])
                    idx = top - d + i
                    prod[idx] = term if prod[idx] is None else prod[idx] + term
            prod[top] = None
        return [prod[e] for e in range(d)]


def _binsplit_ok(rec, z):
    if not isinstance(z, NFElem):
        return False
    k = common_field(rec.field, z.field)
    mp = k.minpoly
    if mp.denom() != 1 or mp[mp.degree()] != 1:
        return False
    return True


def _integral(x, k):
    coeffs, den = k(x).integral()
    return coeffs, den


def _prepare_binsplit(rec, z):
    k = common_field(rec.field, z.field)
    ring = _ZXi([fmpz(c) for c in k.minpoly.numer().coeffs()])
    zc, zd = _integral(z, k)
    zn = k(z) * zd  # integral element
    s, r = rec.span, rec.order
    qpolys = [[k(c) for c in rec.tpoly(0, kk, 0).coeffs()] if rec.rational
              else list(rec.tpoly(0, kk, 0).coeffs) for kk in range(s + 1)]
    zpows = [k.one()]
    for _ in range(s + 1):
        zpows.append(zpows[-1] * zn)
    return k, ring, zn, zd, qpolys, zpows


def _poly_at(cs, n, k):
    acc = k.zero()
    for c in reversed(cs):
        acc = acc * n + c
    return acc


def _elem_ints(x, d):
    coeffs, den = x.integral()
    if den != 1:
        raise ArithmeticError("binary splitting needs integral recurrence coefficients")
    return coeffs + [fmpz(0)] * (d - len(coeffs))


def _step_matrix(ctx, n, J):
    k, ring, zn, zd, qpolys, zpows = ctx
    s = len(qpolys) - 1
    d = ring.d
    q0 = _poly_at(qpolys[0], n, k)
    Qn = q0 * zd ** s
    if not Qn.is_rational():
        raise ArithmeticError("indicial part must be rational")
    Qn = Qn.rational()
    if Qn.q != 1:
        raise ArithmeticError("binary splitting needs an integral recurrence")
    Qn = fmpz(Qn.p)
    a = []
    for kk in range(1, s + 1):
        c = -_poly_at(qpolys[kk], n, k) * zpows[kk] * zd ** (s - kk)
        a.append(_elem_ints(c, d))
    dim = s + J
    mats = [[[fmpz(0)] * dim for _ in range(dim)] for _ in range(d)]
    for e in range(d):
        for kk in range(s):
            mats[e][0][kk] = a[kk][e]
        for i in range(J):
            b = math.comb(n, i)
            for kk in range(s):
                mats[e][s + i][kk] = a[kk][e] * b
    for i in range(1, s):
        mats[0][i][i - 1] = Qn
    for i in range(J):
        mats[0][s + i][s + i] = Qn
    return [fmpz_mat(m) for m in mats], Qn


def _product(ctx, lo, hi, J):
    """P(hi-1) ... P(lo) and the product of the Q(n)."""
    ring = ctx[1]
    if hi - lo == 1:
        return _step_matrix(ctx, lo, J)
    mid = (lo + hi) // 2
    A, qa = _product(ctx, lo, mid, J)
    B, qb = _product(ctx, mid, hi, J)
    return ring.mul(B, A), qa * qb


def _initial_state(ctx, rec, labels, J):
    k, ring, zn, zd, qpolys, zpows = ctx
    s, r, d = rec.span, rec.order, ring.d
    dim = s + J
    cols = []
    for i in labels:
        _, j, _ = rec.structure.locate(i)
        # v_j = z^j scaled by zd^(r-1): zn^j zd^(r-1-j)
        val = _elem_ints(zn ** j * zd ** (r - 1 - j), d)
        col = [[fmpz(0)] * d for _ in range(dim)]
        t = r - 1 - j
        if t < s:
            col[t] = val
        for i2 in range(J):
            b = math.comb(j, i2)
            col[s + i2] = [c * b for c in val]
        cols.append(col)
    return [fmpz_mat([[cols[c][row][e] for c in range(len(cols))] for row in range(dim)])
            for e in range(d)]


def binsplit_partial_sums(rec, z, N, J, labels=None):
    """Exact state after summing terms ``0 .. N-1`` by binary splitting.

    Returns ``(v, S, den)`` per label where ``v = [v_{N-1}, ..., v_{N-s}]``,
    ``S[i] = sum_{n<N} binom(n, i) u_n z^n`` and every entry is to be
    divided by the integer ``den``; entries are elements of the field.
    """
    labels = tuple(range(rec.order)) if labels is None else tuple(labels)
    if not (rec.ordinary and _binsplit_ok(rec, z)):
        raise ValueError("binary splitting needs an ordinary point, an exact z "
                         "and a monic integral generator")
    ctx = _prepare_binsplit(rec, z)
    k, ring = ctx[0], ctx[1]
    s, r = rec.span, rec.order
    X = _initial_state(ctx, rec, labels, J)
    den = fmpz(ctx[3]) ** (r - 1)
    if N > r:
        P, qprod = _product(ctx, r, N, J)
        X = ring.mul(P, X)
        den *= qprod
    elif N < r:
        raise ValueError("binary splitting needs at least r terms")
    gen = k.gen()
    gpows = [k.one()]
    for _ in range(ring.d - 1):
        gpows.append(gpows[-1] * gen)
    out = []
    for c in range(len(labels)):
        vals = []
        for row in range(s + J):
            acc = k.zero()
            for e in range(ring.d):
                x = X[e][row, c]
                if x != 0:
                    acc = acc + gpows[e] * k(fmpq(x))
            vals.append(acc)
        out.append((vals[:s], vals[s:], den))
    return out


def exact_partial_sums(rec, z, N, J, labels=None):
    """Reference for :func:`binsplit_partial_sums` by direct iteration,
    returning ``S[i] = sum_{n<N} binom(n, i) u_n z^n`` per label."""
    from .local import expand_local_solution
    labels = tuple(range(rec.order)) if labels is None else tuple(labels)
    k = common_field(rec.field, z.field)
    out = []
    for i in labels:
        f = expand_local_solution(rec.dop, rec.point, rec.structure.labels[i], N)
        S = []
        for j in range(J):
            acc = k.zero()
            for n in range(N):
                acc = acc + k(f.coeffs[n][0]) * k(z) ** n * math.comb(n, j)
            S.append(acc)
        out.append(S)
    return out


def _estimate_terms(rec, z, tol, J, labels, limit):
    """Rough number of terms, from a low-precision run on midpoints."""
    with working_precision(64):
        t = z.abs_upper()
        best = rec.order
        for i in labels:
            ci, n0, k0 = rec.structure.locate(i)
            it = BallIterator(rec, ci, (n0, k0), 64)
            window = []
            for n in range(limit):
                u = it.next()
                u = [acb(c.real.mid(), c.imag.mid()) for c in u]
                it.hist[0] = u
                window = ([max((c.abs_upper() for c in u), default=arb(0))]
                          + window)[:max(rec.span, 1)]
                if n >= max(rec.order, rec.span, J):
                    m = arb(0)
                    for v in window:
                        m = m.max(v)
                    if m * t ** (n - J + 1) * (n + 1) ** J < tol:
                        best = max(best, n + 1)
                        break
            else:
                best = max(best, limit)
        return best


def sum_binary_splitting(plan):
    """Exact partial sums by binary splitting, converted to balls once,
    plus the certified tail bound."""
    rec, labels = _select(plan)
    z = plan.z
    if not isinstance(z, NFElem):
        raise ValueError("binary splitting needs an exact evaluation point")
    if not _binsplit_ok(rec, z):
        raise ValueError("binary splitting needs a monic integral generator")
    prec, J = plan.prec, plan.jet_order
    if z.is_zero():
        return sum_naive(plan)
    if not rec.ordinary:
        return _binsplit_singular(plan, rec, labels)
    with working_precision(prec):
        zb = z.to_ball(prec)
        t = zb.abs_upper()
        eps = _eps_arb(plan.eps)
        amp = _amplification(rec, 0, zb, J, prec)
        tol = eps / (2 * amp)
        limit = plan.max_terms or (20 * prec + 2000)
        N = _estimate_terms(rec, zb, tol * 2 ** -8, J, labels, limit)
        N = max(N, rec.order, rec.span, J, rec.clusters[0].max_offset + 1)
        bounder = TailBounder(rec, 0, t, prec)
        real = _real_setting(rec, zb)
    while True:
        state = binsplit_partial_sums(rec, z, N, J, labels)
        with working_precision(prec):
            zinv = 1 / zb
            jets, tails, ok = [], [], True
            for vs, S, den in state:
                denb = arb(den)
                hist = []
                for idx, v in enumerate(vs):
                    n = N - 1 - idx
                    if n < 0:
                        hist.append([acb(0)])
                        continue
                    hist.append([v.to_ball(prec + 20) / denb * zinv ** n])
                b = bounder.bound(N, hist, t, J)
                if b is None or not all(x <= tol for x in b):
                    ok = False
                    break
                jet = []
                for j in range(J):
                    val = S[j].to_ball(prec + 20) / denb * zinv ** j
                    jet.append(balls.add_error(val, b[j], real))
                jets.append(jet)
                tails.append(b)
        if ok:
            return SummationResult(jets, N, "binsplit", tails)
        if N > limit:
            raise SummationError(f"no certified tail bound after {N} terms")
        N = N + max(8, N // 4)


# -- binary splitting at regular singular points

class _SingularSplitter:
    """Exact step matrices on ``[v_{n-1}, ..., v_{n-s}, S_0, ..., S_{J-1}]``
    (each a vector of ``w`` log coefficients, ``v_n = u_n z^n``), valid
    past the largest offset of the cluster where no initial value enters.
    """

    def __init__(self, rec, ci, z, J):
        self.rec, self.ci, self.J = rec, ci, J
        self.k = common_field(rec.field, z.field)
        self.z = self.k(z)
        self.ring = _ZXi([fmpz(c) for c in self.k.minpoly.numer().coeffs()])
        self.w, self.s = rec.width(ci), rec.span
        self.dim = self.w * (self.s + J)
        zp = [self.k.one()]
        for _ in range(self.s):
            zp.append(zp[-1] * self.z)
        self.zpows = zp

    def _field_matrix(self, n):
        rec, ci, k, w, s, J = self.rec, self.ci, self.k, self.w, self.s, self.J
        zero = k.zero()
        table = {}

        def coeff(kk, j):
            key = (kk, j)
            if key not in table:
                p = rec.tpoly(ci, kk, j)
                table[key] = None if p.is_zero() else k(rec.exact_coeff(ci, kk, j, n))
            return table[key]

        h0inv = coeff(0, 0).inverse()
        M = [[zero] * self.dim for _ in range(self.dim)]
        for kk in range(1, s + 1):
            for l in range(w):
                hist = [None] * s
                hist[kk - 1] = [zero] * w
                hist[kk - 1][l] = k.one()
                out = rec.step(ci, n, hist, (-1, -1), coeff, zero, lambda m: h0inv)
                col = (kk - 1) * w + l
                for r_ in range(w):
                    M[r_][col] = out[r_] * self.zpows[kk]
        # shift v_{n-1} .. v_{n-s+1} down one slot
        for kk in range(1, s):
            for l in range(w):
                M[kk * w + l][(kk - 1) * w + l] = k.one()
        for i in range(J):
            b = k(fmpq(math.comb(n, i)))
            for r_ in range(w):
                row = (s + i) * w + r_
                M[row][row] = k.one()
                for col in range(s * w):
                    if not M[r_][col].is_zero():
                        M[row][col] = M[row][col] + M[r_][col] * b
        return M

    def step(self, n):
        M = self._field_matrix(n)
        d = self.ring.d
        den = fmpz(1)
        ints = []
        for row in M:
            irow = []
            for x in row:
                cs, dd = x.integral()
                irow.append((cs, dd))
                den = den * dd // den.gcd(dd)
            ints.append(irow)
        mats = [[[cs[e] * (den // dd) for cs, dd in irow] for irow in ints] for e in range(d)]
        return [fmpz_mat(m) for m in mats], den

    def product(self, lo, hi):
        if hi - lo == 1:
            return self.step(lo)
        mid = (lo + hi) // 2
        A, da = self.product(lo, mid)
        B, db = self.product(mid, hi)
        return self.ring.mul(B, A), da * db

    def initial(self, members, n_start):
        """Exact state at ``n_start`` per member, by direct iteration."""
        from .local import expand_local_solution
        rec, k, w, s, J = self.rec, self.k, self.w, self.s, self.J
        cols = []
        for i, _, _ in members:
            f = expand_local_solution(rec.dop, rec.point, rec.structure.labels[i], n_start)
            v = [[k(c) * self.z ** n for c in f.coeffs[n]] for n in range(n_start)]
            col = []
            for kk in range(1, s + 1):
                m = n_start - kk
                col += v[m] if m >= 0 else [k.zero()] * w
            for j in range(J):
                for l in range(w):
                    acc = k.zero()
                    for n in range(n_start):
                        acc = acc + v[n][l] * math.comb(n, j)
                    col.append(acc)
            cols.append(col)
        d = self.ring.d
        den = fmpz(1)
        for col in cols:
            for x in col:
                den = den * x.integral()[1] // den.gcd(x.integral()[1])
        mats = []
        for e in range(d):
            rows = []
            for r_ in range(self.dim):
                row = []
                for col in cols:
                    cs, dd = col[r_].integral()
                    row.append(cs[e] * (den // dd))
                rows.append(row)
            mats.append(fmpz_mat(rows))
        return mats, den

    def to_field(self, X, den):
        gen = self.k.gen()
        gp = [self.k.one()]
        for _ in range(self.ring.d - 1):
            gp.append(gp[-1] * gen)
        inv = self.k(fmpq(1, den))
        out = []
        for c in range(X[0].ncols()):
            col = []
            for r_ in range(self.dim):
                acc = self.k.zero()
                for e in range(self.ring.d):
                    x = X[e][r_, c]
                    if x != 0:
                        acc = acc + gp[e] * self.k(fmpq(x))
                col.append(acc * inv)
            out.append(col)
        return out


def _binsplit_singular(plan, rec, labels):
    prec, J, z = plan.prec, plan.jet_order, plan.z
    jets = {}
    total = 0
    with working_precision(prec):
        zb = z.to_ball(prec)
        t = zb.abs_upper()
        eps = _eps_arb(plan.eps)
        real = _real_setting(rec, zb)
        limit = plan.max_terms or (20 * prec + 2000)
    for ci, members in _collect(rec, labels).items():
        sp = _SingularSplitter(rec, ci, z, J)
        w, s = sp.w, sp.s
        n_start = rec.clusters[ci].max_offset + 1
        with working_precision(prec):
            amp = _amplification(rec, ci, zb, J, prec)
            tol = eps / (2 * amp)
            N = _estimate_terms(rec, zb, tol * 2 ** -8, J, [i for i, _, _ in members], limit)
            N = max(N, n_start, s, J)
            bounder = TailBounder(rec, ci, t, prec)
        X0, den0 = sp.initial(members, n_start)
        while True:
            X, den = X0, den0
            if N > n_start:
                P, dp = sp.product(n_start, N)
                X, den = sp.ring.mul(P, X), den * dp
            cols = sp.to_field(X, den)
            with working_precision(prec):
                zinv = 1 / zb
                res, ok = {}, True
                for (i, _, _), col in zip(members, cols):
                    hist = []
                    for kk in range(s):
                        n = N - 1 - kk
                        scale = zinv ** n if n >= 0 else acb(0)
                        hist.append([col[kk * w + l].to_ball(prec + 20) * scale
                                     for l in range(w)])
                    b = bounder.bound(N, hist, t, J)
                    if b is None or not all(x <= tol for x in b):
                        ok = False
                        break
                    inner = [[balls.add_error(col[(s + j) * w + l].to_ball(prec + 20)
                                              * zinv ** j, b[j], real)
                              for j in range(J)] for l in range(w)]
                    res[i] = combine_jets(inner, rec.clusters[ci].nu, zb, J, plan.branch)
            if ok:
                jets.update(res)
                total = max(total, N)
                break
            if N > limit:
                raise SummationError(f"no certified tail bound after {N} terms")
            N = N + max(8, N // 4)
    return SummationResult([jets[i] for i in labels], total, "binsplit")
