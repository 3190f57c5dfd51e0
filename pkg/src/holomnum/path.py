"""Analytic continuation along paths.

A path is a list of exact vertices.  It is broken into steps whose length
is at most half the distance from the expansion point to the nearest other
singularity; each step yields a transition matrix by summing local
expansions, and the matrices are multiplied in path order.  Endpoints may
be regular singular points: leaving one uses its canonical log-series
basis, entering one inverts the matrix of the reverse step.

The whole computation is repeated at doubled working precision until the
result meets the accuracy goal or the retry budget runs out.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass
from fractions import Fraction

from flint import acb, acb_mat, arb, fmpq

from . import balls
from .balls import PrecisionError, working_precision
from .exact import ConstantExpr, ExactPoint, as_point
from .local import local_recurrence
from .numberfield import QQ, QQI, NFElem, common_field
from .operators import PointKind, is_regular_singular, singular_points
from .summation import SummationPlan, summation

__all__ = ["Path", "Step", "TransitionMatrix", "PathError", "CertificationError",
           "subdivide", "step_transition", "singular_step",
           "numerical_transition_matrix", "numerical_solution", "max_retries"]

log = logging.getLogger(__name__)

DEFAULT_EPS = Fraction(1, 10 ** 16)
STEP_RATIO = Fraction(1, 2)


class PathError(ValueError):
    """The path is invalid for the operator."""


class CertificationError(PrecisionError):
    """Every attempt of the precision loop failed."""


def max_retries():
    env = os.environ.get("HOLOMNUM_MAX_RETRIES")
    if env is None:
        return 8
    try:
        n = int(env)
    except ValueError:
        raise ValueError(f"HOLOMNUM_MAX_RETRIES must be an integer, got {env!r}")
    if n < 0:
        raise ValueError("HOLOMNUM_MAX_RETRIES must be nonnegative")
    return n


@dataclass(frozen=True)
class Path:
    vertices: tuple

    def __init__(self, vertices):
        vs = tuple(as_point(v) for v in vertices)
        if not vs:
            raise PathError("a path needs at least one vertex")
        object.__setattr__(self, "vertices", vs)

    @classmethod
    def coerce(cls, p):
        return p if isinstance(p, Path) else cls(p)

    def __len__(self):
        return len(self.vertices)

    def __repr__(self):
        return "Path([" + ", ".join(repr(v) for v in self.vertices) + "])"


@dataclass(frozen=True)
class Step:
    """``kind`` is "ordinary", "from_singular" or "to_singular"."""

    x0: ExactPoint
    x1: ExactPoint
    kind: str

    @property
    def expansion_point(self):
        return self.x1 if self.kind == "to_singular" else self.x0


@dataclass
class TransitionMatrix:
    """Ball matrix mapping coordinates in the canonical basis at the path
    start to coordinates in the canonical basis at the path end."""

    matrix: acb_mat
    source: object
    target: object
    radius: arb
    prec: int
    steps: int
    warning: str = None

    def __getitem__(self, idx):
        return self.matrix[idx]

    @property
    def shape(self):
        return self.matrix.nrows(), self.matrix.ncols()


# -- geometry

class _Singularities:

    def __init__(self, dop):
        self.points = singular_points(dop)
        self._balls = {}

    def balls(self, prec=128):
        if prec not in self._balls:
            self._balls[prec] = [p.eval_ball(prec) for p in self.points]
        return self._balls[prec]

    def is_singular(self, p):
        return any(p == s for s in self.points)

    def rho(self, c, prec=128):
        """Lower bound for the distance from ``c`` to the other singularities
        (None when there are none)."""
        with working_precision(prec):
            cb = c.eval_ball(prec)
            best = None
            for s, sb in zip(self.points, self.balls(prec)):
                if s == c:
                    continue
                d = arb((cb - sb).abs_lower().lower())
                best = d if best is None else best.min(d)
            return best

    def segment_clear(self, a, b, prec=128):
        """Certify that the open segment (a, b) meets no singularity."""
        with working_precision(prec):
            ab, bb = a.eval_ball(prec), b.eval_ball(prec)
            d = bb - ab
            dd = (d * d.conjugate()).real
            for s, sb in zip(self.points, self.balls(prec)):
                if s == a or s == b:
                    continue
                rel = sb - ab
                t = (rel * d.conjugate()).real / dd
                if t < 0:
                    dist = (sb - ab).abs_lower()
                elif t > 1:
                    dist = (sb - bb).abs_lower()
                else:
                    # distance to the line through a and b
                    dist = ((rel * d.conjugate()).imag.abs_lower()) / dd.sqrt()
                if not dist > 0:
                    return False
            return True


def _gaussian(re, im):
    return ExactPoint.gaussian(re, im)


def _round_point(zb, bits, keep_real):
    """A Gaussian dyadic point near the ball ``zb`` on a grid of 2^-bits."""
    scale = fmpq(2) ** bits
    def rnd(x):
        m = x.mid()
        v = (m * arb(scale)).floor()
        from .numberfield import dyadic
        return dyadic(v.mid()) / scale
    re = rnd(zb.real)
    im = fmpq(0) if keep_real else rnd(zb.imag)
    return _gaussian(re, im)


def _grid_bits(rho):
    # grid fine enough that rounding moves points by < rho/64
    with working_precision(64):
        if rho is None or not rho.is_finite():
            return 8
        return max(8, int(-math.floor(float(rho.log() / arb(2).log()))) + 8)


def _is_real(p):
    return p.is_real()


def _point_on(a, b, lam, prec):
    """Ball for a + lam (b - a)."""
    with working_precision(prec):
        ab, bb = a.eval_ball(prec), b.eval_ball(prec)
        return ab + (bb - ab) * arb(lam)


def subdivide(path, dop):
    """Break ``path`` into certified steps (see the module docstring)."""
    path = Path.coerce(path)
    sing = _Singularities(dop)
    vs = list(path.vertices)
    # drop repeated consecutive vertices
    dedup = [vs[0]]
    for v in vs[1:]:
        if not v == dedup[-1]:
            dedup.append(v)
    vs = dedup
    kinds = []
    for i, v in enumerate(vs):
        k = is_regular_singular(dop, v)
        if k is PointKind.IRREGULAR:
            raise PathError(f"{v!r} is an irregular singular point")
        if k is PointKind.REGULAR_SINGULAR and 0 < i < len(vs) - 1:
            raise PathError(f"interior vertex {v!r} is a singular point")
        kinds.append(k)
    for a, b in zip(vs, vs[1:]):
        if not sing.segment_clear(a, b):
            raise PathError(f"segment {a!r} -> {b!r} passes through a singular point")
    if len(vs) == 1:
        return []
    steps = []
    start_singular = kinds[0] is PointKind.REGULAR_SINGULAR
    end_singular = kinds[-1] is PointKind.REGULAR_SINGULAR
    cur = vs[0]
    nseg = len(vs) - 1
    for i in range(nseg):
        a, b = vs[i], vs[i + 1]
        last = i == nseg - 1
        target = b
        approach = None
        if last and end_singular:
            approach = _approach_point(sing, b, a, both=(nseg == 1 and start_singular))
            target = approach
        seg_steps, cur = _walk(sing, cur, target, a, b, first_singular=(i == 0 and start_singular))
        steps.extend(seg_steps)
        if approach is not None:
            steps.append(Step(approach, b, "to_singular"))
            cur = b
    return steps


def _approach_point(sing, s, other, both):
    """Ordinary point on the segment from the singular point ``s`` towards
    ``other``, within half the convergence radius at ``s``."""
    rho = sing.rho(s)
    prec = 128
    with working_precision(prec):
        dist = (other.eval_ball(prec) - s.eval_ball(prec)).abs_upper()
        lam = fmpq(1)
        if rho is not None:
            lim = rho * arb(fmpq(9, 20)) / dist
            if not lim >= 1:
                lam = _dyadic_below(lim)
        if both:
            lam = min(lam, fmpq(1, 2))
        if lam == 1:
            return other
        zb = _point_on(s, other, lam, prec)
        bits = _grid_bits(rho)
        p = _round_point(zb, bits, _is_real(s) and _is_real(other))
        if rho is not None and not (p.eval_ball(prec) - s.eval_ball(prec)).abs_upper() <= rho / 2:
            raise PathError("could not place an ordinary point near a singular endpoint")
        return p


def _dyadic_below(x):
    with working_precision(64):
        lo = x.lower()
        if not lo > 0:
            raise PathError("segment too close to a singular point")
        e = math.floor(float(lo.log() / arb(2).log())) - 2
        m = (lo * arb(2) ** (-e)).floor()
        from .numberfield import dyadic
        return dyadic(m.mid()) * fmpq(2) ** e


def _walk(sing, cur, target, seg_a, seg_b, first_singular):
    """Steps from ``cur`` to ``target`` along the segment [seg_a, seg_b]."""
    prec = 128
    steps = []
    singular_here = first_singular
    # exact parameter of the current point on the user segment
    while not cur == target:
        rho = sing.rho(cur)
        with working_precision(prec):
            cb, tb = cur.eval_ball(prec), target.eval_ball(prec)
            dist = (tb - cb).abs_upper()
            if rho is None or dist <= rho * arb(STEP_RATIO.numerator) / STEP_RATIO.denominator:
                nxt = target
            else:
                lam = _dyadic_below(rho * arb(fmpq(9, 20)) / dist)
                zb = cb + (tb - cb) * arb(lam)
                nxt = _round_point(zb, _grid_bits(rho),
                                   _is_real(cur) and _is_real(target))
                nb = nxt.eval_ball(prec)
                if not (nb - cb).abs_upper() <= rho / 2:
                    raise PathError("step size control failed")
                # the detour between nxt and the segment stays inside the
                # singularity-free disk around cur
                if not _near_segment(nb, seg_a, seg_b, cb, rho, prec):
                    raise PathError("rounded point left the convergence disk")
        steps.append(Step(cur, nxt, "from_singular" if singular_here else "ordinary"))
        singular_here = False
        cur = nxt
    return steps, cur


def _near_segment(nb, a, b, cb, rho, prec):
    # The projection of nb onto [a, b] lies within rho of cb, so the
    # quadrilateral formed with the segment sits inside the disk.
    ab, bb = a.eval_ball(prec), b.eval_ball(prec)
    d = bb - ab
    dd = (d * d.conjugate()).real
    t = ((nb - ab) * d.conjugate()).real / dd
    proj = ab + d * t
    return bool((proj - cb).abs_upper() < rho) and bool((nb - cb).abs_upper() < rho)


# -- single steps

def _structure(dop, x):
    return local_recurrence(dop, x).structure


def _jets_to_matrix(jets, r):
    return acb_mat([[jets[j][i] for j in range(len(jets))] for i in range(r)])


def _displacement(x0, x1):
    x0, x1 = as_point(x0), as_point(x1)
    try:
        return x1.value - x0.value
    except TypeError:
        return None


def step_transition(dop, x0, x1, eps, prec, algorithm="auto"):
    """Transition matrix from the canonical basis at the ordinary point
    ``x0`` to the one at the ordinary point ``x1``."""
    x0, x1 = as_point(x0), as_point(x1)
    r = dop.order
    if x0 == x1:
        return balls.identity(r)
    z = _displacement(x0, x1)
    if z is None:
        with working_precision(prec):
            z = x1.eval_ball(prec) - x0.eval_ball(prec)
        algorithm = "naive"
    plan = SummationPlan(dop, x0, z, r, eps, prec, algorithm)
    res = summation(plan)
    with working_precision(prec):
        return _jets_to_matrix(res.jets, r)


def singular_step(dop, x0, x1, eps, prec, branch="principal", algorithm="auto"):
    """Matrix whose columns are the jets at the ordinary point ``x1`` of the
    canonical basis at the regular singular point ``x0``."""
    x0, x1 = as_point(x0), as_point(x1)
    r = dop.order
    z = _displacement(x0, x1)
    if z is None:
        with working_precision(prec):
            z = x1.eval_ball(prec) - x0.eval_ball(prec)
        algorithm = "naive"
    plan = SummationPlan(dop, x0, z, r, eps, prec, algorithm, branch)
    res = summation(plan)
    with working_precision(prec):
        return _jets_to_matrix(res.jets, r)


def _step_matrix(dop, step, eps, prec, algorithm):
    if step.kind == "ordinary":
        return step_transition(dop, step.x0, step.x1, eps, prec, algorithm)
    if step.kind == "from_singular":
        return singular_step(dop, step.x0, step.x1, eps, prec, algorithm=algorithm)
    m = singular_step(dop, step.x1, step.x0, eps, prec, algorithm=algorithm)
    return balls.mat_solve(m, balls.identity(dop.order), prec)


def _product(dop, steps, eps, prec, algorithm):
    r = dop.order
    total = balls.identity(r)
    for st in steps:
        m = _step_matrix(dop, st, eps, prec, algorithm)
        total = balls.mat_mul(m, total, prec)
    return total


def _precision_loop(dop, path, eps, algorithm, finish):
    """Run ``finish(matrix, prec)`` -> (value, radius) inside the retry loop."""
    eps = Fraction(eps) if not isinstance(eps, Fraction) else eps
    if eps <= 0:
        raise ValueError("eps must be positive")
    steps = subdivide(path, dop)
    nsteps = len(steps)
    p0 = _bits(eps) + 10 * nsteps + 50
    retries = max_retries()
    eps_q = fmpq(eps.numerator, eps.denominator)
    best = None
    last_exc = None
    for attempt in range(retries + 1):
        prec = p0 << attempt
        step_eps = eps_q / (max(nsteps, 1) * fmpq(2) ** (20 + 8 * attempt))
        try:
            with working_precision(prec):
                mat = _product(dop, steps, step_eps, prec, algorithm)
                value, rad = finish(mat, prec)
        except PrecisionError as exc:
            log.debug("attempt at %d bits failed: %s", prec, exc)
            last_exc = exc
            continue
        best = (value, rad, prec, mat)
        with working_precision(64):
            if rad <= arb(eps_q):
                return best + (None, nsteps)
        log.debug("attempt at %d bits reached radius %s", prec, rad)
    if best is None:
        raise CertificationError(f"all {retries + 1} attempts failed: {last_exc}")
    return best + ("accuracy goal not reached", nsteps)


def _bits(eps):
    """ceil(-log2(eps)), clamped at 0."""
    if eps >= 1:
        return 0
    p = eps.denominator.bit_length() - eps.numerator.bit_length() - 1
    while Fraction(1, 2 ** p) > eps:
        p += 1
    while p > 0 and Fraction(1, 2 ** (p - 1)) <= eps:
        p -= 1
    return p


def numerical_transition_matrix(dop, path, eps=DEFAULT_EPS, algorithm="auto"):
    """Transition matrix along ``path`` between the canonical local bases at
    its endpoints.  Every entry encloses the exact value; the radius goal
    ``eps`` is best effort (see ``TransitionMatrix.warning``)."""
    path = Path.coerce(path)
    def finish(mat, prec):
        return mat, balls.max_radius(mat)
    mat, rad, prec, _, warning, nsteps = _precision_loop(dop, path, eps, algorithm, finish)
    src = _structure(dop, path.vertices[0])
    dst = _structure(dop, path.vertices[-1])
    return TransitionMatrix(mat, src, dst, rad, prec, nsteps, warning)


def _ini_ball(v, prec):
    if isinstance(v, acb):
        return v
    if isinstance(v, arb):
        return acb(v)
    if isinstance(v, (ConstantExpr, str)):
        return ConstantExpr.coerce(v).eval_ball(prec)
    if isinstance(v, (ExactPoint, NFElem)):
        return as_point(v).eval_ball(prec)
    if isinstance(v, complex):
        return acb(v.real, v.imag)
    return balls.to_ball(Fraction(v) if isinstance(v, float) else v, prec)


@dataclass
class Solution:
    value: acb
    radius: arb
    prec: int
    steps: int
    warning: str = None


def numerical_solution(dop, ini, path, eps=DEFAULT_EPS, algorithm="auto", full=False):
    """Value at the path end of the solution with initial values ``ini``
    in the canonical basis at the path start.

    At a singular endpoint the value is the coefficient of the first
    canonical monomial there.  With ``full=True`` a :class:`Solution`
    record is returned instead of the bare ball.
    """
    path = Path.coerce(path)
    ini = list(ini)
    if len(ini) != dop.order:
        raise ValueError(f"expected {dop.order} initial values, got {len(ini)}")
    def finish(mat, prec):
        with working_precision(prec):
            vec = acb_mat([[_ini_ball(v, prec)] for v in ini])
            val = (mat * vec)[0, 0]
            return val, balls.radius(val)
    val, rad, prec, _, warning, nsteps = _precision_loop(dop, path, eps, algorithm, finish)
    if full:
        return Solution(val, rad, prec, nsteps, warning)
    return val
