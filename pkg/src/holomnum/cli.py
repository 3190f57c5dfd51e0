"""Command-line front end.

    holomnum eval --op "Dx - 1" --ini 1 --path 0,1 --eps 1e-40
    holomnum transition --op "x*Dx^2 + Dx" --path 1,2 --eps 1e-10
    holomnum local-basis --op "x*Dx^2 + Dx - x" --point 0
    holomnum singularities --op "x^2*(x^2-34*x+1)*Dx^4 + ..."

Balls print as ``[mid +/- rad]``.  The midpoint is rounded to the digits
the radius leaves meaningful and the rounding error is added to the
radius, so the printed interval always contains the computed one.

Exit status: 0 on success (a radius above ``--eps`` only triggers a
warning), 1 on usage errors, 2 when every precision attempt failed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

from flint import acb, arb

from .balls import BranchCutError, PrecisionError, working_precision
from .exact import ConstantExpr, DomainError, parse_point
from .local import IrregularPointError, local_basis_monomials
from .operators import (PointKind, UnsupportedExponentError, is_regular_singular,
                        parse_operator, singular_points)
from .path import CertificationError, PathError, numerical_solution, numerical_transition_matrix
from .syntax import ParseError

__all__ = ["format_ball", "format_matrix", "parse_ball", "split_list", "main"]

EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2


# -- ball rendering

def _exact(x):
    """Exact rational value of an exact arb (midpoint or radius)."""
    man, exp = x.man_exp()
    man, exp = int(man), int(exp)
    return Fraction(man * 2 ** exp) if exp >= 0 else Fraction(man, 2 ** -exp)


def _floor_log10(q):
    """floor(log10(q)) for a positive Fraction."""
    e = len(str(q.numerator)) - len(str(q.denominator))
    while Fraction(10) ** e > q:
        e -= 1
    while Fraction(10) ** (e + 1) <= q:
        e += 1
    return e


def _round_up_3(r):
    """Smallest k*10^j >= r with k < 1000, as (k, j)."""
    if r == 0:
        return 0, 0
    j = _floor_log10(r) - 2
    k = math.ceil(r / Fraction(10) ** j)
    if k >= 1000:
        j += 1
        k = math.ceil(r / Fraction(10) ** j)
    while k % 10 == 0:
        k //= 10
        j += 1
    return k, j


def _sci(k, j):
    """Decimal string of k*10^j (k a nonnegative integer)."""
    if k == 0:
        return "0"
    digits = str(k)
    e = j + len(digits) - 1
    if -4 <= e < 20:
        if j >= 0:
            return digits + "0" * j
        point = len(digits) + j
        if point > 0:
            return digits[:point] + "." + digits[point:]
        return "0." + "0" * (-point) + digits
    mant = digits[0] + ("." + digits[1:] if len(digits) > 1 else "")
    return f"{mant}e{e:+d}"


def _signed(k, j, neg):
    s = _sci(k, j)
    return "-" + s if neg and k != 0 else s


def _real_parts(x, digits=None):
    """(mid string, rad string) of an arb with print rounding absorbed;
    mid is None when the ball is centered at zero after rounding."""
    m, r = _exact(x.mid()), _exact(x.rad())
    if r == 0:
        if m == 0:
            return "0", "0"
        # exact dyadic: print exactly when the expansion is short
        den = m.denominator
        twos = den.bit_length() - 1
        if den == 1 << twos and twos <= 64:
            k = abs(m.numerator) * 5 ** twos
            return _signed(k, -twos, m < 0), "0"
        # long exact dyadic: 30 digits plus an honest radius
        r = abs(m) / Fraction(10) ** (digits or 30)
    if abs(m) <= r:
        k, j = _round_up_3(abs(m) + r)
        return None, _sci(k, j)
    q_exp = _floor_log10(r)
    q = Fraction(10) ** q_exp
    k = round(abs(m) / q)
    err = abs(abs(m) - k * q)
    rk, rj = _round_up_3(r + err)
    return _signed(k, q_exp, m < 0), _sci(rk, rj)


def _format_real(x):
    mid, rad = _real_parts(x)
    if rad == "0":
        return mid
    if mid is None:
        return f"[+/- {rad}]"
    return f"[{mid} +/- {rad}]"


def format_ball(b, style="text"):
    """Render a real or complex ball; see the module docstring.

    ``style="json"`` returns a JSON string
    ``{"real": {"mid": ..., "rad": ...}, "imag": {...}}``.
    """
    z = b if isinstance(b, acb) else acb(b)
    if style == "json":
        return json.dumps(_ball_json(z))
    if style != "text":
        raise ValueError(f"unknown style {style!r}")
    re, im = z.real, z.imag
    im_zero = im.is_exact() and im.is_zero()
    re_zero = re.is_exact() and re.is_zero()
    if im_zero:
        return _format_real(re)
    if re_zero:
        return f"{_format_real(im)}*I"
    return f"{_format_real(re)} + {_format_real(im)}*I"


def _ball_json(z):
    out = {}
    for name, part in (("real", z.real), ("imag", z.imag)):
        mid, rad = _real_parts(part)
        out[name] = {"mid": mid or "0", "rad": rad}
    return out


def format_matrix(m, style="text"):
    rows = [[m[i, j] for j in range(m.ncols())] for i in range(m.nrows())]
    if style == "json":
        return json.dumps([[_ball_json(x) for x in row] for row in rows])
    return "\n".join("[" + ", ".join(format_ball(x) for x in row) + "]" for row in rows)


def _read_real(s):
    s = s.strip()
    if s.startswith("["):
        inner = s[1:-1].strip()
        if inner.startswith("+/-"):
            return arb(0, _read_exact(inner[3:]))
        mid, rad = inner.split("+/-")
        return arb(_read_exact(mid), _read_exact(rad))
    return arb(_read_exact(s))


def _read_exact(s):
    from flint import fmpq
    q = Fraction(s.strip())
    return fmpq(q.numerator, q.denominator)


def parse_ball(text, prec=None):
    """Read back the text produced by :func:`format_ball`."""
    prec = prec or max(64, 4 * len(text) + 64)
    with working_precision(prec):
        t = text.strip()
        if not t.endswith("*I"):
            return acb(_read_real(t))
        body = t[:-2]
        depth = 0
        for i, ch in enumerate(body):
            depth += ch == "["
            depth -= ch == "]"
            if depth == 0 and body[i:i + 3] == " + ":
                return acb(_read_real(body[:i]), _read_real(body[i + 3:]))
        return acb(0, _read_real(body))


# -- argument handling

def split_list(text):
    """Split a comma-separated list, ignoring commas inside parentheses."""
    items, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            items.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    items.append("".join(cur).strip())
    if any(not s for s in items):
        raise ParseError(f"empty item in list {text!r}")
    return items


def _eps(text):
    try:
        q = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"invalid eps {text!r}")
    if q <= 0:
        raise argparse.ArgumentTypeError("eps must be positive")
    return q


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="holomnum", description="Rigorous evaluation of D-finite functions.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, path=True):
        sp.add_argument("--op", required=True, help='operator, e.g. "x*Dx^2 + Dx - x"')
        sp.add_argument("--format", choices=("text", "json"), default="text")
        if path:
            sp.add_argument("--path", required=True,
                            help='comma-separated exact points, e.g. "0,1" or "1,i,-1"')
            sp.add_argument("--eps", type=_eps, default=Fraction(1, 10 ** 16))
            sp.add_argument("--algorithm", choices=("auto", "naive", "binsplit"), default="auto")

    ev = sub.add_parser("eval", help="value of a solution at the end of a path")
    common(ev)
    ev.add_argument("--ini", required=True,
                    help='initial values in the canonical basis, e.g. "-1, log(2)-euler_gamma"')
    common(sub.add_parser("transition", help="transition matrix along a path"))
    lb = sub.add_parser("local-basis", help="distinguished monomials of the canonical basis")
    common(lb, path=False)
    lb.add_argument("--point", required=True)
    common(sub.add_parser("singularities", help="singular points with enclosures"), path=False)
    return p


def run(args, out=None):
    """Execute parsed arguments; returns the exit status."""
    out = out or sys.stdout
    dop = parse_operator(args.op)
    fmt = args.format
    if args.command == "eval":
        ini = [ConstantExpr.parse(s) for s in split_list(args.ini)]
        path = [parse_point(s) for s in split_list(args.path)]
        sol = numerical_solution(dop, ini, path, args.eps, args.algorithm, full=True)
        if fmt == "json":
            print(json.dumps({"value": _ball_json(sol.value), "precision": sol.prec,
                              "warning": sol.warning}), file=out)
        else:
            print(format_ball(sol.value), file=out)
        _warn(sol.warning)
    elif args.command == "transition":
        path = [parse_point(s) for s in split_list(args.path)]
        tm = numerical_transition_matrix(dop, path, args.eps, args.algorithm)
        if fmt == "json":
            print(json.dumps({"matrix": json.loads(format_matrix(tm.matrix, "json")),
                              "source": tm.source.monomials(), "target": tm.target.monomials(),
                              "precision": tm.prec, "warning": tm.warning}), file=out)
        else:
            print(format_matrix(tm.matrix), file=out)
        _warn(tm.warning)
    elif args.command == "local-basis":
        monos = local_basis_monomials(dop, parse_point(args.point)).monomials()
        if fmt == "json":
            print(json.dumps(monos), file=out)
        else:
            print(", ".join(monos), file=out)
    else:
        pts = singular_points(dop)
        rows = []
        for p in pts:
            kind = ("irregular" if is_regular_singular(dop, p) is PointKind.IRREGULAR
                    else "regular")
            with working_precision(64):
                rows.append((p, p.eval_ball(64), kind))
        if fmt == "json":
            print(json.dumps([{"point": repr(p), "ball": _ball_json(b), "kind": k}
                              for p, b, k in rows]), file=out)
        else:
            for p, b, k in rows:
                print(f"{format_ball(b)}\t{k}\t{p!r}", file=out)
    return EXIT_OK


def _warn(msg):
    if msg:
        print(f"warning: {msg}", file=sys.stderr)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except CertificationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except (ParseError, PathError, DomainError, BranchCutError, IrregularPointError,
            UnsupportedExponentError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PrecisionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
