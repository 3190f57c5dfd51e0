"""zeta(3) from the connection problem of Apery's operator.

The generating function of the Apery numbers satisfies a fourth-order
equation with singular points 0, xi = 17 - 12*sqrt(2) and 1/xi.  The
transition matrix from 0 to xi relates the local bases at the two points;
one of its entries reveals zeta(3).
"""

from fractions import Fraction

from flint import acb, arb

from holomnum import local_basis_monomials, numerical_transition_matrix, parse_operator
from holomnum.balls import working_precision
from holomnum.cli import format_ball
from holomnum.operators import singular_points

apery = parse_operator(
    "x^2*(x^2-34*x+1)*Dx^4 + 5*x*(2*x^2-51*x+1)*Dx^3"
    " + (25*x^2-418*x+4)*Dx^2 + (15*x-117)*Dx + 1")

xi = singular_points(apery)[1]
print("xi =", xi)
print("basis at 0: ", local_basis_monomials(apery, 0))
print("basis at xi:", local_basis_monomials(apery, xi))

# the real segment [0, 1] would cross xi, so stop there
tm = numerical_transition_matrix(apery, [0, xi], Fraction(1, 10**40))
print(f"working precision {tm.prec} bits, {tm.steps} steps")

with working_precision(tm.prec):
    c = tm[1, 2] + 5 * tm[1, 3]
    print("c              =", format_ball(c))
    lam = acb(0, -1) / (2 * arb.pi().sqrt()) * xi.eval_ball(tm.prec).sqrt() * c
    print("growth const.  =", format_ball(lam))
    print("6*m[1,3]/c     =", format_ball(6 * tm[1, 3] / c))
    print("zeta(3)        =", format_ball(arb.zeta(arb(3))))
