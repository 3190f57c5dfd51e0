"""Return probability of a walk on the four-dimensional fcc lattice.

The generating function of the walks satisfies a fourth-order operator
with a regular singular point at 1.  The entry (0, 3) of the transition
matrix from 0 to 1 gives the constant of interest.  Expect a few tens of
seconds.
"""

import time
from fractions import Fraction

from holomnum import local_basis_monomials, numerical_transition_matrix, parse_operator
from holomnum.cli import format_ball

op = parse_operator(
    "(-1+x)*x^3*(2+x)*(3+x)*(6+x)*(8+x)*(4+3*x)^2*Dx^4"
    " + 2*x^2*(4+3*x)*(-3456-2304*x+3676*x^2+4920*x^3+2079*x^4+356*x^5+21*x^6)*Dx^3"
    " + 6*x*(-5376-5248*x+11080*x^2+25286*x^3+19898*x^4+7432*x^5+1286*x^6+81*x^7)*Dx^2"
    " + 12*(-384+224*x+3716*x^2+7633*x^3+6734*x^4+2939*x^5+604*x^6+45*x^7)*Dx"
    " + 12*x*(256+632*x+702*x^2+382*x^3+98*x^4+9*x^5)")

print("basis at 0:", local_basis_monomials(op, 0))
print("basis at 1:", local_basis_monomials(op, 1))

t = time.perf_counter()
tm = numerical_transition_matrix(op, [0, 1], Fraction(1, 10**60))
print(f"{time.perf_counter() - t:.1f} s at {tm.prec} bits")
print("entry (0,3) =", format_ball(tm[0, 3]))
