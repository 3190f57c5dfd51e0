"""Monodromy of a Calabi-Yau operator around its singular point at 1.

The loop starts and ends at 1/2; its transition matrix is the monodromy
in the canonical basis at 1/2.  The paper-scale version asks for 1000
digits; 100 are enough to see the structure.
"""

from fractions import Fraction

from holomnum import numerical_transition_matrix, parse_operator
from holomnum.balls import working_precision
from holomnum.cli import format_ball

cy = parse_operator(
    "(x*Dx)^4 - x*(65*(x*Dx)^4 + 130*(x*Dx)^3 + 105*(x*Dx)^2 + 40*x*Dx + 6)"
    " + 4*x^2*(4*x*Dx + 3)*(x*Dx + 1)^2*(4*x*Dx + 5)")

loop = ["1/2", "1-i/2", "3/2", "1+i/2", "1/2"]
tm = numerical_transition_matrix(cy, loop, Fraction(1, 10**100))
print(f"{tm.steps} steps, {tm.prec} bits")
print("mat[0,0] =", format_ball(tm[0, 0]))

# the monodromy is unipotent: (M - 1)^2 has tiny entries compared with M - 1
with working_precision(tm.prec):
    m = tm.matrix
    n = m - m.__class__([[int(i == j) for j in range(4)] for i in range(4)])
    print("max |(M-1)^2| =", format_ball(max(((n * n)[i, j]).abs_upper()
                                             for i in range(4) for j in range(4))))
