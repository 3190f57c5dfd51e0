"""Elementary functions as solutions of differential equations.

A solution is named by an operator, a path, and initial values in the
canonical basis at the path start (f(x0), f'(x0), f''(x0)/2, ...).
"""

from fractions import Fraction

from holomnum import numerical_solution, numerical_transition_matrix, parse_operator
from holomnum.cli import format_ball, format_matrix

# exp is the solution of f' = f with f(0) = 1
exp_op = parse_operator("Dx - 1")
print("e       =", format_ball(numerical_solution(exp_op, [1], [0, 1], Fraction(1, 10**40))))

# erf solves f'' + 2x f' = 0; continue from 0 to i
erf_op = parse_operator("Dx^2 + 2*x*Dx")
print("erf(i)  =", format_ball(numerical_solution(erf_op, [0, "2/sqrt(pi)"], [0, "i"])))

# log(x) is the solution of x f'' + f' = 0 with f(1) = 0, f'(1) = 1.
# Going around 0 from above or below picks a different branch.
log_op = parse_operator("x*Dx^2 + Dx")
for path in ([1, "i", -1], [1, "-i", -1]):
    v = numerical_solution(log_op, [0, 1], path)
    print(f"log(-1) along {path} =", format_ball(v))

# a full transition matrix: columns are the jets at 2 of the basis at 1
print(format_matrix(numerical_transition_matrix(log_op, [1, 2], 1e-10).matrix))
