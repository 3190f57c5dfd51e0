"""K0(1) from initial values at the regular singular point 0.

At a singular point the canonical basis is indexed by monomials
x^mu log(x)^k; initial values are the coefficients of those monomials.
"""

from holomnum import local_basis_monomials, numerical_solution, parse_operator
from holomnum.cli import format_ball
from holomnum.local import expand_local_solution

bessel = parse_operator("x*Dx^2 + Dx - x")

basis = local_basis_monomials(bessel, 0)
print("canonical basis at 0:", basis)

# first few terms of the element starting with log(x): log(x)*I0(x) + ...
f = expand_local_solution(bessel, 0, basis[0], 7)
for n, u in enumerate(f.coeffs):
    print(f"  x^{n}: {u[0]}  +  {u[1]} * log(x)")

# K0(x) = -log(x) I0(x) + (log 2 - gamma) I0(x) + ...
k0 = numerical_solution(bessel, [-1, "log(2)-euler_gamma"], [0, 1], 1e-10)
print("K0(1) =", format_ball(k0))
