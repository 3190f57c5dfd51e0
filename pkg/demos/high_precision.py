"""Thousands of digits by binary splitting.

At an ordinary point with an exact step, partial sums are computed as
exact products of integer matrices and converted to balls once.
"""

import time
from fractions import Fraction

from flint import arb

from holomnum import numerical_solution, parse_operator
from holomnum.balls import working_precision

for digits in (100, 1000, 5000):
    t = time.perf_counter()
    e = numerical_solution(parse_operator("Dx - 1"), [1], [0, 1],
                           Fraction(1, 10**digits), algorithm="binsplit")
    dt = time.perf_counter() - t
    with working_precision(int(digits * 3.33) + 64):
        ok = e.real.contains(arb(1).exp())
    print(f"{digits:5d} digits in {dt:.2f} s, radius {e.rad().str(3)}, encloses e: {ok}")

# arctan solves (1 + x^2) f'' + 2x f' = 0; Machin's formula gives pi
atan = parse_operator("(1 + x^2)*Dx^2 + 2*x*Dx")
v = numerical_solution(atan, [0, 1], [0, "1/5"], Fraction(1, 10**500), algorithm="binsplit")
v2 = numerical_solution(atan, [0, 1], [0, "1/239"], Fraction(1, 10**500), algorithm="binsplit")
with working_precision(1800):
    pi = 4 * (4 * v - v2)
    print("Machin:", pi.real.str(60), pi.real.overlaps(arb.pi()))
