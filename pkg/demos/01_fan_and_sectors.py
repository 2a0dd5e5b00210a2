"""Stacky fans, divisor classes and twisted sectors.

Walks through the combinatorial layer on the weighted projective line
P(1,2): the kernel lattice and charge vectors, the semi-positivity gate,
and the Box elements (twisted sectors) with their ages.
"""

from fractions import Fraction

from toriccharge import (
    StackyFan,
    box,
    divisor_data,
    enumerate_keff,
    semipositive_check,
    validate,
)

# P(1,2): one smooth chart and one Z/2 orbifold chart.
fan = StackyFan.make(n=1, rays=[[1], [-2]], max_cones=[[0], [1]])
print("validation:", validate(fan))

# The kernel of (b_0, b_1) -> Z is spanned by e_1 = (2, 1); its dual class
# must land in the extended nef cone, which this choice does.
dd = divisor_data(fan, [[2, 1]])
print("divisor classes D_i in the dual basis:", dd.D)
print("semi-positive:", semipositive_check(dd))

for sigma in fan.max_cones:
    print(f"\nchart sigma = {sigma}: |G_sigma| = {dd.group_order(sigma)}")
    for el in box(dd, sigma):
        coords = ", ".join(str(c) for c in el.c)
        print(f"  sector v = {el.v}, fractional coords ({coords}), age {el.age}")

# Effective degrees of the twisted sector come in half-integer steps.
twisted = box(dd, (1,))[1]
degrees = enumerate_keff(dd, (1,), twisted, Fraction(4))
print("\ntwisted-sector degrees up to 4:", [str(d[0]) for d in degrees])
