"""The chart limit of the oscillatory integral.

On the projective line, after normalizing by exp(t0/z) q^{w_2/z}, the
integral over the cycle of O(l_1 D_1 + l_2 D_2) converges as q -> 0 to

    z^s Gamma(s) exp(2 pi i l_1 (w_1 - w_2)/z),   s = (w_2 - w_1)/z,

which is exactly the decomposition coefficient h of the chart.  The table
shows the convergence rate in q.
"""

import cmath
import math

from toriccharge import (
    EquivariantParams,
    QuadratureConfig,
    StackyFan,
    box,
    characteristic_cycle,
    divisor_data,
    eta_sigma,
    h_coefficient,
    integrate_cycle,
)

fan = StackyFan.make(n=1, rays=[[1], [-1]], max_cones=[[0], [1]])
dd = divisor_data(fan, [[1, 1]])

z = 1.0
t0 = 0.3 + 0.1j
# Weights in the chart region: Re(w_1 - w_2) well below zero.
w = [-3.0 + 0.4j, 1.2 - 0.3j]
l = [1, 2]

chain = characteristic_cycle(fan, l)
splitting = eta_sigma(dd, (0,))
target = h_coefficient(dd, (0,), box(dd, (0,))[0], l, z, w)
print(f"closed-form chart coefficient h = {target:.12g}\n")
print(f"{'q':>10}   {'normalized integral':>38}   {'rel. gap':>10}")
for q in (1e-2, 1e-3, 1e-4, 1e-5):
    params = EquivariantParams.make(z=z, w=w, t0=t0, q=[q])
    res = integrate_cycle(chain, params, splitting, QuadratureConfig(adaptive_tol=1e-11))
    lhs = cmath.exp(t0 / z) * cmath.exp((w[1] / z) * math.log(q)) * res.value
    print(f"{q:10.0e}   {lhs:38.12g}   {abs(lhs - target) / abs(target):10.2e}")
