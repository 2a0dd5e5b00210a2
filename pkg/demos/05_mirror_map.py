"""Mirror map extraction.

The 1/z coefficient of the localized series is the mirror map; near the
large radius limit it degenerates to t0 plus the chart part of the linear
coordinates.  Extracted by Richardson extrapolation along a ladder of z
values, with the extrapolation residual reported per fixed point.
"""

import math

from toriccharge import EquivariantParams, StackyFan, divisor_data, mirror_map_extract

fan = StackyFan.make(
    n=2, rays=[[1, 0], [0, 1], [-1, -1]], max_cones=[[0, 1], [1, 2], [0, 2]]
)
dd = divisor_data(fan, [[1, 1, 1]])
w = [0.9 - 0.3j, -0.7 + 0.45j, 0.31 + 1.2j]
t0 = 0.2 - 0.4j

for q in (1e-2, 1e-4):
    params = EquivariantParams.make(z=1.0, w=w, t0=t0, q=[q])
    values = mirror_map_extract(dd, params, 8, z_base=64.0, levels=6)
    print(f"\nq = {q}")
    for (sigma, v), out in values.items():
        # Large-radius prediction: t0 + (log q) * weight of the outside ray.
        outside = [j for j in range(fan.r) if j not in sigma][0]
        predicted = t0 + w[outside] * math.log(q)
        gap = abs(out.tau - predicted)
        print(
            f"  (sigma={sigma}, v={v}): tau = {out.tau:.8g}  "
            f"residual {out.residual:.1e}  |tau - large-radius| = {gap:.2e}"
        )
