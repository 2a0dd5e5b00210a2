"""The central-charge identity, both sides.

For each test geometry: integrate exp(-W~/z) over the characteristic cycle
of an ample bundle (quadrature), then sum the h-weighted localized series
over the torus fixed points of the inertia stack (with z -> -z in the
series argument), and compare.
"""

from fractions import Fraction

from toriccharge import (
    EquivariantParams,
    QuadratureConfig,
    StackyFan,
    characteristic_cycle,
    divisor_data,
    eta_sigma,
    fixed_points,
    h_coefficient,
    ifunction_localized,
    integrate_cycle,
)

CASES = [
    (
        "projective line",
        StackyFan.make(n=1, rays=[[1], [-1]], max_cones=[[0], [1]]),
        [[1, 1]],
        [1, 2],
        [0.01],
        25,
        [-1.9 + 0.3j, 0.8 - 0.2j],
    ),
    (
        "P(1,2) orbifold",
        StackyFan.make(n=1, rays=[[1], [-2]], max_cones=[[0], [1]]),
        [[2, 1]],
        [1, 1],
        [0.01],
        25,
        [-1.9 + 0.3j, 0.8 - 0.2j],
    ),
    (
        "projective plane",
        StackyFan.make(
            n=2, rays=[[1, 0], [0, 1], [-1, -1]], max_cones=[[0, 1], [1, 2], [0, 2]]
        ),
        [[1, 1, 1]],
        [1, 1, 1],
        [0.005],
        20,
        [0.9 - 0.3j, -0.7 + 0.45j, 0.31 + 1.2j],
    ),
]

z, t0 = 1.0, 0.3 + 0.1j
for name, fan, basis, l, q, N, w in CASES:
    dd = divisor_data(fan, basis)
    params = EquivariantParams.make(z=z, w=w, t0=t0, q=q)
    chain = characteristic_cycle(fan, l)
    lhs = integrate_cycle(
        chain, params, eta_sigma(dd, fan.max_cones[0]), QuadratureConfig(adaptive_tol=1e-9)
    )
    rhs = 0j
    print(f"\n{name}: bundle l = {l}, q = {q}")
    for fp in fixed_points(dd):
        h = h_coefficient(dd, fp.sigma, fp.v, l, z, w)
        ser = ifunction_localized(dd, fp.sigma, fp.v, params, Fraction(N), z_value=-z)
        contrib = h * ser.evaluate(t0, q)
        rhs += contrib
        print(f"  fixed point (sigma={fp.sigma}, v={fp.v.v}): {contrib:.8g}")
    resid = abs(lhs.value - rhs) / max(abs(lhs.value), abs(rhs))
    print(f"  integral  = {lhs.value:.12g}")
    print(f"  series    = {rhs:.12g}")
    print(f"  relative residual = {resid:.3e}")
