"""Central charges of equivariant line bundles on semi-positive toric orbifolds.

The package computes both sides of a central-charge identity at desk scale:
the oscillatory integral of the equivariant superpotential over the
characteristic cycle of a line bundle, and the Gamma-class-weighted sum of
localized hypergeometric series over torus fixed points of the inertia stack.

Layout: exact lattice algebra (lattice), stacky-fan combinatorics (fan),
moment polytopes and cycles (cycles), localized series (series), Gamma
classes and decomposition coefficients (gammaclasses), quadrature
(integrate), and the verification suite with its CLI (verify, cli).
"""

from toriccharge.lattice import (
    IntMatrix,
    SNFDecomposition,
    cokernel_order,
    integer_kernel,
    rational_solve,
    smith_normal_form,
)
from toriccharge.fan import (
    BoxElement,
    DivisorData,
    FixedPoint,
    StackyFan,
    age_of_line_bundle,
    anticone,
    box,
    divisor_data,
    enumerate_keff,
    fixed_points,
    inv_box,
    nef_membership,
    semipositive_check,
    sigma_frame,
    v_of_beta,
    validate,
)
from toriccharge.cycles import (
    CycleChain,
    FaceCell,
    MomentPolytope,
    characteristic_cycle,
    cycle_of_complex,
    moment_polytope,
    shifted_cycle,
    verify_cycle,
)
from toriccharge.params import DegenerateParameterError, EquivariantParams
from toriccharge.series import (
    PrefixedSeries,
    PuiseuxSeries,
    ifunction_localized,
    ifunction_term_factor,
    mirror_map_extract,
    ps_add,
    ps_mul,
    recursion_oracle,
)
from toriccharge.gammaclasses import (
    EquivariantKClass,
    ch_tilde_at,
    euler_IX_at,
    gamma,
    gamma_tilde_TX_at,
    h_coefficient,
    h_consistency,
    kappa_eval,
    log_gamma,
)
from toriccharge.integrate import (
    IntegralResult,
    QuadratureConfig,
    Splitting,
    eta_independence_check,
    eta_sigma,
    integrand,
    integrate_cell,
    integrate_cycle,
    splitting_from_rows,
)

__all__ = [
    "IntMatrix",
    "SNFDecomposition",
    "smith_normal_form",
    "integer_kernel",
    "cokernel_order",
    "rational_solve",
    "StackyFan",
    "DivisorData",
    "BoxElement",
    "FixedPoint",
    "validate",
    "anticone",
    "divisor_data",
    "nef_membership",
    "semipositive_check",
    "box",
    "v_of_beta",
    "inv_box",
    "fixed_points",
    "enumerate_keff",
    "sigma_frame",
    "age_of_line_bundle",
    "MomentPolytope",
    "FaceCell",
    "CycleChain",
    "moment_polytope",
    "characteristic_cycle",
    "shifted_cycle",
    "cycle_of_complex",
    "verify_cycle",
    "EquivariantParams",
    "DegenerateParameterError",
    "PuiseuxSeries",
    "PrefixedSeries",
    "ps_add",
    "ps_mul",
    "ifunction_term_factor",
    "ifunction_localized",
    "recursion_oracle",
    "mirror_map_extract",
    "EquivariantKClass",
    "log_gamma",
    "gamma",
    "ch_tilde_at",
    "gamma_tilde_TX_at",
    "euler_IX_at",
    "h_coefficient",
    "h_consistency",
    "kappa_eval",
    "Splitting",
    "QuadratureConfig",
    "IntegralResult",
    "eta_sigma",
    "splitting_from_rows",
    "integrand",
    "integrate_cell",
    "integrate_cycle",
    "eta_independence_check",
]

__version__ = "0.1.0"
