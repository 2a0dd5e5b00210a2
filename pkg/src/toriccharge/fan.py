"""Extended stacky fans and their lattice combinatorics.

A stacky fan here is a complete simplicial fan with a chosen integral
generator on each ray, plus optional extension vectors appended so that all
vectors together generate the ambient lattice.  From that seed this module
derives everything combinatorial the rest of the package consumes: divisor
classes in the kernel-dual lattice, extended nef cones and the semi-positivity
gate, twisted sectors (Box elements) with their ages, enumeration of extended
effective degrees, and the per-cone frames expressing every vector in a
maximal cone's basis.

Conventions: ray and vector indices are 0-based everywhere; a cone is a
sorted tuple of ray indices; `sigma` always denotes a maximal cone.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from toriccharge.lattice import (
    IntMatrix,
    Vector,
    det,
    integer_kernel,
    lcm,
    mat_vec,
    rational_solve,
    smith_normal_form,
)


class UnknownConeError(ValueError):
    pass


class NotABasisError(ValueError):
    pass


class NefConditionError(ValueError):
    pass


class NotInKSigmaError(ValueError):
    pass


class UnboundedDegreeError(ValueError):
    pass


def _frac(x: Fraction) -> Fraction:
    """Fractional part {x} in [0, 1)."""
    x = Fraction(x)
    return x - (x.numerator // x.denominator)


def _ceil(x: Fraction) -> int:
    x = Fraction(x)
    return -((-x.numerator) // x.denominator)


@dataclass(frozen=True)
class StackyFan:
    """Stacky fan data: lattice rank, vectors, and maximal cones.

    b holds all r vectors; the first r_prime are the ray generators, the rest
    are extension vectors (not rays of any cone).
    """

    n: int
    b: tuple[Vector, ...]
    r_prime: int
    max_cones: tuple[tuple[int, ...], ...]

    @classmethod
    def make(
        cls,
        n: int,
        rays: Sequence[Sequence[int]],
        max_cones: Sequence[Sequence[int]],
        extra: Sequence[Sequence[int]] = (),
    ) -> "StackyFan":
        b = tuple(tuple(int(x) for x in v) for v in list(rays) + list(extra))
        cones = tuple(tuple(sorted(int(i) for i in c)) for c in max_cones)
        return cls(n=n, b=b, r_prime=len(rays), max_cones=cones)

    @property
    def r(self) -> int:
        return len(self.b)

    @property
    def ray_indices(self) -> range:
        return range(self.r_prime)

    def cone_matrix(self, cone: Sequence[int]) -> IntMatrix:
        """Matrix whose rows are the ray vectors of the cone."""
        return IntMatrix.from_rows([self.b[i] for i in cone])

    def is_cone(self, tau: Sequence[int]) -> bool:
        t = set(tau)
        if not t:
            return True
        if not t <= set(self.ray_indices):
            return False
        return any(t <= set(sigma) for sigma in self.max_cones)

    def all_cones(self) -> list[tuple[int, ...]]:
        """Every cone of the fan (all faces of maximal cones), including {0}."""
        cones = {()}
        for sigma in self.max_cones:
            for d in range(1, len(sigma) + 1):
                cones.update(itertools.combinations(sigma, d))
        return sorted(cones, key=lambda c: (len(c), c))


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    failures: tuple[str, ...]


def _facet_normal(fan: StackyFan, facet: tuple[int, ...]) -> Optional[Vector]:
    """Integer normal of the hyperplane spanned by a size-(n-1) ray set."""
    if fan.n == 1:
        return (1,)
    ker = integer_kernel(fan.cone_matrix(facet))
    if len(ker) != 1:
        return None
    return ker[0]


def validate(fan: StackyFan) -> ValidationReport:
    """Check all stacky-fan invariants; collects failures instead of raising."""
    failures: list[str] = []

    if fan.n < 1:
        failures.append("lattice rank must be >= 1")
    if fan.r_prime < 1 or fan.r_prime > fan.r:
        failures.append("ray count out of range")
    for i, v in enumerate(fan.b):
        if len(v) != fan.n:
            failures.append(f"vector b[{i}] has wrong dimension")
    if failures:
        return ValidationReport(False, tuple(failures))

    for i in fan.ray_indices:
        if all(x == 0 for x in fan.b[i]):
            failures.append(f"ray b[{i}] is zero")
    for i, j in itertools.combinations(fan.ray_indices, 2):
        vi, vj = fan.b[i], fan.b[j]
        # Two rays may not span the same half-line.
        cross_zero = all(
            vi[p] * vj[q] == vi[q] * vj[p] for p in range(fan.n) for q in range(fan.n)
        )
        if cross_zero and sum(a * b for a, b in zip(vi, vj)) > 0:
            failures.append(f"rays b[{i}] and b[{j}] span the same half-line")

    for sigma in fan.max_cones:
        if len(sigma) != fan.n:
            failures.append(f"max cone {sigma} does not have {fan.n} rays")
            continue
        if not set(sigma) <= set(fan.ray_indices):
            failures.append(f"max cone {sigma} uses non-ray indices")
            continue
        if smith_normal_form(fan.cone_matrix(sigma)).rank != fan.n:
            failures.append(f"max cone {sigma} is not simplicial (dependent rays)")

    if not failures:
        # Completeness: every facet shared by exactly two maximal cones lying
        # on opposite sides of the facet hyperplane.  (Standard sufficient
        # check for complete simplicial fans.)
        facet_owners: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
        for sigma in fan.max_cones:
            for facet in itertools.combinations(sigma, fan.n - 1):
                facet_owners.setdefault(facet, []).append(sigma)
        for facet, owners in sorted(facet_owners.items()):
            if len(owners) != 2:
                failures.append(
                    f"facet {facet} lies in {len(owners)} maximal cone(s), expected 2"
                )
                continue
            normal = _facet_normal(fan, facet)
            if normal is None:
                failures.append(f"facet {facet} is degenerate")
                continue
            (i,) = set(owners[0]) - set(facet)
            (j,) = set(owners[1]) - set(facet)
            si = sum(a * b for a, b in zip(normal, fan.b[i]))
            sj = sum(a * b for a, b in zip(normal, fan.b[j]))
            if si * sj >= 0:
                failures.append(
                    f"cones {owners[0]} and {owners[1]} do not straddle facet {facet}"
                )

    phi = IntMatrix.from_rows(list(zip(*fan.b)))  # n x r, columns b_i
    snf = smith_normal_form(phi)
    if snf.rank != fan.n:
        failures.append("vectors b_i do not span a finite-index subgroup of N")
    elif any(d != 1 for d in snf.diagonal[: fan.n]):
        failures.append("vectors b_1..b_r do not generate N as a group")

    return ValidationReport(not failures, tuple(failures))


def anticone(fan: StackyFan, tau: Sequence[int]) -> tuple[int, ...]:
    """I_tau: indices of all vectors whose ray is not contained in tau."""
    if not fan.is_cone(tau):
        raise UnknownConeError(f"{tuple(tau)} is not a cone of the fan")
    t = set(tau)
    return tuple(i for i in range(fan.r) if i not in t)


@dataclass(frozen=True)
class DivisorData:
    """Kernel lattice data attached to a choice of basis e_1..e_k.

    D[i] lists the coordinates of the divisor class D_i in the dual basis
    e_a^vee; row a of `basis` is the charge vector l^(a).
    """

    fan: StackyFan
    basis: tuple[Vector, ...]
    D: tuple[Vector, ...]
    box_denominator: int

    @property
    def k(self) -> int:
        return len(self.basis)

    def pairing(self, i: int, beta: Sequence[Fraction]) -> Fraction:
        """<D_i, beta> for beta in e-basis coordinates."""
        return sum(
            (Fraction(self.D[i][a]) * Fraction(beta[a]) for a in range(self.k)),
            start=Fraction(0),
        )

    def anticone_matrix(self, sigma: Sequence[int]) -> IntMatrix:
        """Q_sigma: rows D_i for i in I_sigma (a k x k nonsingular matrix)."""
        return IntMatrix.from_rows([self.D[i] for i in anticone(self.fan, sigma)])

    def group_order(self, sigma: Sequence[int]) -> int:
        """|G_sigma| = [K_sigma : L], the index of the kernel lattice."""
        return abs(det(self.anticone_matrix(sigma)))


def _cone_membership(
    generators: Sequence[tuple[Fraction, ...]], target: Sequence[Fraction]
) -> Optional[tuple[Fraction, ...]]:
    """Nonnegative rational coefficients writing target in the given cone.

    Caratheodory search over linearly independent generator subsets; fine at
    the handful-of-generators scale used here.
    """
    k = len(target)
    gens = [tuple(Fraction(x) for x in g) for g in generators]
    tgt = [Fraction(x) for x in target]
    if all(x == 0 for x in tgt):
        return tuple(Fraction(0) for _ in gens)
    for size in range(1, k + 1):
        for subset in itertools.combinations(range(len(gens)), size):
            cols = [gens[j] for j in subset]
            num = lcm_many([x.denominator for col in cols for x in col] + [1])
            A = IntMatrix.from_rows(
                [[int(cols[j][a] * num) for j in range(size)] for a in range(k)]
            )
            sol = rational_solve(A, [Fraction(x) * num for x in tgt])
            if sol is None or any(x < 0 for x in sol):
                continue
            if smith_normal_form(A).rank != size:
                continue
            coeffs = [Fraction(0)] * len(gens)
            for pos, j in enumerate(subset):
                coeffs[j] = sol[pos]
            return tuple(coeffs)
    return None


def lcm_many(values: Sequence[int]) -> int:
    out = 1
    for v in values:
        out = lcm(out, v)
    return out


def divisor_data(
    fan: StackyFan, basis: Sequence[Sequence[int]], tail_count: int = 0
) -> DivisorData:
    """Build DivisorData for a choice of integral kernel basis.

    Raises NotABasisError unless the vectors are a Z-basis of ker(phi), and
    NefConditionError unless every e_a^vee lies in the extended nef cone (and
    the designated tail vectors in the extension-ray cone).
    """
    k = fan.r - fan.n
    e = [tuple(int(x) for x in v) for v in basis]
    if len(e) != k or any(len(v) != fan.r for v in e):
        raise NotABasisError(f"expected {k} vectors of length {fan.r}")

    phi = IntMatrix.from_rows(list(zip(*fan.b)))
    for a, v in enumerate(e):
        if any(x != 0 for x in mat_vec(phi, v)):
            raise NotABasisError(f"basis vector e_{a} is not in the kernel")

    kernel = integer_kernel(phi)
    K = IntMatrix.from_rows(list(zip(*kernel)))  # r x k, columns the kernel basis
    change = []
    for v in e:
        coeffs = rational_solve(K, v)
        if coeffs is None:
            raise NotABasisError("basis vector outside the kernel lattice")
        change.append(coeffs)
    if any(c.denominator != 1 for row in change for c in row):
        raise NotABasisError("vectors do not generate the full kernel lattice")
    if abs(det(IntMatrix.from_rows([[int(c) for c in row] for row in change]))) != 1:
        raise NotABasisError("vectors are not a Z-basis of the kernel lattice")

    D = tuple(tuple(e[a][i] for a in range(k)) for i in range(fan.r))
    dd = DivisorData(fan=fan, basis=tuple(e), D=D, box_denominator=1)

    orders = []
    for sigma in fan.max_cones:
        if det(dd.anticone_matrix(sigma)) == 0:
            raise NotABasisError(f"anticone classes of {sigma} are degenerate")
        orders.append(dd.group_order(sigma))
    dd = DivisorData(fan=fan, basis=tuple(e), D=D, box_denominator=lcm_many(orders))

    for a in range(k):
        unit = tuple(Fraction(1) if t == a else Fraction(0) for t in range(k))
        for sigma in fan.max_cones:
            member, _ = nef_membership(dd, unit, sigma)
            if not member:
                raise NefConditionError(
                    f"e_{a}^vee is outside the extended nef cone of sigma={sigma}"
                )

    if tail_count:
        tail_gens = [
            tuple(Fraction(x) for x in D[i]) for i in range(fan.r_prime, fan.r)
        ]
        for a in range(k - tail_count, k):
            unit = tuple(Fraction(1) if t == a else Fraction(0) for t in range(k))
            if _cone_membership(tail_gens, unit) is None:
                raise NefConditionError(
                    f"tail vector e_{a}^vee is not in the extension-divisor cone"
                )

    return dd


def nef_membership(
    dd: DivisorData, Dvec: Sequence[Fraction], sigma: Sequence[int]
) -> tuple[bool, tuple[Fraction, ...]]:
    """Test membership of a class in the extended nef cone of sigma.

    The classes {D_i : i in I_sigma} are a Q-basis, so membership is just
    nonnegativity of the exact coordinates, which are returned alongside.
    """
    I = anticone(dd.fan, sigma)
    den = lcm_many([Fraction(x).denominator for x in Dvec] + [1])
    A = IntMatrix.from_rows([[dd.D[i][a] for i in I] for a in range(dd.k)])
    coords = rational_solve(A, [Fraction(x) * den for x in Dvec])
    if coords is None:
        raise NotABasisError(f"anticone classes of {sigma} do not span")
    coords = tuple(c / den for c in coords)
    return all(c >= 0 for c in coords), coords


def semipositive_check(dd: DivisorData) -> bool:
    """True iff rho-hat = D_1 + ... + D_r lies in every extended nef cone."""
    rho = tuple(
        sum((Fraction(dd.D[i][a]) for i in range(dd.fan.r)), start=Fraction(0))
        for a in range(dd.k)
    )
    return all(nef_membership(dd, rho, sigma)[0] for sigma in dd.fan.max_cones)


@dataclass(frozen=True)
class BoxElement:
    """Twisted sector over a maximal cone.

    c lists the fractional coordinates of v in the rays of sigma (aligned
    with sigma's index order); beta is the unit-cell representative of the
    sector in K_sigma, in e-basis coordinates.
    """

    sigma: tuple[int, ...]
    c: tuple[Fraction, ...]
    v: Vector
    beta: tuple[Fraction, ...]
    age: Fraction

    @property
    def is_untwisted(self) -> bool:
        return all(x == 0 for x in self.c)

    def c_of_ray(self, i: int) -> Fraction:
        return self.c[self.sigma.index(i)]


@dataclass(frozen=True)
class FixedPoint:
    """Torus fixed point of the inertia stack, indexed by (sigma, sector)."""

    sigma: tuple[int, ...]
    v: BoxElement

    def __post_init__(self):
        if self.v.sigma != tuple(self.sigma):
            raise ValueError("sector does not live over this cone")


def _box_from_beta(
    dd: DivisorData, sigma: tuple[int, ...], beta: Sequence[Fraction]
) -> BoxElement:
    fan = dd.fan
    beta = tuple(_frac(Fraction(x)) for x in beta)
    pair = [dd.pairing(i, beta) for i in range(fan.r)]
    for i in anticone(fan, sigma):
        if pair[i].denominator != 1:
            raise NotInKSigmaError(
                f"<D_{i}, beta> = {pair[i]} is not integral; beta is outside K_sigma"
            )
    c = tuple(_frac(-pair[i]) for i in sigma)
    v_frac = [
        sum((c[t] * fan.b[i][j] for t, i in enumerate(sigma)), start=Fraction(0))
        for j in range(fan.n)
    ]
    if any(x.denominator != 1 for x in v_frac):
        raise NotInKSigmaError("sector vector is not a lattice point")
    v = tuple(int(x) for x in v_frac)
    # Cross-check the ceiling form of the sector map against the fractional
    # form; the two must agree exactly.
    v_ceil = tuple(
        sum(_ceil(pair[i]) * fan.b[i][j] for i in range(fan.r)) for j in range(fan.n)
    )
    if v_ceil != v:
        raise AssertionError(
            f"sector map mismatch: ceiling form {v_ceil} vs fractional form {v}"
        )
    return BoxElement(
        sigma=sigma, c=c, v=v, beta=beta, age=sum(c, start=Fraction(0))
    )


def v_of_beta(
    dd: DivisorData, sigma: Sequence[int], beta: Sequence[Fraction]
) -> BoxElement:
    """Sector of a degree beta in K_sigma (both defining formulas checked)."""
    sigma = tuple(sorted(sigma))
    if sigma not in dd.fan.max_cones:
        raise UnknownConeError(f"{sigma} is not a maximal cone")
    return _box_from_beta(dd, sigma, beta)


def box(dd: DivisorData, sigma: Sequence[int]) -> list[BoxElement]:
    """All twisted sectors over sigma, exactly |G_sigma| of them.

    Representatives are taken in the unit cell {sum t_a e_a : 0 <= t_a < 1}.
    """
    sigma = tuple(sorted(sigma))
    if sigma not in dd.fan.max_cones:
        raise UnknownConeError(f"{sigma} is not a maximal cone")
    Q = dd.anticone_matrix(sigma)
    snf = smith_normal_form(Q)
    diag = snf.diagonal
    elements = {}
    for m in itertools.product(*[range(d) for d in diag]):
        y = [Fraction(mi, di) for mi, di in zip(m, diag)]
        beta = tuple(
            _frac(sum((Fraction(snf.V.entries[i][j]) * y[j] for j in range(dd.k)),
                      start=Fraction(0)))
            for i in range(dd.k)
        )
        elements[beta] = _box_from_beta(dd, sigma, beta)
    order = dd.group_order(sigma)
    if len(elements) != order:
        raise AssertionError(
            f"found {len(elements)} box elements, expected |G_sigma| = {order}"
        )
    return sorted(elements.values(), key=lambda el: (el.age, el.beta))


def inv_box(dd: DivisorData, el: BoxElement) -> BoxElement:
    """The inverse sector: fractional coordinates map c -> {-c}."""
    beta = tuple(_frac(-x) for x in el.beta)
    return _box_from_beta(dd, el.sigma, beta)


def fixed_points(dd: DivisorData) -> list[FixedPoint]:
    """All torus fixed points (sigma, v) of the inertia stack."""
    out = []
    for sigma in dd.fan.max_cones:
        for el in box(dd, sigma):
            out.append(FixedPoint(sigma=tuple(sigma), v=el))
    return out


def enumerate_keff(
    dd: DivisorData, sigma: Sequence[int], v: BoxElement, n_max: Fraction
) -> list[tuple[Fraction, ...]]:
    """Degrees in K_eff,sigma landing in sector v, up to total degree n_max.

    Enumeration runs over the integer coordinates m_i = <D_i, beta> >= 0 for
    i in I_sigma.  The degree functional must be strictly positive on the
    extended Mori cone, otherwise the enumeration would not terminate.
    """
    sigma = tuple(sorted(sigma))
    n_max = Fraction(n_max)
    Q = dd.anticone_matrix(sigma)
    k = dd.k
    qinv_cols = []
    for a in range(k):
        unit = [1 if t == a else 0 for t in range(k)]
        col = rational_solve(Q, unit)
        qinv_cols.append(col)
    # beta = Qinv @ m, so degree(beta) = sum_t beta_t = u . m with u_a the
    # column sums of Q^{-1}.
    u = tuple(
        sum((qinv_cols[a][t] for t in range(k)), start=Fraction(0)) for a in range(k)
    )
    if any(ua <= 0 for ua in u):
        raise UnboundedDegreeError(
            f"degree functional is not strictly positive on NE_{sigma}: weights {u}"
        )

    results = []

    def rec(pos: int, m: list[int], remaining: Fraction):
        if pos == k:
            beta = tuple(
                sum((qinv_cols[a][t] * m[a] for a in range(k)), start=Fraction(0))
                for t in range(k)
            )
            el = _box_from_beta(dd, sigma, beta)
            if el.v == v.v:
                results.append(beta)
            return
        top = int(remaining / u[pos])
        for mi in range(top + 1):
            m.append(mi)
            rec(pos + 1, m, remaining - mi * u[pos])
            m.pop()

    rec(0, [], n_max)
    results2 = []
    for beta in results:
        deg = sum(beta, start=Fraction(0))
        results2.append((deg, beta))
    results2.sort()
    return [beta for _, beta in results2]


@dataclass(frozen=True)
class SigmaFrame:
    """Change of frame into a maximal cone: b_j = sum_i s[i, j] b_i.

    tw maps each ray i of sigma to the localized equivariant weight
    tw_i = w_i + sum_{j not in sigma} s[i, j] w_j.
    """

    sigma: tuple[int, ...]
    s: dict[tuple[int, int], Fraction]
    tw: dict[int, complex]


def sigma_frame(dd: DivisorData, sigma: Sequence[int], w: Sequence[complex]) -> SigmaFrame:
    fan = dd.fan
    sigma = tuple(sorted(sigma))
    if sigma not in fan.max_cones:
        raise UnknownConeError(f"{sigma} is not a maximal cone")
    if len(w) != fan.r:
        raise ValueError(f"need {fan.r} equivariant parameters")
    Bt = fan.cone_matrix(sigma).transpose()  # columns b_i, i in sigma
    s: dict[tuple[int, int], Fraction] = {}
    for j in range(fan.r):
        coeffs = rational_solve(Bt, fan.b[j])
        for t, i in enumerate(sigma):
            s[(i, j)] = coeffs[t]
    tw = {}
    outside = [j for j in range(fan.r) if j not in sigma]
    for i in sigma:
        tw[i] = complex(w[i]) + sum(
            (float(s[(i, j)]) * complex(w[j]) for j in outside), start=0j
        )
    return SigmaFrame(sigma=sigma, s=s, tw=tw)


def age_of_line_bundle(
    dd: DivisorData, sigma: Sequence[int], v: BoxElement, l: Sequence[int]
) -> Fraction:
    """Age of the line bundle with ray coefficients l at the sector (sigma, v)."""
    sigma = tuple(sorted(sigma))
    if len(l) != dd.fan.r_prime:
        raise ValueError(f"need {dd.fan.r_prime} ray coefficients")
    total = sum(
        (v.c_of_ray(i) * l[i] for i in sigma), start=Fraction(0)
    )
    return _frac(total)
