"""Moment polytopes and piecewise-linear characteristic cycles.

A line bundle with ray coefficients l determines an open moment polytope and,
when the bundle is Q-ample, a conical Lagrangian cycle with one cell
(-tau) x Delta_tau(l) per cone tau of the fan.  Cells are stored with exact
rational vertex data, an integer multiplicity, and an optional translation of
the cone factor.

Orientation convention.  A cell over the cone tau = (i_1 < ... < i_d) is
parametrized by v = shift - sum_a c_a b_{i_a} (c_a >= 0) together with affine
coordinates on its face taken in the canonical integral basis of the face
direction lattice.  The cell's contribution to any integral of the
holomorphic volume form is

    mult * (-2 pi i)^(n-d) * |det[b_{i_1} .. b_{i_d}, f_1 .. f_{n-d}]| *
        (integral over the parameter domain in its standard orientation),

and the boundary bookkeeping in verify_cycle uses the matching signs.  With
this convention every cell of the cycle of a Q-ample bundle carries
multiplicity +1, and the one remaining global sign was calibrated once
against the rank-one chart limit (see the acceptance suite) and is frozen
here.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, replace
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence

from toriccharge.fan import StackyFan, UnknownConeError
from toriccharge.lattice import (
    IntMatrix,
    det,
    integer_kernel,
    rational_solve,
    smith_normal_form,
)


class NotQAmpleError(ValueError):
    """Raised when a cycle is requested for a bundle that is not Q-ample.

    Non-ample bundles are only supported through integer combinations of
    Q-ample ones; see cycle_of_complex.
    """


Point = tuple[Fraction, ...]


@dataclass(frozen=True)
class MomentPolytope:
    """Open moment polytope {u : <u, b_i> > -l_i} with its chart vertices."""

    fan: StackyFan
    l: tuple[int, ...]
    vertices: tuple[tuple[tuple[int, ...], Point], ...]
    q_ample: bool

    def vertex(self, sigma: Sequence[int]) -> Point:
        key = tuple(sorted(sigma))
        for s, v in self.vertices:
            if s == key:
                return v
        raise UnknownConeError(f"{key} is not a maximal cone")

    @property
    def halfspaces(self) -> tuple[tuple[tuple[int, ...], int], ...]:
        return tuple(
            (self.fan.b[i], -self.l[i]) for i in range(self.fan.r_prime)
        )


def moment_polytope(fan: StackyFan, l: Sequence[int]) -> MomentPolytope:
    """Vertices by exact chart solves; Q-ample iff all strict inequalities hold."""
    if len(l) != fan.r_prime:
        raise ValueError(f"need {fan.r_prime} ray coefficients")
    l = tuple(int(x) for x in l)
    verts = []
    for sigma in fan.max_cones:
        sol = rational_solve(fan.cone_matrix(sigma), [-l[i] for i in sigma])
        verts.append((tuple(sigma), tuple(sol)))
    ample = True
    for sigma, u in verts:
        for j in fan.ray_indices:
            if j in sigma:
                continue
            val = sum(Fraction(fan.b[j][t]) * u[t] for t in range(fan.n))
            if not val > -l[j]:
                ample = False
    return MomentPolytope(fan=fan, l=l, vertices=tuple(verts), q_ample=ample)


@dataclass(frozen=True)
class FaceCell:
    """One cell (-tau + shift) x face, with integer multiplicity."""

    tau: tuple[int, ...]
    vertices: tuple[Point, ...]
    shift: Point
    mult: int

    @property
    def dim_cone(self) -> int:
        return len(self.tau)

    def key(self):
        return (self.tau, frozenset(self.vertices), self.shift)


@dataclass(frozen=True)
class CycleChain:
    """Signed formal sum of cells; merging cancels identical cells."""

    fan: StackyFan
    cells: tuple[FaceCell, ...]
    label: str = ""

    def __add__(self, other: "CycleChain") -> "CycleChain":
        if self.fan is not other.fan and self.fan != other.fan:
            raise ValueError("chains live over different fans")
        return CycleChain(
            fan=self.fan,
            cells=_merge_cells(list(self.cells) + list(other.cells)),
            label=self.label,
        )

    def scaled(self, m: int) -> "CycleChain":
        if m == 0:
            return CycleChain(fan=self.fan, cells=(), label=self.label)
        return CycleChain(
            fan=self.fan,
            cells=tuple(replace(c, mult=c.mult * m) for c in self.cells),
            label=self.label,
        )


def _merge_cells(cells: Sequence[FaceCell]) -> tuple[FaceCell, ...]:
    acc: dict = {}
    for c in cells:
        k = c.key()
        if k in acc:
            acc[k] = replace(acc[k], mult=acc[k].mult + c.mult)
        else:
            acc[k] = c
    out = [c for c in acc.values() if c.mult != 0]
    out.sort(key=lambda c: (c.tau, c.shift, c.vertices))
    return tuple(out)


def _order_face_vertices(points: Sequence[Point]) -> tuple[Point, ...]:
    """Canonical vertex order: lex for dim <= 1, counterclockwise for polygons."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return tuple(pts)
    if len(pts[0]) != 2:
        raise NotImplementedError("faces of dimension > 2 are unsupported")
    n = len(pts)
    cx = sum((p[0] for p in pts), start=Fraction(0)) / n
    cy = sum((p[1] for p in pts), start=Fraction(0)) / n

    def half(p):
        dx, dy = p[0] - cx, p[1] - cy
        return 0 if (dy > 0 or (dy == 0 and dx > 0)) else 1

    def cmp(p, q):
        hp, hq = half(p), half(q)
        if hp != hq:
            return -1 if hp < hq else 1
        cross = (p[0] - cx) * (q[1] - cy) - (p[1] - cy) * (q[0] - cx)
        if cross == 0:
            return 0
        return -1 if cross > 0 else 1

    ordered = sorted(pts, key=functools.cmp_to_key(cmp))
    start = ordered.index(min(ordered))
    return tuple(ordered[start:] + ordered[:start])


def characteristic_cycle(fan: StackyFan, l: Sequence[int]) -> CycleChain:
    """The cycle of a Q-ample bundle: one +1 cell per cone of the fan."""
    mp = moment_polytope(fan, l)
    if not mp.q_ample:
        raise NotQAmpleError(
            f"l = {tuple(l)} is not Q-ample; build non-ample objects via "
            "cycle_of_complex from differences of Q-ample bundles"
        )
    zero_shift = tuple(Fraction(0) for _ in range(fan.n))
    cells = []
    for tau in fan.all_cones():
        verts = _order_face_vertices(
            [mp.vertex(sigma) for sigma in fan.max_cones if set(tau) <= set(sigma)]
        )
        expected_dim = fan.n - len(tau)
        if _affine_dim(verts) != expected_dim:
            raise NotQAmpleError(
                f"face of cone {tau} is degenerate for l = {tuple(l)}"
            )
        cells.append(FaceCell(tau=tuple(tau), vertices=verts, shift=zero_shift, mult=1))
    return CycleChain(fan=fan, cells=_merge_cells(cells), label=f"Xi{tuple(l)}")


def _affine_dim(points: Sequence[Point]) -> int:
    if len(points) <= 1:
        return 0
    base = points[0]
    diffs = [[p[i] - base[i] for i in range(len(base))] for p in points[1:]]
    den = 1
    for row in diffs:
        for x in row:
            den = den * x.denominator // gcd(den, x.denominator)
    mat = IntMatrix.from_rows([[int(x * den) for x in row] for row in diffs])
    return smith_normal_form(mat).rank


def shifted_cycle(
    chain: CycleChain, sigma: Sequence[int], v0: Sequence[int], t
) -> CycleChain:
    """Translate the cone factor of every cell by t * v0, v0 interior to sigma."""
    fan = chain.fan
    sigma = tuple(sorted(sigma))
    if sigma not in fan.max_cones:
        raise UnknownConeError(f"{sigma} is not a maximal cone")
    coords = rational_solve(fan.cone_matrix(sigma).transpose(), list(v0))
    if coords is None or any(c <= 0 for c in coords):
        raise ValueError(f"v0 = {tuple(v0)} is not interior to sigma = {sigma}")
    t = Fraction(t)
    if t < 0:
        raise ValueError("shift parameter must be nonnegative")
    delta = tuple(t * Fraction(x) for x in v0)
    cells = tuple(
        replace(c, shift=tuple(a + b for a, b in zip(c.shift, delta)))
        for c in chain.cells
    )
    return CycleChain(fan=fan, cells=_merge_cells(cells), label=chain.label)


def cycle_of_complex(
    fan: StackyFan, terms: Sequence[tuple[Sequence[int], int]]
) -> CycleChain:
    """Multiplicity-weighted sum of Q-ample cycles with exact cancellation."""
    total = CycleChain(fan=fan, cells=(), label="complex")
    for l, mult in terms:
        total = total + characteristic_cycle(fan, l).scaled(int(mult))
    return CycleChain(fan=fan, cells=total.cells, label="complex")


# ---------------------------------------------------------------------------
# Orientation helpers shared with the integrator.
# ---------------------------------------------------------------------------


def cone_face_basis(fan: StackyFan, tau: Sequence[int]) -> list[tuple[int, ...]]:
    """Canonical integral basis of the face direction lattice ann(tau)."""
    tau = tuple(sorted(tau))
    if not tau:
        return [
            tuple(1 if j == i else 0 for j in range(fan.n)) for i in range(fan.n)
        ]
    return integer_kernel(fan.cone_matrix(tau))


def cell_frame_det(fan: StackyFan, tau: Sequence[int]) -> int:
    """det of [cone generators | face basis] in ambient coordinates."""
    tau = tuple(sorted(tau))
    cols = [fan.b[i] for i in tau] + cone_face_basis(fan, tau)
    return det(IntMatrix.from_rows(list(zip(*cols))))


def face_s_coords(cell: FaceCell, basis: Sequence[tuple[int, ...]]) -> list[Point]:
    """Vertices of the cell face in coordinates of the given direction basis.

    The anchor is the first canonical vertex, so the first row is zero.
    """
    anchor = cell.vertices[0]
    p = len(basis)
    out = []
    for v in cell.vertices:
        diff = [v[i] - anchor[i] for i in range(len(anchor))]
        if p == 0:
            if any(x != 0 for x in diff):
                raise ValueError("zero-dimensional face with distinct vertices")
            out.append(())
            continue
        A = IntMatrix.from_rows([[basis[b][i] for b in range(p)] for i in range(len(anchor))])
        sol = rational_solve(A, diff)
        if sol is None:
            raise ValueError("face vertex outside the face direction lattice")
        out.append(tuple(sol))
    return out


def _primitive_direction(a: Point, b: Point) -> tuple[int, ...]:
    diff = [y - x for x, y in zip(a, b)]
    den = 1
    for x in diff:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in diff]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    ints = [x // g for x in ints]
    # Fix a deterministic sign: first nonzero entry positive.
    for x in ints:
        if x != 0:
            if x < 0:
                ints = [-y for y in ints]
            break
    return tuple(ints)


@dataclass(frozen=True)
class CycleReport:
    ok: bool
    orphans: tuple
    escaping: tuple


def verify_cycle(chain: CycleChain) -> CycleReport:
    """Check the chain is a cycle relative to the conical infinity.

    The boundary of every cell is expanded into signed (n-1)-dimensional
    pieces keyed by (cone, face vertices, shift).  The chain passes when each
    piece either cancels or its cone factor is at least one-dimensional (such
    pieces escape to infinity inside the fan's conical Lagrangian support).
    """
    fan = chain.fan
    boundary: dict = {}

    def add_piece(kappa, verts, shift, coeff):
        key = (tuple(kappa), frozenset(verts), tuple(shift))
        boundary[key] = boundary.get(key, 0) + coeff
        if boundary[key] == 0:
            del boundary[key]

    for cell in chain.cells:
        tau = cell.tau
        d = len(tau)
        p = fan.n - d
        sgn_frame = 1 if cell_frame_det(fan, tau) > 0 else -1
        sign0 = cell.mult * ((-1) ** p) * sgn_frame
        basis = cone_face_basis(fan, tau)

        # Cone walls c_a = 0.
        for a, ray in enumerate(tau, start=1):
            kappa = tuple(i for i in tau if i != ray)
            rho_w = _basis_change_sign(cell, basis)
            add_piece(kappa, cell.vertices, cell.shift, sign0 * ((-1) ** a) * rho_w)

        # Facets of the face polytope.
        if p == 1:
            svals = [x[0] for x in face_s_coords(cell, basis)]
            order = sorted(range(len(svals)), key=lambda i: svals[i])
            lo, hi = order[0], order[-1]
            add_piece(tau, (cell.vertices[lo],), cell.shift, sign0 * ((-1) ** d) * -1)
            add_piece(tau, (cell.vertices[hi],), cell.shift, sign0 * ((-1) ** d) * +1)
        elif p == 2:
            scoords = face_s_coords(cell, basis)
            m = len(cell.vertices)
            for idx in range(m):
                A = cell.vertices[idx]
                B = cell.vertices[(idx + 1) % m]
                sA = scoords[idx]
                sB = scoords[(idx + 1) % m]
                dx, dy = sB[0] - sA[0], sB[1] - sA[1]
                out_s = (dy, -dx)
                g = _primitive_direction(A, B)
                gs = rational_solve(
                    IntMatrix.from_rows(
                        [[basis[b][i] for b in range(2)] for i in range(fan.n)]
                    ),
                    g,
                )
                cross = out_s[0] * gs[1] - out_s[1] * gs[0]
                rho_f = 1 if cross > 0 else -1
                add_piece(tau, (A, B), cell.shift, sign0 * ((-1) ** d) * rho_f)

    orphans = []
    escaping = []
    for (kappa, verts, shift), coeff in sorted(
        boundary.items(), key=lambda kv: (kv[0][0], sorted(kv[0][1]), kv[0][2])
    ):
        entry = (kappa, tuple(sorted(verts)), shift, coeff)
        if len(kappa) >= 1:
            escaping.append(entry)
        else:
            orphans.append(entry)
    return CycleReport(ok=not orphans, orphans=tuple(orphans), escaping=tuple(escaping))


def _basis_change_sign(cell: FaceCell, cone_basis) -> int:
    """Sign of the change from the cell's face basis to the canonical one.

    The canonical basis of a boundary wall's face is derived from its own
    vertex data; for segments this is the primitive direction, for points it
    is empty.  Faces of dimension two never occur as wall faces (they only
    bound cells with tau = 0, which have no cone walls).
    """
    p = len(cone_basis)
    if p == 0:
        return 1
    if p == 1:
        scoords = [x[0] for x in face_s_coords(cell, cone_basis)]
        order = sorted(range(len(scoords)), key=lambda i: scoords[i])
        a = cell.vertices[order[0]]
        b = cell.vertices[order[-1]]
        g = _primitive_direction(a, b)
        # Express the cell basis vector in terms of g: both span the same line.
        ratio = None
        for x, y in zip(cone_basis[0], g):
            if y != 0:
                ratio = Fraction(x, y)
                break
        return 1 if ratio > 0 else -1
    if p == 2:
        # tau = {0}: the cell has no cone walls, so this is never needed.
        raise NotImplementedError
    raise NotImplementedError


def chain_dump_rows(chain: CycleChain) -> list[list[str]]:
    """Cell-per-line dump: multiplicity, cone rays, face vertices, shift."""
    rows = []
    for c in chain.cells:
        rows.append(
            [
                str(c.mult),
                " ".join(str(i) for i in c.tau),
                ";".join(",".join(str(x) for x in v) for v in c.vertices),
                ",".join(str(x) for x in c.shift),
            ]
        )
    return rows
