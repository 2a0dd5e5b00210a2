"""Oscillatory integrals of the equivariant superpotential over cycle chains.

The integrand is exp(-W~/z) with W~ = t_0 + sum_i exp(x_i) + sum_i w_i x_i,
where each x_i is the affine-linear form

    x_i = sum_a eta_{ia} log q_a + sum_j b_{ij} (-v_j + 2 pi i u_j)

on N_R x M_R.  Powers X_i^s are always exp(s x_i) with x_i this linear form;
no principal logarithm of a complex number appears anywhere, which is what
keeps the winding phases of the cycle cells intact.

Cells integrate over their cone parameters c in [0, R]^d (R chosen so the
integrand is below tolerance on the truncation boundary, with a margin for
the power-law factors) and over their face in the canonical direction basis,
with the cell normalization described in toriccharge.cycles.  Supported fan
dimensions: n <= 2.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from toriccharge.cycles import (
    CycleChain,
    FaceCell,
    cell_frame_det,
    cone_face_basis,
    face_s_coords,
)
from toriccharge.fan import DivisorData, UnknownConeError, anticone, nef_membership


class SplittingPositivityError(ValueError):
    """A chart splitting row came out nonpositive; signals a bad basis choice."""


class UnsupportedDimensionError(ValueError):
    pass


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class Splitting:
    """Rational right inverse of the kernel inclusion: eta^T E = identity."""

    eta: tuple[tuple[Fraction, ...], ...]  # r rows, k columns

    def q_prime(self, q: Sequence[float]) -> tuple[float, ...]:
        logq = [math.log(x) for x in q]
        return tuple(
            math.exp(sum(float(e) * lq for e, lq in zip(row, logq)))
            for row in self.eta
        )


def splitting_from_rows(dd: DivisorData, rows: Sequence[Sequence[Fraction]]) -> Splitting:
    eta = tuple(tuple(Fraction(x) for x in row) for row in rows)
    if len(eta) != dd.fan.r or any(len(row) != dd.k for row in eta):
        raise ValueError(f"splitting must be {dd.fan.r} x {dd.k}")
    for a in range(dd.k):
        for b_idx in range(dd.k):
            val = sum(
                (eta[i][a] * dd.basis[b_idx][i] for i in range(dd.fan.r)),
                start=Fraction(0),
            )
            if val != (1 if a == b_idx else 0):
                raise ValueError("rows do not satisfy the splitting identity")
    return Splitting(eta=eta)


def eta_sigma(dd: DivisorData, sigma: Sequence[int]) -> Splitting:
    """The unique splitting vanishing on the rays of sigma.

    Its nonzero rows are the coordinates of each e_a^vee in the anticone
    classes; strict positivity of those rows is required (the large radius
    limit q' -> 0 in this chart needs it) and verified.
    """
    fan = dd.fan
    sigma = tuple(sorted(sigma))
    if sigma not in fan.max_cones:
        raise UnknownConeError(f"{sigma} is not a maximal cone")
    I = anticone(fan, sigma)
    rows = [[Fraction(0)] * dd.k for _ in range(fan.r)]
    for a in range(dd.k):
        unit = tuple(Fraction(1) if t == a else Fraction(0) for t in range(dd.k))
        _, coords = nef_membership(dd, unit, sigma)
        for pos, i in enumerate(I):
            if coords[pos] <= 0:
                raise SplittingPositivityError(
                    f"eta_sigma row for vector {i} is not positive "
                    f"(e_{a}^vee coordinate {coords[pos]}); choose another basis"
                )
            rows[i][a] = coords[pos]
    return splitting_from_rows(dd, rows)


@dataclass(frozen=True)
class QuadratureConfig:
    radius: float = 0.0  # 0 = choose automatically from the decay criterion
    nodes_per_dim: int = 24
    adaptive_tol: float = 1e-9
    max_subdivisions: int = 12
    trace_path: Optional[str] = None  # optional CSV node trace

    def __post_init__(self):
        if self.adaptive_tol <= 0 or self.nodes_per_dim < 2:
            raise ValueError("bad quadrature configuration")


@dataclass(frozen=True)
class IntegralResult:
    value: complex
    error_estimate: float
    tail_bound: float
    cell_breakdown: tuple

    def __post_init__(self):
        if not (math.isfinite(self.error_estimate) and self.error_estimate >= 0):
            raise ValueError("error estimate must be finite and nonnegative")
        if not (math.isfinite(self.tail_bound) and self.tail_bound >= 0):
            raise ValueError("tail bound must be finite and nonnegative")


@lru_cache(maxsize=64)
def _leggauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def _panel_values(f, a: float, b: float, n: int):
    """Gauss-Legendre of orders n and 2n on [a, b] for an error estimate."""
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    x1, w1 = _leggauss(n)
    x2, w2 = _leggauss(2 * n)
    v1 = half * np.sum(w1 * f(mid + half * x1))
    v2 = half * np.sum(w2 * f(mid + half * x2))
    return v2, abs(v2 - v1)


def adaptive_1d(f, a: float, b: float, tol: float, n: int, max_subdivisions: int):
    """Globally adaptive Gauss-Legendre on [a, b].

    f maps a numpy array of nodes to complex values.  Splits the worst panel
    until the summed error estimate drops below tol relative to the current
    magnitude of the integral (with a tiny absolute floor), or the
    subdivision budget is exhausted.
    """
    panels = []
    v, e = _panel_values(f, a, b, n)
    panels.append([e, a, b, v])
    max_panels = 2 ** max_subdivisions

    def done():
        value = sum(p[3] for p in panels)
        err = sum(p[0] for p in panels)
        return err <= tol * max(abs(value), 1e-15)

    while not done() and len(panels) < max_panels:
        panels.sort(key=lambda p: -p[0])
        _, pa, pb, _ = panels.pop(0)
        pm = 0.5 * (pa + pb)
        for qa, qb in ((pa, pm), (pm, pb)):
            v, e = _panel_values(f, qa, qb, n)
            panels.append([e, qa, qb, v])
    value = sum(p[3] for p in panels)
    err = sum(p[0] for p in panels)
    return value, err


class _CellEvaluator:
    """Vectorized integrand on one cell's parameter domain."""

    def __init__(self, chain_fan, cell: FaceCell, params, splitting: Splitting):
        fan = chain_fan
        self.fan = fan
        self.cell = cell
        self.params = params
        self.tau = cell.tau
        self.d = len(cell.tau)
        self.p = fan.n - self.d
        self.basis = cone_face_basis(fan, cell.tau)
        self.det = abs(cell_frame_det(fan, cell.tau))
        self.s_vertices = [
            tuple(float(x) for x in v) for v in face_s_coords(cell, self.basis)
        ]
        logq = [math.log(x) for x in params.q]
        anchor = cell.vertices[0]
        r = fan.r
        alpha = np.empty(r, dtype=complex)
        beta = np.zeros((r, self.d))
        gamma = np.zeros((r, self.p), dtype=complex)
        for i in range(r):
            bi = fan.b[i]
            const = sum(float(e) * lq for e, lq in zip(splitting.eta[i], logq))
            const -= sum(bi[j] * float(cell.shift[j]) for j in range(fan.n))
            const += 2j * math.pi * sum(
                bi[j] * float(anchor[j]) for j in range(fan.n)
            )
            alpha[i] = const
            for a, ray in enumerate(cell.tau):
                beta[i, a] = sum(bi[j] * fan.b[ray][j] for j in range(fan.n))
            for b_idx, f in enumerate(self.basis):
                gamma[i, b_idx] = 2j * math.pi * sum(
                    bi[j] * f[j] for j in range(fan.n)
                )
        self.alpha, self.beta, self.gamma = alpha, beta, gamma
        self.w = np.array([complex(x) for x in params.w])
        self.z = params.z
        self.t0 = complex(params.t0)
        self.trace: Optional[list] = None

    def exponent(self, C: np.ndarray, S: np.ndarray) -> np.ndarray:
        """Re(W~/z) - like magnitude exponent used for tail estimates."""
        X = self._x(C, S)
        W = self.t0 + np.exp(X).sum(axis=1) + (X * self.w).sum(axis=1)
        return (W / self.z).real

    def _x(self, C: np.ndarray, S: np.ndarray) -> np.ndarray:
        m = C.shape[0] if self.d else S.shape[0]
        out = np.broadcast_to(self.alpha[None, :], (m, self.alpha.size)).copy()
        if self.d:
            out += C[:, : self.d] @ self.beta.T
        if self.p:
            out += S[:, : self.p].astype(complex) @ self.gamma.T
        return out

    def __call__(self, C: np.ndarray, S: np.ndarray) -> np.ndarray:
        X = self._x(C, S)
        with np.errstate(over="ignore", invalid="ignore"):
            W = self.t0 + np.exp(X).sum(axis=1) + (X * self.w).sum(axis=1)
            expo = -W / self.z
            out = np.zeros(X.shape[0], dtype=complex)
            ok = np.isfinite(expo) & (expo.real > -700.0)
            out[ok] = np.exp(expo[ok])
        if self.trace is not None:
            for row_c, row_s, val in zip(C, S, out):
                self.trace.append((tuple(row_c), tuple(row_s), complex(val)))
        return out


def integrand(fan, params, splitting: Splitting, point) -> complex:
    """exp(-W~/z) at a single point (v, u) of N_R x M_R.

    Every x_i is computed from the affine-linear form in (v, u); the value is
    clamped to exactly zero once Re(W~/z) exceeds the overflow threshold.
    """
    v, u = point
    logq = [math.log(x) for x in params.q]
    total = complex(params.t0)
    for i in range(fan.r):
        x = sum(float(e) * lq for e, lq in zip(splitting.eta[i], logq))
        x += sum(
            fan.b[i][j] * (-v[j] + 2j * math.pi * u[j]) for j in range(fan.n)
        )
        try:
            total += cmath.exp(x)
        except OverflowError:
            # Giant positive real part of some X_i: the integrand underflows.
            if math.cos(x.imag) > 0:
                return 0j
            raise
        total += complex(params.w[i]) * x
    expo = -total / params.z
    if expo.real <= -700.0:
        return 0j
    return cmath.exp(expo)


def _auto_radius(ev: _CellEvaluator, tol: float, explicit: float) -> tuple[float, float]:
    """Truncation radius for the cone axes plus the reported tail bound.

    Doubles R until the integrand's magnitude exponent on every truncation
    face clears ln(1/tol) with a safety margin.
    """
    if ev.d == 0:
        return 0.0, 0.0
    target = math.log(1.0 / tol) + 8.0
    R = explicit if explicit > 0 else 4.0
    sgrid = _face_sample_grid(ev)
    for _ in range(40):
        worst = math.inf
        for axis in range(ev.d):
            ticks = np.linspace(0.0, R, 7)
            C = np.stack(
                np.meshgrid(*[ticks if a != axis else np.array([R]) for a in range(ev.d)]),
                axis=-1,
            ).reshape(-1, ev.d)
            for s in sgrid:
                S = np.broadcast_to(s, (C.shape[0], max(ev.p, 1))).copy()
                worst = min(worst, float(ev.exponent(C, S).min()))
        if worst >= target or explicit > 0:
            cross = (1.0 + R) ** (ev.d - 1) * (2 * math.pi) ** ev.p * ev.det
            cross *= 1.0 + _face_measure(ev)
            tail = math.exp(-max(worst, 0.0)) * cross
            return R, tail
        R *= 1.6
    raise QuadratureError("could not find a decaying truncation radius")


def _face_measure(ev: _CellEvaluator) -> float:
    if ev.p == 0 or len(ev.s_vertices) < 2:
        return 0.0
    lo = [min(v[b] for v in ev.s_vertices) for b in range(ev.p)]
    hi = [max(v[b] for v in ev.s_vertices) for b in range(ev.p)]
    out = 1.0
    for a, b in zip(lo, hi):
        out *= b - a
    return out


def _face_sample_grid(ev: _CellEvaluator):
    if ev.p == 0:
        return [np.zeros(1)]
    lo = [min(v[b] for v in ev.s_vertices) for b in range(ev.p)]
    hi = [max(v[b] for v in ev.s_vertices) for b in range(ev.p)]
    axes = [np.linspace(a, b, 5) for a, b in zip(lo, hi)]
    mesh = np.stack(np.meshgrid(*axes), axis=-1).reshape(-1, ev.p)
    return [row for row in mesh]


def _polygon_slabs(vertices: list[tuple[float, float]]):
    """Decompose a convex CCW polygon into vertical slabs (x0, x1, lo, hi).

    lo and hi are affine functions of x returned as (slope, intercept).
    """
    xs = sorted({v[0] for v in vertices})
    m = len(vertices)
    edges = [(vertices[i], vertices[(i + 1) % m]) for i in range(m)]
    slabs = []
    for x0, x1 in zip(xs, xs[1:]):
        xm = 0.5 * (x0 + x1)
        cuts = []
        for (ax, ay), (bx, by) in edges:
            if ax == bx:
                continue
            if min(ax, bx) <= xm <= max(ax, bx):
                slope = (by - ay) / (bx - ax)
                cuts.append((slope, ay - slope * ax))
        ys = [s * xm + t for s, t in cuts]
        lo = cuts[ys.index(min(ys))]
        hi = cuts[ys.index(max(ys))]
        slabs.append((x0, x1, lo, hi))
    return slabs


def integrate_cell(
    chain: CycleChain, cell: FaceCell, params, splitting: Splitting, config: QuadratureConfig
) -> IntegralResult:
    """Integrate one cell with the chain's orientation normalization."""
    fan = chain.fan
    if fan.n > 2:
        raise UnsupportedDimensionError("quadrature supports fan dimension <= 2")
    ev = _CellEvaluator(fan, cell, params, splitting)
    if config.trace_path:
        ev.trace = []
    R, tail = _auto_radius(ev, config.adaptive_tol, config.radius)
    tol = config.adaptive_tol
    n = config.nodes_per_dim
    d, p = ev.d, ev.p

    if d == 1 and p == 0:
        f = lambda c: ev(c.reshape(-1, 1), np.zeros((c.size, 1)))
        val, err = adaptive_1d(f, 0.0, R, tol, n, config.max_subdivisions)
    elif d == 0 and p == 1:
        s_lo = min(v[0] for v in ev.s_vertices)
        s_hi = max(v[0] for v in ev.s_vertices)
        f = lambda s: ev(np.zeros((s.size, 1)), s.reshape(-1, 1))
        val, err = adaptive_1d(f, s_lo, s_hi, tol, n, config.max_subdivisions)
    elif d == 2 and p == 0:
        val, err = _iterated(
            lambda c1, c2: ev(np.stack([c1, c2], axis=-1), np.zeros((c1.size, 1))),
            0.0, R, lambda x: (0.0, R), tol, n, config.max_subdivisions,
        )
    elif d == 1 and p == 1:
        s_lo = min(v[0] for v in ev.s_vertices)
        s_hi = max(v[0] for v in ev.s_vertices)
        val, err = _iterated(
            lambda c1, s1: ev(c1.reshape(-1, 1), s1.reshape(-1, 1)),
            0.0, R, lambda x: (s_lo, s_hi), tol, n, config.max_subdivisions,
        )
    elif d == 0 and p == 2:
        val = 0j
        err = 0.0
        slabs = _polygon_slabs([(v[0], v[1]) for v in ev.s_vertices])
        for x0, x1, lo, hi in slabs:
            sval, serr = _iterated(
                lambda s1, s2: ev(np.zeros((s1.size, 1)), np.stack([s1, s2], axis=-1)),
                x0, x1,
                lambda x, lo=lo, hi=hi: (lo[0] * x + lo[1], hi[0] * x + hi[1]),
                tol / max(len(slabs), 1), n, config.max_subdivisions,
            )
            val += sval
            err += serr
    else:  # pragma: no cover - dimensions are exhausted above for n <= 2
        raise UnsupportedDimensionError(f"cell type (d={d}, p={p})")

    if config.trace_path and ev.trace is not None:
        with open(config.trace_path, "a") as fh:
            for row_c, row_s, value in ev.trace:
                fh.write(
                    "{};{};{};{:.17g};{:.17g}\n".format(
                        " ".join(str(i) for i in cell.tau),
                        " ".join(f"{x:.17g}" for x in row_c),
                        " ".join(f"{x:.17g}" for x in row_s),
                        value.real,
                        value.imag,
                    )
                )

    norm = cell.mult * (-2j * math.pi) ** p * ev.det
    return IntegralResult(
        value=norm * val,
        error_estimate=abs(norm) * err,
        tail_bound=abs(norm) * tail,
        cell_breakdown=((cell.tau, cell.shift, complex(norm * val)),),
    )


def _iterated(f2, a, b, inner_limits, tol, n, max_subdivisions):
    """Iterated adaptive quadrature: outer on [a, b], inner limits per node.

    f2(outer_nodes, inner_nodes) evaluates the integrand on paired arrays.
    """

    def outer(xs: np.ndarray) -> np.ndarray:
        out = np.empty(xs.size, dtype=complex)
        for idx, x in enumerate(xs):
            lo, hi = inner_limits(float(x))
            if hi <= lo:
                out[idx] = 0.0
                continue
            inner = lambda ys: f2(np.full(ys.size, x), ys)
            val, _ = adaptive_1d(inner, lo, hi, tol * 0.1, n, max_subdivisions)
            out[idx] = val
        return out

    return adaptive_1d(outer, a, b, tol, n, max_subdivisions)


def integrate_cycle(
    chain: CycleChain, params, splitting: Splitting, config: QuadratureConfig
) -> IntegralResult:
    """Signed sum of cell integrals in the chain's deterministic cell order."""
    total = 0j
    err = 0.0
    tail = 0.0
    breakdown = []
    for cell in chain.cells:
        res = integrate_cell(chain, cell, params, splitting, config)
        total += res.value
        err += res.error_estimate
        tail += res.tail_bound
        breakdown.extend(res.cell_breakdown)
    return IntegralResult(
        value=total, error_estimate=err, tail_bound=tail, cell_breakdown=tuple(breakdown)
    )


def eta_independence_check(
    chain: CycleChain,
    params,
    splitting_a: Splitting,
    splitting_b: Splitting,
    config: QuadratureConfig,
) -> tuple[float, IntegralResult, IntegralResult]:
    """Relative difference of the integral under two splittings."""
    ra = integrate_cycle(chain, params, splitting_a, config)
    rb = integrate_cycle(chain, params, splitting_b, config)
    scale = max(abs(ra.value), abs(rb.value), 1e-300)
    return abs(ra.value - rb.value) / scale, ra, rb
