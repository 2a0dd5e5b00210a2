"""Truncated Puiseux series and the localized hypergeometric series.

The localized series at a fixed point (sigma, v) is a sum over the extended
effective degrees of the chart landing in the sector v.  Each degree d
contributes q^d times a product of one factor per vector b_i; the factor is
the telescoped finite form of the quotient of shifted linear terms, with the
localized value A_i = -tw_i for rays of sigma and A_i = 0 otherwise:

    c = <D_i, d>:   c = 0 -> 1
                    c > 0 -> 1 / prod_{0 < m <= c, {m} = {c}} (A_i + m z)
                    c < 0 -> prod_{c < m <= 0, {m} = {c}} (A_i + m z)

The whole series carries the prefactor exp(t_0 / z) prod_a q_a^{gamma_a}
with gamma_a determined by the chart splitting; both exponents are stored so
a caller can evaluate the series at +z or -z.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from toriccharge.fan import (
    BoxElement,
    DivisorData,
    anticone,
    enumerate_keff,
    semipositive_check,
    sigma_frame,
)
from toriccharge.integrate import eta_sigma
from toriccharge.lattice import lcm
from toriccharge.params import DegenerateParameterError, EquivariantParams


class SemiPositivityError(ValueError):
    pass


Exponent = tuple[Fraction, ...]


@dataclass(frozen=True)
class PuiseuxSeries:
    """Finitely many terms q^e with complex coefficients, truncated at degree N."""

    k: int
    denominator: int
    truncation: Fraction
    terms: tuple[tuple[Exponent, complex], ...]

    @classmethod
    def make(
        cls,
        k: int,
        terms: dict,
        truncation,
        denominator: Optional[int] = None,
    ) -> "PuiseuxSeries":
        truncation = Fraction(truncation)
        clean = {}
        for expo, coeff in terms.items():
            expo = tuple(Fraction(x) for x in expo)
            if len(expo) != k:
                raise ValueError("exponent arity mismatch")
            if any(x < 0 for x in expo):
                raise ValueError("negative exponent")
            if sum(expo) > truncation:
                continue
            if coeff == 0:
                continue
            clean[expo] = clean.get(expo, 0) + complex(coeff)
        clean = {e: c for e, c in clean.items() if c != 0}
        if denominator is None:
            denominator = 1
            for e in clean:
                for x in e:
                    denominator = lcm(denominator, x.denominator)
        return cls(
            k=k,
            denominator=denominator,
            truncation=truncation,
            terms=tuple(sorted(clean.items())),
        )

    @classmethod
    def constant(cls, k: int, value: complex, truncation) -> "PuiseuxSeries":
        return cls.make(k, {tuple(Fraction(0) for _ in range(k)): value}, truncation)

    def evaluate(self, q: Sequence[float]) -> complex:
        logq = [math.log(x) for x in q]
        total = 0j
        for expo, coeff in self.terms:
            total += coeff * math.exp(sum(float(e) * lq for e, lq in zip(expo, logq)))
        return total

    def coefficient(self, expo) -> complex:
        expo = tuple(Fraction(x) for x in expo)
        for e, c in self.terms:
            if e == expo:
                return c
        return 0j

    def truncated(self, new_truncation) -> "PuiseuxSeries":
        return PuiseuxSeries.make(
            self.k, dict(self.terms), Fraction(new_truncation), self.denominator
        )

    @property
    def max_degree(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        return max(sum(e) for e, _ in self.terms)


def ps_add(A: PuiseuxSeries, B: PuiseuxSeries) -> PuiseuxSeries:
    if A.k != B.k:
        raise ValueError("variable count mismatch")
    out = dict(A.terms)
    for e, c in B.terms:
        out[e] = out.get(e, 0) + c
    return PuiseuxSeries.make(
        A.k, out, min(A.truncation, B.truncation), lcm(A.denominator, B.denominator)
    )


def ps_mul(A: PuiseuxSeries, B: PuiseuxSeries) -> PuiseuxSeries:
    if A.k != B.k:
        raise ValueError("variable count mismatch")
    trunc = min(A.truncation, B.truncation)
    out: dict = {}
    for ea, ca in A.terms:
        for eb, cb in B.terms:
            e = tuple(x + y for x, y in zip(ea, eb))
            if sum(e) > trunc:
                continue
            out[e] = out.get(e, 0) + ca * cb
    return PuiseuxSeries.make(A.k, out, trunc, lcm(A.denominator, B.denominator))


@dataclass(frozen=True)
class PrefixedSeries:
    """A Puiseux series times the formal prefactor e^{gamma0 t0} prod q_a^{gamma_a}."""

    gamma0: complex
    gamma: tuple[complex, ...]
    body: PuiseuxSeries

    def evaluate(self, t0: complex, q: Sequence[float]) -> complex:
        logq = [math.log(x) for x in q]
        pref = cmath.exp(self.gamma0 * complex(t0))
        pref *= cmath.exp(sum(g * lq for g, lq in zip(self.gamma, logq)))
        return pref * self.body.evaluate(q)

    def prefactor(self, t0: complex, q: Sequence[float]) -> complex:
        logq = [math.log(x) for x in q]
        return cmath.exp(self.gamma0 * complex(t0)) * cmath.exp(
            sum(g * lq for g, lq in zip(self.gamma, logq))
        )


def _pole_guard(value: complex, context: str) -> complex:
    if abs(value) < 1e-10:
        raise DegenerateParameterError(f"linear factor vanishes in {context}")
    return value


def ifunction_term_factor(
    dd: DivisorData,
    sigma: Sequence[int],
    i: int,
    d: Sequence[Fraction],
    z: complex,
    tw: dict,
) -> complex:
    """Telescoped factor of vector b_i at degree d, localized to the chart."""
    sigma = tuple(sorted(sigma))
    c = dd.pairing(i, d)
    A = -tw[i] if i in sigma else 0j
    if c == 0:
        return 1 + 0j
    if c > 0:
        count = math.ceil(c)
        out = 1 + 0j
        for j in range(count):
            m = c - j
            out *= _pole_guard(A + float(m) * z, f"factor i={i}, d={tuple(d)}")
        return 1 / out
    count = math.floor(-c)
    out = 1 + 0j
    for j in range(1, count + 1):
        m = c + j
        out *= _pole_guard(A + float(m) * z, f"factor i={i}, d={tuple(d)}")
    return out


def ifunction_localized(
    dd: DivisorData,
    sigma: Sequence[int],
    v: BoxElement,
    params: EquivariantParams,
    N,
    z_value: Optional[complex] = None,
) -> PrefixedSeries:
    """Localized series at the fixed point (sigma, v), truncated at degree N.

    z_value defaults to params.z; passing -params.z gives the argument the
    decomposition identity uses on the series side.
    """
    sigma = tuple(sorted(sigma))
    if not semipositive_check(dd):
        raise SemiPositivityError("the fan data is not semi-positive")
    z = complex(params.z if z_value is None else z_value)
    if z == 0:
        raise ValueError("z must be nonzero")
    frame = sigma_frame(dd, sigma, params.w)
    tw = frame.tw
    _guard_chart(tw, sigma)

    spl = eta_sigma(dd, sigma)
    outside = [j for j in range(dd.fan.r) if j not in sigma]
    gamma = tuple(
        sum(complex(params.w[j]) * float(spl.eta[j][a]) for j in outside) / z
        for a in range(dd.k)
    )

    N = Fraction(N)
    terms: dict = {}
    for d in enumerate_keff(dd, sigma, v, N):
        coeff = 1 + 0j
        for i in range(dd.fan.r):
            coeff *= ifunction_term_factor(dd, sigma, i, d, z, tw)
        terms[d] = terms.get(d, 0) + coeff
    body = PuiseuxSeries.make(dd.k, terms, N, dd.box_denominator)
    return PrefixedSeries(gamma0=1 / z, gamma=gamma, body=body)


def _guard_chart(tw: dict, sigma) -> None:
    vals = [tw[i] for i in sigma]
    for x in vals:
        if abs(x) < 1e-8:
            raise DegenerateParameterError(f"tw vanishes on chart {sigma}")
    for a in range(len(vals)):
        for b in range(a + 1, len(vals)):
            if abs(vals[a] - vals[b]) < 1e-8:
                raise DegenerateParameterError(f"tw values collide on chart {sigma}")


def recursion_oracle(
    dd: DivisorData,
    sigma: Sequence[int],
    d: Sequence[Fraction],
    a: int,
    z: complex,
    tw: dict,
) -> complex:
    """Ratio coeff(d + e_a) / coeff(d) from incremental products only.

    Walks every vector's factor from <D_i, d> to <D_i, d + e_a> one integer
    step at a time, never recomputing a full telescoped product, so it is an
    independent check of the closed-form coefficients.
    """
    sigma = tuple(sorted(sigma))
    ratio = 1 + 0j
    for i in range(dd.fan.r):
        c = dd.pairing(i, d)
        step = dd.D[i][a]
        A = -tw[i] if i in sigma else 0j
        if step > 0:
            for j in range(1, step + 1):
                ratio /= _pole_guard(A + float(c + j) * z, f"oracle i={i}")
        elif step < 0:
            for j in range(step + 1, 1):
                ratio *= _pole_guard(A + float(c + j) * z, f"oracle i={i}")
    return ratio


@dataclass(frozen=True)
class MirrorMapValue:
    tau: complex
    residual: float


def mirror_map_extract(
    dd: DivisorData,
    params: EquivariantParams,
    N,
    z_base: float = 32.0,
    levels: int = 6,
) -> dict:
    """Mirror-map values at every fixed point by Richardson extrapolation.

    The z^{-1} coefficient of the localized series (minus the constant 1 on
    untwisted sectors) is extrapolated from a ladder z, 2z, 4z, ...; the
    returned residual is the difference of the last two extrapolants.
    """
    from toriccharge.fan import box

    out = {}
    for sigma in dd.fan.max_cones:
        for el in box(dd, sigma):
            base = 1.0 if el.is_untwisted else 0.0
            g = []
            for j in range(levels):
                zj = z_base * 2**j
                ser = ifunction_localized(dd, sigma, el, params, N, z_value=zj)
                g.append(zj * (ser.evaluate(params.t0, params.q) - base))
            table = [g]
            for m in range(1, levels):
                prev = table[-1]
                table.append(
                    [
                        (2**m * prev[j + 1] - prev[j]) / (2**m - 1)
                        for j in range(len(prev) - 1)
                    ]
                )
            tau = table[-1][0]
            residual = abs(table[-1][0] - table[-2][0])
            out[(sigma, el.v)] = MirrorMapValue(tau=tau, residual=residual)
    return out


def series_dump_rows(series: PrefixedSeries) -> list[list[str]]:
    """CSV rows: exponent components, then Re and Im of each coefficient."""
    rows = []
    for expo, coeff in series.body.terms:
        rows.append(
            [";".join(str(x) for x in expo), f"{coeff.real:.17g}", f"{coeff.imag:.17g}"]
        )
    return rows
