"""Numeric equivariant parameters shared by the series and integral sides."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from toriccharge.fan import DivisorData, sigma_frame


class DegenerateParameterError(ValueError):
    """Parameters hit a pole or violate a genericity guard."""


@dataclass(frozen=True)
class EquivariantParams:
    """Evaluation point: z > 0, equivariant weights w, t_0 and 0 < q < q_max."""

    z: float
    w: tuple[complex, ...]
    t0: complex
    q: tuple[float, ...]
    q_max: float = 1.0

    def __post_init__(self):
        if not self.z > 0:
            raise ValueError("z must be strictly positive")
        if not 0 < self.q_max <= 1:
            raise ValueError("q_max must lie in (0, 1]")
        if any(not 0 < x < self.q_max for x in self.q):
            raise ValueError(f"every q_a must lie in (0, {self.q_max})")

    @classmethod
    def make(cls, z, w, t0, q, q_max: float = 1.0) -> "EquivariantParams":
        return cls(
            z=float(z),
            w=tuple(complex(x) for x in w),
            t0=complex(t0),
            q=tuple(float(x) for x in q),
            q_max=float(q_max),
        )

    @property
    def log_q(self) -> tuple[float, ...]:
        return tuple(math.log(x) for x in self.q)


def check_genericity(
    dd: DivisorData, w: Sequence[complex], min_gap: float = 1e-8
) -> None:
    """Require the localized weights tw_i of every chart to be distinct and nonzero."""
    for sigma in dd.fan.max_cones:
        tw = sigma_frame(dd, sigma, w).tw
        vals = [tw[i] for i in sigma]
        for x in vals:
            if abs(x) < min_gap:
                raise DegenerateParameterError(
                    f"weight tw vanishes on chart {sigma}: {vals}"
                )
        for a in range(len(vals)):
            for b in range(a + 1, len(vals)):
                if abs(vals[a] - vals[b]) < min_gap:
                    raise DegenerateParameterError(
                        f"weights tw collide on chart {sigma}: {vals}"
                    )
