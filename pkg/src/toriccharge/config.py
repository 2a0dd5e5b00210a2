"""Job configuration: a human-editable TOML document mapped onto module inputs.

Integers stay exact, rationals travel as "p/q" strings, complex numbers as
[re, im] pairs.  Parse errors surface with the line/column from the TOML
parser; semantic errors name the offending key.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from toriccharge.fan import StackyFan
from toriccharge.integrate import QuadratureConfig

DEFAULT_CHECKS = [
    "fan",
    "semipositive",
    "box",
    "series_oracle",
    "h_consistency",
    "eta_independence",
    "shift_invariance",
    "additivity",
    "gamma_limit",
    "main_identity",
]

DEFAULT_BUDGETS = {
    "series_oracle": 1e-12,
    "h_consistency": 1e-10,
    "eta_independence": 1e-8,
    "shift_invariance": 1e-8,
    "gamma_limit": 1e-3,
    "main_identity": 1e-6,
}


class ConfigError(ValueError):
    pass


def _complex(value: Any, where: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ConfigError(f"{where}: expected a number or [re, im] pair, got {value!r}")


def _fraction(value: Any, where: str) -> Fraction:
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a rational, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{where}: bad rational {value!r}: {exc}") from None
    raise ConfigError(f"{where}: expected an integer or 'p/q' string, got {value!r}")


@dataclass
class JobConfig:
    label: str
    fan: StackyFan
    basis: list[list[int]]
    tail_count: int
    bundle_terms: list[tuple[list[int], int]]
    z: float
    t0: complex
    q: list[float]
    q_max: float
    series_degree: Fraction
    w_mode: str
    w_explicit: list[complex]
    w_box_re: tuple[float, float]
    w_box_im: tuple[float, float]
    chart_margin: float
    quadrature: QuadratureConfig
    checks_run: list[str]
    expect: dict[str, bool]
    budgets: dict[str, float]
    options: dict[str, Any] = field(default_factory=dict)
    out_json: Optional[str] = None
    series_csv: Optional[str] = None
    chain_csv: Optional[str] = None
    raw: dict = field(default_factory=dict)


def load_config(path: str) -> JobConfig:
    with open(path, "rb") as fh:
        try:
            raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: TOML parse error: {exc}") from None
    return parse_config(raw, source=path)


def parse_config(raw: dict, source: str = "<config>") -> JobConfig:
    def need(table: dict, key: str, where: str):
        if key not in table:
            raise ConfigError(f"{source}: missing required key [{where}] {key}")
        return table[key]

    fan_tbl = need(raw, "fan", "")
    n = int(need(fan_tbl, "n", "fan"))
    rays = need(fan_tbl, "rays", "fan")
    cones = need(fan_tbl, "max_cones", "fan")
    extra = fan_tbl.get("extra", [])
    try:
        fan = StackyFan.make(n=n, rays=rays, max_cones=cones, extra=extra)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: bad fan data: {exc}") from None

    basis_tbl = need(raw, "basis", "")
    basis = [list(map(int, v)) for v in need(basis_tbl, "vectors", "basis")]
    tail_count = int(basis_tbl.get("tail_count", 0))

    bundle_tbl = need(raw, "bundle", "")
    if "terms" in bundle_tbl:
        terms = [
            (list(map(int, t["l"])), int(t.get("mult", 1)))
            for t in bundle_tbl["terms"]
        ]
    elif "l" in bundle_tbl:
        terms = [(list(map(int, bundle_tbl["l"])), 1)]
    else:
        raise ConfigError(f"{source}: [bundle] needs 'l' or 'terms'")
    for l, _ in terms:
        if len(l) != fan.r_prime:
            raise ConfigError(
                f"{source}: bundle coefficient vector {l} needs {fan.r_prime} entries"
            )

    par = need(raw, "params", "")
    z = float(need(par, "z", "params"))
    t0 = _complex(par.get("t0", 0.0), "params.t0")
    q = [float(x) for x in need(par, "q", "params")]
    q_max = float(par.get("q_max", 1.0))
    series_degree = _fraction(par.get("series_degree", 20), "params.series_degree")
    w_mode = par.get("w_mode", "seeded")
    if w_mode not in ("seeded", "explicit"):
        raise ConfigError(f"{source}: params.w_mode must be 'seeded' or 'explicit'")
    w_explicit = [_complex(x, "params.w") for x in par.get("w", [])]
    if w_mode == "explicit" and len(w_explicit) != fan.r:
        raise ConfigError(f"{source}: explicit w needs {fan.r} entries")
    box = par.get("w_box", {})
    box_re = tuple(float(x) for x in box.get("re", [-4.0, 4.0]))
    box_im = tuple(float(x) for x in box.get("im", [-2.0, 2.0]))
    chart_margin = float(par.get("chart_margin", 1.0))

    quad_tbl = raw.get("quadrature", {})
    quadrature = QuadratureConfig(
        radius=float(quad_tbl.get("radius", 0.0)),
        nodes_per_dim=int(quad_tbl.get("nodes", 24)),
        adaptive_tol=float(quad_tbl.get("tol", 1e-9)),
        max_subdivisions=int(quad_tbl.get("max_subdivisions", 12)),
        trace_path=quad_tbl.get("trace", None) or None,
    )

    checks_tbl = raw.get("checks", {})
    run = list(checks_tbl.get("run", DEFAULT_CHECKS))
    unknown = [c for c in run if c not in DEFAULT_CHECKS]
    if unknown:
        raise ConfigError(f"{source}: unknown checks {unknown}")
    expect = {str(k): bool(v) for k, v in checks_tbl.get("expect", {}).items()}
    budgets = dict(DEFAULT_BUDGETS)
    for k, v in checks_tbl.get("budgets", {}).items():
        budgets[str(k)] = float(v)
    options = dict(checks_tbl.get("options", {}))

    out_tbl = raw.get("output", {})

    return JobConfig(
        label=str(raw.get("label", "job")),
        fan=fan,
        basis=basis,
        tail_count=tail_count,
        bundle_terms=terms,
        z=z,
        t0=t0,
        q=q,
        q_max=q_max,
        series_degree=series_degree,
        w_mode=w_mode,
        w_explicit=w_explicit,
        w_box_re=box_re,
        w_box_im=box_im,
        chart_margin=chart_margin,
        quadrature=quadrature,
        checks_run=run,
        expect=expect,
        budgets=budgets,
        options=options,
        out_json=out_tbl.get("json") or None,
        series_csv=out_tbl.get("series_csv") or None,
        chain_csv=out_tbl.get("chain_csv") or None,
        raw=raw,
    )
