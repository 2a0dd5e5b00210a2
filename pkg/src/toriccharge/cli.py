"""Command-line interface.

Subcommands: validate, fan-info, series, cycle, integrate, verify.
Exit codes: 0 success / all checks pass, 1 check failure, 2 configuration
error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from toriccharge.config import ConfigError, load_config
from toriccharge.fan import box, divisor_data, semipositive_check, validate
from toriccharge.integrate import integrate_cycle
from toriccharge.params import EquivariantParams
from toriccharge.verify import (
    _bundle_chain,
    _integration_splitting,
    dump_chain_csv,
    dump_series_csv,
    report_lines,
    run_suite,
    sample_w_generic,
    write_report,
)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="toriccharge",
        description="Central-charge checks for semi-positive toric orbifolds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="path to a TOML job config")
        p.add_argument("--out", default=None, help="output path")
        p.add_argument("--seed", type=int, default=0, help="seed for parameter draws")

    p = sub.add_parser("validate", help="validate the stacky fan data")
    common(p)

    p = sub.add_parser("fan-info", help="print fan, divisor and sector data")
    common(p)

    p = sub.add_parser("series", help="dump the localized series to CSV")
    common(p)

    p = sub.add_parser("cycle", help="dump the characteristic cycle to CSV")
    common(p)

    p = sub.add_parser("integrate", help="integrate the bundle's cycle")
    common(p)

    p = sub.add_parser("verify", help="run the configured verification checks")
    common(p)
    p.add_argument(
        "--check",
        action="append",
        default=None,
        help="run only this check (repeatable)",
    )
    p.add_argument(
        "--parallel", action="store_true", help="run independent checks concurrently"
    )
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "validate":
            report = validate(cfg.fan)
            if report.ok:
                print("fan: valid")
                return 0
            for failure in report.failures:
                print(f"fan: {failure}")
            return 1

        if args.command == "fan-info":
            return _fan_info(cfg)

        if args.command == "series":
            dd = divisor_data(cfg.fan, cfg.basis, cfg.tail_count)
            path = args.out or cfg.series_csv or "series.csv"
            dump_series_csv(dd, cfg, args.seed, path)
            print(f"wrote {path}")
            return 0

        if args.command == "cycle":
            path = args.out or cfg.chain_csv or "chain.csv"
            dump_chain_csv(cfg, path)
            print(f"wrote {path}")
            return 0

        if args.command == "integrate":
            dd = divisor_data(cfg.fan, cfg.basis, cfg.tail_count)
            rng = random.Random(f"{args.seed}:integrate")
            w = sample_w_generic(dd, cfg, rng)
            params = EquivariantParams.make(cfg.z, w, cfg.t0, cfg.q, cfg.q_max)
            res = integrate_cycle(
                _bundle_chain(cfg), params, _integration_splitting(dd, cfg), cfg.quadrature
            )
            payload = {
                "value": [res.value.real, res.value.imag],
                "error_estimate": res.error_estimate,
                "tail_bound": res.tail_bound,
                "w": [[x.real, x.imag] for x in w],
            }
            text = json.dumps(payload, sort_keys=True, indent=2)
            if args.out:
                with open(args.out, "w") as fh:
                    fh.write(text + "\n")
            print(text)
            return 0

        if args.command == "verify":
            report, code = run_suite(
                cfg, seed=args.seed, only=args.check, parallel=args.parallel
            )
            out = args.out or cfg.out_json
            write_report(report, out)
            for line in report_lines(report):
                print(line)
            if out:
                print(f"report: {out}")
            return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - final safety net
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 3

    return 2


def _fan_info(cfg) -> int:
    fan = cfg.fan
    report = validate(fan)
    print(f"lattice rank n = {fan.n}, rays = {fan.r_prime}, vectors = {fan.r}")
    for i, b in enumerate(fan.b):
        kind = "ray" if i < fan.r_prime else "extra"
        print(f"  b[{i}] = {list(b)}  ({kind})")
    print(f"maximal cones: {[list(c) for c in fan.max_cones]}")
    if not report.ok:
        for failure in report.failures:
            print(f"invalid: {failure}")
        return 1
    dd = divisor_data(fan, cfg.basis, cfg.tail_count)
    print(f"kernel rank k = {dd.k}; divisor classes in the dual basis:")
    for i in range(fan.r):
        print(f"  D[{i}] = {list(dd.D[i])}")
    print(f"semi-positive: {semipositive_check(dd)}")
    for sigma in fan.max_cones:
        els = box(dd, sigma)
        print(f"chart {list(sigma)}: |G| = {dd.group_order(sigma)}")
        for el in els:
            print(f"  sector v = {list(el.v)}, age = {el.age}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
