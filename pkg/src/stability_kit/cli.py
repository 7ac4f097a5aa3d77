"""Command line runner: parse a config, run one suite, emit the report.

Exit status is 0 only when every metric in the emitted report passes,
1 when some metric fails, 2 on bad input. The report text on stdout (or
at --out) is deterministic in (config, code); the measured wall clock
goes to stderr so files stay byte-stable across reruns.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import SUITES, config_from_mapping
from .reports import all_pass, emit_report
from .suites import run_suite

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="stability-kit",
        description="Run a verification suite and emit its report.",
    )
    p.add_argument("suite", choices=SUITES, help="which suite to run")
    p.add_argument("--config", metavar="FILE", help="JSON config file")
    p.add_argument("--seed", metavar="HEX", help="root seed, 1..32 hex digits")
    p.add_argument("--out", metavar="FILE", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--trials", type=int, help="rescale the suite's main loop")
    p.add_argument("--nu", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--prime-bits", type=int, dest="prime_bits")
    p.add_argument("--circuit", metavar="FILE", dest="circuit_file")
    p.add_argument("--class", metavar="FILE", dest="class_file")
    p.add_argument("--dist", metavar="FILE", dest="dist_file")
    return p


_OVERRIDE_KEYS = (
    "seed",
    "trials",
    "nu",
    "rho",
    "alpha",
    "beta",
    "eps",
    "delta",
    "prime_bits",
    "circuit_file",
    "class_file",
    "dist_file",
)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    mapping: dict = {}
    try:
        if args.config is not None:
            with open(args.config, "r", encoding="utf-8") as f:
                mapping = json.load(f)
            if not isinstance(mapping, dict):
                raise ValueError("config must be a JSON object")
        mapping["suite"] = args.suite
        for key in _OVERRIDE_KEYS:
            value = getattr(args, key)
            if value is not None:
                mapping[key] = value
        config = config_from_mapping(mapping)
        report = run_suite(config)
        text = emit_report(report, args.format)
    except (ValueError, OSError, json.JSONDecodeError) as e:
        print(f"stability-kit: error: {e}", file=sys.stderr)
        return 2
    if args.out is not None:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    print(f"{config.suite}: wall clock {report.wall_clock_s:.2f} s", file=sys.stderr)
    return 0 if all_pass(report) else 1


if __name__ == "__main__":
    raise SystemExit(main())
