"""Command-line interface.

Subcommands:
    sweep        run the k-grid sweep and write records.csv, summary.txt and
                 the fig_*.plot scripts into --out
    verify       run the built-in oracle suite (exit 3 on any failure)
    show-config  print the resolved configuration

Exit codes: 0 success, 1 configuration error, 2 runtime failure,
3 verification failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time

from .config import ConfigError, load_config
from .pipeline import run_sweep, verify, write_outputs

_OVERRIDE_FLAGS = {
    "k_points": "--k-points",
    "form": "--form",
    "coupling_power": "--coupling-power",
    "eval_point": "--eval",
}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", help="flat key = value config file")
    parser.add_argument("--k-points", type=int, dest="k_points", help="override k_points")
    parser.add_argument(
        "--form",
        choices=("conformal", "transformed", "closed-reference"),
        help="which right-hand side to integrate",
    )
    parser.add_argument(
        "--coupling-power",
        dest="coupling_power",
        choices=("literal", "hamiltonian-consistent"),
        help="closed-coupling convention",
    )
    parser.add_argument(
        "--eval",
        dest="eval_point",
        choices=("super-horizon", "horizon-crossing"),
        help="where each mode is evaluated",
    )


def _resolve(args: argparse.Namespace):
    config = load_config(args.config)
    overrides = {
        key: getattr(args, key)
        for key in _OVERRIDE_FLAGS
        if getattr(args, key, None) is not None
    }
    if overrides:
        config = dataclasses.replace(config, **overrides)
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sqspec",
        description="squeezed-vacuum curvature power spectrum pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run the k-grid sweep and write outputs")
    _add_common(p_sweep)
    p_sweep.add_argument(
        "--out", metavar="DIR", default="sqspec-out", help="output directory"
    )

    p_verify = sub.add_parser("verify", help="run the built-in oracle suite")
    _add_common(p_verify)

    p_show = sub.add_parser("show-config", help="print the resolved configuration")
    _add_common(p_show)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _resolve(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    try:
        if args.command == "show-config":
            from .config import serialize

            print(serialize(config), end="")
            return 0

        if args.command == "verify":
            code, lines = verify(config)
            for line in lines:
                print(line)
            return code

        # sweep
        t0 = time.perf_counter()
        report = run_sweep(config)
        files = write_outputs(report, args.out)
        dt = time.perf_counter() - t0
        s = report.summary
        print(f"swept {s.n_records} modes in {dt:.2f} s ({s.n_failures} failures)")
        print(f"max |gamma - 1| = {s.max_abs_gamma_minus_one:.3e}")
        print(f"fitted tilt = {s.tilt_fit:.6f}")
        for path in files:
            print(f"wrote {path}")
        return 0 if s.n_failures == 0 else 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure surface for scripting
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
