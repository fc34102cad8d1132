"""Command line entry point: `difflow run <config> [...]`."""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .config import ConfigError, parse_config
from .integrator import SchemeConfig
from .scenarios import run as run_scenario


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="difflow",
        description="2D nonisothermal diffuse-interface two-phase flow "
                    "(Peng-Robinson EOS)")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a scenario configuration")
    p_run.add_argument("config", help="path to a scenario config file")
    p_run.add_argument("--out", help="output directory (overrides run.output_dir)")
    p_run.add_argument("--steps", type=int, help="override run.n_steps")
    p_run.add_argument("--snapshot-every", type=int,
                       help="override run.snapshot_every")
    p_run.add_argument("--convection", choices=("upwind", "skew"),
                       help="override scheme.convection_mode")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
        if args.steps is not None or args.snapshot_every is not None:
            run_spec = dataclasses.replace(
                cfg.run,
                **({"n_steps": args.steps} if args.steps is not None else {}),
                **({"snapshot_every": args.snapshot_every}
                   if args.snapshot_every is not None else {}))
            cfg = dataclasses.replace(cfg, run=run_spec)
        if args.convection is not None:
            scheme = dataclasses.replace(cfg.scheme,
                                         convection_mode=args.convection)
            cfg = dataclasses.replace(cfg, scheme=scheme)
    except (OSError, ConfigError, ValueError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    return run_scenario(cfg, out_dir=args.out)


if __name__ == "__main__":
    sys.exit(main())
