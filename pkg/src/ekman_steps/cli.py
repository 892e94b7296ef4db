"""Command-line entry point: ``ekman-steps <command> [--config FILE] ...``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import FORMATS, MODES, SOLVERS, ConfigError, load_config
from .profile import ProfileError
from .runs import RUNNERS
from .solver import SingularSystemError

EXIT_OK, EXIT_INVALID, EXIT_SINGULAR, EXIT_VERIFY = 0, 1, 2, 3

logger = logging.getLogger("ekman_steps")


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ekman-steps",
        description="Ekman-layer wind spirals for step-function eddy viscosity.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "profile": "solve one profile; write spiral, hodograph and summary",
        "sweep": "surface deflection angle over a log grid of (l, h)",
        "limits": "surface deflection along the limiting one-jump regimes",
        "converge": "step approximations of a continuous viscosity",
        "verify": "run the self-check suite",
    }
    for mode in MODES:
        p = sub.add_parser(mode, help=helps[mode])
        p.add_argument("--config", help="JSON experiment file")
        p.add_argument("--out", dest="out_dir", help="output directory")
        p.add_argument("--format", choices=FORMATS)
        p.add_argument("--solver", choices=SOLVERS)
        p.add_argument("--seed", type=_seed)
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {"out_dir": args.out_dir, "format": args.format, "solver": args.solver, "seed": args.seed}
    try:
        config = load_config(args.config, args.command, overrides)
        result = RUNNERS[args.command](config)
    except (ConfigError, ProfileError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SingularSystemError as exc:
        print(f"singular system: {exc} (margin={exc.margin}, condition={exc.condition})", file=sys.stderr)
        return EXIT_SINGULAR

    print(json.dumps(result, indent=2, sort_keys=True, default=str))
    if args.command in ("verify", "limits") and not result["passed"]:
        return EXIT_VERIFY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
