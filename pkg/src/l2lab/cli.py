"""Command-line entry point: ``l2lab <experiment> --config cfg.toml``.

Exit status 0 when every hard check passes, 2 when one fails, 3 on a
configuration error.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config
from .experiments import EXPERIMENTS, write_result

EXIT_OK = 0
EXIT_CHECK_FAILED = 2
EXIT_CONFIG = 3

HELP = {
    "betti": "normalized Betti numbers along the ladder, with partial-sum checks",
    "heat": "normalized heat traces against the von Neumann trace",
    "ids": "eigenvalue counting functions for both boundary conditions",
    "nfb": "interior heat kernel against the lattice kernel, by boundary distance",
    "zeta": "shifted zeta functions against the symbol quadrature",
    "euler": "Euler characteristics and the McKean-Singer residual",
    "nsfit": "power-law fits of the counting function near zero",
    "validate": "check a complex and its sections",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="l2lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--config", required=True, help="TOML experiment file")
        p.add_argument("--out", default=None, help="output directory (default: from config)")
        p.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        result = EXPERIMENTS[args.command](cfg, threads=args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for path in write_result(result, cfg.resolve_output(args.out), cfg.digest):
        print(f"wrote {path}")
    for note in result.notes:
        print(f"note: {note}")
    for c in result.checks:
        status = "PASS" if c.passed else ("FAIL" if c.hard else "WARN")
        detail = f" ({c.detail})" if c.detail else ""
        print(f"{status} {c.name}{detail}")
    return EXIT_OK if result.ok else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
