"""Command-line entry point: ``kfidelity <command> --config PATH``.

Exit status: 0 success, 1 computation error, 2 usage or config error,
3 I/O error, 4 a verification job ran but reported failing checks.
"""

import argparse
import sys

from .config import COMMANDS, parse_config
from .errors import ConfigError, KFidelityError
from .jobs import run_job
from .models import catalog

EXIT_OK, EXIT_COMPUTE, EXIT_USAGE, EXIT_IO, EXIT_CHECKS = 0, 1, 2, 3, 4


def _list_models():
    lines = []
    for m in catalog():
        kind = f"sectors {'+'.join(m.sectors)}" if m.composite else f"d = {m.dim_h}"
        linear = ", ".join(m.linear_in) if m.linear_in else "-"
        lines.append(f"{m.id:24s} {m.dim_k}d k, {kind}; params: {', '.join(m.schema)}; linear in: {linear}")
        lines.append(f"{'':24s} {m.description}")
    return "\n".join(lines) + "\n"


def build_parser():
    parser = argparse.ArgumentParser(prog="kfidelity", description="Momentum-resolved fidelity scans.")
    parser.add_argument("--list-models", action="store_true", help="print the model catalog and exit")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run a {name} job")
        p.add_argument("--config", required=True, metavar="PATH", help="job config file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", dest="overrides",
                       help="override a config key (repeatable)")
        p.add_argument("--out", metavar="DIR", default=None, help="directory prefix for relative output paths")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_models:
        sys.stdout.write(_list_models())
        return EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("kfidelity: error: a command is required", file=sys.stderr)
        return EXIT_USAGE
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"kfidelity: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        job = parse_config(text, args.overrides, command=args.command)
    except ConfigError as exc:
        print(f"kfidelity: {args.config}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        result = run_job(job, args.out)
    except KFidelityError as exc:
        print(f"kfidelity: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except OSError as exc:
        print(f"kfidelity: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"kfidelity: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    sys.stdout.write(result.report)
    for kind, path in result.artifacts:
        print(f"wrote {kind}: {path}", file=sys.stderr)
    return EXIT_OK if result.ok else EXIT_CHECKS


if __name__ == "__main__":
    sys.exit(main())
