"""Command-line entry point: ``rifields <verb> scenario.yaml [options]``."""
import argparse
import logging
import sys

import yaml

from . import __version__
from .scenario import (COMMANDS, ScenarioError, apply_overrides, load_text, parse, resolve_seed,
                       run_data, validate_data)

log = logging.getLogger("rifields")


def build_parser():
    parser = argparse.ArgumentParser(prog="rifields", description=(
        "Entropy certificates, tail bounds and Monte Carlo confidence regions "
        "for random fields in rearrangement-invariant spaces."))
    parser.add_argument("--version", action="version", version=f"rifields {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in ("validate",) + COMMANDS:
        p = sub.add_parser(verb)
        p.add_argument("scenario", help="YAML or JSON scenario file")
        p.add_argument("--seed", type=int, default=None, help="master seed (overrides the file)")
        p.add_argument("--out-dir", default=None, help="directory for reports and tables")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="dotted-path override, repeatable")
        p.add_argument("--threads", type=int, default=1)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        text = load_text(args.scenario)
        data = resolve_seed(apply_overrides(parse(text), args.set), args.seed)
    except (OSError, yaml.YAMLError) as exc:
        print(f"error: cannot read scenario: {exc}", file=sys.stderr)
        return 1
    except ScenarioError as exc:
        for d in exc.diagnostics:
            print(f"error: {d}", file=sys.stderr)
        return 1
    command = None if args.verb == "validate" else args.verb
    diags = validate_data(data, text, command)
    if args.verb == "validate":
        for d in diags:
            print(d)
        if not diags:
            print("ok")
        return 1 if diags else 0
    if diags:
        for d in diags:
            print(f"error: {d}", file=sys.stderr)
        return 1
    try:
        code, report, written = run_data(data, command, args.out_dir, args.threads)
    except ScenarioError as exc:
        for d in exc.diagnostics:
            print(f"error: {d}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(f"{command}: {report['status']}")
    for path in written:
        print(f"  wrote {path}")
    return code


if __name__ == "__main__":
    sys.exit(main())
