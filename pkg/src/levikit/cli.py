"""
Command line front end.

``levikit list``
    print the scenario catalog;
``levikit run --scenario NAME [--config PATH] --out DIR [--seed N]``
    run one scenario and write its report;
``levikit verify DIR``
    re-check the hashes and verdicts of a report directory.

Exit codes: 0 when every verdict passes, 2 when a verdict fails, 1 on
usage, configuration or execution errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings

from .report import emit_report, verify_report
from .scenarios import REGISTRY, ConfigError, ScenarioConfig, run_scenario

EXIT_OK, EXIT_ERROR, EXIT_VERDICT = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="levikit", description=__doc__.split("\n\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("list", help="list the scenario catalog")
    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("--scenario", required=True)
    run.add_argument("--config", help="JSON configuration document")
    run.add_argument("--out", required=True, help="report directory")
    run.add_argument("--seed", type=int, help="override the configured seed")
    ver = sub.add_parser("verify", help="re-check a report directory")
    ver.add_argument("report_dir")
    return ap


def _run(args) -> int:
    if args.scenario not in REGISTRY:
        print(f"levikit: unknown scenario {args.scenario!r} "
              f"(try 'levikit list')", file=sys.stderr)
        return EXIT_ERROR
    try:
        if args.config:
            cfg = ScenarioConfig.load(args.config, scenario=args.scenario, seed=args.seed,
                                      out=args.out)
        else:
            cfg = ScenarioConfig(args.scenario, seed=0 if args.seed is None else args.seed,
                                 out=args.out)
    except (ConfigError, OSError) as exc:
        print(f"levikit: configuration error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    try:
        rep = run_scenario(cfg)
    except Exception as exc:                      # report, do not write partial output
        print(f"levikit: {cfg.scenario} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    try:
        emit_report(rep, args.out)
    except OSError as exc:
        print(f"levikit: cannot write report: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for v in rep.verdicts:
        print(f"{v['status'].upper():4s}  {v['name']}  {v['value']}")
    if rep.passed:
        print(f"{cfg.scenario}: all {len(rep.verdicts)} verdicts pass")
        return EXIT_OK
    print(f"{cfg.scenario}: failed {', '.join(rep.failures)}")
    return EXIT_VERDICT


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if not args.verbose:
        warnings.simplefilter("ignore")
    if args.command == "list":
        for name in sorted(REGISTRY):
            print(f"{name:22s} {REGISTRY[name].summary}")
        return EXIT_OK
    if args.command == "verify":
        code, msgs = verify_report(args.report_dir)
        for m in msgs:
            print(m)
        return code
    return _run(args)


if __name__ == "__main__":
    sys.exit(main())
