# (C) Copyright 2024- spinstab developers.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

import argparse

from .runner import ExperimentRunner
from .verify import SmokeSuite

__all__ = ["main", "parser"]


def parser():
    p = argparse.ArgumentParser(
        prog="spinstab", description="Stability and factorization identities of Gaussian spin glasses"
    )
    p.add_argument("--no-colour", dest="no_colour", action="store_true", help="Disable colour output")
    p.add_argument("--verbose", "-v", action="store_true", help="Print debug messages")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run the identity checks of an experiment config")
    run.add_argument("config", help="Experiment file (YAML or JSON)")
    run.add_argument("--output", help="Output directory, overriding the config")

    verify = sub.add_parser("verify", help="Run the built-in smoke suite")
    verify.add_argument("--quick", action="store_true", help="Fewer samples and temperatures")
    verify.add_argument("--output", help="Write report.json into this directory")
    verify.add_argument("--workers", type=int, default=1, help="Worker threads for disorder samples")

    report = sub.add_parser("report", help="Re-render the summary table of a stored report")
    report.add_argument("directory", help="Output directory of a previous run, or a report.json")
    return p


def main(argv=None):
    args = parser().parse_args(argv)
    if args.command == "run":
        return ExperimentRunner(
            config=args.config, output=args.output, no_colour=args.no_colour, verbose=args.verbose
        ).run()
    if args.command == "verify":
        return SmokeSuite(
            quick=args.quick, output=args.output, workers=args.workers, no_colour=args.no_colour, verbose=args.verbose
        ).run()
    return ExperimentRunner(directory=args.directory, no_colour=args.no_colour).report()
