"""
Dispersia Command Line
======================
    python cli.py run configs/acceptance.json [--seed 7] [--output-dir out] [-v]
    python cli.py lattice count --d 2 --N 10 --shape ball
    python cli.py lattice count --d 2 --R 25 --reps
    python cli.py hartree run configs/hartree_two_mode.json
    python cli.py fixtures emit [--out fixtures/]

Exit status: 0 success, 1 failed experiment or solver divergence,
2 invalid config or flags (nothing is written in that case).
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from config import get_logger, setup_logging
from hartree import SolverDivergence
from lattice_core import VALID_SHAPES, count_representations, enumerate_frequencies
from runner import ConfigError, emit_fixtures, run, run_hartree

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dispersia",
        description="Numerical lab for dispersive estimates on the torus.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="DEBUG logging on stderr")
    commands = parser.add_subparsers(dest="command", required=True)

    run_cmd = commands.add_parser("run", help="Run the experiments of a JSON config")
    run_cmd.add_argument("config", type=Path)
    run_cmd.add_argument("--seed", type=int, default=None, help="Override the config seed")
    run_cmd.add_argument("--output-dir", type=Path, default=None, help="Override the config output_dir")

    lattice = commands.add_parser("lattice", help="Lattice point counts")
    lattice_cmds = lattice.add_subparsers(dest="lattice_command", required=True)
    count = lattice_cmds.add_parser("count", help="#{k : shape(k, N)} or r_d(R)")
    count.add_argument("--d", type=int, required=True)
    count.add_argument("--N", type=float, default=None)
    count.add_argument("--shape", choices=VALID_SHAPES, default="ball")
    count.add_argument("--R", type=int, default=None, help="Integer for r_d(R) (with --reps)")
    count.add_argument("--reps", action="store_true", help="Count representations |k|² = R")

    hartree = commands.add_parser("hartree", help="Hartree split-step solver")
    hartree_cmds = hartree.add_subparsers(dest="hartree_command", required=True)
    hartree_run = hartree_cmds.add_parser("run", help="Solve a Hartree config")
    hartree_run.add_argument("config", type=Path)
    hartree_run.add_argument("--output-dir", type=Path, default=None)

    fixtures = commands.add_parser("fixtures", help="Canonical FourierState fixtures")
    fixtures_cmds = fixtures.add_subparsers(dest="fixtures_command", required=True)
    emit = fixtures_cmds.add_parser("emit", help="Write the fixtures as JSON")
    emit.add_argument("--out", type=Path, default=None)
    return parser


# ─── Commands ────────────────────────────────────────────────────────────────

def cmd_run(args: argparse.Namespace) -> int:
    try:
        outcome = run(args.config, seed=args.seed, output_dir=args.output_dir)
    except ConfigError as err:
        print(f"[error] {err}", file=sys.stderr)
        return EXIT_USAGE
    if not outcome.passed:
        print(f"[run] FAIL ({len(outcome.failures)} of {len(outcome.outcomes)} experiments)", file=sys.stderr)
        for failure in outcome.failures:
            reason = failure.error or ", ".join(failure.failed_identities) or "slope outside tolerance"
            print(f"  - {failure.descriptor.label}: {reason}", file=sys.stderr)
        return EXIT_FAILED
    print(f"[run] OK ({len(outcome.outcomes)} experiments, config {outcome.config.config_hash})")
    return EXIT_OK


def cmd_lattice_count(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    try:
        if args.reps:
            if args.R is None:
                parser.error("--reps needs --R")
            print(count_representations(args.d, args.R))
        else:
            if args.N is None:
                parser.error("lattice count needs --N (or --R with --reps)")
            print(enumerate_frequencies(args.d, args.N, args.shape).count)
    except ValueError as err:
        print(f"[error] {err}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def cmd_hartree_run(args: argparse.Namespace) -> int:
    try:
        result = run_hartree(args.config, output_dir=args.output_dir)
    except ConfigError as err:
        print(f"[error] {err}", file=sys.stderr)
        return EXIT_USAGE
    except SolverDivergence as err:
        print(f"[error] solver diverged at step {err.step}", file=sys.stderr)
        return EXIT_FAILED
    drift = result["conservation"]
    print(
        f"[hartree] steps={result['steps']} M={result['grid_points']} "
        f"mass_drift={drift['max_mass_drift']:.3e} energy_drift={drift['energy_drift']:.3e}"
        + (f" order={result['convergence_order']:.3f}" if "convergence_order" in result else "")
    )
    return EXIT_OK


def cmd_fixtures_emit(args: argparse.Namespace) -> int:
    written = emit_fixtures(args.out)
    for path in written:
        print(path)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(logging.DEBUG if args.verbose else logging.INFO)

    if args.command == "run":
        return cmd_run(args)
    if args.command == "lattice":
        return cmd_lattice_count(args, parser)
    if args.command == "hartree":
        return cmd_hartree_run(args)
    return cmd_fixtures_emit(args)


if __name__ == "__main__":
    sys.exit(main())
