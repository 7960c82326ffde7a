#!/usr/bin/env python
"""
Entanglement network command line.

Subcommands:
    fringe      Fringe curves of one pair of end users
    chsh        CHSH value of one pair
    qkd         E91 key distribution between one pair
    secure-sum  Secure sum over a ring of parties
    demo-paper  Full demonstration over the four adjacent pairs of a ring

Exit codes: 0 success, 1 replay mismatch, 2 usage, 3 protocol abort, 4 I/O.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from analysis import AnalysisError
from qkd import ProtocolAbortError, QkdError
from secure_sum import DEFAULT_BIT_WIDTH, DEFAULT_ROUNDS, SecureSumError
from simulation import NetworkConfig, load_network_config
from transport import TRANSPORTS, TransportError
from utils.logger import setup_logger
from utils.metrics import write_metrics_file

from .commands import (
    DEFAULT_CHSH_SAMPLES,
    DEFAULT_FRINGE_POINTS,
    DEFAULT_FRINGE_PULSES,
    DEFAULT_TARGET_SIFTED,
    chsh_command,
    demo_command,
    fringe_command,
    qkd_command,
    secure_sum_command,
)
from .interfaces import (
    EXIT_ABORT,
    EXIT_FAILURE,
    EXIT_IO,
    EXIT_USAGE,
    CommandOutput,
    ReplayMismatchError,
)
from .manifest import (
    MANIFEST_NAME,
    ManifestError,
    RunManifest,
    build_manifest,
    load_manifest,
    verify_outputs,
    write_manifest,
)

logger = logging.getLogger("cli")

DEFAULT_DEMO_OUT = "entnet-demo"
REPORT_NAME = "report.txt"
MAX_SEED = 2 ** 64

ABORT_ERRORS = (QkdError, SecureSumError, TransportError, AnalysisError)


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed: {text!r}") from None
    if not 0 <= value < MAX_SEED:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {value}")
    return value


def _inputs(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid inputs: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    """Parser with one subparser per subcommand."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="Network configuration file (key = value lines)")
    common.add_argument("--seed", type=_seed, help="Unsigned 64-bit seed (random when omitted)")
    common.add_argument("--out", type=str, help="Output directory (CSV on stdout when omitted)")
    common.add_argument("--verbose", action="store_true", help="Enable verbose output")

    parser = argparse.ArgumentParser(prog="entnet", description="Entanglement access network simulator")
    subparsers = parser.add_subparsers(dest="command", required=True)

    fringe = subparsers.add_parser("fringe", parents=[common], help="Fringe curves of one pair")
    fringe.add_argument("--pair", required=True, help="Pair of end users, e.g. A1B2")
    fringe.add_argument("--basis", type=str.upper, choices=["Z", "X", "BOTH"], default="BOTH",
                        help="Alice at 0 degrees (Z), 45 degrees (X) or both")
    fringe.add_argument("--points", type=int, default=DEFAULT_FRINGE_POINTS, help="Bob angles per fringe")
    fringe.add_argument("--pulses", type=int, default=DEFAULT_FRINGE_PULSES, help="Pump pulses per basis")
    fringe.add_argument("--resamples", type=int, default=1000, help="Bootstrap resamples")

    chsh = subparsers.add_parser("chsh", parents=[common], help="CHSH value of one pair")
    chsh.add_argument("--pair", required=True, help="Pair of end users, e.g. A1B2")
    chsh.add_argument("--samples", type=int, default=DEFAULT_CHSH_SAMPLES, help="Coincidences per setting")
    chsh.add_argument("--resamples", type=int, default=1000, help="Bootstrap resamples")

    qkd = subparsers.add_parser("qkd", parents=[common], help="E91 key distribution between one pair")
    qkd.add_argument("--pair", required=True, help="Pair of end users, e.g. A1B2")
    qkd.add_argument("--target-sifted", type=int, default=DEFAULT_TARGET_SIFTED, help="Sifted bits to collect")
    qkd.add_argument("--workers", type=int, default=None, help="Threads for block reconciliation")

    secure_sum = subparsers.add_parser("secure-sum", parents=[common], help="Secure sum over a ring")
    secure_sum.add_argument("--inputs", type=_inputs, required=True,
                            help="Comma-separated party inputs, at least three")
    secure_sum.add_argument("--bits", type=int, default=DEFAULT_BIT_WIDTH, help="Bit width n")
    secure_sum.add_argument("--rounds", type=int, default=DEFAULT_ROUNDS, help="Number of rounds")
    secure_sum.add_argument("--transport", choices=list(TRANSPORTS), default="inprocess", help="Message transport")
    secure_sum.add_argument("--keys", choices=["seeded", "qkd"], default="seeded", help="Source of the ring keys")

    demo = subparsers.add_parser("demo-paper", parents=[common], help="Full demonstration with manifest")
    demo.add_argument("--points", type=int, default=DEFAULT_FRINGE_POINTS, help="Bob angles per fringe")
    demo.add_argument("--pulses", type=int, default=DEFAULT_FRINGE_PULSES, help="Pump pulses per fringe")
    demo.add_argument("--samples", type=int, default=DEFAULT_CHSH_SAMPLES, help="CHSH coincidences per setting")
    demo.add_argument("--target-sifted", type=int, default=DEFAULT_TARGET_SIFTED, help="Sifted bits per pair")
    demo.add_argument("--rounds", type=int, default=DEFAULT_ROUNDS, help="Secure-sum rounds")
    demo.add_argument("--resamples", type=int, default=1000, help="Bootstrap resamples")
    demo.add_argument("--manifest", type=str, help="Replay the run recorded in a manifest")
    return parser


def _load_config(path: Optional[str]) -> NetworkConfig:
    config = load_network_config(path)
    logger.debug("Network configuration: %s", config)
    return config


def _run(args: argparse.Namespace, config: NetworkConfig, seed: int) -> CommandOutput:
    if args.command == "fringe":
        return fringe_command(config, args.pair, args.basis, args.points, args.pulses, seed, args.resamples)
    if args.command == "chsh":
        return chsh_command(config, args.pair, args.samples, seed, args.resamples)
    if args.command == "qkd":
        return qkd_command(config, args.pair, args.target_sifted, seed, args.workers)
    if args.command == "secure-sum":
        return secure_sum_command(args.inputs, args.bits, args.rounds, args.transport, args.keys, config, seed)
    return demo_command(
        config, seed, args.points, args.pulses, args.samples, args.target_sifted, args.rounds, args.resamples
    )


def _replay(manifest: RunManifest) -> CommandOutput:
    if manifest.subcommand != "demo-paper":
        raise ManifestError(f"Manifest of {manifest.subcommand} cannot be replayed by demo-paper")
    logger.info("Replaying demo-paper with seed %d", manifest.seed)
    try:
        return demo_command(manifest.network_config(), seed=manifest.seed, **manifest.arguments)
    except TypeError as e:
        raise ManifestError(f"Manifest arguments do not fit demo-paper: {e}") from e


def write_outputs(output: CommandOutput, directory: Path, config: NetworkConfig) -> List[Path]:
    """Write artifacts, the report and the manifest of a run."""
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in output.files.items():
        path = directory / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    report = directory / REPORT_NAME
    report.write_text(output.report_text(), encoding="utf-8")
    written.append(report)
    manifest = build_manifest(
        output.subcommand, output.seed, output.arguments, config, directory, [*output.files, REPORT_NAME]
    )
    written.append(write_manifest(manifest, directory))
    return written


def _print_error(error: BaseException) -> None:
    print(f"Error: {error}", file=sys.stderr)
    for note in getattr(error, "__notes__", ()):
        print(f"  {note}", file=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    """Run the command line and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    setup_logger("cli", verbose=args.verbose)
    manifest_path = getattr(args, "manifest", None)
    out = args.out or (DEFAULT_DEMO_OUT if args.command == "demo-paper" else None)
    seed = args.seed if args.seed is not None else int(np.random.SeedSequence().entropy % MAX_SEED)

    try:
        if out is not None:
            Path(out).mkdir(parents=True, exist_ok=True)
        manifest = load_manifest(manifest_path) if manifest_path else None
        if manifest is not None:
            if args.config or args.seed is not None:
                logger.warning("--config and --seed are ignored when replaying a manifest")
            config = manifest.network_config()
            output = _replay(manifest)
        else:
            config = _load_config(args.config)
            logger.info("Running %s with seed %d", args.command, seed)
            output = _run(args, config, seed)

        if out is None:
            sys.stdout.write(next(iter(output.files.values()), ""))
            for line in output.summary:
                print(line, file=sys.stderr)
        else:
            written = write_outputs(output, Path(out), config)
            for line in output.summary:
                print(line)
            print(f"\n{len(written)} files written to {out}")

        if manifest is not None:
            mismatched = verify_outputs(manifest, out)
            if mismatched:
                raise ReplayMismatchError(mismatched)
            print(f"Replay matches {MANIFEST_NAME}")
        return output.exit_code
    except ProtocolAbortError as e:
        gamma = "unknown" if e.gamma is None else f"{e.gamma:.6g}"
        print(f"Error: {args.command} aborted at stage {e.stage} (gamma={gamma}): {e}", file=sys.stderr)
        for note in getattr(e, "__notes__", ()):
            print(f"  {note}", file=sys.stderr)
        return EXIT_ABORT
    except ABORT_ERRORS as e:
        _print_error(e)
        return EXIT_ABORT
    except ReplayMismatchError as e:
        _print_error(e)
        return EXIT_FAILURE
    except OSError as e:
        _print_error(e)
        return EXIT_IO
    except ValueError as e:
        _print_error(e)
        return EXIT_USAGE
    finally:
        try:
            write_metrics_file()
        except OSError as e:
            logger.warning("Metrics file not written: %s", e)


if __name__ == "__main__":
    sys.exit(main())
