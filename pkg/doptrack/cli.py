import argparse
import sys
from pathlib import Path
from typing import List, Optional

from doptrack import pipeline
from doptrack.errors import ConfigError, StageError
from doptrack.utils import log

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STAGE = 3
EXIT_OUTPUT = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="doptrack",
        description="Track a drone from passive bistatic Doppler measurements.",
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="INFO, or DEBUG when repeated"
    )
    parser.add_argument("-q", "--quiet", action="store_true", help="errors only")

    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run the tracking pipeline")
    run.add_argument("config", type=Path, help="JSON run configuration")
    run.add_argument("-o", "--output-dir", type=Path, help="overrides output_dir")

    score = commands.add_parser("score", help="score a reconstruction against a truth")
    score.add_argument("reconstruction", type=Path, help="trajectory CSV")
    score.add_argument("truth", type=Path, help="truth trajectory CSV")

    synth = commands.add_parser("synth", help="write IQ fixtures of a scenario")
    synth.add_argument("config", type=Path, help="JSON run configuration")
    synth.add_argument("-o", "--output-dir", type=Path, help="fixture directory")

    return parser


def exit_code(error: StageError) -> int:
    if error.stage == "config" or isinstance(error.cause, ConfigError):
        return EXIT_CONFIG
    if error.stage == "output":
        return EXIT_OUTPUT
    return EXIT_STAGE


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    log.configure(-1 if args.quiet else args.verbose)

    try:
        if args.command == "run":
            outcome = pipeline.run(args.config, args.output_dir)
            print(
                f"P50 {outcome.report.p50:.3f} m  P90 {outcome.report.p90:.3f} m  "
                f"max {outcome.report.max:.3f} m"
            )
        elif args.command == "score":
            report = pipeline.score_files(args.reconstruction, args.truth)
            sys.stdout.write(report.to_json())
        else:
            for path in pipeline.synth_fixtures(args.config, args.output_dir):
                print(path)
    except StageError as error:
        print(f"doptrack: error [{error.stage}]: {error.cause}", file=sys.stderr)
        return exit_code(error)

    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
