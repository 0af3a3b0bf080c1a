"""
gpminer Command-Line Interface

Parses flags into a validated CliConfig, loads the graph, runs one
application and writes the result payload. Compute time goes to stderr,
apart from the payload.

Exit codes: 0 success, 1 runtime error, 2 bad flags or configuration.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from .apps import execute_app
from .config import settings
from .graph import load_graph
from .models import AppName, CliConfig, ConfigurationError, GraphFormat

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpminer",
        description="Parallel in-memory graph pattern mining (tc, cf, mc, fsm).",
    )
    parser.add_argument("--app", required=True, choices=[a.value for a in AppName],
                        help="application to run")
    parser.add_argument("--input", required=True, type=Path, help="graph file")
    parser.add_argument("--format", choices=[f.value for f in GraphFormat],
                        help="input format (default: from extension, .lg is labeled)")
    parser.add_argument("--k", type=int, help="pattern size (vertices; edges+1 for fsm)")
    parser.add_argument("--minsup", type=int, help="minimum MNI support (fsm)")
    parser.add_argument("--threads", type=int, default=settings.num_workers,
                        help="worker processes (default: %(default)s)")
    parser.add_argument("--chunk-size", type=int, default=None,
                        help=f"level-1 block size, 0 disables blocking "
                             f"(default: {settings.chunk_size}; fsm never blocks)")
    parser.add_argument("--no-orient", dest="orient", action="store_false",
                        help="skip DAG orientation for tc/cf")
    parser.add_argument("--output", type=Path, default=settings.output_path,
                        help="result file (default: standard output)")
    parser.add_argument("--list", dest="list_embeddings", action="store_true",
                        help="also print the final-level embeddings")
    parser.add_argument("--json", dest="json_output", action="store_true",
                        help="print one JSON record instead of text")
    parser.add_argument("--memo", action="store_true",
                        help="memoized 4-motif classification (mc, k=4)")
    parser.add_argument("--dump-level", type=Path, default=None,
                        help="write the last embedding level as TSV to this file")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("--quiet", action="store_true", help="errors only")
    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.ERROR
    else:
        level = getattr(logging, settings.log_level.upper(), logging.WARNING)
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(level)


def config_from_args(args: argparse.Namespace) -> CliConfig:
    """Validated configuration; raises ValidationError on conflicts."""
    chunk_size = args.chunk_size
    if chunk_size is None:
        chunk_size = 0 if args.app == AppName.FSM.value else settings.chunk_size
    return CliConfig(
        app=args.app,
        input=args.input,
        format=args.format,
        k=args.k,
        minsup=args.minsup,
        threads=args.threads,
        chunk_size=chunk_size,
        orient=args.orient,
        output=args.output,
        list_embeddings=args.list_embeddings,
        json_output=args.json_output,
        memo=args.memo,
        dump_level=args.dump_level,
    )


def _write_payload(payload: str, output: Optional[Path]) -> None:
    if output is None:
        sys.stdout.write(payload)
        sys.stdout.flush()
        return
    with open(output, "w", encoding="utf-8") as f:
        f.write(payload)


def run(argv: Optional[List[str]] = None) -> int:
    """Run the command line; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    _configure_logging(args)
    try:
        config = config_from_args(args)
    except (ValidationError, ConfigurationError) as exc:
        logger.error("invalid configuration: %s", exc)
        return EXIT_USAGE

    try:
        graph = load_graph(config.input, config.format)
        result, mining = execute_app(config, graph)
        payload = result.to_json_line() + "\n" if config.json_output else result.payload_text()
        _write_payload(payload, config.output)
        if config.dump_level is not None:
            el = mining.embedding_list
            with open(config.dump_level, "w", encoding="utf-8") as f:
                el.dump_level(el.current_level, f)
    except (ValueError, OSError, IndexError) as exc:
        logger.error("%s", exc)
        return EXIT_RUNTIME

    sys.stderr.write(f"elapsed: {result.elapsed:.6f}s\n")
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
