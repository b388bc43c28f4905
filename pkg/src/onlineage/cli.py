"""Command-line entry point: ``onlineage <stage> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from onlineage import __version__
from onlineage.pipeline import (
    STAGES,
    ConfigError,
    PipelineError,
    load_config,
    run_pipeline,
    run_stage,
)

log = logging.getLogger("onlineage")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage, which already matches the
    config-error code."""


def _run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="key = value config file (flags override it)")
    p.add_argument("--input", type=Path, help="JSON-lines corpus")
    p.add_argument("--out", type=Path, help="run directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--pub-start", type=int)
    p.add_argument("--pub-end", type=int)
    p.add_argument("--horizon", type=int, help="last year checked for activity")
    p.add_argument("--min-platforms", type=int)
    p.add_argument("--k", type=int, help="fixed cluster count (default: elbow)")
    p.add_argument("--k-max", type=int)
    p.add_argument("--models", help="comma-separated model ids")
    p.add_argument("--cluster-with-year", action="store_true", default=None,
                   help="add the scaled year as a second clustering feature")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="onlineage", description="Online-longevity analysis pipeline.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*STAGES, "run-all"):
        _run_options(sub.add_parser(name, help=f"run the {name} stage" if name != "run-all"
                                    else "run every stage in order"))
    s = sub.add_parser("synth", help="write a synthetic corpus")
    s.add_argument("--n", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", type=Path, required=True)
    s.add_argument("--active-fraction", type=float)
    s.add_argument("--events", action="store_true", help="emit dated event lists")
    return parser


def _config_from(args):
    models = None
    if args.models:
        models = tuple(m.strip() for m in args.models.split(",") if m.strip())
    return load_config(
        args.config,
        input=args.input, out=args.out, seed=args.seed, pub_start=args.pub_start,
        pub_end=args.pub_end, horizon=args.horizon, min_platforms=args.min_platforms,
        k=args.k, k_max=args.k_max, models=models, cluster_with_year=args.cluster_with_year,
    )


def _synth(args) -> None:
    from onlineage.synth import SynthConfig, generate_corpus, write_corpus

    cfg = SynthConfig(n_articles=args.n, seed=args.seed, emit_events=args.events)
    if args.active_fraction is not None:
        cfg.active_fraction = args.active_fraction
    try:
        cfg.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    records, truth = generate_corpus(cfg)
    path = write_corpus(args.out, records, truth, cfg)
    log.info("wrote %d articles to %s", len(records), path)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "synth":
            _synth(args)
        else:
            config = _config_from(args)
            if args.command == "run-all":
                run_pipeline(config)
            else:
                run_stage(config, args.command)
    except PipelineError as exc:
        log.error("%s", exc)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        # unreadable files and malformed inputs surface as data errors
        log.error("%s", exc)
        return EXIT_DATA
    except Exception:
        log.exception("internal error")
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
