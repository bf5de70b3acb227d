"""Command-line entry point: ``mprlab <verb> [--config F] [--out P] [--seed S]``.

Exit codes: 0 success, 2 configuration or validation failure, 3 domain failure
(for example no steady state), 4 I/O failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import threading
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from rich.console import Console

from .config import DEFAULT_OUT, DEFAULT_SEED, KINDS, Scenario, load_config, make_scenario, output_path_for
from .errors import ConfigError, DomainError, MprLabError, SweepError
from .scenarios import FIGURE_IDS, preset, run_scenario

log = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_IO = 4

# verb -> scenario kinds it runs; the first one is used without a config file
VERBS: Dict[str, Sequence[str]] = {
    "analyze": ("scaling", "r-sweep", "throughput-vs-n"),
    "fixed-point": ("fixed-point",),
    "optimize-r": ("optimal-r", "beb-efficiency"),
    "simulate": ("simulate",),
    "simo": ("simo-compare",),
    "phy": ("phy-demo",),
    "run": KINDS,
}


def _log_unhandled_exception(exc_type, exc_value, exc_traceback):
    if issubclass(exc_type, KeyboardInterrupt):
        sys.__excepthook__(exc_type, exc_value, exc_traceback)
        return
    logging.error("Uncaught exception", exc_info=(exc_type, exc_value, exc_traceback))


def _thread_excepthook(args):
    if issubclass(args.exc_type, KeyboardInterrupt):
        return
    logging.error("Uncaught thread exception", exc_info=(args.exc_type, args.exc_value, args.exc_traceback))


def configure_logging(level: Optional[str] = None, log_file: Optional[str] = None) -> None:
    """Set up root logging from MPRLAB_LOG_LEVEL / MPRLAB_LOG_FILE and install exception hooks."""
    name = (level or os.environ.get("MPRLAB_LOG_LEVEL", "WARNING")).upper()
    target = log_file or os.environ.get("MPRLAB_LOG_FILE")
    kwargs = {"filename": target} if target else {"stream": sys.stderr}
    logging.basicConfig(level=getattr(logging, name, logging.WARNING), format=LOG_FORMAT, force=True, **kwargs)
    sys.excepthook = _log_unhandled_exception
    threading.excepthook = _thread_excepthook


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _assignment(text: str) -> tuple:
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    return key.strip().lower(), value.strip()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="scenario file (INI)")
    common.add_argument("--out", help=f"output directory, .csv file, or - for stdout (default {DEFAULT_OUT})")
    common.add_argument("--seed", type=_seed, help=f"base seed (default {DEFAULT_SEED})")
    common.add_argument(
        "--set", dest="overrides", action="append", type=_assignment, default=[], metavar="KEY=VALUE",
        help="scenario parameter, repeatable (e.g. --set M=1..10 --set mode=basic)",
    )
    common.add_argument("--kind", help="scenario kind when no config is given")
    common.add_argument("--no-progress", action="store_true", help="never draw progress bars")

    parser = argparse.ArgumentParser(prog="mprlab", description="Multipacket-reception WLAN analysis and simulation.")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, kinds in VERBS.items():
        sub.add_parser(verb, parents=[common], help=f"run {', '.join(kinds)} scenarios")
    rep = sub.add_parser("reproduce", parents=[common], help="regenerate the data behind a figure or table")
    rep.add_argument("figure", choices=FIGURE_IDS)
    return parser


def resolve_scenarios(args: argparse.Namespace) -> List[Scenario]:
    overrides = dict(args.overrides)
    if args.verb == "reproduce":
        seed = DEFAULT_SEED if args.seed is None else args.seed
        out = DEFAULT_OUT if args.out is None else args.out
        if args.figure == "table1":
            return [Scenario(kind="table1", params={}, output_path=output_path_for("table1", "", out), seed=seed)]
        return [preset(args.figure, seed=seed, out=out)]

    allowed = VERBS[args.verb]
    if args.config is not None:
        cfg = load_config(args.config, seed=args.seed, out=args.out, overrides=overrides)
        picked = [s for s in cfg.scenarios if s.kind in allowed]
        if not picked:
            raise ConfigError(f"{args.config}: no sections for '{args.verb}' (kinds: {', '.join(allowed)})")
        return picked

    kind = (args.kind or allowed[0]).lower()
    if kind not in allowed:
        raise ConfigError(f"kind {kind!r} not available for '{args.verb}' (kinds: {', '.join(allowed)})")
    return [
        make_scenario(
            kind,
            overrides,
            seed=DEFAULT_SEED if args.seed is None else args.seed,
            out=DEFAULT_OUT if args.out is None else args.out,
        )
    ]


def main(argv: Optional[Sequence[str]] = None) -> int:
    configure_logging()
    err = Console(stderr=True, soft_wrap=True, highlight=False)
    args = build_parser().parse_args(argv)

    def fail(code: int, exc: object) -> int:
        err.print(f"mprlab: error: {exc}", markup=False)
        log.debug("failure: %s", exc, exc_info=isinstance(exc, BaseException))
        return code

    try:
        scenarios = resolve_scenarios(args)
        for s in scenarios:
            path = run_scenario(s, show_progress=not args.no_progress)
            if path is not None:
                err.print(f"wrote {path}", markup=False)
    except ConfigError as exc:
        return fail(EXIT_CONFIG, exc)
    except SweepError as exc:
        first = exc.errors[min(exc.errors)]
        return fail(EXIT_DOMAIN, f"{exc}; first: {first}")
    except (DomainError, MprLabError) as exc:
        return fail(EXIT_DOMAIN, exc)
    except OSError as exc:
        return fail(EXIT_IO, exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
