"""
Command-line front end.

    sigconc <subcommand> --config FILE [--seed U64] [--out DIR] [--threads N] [--log-level LEVEL]

Every subcommand is an experiment kind. The config file is merged over the
project defaults and the kind's preset; --seed, --out and --threads
override the merged values. Results go to the output directory, the check
dashboard to stderr.
"""

import argparse
import logging
import sys
from typing import Dict, List, Optional

from config.settings import EXIT_VALIDATION, EXPERIMENT_KINDS, LOG_LEVEL
from src.configs.config_loader import ConfigLoader
from src.exceptions import ConfigError, InvariantFailure, SigConcError
from src.reporting.formatters import TextFormatter
from .runner import execute, exit_status

logger = logging.getLogger(__name__)

HELP = {
    "simulate": "Sample paths of a Gaussian model and write Path CSV",
    "sig": "Signatures of the paths in a Path CSV",
    "logsig": "Log-signatures (Lyndon coordinates) of the paths in a Path CSV",
    "tail": "Tail curve and stretched-exponential exponent fit",
    "variance": "Second and fourth moments of one signature coordinate",
    "meanconc": "Weighted-norm concentration of the empirical feature mean",
    "bchprobe": "Lipschitz growth of the truncated logarithm on weighted balls",
    "smallball": "Small-ball probabilities against C_k eps^(1/k)",
    "hyper": "Hypercontractive moment ratios",
    "plot": "SVG of tail curves with reference curves exp(-t^(2/k))",
    "levyarea": "Second moment of the Lévy area",
    "scaling": "Second moments over several horizons against T^(2kH)",
    "ouarea": "OU Lévy-area second moment with grid-refinement reference",
    "normtail": "Upper deviations of the weighted signature norm",
}


def _overrides(args: argparse.Namespace) -> Dict:
    overrides: Dict = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["output_dir"] = args.out
    if args.threads is not None:
        overrides["threads"] = args.threads
    return overrides


def _cmd_run(args: argparse.Namespace) -> int:
    loader = ConfigLoader()
    try:
        config = loader.load_validated(args.config, _overrides(args), experiment=args.command)
    except ConfigError as e:
        if e.validation_result is not None:
            print(TextFormatter.format_report(e.validation_result), file=sys.stderr)
        logger.error(str(e))
        return EXIT_VALIDATION
    except (SigConcError, OSError) as e:
        logger.error(str(e))
        return EXIT_VALIDATION

    try:
        return execute(config, report_stream=sys.stderr)
    except InvariantFailure as e:
        logger.error(str(e))
        return exit_status(e)
    except (SigConcError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        return exit_status(e)


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sigconc", description="Signature concentration lab")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in EXPERIMENT_KINDS:
        p_kind = sub.add_parser(kind, help=HELP[kind])
        p_kind.add_argument("--config", required=True, help="JSON experiment config")
        p_kind.add_argument("--seed", type=_seed, default=None, help="Master seed (overrides the config)")
        p_kind.add_argument("--out", default=None, help="Output directory (overrides the config)")
        p_kind.add_argument("--threads", type=_positive, default=None, help="Worker threads")
        p_kind.add_argument("--log-level", default=LOG_LEVEL, help="Logging level (default %(default)s)")
        p_kind.set_defaults(func=_cmd_run)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    return int(args.func(args))


if __name__ == "__main__":
    raise SystemExit(main())
