"""Command-line entry point: ``chgsim <command> <config> [options]``."""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, NoReturn, Optional, Sequence

from chgsim.commands import COMMANDS
from chgsim.core.exceptions import ConfigError
from chgsim.core.logger import bind_run_context, logger, setup_logger
from chgsim.middleware.error_handler import EXIT_CONFIG, handle_command
from chgsim.models import RunConfig
from chgsim.services.config_parser import parse_config

# sections each command cannot run without
REQUIRED_SECTIONS: Dict[str, Sequence[str]] = {
    "simulate": ("grid", "time"),
    "check": ("grid",),
    "symbol-scan": (),
    "extend": (),
    "sweep": ("grid", "time"),
}


def _values(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got '{text}'") from exc


class ChgsimArgumentParser(argparse.ArgumentParser):
    """Usage errors are configuration errors and exit with code 4."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = ChgsimArgumentParser(
        prog="chgsim",
        description="Cahn-Hilliard-Gurtin simulation and verification toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("config", help="run configuration file")
        cmd.add_argument("--out-dir", default=None, help="output directory (default: output.dir)")
        cmd.add_argument("--quiet", action="store_true", help="log warnings and errors only")
        if name in ("simulate", "check", "sweep"):
            cmd.add_argument("--seed", type=int, default=None, help="seed for random initial data")
        if name == "simulate":
            cmd.add_argument("--snapshot-every", type=int, default=None, help="snapshot cadence in steps")
        if name == "sweep":
            cmd.add_argument("--param", default=None, help="dotted parameter path, e.g. coefficients.beta")
            cmd.add_argument("--values", type=_values, default=None, help="comma-separated values")
    return parser


def load_config(path: str, command: str) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read configuration '{path}'", [{"key": "config", "message": str(exc)}]) from exc
    return parse_config(text, REQUIRED_SECTIONS[command])


def _dispatch(args: argparse.Namespace) -> int:
    config = load_config(args.config, args.command)
    out_dir = Path(args.out_dir or config.output.dir)
    options: Dict[str, Any] = {}
    if args.command in ("simulate", "check", "sweep"):
        options["seed"] = args.seed
    if args.command == "simulate":
        options["snapshot_every"] = args.snapshot_every
    if args.command == "sweep":
        options["param"] = args.param
        options["values"] = args.values
    bind_run_context(args.command, args.config)
    logger.info("Running command", out_dir=str(out_dir))
    return COMMANDS[args.command](config, out_dir, **options)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logger(level="WARNING" if args.quiet else None)
    return handle_command(_dispatch, args)


if __name__ == "__main__":
    sys.exit(main())
