"""
densify command-line entry point.

* one subcommand per experiment, loaded from ``densify.commands.<name>``
* global flags (``--config``, ``--seed``, ``--threads``, ``--out``,
  ``--trials``, ``--format``) accepted before or after the subcommand
* pluggable log-level via --log-level; logs go to stderr only
* failures end as one ``densify: <Kind>: <message>`` line on stderr with
  exit code 2 (invalid input) or 3 (numeric failure)
"""

from __future__ import annotations

import argparse
import importlib
import logging
import sys
from typing import Any, Dict, List, Optional, Type

from densify.commands.base import BaseCommand
from densify.config import COMMANDS, load_config
from densify.errors import DensifyError
from densify.output.file_sink import ResultSink
from densify.pool import TrialPool

logger = logging.getLogger("densify.main")


# --------------------------------------------------------------------------- #
# helpers                                                                     #
# --------------------------------------------------------------------------- #
def snake_to_camel(name: str) -> str:
    """table1 → Table1, link_cdf → LinkCdf, etc."""
    return "".join(part.capitalize() for part in name.split("_"))


def import_command(command_name: str) -> Type[BaseCommand]:
    """
    Dynamically import a command module and return its command class.

    1. If the module exposes `COMMAND_CLASS`, use that.
    2. Otherwise fall back to `<CamelCase>Command`.
    """
    module_path = f"densify.commands.{command_name}"
    mod = importlib.import_module(module_path)

    if hasattr(mod, "COMMAND_CLASS"):
        return getattr(mod, "COMMAND_CLASS")

    class_name = f"{snake_to_camel(command_name)}Command"
    if hasattr(mod, class_name):
        return getattr(mod, class_name)

    raise ImportError(f"{module_path} is missing a command class")


def flag_overrides(args: argparse.Namespace, command_cls: Type[BaseCommand]) -> Dict[str, Any]:
    run = {
        key: getattr(args, key)
        for key in ("seed", "threads", "out", "trials", "format")
        if getattr(args, key, None) is not None
    }
    out: Dict[str, Any] = {"run": run}
    block = command_cls.overrides(args)
    if block:
        out[command_cls.name] = block
    return out


# --------------------------------------------------------------------------- #
# runner                                                                      #
# --------------------------------------------------------------------------- #
def run_command(args: argparse.Namespace) -> List:
    command_cls = import_command(args.command)
    cfg = load_config(getattr(args, "config", None), flag_overrides(args, command_cls))
    run = cfg["run"]
    sink = ResultSink(
        base_dir=run["out"],
        fmt=run["format"],
        command=args.command,
        seed=run["seed"],
        config={"run": run, args.command: cfg[args.command]},
    )
    logger.info("densify %s started (seed %d, %d thread(s))", args.command, run["seed"], run["threads"])
    with TrialPool(threads=run["threads"]) as pool:
        written = command_cls(cfg, sink, pool).run()
    logger.info("densify %s finished: %d file(s) in %s", args.command, len(written), run["out"])
    return written


# --------------------------------------------------------------------------- #
# CLI                                                                         #
# --------------------------------------------------------------------------- #
def _global_flags() -> argparse.ArgumentParser:
    # SUPPRESS keeps a flag given before the subcommand from being reset after it
    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("-c", "--config", default=argparse.SUPPRESS, help="YAML or JSON experiment configuration")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed (unsigned 64-bit)")
    g.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads (default 1)")
    g.add_argument("--out", default=argparse.SUPPRESS, help="output directory (default results/)")
    g.add_argument("--trials", type=int, default=argparse.SUPPRESS, help="override every Monte Carlo trial count")
    g.add_argument("--format", choices=["csv", "parquet"], default=argparse.SUPPRESS, help="table format")
    g.add_argument(
        "--log-level",
        default=argparse.SUPPRESS,
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="Console log level (default INFO)",
    )
    return g


def parse_args(argv=None):
    common = _global_flags()
    p = argparse.ArgumentParser(
        prog="densify",
        description="Network densification experiments: pathloss, coverage, critical density, mitigation",
        parents=[common],
    )
    sub = p.add_subparsers(dest="command", required=True, metavar="command")
    for name in COMMANDS:
        command_cls = import_command(name)
        sp = sub.add_parser(name, help=command_cls.help, parents=[common])
        command_cls.add_arguments(sp)
    return p.parse_args(argv)


def setup_logging(level: str):
    logging.basicConfig(
        level=getattr(logging, level),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        stream=sys.stderr,
    )


def main(argv: Optional[List[str]] = None) -> int:
    args = parse_args(argv)
    setup_logging(getattr(args, "log_level", "INFO"))
    try:
        run_command(args)
    except DensifyError as exc:
        print(f"densify: {type(exc).__name__}: {exc}".replace("\n", " "), file=sys.stderr)
        return exc.exit_code
    except KeyboardInterrupt:
        print("densify: interrupted", file=sys.stderr)
        return 130
    return 0


if __name__ == "__main__":
    sys.exit(main())
