import abc
import argparse
from pathlib import Path
from typing import Any, Dict, List

from densify.output.file_sink import ResultSink
from densify.pool import TrialPool


class BaseCommand(abc.ABC):
    """
    Abstract base class for all experiment commands.

    A command reads its own block of the resolved config, runs the
    experiment on the shared worker pool and writes through the sink.
    """

    #: subcommand name; also the config block the command reads
    name: str = ""
    help: str = ""

    def __init__(self, cfg: Dict[str, Any], sink: ResultSink, pool: TrialPool):
        self.cfg = cfg
        self.sink = sink
        self.pool = pool

    @property
    def block(self) -> Dict[str, Any]:
        return self.cfg[self.name]

    @property
    def seed(self) -> int:
        return int(self.cfg["run"]["seed"])

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        """Register command-specific flags (none by default)."""

    @classmethod
    def overrides(cls, args: argparse.Namespace) -> Dict[str, Any]:
        """Config values taken from the command-specific flags."""
        return {}

    @abc.abstractmethod
    def run(self) -> List[Path]:
        """
        Run the experiment and return the files written.
        """
