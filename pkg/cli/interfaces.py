"""
CLI Interfaces

Exit codes, usage errors and the output of a subcommand.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List

EXIT_OK = 0
EXIT_FAILURE = 1        # replayed outputs differ from the manifest
EXIT_USAGE = 2
EXIT_ABORT = 3
EXIT_IO = 4


class UsageError(ValueError):
    """Raised when command-line values are outside what a subcommand accepts."""
    pass


class ReplayMismatchError(Exception):
    """Raised when replayed artifacts do not hash to the manifest values."""

    def __init__(self, names: List[str]):
        super().__init__(f"Replayed artifacts differ from the manifest: {', '.join(names)}")
        self.names = names


@dataclass
class CommandOutput:
    """
    Artifacts and summary of one subcommand run.

    Attributes:
        subcommand: Subcommand name
        seed: Seed the run used
        arguments: Subcommand options, recorded in the manifest
        files: Artifact texts keyed by file name, in emission order
        summary: Human-readable report lines
        exit_code: Exit code of a run that finished without an exception
    """

    subcommand: str
    seed: int
    arguments: Dict[str, Any] = field(default_factory=dict)
    files: Dict[str, str] = field(default_factory=dict)
    summary: List[str] = field(default_factory=list)
    exit_code: int = EXIT_OK

    def add_file(self, name: str, text: str) -> None:
        if name in self.files:
            raise ValueError(f"Duplicate artifact name: {name}")
        self.files[name] = text

    def report_text(self) -> str:
        return "\n".join(self.summary) + "\n"
