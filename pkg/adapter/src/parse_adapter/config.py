"""Run configuration and error types for the adapter."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path


class BackendMissing(Exception):
    """The requested parsing backend is not installed or cannot be loaded."""


class EncodingError(Exception):
    """An input file could not be decoded as text."""


@dataclass(frozen=True)
class AdapterConfig:
    """Settings for one conversion run.

    ``inputs`` are read in order and concatenated into a single output
    document; ``html`` selects tag stripping for every input of the run.
    """

    inputs: tuple[Path, ...]
    output: Path
    html: bool = False
    backend: str = "builtin"

    def __post_init__(self) -> None:
        if not self.inputs:
            raise ValueError("at least one input file is required")
        object.__setattr__(self, "inputs", tuple(Path(p) for p in self.inputs))
        object.__setattr__(self, "output", Path(self.output))
