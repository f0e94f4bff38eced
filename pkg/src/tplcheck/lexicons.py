"""Bundled data-file access with the TPLCHECK_LEXICON_DIR override.

Rule and lexicon files ship inside the package under ``tplcheck/data``.
Setting the environment variable TPLCHECK_LEXICON_DIR points lookups at a
directory of replacement files; files missing there fall back to the
bundled copies.
"""

from __future__ import annotations

import os
from importlib import resources
from pathlib import Path
from typing import Iterator, Optional, Union

__all__ = ["data_text", "iter_tsv", "read_text"]

_ENV_VAR = "TPLCHECK_LEXICON_DIR"


def data_text(name: str) -> str:
    """Contents of a bundled data file, honoring TPLCHECK_LEXICON_DIR."""
    override = os.environ.get(_ENV_VAR)
    if override:
        candidate = Path(override) / name
        if candidate.is_file():
            return candidate.read_text(encoding="utf-8")
    return (resources.files("tplcheck.data") / name).read_text(encoding="utf-8")


def read_text(path: Optional[Union[str, Path]], default_name: str) -> str:
    """Text of ``path`` when given, else the bundled file ``default_name``."""
    if path is None:
        return data_text(default_name)
    return Path(path).read_text(encoding="utf-8")


def iter_tsv(text: str) -> Iterator[tuple[int, list[str]]]:
    """(line number, columns) for each non-blank, non-comment TSV line."""
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, [col.strip() for col in line.split("\t")]
