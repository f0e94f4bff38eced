"""End-to-end conversion: raw policy files in, annotated sentence file out.

The output is the tab-separated format the checker reads: per sentence a
``# sent_id`` and ``# text`` comment, then one row per token with index,
form, lemma, part of speech, 1-based head index (0 for the root), and
dependency relation.  Sentences are separated by blank lines.
"""

from __future__ import annotations

from pathlib import Path

from .config import AdapterConfig, EncodingError
from .htmltext import html_blocks
from .pipeline import Row
from .textprep import blocks_from_text, split_sentences


def read_text(path: Path) -> str:
    """Read a file as UTF-8, wrapping decode failures in ``EncodingError``."""
    data = path.read_bytes()
    try:
        return data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise EncodingError(f"{path}: not valid UTF-8 text ({exc.reason} at byte {exc.start})") from exc


def render_conllu(sentences: list[list[Row]]) -> str:
    """Serialize analysed sentences in the annotated-policy format."""
    parts = []
    for sid, rows in enumerate(sentences):
        lines = [f"# sent_id = {sid}", f"# text = {' '.join(r.form for r in rows)}"]
        for i, row in enumerate(rows):
            head = 0 if row.head < 0 else row.head + 1
            lines.append(f"{i + 1}\t{row.form}\t{row.lemma}\t{row.upos}\t{head}\t{row.deprel}")
        parts.append("\n".join(lines))
    if not parts:
        return ""
    return "\n\n".join(parts) + "\n"


def convert_text(text: str, backend, html: bool = False) -> list[list[Row]]:
    """Segment one document and parse every non-empty sentence."""
    blocks = html_blocks(text) if html else blocks_from_text(text)
    sentences = []
    for block in blocks:
        for sentence in split_sentences(block):
            rows = backend.parse(sentence)
            if rows:
                sentences.append(rows)
    return sentences


def adapt(config: AdapterConfig) -> Path:
    """Convert the configured inputs and write the annotated output file."""
    from .backends import get_backend

    backend = get_backend(config.backend)
    sentences: list[list[Row]] = []
    for path in config.inputs:
        text = read_text(path)
        sentences.extend(convert_text(text, backend, html=config.html))
    config.output.write_text(render_conllu(sentences), encoding="utf-8")
    return config.output
