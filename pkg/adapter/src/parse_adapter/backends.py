"""Parsing backends.

``builtin`` is the dependency-only rule pipeline shipped with this package;
``spacy`` delegates to a statistical model when the optional extra is
installed.  Both take one segmented sentence and return analysed token rows.
"""

from __future__ import annotations

from .config import BackendMissing
from .pipeline import Row, analyze


class BuiltinBackend:
    """Deterministic rule-based analysis; needs no third-party packages."""

    name = "builtin"

    def parse(self, sentence: str) -> list[Row]:
        return analyze(sentence)


class SpacyBackend:
    """Statistical analysis through spacy's small English model."""

    name = "spacy"
    _MODEL = "en_core_web_sm"

    def __init__(self) -> None:
        try:
            import spacy
        except ImportError as exc:
            raise BackendMissing(
                "the spacy backend needs the 'spacy' package; install with the [spacy] extra"
            ) from exc
        try:
            self._nlp = spacy.load(self._MODEL)
        except OSError as exc:
            raise BackendMissing(
                f"the spacy backend needs the {self._MODEL} model: "
                f"python -m spacy download {self._MODEL}"
            ) from exc

    def parse(self, sentence: str) -> list[Row]:
        doc = self._nlp(sentence)
        tokens = [t for t in doc if not t.is_space]
        index = {t.i: pos for pos, t in enumerate(tokens)}
        rows = []
        for t in tokens:
            head = -1 if t.head is t else index.get(t.head.i, -1)
            deprel = "root" if head == -1 else t.dep_.lower()
            rows.append(Row(t.text, t.lemma_, t.pos_, head, deprel))
        return rows


_BACKENDS = {
    BuiltinBackend.name: BuiltinBackend,
    SpacyBackend.name: SpacyBackend,
}


def get_backend(name: str):
    """Instantiate a backend by name; unknown names raise ``ValueError``."""
    try:
        factory = _BACKENDS[name]
    except KeyError:
        known = ", ".join(sorted(_BACKENDS))
        raise ValueError(f"unknown backend {name!r} (known: {known})") from None
    return factory()
