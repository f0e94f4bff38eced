"""Plain-text preparation: block splitting, sentence segmentation, tokenization.

A *block* is a display unit (a paragraph of a text file, or the text of one
HTML block element).  Sentences never cross block boundaries, which keeps
headings and list items from gluing onto the prose around them.
"""

from __future__ import annotations

import re

_WS = re.compile(r"\s+")

# Words whose trailing period does not end a sentence.
_ABBREVIATIONS = {"e.g", "i.e", "etc", "inc", "ltd", "corp", "no", "mr", "mrs", "ms", "dr", "vs"}

# Punctuation split off as standalone single-character tokens.
_EDGE_PUNCT = ".,;:!?\"'()[]{}%&"

# Characters that attach to the preceding token when sentences are re-joined.
_CLOSERS = ".,;:!?)]}'\""
_OPENERS = "([{"


def normalize_space(text: str) -> str:
    """Collapse all whitespace runs to single spaces and trim the ends."""
    return _WS.sub(" ", text).strip()


def blocks_from_text(text: str) -> list[str]:
    """Split plain text into paragraph blocks at blank-line runs."""
    blocks = []
    for raw in re.split(r"\n\s*\n", text):
        block = normalize_space(raw)
        if block:
            blocks.append(block)
    return blocks


def _ends_sentence(text: str, i: int) -> bool:
    """True when the terminator at ``text[i]`` closes a sentence."""
    if text[i] in "!?":
        return True
    # A period: reject decimal points and known abbreviations, and require
    # the next material to look like a sentence start (or end of block).
    if i > 0 and text[i - 1].isdigit() and i + 1 < len(text) and text[i + 1].isdigit():
        return False
    j = i - 1
    while j >= 0 and not text[j].isspace():
        j -= 1
    word = text[j + 1 : i].strip(".").lower()
    if word in _ABBREVIATIONS:
        return False
    k = i + 1
    while k < len(text) and text[k] in _CLOSERS:
        k += 1
    while k < len(text) and text[k].isspace():
        k += 1
    if k == len(text):
        return True
    return text[k].isupper() or text[k].isdigit() or text[k] in "\"'(["


def split_sentences(block: str) -> list[str]:
    """Split one block into sentences, keeping terminal punctuation."""
    sentences = []
    start = 0
    for i, ch in enumerate(block):
        if ch in ".!?" and _ends_sentence(block, i):
            end = i + 1
            while end < len(block) and block[end] in _CLOSERS:
                end += 1
            piece = block[start:end].strip()
            if piece:
                sentences.append(piece)
            start = end
    tail = block[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def tokenize(sentence: str) -> list[str]:
    """Split a sentence into word and punctuation tokens.

    Hyphenated words stay whole; contracted negations split off as ``n't``.
    """
    tokens: list[str] = []
    for chunk in sentence.split():
        lead: list[str] = []
        while chunk and chunk[0] in _EDGE_PUNCT:
            lead.append(chunk[0])
            chunk = chunk[1:]
        trail: list[str] = []
        while chunk and chunk[-1] in _EDGE_PUNCT:
            trail.append(chunk[-1])
            chunk = chunk[:-1]
        tokens.extend(lead)
        if chunk:
            if chunk.lower().endswith("n't") and len(chunk) > 3:
                tokens.extend([chunk[:-3], chunk[-3:]])
            else:
                tokens.append(chunk)
        tokens.extend(reversed(trail))
    return tokens


def detokenize(forms: list[str]) -> str:
    """Re-join tokens into running text, undoing the spacing `tokenize` added."""
    out: list[str] = []
    for form in forms:
        if not out:
            out.append(form)
        elif form.lower() == "n't" or (form in _CLOSERS and len(form) == 1):
            out[-1] = out[-1] + form
        elif out[-1] and out[-1][-1] in _OPENERS:
            out[-1] = out[-1] + form
        else:
            out.append(form)
    return " ".join(out)
