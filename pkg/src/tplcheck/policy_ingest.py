"""Privacy-policy text normalization and annotated-document loading.

Raw policies arrive as plain text (HTML already stripped elsewhere).
Normalization is three small steps: character cleanup, merging of enumerated
lists into the sentence that introduces them, and sentence segmentation.

Parsed policies arrive as a CoNLL-U-like annotation file: one token per line
with ``ID FORM LEMMA UPOS HEAD DEPREL`` tab-separated columns (HEAD is
1-based, 0 marks the root), blank lines between sentences, and optional
``# key = value`` comments.  A ``# constituency = (S ...)`` comment carries a
bracketed phrase-structure tree whose leaves must spell out the token forms.
Heads are stored 0-based internally with -1 for the root.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

__all__ = [
    "ConstTree",
    "FormatError",
    "ParsedDoc",
    "ParsedSentence",
    "RawPolicy",
    "Token",
    "TreeMismatch",
    "clean_text",
    "leaf_paths",
    "load_parsed_doc",
    "merge_enumerations",
    "parse_constituency",
    "parse_doc_text",
    "preprocess_policy",
    "render_doc",
    "segment_sentences",
]


class FormatError(ValueError):
    """Malformed annotation file (columns, ids, heads, roots, brackets)."""

    def __init__(self, msg: str, source: str = "<doc>", line: Optional[int] = None):
        loc = f"{source}:{line}" if line is not None else source
        super().__init__(f"{loc}: {msg}")
        self.source = source
        self.line = line


class TreeMismatch(FormatError):
    """Constituency leaves do not spell out the sentence's token forms."""


@dataclass(frozen=True)
class RawPolicy:
    source_id: str
    text: str


# ---------------------------------------------------------------------------
# Text normalization

_CR = re.compile(r"\r\n?")
_SPECIAL = re.compile(r"[*|•·►▪]")
_UNDERSCORES = re.compile(r"__+")
_HSPACE = re.compile(r"[ \t\f\v]+")


def clean_text(raw) -> str:
    """Strip decoration characters and collapse whitespace, keeping newlines.

    Removes ``* | • · ► ▪`` and runs of underscores, turns
    non-breaking spaces into spaces, and squeezes each line's internal
    whitespace; punctuation and colons survive untouched.
    """
    text = raw.text if isinstance(raw, RawPolicy) else raw
    text = _CR.sub("\n", text).replace(" ", " ")
    text = _SPECIAL.sub("", text)
    text = _UNDERSCORES.sub("", text)
    return "\n".join(_HSPACE.sub(" ", line).strip() for line in text.split("\n"))


_MARKERS = (
    re.compile(r"^[•·►▪*\-]\s+"),  # bullets and dashes
    re.compile(r"^\d+[.)]\s+"),  # 1.   1)
    re.compile(r"^[a-z]\)\s+"),  # a)
    re.compile(r"^[ivxlcdm]+\.\s+"),  # i.   iv.
    re.compile(r"^\([ivxlcdm]+\)\s*"),  # (iv)
)


def _strip_markers(line: str) -> str:
    # repeat so doubly marked items ("1. - x") cannot re-trigger on a rerun
    out = line.lstrip()
    changed = True
    while changed:
        changed = False
        for pat in _MARKERS:
            m = pat.match(out)
            if m:
                out = out[m.end() :].lstrip()
                changed = True
                break
    return out


def _is_marker_line(line: str) -> bool:
    return any(pat.match(line) for pat in _MARKERS)


def merge_enumerations(lines: list[str]) -> list[str]:
    """Fold list items into the colon-terminated line that introduces them.

    A line ending in ``:`` absorbs the following marker lines (bullets,
    dashes, roman numerals, ``1.``/``1)``/``a)``) as a comma-separated tail;
    the block ends at the first non-marker line.  Stray marker lines keep
    their text but lose the marker.  Blank lines are dropped.  The operation
    is idempotent: its output contains no marker lines.
    """
    out: list[str] = []
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        i += 1
        if not line:
            continue
        head = _strip_markers(line)
        if head.endswith(":"):
            items = []
            while i < len(lines):
                nxt = lines[i].strip()
                if not nxt or not _is_marker_line(nxt):
                    break
                item = _strip_markers(nxt)
                if item:
                    items.append(item)
                i += 1
            if items:
                out.append(head + " " + ", ".join(items))
                continue
        if head:
            out.append(head)
    return out


_ABBREVS = ("e.g", "i.e", "etc", "Inc", "Ltd", "No")


def _ends_with_abbrev(text: str) -> bool:
    for abbr in _ABBREVS:
        if text.endswith(abbr):
            before = text[: -len(abbr)]
            if not before or not (before[-1].isalnum() or before[-1] == "."):
                return True
    return False


def segment_sentences(text: str) -> list[str]:
    """Split on ``.!?`` followed by whitespace, keeping known abbreviations
    (case-sensitive) attached to their sentence."""
    out: list[str] = []
    buf: list[str] = []
    for i, ch in enumerate(text):
        buf.append(ch)
        at_boundary = i + 1 == len(text) or text[i + 1].isspace()
        if ch in ".!?" and at_boundary:
            if ch == "." and _ends_with_abbrev("".join(buf[:-1])):
                continue
            sentence = "".join(buf).strip()
            if sentence:
                out.append(sentence)
            buf = []
    tail = "".join(buf).strip()
    if tail:
        out.append(tail)
    return out


def preprocess_policy(raw) -> list[str]:
    """clean -> merge enumerations -> segment, yielding one string per sentence."""
    merged = merge_enumerations(clean_text(raw).split("\n"))
    return [s for chunk in merged for s in segment_sentences(chunk)]


# ---------------------------------------------------------------------------
# Constituency trees (PTB-style brackets)


@dataclass(frozen=True)
class ConstTree:
    """A bracketed tree node; a leaf carries its token form and no children."""

    label: str
    children: tuple["ConstTree", ...] = ()
    form: str = ""

    def __post_init__(self):
        if bool(self.children) == bool(self.form):
            raise ValueError("a node has either children or a leaf form")

    @property
    def is_leaf(self) -> bool:
        return bool(self.form)

    def leaves(self) -> list["ConstTree"]:
        if self.is_leaf:
            return [self]
        out: list[ConstTree] = []
        for child in self.children:
            out.extend(child.leaves())
        return out

    def leaf_forms(self) -> list[str]:
        return [leaf.form for leaf in self.leaves()]

    def render(self) -> str:
        if self.is_leaf:
            return f"({self.label} {self.form})"
        return f"({self.label} " + " ".join(c.render() for c in self.children) + ")"


_TREE_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def parse_constituency(text: str, source: str = "<tree>") -> ConstTree:
    toks = _TREE_TOKEN.findall(text)
    pos = 0

    def fail(msg: str):
        raise FormatError(f"bad constituency: {msg}", source)

    def node() -> ConstTree:
        nonlocal pos
        if pos >= len(toks) or toks[pos] != "(":
            fail("expected '('")
        pos += 1
        if pos >= len(toks) or toks[pos] in "()":
            fail("expected node label")
        label = toks[pos]
        pos += 1
        children: list[ConstTree] = []
        form = ""
        while pos < len(toks) and toks[pos] != ")":
            if toks[pos] == "(":
                if form:
                    fail("word and subtree mixed under one node")
                children.append(node())
            else:
                if children or form:
                    fail("word and subtree mixed under one node")
                form = toks[pos]
                pos += 1
        if pos >= len(toks):
            fail("unbalanced brackets")
        pos += 1
        if form:
            return ConstTree(label, (), form)
        if not children:
            fail(f"empty node {label!r}")
        return ConstTree(label, tuple(children))

    tree = node()
    if pos != len(toks):
        fail("trailing content after the root node")
    return tree


def leaf_paths(tree: ConstTree) -> list[list[ConstTree]]:
    """For each leaf in order, the chain of nodes from the root to that leaf."""
    paths: list[list[ConstTree]] = []

    def walk(node: ConstTree, acc: list[ConstTree]) -> None:
        chain = acc + [node]
        if node.is_leaf:
            paths.append(chain)
        for child in node.children:
            walk(child, chain)

    walk(tree, [])
    return paths


# ---------------------------------------------------------------------------
# Annotated documents


@dataclass(frozen=True)
class Token:
    form: str
    lemma: str
    upos: str
    head: int  # 0-based index of the head token, -1 for the root
    deprel: str


@dataclass(frozen=True)
class ParsedSentence:
    sent_id: int
    tokens: tuple[Token, ...]
    constituency: Optional[ConstTree] = None
    text: str = ""

    def raw_text(self) -> str:
        return self.text or " ".join(t.form for t in self.tokens)

    @property
    def root(self) -> int:
        return next(i for i, t in enumerate(self.tokens) if t.head == -1)

    def children(self, idx: int) -> tuple[int, ...]:
        return tuple(i for i, t in enumerate(self.tokens) if t.head == idx)


@dataclass(frozen=True)
class ParsedDoc:
    source_id: str
    sentences: tuple[ParsedSentence, ...] = ()


def _build_sentence(index, rows, comments, source) -> ParsedSentence:
    tokens: list[Token] = []
    n = len(rows)
    for position, (lineno, cols) in enumerate(rows, start=1):
        try:
            tok_id = int(cols[0])
            head = int(cols[4])
        except ValueError:
            raise FormatError("ID and HEAD must be integers", source, lineno) from None
        if tok_id != position:
            raise FormatError(
                f"token ids must run 1..n, got {tok_id} at position {position}",
                source,
                lineno,
            )
        if not 0 <= head <= n:
            raise FormatError(f"head {head} out of range 0..{n}", source, lineno)
        if head == tok_id:
            raise FormatError(f"token {tok_id} is its own head", source, lineno)
        tokens.append(Token(cols[1], cols[2], cols[3], head - 1, cols[5]))
    roots = [i for i, t in enumerate(tokens) if t.head == -1]
    if len(roots) != 1:
        raise FormatError(
            f"expected exactly one root token, found {len(roots)}", source
        )
    tree = None
    if "constituency" in comments:
        tree = parse_constituency(comments["constituency"], source)
        forms = [t.form for t in tokens]
        if tree.leaf_forms() != forms:
            raise TreeMismatch(
                f"constituency leaves {tree.leaf_forms()!r} != tokens {forms!r}",
                source,
            )
    return ParsedSentence(
        sent_id=index,
        tokens=tuple(tokens),
        constituency=tree,
        text=comments.get("text", ""),
    )


def parse_doc_text(text: str, source_id: str = "<doc>") -> ParsedDoc:
    """Parse annotation text; sentence ids are assigned densely by position."""
    sentences: list[ParsedSentence] = []
    rows: list[tuple[int, list[str]]] = []
    comments: dict[str, str] = {}

    def flush(lineno):
        nonlocal rows, comments
        if not rows and not comments:
            return
        if not rows:
            raise FormatError("comments without token lines", source_id, lineno)
        sentences.append(_build_sentence(len(sentences), rows, comments, source_id))
        rows, comments = [], {}

    for lineno, line in enumerate(text.split("\n"), start=1):
        stripped = line.strip()
        if not stripped:
            flush(lineno)
            continue
        if stripped.startswith("#"):
            key, sep, value = stripped[1:].partition("=")
            if sep:
                comments[key.strip()] = value.strip()
            continue
        cols = stripped.split("\t")
        if len(cols) != 6:
            raise FormatError(
                f"expected 6 tab-separated columns, got {len(cols)}", source_id, lineno
            )
        rows.append((lineno, cols))
    flush(None)
    return ParsedDoc(source_id=source_id, sentences=tuple(sentences))


def load_parsed_doc(file) -> ParsedDoc:
    """Load from a path or a readable file object."""
    if hasattr(file, "read"):
        return parse_doc_text(file.read(), getattr(file, "name", "<doc>"))
    path = Path(file)
    return parse_doc_text(path.read_text(encoding="utf-8"), path.stem)


def render_doc(doc: ParsedDoc) -> str:
    """Inverse of parse_doc_text; parse_doc_text(render_doc(d), d.source_id) == d."""
    blocks: list[str] = []
    for s in doc.sentences:
        lines = [f"# sent_id = {s.sent_id}"]
        if s.text:
            lines.append(f"# text = {s.text}")
        if s.constituency is not None:
            lines.append(f"# constituency = {s.constituency.render()}")
        for i, t in enumerate(s.tokens, start=1):
            lines.append(f"{i}\t{t.form}\t{t.lemma}\t{t.upos}\t{t.head + 1}\t{t.deprel}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"
