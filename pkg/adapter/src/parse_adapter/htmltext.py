"""HTML stripping: turn a page into a list of visible text blocks.

Block-level elements start a new block; inline markup (``<b>``, ``<a>``,
``<span>``, ...) contributes its text to the surrounding block.  Script,
style, and document-head content is discarded.  The tolerant stdlib parser
is used, so malformed markup degrades gracefully instead of failing.
"""

from __future__ import annotations

from html.parser import HTMLParser

from .textprep import normalize_space

_SKIPPED = {"script", "style", "head", "title", "template", "noscript"}

_BLOCK = {
    "address", "article", "aside", "blockquote", "br", "dd", "div", "dl", "dt",
    "fieldset", "figcaption", "figure", "footer", "form", "h1", "h2", "h3",
    "h4", "h5", "h6", "header", "hr", "li", "main", "nav", "ol", "p", "pre",
    "section", "table", "td", "th", "tr", "ul",
}


class _BlockCollector(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self._skip_depth = 0
        self._buffer: list[str] = []
        self.blocks: list[str] = []

    def _flush(self) -> None:
        block = normalize_space("".join(self._buffer))
        self._buffer.clear()
        if block:
            self.blocks.append(block)

    def handle_starttag(self, tag: str, attrs) -> None:
        if tag in _SKIPPED:
            self._skip_depth += 1
        elif tag in _BLOCK:
            self._flush()

    def handle_endtag(self, tag: str) -> None:
        if tag in _SKIPPED:
            self._skip_depth = max(0, self._skip_depth - 1)
        elif tag in _BLOCK:
            self._flush()

    def handle_startendtag(self, tag: str, attrs) -> None:
        if tag in _BLOCK:
            self._flush()

    def handle_data(self, data: str) -> None:
        if not self._skip_depth:
            self._buffer.append(data)


def html_blocks(markup: str) -> list[str]:
    """Extract visible text blocks from an HTML document."""
    collector = _BlockCollector()
    collector.feed(markup)
    collector.close()
    collector._flush()
    return collector.blocks
