"""Unit tests for HTML-to-blocks extraction."""

from parse_adapter.htmltext import html_blocks


class TestHtmlBlocks:
    def test_inline_markup_stays_in_one_block(self):
        assert html_blocks("<p>We collect your <b>device id</b>.</p>") == [
            "We collect your device id."
        ]

    def test_block_elements_separate_blocks(self):
        markup = "<h2>Device Data</h2><p>We collect your device id.</p>"
        assert html_blocks(markup) == ["Device Data", "We collect your device id."]

    def test_script_style_and_head_are_dropped(self):
        markup = (
            "<head><title>Policy</title><style>p{color:red}</style></head>"
            "<body><p>Visible text.</p><script>var x = 1;</script></body>"
        )
        assert html_blocks(markup) == ["Visible text."]

    def test_character_references_are_unescaped(self):
        assert html_blocks("<h1>Privacy &amp; Data</h1>") == ["Privacy & Data"]

    def test_line_break_splits(self):
        assert html_blocks("<p>First part<br/>Second part</p>") == ["First part", "Second part"]

    def test_whitespace_is_collapsed(self):
        assert html_blocks("<p>We   share\n\t your  data.</p>") == ["We share your data."]

    def test_unclosed_tags_are_tolerated(self):
        assert html_blocks("<p>One paragraph<p>Another paragraph") == [
            "One paragraph",
            "Another paragraph",
        ]

    def test_list_items_are_separate_blocks(self):
        markup = "<ul><li>your device id</li><li>your location</li></ul>"
        assert html_blocks(markup) == ["your device id", "your location"]

    def test_empty_page_yields_no_blocks(self):
        assert html_blocks("") == []
        assert html_blocks("<html><body></body></html>") == []
