"""Unit tests for text preparation and the builtin sentence analysis."""

from parse_adapter.pipeline import analyze
from parse_adapter.textprep import blocks_from_text, detokenize, split_sentences, tokenize

SHARE_SENTENCE = "We may share your private personal information with our service providers."
LIST_SENTENCE = (
    "we collect such data as IP-Address, your device model, screen resolution "
    "and operation system, session duration, your location"
)
RELCL_SENTENCE = "we will not collect the personal information you shared with us."


def rows_by_form(rows):
    return {r.form: r for r in rows}


def root_of(rows):
    [root] = [r for r in rows if r.head == -1]
    return root


class TestTokenize:
    def test_terminal_punctuation_splits_off(self):
        assert tokenize("We use data.") == ["We", "use", "data", "."]

    def test_commas_split_and_hyphens_stay(self):
        assert tokenize("IP-Address, model") == ["IP-Address", ",", "model"]

    def test_contracted_negation_splits(self):
        assert tokenize("We don't sell data") == ["We", "do", "n't", "sell", "data"]

    def test_detokenize_restores_spacing(self):
        for text in [SHARE_SENTENCE, LIST_SENTENCE, "We don't sell data.", "Is it safe?"]:
            assert detokenize(tokenize(text)) == text


class TestSegmentation:
    def test_two_sentences_in_one_block(self):
        block = "We use Google Play Services. We share your sim number with Google Play Services."
        parts = split_sentences(block)
        assert len(parts) == 2
        assert parts[0].endswith("Services.")

    def test_abbreviation_does_not_split(self):
        assert split_sentences("We collect identifiers, e.g. your device id.") == [
            "We collect identifiers, e.g. your device id."
        ]

    def test_question_mark_ends_sentence(self):
        assert split_sentences("What do we collect? We collect nothing.") == [
            "What do we collect?",
            "We collect nothing.",
        ]

    def test_blank_lines_separate_blocks(self):
        text = "First paragraph here.\n\n\nSecond paragraph\nwraps across lines."
        assert blocks_from_text(text) == [
            "First paragraph here.",
            "Second paragraph wraps across lines.",
        ]

    def test_unterminated_tail_kept(self):
        assert split_sentences("if you do not provide your personal information") == [
            "if you do not provide your personal information"
        ]


class TestClauseAnalysis:
    def test_declarative_root_is_the_verb_after_the_auxiliary(self):
        rows = analyze(SHARE_SENTENCE)
        root = root_of(rows)
        assert (root.form, root.upos, root.deprel) == ("share", "VERB", "root")

    def test_object_and_oblique_attach_to_the_root(self):
        rows = analyze(SHARE_SENTENCE)
        by = rows_by_form(rows)
        root_index = rows.index(root_of(rows))
        assert (by["information"].head, by["information"].deprel) == (root_index, "obj")
        assert (by["providers"].head, by["providers"].deprel) == (root_index, "obl")
        assert (by["with"].head, by["with"].deprel) == (rows.index(by["providers"]), "case")
        assert by["providers"].lemma == "provider"

    def test_listed_items_all_hang_off_the_object_head(self):
        rows = analyze(LIST_SENTENCE)
        by = rows_by_form(rows)
        data = rows.index(by["data"])
        for item in ("IP-Address", "model", "resolution", "system", "duration", "location"):
            assert (by[item].head, by[item].deprel) == (data, "conj"), item

    def test_list_modifiers_stay_inside_their_items(self):
        rows = analyze(LIST_SENTENCE)
        by = rows_by_form(rows)
        assert (by["device"].head, by["device"].deprel) == (rows.index(by["model"]), "compound")
        assert (by["screen"].head, by["screen"].deprel) == (rows.index(by["resolution"]), "compound")
        assert by["IP-Address"].lemma == "IP-Address"

    def test_reduced_relative_clause(self):
        rows = analyze(RELCL_SENTENCE)
        by = rows_by_form(rows)
        info = rows.index(by["information"])
        shared = rows.index(by["shared"])
        assert (by["shared"].head, by["shared"].deprel) == (info, "acl:relcl")
        assert by["shared"].lemma == "share"
        assert (by["you"].head, by["you"].deprel) == (shared, "nsubj")
        assert (by["us"].head, by["us"].deprel) == (shared, "obl")

    def test_negation_is_an_adverbial_of_the_verb(self):
        rows = analyze(RELCL_SENTENCE)
        by = rows_by_form(rows)
        collect = rows.index(by["collect"])
        assert (by["not"].head, by["not"].deprel) == (collect, "advmod")
        assert (by["will"].head, by["will"].deprel) == (collect, "aux")

    def test_question_inversion_finds_subject_and_fronted_object(self):
        rows = analyze("What personal information do we collect?")
        by = rows_by_form(rows)
        collect = rows.index(by["collect"])
        assert (by["we"].head, by["we"].deprel) == (collect, "nsubj")
        assert (by["information"].head, by["information"].deprel) == (collect, "obj")
        assert by["collect"].deprel == "root"

    def test_conditional_marker(self):
        rows = analyze("if you do not provide your personal information")
        by = rows_by_form(rows)
        provide = rows.index(by["provide"])
        assert (by["if"].head, by["if"].deprel) == (provide, "mark")

    def test_verbless_heading_has_no_verb_and_a_nominal_root(self):
        rows = analyze("Do-Not-Track Signals and Similar Mechanisms")
        assert all(r.upos != "VERB" for r in rows)
        assert root_of(rows).form == "Signals"
        by = rows_by_form(rows)
        assert by["Mechanisms"].deprel == "conj"

    def test_mid_sentence_capitalized_tokens_keep_their_form_as_lemma(self):
        rows = analyze("We use Google Play Services.")
        by = rows_by_form(rows)
        assert (by["Services"].upos, by["Services"].lemma) == ("PROPN", "Services")
        services = rows.index(by["Services"])
        assert (by["Google"].head, by["Google"].deprel) == (services, "compound")

    def test_empty_sentence_yields_no_rows(self):
        assert analyze("") == []
        assert analyze("   ") == []
