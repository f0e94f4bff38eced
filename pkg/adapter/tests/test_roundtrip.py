"""Consumer-contract tests: adapter output must satisfy the checker.

Each bundled raw sample mirrors a hand-annotated fixture from the checker's
own test corpus.  Converting a sample and running the checker's statement
extraction over the result must reproduce the fixture's statements, with any
phrase-boundary variation listed in the reviewed diff file.
"""

from pathlib import Path

import pytest

from conftest import PRIMARY_FIXTURES, REVIEW_FILE, SAMPLES
from diffutil import compare_adups

from parse_adapter import AdapterConfig, adapt
from parse_adapter.htmltext import html_blocks
from parse_adapter.textprep import blocks_from_text, detokenize, split_sentences

from tplcheck.adup import build_adups, load_action_lexicon, load_generic_terms
from tplcheck.policy_ingest import load_parsed_doc

# (raw sample, hand-annotated twin, html flag)
MIRRORS = [
    ("golden_six.txt", "policy/golden_six.conllu", False),
    ("gms_app.html", "apps/app_tn.conllu", True),
    ("device_sdk.html", "policy/tpl_device_id.conllu", True),
]


def adups_of(path: Path):
    doc = load_parsed_doc(path)
    return build_adups(doc, load_action_lexicon(), load_generic_terms())


def convert(sample: str, html: bool, out_dir: Path) -> Path:
    out = out_dir / (Path(sample).stem + ".conllu")
    adapt(AdapterConfig(inputs=(SAMPLES / sample,), output=out, html=html))
    return out


class TestRoundTrip:
    def test_every_sample_validates_under_the_checker_loader(self, tmp_path):
        for sample, _, html in MIRRORS:
            doc = load_parsed_doc(convert(sample, html, tmp_path))
            assert doc.sentences, sample

    def test_statements_match_the_annotated_twins_up_to_reviewed_diffs(self, tmp_path):
        diffs: list[str] = []
        for sample, twin, html in MIRRORS:
            out = convert(sample, html, tmp_path)
            diffs += compare_adups(Path(sample).stem, adups_of(PRIMARY_FIXTURES / twin), adups_of(out))
        reviewed = [
            line.strip()
            for line in REVIEW_FILE.read_text(encoding="utf-8").splitlines()
            if line.strip() and not line.startswith("#")
        ]
        assert sorted(diffs) == sorted(reviewed)

    def test_token_forms_reconstruct_the_cleaned_source_text(self, tmp_path):
        for sample, _, html in MIRRORS:
            raw = (SAMPLES / sample).read_text(encoding="utf-8")
            blocks = html_blocks(raw) if html else blocks_from_text(raw)
            cleaned = [s for block in blocks for s in split_sentences(block)]
            doc = load_parsed_doc(convert(sample, html, tmp_path))
            rebuilt = [detokenize([t.form for t in sent.tokens]) for sent in doc.sentences]
            assert rebuilt == cleaned, sample

    def test_empty_input_yields_an_empty_document(self, tmp_path):
        src = tmp_path / "empty.txt"
        src.write_text("", encoding="utf-8")
        out = tmp_path / "empty.conllu"
        adapt(AdapterConfig(inputs=(src,), output=out))
        assert load_parsed_doc(out).sentences == ()

    def test_repeat_runs_are_byte_identical(self, tmp_path):
        first = tmp_path / "first.conllu"
        second = tmp_path / "second.conllu"
        for out in (first, second):
            adapt(AdapterConfig(inputs=(SAMPLES / "golden_six.txt",), output=out))
        assert first.read_bytes() == second.read_bytes()

    def test_multiple_inputs_concatenate_with_dense_sentence_ids(self, tmp_path):
        out = tmp_path / "both.conllu"
        adapt(
            AdapterConfig(
                inputs=(SAMPLES / "gms_app.html", SAMPLES / "device_sdk.html"),
                output=out,
                html=True,
            )
        )
        doc = load_parsed_doc(out)
        assert [s.sent_id for s in doc.sentences] == list(range(len(doc.sentences)))
        assert len(doc.sentences) == 5  # two headings + three prose sentences

    def test_config_requires_at_least_one_input(self, tmp_path):
        with pytest.raises(ValueError):
            AdapterConfig(inputs=(), output=tmp_path / "out.conllu")
