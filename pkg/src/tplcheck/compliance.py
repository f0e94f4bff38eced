"""Non-compliance checks and scoring.

Four checks produce typed findings:

* normativeness — a library must publish a privacy policy at all;
* legality — data types a library's code reads must appear in its own
  policy statements;
* TPL disclosure — an app must name the libraries it embeds;
* data-interaction disclosure — an app must say which data it shares
  with which library.

A synonym lexicon bridges tracked data-type ids and the noun phrases
policies actually use.  Findings rescued only by generic wording carry
the ``VagueOnly`` confidence tier instead of ``Exact``.  Reports can be
scored against hand-labeled ground truth into trace-level and app-level
confusion counters.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from .adup import (
    ActionLexicon,
    Adup,
    GenericTermLexicon,
    build_adups,
    load_action_lexicon,
    load_generic_terms,
)
from .dataflow import TRACKED_PI, FlowTrace, PiType
from .interaction import InteractionRecord, TplEntry, TplRegistry, analyze_app
from .ir import IrProgram
from .lexicons import iter_tsv, read_text
from .policy_ingest import ParsedDoc

__all__ = [
    "EXACT",
    "VAGUE_ONLY",
    "ComplianceReport",
    "Finding",
    "GoldenAppLabel",
    "GoldenMismatch",
    "PiSynonymLexicon",
    "adup_to_dict",
    "app_compliance_report",
    "check_app_data_disclosure",
    "check_app_tpl_disclosure",
    "check_normativeness",
    "check_tpl_legality",
    "interaction_to_dict",
    "load_golden_labels",
    "load_pi_synonyms",
    "score_against_golden",
    "tpl_compliance_report",
]

EXACT = "Exact"
VAGUE_ONLY = "VagueOnly"

MISSING_POLICY = "MissingPolicy"
UNDISCLOSED_PI = "UndisclosedPiUsage"
UNDISCLOSED_TPL = "UndisclosedTplUsage"
UNDISCLOSED_INTERACTION = "UndisclosedDataInteraction"

_FINDING_KINDS = (
    MISSING_POLICY,
    UNDISCLOSED_PI,
    UNDISCLOSED_TPL,
    UNDISCLOSED_INTERACTION,
)

# Recipient wording accepted as pointing at "some third party" without
# naming one; rendered recipient phrases are matched against these on
# word boundaries.
GENERIC_RECIPIENT_TERMS = (
    "third party",
    "third parties",
    "service provider",
    "vendor",
    "partner",
)


@lru_cache(maxsize=None)
def _word_pattern(phrase: str) -> "re.Pattern[str]":
    """Case-sensitive whole-word occurrence of an already-lowercase phrase."""
    return re.compile(r"(?<!\w)" + re.escape(phrase) + r"(?!\w)")


@lru_cache(maxsize=None)
def _name_pattern(name: str) -> "re.Pattern[str]":
    """Case-insensitive whole-word occurrence of a library name or alias."""
    return re.compile(r"(?<!\w)" + re.escape(name) + r"(?!\w)", re.IGNORECASE)


# ---------------------------------------------------------------------------
# Synonym lexicon


@dataclass(frozen=True)
class PiSynonymLexicon:
    """Lowercase policy phrases naming each tracked data type."""

    phrases: Mapping[str, frozenset]

    def __post_init__(self):
        for pi_id, bag in self.phrases.items():
            if pi_id not in TRACKED_PI:
                raise ValueError(f"unknown tracked data type {pi_id!r}")
            if not bag:
                raise ValueError(f"data type {pi_id!r} has no synonym phrases")
            for phrase in bag:
                if phrase != phrase.lower():
                    raise ValueError(f"synonym phrase not lowercase: {phrase!r}")

    def matches(self, pi: PiType, text: str) -> bool:
        """True when any synonym for ``pi`` occurs whole-word in ``text``."""
        low = text.lower()
        return any(_word_pattern(p).search(low) for p in self.phrases.get(pi.id, ()))


def load_pi_synonyms(path: Optional[Union[str, Path]] = None) -> PiSynonymLexicon:
    """Load the TSV mapping ``<data type>\\t<phrase>``; bundled file by default."""
    text = read_text(path, "pi_synonyms.tsv")
    table: dict = {}
    for lineno, cols in iter_tsv(text):
        if len(cols) != 2:
            raise ValueError(
                f"synonym line {lineno}: expected 2 tab-separated columns, got {len(cols)}"
            )
        pi_id, phrase = cols
        if pi_id not in TRACKED_PI:
            raise ValueError(f"synonym line {lineno}: unknown data type {pi_id!r}")
        if not phrase:
            raise ValueError(f"synonym line {lineno}: empty phrase")
        table.setdefault(pi_id, set()).add(phrase.lower())
    missing = [pi for pi in TRACKED_PI if not table.get(pi)]
    if missing:
        raise ValueError(f"no synonym phrases for: {', '.join(missing)}")
    return PiSynonymLexicon({pi: frozenset(bag) for pi, bag in table.items()})


# ---------------------------------------------------------------------------
# Findings


@dataclass(frozen=True)
class Finding:
    kind: str
    subject: str
    pi: Optional[PiType] = None
    tpl: Optional[str] = None
    evidence: tuple = ()
    confidence: str = EXACT

    def __post_init__(self):
        if self.kind not in _FINDING_KINDS:
            raise ValueError(f"unknown finding kind {self.kind!r}")
        if self.confidence not in (EXACT, VAGUE_ONLY):
            raise ValueError(f"unknown confidence {self.confidence!r}")
        if self.kind == UNDISCLOSED_PI and self.pi is None:
            raise ValueError(f"{UNDISCLOSED_PI} requires a data type")
        if self.kind == UNDISCLOSED_INTERACTION and (self.pi is None or self.tpl is None):
            raise ValueError(f"{UNDISCLOSED_INTERACTION} requires data type and library")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "subject": self.subject,
            "pi": self.pi.id if self.pi else None,
            "tpl": self.tpl,
            "confidence": self.confidence,
            "evidence": list(self.evidence),
        }


def adup_to_dict(adup: Adup) -> dict:
    return {
        "sentence_id": adup.sentence_id,
        "data_entity": adup.data_entity,
        "action": adup.action,
        "kind": adup.kind,
        "data_type": sorted(adup.data_type),
        "data_recipient": sorted(adup.data_recipient),
        "neg": adup.neg,
        "vague": adup.vague,
    }


def interaction_to_dict(rec: InteractionRecord) -> dict:
    return {
        "pi": rec.pi.id,
        "tpl": rec.tpl,
        "kind": rec.kind,
        "evidence": list(rec.evidence),
    }


@dataclass(frozen=True)
class ComplianceReport:
    subject: str
    findings: tuple = ()
    interactions: tuple = ()
    adups: tuple = ()
    counters: Optional[dict] = None

    @property
    def compliant(self) -> bool:
        return not self.findings

    def to_dict(self) -> dict:
        out = {
            "subject": self.subject,
            "findings": [f.to_dict() for f in self.findings],
            "interactions": [interaction_to_dict(rec) for rec in self.interactions],
            "adups": [adup_to_dict(a) for a in self.adups],
        }
        if self.counters is not None:
            out["counters"] = self.counters
        return out


# ---------------------------------------------------------------------------
# Library-side checks


def check_normativeness(entry: TplEntry) -> Optional[Finding]:
    """MissingPolicy when the registry entry has no usable policy URL."""
    if entry.privacy_policy_url:
        return None
    return Finding(kind=MISSING_POLICY, subject=entry.tpl_id)


def _adup_matches_pi(adup: Adup, pi: PiType, syn: PiSynonymLexicon) -> bool:
    return any(syn.matches(pi, phrase) for phrase in adup.data_type)


def _sentence_refs(adups: Iterable[Adup], prefix: str = "sentence") -> tuple:
    return tuple(f"{prefix}:{i}" for i in sorted({a.sentence_id for a in adups}))


def check_tpl_legality(
    flows: Sequence[FlowTrace],
    adups: Sequence[Adup],
    syn: PiSynonymLexicon,
    *,
    subject: str = "tpl",
) -> list:
    """One UndisclosedPiUsage per data type read by code but absent from policy.

    A non-negated collect/share statement naming the type (via synonyms)
    clears it.  If only generically-worded statements exist, the finding is
    kept at the VagueOnly tier.  Negated statements naming the type never
    clear it; they are attached as contradiction evidence.
    """
    positive = [a for a in adups if not a.neg]
    negated = [a for a in adups if a.neg]
    vague_positive = [a for a in positive if a.vague]

    by_pi: dict = {}
    for trace in flows:
        by_pi.setdefault(trace.root.pi.id, []).append(trace)

    findings = []
    for pi_id in sorted(by_pi):
        pi = PiType(pi_id)
        if any(_adup_matches_pi(a, pi, syn) for a in positive):
            continue
        evidence = tuple(sorted({t.root.smi for t in by_pi[pi_id]}))
        evidence += _sentence_refs(
            [a for a in negated if _adup_matches_pi(a, pi, syn)],
            prefix="contradicted_by:sentence",
        )
        if vague_positive:
            findings.append(
                Finding(
                    kind=UNDISCLOSED_PI,
                    subject=subject,
                    pi=pi,
                    evidence=evidence + _sentence_refs(vague_positive),
                    confidence=VAGUE_ONLY,
                )
            )
        else:
            findings.append(
                Finding(kind=UNDISCLOSED_PI, subject=subject, pi=pi, evidence=evidence)
            )
    return findings


# ---------------------------------------------------------------------------
# App-side checks


def _tpl_named(entry: TplEntry, adups: Sequence[Adup], sentences: Sequence[str]) -> bool:
    patterns = [_name_pattern(n) for n in entry.names()]
    for adup in adups:
        for phrase in (adup.data_entity, *sorted(adup.data_recipient)):
            if any(p.search(phrase) for p in patterns):
                return True
    return any(p.search(text) for text in sentences for p in patterns)


def check_app_tpl_disclosure(
    detected: Iterable[str],
    adups: Sequence[Adup],
    sentences: Sequence[str],
    registry: TplRegistry,
    *,
    subject: str = "app",
) -> list:
    """One UndisclosedTplUsage per embedded library the policy never names.

    A library counts as named when its display name or an alias occurs
    (case-insensitive, whole-word) in an extracted actor/recipient phrase
    or anywhere in the policy's sentence text.
    """
    findings = []
    for tpl_id in sorted(set(detected)):
        entry = registry.get(tpl_id)
        if _tpl_named(entry, adups, sentences):
            continue
        findings.append(Finding(kind=UNDISCLOSED_TPL, subject=subject, tpl=tpl_id))
    return findings


def _recipients_match(adup: Adup, entry: TplEntry) -> bool:
    name_patterns = [_name_pattern(n) for n in entry.names()]
    for phrase in adup.data_recipient:
        if any(p.search(phrase) for p in name_patterns):
            return True
        low = phrase.lower()
        if any(_word_pattern(term).search(low) for term in GENERIC_RECIPIENT_TERMS):
            return True
    return False


_ENUMERATION = re.compile(r"^\s*(?P<head>[^:]+?)\s*:\s*(?P<items>\S.*)$")


def _enumeration_discloses(
    sentences: Sequence[str], entry: TplEntry, pi: PiType, syn: PiSynonymLexicon
) -> bool:
    """Matches list-style sentences of the form ``LibName: item, item, ...``."""
    name_patterns = [_name_pattern(n) for n in entry.names()]
    for text in sentences:
        m = _ENUMERATION.match(text)
        if not m:
            continue
        if not any(p.search(m.group("head")) for p in name_patterns):
            continue
        if syn.matches(pi, m.group("items")):
            return True
    return False


def check_app_data_disclosure(
    interactions: Sequence[InteractionRecord],
    adups: Sequence[Adup],
    syn: PiSynonymLexicon,
    registry: TplRegistry,
    sentences: Sequence[str] = (),
    *,
    subject: str = "app",
) -> list:
    """One UndisclosedDataInteraction per sharing pair the policy omits.

    A pair (data type, library) is disclosed by a non-negated sharing
    statement whose data phrases name the type and whose recipients name
    the library (or a generic third-party term), or by an enumeration
    sentence ``LibName: item, ...`` listing the type.  Pairs covered only
    by generically-worded sharing statements stay findings at the
    VagueOnly tier.
    """
    share_adups = [a for a in adups if a.kind == "Share" and not a.neg]
    findings = []
    for rec in interactions:
        if rec.kind != "Sharing":
            continue
        entry = registry.get(rec.tpl)
        disclosed = any(
            _adup_matches_pi(a, rec.pi, syn) and _recipients_match(a, entry)
            for a in share_adups
        )
        if disclosed or _enumeration_discloses(sentences, entry, rec.pi, syn):
            continue
        vague = [a for a in share_adups if a.vague and _recipients_match(a, entry)]
        if vague:
            findings.append(
                Finding(
                    kind=UNDISCLOSED_INTERACTION,
                    subject=subject,
                    pi=rec.pi,
                    tpl=rec.tpl,
                    evidence=rec.evidence + _sentence_refs(vague),
                    confidence=VAGUE_ONLY,
                )
            )
        else:
            findings.append(
                Finding(
                    kind=UNDISCLOSED_INTERACTION,
                    subject=subject,
                    pi=rec.pi,
                    tpl=rec.tpl,
                    evidence=rec.evidence,
                )
            )
    return findings


# ---------------------------------------------------------------------------
# Report assembly


def _default_lexicons(syn, actions, generic):
    if syn is None:
        syn = load_pi_synonyms()
    if actions is None:
        actions = load_action_lexicon()
    if generic is None:
        generic = load_generic_terms()
    return syn, actions, generic


def tpl_compliance_report(
    program: Optional[IrProgram],
    doc: Optional[ParsedDoc],
    entry: TplEntry,
    *,
    syn: Optional[PiSynonymLexicon] = None,
    actions: Optional[ActionLexicon] = None,
    generic: Optional[GenericTermLexicon] = None,
) -> ComplianceReport:
    """Normativeness plus legality for one library's code and policy."""
    syn, actions, generic = _default_lexicons(syn, actions, generic)
    findings = []
    missing = check_normativeness(entry)
    if missing is not None:
        findings.append(missing)
    adups: tuple = ()
    if doc is not None:
        adups = tuple(build_adups(doc, actions, generic))
    if program is not None:
        # Empty registry: only the library's own flows matter here, not
        # which of its calls would count as third-party from an app.
        traces, _ = analyze_app(program, TplRegistry(()))
        findings.extend(check_tpl_legality(traces, adups, syn, subject=entry.tpl_id))
    return ComplianceReport(subject=entry.tpl_id, findings=tuple(findings), adups=adups)


def app_compliance_report(
    program: IrProgram,
    doc: Optional[ParsedDoc],
    registry: TplRegistry,
    *,
    subject: str = "app",
    syn: Optional[PiSynonymLexicon] = None,
    actions: Optional[ActionLexicon] = None,
    generic: Optional[GenericTermLexicon] = None,
) -> ComplianceReport:
    """Disclosure checks for one host app's code and policy."""
    syn, actions, generic = _default_lexicons(syn, actions, generic)
    _, records = analyze_app(program, registry)
    adups: tuple = ()
    sentences: list = []
    if doc is not None:
        adups = tuple(build_adups(doc, actions, generic))
        sentences = [s.raw_text() for s in doc.sentences]
    detected = {rec.tpl for rec in records if rec.tpl is not None}
    findings = check_app_tpl_disclosure(detected, adups, sentences, registry, subject=subject)
    findings += check_app_data_disclosure(
        records, adups, syn, registry, sentences, subject=subject
    )
    return ComplianceReport(
        subject=subject,
        findings=tuple(findings),
        interactions=tuple(records),
        adups=adups,
    )


# ---------------------------------------------------------------------------
# Scoring against hand labels


class GoldenMismatch(Exception):
    """Ground-truth labels reference an app no report was supplied for."""


@dataclass(frozen=True)
class GoldenAppLabel:
    app_id: str
    used_tpls: frozenset
    disclosed_tpls: frozenset
    shared_data: frozenset  # pairs (tpl_id, pi_id)
    disclosed_data: frozenset


def load_golden_labels(path: Union[str, Path]) -> dict:
    """JSON ground truth: per app, used/disclosed libraries and data pairs."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    apps = data.get("apps")
    if not isinstance(apps, list):
        raise ValueError("golden labels must contain an 'apps' list")
    out: dict = {}
    for obj in apps:
        app_id = obj.get("app_id")
        if not app_id:
            raise ValueError("golden app entry missing 'app_id'")
        if app_id in out:
            raise ValueError(f"duplicate golden app id {app_id!r}")
        out[app_id] = GoldenAppLabel(
            app_id=app_id,
            used_tpls=frozenset(obj.get("used_tpls", ())),
            disclosed_tpls=frozenset(obj.get("disclosed_tpls", ())),
            shared_data=frozenset(tuple(pair) for pair in obj.get("shared_data", ())),
            disclosed_data=frozenset(tuple(pair) for pair in obj.get("disclosed_data", ())),
        )
    return out


class _Confusion:
    __slots__ = ("tp", "tn", "fp", "fn")

    def __init__(self):
        self.tp = self.tn = self.fp = self.fn = 0

    def add(self, truth: bool, flagged: bool) -> None:
        if truth and flagged:
            self.tp += 1
        elif truth:
            self.fn += 1
        elif flagged:
            self.fp += 1
        else:
            self.tn += 1

    def to_dict(self) -> dict:
        def ratio(num: int, den: int):
            return None if den == 0 else num / den

        total = self.tp + self.tn + self.fp + self.fn
        precision = ratio(self.tp, self.tp + self.fp)
        recall = ratio(self.tp, self.tp + self.fn)
        if precision is None or recall is None or precision + recall == 0:
            f1 = None
        else:
            f1 = 2 * precision * recall / (precision + recall)
        return {
            "tp": self.tp,
            "tn": self.tn,
            "fp": self.fp,
            "fn": self.fn,
            "accuracy": ratio(self.tp + self.tn, total),
            "precision": precision,
            "recall": recall,
            "f1": f1,
        }


def score_against_golden(reports: Iterable[ComplianceReport], golden: Mapping) -> dict:
    """Trace-level and app-level confusion counters for both disclosure checks.

    A trace is one (app, library) pair for the library-list check, one
    (app, library, data type) triple for the data check.  Ground truth
    calls a trace non-compliant when it is used/shared but not disclosed;
    the tool flags it when the corresponding finding is present.  App
    level collapses each app to any-non-compliant vs any-flagged.
    """
    by_app = {r.subject: r for r in reports}
    unknown = sorted(set(golden) - set(by_app))
    if unknown:
        raise GoldenMismatch(f"golden labels reference unknown app ids: {', '.join(unknown)}")

    list_trace, list_app = _Confusion(), _Confusion()
    data_trace, data_app = _Confusion(), _Confusion()
    for app_id in sorted(golden):
        label = golden[app_id]
        report = by_app[app_id]

        detected = {r.tpl for r in report.interactions if r.tpl is not None}
        flagged = {f.tpl for f in report.findings if f.kind == UNDISCLOSED_TPL}
        truth_any = flag_any = False
        for tpl in sorted(label.used_tpls | detected | flagged):
            truth = tpl in label.used_tpls and tpl not in label.disclosed_tpls
            flag = tpl in flagged
            list_trace.add(truth, flag)
            truth_any |= truth
            flag_any |= flag
        list_app.add(truth_any, flag_any)

        detected_pairs = {
            (r.tpl, r.pi.id) for r in report.interactions if r.kind == "Sharing"
        }
        flagged_pairs = {
            (f.tpl, f.pi.id)
            for f in report.findings
            if f.kind == UNDISCLOSED_INTERACTION
        }
        truth_any = flag_any = False
        for pair in sorted(label.shared_data | detected_pairs | flagged_pairs):
            truth = pair in label.shared_data and pair not in label.disclosed_data
            flag = pair in flagged_pairs
            data_trace.add(truth, flag)
            truth_any |= truth
            flag_any |= flag
        data_app.add(truth_any, flag_any)

    return {
        "tpl_list": {"trace": list_trace.to_dict(), "app": list_app.to_dict()},
        "tpl_data": {"trace": data_trace.to_dict(), "app": data_app.to_dict()},
    }
