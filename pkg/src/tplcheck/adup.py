"""Abstract data-usage pattern (Adup) extraction from parsed policy sentences.

Each kept sentence is scanned for collect/share action verbs; around every
hit the extractor gathers the data noun phrases (constituency tree when
available, dependency fallback otherwise), the acting party, any recipient
phrases, and a negation flag.  Interrogative, verbless, and conditional
sentences yield nothing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .lexicons import iter_tsv, read_text
from .policy_ingest import ConstTree, ParsedSentence, ParsedDoc, leaf_paths

__all__ = [
    "ActionHit",
    "ActionLexicon",
    "Adup",
    "FilterResult",
    "GenericTermLexicon",
    "NoObject",
    "build_adups",
    "detect_actions",
    "extract_actor",
    "extract_entities",
    "filter_sentence",
    "load_action_lexicon",
    "load_generic_terms",
]


class NoObject(Exception):
    """The action verb has no resolvable object to take data entities from."""


_WH_WORDS = frozenset({"who", "where", "when", "why", "whether", "what", "how"})
_NEG_LEMMAS = frozenset({"not", "no", "never", "n't"})
_CONDITIONAL_LEMMAS = frozenset({"if", "unless", "assuming", "should"})
_FIRST_PERSON = frozenset({"we", "us", "our", "i", "me", "my"})
_PERSON_PRONOUNS = frozenset({"we", "us", "i", "me", "you", "they", "them"})

# modern UD relation names for the legacy labels some annotations carry
_DEPREL_ALIASES = {"dobj": "obj", "pobj": "obl", "mmod": "aux"}

# tokens never worth keeping inside an entity/recipient phrase
_DROP_DEPRELS = frozenset({"det", "nmod:poss", "poss"})


def _base_rel(deprel: str) -> str:
    return _DEPREL_ALIASES.get(deprel, deprel).split(":")[0]


def _deps(s: ParsedSentence, head: int, rels: Optional[frozenset] = None) -> list[int]:
    return [
        i
        for i, t in enumerate(s.tokens)
        if t.head == head and (rels is None or _base_rel(t.deprel) in rels)
    ]


def _droppable(tok) -> bool:
    return tok.upos in ("DET", "PUNCT") or tok.deprel in _DROP_DEPRELS


@dataclass(frozen=True)
class ActionLexicon:
    collect_verbs: frozenset[str]
    share_verbs: frozenset[str]

    @property
    def all_verbs(self) -> frozenset[str]:
        return self.collect_verbs | self.share_verbs

    def kind_of(self, entry: str) -> str:
        both = entry in self.collect_verbs and entry in self.share_verbs
        return "Both" if both else ("Collect" if entry in self.collect_verbs else "Share")


def load_action_lexicon(path=None) -> ActionLexicon:
    """Rows ``collect<TAB>lemma`` / ``share<TAB>lemma``; multiword entries like
    ``protect against`` mean verb lemma + a dependent with the particle lemma."""
    collect, share = set(), set()
    for lineno, cols in iter_tsv(read_text(path, "action_words.tsv")):
        if len(cols) != 2 or cols[0] not in ("collect", "share"):
            raise ValueError(f"action lexicon line {lineno}: expected collect/share + lemma")
        (collect if cols[0] == "collect" else share).add(cols[1].strip().lower())
    return ActionLexicon(frozenset(collect), frozenset(share))


@dataclass(frozen=True)
class GenericTermLexicon:
    terms: frozenset[str]

    def is_generic(self, phrase: str) -> bool:
        return phrase.strip().lower() in self.terms


def load_generic_terms(path=None) -> GenericTermLexicon:
    text = read_text(path, "generic_terms.txt")
    terms = {
        line.strip().lower()
        for line in text.splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    }
    return GenericTermLexicon(frozenset(terms))


@dataclass(frozen=True)
class FilterResult:
    keep: bool
    reason: str = ""  # "Interrogative" or "NoVerb" when keep is False


def filter_sentence(s: ParsedSentence) -> FilterResult:
    if not s.tokens:
        return FilterResult(False, "NoVerb")
    if s.tokens[0].form.lower() in _WH_WORDS or s.raw_text().rstrip().endswith("?"):
        return FilterResult(False, "Interrogative")
    if not any(t.upos in ("VERB", "AUX") for t in s.tokens):
        return FilterResult(False, "NoVerb")
    return FilterResult(True)


@dataclass(frozen=True)
class ActionHit:
    verb_index: int
    lemma: str  # lexicon entry, possibly multiword
    action_type: str  # Collect | Share | Both
    neg: bool


def _is_negated(s: ParsedSentence, verb: int) -> bool:
    for d in _deps(s, verb):
        t = s.tokens[d]
        if t.deprel == "neg":
            return True
        if _base_rel(t.deprel) in ("advmod", "aux") and t.lemma.lower() in _NEG_LEMMAS:
            return True
    return False


def _particle_lemmas(s: ParsedSentence, verb: int) -> set[str]:
    """Lemmas usable as the particle of a multiword entry: direct dependents,
    plus case/mark markers of the verb's obj/obl children (where UD hangs
    prepositions like the "against" of "protect against")."""
    out = {s.tokens[d].lemma.lower() for d in _deps(s, verb)}
    for d in _deps(s, verb, frozenset({"obj", "obl"})):
        for c in _deps(s, d, frozenset({"case", "mark"})):
            out.add(s.tokens[c].lemma.lower())
    return out


def detect_actions(s: ParsedSentence, lex: ActionLexicon) -> list[ActionHit]:
    hits: list[ActionHit] = []
    for i, tok in enumerate(s.tokens):
        if tok.upos != "VERB":
            continue
        lemma = tok.lemma.lower()
        dep_lemmas = _particle_lemmas(s, i)
        for entry in sorted(lex.all_verbs):
            verb, _, particle = entry.partition(" ")
            if verb != lemma:
                continue
            if particle and particle not in dep_lemmas:
                continue
            hits.append(ActionHit(i, entry, lex.kind_of(entry), _is_negated(s, i)))
    return hits


# ---------------------------------------------------------------------------
# Entity phrases


def _conj_closure(s: ParsedSentence, head: int) -> list[int]:
    out = [head]
    queue = [head]
    while queue:
        h = queue.pop(0)
        for d in _deps(s, h, frozenset({"conj"})):
            if d not in out:
                out.append(d)
                queue.append(d)
    return out


def _dep_phrase(s: ParsedSentence, head: int) -> str:
    """The head plus its compound/amod/nmod modifier subtree, function words
    dropped, lemmas joined in sentence order."""
    span = {head}
    queue = [head]
    while queue:
        h = queue.pop(0)
        for d in _deps(s, h, frozenset({"compound", "amod", "nmod"})):
            if s.tokens[d].deprel in _DROP_DEPRELS:
                continue
            if d not in span:
                span.add(d)
                queue.append(d)
    kept = [i for i in sorted(span) if not _droppable(s.tokens[i])]
    return " ".join(s.tokens[i].lemma for i in kept)


def _tree_is_clean(node: ConstTree) -> bool:
    for leaf in node.leaves():
        if leaf.label == "CC" or not any(ch.isalnum() for ch in leaf.label):
            return False
    return True


def _harvest_clean_nps(node: ConstTree) -> list[ConstTree]:
    if node.is_leaf:
        return []
    if node.label == "NP" and _tree_is_clean(node):
        return [node]
    out: list[ConstTree] = []
    for child in node.children:
        out.extend(_harvest_clean_nps(child))
    return out


def _tree_spans(tree: ConstTree) -> dict[int, tuple[int, int]]:
    spans: dict[int, tuple[int, int]] = {}

    def walk(node: ConstTree, start: int) -> int:
        if node.is_leaf:
            spans[id(node)] = (start, start + 1)
            return start + 1
        pos = start
        for child in node.children:
            pos = walk(child, pos)
        spans[id(node)] = (start, pos)
        return pos

    walk(tree, 0)
    return spans


def _render_span(s: ParsedSentence, start: int, end: int) -> str:
    kept = [i for i in range(start, end) if not _droppable(s.tokens[i])]
    return " ".join(s.tokens[i].lemma for i in kept)


def _const_phrases(s: ParsedSentence, leaf_idx: int) -> list[str]:
    """Phrases for the object at ``leaf_idx`` using the constituency tree.

    The minimal NP over the leaf is the core phrase; climbing the NP
    ancestors, the first one containing a conjunction or punctuation is split
    into its maximal clean NP subtrees (coordination handling).
    """
    tree = s.constituency
    spans = _tree_spans(tree)
    path = leaf_paths(tree)[leaf_idx]
    np_positions = [j for j, node in enumerate(path) if not node.is_leaf and node.label == "NP"]
    if not np_positions:
        return [_render_span(s, leaf_idx, leaf_idx + 1)]
    base_pos = np_positions[-1]
    base = path[base_pos]
    nodes = [base]
    for j in range(base_pos - 1, -1, -1):
        anc = path[j]
        if anc.label != "NP":
            break
        if not _tree_is_clean(anc):
            nodes.extend(_harvest_clean_nps(anc))
            break
    phrases: list[str] = []
    for node in nodes:
        start, end = spans[id(node)]
        phrase = _render_span(s, start, end)
        if phrase and phrase not in phrases:
            phrases.append(phrase)
    return phrases


def _object_heads(s: ParsedSentence, verb: int) -> list[int]:
    objs = _deps(s, verb, frozenset({"obj"}))
    if objs:
        return objs
    # relative clause: the modified noun is the gap object ("the data you shared")
    if s.tokens[verb].deprel == "acl:relcl":
        return [s.tokens[verb].head]
    return []


def extract_entities(s: ParsedSentence, verb_index: int) -> list[str]:
    heads = _object_heads(s, verb_index)
    if not heads:
        raise NoObject(f"verb at {verb_index} has no object")
    phrases: list[str] = []
    for head in heads:
        if s.constituency is not None:
            candidates = _const_phrases(s, head)
        else:
            candidates = [_dep_phrase(s, h) for h in _conj_closure(s, head)]
        for p in candidates:
            if p and p not in phrases:
                phrases.append(p)
    if not phrases:
        raise NoObject(f"object of verb at {verb_index} reduces to nothing")
    return phrases


# ---------------------------------------------------------------------------
# Actors and recipients


def _subject_of(s: ParsedSentence, verb: int) -> Optional[int]:
    node = verb
    for _ in range(len(s.tokens)):
        subs = _deps(s, node, frozenset({"nsubj"}))
        if subs:
            return subs[0]
        if _base_rel(s.tokens[node].deprel) in ("ccomp", "xcomp") and s.tokens[node].head >= 0:
            node = s.tokens[node].head
            continue
        return None
    return None


def extract_actor(s: ParsedSentence, verb_index: int) -> tuple[str, list[str]]:
    subj = _subject_of(s, verb_index)
    if subj is None:
        for d in _deps(s, verb_index, frozenset({"obj"})):
            if s.tokens[d].lemma.lower() in _PERSON_PRONOUNS:
                subj = d
                break
    if subj is None:
        actor = "app"
    else:
        lemma = s.tokens[subj].lemma.lower()
        actor = "app" if lemma in _FIRST_PERSON else lemma

    recipients: list[str] = []
    for d in _deps(s, verb_index, frozenset({"obl", "iobj"})):
        rel = _base_rel(s.tokens[d].deprel)
        if rel == "obl":
            markers = {
                s.tokens[c].lemma.lower()
                for c in _deps(s, d, frozenset({"case", "mark"}))
            }
            if not markers & {"with", "to"}:
                continue
        for h in _conj_closure(s, d):
            phrase = _dep_phrase(s, h)
            if phrase and phrase not in recipients:
                recipients.append(phrase)
    return actor, recipients


# ---------------------------------------------------------------------------
# Assembly


@dataclass(frozen=True)
class Adup:
    sentence_id: int
    data_entity: str
    action: str  # lexicon entry lemma
    kind: str  # Collect | Share after Both-resolution
    data_type: frozenset[str]
    data_recipient: frozenset[str]
    neg: bool
    vague: bool


def build_adups(
    doc: ParsedDoc, lex: ActionLexicon, generic: GenericTermLexicon
) -> list[Adup]:
    """Filter, detect, extract per sentence; deterministic (sentence, verb) order."""
    out: list[Adup] = []
    for s in doc.sentences:
        if s.tokens and s.tokens[0].lemma.lower() in _CONDITIONAL_LEMMAS:
            continue
        if not filter_sentence(s).keep:
            continue
        for hit in detect_actions(s, lex):
            try:
                entities = extract_entities(s, hit.verb_index)
            except NoObject:
                continue
            actor, recipients = extract_actor(s, hit.verb_index)
            kind = hit.action_type
            if kind == "Both":
                kind = "Share" if recipients else "Collect"
            out.append(
                Adup(
                    sentence_id=s.sent_id,
                    data_entity=actor,
                    action=hit.lemma,
                    kind=kind,
                    data_type=frozenset(entities),
                    data_recipient=frozenset(recipients),
                    neg=hit.neg,
                    vague=all(generic.is_generic(p) for p in entities),
                )
            )
    return out
