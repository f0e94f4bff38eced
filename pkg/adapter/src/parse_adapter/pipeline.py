"""Deterministic rule-based sentence analysis for the builtin backend.

Tagging combines closed-class lookups with positional rules: the token that
follows a subject (and any auxiliaries or negators) is the clause's verb,
and a bare noun + person-pronoun + verb sequence opens a reduced relative
clause ("the information you shared").  Everything left over falls back to
proper-noun, adjective, or noun guesses.

The attacher builds one flat clause around the main verb.  Coordinated
nominals all hang off the first conjunct of their list, and a list
introduced by "as" hangs off the object head itself, so downstream phrase
extraction recovers every listed item from the dependency tree alone — this
backend produces no constituency trees.
"""

from __future__ import annotations

from dataclasses import dataclass

from .textprep import tokenize


@dataclass
class Row:
    """One analysed token; ``head`` is a 0-based token index, -1 for the root."""

    form: str
    lemma: str
    upos: str
    head: int
    deprel: str


PERSON_PRONOUNS = {"we", "us", "i", "me", "you", "they", "them", "he", "she", "him", "it"}
POSS_PRONOUNS = {"your", "our", "my", "their", "its", "his"}
DETERMINERS = {
    "the", "a", "an", "this", "these", "those", "such",
    "all", "any", "some", "each", "every", "no", "another",
}
AUXILIARIES = {
    "will", "would", "may", "might", "can", "could", "shall", "should", "must",
    "do", "does", "did", "is", "are", "was", "were", "am", "be", "been", "being",
    "have", "has", "had",
}
ADPOSITIONS = {
    "with", "to", "of", "in", "on", "for", "from", "at", "by", "about",
    "against", "as", "into", "during", "without", "within", "through",
    "between", "under", "over", "via", "per",
}
COORDINATORS = {"and", "or", "but", "nor"}
SUBORDINATORS = {"if", "unless", "when", "while", "because", "since", "although", "whereas", "that"}
NEGATORS = {"not", "n't", "never"}
WH_DETERMINERS = {"what", "which", "whose"}
WH_OTHER = {"who", "whom", "where", "why", "how", "whether"}

ADJECTIVES = {
    "personal", "private", "similar", "rough", "anonymous", "aggregate",
    "additional", "necessary", "certain", "specific", "various", "relevant",
    "technical", "sensitive", "legal", "applicable", "public", "secure",
    "third-party", "new", "other", "own", "same", "unique",
}
_ADJ_SUFFIXES = ("al", "ive", "ous", "able", "ible")

# Known verb lemmas gate only the relative-clause rule; main-clause verbs are
# found purely by position.
VERB_LEMMAS = {
    "collect", "share", "use", "store", "gather", "receive", "obtain",
    "provide", "sell", "disclose", "transfer", "send", "protect", "process",
    "access", "retain", "delete", "keep", "combine", "track", "record", "log",
    "monitor", "save", "hold", "transmit", "submit", "request", "give",
    "supply", "post", "upload", "enter", "choose", "make", "get", "need",
}

_AUX_LEMMAS = {
    "is": "be", "are": "be", "was": "be", "were": "be", "am": "be",
    "been": "be", "being": "be", "does": "do", "did": "do",
    "has": "have", "had": "have",
}


def noun_lemma(form: str) -> str:
    """Singularize a common-noun form."""
    low = form.lower()
    if low.endswith("ies") and len(low) > 4:
        return low[:-3] + "y"
    if low.endswith(("ses", "xes", "zes", "ches", "shes")):
        return low[:-2]
    if low.endswith("s") and not low.endswith(("ss", "us", "is")) and len(low) > 3:
        return low[:-1]
    return low


def verb_lemma(form: str) -> str:
    """Reduce an inflected verb form to its dictionary lemma."""
    low = form.lower()
    if low.endswith("ies") and len(low) > 4:
        return low[:-3] + "y"
    if low.endswith(("ses", "xes", "zes", "ches", "shes")):
        return low[:-2]
    if low.endswith("ied") and len(low) > 4:
        return low[:-3] + "y"
    if low.endswith("ed") and len(low) > 3:
        stem = low[:-1]
        if stem.endswith("e"):
            return stem
        return low[:-2]
    if low.endswith("ing") and len(low) > 4:
        return low[:-3]
    if low.endswith("s") and not low.endswith(("ss", "us", "is")) and len(low) > 3:
        return low[:-1]
    return low


class _Analysis:
    """Working state for one sentence."""

    def __init__(self, forms: list[str]):
        self.forms = forms
        self.n = len(forms)
        self.lows = [f.lower() for f in forms]
        self.upos: list[str | None] = [None] * self.n
        self.lemma: list[str] = [""] * self.n
        self.head = [-1] * self.n
        self.rel = ["dep"] * self.n
        self.main: int | None = None
        self.relcl_subj: dict[int, int] = {}  # relative-clause verb -> its pronoun subject

    # ---- tagging -------------------------------------------------------

    def tag_closed(self) -> None:
        for i, form in enumerate(self.forms):
            low = self.lows[i]
            if not any(ch.isalnum() for ch in form):
                self.upos[i], self.lemma[i] = "PUNCT", form
            elif form.replace(",", "").replace(".", "").isdigit():
                self.upos[i], self.lemma[i] = "NUM", form
            elif low in PERSON_PRONOUNS or low in POSS_PRONOUNS:
                self.upos[i], self.lemma[i] = "PRON", low
            elif low in WH_DETERMINERS:
                self.upos[i], self.lemma[i] = "DET", low
            elif low in WH_OTHER:
                self.upos[i], self.lemma[i] = "PRON", low
            elif low in DETERMINERS:
                self.upos[i], self.lemma[i] = "DET", low
            elif low in AUXILIARIES:
                self.upos[i], self.lemma[i] = "AUX", _AUX_LEMMAS.get(low, low)
            elif low in NEGATORS:
                self.upos[i] = "PART" if low in ("not", "n't") else "ADV"
                self.lemma[i] = "not" if low == "n't" else low
            elif low in ADPOSITIONS:
                self.upos[i], self.lemma[i] = "ADP", low
            elif low in COORDINATORS:
                self.upos[i], self.lemma[i] = "CCONJ", low
            elif low in SUBORDINATORS:
                self.upos[i], self.lemma[i] = "SCONJ", low

    def _nominal_run_end(self, j: int) -> int:
        """End of a noun-phrase-shaped token run starting at ``j``."""
        if j < self.n and self.upos[j] == "PRON" and self.lows[j] in PERSON_PRONOUNS:
            return j + 1
        k = j
        while k < self.n and (
            self.upos[k] in (None, "DET", "NUM")
            or (self.upos[k] == "PRON" and self.lows[k] in POSS_PRONOUNS)
        ):
            k += 1
        return k

    def _skip_aux(self, m: int) -> tuple[int, bool]:
        saw = False
        while m < self.n and (
            self.upos[m] == "AUX" or (self.upos[m] in ("PART", "ADV") and self.lemma[m] in ("not", "never"))
        ):
            saw = saw or self.upos[m] == "AUX"
            m += 1
        return m, saw

    def find_main_verb(self) -> None:
        j = 0
        if j < self.n and self.upos[j] == "SCONJ":
            j += 1
        k = self._nominal_run_end(j)
        if k == j:
            return
        m, saw_aux = self._skip_aux(k)
        if saw_aux and m < self.n and self.upos[m] == "PRON" and self.lows[m] in PERSON_PRONOUNS:
            # Subject–auxiliary inversion: "What information do we collect?"
            m, _ = self._skip_aux(m + 1)
        if m < self.n and self.upos[m] is None:
            self.main = m
            self.upos[m] = "VERB"
            self.lemma[m] = verb_lemma(self.forms[m])

    def find_relative_clauses(self) -> None:
        start = (self.main + 1) if self.main is not None else 1
        for i in range(start, self.n):
            if self.upos[i] != "PRON" or self.lows[i] not in PERSON_PRONOUNS:
                continue
            if i == 0 or self.upos[i - 1] not in (None, "NOUN", "PROPN"):
                continue
            t, _ = self._skip_aux(i + 1)
            if t < self.n and self.upos[t] is None:
                cand = verb_lemma(self.forms[t])
                if cand in VERB_LEMMAS or self.lows[t].endswith(("ed", "ing")):
                    self.upos[t] = "VERB"
                    self.lemma[t] = cand
                    self.relcl_subj[t] = i

    def tag_open(self) -> None:
        for i in range(self.n):
            if self.upos[i] is not None:
                continue
            form = self.forms[i]
            low = self.lows[i]
            if i > 0 and form[:1].isupper():
                self.upos[i], self.lemma[i] = "PROPN", form
            elif low in ADJECTIVES or (low.endswith(_ADJ_SUFFIXES) and len(low) > 5):
                self.upos[i], self.lemma[i] = "ADJ", low
            else:
                self.upos[i], self.lemma[i] = "NOUN", noun_lemma(form)

    # ---- attachment ----------------------------------------------------

    def _groups(self) -> list[tuple[int, int]]:
        """Spans of nominal material; each span's head is its last token."""
        groups = []
        i = 0
        while i < self.n:
            upos = self.upos[i]
            if upos == "PRON" and self.lows[i] in PERSON_PRONOUNS:
                groups.append((i, i + 1))
                i += 1
            elif upos in ("DET", "ADJ", "NOUN", "PROPN", "NUM") or (
                upos == "PRON" and self.lows[i] in POSS_PRONOUNS
            ):
                j = i
                while j < self.n and (
                    self.upos[j] in ("DET", "ADJ", "NOUN", "PROPN", "NUM")
                    or (self.upos[j] == "PRON" and self.lows[j] in POSS_PRONOUNS)
                ):
                    j += 1
                groups.append((i, j))
                i = j
            else:
                i += 1
        return groups

    def _attach_internals(self, start: int, end: int) -> int:
        head = end - 1
        for t in range(start, head):
            upos = self.upos[t]
            if upos == "DET":
                self.head[t], self.rel[t] = head, "det"
            elif upos == "PRON":
                self.head[t], self.rel[t] = head, "nmod:poss"
            elif upos == "ADJ":
                self.head[t], self.rel[t] = head, "amod"
            else:
                self.head[t], self.rel[t] = head, "compound"
        return head

    def _attach_nominal_sentence(self, groups: list[tuple[int, int]]) -> None:
        by_start = {g[0]: g for g in groups}
        root = None
        pending_cc = None
        last = None
        i = 0
        while i < self.n:
            if i in by_start:
                start, end = by_start[i]
                h = self._attach_internals(start, end)
                if root is None:
                    root = h
                    self.head[h], self.rel[h] = -1, "root"
                elif pending_cc is not None:
                    self.head[h], self.rel[h] = root, "conj"
                    cc_rel = "cc" if self.upos[pending_cc] == "CCONJ" else "punct"
                    self.head[pending_cc], self.rel[pending_cc] = h, cc_rel
                    pending_cc = None
                else:
                    self.head[h], self.rel[h] = last if last is not None else root, "nmod"
                last = h
                i = end
                continue
            if self.upos[i] == "CCONJ" or (self.upos[i] == "PUNCT" and self.forms[i] == ","):
                pending_cc = i
            i += 1
        if root is None:
            root = 0
            self.head[0], self.rel[0] = -1, "root"
        for i in range(self.n):
            if i != root and self.head[i] == -1 and self.rel[i] == "dep":
                self.head[i] = root
                if self.upos[i] == "PUNCT":
                    self.rel[i] = "punct"

    def attach(self) -> None:
        groups = self._groups()
        if self.main is None:
            self._attach_nominal_sentence(groups)
            return

        main = self.main
        self.head[main], self.rel[main] = -1, "root"

        pre = [g for g in groups if g[1] <= main]
        post = [g for g in groups if g[0] > main]

        # Subject is the pre-verb group nearest the verb; earlier pre-verb
        # groups are fronted objects ("What information do we collect?").
        obj_head = None
        if pre:
            subj_start, subj_end = pre[-1]
            h = self._attach_internals(subj_start, subj_end)
            self.head[h], self.rel[h] = main, "nsubj"
            for start, end in pre[:-1]:
                h = self._attach_internals(start, end)
                self.head[h], self.rel[h] = main, "obj"
                if obj_head is None:
                    obj_head = h

        # Clause-level particles before the verb.
        for i in range(main):
            if self.head[i] != -1 or self.rel[i] != "dep":
                continue
            upos = self.upos[i]
            if upos == "SCONJ":
                self.head[i], self.rel[i] = main, "mark"
            elif upos == "AUX":
                self.head[i], self.rel[i] = main, "aux"
            elif upos in ("PART", "ADV") and self.lemma[i] in ("not", "never"):
                self.head[i], self.rel[i] = main, "advmod"

        # Walk the clause after the verb.
        post_by_start = {g[0]: g for g in post}
        scope = main
        conj_base = None
        last_nominal = None
        pending_case = None
        pending_cc = None
        held_subj = None
        i = main + 1
        while i < self.n:
            if i in post_by_start:
                start, end = post_by_start[i]
                h = self._attach_internals(start, end)
                if end - start == 1 and h in self.relcl_subj.values():
                    held_subj = h  # subject of an upcoming relative clause
                    i = end
                    continue
                if pending_case is not None:
                    marker = self.lemma[pending_case]
                    self.head[pending_case], self.rel[pending_case] = h, "case"
                    if marker in ("with", "to"):
                        self.head[h], self.rel[h] = scope, "obl"
                        conj_base = h
                    elif marker == "as" and obj_head is not None:
                        self.head[h], self.rel[h] = obj_head, "conj"
                        conj_base = obj_head
                    elif last_nominal is not None:
                        self.head[h], self.rel[h] = last_nominal, "nmod"
                    else:
                        self.head[h], self.rel[h] = scope, "obl"
                    pending_case = None
                elif pending_cc is not None:
                    base = conj_base if conj_base is not None else (obj_head or last_nominal or scope)
                    self.head[h], self.rel[h] = base, "conj"
                    cc_rel = "cc" if self.upos[pending_cc] == "CCONJ" else "punct"
                    self.head[pending_cc], self.rel[pending_cc] = h, cc_rel
                    pending_cc = None
                elif obj_head is None:
                    self.head[h], self.rel[h] = scope, "obj"
                    obj_head = h
                    conj_base = h
                elif last_nominal is not None:
                    self.head[h], self.rel[h] = last_nominal, "nmod"
                else:
                    self.head[h], self.rel[h] = scope, "obl"
                last_nominal = h
                i = end
                continue
            upos = self.upos[i]
            if upos == "VERB" and i in self.relcl_subj:
                anchor = last_nominal if last_nominal is not None else main
                self.head[i], self.rel[i] = anchor, "acl:relcl"
                subj = self.relcl_subj[i]
                self.head[subj], self.rel[subj] = i, "nsubj"
                held_subj = None
                scope = i
                obj_head = None  # objects after this belong to the relative clause
                conj_base = None
            elif upos == "ADP":
                pending_case = i
            elif upos == "CCONJ" or (upos == "PUNCT" and self.forms[i] == ","):
                pending_cc = i
            elif upos == "AUX":
                nxt = self._next_verb(i)
                self.head[i], self.rel[i] = nxt, "aux"
            elif upos in ("PART", "ADV") and self.lemma[i] in ("not", "never"):
                nxt = self._next_verb(i)
                self.head[i], self.rel[i] = nxt, "advmod"
            i += 1

        # Anything still floating attaches to the root.
        for i in range(self.n):
            if i != main and self.head[i] == -1 and self.rel[i] == "dep":
                self.head[i] = main
                self.rel[i] = "punct" if self.upos[i] == "PUNCT" else "dep"
        if held_subj is not None and self.rel[held_subj] == "dep":
            self.rel[held_subj] = "nsubj"

    def _next_verb(self, i: int) -> int:
        for j in range(i + 1, self.n):
            if self.upos[j] == "VERB":
                return j
        if self.main is not None:
            return self.main
        return 0

    def rows(self) -> list[Row]:
        return [
            Row(self.forms[i], self.lemma[i], self.upos[i] or "X", self.head[i], self.rel[i])
            for i in range(self.n)
        ]


def analyze(sentence: str) -> list[Row]:
    """Tokenize, tag, and dependency-parse one sentence."""
    forms = tokenize(sentence)
    if not forms:
        return []
    work = _Analysis(forms)
    work.tag_closed()
    work.find_main_verb()
    work.find_relative_clauses()
    work.tag_open()
    work.attach()
    return work.rows()
