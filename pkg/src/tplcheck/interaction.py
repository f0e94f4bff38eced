"""Host-app / third-party-library interaction detection.

A registry maps library ids to package prefixes.  Every invoke statement
whose callee class sits under a registry prefix is that library's statement;
intersecting those statement keys (SMIs) with each personal-information
flow trace tells whether the value is shared with the library or merely
collected by the app.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .callgraph import build_fcg, entry_points
from .dataflow import (
    DoiSite,
    FlowTrace,
    PiType,
    analyze_data_usage,
    find_doi,
    load_pi_rules,
    smi_of,
)
from .ir import IrProgram

__all__ = [
    "InteractionRecord",
    "TplEntry",
    "TplRegistry",
    "analyze_app",
    "classify_interactions",
    "load_registry",
    "prefix_matches",
    "tpl_statements",
]


@dataclass(frozen=True)
class TplEntry:
    tpl_id: str
    display_name: str
    package_prefixes: tuple[str, ...]
    aliases: tuple[str, ...] = ()
    privacy_policy_url: Optional[str] = None

    def names(self) -> tuple[str, ...]:
        return (self.display_name, *self.aliases)


@dataclass(frozen=True)
class TplRegistry:
    entries: tuple[TplEntry, ...] = ()
    _by_id: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        for e in self.entries:
            self._by_id[e.tpl_id] = e

    def get(self, tpl_id: str) -> Optional[TplEntry]:
        return self._by_id.get(tpl_id)

    def ids(self) -> list[str]:
        return [e.tpl_id for e in self.entries]


def load_registry(path) -> TplRegistry:
    """Registry JSON: {"entries": [{tpl_id, display_name, package_prefixes,
    aliases?, privacy_policy_url?}]}.  Prefixes must be non-empty per entry
    and unique across entries."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    raw_entries = data.get("entries")
    if not isinstance(raw_entries, list):
        raise ValueError(f"{path}: registry must have an 'entries' list")
    entries = []
    seen_ids: set[str] = set()
    seen_prefixes: set[str] = set()
    for i, raw in enumerate(raw_entries):
        tpl_id = raw.get("tpl_id")
        name = raw.get("display_name")
        prefixes = raw.get("package_prefixes")
        if not tpl_id or not name:
            raise ValueError(f"{path}: entry {i} needs tpl_id and display_name")
        if tpl_id in seen_ids:
            raise ValueError(f"{path}: duplicate tpl_id {tpl_id!r}")
        seen_ids.add(tpl_id)
        if not prefixes or not isinstance(prefixes, list):
            raise ValueError(f"{path}: entry {tpl_id!r} needs package_prefixes")
        for p in prefixes:
            if p in seen_prefixes:
                raise ValueError(f"{path}: prefix {p!r} appears in two entries")
            seen_prefixes.add(p)
        entries.append(
            TplEntry(
                tpl_id=tpl_id,
                display_name=name,
                package_prefixes=tuple(prefixes),
                aliases=tuple(raw.get("aliases", ())),
                privacy_policy_url=raw.get("privacy_policy_url"),
            )
        )
    return TplRegistry(tuple(entries))


def prefix_matches(class_name: str, prefix: str) -> bool:
    """Package-segment prefix test: "com.foo" matches "com.foo.Bar" but not
    "com.foobar.Baz"."""
    if not class_name.startswith(prefix):
        return False
    return len(class_name) == len(prefix) or class_name[len(prefix)] == "."


def tpl_statements(program: IrProgram, reg: TplRegistry) -> dict[str, set[str]]:
    """tpl_id -> SMIs of every invoke whose callee class is under a prefix."""
    out: dict[str, set[str]] = {}
    for method in program.methods():
        for stmt in method.body:
            callee = stmt.callee()
            if callee is None:
                continue
            for entry in reg.entries:
                if any(prefix_matches(callee.clazz, p) for p in entry.package_prefixes):
                    out.setdefault(entry.tpl_id, set()).add(smi_of(method.sig, stmt))
                    break
    return out


@dataclass(frozen=True)
class InteractionRecord:
    pi: PiType
    tpl: Optional[str]  # tpl_id for Sharing, None for Collecting
    kind: str  # "Sharing" | "Collecting"
    evidence: tuple[str, ...]


def classify_interactions(
    pi_traces: list[FlowTrace], tpl_map: dict[str, set[str]]
) -> list[InteractionRecord]:
    """Sharing where a trace SMI lands in a TPL's statement set, Collecting
    otherwise; records deduplicated by (pi, tpl, kind) with evidence unioned."""
    acc: dict[tuple, list[str]] = {}

    def add(key: tuple, smis) -> None:
        bucket = acc.setdefault(key, [])
        for smi in sorted(smis):
            if smi not in bucket:
                bucket.append(smi)

    for trace in pi_traces:
        smis = trace.smis()
        shared = False
        for tpl_id in sorted(tpl_map):
            overlap = smis & tpl_map[tpl_id]
            if overlap:
                shared = True
                add((trace.root.pi, tpl_id, "Sharing"), overlap)
        if not shared:
            add((trace.root.pi, None, "Collecting"), {trace.root.smi})
    records = [
        InteractionRecord(pi=pi, tpl=tpl, kind=kind, evidence=tuple(evidence))
        for (pi, tpl, kind), evidence in acc.items()
    ]
    records.sort(key=lambda r: (r.pi.id, r.tpl or "", r.kind))
    return records


def analyze_app(
    program: IrProgram,
    reg: TplRegistry,
    api_rules=None,
    kw_rules=None,
) -> tuple[list[FlowTrace], list[InteractionRecord]]:
    """Full per-app pass: entries -> call graph -> PI traces -> interactions.

    Entry points come from ``# entry`` directives when the IR declares any,
    otherwise from the public-method rule.
    """
    if api_rules is None and kw_rules is None:
        api_rules, kw_rules = load_pi_rules()
    entries = list(program.declared_entries) or entry_points(program)
    fcg = build_fcg(program, entries)
    sites: list[DoiSite] = find_doi(program, api_rules, kw_rules)
    traces = [analyze_data_usage(program, fcg, site) for site in sites]
    return traces, classify_interactions(traces, tpl_statements(program, reg))
