"""Transitive spread of non-compliance through dependency rounds.

A dependency graph maps each artifact to the artifacts that use it.  From a
set of seed artifacts, each round adds every not-yet-affected direct
dependent of the previous round's frontier.  Distinct artifacts are counted
once across all rounds; raw edge traversals are reported separately as
``edge_hits`` for readers who want the per-arrow view.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Union

from .policy_ingest import FormatError

__all__ = [
    "DepGraph",
    "PropagationReport",
    "RoundResult",
    "load_dep_graph",
    "propagate",
]


@dataclass(frozen=True)
class DepGraph:
    """Adjacency from artifact id to the set of its direct dependents."""

    adjacency: Mapping[str, frozenset]

    def __post_init__(self):
        for artifact, dependents in self.adjacency.items():
            for dep in dependents:
                if dep not in self.adjacency:
                    raise ValueError(
                        f"dependent {dep!r} of {artifact!r} is not a graph id"
                    )

    @classmethod
    def closed(cls, mapping: Mapping[str, Iterable[str]]) -> "DepGraph":
        """Build a graph, adding missing dependents as leaf ids."""
        adjacency = {k: frozenset(v) for k, v in mapping.items()}
        for dependents in list(adjacency.values()):
            for dep in dependents:
                adjacency.setdefault(dep, frozenset())
        return cls(adjacency)

    def ids(self) -> list:
        return sorted(self.adjacency)

    def dependents(self, artifact_id: str) -> frozenset:
        return self.adjacency[artifact_id]

    def __contains__(self, artifact_id: str) -> bool:
        return artifact_id in self.adjacency

    def __len__(self) -> int:
        return len(self.adjacency)


def load_dep_graph(source) -> DepGraph:
    """Parse ``artifact -> dep1, dep2`` lines into a DepGraph.

    Accepts a path or a file-like object.  Blank lines and ``#`` comments
    are skipped; a repeated left-hand side accumulates dependents.
    Self-dependencies are dropped with a warning.
    """
    if hasattr(source, "read"):
        text = source.read()
        name = getattr(source, "name", "<stream>")
    else:
        text = Path(source).read_text(encoding="utf-8")
        name = str(source)

    adjacency: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "->" not in line:
            raise FormatError("expected an 'artifact -> dependents' line", name, lineno)
        left, _, right = line.partition("->")
        artifact = left.strip()
        if not artifact or any(ch.isspace() for ch in artifact) or "," in artifact:
            raise FormatError(f"bad artifact id {artifact!r}", name, lineno)
        bucket = adjacency.setdefault(artifact, set())
        dependents = right.strip()
        if not dependents:
            continue
        for item in dependents.split(","):
            dep = item.strip()
            if not dep or any(ch.isspace() for ch in dep):
                raise FormatError(f"bad dependent id {dep!r}", name, lineno)
            if dep == artifact:
                warnings.warn(
                    f"{name}:{lineno}: self-dependency on {artifact!r} dropped",
                    stacklevel=2,
                )
                continue
            bucket.add(dep)
    return DepGraph.closed(adjacency)


@dataclass(frozen=True)
class RoundResult:
    round_index: int
    newly_affected: frozenset
    cumulative_count: int
    edge_hits: int


@dataclass(frozen=True)
class PropagationReport:
    seeds: tuple
    unknown_seeds: tuple
    rounds: tuple

    @property
    def total_affected(self) -> int:
        if self.rounds:
            return self.rounds[-1].cumulative_count
        return len(self.seeds)

    def to_dict(self) -> dict:
        return {
            "seeds": list(self.seeds),
            "unknown_seeds": list(self.unknown_seeds),
            "rounds": [
                {
                    "round_index": r.round_index,
                    "newly_affected": sorted(r.newly_affected),
                    "cumulative_count": r.cumulative_count,
                    "edge_hits": r.edge_hits,
                }
                for r in self.rounds
            ],
            "total_affected": self.total_affected,
        }


def propagate(graph: DepGraph, seeds: Iterable[str], rounds: int = 2) -> PropagationReport:
    """Breadth-first rounds of newly affected dependents, deduplicated.

    Seeds missing from the graph are reported and skipped.  Round ``k``
    lists dependents of the round ``k-1`` frontier that were not already
    affected; ``cumulative_count`` includes the seeds.
    """
    if rounds < 0:
        raise ValueError(f"rounds must be nonnegative, got {rounds}")
    seed_set = set(seeds)
    known = sorted(seed_set & set(graph.adjacency))
    unknown = sorted(seed_set - set(graph.adjacency))

    affected = set(known)
    frontier = known
    results = []
    for index in range(1, rounds + 1):
        edge_hits = 0
        reached: set = set()
        for node in frontier:
            dependents = graph.dependents(node)
            edge_hits += len(dependents)
            reached |= dependents
        newly = reached - affected
        affected |= newly
        frontier = sorted(newly)
        results.append(
            RoundResult(
                round_index=index,
                newly_affected=frozenset(newly),
                cumulative_count=len(affected),
                edge_hits=edge_hits,
            )
        )
    return PropagationReport(
        seeds=tuple(known), unknown_seeds=tuple(unknown), rounds=tuple(results)
    )
