"""Spreading confident mappings down the source hierarchy and across siblings.

Descendants inherit the target of their nearest confidently mapped
ancestor (several targets when incomparable ancestors tie on distance);
siblings that share the root word of a confident class copy its target.
Sibling evidence outranks inherited evidence downstream.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping

from .ontology import TaxonomyGraph
from .phrases import RootPhraseSet

EXACT_NAME = "EXACT_NAME"
SIMILARITY = "SIMILARITY"
SIBLING = "SIBLING"
INHERITED = "INHERITED"

ORIGIN_PRIORITY = {EXACT_NAME: 0, SIMILARITY: 1, SIBLING: 2, INHERITED: 3}


@dataclass(frozen=True, slots=True)
class ConfidentPair:
    """One trusted (source class, target class) mapping.

    ``via`` links SIBLING/INHERITED pairs back to the seed class whose
    own EXACT_NAME/SIMILARITY mapping they copy.
    """

    source_class: str
    target_class: str
    origin: str
    score: float | None = None
    via: str | None = None


def _seed_targets(confident: Iterable[ConfidentPair]) -> dict[str, set[str]]:
    seeds: dict[str, set[str]] = {}
    for pair in confident:
        seeds.setdefault(pair.source_class, set()).add(pair.target_class)
    return seeds


def propagate_descendants(confident: set[ConfidentPair], graph: TaxonomyGraph) -> set[ConfidentPair]:
    """INHERITED pairs for every strict descendant of a confident class.

    The nearest confident ancestor wins (hops up parent edges); a class
    with its own confident pair inherits nothing. Incomparable confident
    ancestors at equal distance all contribute their targets, leaving a
    multi-candidate set for the resolver.
    """
    seeds = _seed_targets(confident)
    if not seeds:
        return set()

    children: dict[str, list[str]] = {}
    indegree: dict[str, int] = {}
    for child, parents in graph.parents.items():
        for parent in parents:
            children.setdefault(parent, []).append(child)
        indegree[child] = len(parents)

    # distance to the nearest confident ancestor and, per node, the
    # (ancestor, target) pairs realizing that distance
    dist: dict[str, int] = {}
    nearest: dict[str, frozenset[tuple[str, str]]] = {}
    order = deque(sorted(c for c in graph.classes if indegree.get(c, 0) == 0))
    remaining = dict(indegree)
    while order:
        node = order.popleft()
        if node in seeds:
            dist[node] = 0
            nearest[node] = frozenset((node, t) for t in seeds[node])
        else:
            best = None
            for parent in graph.parents.get(node, ()):
                if parent in dist:
                    d = dist[parent] + 1
                    if best is None or d < best:
                        best = d
            if best is not None:
                dist[node] = best
                merged: set[tuple[str, str]] = set()
                for parent in graph.parents.get(node, ()):
                    if dist.get(parent, -2) + 1 == best:
                        merged.update(nearest[parent])
                nearest[node] = frozenset(merged)
        for child in children.get(node, ()):
            remaining[child] -= 1
            if remaining[child] == 0:
                order.append(child)

    out: set[ConfidentPair] = set()
    for node, entries in nearest.items():
        if node in seeds:
            continue
        via_for: dict[str, str] = {}
        for ancestor, target in entries:
            if target not in via_for or ancestor < via_for[target]:
                via_for[target] = ancestor
        for target, ancestor in via_for.items():
            out.add(ConfidentPair(node, target, INHERITED, None, ancestor))
    return out


def propagate_siblings(
    confident: set[ConfidentPair],
    graph: TaxonomyGraph,
    root_phrases: Mapping[str, RootPhraseSet],
) -> set[ConfidentPair]:
    """SIBLING pairs for parent-sharing classes with the same root word.

    Root words compare case-folded. Classes that already have their own
    confident pair are left alone.
    """
    seeds = _seed_targets(confident)
    chosen: dict[tuple[str, str], str] = {}
    for pair in sorted(confident, key=lambda p: (p.source_class, p.target_class, p.origin, p.via or "")):
        rps = root_phrases.get(pair.source_class)
        if rps is None:
            continue
        root = rps.root_word.casefold()
        siblings: set[str] = set()
        for parent in graph.parents.get(pair.source_class, ()):
            siblings.update(graph.children_of(parent))
        siblings.discard(pair.source_class)
        for sibling in siblings:
            if sibling in seeds:
                continue
            sib_rps = root_phrases.get(sibling)
            if sib_rps is None or sib_rps.root_word.casefold() != root:
                continue
            key = (sibling, pair.target_class)
            if key not in chosen or pair.source_class < chosen[key]:
                chosen[key] = pair.source_class
    return {
        ConfidentPair(source, target, SIBLING, None, via)
        for (source, target), via in chosen.items()
    }


def augment_dataset(
    confident: set[ConfidentPair],
    graph: TaxonomyGraph,
    root_phrases: Mapping[str, RootPhraseSet],
) -> set[ConfidentPair]:
    """Input pairs plus sibling propagation, deduplicated by (source, target).

    When the same mapping arrives with different origins the stronger one
    (EXACT_NAME over SIMILARITY over SIBLING over INHERITED) is kept.
    """
    merged: dict[tuple[str, str], ConfidentPair] = {}
    for pair in sorted(
        list(confident) + list(propagate_siblings(confident, graph, root_phrases)),
        key=lambda p: (p.source_class, p.target_class, ORIGIN_PRIORITY[p.origin], p.via or ""),
    ):
        key = (pair.source_class, pair.target_class)
        if key not in merged:
            merged[key] = pair
    return set(merged.values())
