"""Combining the evidence channels into one mapping per source class.

Per class there are up to four signals: the best name/similarity match,
hierarchy-propagated pairs, a majority named-entity class, and the root
word's lexical category. They are resolved by a fixed cascade:

  EXACT   a similarity score at or above ``tau_exact`` wins outright.
  filter  a person/group lexical category drops every candidate outside
          the Person/Organization subtree before the remaining rules.
  RULE2   two or more distinct candidates forming an ancestor chain
          resolve to the deepest one.
  RULE3   a class predicted by two or more channels wins; ties go to the
          deeper, then less populated, then smaller id.
  RULE4   last resort: the named-entity class if present, otherwise a
          sole surviving candidate; with nothing left the class is
          reported MISSING.

When the lexical filter actually removed a candidate, the fired rule is
prefixed with ``RULE1_FILTERED+``. MISSING is a value, never an error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .entitytypes import NOUN_GROUP, NOUN_PERSON
from .errors import NotAChainError
from .matching import MatchCandidate
from .ontology import TaxonomyGraph
from .propagation import ORIGIN_PRIORITY, SIBLING, INHERITED, ConfidentPair

RULE_EXACT = "EXACT"
RULE_2 = "RULE2"
RULE_3 = "RULE3"
RULE_4 = "RULE4"
RULE_MISSING = "MISSING"
RULE1_PREFIX = "RULE1_FILTERED+"

DEFAULT_TAU_EXACT = 0.95
DEFAULT_TAU_SIM = 0.75

# lexical categories anchor the filter to these target subtrees
RULE1_ANCHORS = {NOUN_PERSON: "Person", NOUN_GROUP: "Organization"}

Provenance = tuple[tuple[str, str, float | None], ...]


@dataclass(frozen=True, slots=True)
class CandidateBundle:
    source_class: str
    exact_or_sim: MatchCandidate | None = None
    hierarchy: frozenset[ConfidentPair] = field(default_factory=frozenset)
    ner_class: str | None = None
    lexname: str | None = None


@dataclass(frozen=True, slots=True)
class ResolvedMapping:
    source_class: str
    target_class: str | None
    rule_fired: str
    score: float | None
    provenance: Provenance


def build_bundle(
    source_class: str,
    match: MatchCandidate | None,
    hierarchy_pairs: Iterable[ConfidentPair],
    ner_class: str | None,
    lexname: str | None,
) -> CandidateBundle:
    """Aggregate the per-class stage outputs verbatim."""
    pairs = frozenset(
        p for p in hierarchy_pairs
        if p.source_class == source_class and p.origin in (SIBLING, INHERITED)
    )
    return CandidateBundle(source_class, match, pairs, ner_class, lexname)


def _provenance_of(bundle: CandidateBundle) -> Provenance:
    rows: list[tuple[str, str, float | None]] = []
    if bundle.exact_or_sim is not None:
        rows.append(("similarity", bundle.exact_or_sim.target_class, bundle.exact_or_sim.score))
    for pair in sorted(bundle.hierarchy, key=lambda p: (p.target_class, p.origin, p.via or "", p.score or 0.0)):
        rows.append((f"hierarchy:{pair.origin}", pair.target_class, pair.score))
    if bundle.ner_class is not None:
        rows.append(("ner", bundle.ner_class, None))
    if bundle.lexname is not None:
        rows.append(("lexname", bundle.lexname, None))
    return tuple(rows)


def bundle_from_provenance(source_class: str, provenance: Provenance) -> CandidateBundle:
    """Rebuild a resolvable bundle from an emitted provenance list."""
    match = None
    pairs = []
    ner = None
    lexname = None
    for channel, value, score in provenance:
        if channel == "similarity":
            match = MatchCandidate(value, "", float(score))
        elif channel.startswith("hierarchy:"):
            pairs.append(ConfidentPair(source_class, value, channel.split(":", 1)[1], score))
        elif channel == "ner":
            ner = value
        elif channel == "lexname":
            lexname = value
    return build_bundle(source_class, match, pairs, ner, lexname)


def _under_anchor(graph: TaxonomyGraph, anchor: str, candidate: str) -> bool:
    if candidate == anchor:
        return True
    if anchor not in graph or candidate not in graph:
        return False
    return graph.is_strict_ancestor(anchor, candidate)


def _pick_agreed(
    agreed: list[str], graph: TaxonomyGraph
) -> str:
    """Deepest, then less populated (absent counts compare equal), then smaller id."""
    def count_of(c):
        return graph.instance_count_of(c) if c in graph else None

    def depth_of(c):
        return graph.depth(c) if c in graph else 0

    best = None
    for candidate in sorted(agreed):
        if best is None:
            best = candidate
            continue
        db, dc = depth_of(best), depth_of(candidate)
        if dc > db:
            best = candidate
            continue
        if dc < db:
            continue
        cb, cc = count_of(best), count_of(candidate)
        if cb is not None and cc is not None and cc < cb:
            best = candidate
    return best


def resolve(
    bundle: CandidateBundle,
    target_graph: TaxonomyGraph,
    tau_exact: float = DEFAULT_TAU_EXACT,
    tau_sim: float = DEFAULT_TAU_SIM,
) -> ResolvedMapping:
    """Run the precedence cascade over one candidate bundle.

    The similarity candidate participates in the rules only at or above
    ``tau_sim``. Hierarchy pairs contribute each distinct target class but
    count as a single channel for agreement; only the final sole-survivor
    fallback narrows them to the strongest origin (SIBLING over INHERITED).
    """
    provenance = _provenance_of(bundle)
    source = bundle.source_class

    def done(target, rule, score=None):
        return ResolvedMapping(source, target, rule, score, provenance)

    sim = bundle.exact_or_sim
    if sim is not None and sim.score >= tau_exact:
        return done(sim.target_class, RULE_EXACT, sim.score)

    # lexical-category filter
    hierarchy = bundle.hierarchy
    ner = bundle.ner_class
    dropped = 0
    anchor = RULE1_ANCHORS.get(bundle.lexname) if bundle.lexname else None
    if anchor is not None and anchor in target_graph:
        if sim is not None and not _under_anchor(target_graph, anchor, sim.target_class):
            sim = None
            dropped += 1
        kept_pairs = frozenset(p for p in hierarchy if _under_anchor(target_graph, anchor, p.target_class))
        dropped += len({p.target_class for p in hierarchy} - {p.target_class for p in kept_pairs})
        hierarchy = kept_pairs
        if ner is not None and not _under_anchor(target_graph, anchor, ner):
            ner = None
            dropped += 1

    def finish(target, rule, score=None):
        if dropped and target is not None:
            rule = RULE1_PREFIX + rule
        return done(target, rule, score)

    sim_class = sim.target_class if sim is not None and sim.score >= tau_sim else None
    hier_classes = sorted({p.target_class for p in hierarchy})
    collected = sorted(set(hier_classes) | ({ner} if ner else set()) | ({sim_class} if sim_class else set()))

    def sim_score_if(target):
        return sim.score if sim is not None and sim.target_class == target else None

    if len(collected) >= 2 and all(c in target_graph for c in collected):
        try:
            deepest = target_graph.deepest_on_chain(collected)
        except NotAChainError:
            deepest = None
        if deepest is not None:
            return finish(deepest, RULE_2, sim_score_if(deepest))

    votes = {c: 0 for c in collected}
    for c in collected:
        if ner == c:
            votes[c] += 1
        if c in hier_classes:
            votes[c] += 1
        if sim_class == c:
            votes[c] += 1
    agreed = [c for c in collected if votes[c] >= 2]
    if agreed:
        winner = _pick_agreed(agreed, target_graph)
        return finish(winner, RULE_3, sim_score_if(winner))

    if ner is not None:
        return finish(ner, RULE_4)
    # sole-survivor fallback: hierarchy narrowed to its strongest origin
    if hierarchy:
        top = min(ORIGIN_PRIORITY[p.origin] for p in hierarchy)
        hier_top = {p.target_class for p in hierarchy if ORIGIN_PRIORITY[p.origin] == top}
    else:
        hier_top = set()
    pool = hier_top | ({sim_class} if sim_class else set())
    if len(pool) == 1:
        winner = next(iter(pool))
        return finish(winner, RULE_4, sim_score_if(winner))
    return done(None, RULE_MISSING)
