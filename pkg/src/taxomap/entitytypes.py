"""Coarse typing from member-article titles and from root-word lexical categories."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Mapping

from .errors import LoadError
from .ontology import TaxonomyGraph

NOUN_PERSON = "noun.person"
NOUN_GROUP = "noun.group"


class NerLabel(enum.Enum):
    PERSON = "PERSON"
    NORP = "NORP"
    ORG = "ORG"
    FAC = "FAC"
    GPE = "GPE"
    LOC = "LOC"
    PRODUCT = "PRODUCT"
    EVENT = "EVENT"
    WORK_OF_ART = "WORK_OF_ART"


# recognizer labels to target ontology classes; NORP/ORG and GPE/LOC collapse
NER_TO_TARGET_CLASS: dict[NerLabel, str] = {
    NerLabel.PERSON: "Person",
    NerLabel.NORP: "Organization",
    NerLabel.ORG: "Organization",
    NerLabel.FAC: "ArchitecturalStructure",
    NerLabel.GPE: "Place",
    NerLabel.LOC: "Place",
    NerLabel.PRODUCT: "Thing",
    NerLabel.EVENT: "Event",
    NerLabel.WORK_OF_ART: "Work",
}


def ner_to_target_class(label: NerLabel) -> str:
    return NER_TO_TARGET_CLASS[label]


@dataclass(frozen=True, slots=True)
class TypeTally:
    counts: Mapping[NerLabel, int]
    total_members: int
    untyped: int


def tally_and_majority(
    class_id: str,
    graph: TaxonomyGraph,
    provider: Mapping[str, NerLabel],
) -> tuple[TypeTally, NerLabel | None]:
    """Count recognizer labels over member titles; strict majority or nothing.

    Titles absent from the provider count as untyped, and untyped members
    count against the majority: a label wins only when its count exceeds
    half of all members.
    """
    titles = graph.members_of(class_id)
    counts: Counter[NerLabel] = Counter()
    untyped = 0
    for title in titles:
        label = provider.get(title)
        if label is None:
            untyped += 1
        else:
            counts[label] += 1
    total = len(titles)
    tally = TypeTally(dict(counts), total, untyped)
    for label, count in counts.items():
        if 2 * count > total:
            return tally, label
    return tally, None


def load_ner_provider(path) -> dict[str, NerLabel]:
    """Read ``entity_title<TAB>label`` rows; labels outside the 9-value set fail."""
    provider: dict[str, NerLabel] = {}
    valid = {l.value: l for l in NerLabel}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) != 2 or not cols[0]:
                raise LoadError("malformed NER row", str(path), lineno)
            if cols[1] not in valid:
                raise LoadError(f"unknown NER label {cols[1]!r}", str(path), lineno)
            provider[cols[0]] = valid[cols[1]]
    return provider


def load_lexnames(path) -> dict[str, tuple[str, ...]]:
    """Read ``lemma<TAB>lexname[,lexname...]`` ordered by sense frequency."""
    lexicon: dict[str, tuple[str, ...]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) != 2 or not cols[0] or not cols[1]:
                raise LoadError("malformed lexnames row", str(path), lineno)
            names = tuple(n.strip() for n in cols[1].split(",") if n.strip())
            if not names or any(not n.startswith("noun.") for n in names):
                raise LoadError("lexnames must look like noun.<category>", str(path), lineno)
            lexicon[cols[0].casefold()] = names
    return lexicon


@lru_cache(maxsize=1)
def default_lexnames() -> dict[str, tuple[str, ...]]:
    with resources.as_file(resources.files("taxomap.data") / "lexnames.tsv") as p:
        return load_lexnames(p)


def lexname_of_root(root_word: str, lexicon: Mapping[str, tuple[str, ...]] | None = None) -> str | None:
    """Most frequent sense's lexname for a case-folded lemma, or None."""
    if lexicon is None:
        lexicon = default_lexnames()
    names = lexicon.get(root_word)
    return names[0] if names else None
