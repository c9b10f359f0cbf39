"""taxomap: map a large, noisy class taxonomy onto a curated target ontology.

The package combines four evidence channels per source class: root-phrase
name matching, embedding similarity, hierarchy propagation, and
named-entity majority typing, resolved by a fixed precedence cascade. It
also scores predictions against a gold benchmark and emits training pairs
for downstream model tuning.
"""

__version__ = "0.1.0"

from .ontology import (  # noqa: F401
    CycleReport,
    OntologyClass,
    TaxonomyGraph,
    break_cycles,
    load_taxonomy,
)
