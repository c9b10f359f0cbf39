"""Shared helpers for building small in-memory graphs in tests."""

from __future__ import annotations

import random

from taxomap.ontology import load_taxonomy


def graph_from(edges, labels=None, membership=None, mode="strict", root=None):
    """Build a TaxonomyGraph from (child, parent) pairs and optional labels.

    Labels default to id=label for every id mentioned in the edges.
    """
    ids = {e for pair in edges for e in pair}
    if labels is None:
        labels = {i: i for i in sorted(ids)}
    else:
        labels = dict(labels)
        for i in sorted(ids):
            labels.setdefault(i, i)
    label_lines = [f"{i}\t{v}" for i, v in labels.items()]
    edge_lines = [f"{c}\t{p}" for c, p in edges]
    member_lines = None
    if membership:
        member_lines = [f"{c}\t{t}" for c, titles in membership.items() for t in titles]
    return load_taxonomy(edge_lines, label_lines, member_lines, mode=mode, root=root)


def random_dag_edges(rng: random.Random, n_nodes: int, edge_prob: float = 0.02):
    """(child, parent) pairs over n000..nNNN; parents always have lower index."""
    names = [f"n{i:03d}" for i in range(n_nodes)]
    edges = []
    for child_idx in range(1, n_nodes):
        for parent_idx in range(child_idx):
            if rng.random() < edge_prob:
                edges.append((names[child_idx], names[parent_idx]))
    return names, edges
