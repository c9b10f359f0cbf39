"""Embedding store and cosine matching of root phrases to target classes.

Vectors are consumed precomputed (from a file or a one-shot HTTP fetch);
no encoder runs here. Matching is exhaustive over the target set, which
stays small enough that nothing cleverer is warranted.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, MutableMapping

import numpy as np
import requests

from .errors import DimensionMismatchError, LoadError, ZeroVectorError
from .ontology import TaxonomyGraph
from .phrases import RootPhraseSet

_CAMEL_BOUNDARY = re.compile(
    r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])|(?<=[A-Za-z])(?=[0-9])|(?<=[0-9])(?=[A-Za-z])"
)


def split_camel_case(target_name: str) -> str:
    """Camel-case and digit boundaries become spaces; result is case-folded.

    Acronym runs stay intact: "USPlace" -> "us place".
    """
    spaced = _CAMEL_BOUNDARY.sub(" ", target_name)
    return " ".join(spaced.casefold().split())


def store_key(phrase: str) -> str:
    """Case-folded, whitespace-normalized lookup key."""
    return " ".join(phrase.casefold().split())


def cosine(u, v) -> float:
    """dot(u, v) / (|u| |v|); raises on dimension mismatch or zero vectors."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionMismatchError(f"dims {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ZeroVectorError("cosine of an all-zero vector is undefined")
    return float(np.dot(u, v) / (nu * nv))


class EmbeddingStore:
    """Phrase text -> fixed-dimension vector, keyed case-folded."""

    def __init__(self, dim: int):
        if dim <= 0:
            raise ValueError("dim must be positive")
        self.dim = dim
        self._entries: dict[str, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, phrase: str) -> bool:
        return store_key(phrase) in self._entries

    def add(self, phrase: str, values) -> None:
        vec = np.asarray(values, dtype=np.float64)
        if vec.shape != (self.dim,):
            raise DimensionMismatchError(f"expected dim {self.dim}, got {vec.shape}")
        self._entries[store_key(phrase)] = vec

    def get(self, phrase: str) -> np.ndarray | None:
        return self._entries.get(store_key(phrase))

    @classmethod
    def load(cls, path) -> "EmbeddingStore":
        """Read ``#dim=<d>`` then ``phrase<TAB>f1 f2 ... fd`` lines."""
        store: EmbeddingStore | None = None
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n")
                if not line.strip():
                    continue
                if store is None:
                    m = re.fullmatch(r"#dim=(\d+)", line.strip())
                    if not m:
                        raise LoadError("first line must be #dim=<d>", str(path), lineno)
                    store = cls(int(m.group(1)))
                    continue
                if line.startswith("#"):
                    continue
                cols = line.split("\t")
                if len(cols) != 2:
                    raise LoadError("malformed embedding row", str(path), lineno)
                try:
                    values = [float(x) for x in cols[1].split()]
                except ValueError:
                    raise LoadError("non-numeric vector component", str(path), lineno)
                if len(values) != store.dim:
                    raise LoadError(f"expected {store.dim} components", str(path), lineno)
                store.add(cols[0], values)
        if store is None:
            raise LoadError("empty embedding file", str(path))
        return store

    def update_from_text(self, text: str) -> int:
        """Merge vector lines in the file format; returns how many were added."""
        added = 0
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise LoadError("malformed embedding line in response")
            values = [float(x) for x in cols[1].split()]
            if len(values) != self.dim:
                raise DimensionMismatchError(f"expected dim {self.dim}, got {len(values)}")
            self.add(cols[0], values)
            added += 1
        return added


def fetch_embeddings(store: EmbeddingStore, url: str, phrases: Iterable[str], timeout: float = 30.0) -> int:
    """Prefill the store from a line-oriented embedding service.

    Sends one phrase per line in a POST body; the response carries vector
    lines in the embedding-file format. Used only before matching starts.
    """
    body = "\n".join(dict.fromkeys(phrases))
    response = requests.post(url, data=body.encode("utf-8"), timeout=timeout,
                             headers={"Content-Type": "text/plain; charset=utf-8"})
    response.raise_for_status()
    return store.update_from_text(response.text)


@dataclass(frozen=True, slots=True)
class MatchCandidate:
    target_class: str
    matched_phrase: str
    score: float


class TargetIndex:
    """Precomputed unit vectors and tie-break features for the target classes.

    Build once, then score any number of phrases against it. Targets whose
    surface phrase has no vector are dropped here and tallied.
    """

    def __init__(self, targets: Iterable[tuple[str, str]], store: EmbeddingStore,
                 graph: TaxonomyGraph | None = None):
        rows = []
        self.missing_targets = 0
        for class_id, surface in sorted(targets):
            vec = store.get(surface)
            if vec is None:
                self.missing_targets += 1
                continue
            norm = float(np.linalg.norm(vec))
            if norm == 0.0:
                raise ZeroVectorError(f"zero vector for target {class_id!r}")
            depth = graph.depth(class_id) if graph is not None and class_id in graph else 0
            rows.append((class_id, surface, vec / norm, frozenset(surface.casefold().split()), depth))
        self.ids = [r[0] for r in rows]
        self.surfaces = [r[1] for r in rows]
        self.token_sets = [r[3] for r in rows]
        self.depths = [r[4] for r in rows]
        self.matrix = np.stack([r[2] for r in rows]) if rows else np.zeros((0, store.dim))
        self._store = store
        self._row_cache: dict[str, np.ndarray | None] = {}

    def scores_for(self, phrase: str) -> np.ndarray | None:
        """Cosine of ``phrase`` against every indexed target, or None if unknown."""
        key = store_key(phrase)
        if key in self._row_cache:
            return self._row_cache[key]
        vec = self._store.get(key)
        if vec is None:
            row = None
        else:
            norm = float(np.linalg.norm(vec))
            if norm == 0.0:
                raise ZeroVectorError(f"zero vector for phrase {phrase!r}")
            row = self.matrix @ (vec / norm)
        self._row_cache[key] = row
        return row


def best_match(
    phrases: RootPhraseSet,
    targets: Iterable[tuple[str, str]] | TargetIndex,
    store: EmbeddingStore | None = None,
    epsilon_tie: float = 0.01,
    full_label: str = "",
    graph: TaxonomyGraph | None = None,
    diagnostics: MutableMapping[str, int] | None = None,
) -> MatchCandidate | None:
    """Argmax of cosine over all (root phrase, target) pairs with vectors.

    Pairs scoring within ``epsilon_tie`` of the maximum are re-ranked by:
    shared tokens between the target surface and ``full_label``, then
    target depth, then smaller class id. Missing vectors are skipped and
    tallied; None is returned when no pair could be scored.
    """
    if isinstance(targets, TargetIndex):
        index = targets
    else:
        if store is None:
            raise ValueError("store is required when targets is not a TargetIndex")
        index = TargetIndex(targets, store, graph)
    if diagnostics is not None:
        diagnostics["targets_without_vectors"] = (
            diagnostics.get("targets_without_vectors", 0) + index.missing_targets
        )

    if index.matrix.shape[0] == 0:
        return None
    rows: list[tuple[str, np.ndarray]] = []
    for phrase in phrases.phrases:
        row = index.scores_for(phrase)
        if row is None:
            if diagnostics is not None:
                diagnostics["phrases_without_vectors"] = diagnostics.get("phrases_without_vectors", 0) + 1
            continue
        rows.append((phrase, row))
    if not rows:
        return None

    best_score = max(float(row.max()) for _, row in rows)
    threshold = best_score - epsilon_tie
    label_tokens = set(full_label.casefold().split())

    chosen = None
    chosen_rank = None
    for phrase, row in rows:
        for j in np.flatnonzero(row >= threshold):
            score = float(row[j])
            shared = len(index.token_sets[j] & label_tokens)
            rank = (-shared, -index.depths[j], index.ids[j], -score, phrase)
            if chosen_rank is None or rank < chosen_rank:
                chosen_rank = rank
                chosen = MatchCandidate(index.ids[j], phrase, score)
    return chosen


def is_confident_exact(candidate: MatchCandidate, tau_exact: float) -> bool:
    """True when the match is strong enough to treat as a confident pair."""
    if not 0.0 < tau_exact <= 1.0:
        raise ValueError("tau_exact must be in (0, 1]")
    return candidate.score >= tau_exact
