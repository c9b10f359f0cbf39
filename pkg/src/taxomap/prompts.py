"""Prompt rendering and verbalizer arithmetic for downstream cloze tuning.

Only the pure text/score operations live here; no model is loaded or
tuned. A rendered prompt wraps a class name with soft placeholder tokens
and one [MASK] slot; the T2 variant appends an ancestor-class hint. The
verbalizer turns masked-word probabilities into per-class scores through
a weighted mean over each class's supplemental word list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, MutableMapping

from .errors import LoadError

T1 = "T1"
T2 = "T2"
MASK = "[MASK]"


@dataclass(frozen=True, slots=True)
class PromptRendering:
    template_id: str
    text: str


def render_prompt(
    label: str,
    template_id: str,
    placeholder_count_front: int,
    placeholder_count_back: int,
    hint: str | None = None,
) -> PromptRendering:
    """Lay out placeholder tokens, the word Category, the label, and one mask.

    T1:  [P_1]..[P_n] Category [P_n+1]..[P_l] . <label> [MASK]
    T2:  the same with " . <hint>" appended. The hint is required for T2
    and rejected for T1.
    """
    if template_id not in (T1, T2):
        raise ValueError(f"unknown template {template_id!r}")
    if placeholder_count_front < 0 or placeholder_count_back < 0:
        raise ValueError("placeholder counts must be non-negative")
    if template_id == T2 and hint is None:
        raise ValueError("T2 requires a hint")
    if template_id == T1 and hint is not None:
        raise ValueError("T1 does not take a hint")

    n = placeholder_count_front
    tokens = [f"[P_{i}]" for i in range(1, n + 1)]
    tokens.append("Category")
    tokens.extend(f"[P_{i}]" for i in range(n + 1, n + placeholder_count_back + 1))
    tokens.append(".")
    tokens.append(label)
    tokens.append(MASK)
    if template_id == T2:
        tokens.append(".")
        tokens.append(hint)
    return PromptRendering(template_id, " ".join(tokens))


@dataclass(frozen=True, slots=True)
class VerbalizerTable:
    """Per target class: its supplemental words with positive weights."""

    entries: Mapping[str, tuple[tuple[str, float], ...]]

    def __getitem__(self, class_id: str) -> tuple[tuple[str, float], ...]:
        return self.entries[class_id]

    def __iter__(self):
        return iter(self.entries)


def load_verbalizers(path) -> VerbalizerTable:
    """Read ``class_id<TAB>word:weight[,word:weight...]`` rows.

    A bare word without ``:weight`` gets the uniform default weight 1.
    """
    entries: dict[str, tuple[tuple[str, float], ...]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) != 2 or not cols[0] or not cols[1]:
                raise LoadError("malformed verbalizer row", str(path), lineno)
            pairs = []
            for chunk in cols[1].split(","):
                chunk = chunk.strip()
                if not chunk:
                    continue
                if ":" in chunk:
                    word, _, weight_text = chunk.rpartition(":")
                    try:
                        weight = float(weight_text)
                    except ValueError:
                        raise LoadError(f"bad weight in {chunk!r}", str(path), lineno)
                else:
                    word, weight = chunk, 1.0
                if not word or not math.isfinite(weight) or weight <= 0:
                    raise LoadError(f"bad verbalizer entry {chunk!r}", str(path), lineno)
                pairs.append((word, weight))
            if not pairs:
                raise LoadError("empty word set", str(path), lineno)
            entries[cols[0]] = tuple(pairs)
    return VerbalizerTable(entries)


def verbalizer_score(
    mask_probabilities: Mapping[str, float],
    table: VerbalizerTable,
    diagnostics: MutableMapping[str, int] | None = None,
) -> dict[str, float]:
    """score(class) = (1/m) * sum(weight_j * P(mask = word_j)).

    Words absent from ``mask_probabilities`` contribute probability 0 and
    are tallied in diagnostics.
    """
    scores: dict[str, float] = {}
    for class_id in table:
        pairs = table[class_id]
        total = 0.0
        for word, weight in pairs:
            if not math.isfinite(weight):
                raise ValueError(f"non-finite weight for {word!r}")
            prob = mask_probabilities.get(word)
            if prob is None:
                if diagnostics is not None:
                    diagnostics["missing_words"] = diagnostics.get("missing_words", 0) + 1
                prob = 0.0
            if not math.isfinite(prob):
                raise ValueError(f"non-finite probability for {word!r}")
            total += weight * prob
        scores[class_id] = total / len(pairs)
    return scores
