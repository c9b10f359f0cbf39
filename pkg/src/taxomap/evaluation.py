"""Scoring predictions against a gold benchmark and emitting training pairs."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import IO, Iterable, Mapping

from .errors import LoadError, UnknownClassError
from .ontology import TaxonomyGraph
from .propagation import ConfidentPair
from .resolver import ResolvedMapping


@dataclass(frozen=True, slots=True)
class BenchmarkEntry:
    source_class: str
    gold_target: str


def load_benchmark(path) -> list[BenchmarkEntry]:
    """Read ``source_class_id<TAB>gold_target_id`` rows, one gold per source."""
    entries: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) != 2 or not cols[0] or not cols[1]:
                raise LoadError("malformed benchmark row", str(path), lineno)
            if cols[0] in entries and entries[cols[0]] != cols[1]:
                raise LoadError(f"conflicting gold for {cols[0]!r}", str(path), lineno)
            entries[cols[0]] = cols[1]
    return [BenchmarkEntry(s, g) for s, g in sorted(entries.items())]


@dataclass(frozen=True, slots=True)
class MetricReport:
    macro_precision: float
    macro_recall: float
    macro_f1: float
    micro_precision: float
    micro_recall: float
    micro_f1: float
    accuracy: float
    per_class: dict[str, tuple[float, float, float, int]]

    def to_dict(self) -> dict:
        return {
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "micro_precision": self.micro_precision,
            "micro_recall": self.micro_recall,
            "micro_f1": self.micro_f1,
            "accuracy": self.accuracy,
            "per_class": {
                cls: {"precision": p, "recall": r, "f1": f, "support": s}
                for cls, (p, r, f, s) in sorted(self.per_class.items())
            },
        }


def evaluate(
    predictions: Mapping[str, str | None],
    benchmark: Iterable[BenchmarkEntry],
) -> MetricReport:
    """Multi-class precision/recall/F1 and accuracy over the benchmark.

    A missing prediction (None) is an abstention: it can never be correct,
    produces no false positive, and is excluded from the per-class table.
    Macro metrics average over gold classes with support > 0; micro
    metrics aggregate global counts.
    """
    entries = list(benchmark)
    missing_sources = [e.source_class for e in entries if e.source_class not in predictions]
    if missing_sources:
        raise KeyError(f"benchmark sources absent from predictions: {missing_sources[:5]}")

    tp: dict[str, int] = {}
    fp: dict[str, int] = {}
    fn: dict[str, int] = {}
    support: dict[str, int] = {}
    correct = 0
    predicted = 0
    for entry in entries:
        pred = predictions[entry.source_class]
        gold = entry.gold_target
        support[gold] = support.get(gold, 0) + 1
        if pred is not None:
            predicted += 1
        if pred == gold:
            correct += 1
            tp[gold] = tp.get(gold, 0) + 1
        else:
            fn[gold] = fn.get(gold, 0) + 1
            if pred is not None:
                fp[pred] = fp.get(pred, 0) + 1

    def ratio(num: float, den: float) -> float:
        return num / den if den else 0.0

    per_class: dict[str, tuple[float, float, float, int]] = {}
    for cls in support:
        p = ratio(tp.get(cls, 0), tp.get(cls, 0) + fp.get(cls, 0))
        r = ratio(tp.get(cls, 0), tp.get(cls, 0) + fn.get(cls, 0))
        f = ratio(2 * p * r, p + r)
        per_class[cls] = (p, r, f, support[cls])

    k = len(per_class)
    total = len(entries)
    micro_p = ratio(correct, predicted)
    micro_r = ratio(correct, total)
    return MetricReport(
        macro_precision=ratio(sum(v[0] for v in per_class.values()), k),
        macro_recall=ratio(sum(v[1] for v in per_class.values()), k),
        macro_f1=ratio(sum(v[2] for v in per_class.values()), k),
        micro_precision=micro_p,
        micro_recall=micro_r,
        micro_f1=ratio(2 * micro_p * micro_r, micro_p + micro_r),
        accuracy=ratio(correct, total),
        per_class=per_class,
    )


class Judgment(enum.Enum):
    CORRECT = "CORRECT"
    WRONG_NOT_SPECIFIC = "WRONG_NOT_SPECIFIC"
    WRONG_OTHER = "WRONG_OTHER"
    MISSING = "MISSING"


def judge(prediction: str | None, gold: str, target_graph: TaxonomyGraph) -> Judgment:
    """Exactly one category per (prediction, gold) pair.

    WRONG_NOT_SPECIFIC marks a prediction that is a strict ancestor of the
    gold class: right direction, not specific enough.
    """
    if gold not in target_graph:
        raise UnknownClassError(f"gold class {gold!r} not in target graph")
    if prediction is None:
        return Judgment.MISSING
    if prediction == gold:
        return Judgment.CORRECT
    if target_graph.is_strict_ancestor(prediction, gold):
        return Judgment.WRONG_NOT_SPECIFIC
    return Judgment.WRONG_OTHER


MAPPING_RECORD_FIELDS = ("c", "dbo", "rule", "score", "provenance")


def mapping_record(mapping: ResolvedMapping) -> str:
    """One mapping as a JSON line with the fixed field order."""
    record = {
        "c": mapping.source_class,
        "dbo": mapping.target_class,
        "rule": mapping.rule_fired,
        "score": mapping.score,
        "provenance": [[channel, value, score] for channel, value, score in mapping.provenance],
    }
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"))


def parse_mapping_record(line: str) -> ResolvedMapping:
    obj = json.loads(line)
    return ResolvedMapping(
        obj["c"],
        obj["dbo"],
        obj["rule"],
        obj["score"],
        tuple((c, v, s) for c, v, s in obj["provenance"]),
    )


def emit_training_pairs(
    resolved: Iterable[ResolvedMapping],
    augmented: Iterable[ConfidentPair],
    min_confidence: float,
    labels: Mapping[str, str],
    out: IO[str],
) -> dict[str, int]:
    """Write the distant-supervision pairs as JSON lines, ordered by source id.

    One record per non-MISSING mapping plus the augmentation pairs,
    deduplicated by (source, target) with resolver records preferred.
    Records carrying a score below ``min_confidence`` are dropped;
    score-less records are kept.
    """
    stats = {"records": 0, "from_resolver": 0, "from_augmentation": 0, "dropped_below_confidence": 0}
    chosen: dict[tuple[str, str], tuple[str, float | None, int]] = {}
    for mapping in resolved:
        if mapping.target_class is None:
            continue
        if mapping.score is not None and mapping.score < min_confidence:
            stats["dropped_below_confidence"] += 1
            continue
        chosen.setdefault((mapping.source_class, mapping.target_class), (mapping.rule_fired, mapping.score, 0))
    for pair in sorted(augmented, key=lambda p: (p.source_class, p.target_class, p.origin, p.via or "")):
        if pair.score is not None and pair.score < min_confidence:
            stats["dropped_below_confidence"] += 1
            continue
        chosen.setdefault((pair.source_class, pair.target_class), (pair.origin, pair.score, 1))

    for (source, target), (rule, score, from_aug) in sorted(chosen.items()):
        record = {
            "c": source,
            "label": labels.get(source, source),
            "dbo": target,
            "rule": rule,
            "score": score,
        }
        out.write(json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n")
        stats["records"] += 1
        stats["from_augmentation" if from_aug else "from_resolver"] += 1
    return stats
