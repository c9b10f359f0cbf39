"""Stage orchestration: configuration, caching, deterministic artifacts.

A run executes an ordered subset of the stages

    load, parse, match, propagate, type, resolve, evaluate, emit

writing one content-addressed artifact per stage under the cache
directory. A stage whose key (input hashes plus the config slice it
depends on) matches an existing artifact is replayed from disk instead of
recomputed, byte for byte. All iteration is in ascending class-id order
and no randomness exists anywhere, so reruns and different worker counts
produce identical bytes.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .entitytypes import (
    NerLabel,
    TypeTally,
    default_lexnames,
    lexname_of_root,
    load_lexnames,
    load_ner_provider,
    ner_to_target_class,
    tally_and_majority,
)
from .errors import ConfigError, NoRootError, StageDependencyError
from .evaluation import (
    BenchmarkEntry,
    Judgment,
    MetricReport,
    emit_training_pairs,
    evaluate,
    judge,
    load_benchmark,
    mapping_record,
    parse_mapping_record,
)
from .matching import EmbeddingStore, MatchCandidate, TargetIndex, best_match, fetch_embeddings, split_camel_case, store_key
from .ontology import SOURCE_TAXONOMY, TARGET_ONTOLOGY, TaxonomyGraph, break_cycles, load_taxonomy
from .phrases import AnnotationProvider, RootPhraseSet, annotate, default_lexicon, default_prepositions, extract_root_phrases, normalize_label
from .propagation import EXACT_NAME, INHERITED, SIBLING, SIMILARITY, ConfidentPair, augment_dataset, propagate_descendants, propagate_siblings
from .resolver import DEFAULT_TAU_EXACT, DEFAULT_TAU_SIM, ResolvedMapping, build_bundle, resolve

STAGES = ("load", "parse", "match", "propagate", "type", "resolve", "evaluate", "emit")

STAGE_DEPS: dict[str, tuple[str, ...]] = {
    "load": (),
    "parse": ("load",),
    "match": ("parse",),
    "propagate": ("match", "parse"),
    "type": ("parse",),
    "resolve": ("parse", "match", "propagate", "type"),
    "evaluate": ("resolve",),
    "emit": ("resolve", "propagate"),
}

_PATH_FIELDS = (
    "dbpedia_edges", "dbpedia_labels", "cg_edges", "cg_labels", "members",
    "embeddings", "ner", "lexnames", "annotations", "verbalizers", "benchmark",
)


@dataclass(slots=True)
class PipelineConfig:
    dbpedia_edges: str | None = None
    dbpedia_labels: str | None = None
    cg_edges: str | None = None
    cg_labels: str | None = None
    members: str | None = None
    embeddings: str | None = None
    embed_url: str | None = None
    ner: str | None = None
    lexnames: str | None = None
    annotations: str | None = None
    verbalizers: str | None = None
    benchmark: str | None = None
    tau_exact: float = DEFAULT_TAU_EXACT
    tau_sim: float = DEFAULT_TAU_SIM
    epsilon_tie: float = 0.01
    mode: str = "strict"
    worker_count: int = 1
    cache_dir: str = ".taxomap-cache"
    out: str | None = None
    report: str | None = None
    train_out: str | None = None
    min_confidence: float = 0.0
    target_root: str | None = None

    def validate(self) -> None:
        for name in ("tau_exact", "tau_sim"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ConfigError(f"{name} must be in (0, 1], got {value}")
        if self.epsilon_tie < 0:
            raise ConfigError("epsilon_tie must be >= 0")
        if self.worker_count < 1:
            raise ConfigError("worker_count must be >= 1")
        if self.mode not in ("strict", "lenient"):
            raise ConfigError(f"mode must be strict or lenient, got {self.mode!r}")
        if self.min_confidence < 0:
            raise ConfigError("min_confidence must be >= 0")

    @classmethod
    def from_file(cls, path, overrides: Mapping[str, Any] | None = None) -> "PipelineConfig":
        """JSON config file plus flag overrides; overrides win."""
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        config = cls(**data)
        if overrides:
            config = replace(config, **{k: v for k, v in overrides.items() if v is not None})
        return config

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class StageCache:
    """Content-addressed stage artifacts under one directory."""

    def __init__(self, cache_dir):
        self.dir = Path(cache_dir)
        self.dir.mkdir(parents=True, exist_ok=True)

    def path(self, stage: str, key: str) -> Path:
        ext = "json" if stage in ("load", "evaluate") else "jsonl"
        return self.dir / f"{stage}-{key[:16]}.{ext}"

    def write(self, path: Path, text: str) -> None:
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)


# ---------------------------------------------------------------------------
# stage computations (pure functions over in-memory inputs)

def _parse_rows(rows, provider_raw, lexicon, prepositions):
    provider = AnnotationProvider(provider_raw) if provider_raw else None
    out = []
    for cid, raw_label in rows:
        label = None
        try:
            label = normalize_label(raw_label)
            parsed = annotate(label, provider, lexicon, prepositions)
            rps = extract_root_phrases(parsed)
            out.append((cid, label, rps.root_word, rps.phrases))
        except (ValueError, NoRootError):
            # unusable names stay in the run with no phrases; the other
            # channels can still resolve them. Malformed provider entries
            # propagate: they mean the annotations file is broken.
            out.append((cid, label if label is not None else raw_label, None, ()))
    return out


def _parse_chunk(args):
    rows, provider_raw = args
    return _parse_rows(rows, provider_raw, default_lexicon(), default_prepositions())


def parse_source_classes(
    source_graph: TaxonomyGraph,
    provider: AnnotationProvider | None = None,
    worker_count: int = 1,
) -> dict[str, tuple[str, str | None, tuple[str, ...]]]:
    """Per class: (normalized label, root word or None, phrase tuple)."""
    rows = [(cid, source_graph.classes[cid].label) for cid in source_graph.ids()]
    provider_raw = provider._raw if provider is not None else None
    if worker_count <= 1 or len(rows) < 2000:
        parsed = _parse_rows(rows, provider_raw, default_lexicon(), default_prepositions())
    else:
        chunk_size = max(500, len(rows) // (worker_count * 8))
        chunks = [(rows[i:i + chunk_size], provider_raw) for i in range(0, len(rows), chunk_size)]
        parsed = []
        with ProcessPoolExecutor(max_workers=worker_count) as pool:
            for part in pool.map(_parse_chunk, chunks):
                parsed.extend(part)
    return {cid: (label, root, phrases) for cid, label, root, phrases in parsed}


def build_target_index(target_graph: TaxonomyGraph, store: EmbeddingStore) -> TargetIndex:
    targets = [(cid, split_camel_case(target_graph.classes[cid].label)) for cid in target_graph.ids()]
    return TargetIndex(targets, store, target_graph)


def match_candidates(
    parse_result: Mapping[str, tuple[str, str | None, tuple[str, ...]]],
    index: TargetIndex,
    epsilon_tie: float,
    diagnostics: dict[str, int] | None = None,
) -> dict[str, MatchCandidate]:
    out: dict[str, MatchCandidate] = {}
    for cid in sorted(parse_result):
        label, root, phrases = parse_result[cid]
        if root is None or not phrases:
            continue
        candidate = best_match(
            RootPhraseSet(root, phrases), index,
            epsilon_tie=epsilon_tie, full_label=label, diagnostics=diagnostics,
        )
        if candidate is not None:
            out[cid] = candidate
    return out


def confident_seeds(
    matches: Mapping[str, MatchCandidate],
    target_surfaces: Mapping[str, str],
    tau_exact: float,
) -> set[ConfidentPair]:
    """Matches at or above tau_exact become propagation seeds.

    A seed is EXACT_NAME when its phrase equals the target surface up to
    case and spacing, SIMILARITY otherwise.
    """
    seeds = set()
    for cid in sorted(matches):
        cand = matches[cid]
        if cand.score < tau_exact:
            continue
        surface = target_surfaces.get(cand.target_class, "")
        origin = EXACT_NAME if store_key(cand.matched_phrase) == store_key(surface) else SIMILARITY
        seeds.add(ConfidentPair(cid, cand.target_class, origin, cand.score))
    return seeds


def propagate_stage(
    seeds: set[ConfidentPair],
    source_graph: TaxonomyGraph,
    parse_result: Mapping[str, tuple[str, str | None, tuple[str, ...]]],
) -> tuple[set[ConfidentPair], set[ConfidentPair], set[ConfidentPair]]:
    """Returns (inherited, siblings, augmented-for-training)."""
    root_phrases = {
        cid: RootPhraseSet(root, phrases)
        for cid, (label, root, phrases) in parse_result.items()
        if root is not None and phrases
    }
    inherited = propagate_descendants(seeds, source_graph)
    siblings = propagate_siblings(seeds, source_graph, root_phrases)
    augmented = augment_dataset(seeds, source_graph, root_phrases)
    return inherited, siblings, augmented


def type_classes(
    parse_result: Mapping[str, tuple[str, str | None, tuple[str, ...]]],
    source_graph: TaxonomyGraph,
    ner_provider: Mapping[str, Any],
    lexnames: Mapping[str, tuple[str, ...]],
) -> dict[str, tuple[Any, str | None, str | None, Any]]:
    """Per class: (majority NER label, its target class, root lexname, tally)."""
    out = {}
    for cid in sorted(parse_result):
        _, root, _ = parse_result[cid]
        tally, majority = tally_and_majority(cid, source_graph, ner_provider)
        ner_class = ner_to_target_class(majority) if majority is not None else None
        lexname = lexname_of_root(root.casefold(), lexnames) if root else None
        out[cid] = (majority, ner_class, lexname, tally)
    return out


def resolve_all(
    parse_result: Mapping[str, tuple[str, str | None, tuple[str, ...]]],
    matches: Mapping[str, MatchCandidate],
    hierarchy_pairs: Mapping[str, tuple[ConfidentPair, ...]],
    typing_result: Mapping[str, tuple[Any, str | None, str | None, Any]],
    target_graph: TaxonomyGraph,
    tau_exact: float,
    tau_sim: float,
) -> list[ResolvedMapping]:
    out = []
    for cid in sorted(parse_result):
        typed = typing_result.get(cid)
        bundle = build_bundle(
            cid,
            matches.get(cid),
            hierarchy_pairs.get(cid, ()),
            typed[1] if typed else None,
            typed[2] if typed else None,
        )
        out.append(resolve(bundle, target_graph, tau_exact, tau_sim))
    return out


def render_report(
    rows: list[tuple[str, Mapping[str, float], Mapping[str, int]]],
) -> str:
    """Text table: seven metric columns per row plus a judgment breakdown."""
    metric_keys = (
        "macro_precision", "macro_recall", "macro_f1",
        "micro_precision", "micro_recall", "micro_f1", "accuracy",
    )
    name_width = max([len(name) for name, _, _ in rows] + [len("model")])
    lines = ["model".ljust(name_width) + "".join(k.rjust(17) for k in metric_keys)]
    for name, metrics, _ in rows:
        cells = "".join(f"{metrics[k]:.3f}".rjust(17) for k in metric_keys)
        lines.append(name.ljust(name_width) + cells)
    categories = ("CORRECT", "WRONG_NOT_SPECIFIC", "WRONG_OTHER", "MISSING")
    for name, _, judgments in rows:
        total = sum(judgments.get(c, 0) for c in categories)
        lines.append("")
        lines.append(f"judgments [{name}]".ljust(24) + "count".rjust(8) + "percent".rjust(10))
        for category in categories:
            count = judgments.get(category, 0)
            pct = 100.0 * count / total if total else 0.0
            lines.append(category.ljust(24) + str(count).rjust(8) + f"{pct:.1f}%".rjust(10))
        lines.append("total".ljust(24) + str(total).rjust(8) + "100.0%".rjust(10))
    return "\n".join(lines) + "\n"


def report(
    metrics: MetricReport,
    judgments: Mapping[str, int],
    baseline: tuple[MetricReport, Mapping[str, int]] | None = None,
) -> tuple[str, dict]:
    """Render the run (and optionally a baseline) as text plus a dict."""
    rows = [("run", metrics.to_dict(), dict(judgments))]
    if baseline is not None:
        rows.append(("baseline", baseline[0].to_dict(), dict(baseline[1])))
    structured = {
        name: {"metrics": m, "judgments": j} for name, m, j in rows
    }
    return render_report(rows), structured


def judgment_counts(
    predictions: Mapping[str, str | None],
    benchmark: list[BenchmarkEntry],
    target_graph: TaxonomyGraph,
) -> dict[str, int]:
    counts = {j.value: 0 for j in Judgment}
    for entry in benchmark:
        verdict = judge(predictions[entry.source_class], entry.gold_target, target_graph)
        counts[verdict.value] += 1
    return counts


# ---------------------------------------------------------------------------
# the runner

def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"), sort_keys=True)


class PipelineRun:
    """One invocation: resolves stage keys, replays or computes, writes outputs."""

    def __init__(self, config: PipelineConfig):
        config.validate()
        self.config = config
        self.cache = StageCache(config.cache_dir)
        self._results: dict[str, Any] = {}
        self._keys: dict[str, str] = {}
        self._cached: dict[str, bool] = {}
        self._counters: dict[str, dict] = {}
        self._graphs: tuple[TaxonomyGraph, TaxonomyGraph] | None = None
        self._input_hashes: dict[str, str] = {}
        self._requested: set[str] = set()
        self._fetched_text: str | None = None

    # -- hashing / keys

    def _input_hash(self, path_value: str | None) -> str:
        if path_value is None:
            return "absent"
        if path_value not in self._input_hashes:
            if not os.path.exists(path_value):
                raise ConfigError(f"input file not found: {path_value}")
            self._input_hashes[path_value] = _sha256_file(path_value)
        return self._input_hashes[path_value]

    def _data_hash(self, name: str) -> str:
        with resources.as_file(resources.files("taxomap.data") / name) as p:
            return self._input_hash(str(p))

    def _key(self, stage: str) -> str:
        if stage in self._keys:
            return self._keys[stage]
        cfg = self.config
        slice_: dict[str, Any] = {"stage": stage}
        if stage == "load":
            for name in ("dbpedia_edges", "dbpedia_labels", "cg_edges", "cg_labels", "members"):
                slice_[name] = self._input_hash(getattr(cfg, name))
            slice_["mode"] = cfg.mode
            slice_["target_root"] = cfg.target_root
        elif stage == "parse":
            slice_["load"] = self._key("load")
            slice_["annotations"] = self._input_hash(cfg.annotations)
            slice_["lexicon"] = self._data_hash("pos_lexicon.tsv")
            slice_["prepositions"] = self._data_hash("prepositions.txt")
        elif stage == "match":
            slice_["parse"] = self._key("parse")
            slice_["embeddings"] = self._input_hash(cfg.embeddings)
            slice_["epsilon_tie"] = cfg.epsilon_tie
            if cfg.embed_url:
                slice_["fetched"] = _sha256_text(self._fetch_missing())
        elif stage == "propagate":
            slice_["match"] = self._key("match")
            slice_["parse"] = self._key("parse")
            slice_["tau_exact"] = cfg.tau_exact
        elif stage == "type":
            slice_["parse"] = self._key("parse")
            slice_["ner"] = self._input_hash(cfg.ner)
            slice_["lexnames"] = self._input_hash(cfg.lexnames) if cfg.lexnames else self._data_hash("lexnames.tsv")
        elif stage == "resolve":
            slice_["match"] = self._key("match")
            slice_["propagate"] = self._key("propagate")
            slice_["type"] = self._key("type")
            slice_["tau_exact"] = cfg.tau_exact
            slice_["tau_sim"] = cfg.tau_sim
        elif stage == "evaluate":
            slice_["resolve"] = self._key("resolve")
            slice_["benchmark"] = self._input_hash(cfg.benchmark)
        elif stage == "emit":
            slice_["resolve"] = self._key("resolve")
            slice_["propagate"] = self._key("propagate")
            slice_["min_confidence"] = cfg.min_confidence
        key = _sha256_text(_dumps(slice_))
        self._keys[stage] = key
        return key

    # -- shared materialization

    def graphs(self) -> tuple[TaxonomyGraph, TaxonomyGraph]:
        if self._graphs is None:
            cfg = self.config
            for name in ("dbpedia_edges", "dbpedia_labels", "cg_edges", "cg_labels"):
                if getattr(cfg, name) is None:
                    raise ConfigError(f"--{name.replace('_', '-')} is required")
            target = load_taxonomy(
                cfg.dbpedia_edges, cfg.dbpedia_labels, None,
                mode=cfg.mode, source=TARGET_ONTOLOGY, root=cfg.target_root,
            )
            target, target_report = break_cycles(target)
            source = load_taxonomy(
                cfg.cg_edges, cfg.cg_labels, cfg.members,
                mode=cfg.mode, source=SOURCE_TAXONOMY,
            )
            source, source_report = break_cycles(source)
            self._graphs = (source, target)
            self._counters.setdefault("load", {}).update(
                source_classes=len(source),
                target_classes=len(target),
                source_cycles_removed=source_report.cycle_count,
                target_cycles_removed=target_report.cycle_count,
                warnings=source.warnings + target.warnings,
            )
        return self._graphs

    def _store(self) -> EmbeddingStore:
        if self.config.embeddings is None:
            raise ConfigError("--embeddings is required for the match stage")
        store = EmbeddingStore.load(self.config.embeddings)
        if self.config.embed_url:
            store.update_from_text(self._fetch_missing())
        return store

    def _fetch_missing(self) -> str:
        """One POST for every phrase and target surface the store lacks."""
        if self._fetched_text is not None:
            return self._fetched_text
        base = EmbeddingStore.load(self.config.embeddings)
        parse_result = self._ensure("parse", requester="match")
        _, target_graph = self.graphs()
        wanted: set[str] = set()
        for label, root, phrases in parse_result.values():
            for phrase in phrases:
                if store_key(phrase) not in base:
                    wanted.add(store_key(phrase))
        for cid in target_graph.ids():
            surface = split_camel_case(target_graph.classes[cid].label)
            if surface not in base:
                wanted.add(surface)
        buffer = io.StringIO()
        if wanted:
            fetch_into = EmbeddingStore(base.dim)
            fetch_embeddings(fetch_into, self.config.embed_url, sorted(wanted))
            for key in sorted(fetch_into._entries):
                vec = fetch_into._entries[key]
                buffer.write(key + "\t" + " ".join(repr(x) for x in vec.tolist()) + "\n")
        self._fetched_text = buffer.getvalue()
        return self._fetched_text

    # -- stage execution

    def _ensure(self, stage: str, requester: str | None = None):
        if stage in self._results:
            return self._results[stage]
        key = self._key(stage)
        path = self.cache.path(stage, key)
        if path.exists():
            self._results[stage] = self._load_artifact(stage, path)
            self._cached[stage] = True
            return self._results[stage]
        if stage not in self._requested and requester is not None:
            raise StageDependencyError(requester, stage)
        for dep in STAGE_DEPS[stage]:
            self._ensure(dep, requester=stage)
        result, text = self._compute(stage)
        self.cache.write(path, text)
        self._results[stage] = result
        self._cached[stage] = False
        return result

    def _compute(self, stage: str):
        return getattr(self, f"_compute_{stage}")()

    def _compute_load(self):
        self.graphs()
        summary = dict(sorted(self._counters["load"].items()))
        return summary, _dumps(summary) + "\n"

    def _compute_parse(self):
        cfg = self.config
        source, _ = self.graphs()
        provider = AnnotationProvider.load(cfg.annotations) if cfg.annotations else None
        result = parse_source_classes(source, provider, cfg.worker_count)
        no_root = sum(1 for _, root, _ in result.values() if root is None)
        self._counters["parse"] = {"classes": len(result), "no_root": no_root}
        lines = []
        for cid in sorted(result):
            label, root, phrases = result[cid]
            lines.append(json.dumps(
                {"c": cid, "label": label, "root": root, "phrases": list(phrases)},
                ensure_ascii=False, separators=(",", ":"),
            ))
        return result, "\n".join(lines) + ("\n" if lines else "")

    def _compute_match(self):
        cfg = self.config
        _, target = self.graphs()
        parse_result = self._results["parse"]
        store = self._store()
        index = build_target_index(target, store)
        diags: dict[str, int] = {}
        matches = match_candidates(parse_result, index, cfg.epsilon_tie, diags)
        self._counters["match"] = {"candidates": len(matches), **dict(sorted(diags.items()))}
        lines = []
        for cid in sorted(matches):
            cand = matches[cid]
            lines.append(json.dumps(
                {"c": cid, "dbo": cand.target_class, "phrase": cand.matched_phrase, "score": cand.score},
                ensure_ascii=False, separators=(",", ":"),
            ))
        return matches, "\n".join(lines) + ("\n" if lines else "")

    def _compute_propagate(self):
        cfg = self.config
        source, target = self.graphs()
        parse_result = self._results["parse"]
        matches = self._results["match"]
        surfaces = {cid: split_camel_case(target.classes[cid].label) for cid in target.ids()}
        seeds = confident_seeds(matches, surfaces, cfg.tau_exact)
        inherited, siblings, augmented = propagate_stage(seeds, source, parse_result)
        pairs = sorted(
            seeds | inherited | siblings,
            key=lambda p: (p.source_class, p.target_class, p.origin, p.via or "", p.score or 0.0),
        )
        self._counters["propagate"] = {
            "seeds": len(seeds), "inherited": len(inherited),
            "siblings": len(siblings), "augmented": len(augmented),
        }
        lines = [
            json.dumps(
                {"c": p.source_class, "dbo": p.target_class, "origin": p.origin,
                 "score": p.score, "via": p.via},
                ensure_ascii=False, separators=(",", ":"),
            )
            for p in pairs
        ]
        return pairs, "\n".join(lines) + ("\n" if lines else "")

    def _compute_type(self):
        cfg = self.config
        source, _ = self.graphs()
        parse_result = self._results["parse"]
        provider = load_ner_provider(cfg.ner) if cfg.ner else {}
        lexnames = load_lexnames(cfg.lexnames) if cfg.lexnames else default_lexnames()
        result = type_classes(parse_result, source, provider, lexnames)
        self._counters["type"] = {
            "with_ner_majority": sum(1 for v in result.values() if v[1] is not None),
            "with_lexname": sum(1 for v in result.values() if v[2] is not None),
        }
        lines = []
        for cid in sorted(result):
            majority, ner_class, lexname, tally = result[cid]
            lines.append(json.dumps(
                {
                    "c": cid,
                    "majority": majority.value if majority else None,
                    "ner_class": ner_class,
                    "lexname": lexname,
                    "total": tally.total_members,
                    "untyped": tally.untyped,
                    "counts": {k.value: v for k, v in sorted(tally.counts.items(), key=lambda kv: kv[0].value)},
                },
                ensure_ascii=False, separators=(",", ":"),
            ))
        return result, "\n".join(lines) + ("\n" if lines else "")

    def _compute_resolve(self):
        cfg = self.config
        _, target = self.graphs()
        parse_result = self._results["parse"]
        matches = self._results["match"]
        pairs = self._results["propagate"]
        typing_result = self._results["type"]
        hierarchy: dict[str, list[ConfidentPair]] = {}
        for pair in pairs:
            if pair.origin in (SIBLING, INHERITED):
                hierarchy.setdefault(pair.source_class, []).append(pair)
        resolved = resolve_all(
            parse_result, matches,
            {cid: tuple(ps) for cid, ps in hierarchy.items()},
            typing_result, target, cfg.tau_exact, cfg.tau_sim,
        )
        rule_counts: dict[str, int] = {}
        for m in resolved:
            rule_counts[m.rule_fired] = rule_counts.get(m.rule_fired, 0) + 1
        self._counters["resolve"] = {
            "resolved": sum(1 for m in resolved if m.target_class is not None),
            "missing": sum(1 for m in resolved if m.target_class is None),
            **dict(sorted(rule_counts.items())),
        }
        text = "\n".join(mapping_record(m) for m in resolved) + ("\n" if resolved else "")
        return resolved, text

    def _compute_evaluate(self):
        cfg = self.config
        if cfg.benchmark is None:
            raise ConfigError("--benchmark is required for the evaluate stage")
        _, target = self.graphs()
        resolved = self._results["resolve"]
        benchmark = load_benchmark(cfg.benchmark)
        predictions = {m.source_class: m.target_class for m in resolved}
        metrics = evaluate(predictions, benchmark)
        judgments = judgment_counts(predictions, benchmark, target)
        artifact = {
            "metrics": metrics.to_dict(),
            "judgments": dict(sorted(judgments.items())),
            "benchmark_size": len(benchmark),
        }
        self._counters["evaluate"] = {
            "benchmark_size": len(benchmark),
            "accuracy": metrics.accuracy,
        }
        return artifact, _dumps(artifact) + "\n"

    def _compute_emit(self):
        cfg = self.config
        source, _ = self.graphs()
        resolved = self._results["resolve"]
        pairs = self._results["propagate"]
        augmented = {p for p in pairs if p.origin != INHERITED}
        labels = {}
        for cid in sorted({m.source_class for m in resolved} | {p.source_class for p in augmented}):
            try:
                labels[cid] = normalize_label(source.classes[cid].label) if cid in source else cid
            except ValueError:
                labels[cid] = source.classes[cid].label
        buffer = io.StringIO()
        stats = emit_training_pairs(resolved, augmented, cfg.min_confidence, labels, buffer)
        self._counters["emit"] = stats
        return stats, buffer.getvalue()

    # -- artifact replay

    def _load_artifact(self, stage: str, path: Path):
        text = path.read_text(encoding="utf-8")
        if stage in ("load", "evaluate"):
            return json.loads(text) if text.strip() else {}
        lines = [l for l in text.splitlines() if l]
        if stage == "parse":
            return {
                obj["c"]: (obj["label"], obj["root"], tuple(obj["phrases"]))
                for obj in map(json.loads, lines)
            }
        if stage == "match":
            return {
                obj["c"]: MatchCandidate(obj["dbo"], obj["phrase"], obj["score"])
                for obj in map(json.loads, lines)
            }
        if stage == "propagate":
            return [
                ConfidentPair(obj["c"], obj["dbo"], obj["origin"], obj["score"], obj["via"])
                for obj in map(json.loads, lines)
            ]
        if stage == "type":
            out = {}
            for obj in map(json.loads, lines):
                counts = {NerLabel(k): v for k, v in obj["counts"].items()}
                tally = TypeTally(counts, obj["total"], obj["untyped"])
                majority = NerLabel(obj["majority"]) if obj["majority"] else None
                out[obj["c"]] = (majority, obj["ner_class"], obj["lexname"], tally)
            return out
        if stage == "resolve":
            return [parse_mapping_record(l) for l in lines]
        if stage == "emit":
            return {"records": len(lines)}
        raise AssertionError(stage)

    # -- entry point

    def run(self, stages: list[str] | None = None) -> dict:
        cfg = self.config
        if stages is None:
            stages = ["load", "parse", "match", "propagate", "type", "resolve"]
            if cfg.benchmark:
                stages.append("evaluate")
            if cfg.train_out:
                stages.append("emit")
        for stage in stages:
            if stage not in STAGES:
                raise ConfigError(f"unknown stage {stage!r}")
        # every configured input must exist, used by a stage or not
        for name in _PATH_FIELDS:
            if getattr(cfg, name) is not None:
                self._input_hash(getattr(cfg, name))
        ordered = [s for s in STAGES if s in set(stages)]
        self._requested = set(ordered)
        for stage in ordered:
            self._ensure(stage)

        if "resolve" in self._results and cfg.out:
            self._copy_artifact("resolve", cfg.out)
        if "emit" in self._results and cfg.train_out:
            self._copy_artifact("emit", cfg.train_out)
        if "evaluate" in self._results and cfg.report:
            # the report file carries exactly the metric-report keys; the
            # judgment breakdown lives in the evaluate stage artifact
            Path(cfg.report).write_text(
                _dumps(self._results["evaluate"]["metrics"]) + "\n", encoding="utf-8"
            )

        manifest = {
            "config": cfg.to_dict(),
            "inputs": {
                name: self._input_hashes.get(getattr(cfg, name))
                for name in _PATH_FIELDS
                if getattr(cfg, name) is not None
            },
            "stages": [
                {
                    "name": stage,
                    "key": self._keys[stage],
                    "cached": self._cached.get(stage, True),
                    "counters": self._counters.get(stage, {}),
                }
                for stage in ordered
            ],
        }
        (self.cache.dir / "manifest.json").write_text(
            json.dumps(manifest, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        return manifest

    def _copy_artifact(self, stage: str, destination: str) -> None:
        src = self.cache.path(stage, self._keys[stage])
        dest = Path(destination)
        if dest.parent and not dest.parent.exists():
            dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_bytes(src.read_bytes())


def run(config: PipelineConfig, stages: list[str] | None = None) -> dict:
    """Execute the requested stages; returns the run manifest."""
    return PipelineRun(config).run(stages)
