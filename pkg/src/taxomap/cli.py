"""Command-line interface: align, stage, evaluate, emit-dataset, parse."""

from __future__ import annotations

import json
import sys

import click

from .errors import ConfigError, LoadError, TaxomapError
from .evaluation import evaluate as evaluate_metrics
from .evaluation import load_benchmark, parse_mapping_record
from .ontology import TARGET_ONTOLOGY, break_cycles, load_taxonomy
from .phrases import annotate, AnnotationProvider, extract_root_phrases, normalize_label
from .pipeline import (
    STAGES,
    PipelineConfig,
    judgment_counts,
    report as build_report,
    run as run_pipeline,
)

_INPUT_ERRORS = (ConfigError, LoadError, FileNotFoundError, ValueError)


def _guard(body):
    try:
        body()
    except _INPUT_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except TaxomapError as exc:
        click.echo(f"stage failure: {exc}", err=True)
        sys.exit(2)


def _pipeline_options(fn):
    options = [
        click.option("--config", "config_path", type=click.Path(exists=True), help="JSON config file; flags override it."),
        click.option("--dbpedia-edges", type=click.Path()),
        click.option("--dbpedia-labels", type=click.Path()),
        click.option("--cg-edges", type=click.Path()),
        click.option("--cg-labels", type=click.Path()),
        click.option("--members", type=click.Path()),
        click.option("--embeddings", type=click.Path()),
        click.option("--embed-url"),
        click.option("--ner", type=click.Path()),
        click.option("--lexnames", type=click.Path()),
        click.option("--annotations", type=click.Path()),
        click.option("--verbalizers", type=click.Path()),
        click.option("--benchmark", type=click.Path()),
        click.option("--tau-exact", type=float),
        click.option("--tau-sim", type=float),
        click.option("--epsilon-tie", type=float),
        click.option("--threads", "worker_count", type=int),
        click.option("--cache-dir", type=click.Path()),
        click.option("--out", type=click.Path()),
        click.option("--report", "report_path", type=click.Path()),
        click.option("--train-out", type=click.Path()),
        click.option("--min-confidence", type=float),
        click.option("--mode", type=click.Choice(["strict", "lenient"])),
        click.option("--target-root"),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _build_config(kwargs) -> PipelineConfig:
    config_path = kwargs.pop("config_path", None)
    kwargs["report"] = kwargs.pop("report_path", None)
    overrides = {k: v for k, v in kwargs.items() if v is not None}
    if config_path:
        config = PipelineConfig.from_file(config_path, overrides)
    else:
        config = PipelineConfig(**overrides)
    config.validate()
    return config


@click.group()
def main():
    """Map a large source taxonomy onto a curated target ontology."""


@main.command()
@_pipeline_options
def align(**kwargs):
    """Run the full pipeline (evaluate/emit when their inputs are configured)."""
    def body():
        config = _build_config(kwargs)
        manifest = run_pipeline(config)
        for entry in manifest["stages"]:
            status = "cached" if entry["cached"] else "computed"
            click.echo(f"{entry['name']}: {status} {json.dumps(entry['counters'], sort_keys=True)}")
    _guard(body)


@main.command()
@click.argument("name", type=click.Choice(STAGES))
@_pipeline_options
def stage(name, **kwargs):
    """Run one stage; its dependencies must already be cached."""
    def body():
        config = _build_config(kwargs)
        manifest = run_pipeline(config, [name])
        entry = next(e for e in manifest["stages"] if e["name"] == name)
        click.echo(json.dumps(entry, sort_keys=True))
    _guard(body)


@main.command("emit-dataset")
@_pipeline_options
def emit_dataset(**kwargs):
    """Emit the distant-supervision training pairs from cached stages."""
    def body():
        config = _build_config(kwargs)
        manifest = run_pipeline(config, ["emit"])
        entry = next(e for e in manifest["stages"] if e["name"] == "emit")
        click.echo(json.dumps(entry["counters"], sort_keys=True))
    _guard(body)


def _load_predictions(path) -> dict[str, str | None]:
    predictions: dict[str, str | None] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                mapping = parse_mapping_record(line)
                predictions[mapping.source_class] = mapping.target_class
    return predictions


@main.command("evaluate")
@click.option("--pred", required=True, type=click.Path(exists=True), help="mappings stream to score")
@click.option("--gold", required=True, type=click.Path(exists=True), help="benchmark file")
@click.option("--baseline", type=click.Path(exists=True), help="second mappings stream for side-by-side")
@click.option("--dbpedia-edges", required=True, type=click.Path(exists=True))
@click.option("--dbpedia-labels", required=True, type=click.Path(exists=True))
@click.option("--report", "report_path", type=click.Path(), help="write the structured report here")
def evaluate_cmd(pred, gold, baseline, dbpedia_edges, dbpedia_labels, report_path):
    """Score a predictions file against a gold benchmark."""
    def body():
        target = load_taxonomy(dbpedia_edges, dbpedia_labels, None, mode="lenient", source=TARGET_ONTOLOGY)
        target, _ = break_cycles(target)
        benchmark = load_benchmark(gold)
        predictions = _load_predictions(pred)
        metrics = evaluate_metrics(predictions, benchmark)
        judgments = judgment_counts(predictions, benchmark, target)
        baseline_row = None
        if baseline:
            base_preds = _load_predictions(baseline)
            baseline_row = (
                evaluate_metrics(base_preds, benchmark),
                judgment_counts(base_preds, benchmark, target),
            )
        text, structured = build_report(metrics, judgments, baseline_row)
        click.echo(text, nl=False)
        if report_path:
            with open(report_path, "w", encoding="utf-8") as fh:
                json.dump(structured, fh, ensure_ascii=False, indent=2, sort_keys=True)
                fh.write("\n")
    _guard(body)


@main.command("parse")
@click.option("--name", required=True, help="class name to analyze")
@click.option("--annotations", type=click.Path(exists=True), help="optional annotation provider file")
def parse_cmd(name, annotations):
    """Print the root phrase set of one class name (debugging aid)."""
    def body():
        provider = AnnotationProvider.load(annotations) if annotations else None
        label = normalize_label(name)
        rps = extract_root_phrases(annotate(label, provider))
        click.echo(f"root_word: {rps.root_word}")
        click.echo("phrases:")
        for phrase in rps.phrases:
            click.echo(f"  {phrase}")
    _guard(body)


if __name__ == "__main__":
    main()
