"""Operator CLI: every pipeline stage as a batch command.

Exit codes: 0 success, 1 validation error (bad flags or inputs that fail
preconditions), 2 runtime failure. All outputs go to files; nothing is
overwritten without --force.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import click

from ._util import format_fraction, read_ndjson, stable_json, write_ndjson
from .corpus import MicroLabel, SentenceRecord, load_corpus
from .errors import (
    BadFractions,
    EmptyCorpus,
    EmptyInput,
    LoriError,
    MissingFile,
    SchemaViolation,
    SizeExceedsDataset,
)

VALIDATION_ERRORS = (
    MissingFile,
    SchemaViolation,
    BadFractions,
    EmptyCorpus,
    EmptyInput,
    SizeExceedsDataset,
)


@dataclass
class CliConfig:
    store: str | None
    models: str | None
    prompts: str | None
    seed: int
    paper_config: dict | None
    force: bool


def load_reference_config() -> dict:
    raw = resources.files("lori.data").joinpath("reference_config.json").read_text("utf-8")
    return json.loads(raw)


def _guard_output(path: Path, force: bool) -> None:
    if path.exists() and not force:
        raise click.UsageError(f"refusing to overwrite {path} (use --force)")


def _read_sentence_records(path: Path) -> list[SentenceRecord]:
    records = []
    for _, rec in read_ndjson(path):
        records.append(
            SentenceRecord(
                sentence_id=rec["sentence_id"],
                letter_id=rec["letter_id"],
                text=rec["text"],
                start=rec["start"],
                end=rec["end"],
                char_length=rec["char_length"],
                token_count=rec["token_count"],
            )
        )
    return records


@click.group()
@click.option("--store", envvar="LORI_STORE", default=None, help="Service/report store directory.")
@click.option("--models", default=None, help="Classifier artifact directory.")
@click.option("--prompts", default=None, help="Prompt template directory override.")
@click.option("--seed", default=0, show_default=True, help="Seed for anything randomized.")
@click.option("--paper-config", is_flag=True,
              help="Apply the published reference configuration (labeling thresholds 0.7, "
                   "learning-curve sizes 5k/25k/50k/100k).")
@click.option("--force", is_flag=True, help="Allow overwriting existing output files.")
@click.pass_context
def cli(ctx, store, models, prompts, seed, paper_config, force):
    """Leadership-evidence analysis for recommendation letters."""
    ctx.obj = CliConfig(
        store=store,
        models=models,
        prompts=prompts,
        seed=seed,
        paper_config=load_reference_config() if paper_config else None,
        force=force,
    )


@cli.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--output", "output_path", required=True, type=click.Path())
@click.option("--letter-id", default=None, help="Letter id for the records (default: file stem).")
@click.option("--iqr/--no-iqr", default=True, show_default=True,
              help="Keep only sentences within the [Q1, Q3] character-length range.")
@click.option("--repair/--no-repair", default=True, show_default=True,
              help="Also emit repaired_text with conjoined words split apart.")
@click.pass_obj
def prep(cfg: CliConfig, input_path, output_path, letter_id, iqr, repair):
    """Segment a raw letter file into sentence records."""
    from .textprep import iqr_filter, load_splitter_config, repair_text, segment_sentences

    output = Path(output_path)
    _guard_output(output, cfg.force)
    raw = Path(input_path).read_text(encoding="utf-8")
    letter_id = letter_id or Path(input_path).stem
    sentences = segment_sentences(raw, letter_id=letter_id)
    bounds = None
    if iqr and sentences:
        sentences, bounds = iqr_filter(sentences)
    rows = []
    splitter = None
    if repair:
        min_len = (cfg.paper_config or {}).get("min_token_length", 6)
        splitter = load_splitter_config(min_token_length=min_len)
    for s in sentences:
        row = {
            "sentence_id": s.sentence_id,
            "letter_id": s.letter_id,
            "text": s.text,
            "start": s.start,
            "end": s.end,
            "char_length": s.char_length,
            "token_count": s.token_count,
        }
        if splitter is not None:
            row["repaired_text"] = repair_text(s.text, splitter)
        rows.append(row)
    count = write_ndjson(output, rows)
    click.echo(f"wrote {count} sentences to {output}")
    if bounds is not None:
        click.echo(f"iqr bounds: q1={bounds.q1} q3={bounds.q3}")


@cli.command()
@click.option("--sentences", "sentences_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--output", "output_path", required=True, type=click.Path())
@click.option("--registry", "registry_path", default=None, type=click.Path(exists=True))
@click.option("--normalize", is_flag=True, help="Fit stats on this matrix and write z-scores.")
@click.option("--stats-out", default=None, type=click.Path())
@click.pass_obj
def features(cfg: CliConfig, sentences_path, output_path, registry_path, normalize, stats_out):
    """Extract the 119 numeric features for each sentence record."""
    from .lingfeat import (
        apply_normalizer,
        extract_features,
        fit_normalizer,
        load_registry,
        save_stats,
    )
    from .tagging import RuleTagger

    output = Path(output_path)
    _guard_output(output, cfg.force)
    registry = load_registry(registry_path)
    tagger = RuleTagger()
    records = _read_sentence_records(Path(sentences_path))
    vectors = [extract_features(s, tagger, registry) for s in records]
    if normalize and vectors:
        stats = fit_normalizer(vectors)
        vectors = [apply_normalizer(v, stats) for v in vectors]
        if stats_out:
            stats_path = Path(stats_out)
            _guard_output(stats_path, cfg.force)
            save_stats(stats, stats_path)
            click.echo(f"wrote stats to {stats_path}")
    count = write_ndjson(
        output,
        (
            {"sentence_id": s.sentence_id, "registry_version": v.registry_version,
             "values": list(v.values)}
            for s, v in zip(records, vectors)
        ),
    )
    click.echo(f"wrote {count} feature vectors to {output}")


@cli.command()
@click.option("--corpus", "corpus_dir", required=True, type=click.Path(exists=True, file_okay=False),
              help="Unlabeled corpus directory to weak-label.")
@click.option("--labeled", "labeled_dir", default=None, type=click.Path(exists=True, file_okay=False),
              help="Human-labeled corpus: seeds the trainable LFs and excludes its applicants.")
@click.option("--output", "output_path", required=True, type=click.Path())
@click.option("--report", "report_path", required=True, type=click.Path())
@click.option("--lf", "lf_specs", multiple=True,
              help="Labeling function: fewshot | forest | model:DIR | scripted:ID:FILE. "
                   "Default: fewshot + forest (needs --labeled).")
@click.option("--threshold", "thresholds", multiple=True,
              help="Per-LF confidence gate, e.g. fewshot-embed=0.7. 'none' disables.")
@click.pass_obj
def weaklabel(cfg: CliConfig, corpus_dir, labeled_dir, output_path, report_path, lf_specs, thresholds):
    """Vote with labeling functions and aggregate into a weak dataset."""
    from .classify import TrainExample, load_classifier
    from .lingfeat import load_registry
    from .tagging import RuleTagger
    from .weaksup import (
        EmbeddingFewShotLF,
        ForestLF,
        ScriptedLF,
        SentenceModelLF,
        ThresholdPolicy,
        build_weak_dataset,
        save_weak_dataset,
    )

    output = Path(output_path)
    report_file = Path(report_path)
    _guard_output(output, cfg.force)
    _guard_output(report_file, cfg.force)

    unlabeled = load_corpus(corpus_dir)
    labeled = load_corpus(labeled_dir) if labeled_dir else None
    excluded = labeled.applicant_ids() if labeled else set()

    seed_examples = []
    seed_sentences, seed_labels = [], []
    if labeled:
        first_label = {}
        for lb in labeled.labels:
            first_label.setdefault(lb.sentence_id, lb.label)
        for sid, label in first_label.items():
            sentence = labeled.sentences[sid]
            seed_examples.append(TrainExample(text=sentence.text, label=label))
            seed_sentences.append(sentence)
            seed_labels.append(label)

    lfs = []
    for spec in lf_specs or ("fewshot", "forest"):
        if spec == "fewshot":
            if not seed_examples:
                raise click.UsageError("--lf fewshot needs --labeled seed data")
            lfs.append(EmbeddingFewShotLF.fit(seed_examples))
        elif spec == "forest":
            if not seed_sentences:
                raise click.UsageError("--lf forest needs --labeled seed data")
            lfs.append(
                ForestLF.fit(seed_sentences, seed_labels, RuleTagger(), load_registry(),
                             seed=cfg.seed)
            )
        elif spec.startswith("model:"):
            lfs.append(SentenceModelLF(load_classifier(spec.split(":", 1)[1])))
        elif spec.startswith("scripted:"):
            _, lf_id, path = spec.split(":", 2)
            lfs.append(ScriptedLF.from_file(lf_id, path))
        else:
            raise click.UsageError(f"unknown labeling function spec {spec!r}")

    policy_map: dict[str, float | None] = {lf.lf_id: None for lf in lfs}
    if cfg.paper_config:
        for lf_id, value in cfg.paper_config["thresholds"].items():
            if lf_id in policy_map:
                policy_map[lf_id] = value
    for item in thresholds:
        lf_id, _, value = item.partition("=")
        if lf_id not in policy_map:
            raise click.UsageError(f"--threshold names unknown LF {lf_id!r}")
        policy_map[lf_id] = None if value.lower() == "none" else float(value)

    records, coverage = build_weak_dataset(
        unlabeled, lfs, ThresholdPolicy(policy_map), excluded
    )
    count = save_weak_dataset(records, unlabeled, output)
    report_file.parent.mkdir(parents=True, exist_ok=True)
    report_file.write_text(stable_json(coverage.as_dict()) + "\n", encoding="utf-8")
    click.echo(f"wrote {count} weak labels to {output}")
    click.echo(f"coverage report: {report_file}")


@cli.command()
@click.option("--train", "train_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Training rows: ndjson with text and label fields.")
@click.option("--backend", default="lightweight", show_default=True,
              type=click.Choice(["lightweight", "transformer"]))
@click.option("--output", "output_dir", required=True, type=click.Path())
@click.option("--max-rows", default=None, type=int)
@click.option("--curve-sizes", default=None,
              help="Comma-separated sizes; runs the learning curve instead of one fit.")
@click.option("--eval", "eval_path", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Evaluation rows for the learning curve.")
@click.pass_obj
def train(cfg: CliConfig, train_path, backend, output_dir, max_rows, curve_sizes, eval_path):
    """Train the sentence classifier (or run a learning curve)."""
    from .classify import TrainConfig, learning_curve, save_classifier, train_classifier
    from .weaksup import load_weak_examples

    examples = load_weak_examples(train_path)
    threshold = (cfg.paper_config or {}).get("decision_threshold", 0.5)
    config = TrainConfig(
        backend=backend, seed=cfg.seed, decision_threshold=threshold, max_train_rows=max_rows
    )

    if curve_sizes:
        if not eval_path:
            raise click.UsageError("--curve-sizes needs --eval")
        if cfg.paper_config and curve_sizes == "paper":
            sizes = cfg.paper_config["learning_curve_sizes"]
        else:
            sizes = [int(s) for s in curve_sizes.split(",")]
        rows = learning_curve(examples, sizes, load_weak_examples(eval_path), config)
        out = Path(output_dir)
        _guard_output(out, cfg.force)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(stable_json(rows) + "\n", encoding="utf-8")
        click.echo(f"{'size':>8}  {'weighted_f1':>12}  {'precision':>10}  {'recall':>8}")
        for row in rows:
            click.echo(
                f"{row['size']:>8}  {row['weighted_f1']:>12.4f}  "
                f"{row['weighted_precision']:>10.4f}  {row['weighted_recall']:>8.4f}"
            )
        return

    handle = train_classifier(examples, config)
    save_classifier(handle, output_dir)
    click.echo(f"saved {backend} classifier to {output_dir}")


@cli.command("eval")
@click.option("--truth", "truth_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--pred", "pred_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--kappa", is_flag=True, help="Also report two-rater agreement.")
@click.pass_obj
def eval_cmd(cfg: CliConfig, truth_path, pred_path, kappa):
    """Score prediction records against truth records."""
    from .evalmetrics import cohen_kappa, pr_curve, weighted_metrics

    truth = {rec["sentence_id"]: rec for _, rec in read_ndjson(truth_path)}
    preds = {rec["sentence_id"]: rec for _, rec in read_ndjson(pred_path)}
    missing = sorted(set(truth) - set(preds))
    if missing:
        raise MissingFile(f"predictions missing for {len(missing)} sentences, e.g. {missing[:3]}")
    ids = sorted(truth)
    y_true = [int(truth[i]["label"]) for i in ids]
    y_pred = [int(preds[i]["label"]) for i in ids]
    report = weighted_metrics(y_true=y_true, y_pred=y_pred)
    click.echo(f"n {len(ids)}")
    click.echo(f"accuracy {report.accuracy:.4f}")
    click.echo(f"weighted_f1 {report.weighted_f1:.4f}")
    click.echo(f"weighted_precision {report.weighted_precision:.4f}")
    click.echo(f"weighted_recall {report.weighted_recall:.4f}")
    for cls in (0, 1):
        stats = report.per_class[cls]
        click.echo(
            f"class_{cls} precision {stats['precision']:.4f} "
            f"recall {stats['recall']:.4f} f1 {stats['f1']:.4f}"
        )
    if all("confidence" in preds[i] for i in ids):
        curve = pr_curve(y_true, [float(preds[i]["confidence"]) for i in ids])
        click.echo(f"average_precision {curve.average_precision:.4f}")
    if kappa:
        result = cohen_kappa(y_true, y_pred)
        click.echo(f"kappa {result.kappa:.4f}")


@cli.command("extract")
@click.option("--sentences", "sentences_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--output", "output_path", required=True, type=click.Path())
@click.option("--micro", default="all",
              type=click.Choice(["all", "teamwork", "communication", "innovation"]))
@click.option("--engine", default="lexicon", type=click.Choice(["lexicon"]),
              show_default=True, help="Phrase engine; generative engines plug in via the API.")
@click.option("--trace-dir", default=None, type=click.Path())
@click.pass_obj
def extract_cmd(cfg: CliConfig, sentences_path, output_path, micro, engine, trace_dir):
    """Extract verified micro-label phrases for each sentence record."""
    from .extract import lexicon_extraction, save_trace

    output = Path(output_path)
    _guard_output(output, cfg.force)
    records = _read_sentence_records(Path(sentences_path))
    micros = MicroLabel.ordered() if micro == "all" else (MicroLabel(micro),)
    rows = []
    for sentence in records:
        for m in micros:
            result = lexicon_extraction(sentence, m)
            rows.append(
                {
                    "sentence_id": result.sentence_id,
                    "micro_label": result.micro_label.value,
                    "phrases": list(result.phrases),
                    "verified": result.verified,
                }
            )
            if trace_dir:
                trace_path = Path(trace_dir) / f"{sentence.sentence_id}.{m.value}.trace"
                save_trace(result, trace_path)
    count = write_ndjson(output, rows)
    click.echo(f"wrote {count} extraction results to {output}")


@cli.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--applicant-id", required=True)
@click.option("--output", "output_path", required=True, type=click.Path())
@click.option("--boundary", default="page_breaks", show_default=True)
@click.option("--extractor", "extractor_kind", default="fixture", show_default=True,
              type=click.Choice(["fixture", "text_layer"]))
@click.pass_obj
def analyze(cfg: CliConfig, input_path, applicant_id, output_path, boundary, extractor_kind):
    """Build a full applicant report from one document."""
    from .pipeline import (
        BoundarySpec,
        FixtureExtractor,
        TextLayerExtractor,
        build_report,
        content_digest,
        ingest_document,
        report_to_json,
    )
    from .service import default_runtime

    output = Path(output_path)
    _guard_output(output, cfg.force)
    data = Path(input_path).read_bytes()
    extractor = FixtureExtractor() if extractor_kind == "fixture" else TextLayerExtractor()
    classifier = None
    if cfg.models:
        from .classify import load_classifier

        classifier = load_classifier(cfg.models)
    runtime = default_runtime(classifier=classifier, extractor=extractor,
                              prompts_dir=cfg.prompts)
    corpus = ingest_document(data, applicant_id, runtime.extractor, BoundarySpec.parse(boundary))
    report = build_report(
        applicant_id,
        corpus,
        runtime.classifier,
        runtime.extract_fn,
        runtime.summarize_fn,
        runtime.pipeline_version,
        content_digest(data),
    )
    body = report_to_json(report, corpus)
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text(body, encoding="utf-8")
    click.echo(f"wrote report for {applicant_id} to {output}")
    for analysis in report.letters:
        click.echo(
            f"  {analysis.letter_id}: {len(analysis.highlights)}/{analysis.total_sentences} "
            f"highlighted ({format_fraction(analysis.proportion)})"
        )


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--extractor", "extractor_kind", default="fixture", show_default=True,
              type=click.Choice(["fixture", "text_layer"]))
@click.option("--ui", "ui_dir", default=None, type=click.Path(exists=True, file_okay=False),
              help="Serve built dashboard assets at /ui.")
@click.pass_obj
def serve(cfg: CliConfig, host, port, extractor_kind, ui_dir):
    """Start the HTTP service over a store directory."""
    import uvicorn

    from .pipeline import FixtureExtractor, TextLayerExtractor
    from .service import create_app, default_runtime

    if not cfg.store:
        raise click.UsageError("serve needs --store or LORI_STORE")
    classifier = None
    if cfg.models:
        from .classify import load_classifier

        classifier = load_classifier(cfg.models)
    extractor = FixtureExtractor() if extractor_kind == "fixture" else TextLayerExtractor()
    runtime = default_runtime(classifier=classifier, extractor=extractor,
                              prompts_dir=cfg.prompts)
    uvicorn.run(create_app(cfg.store, runtime, ui_dir=ui_dir), host=host, port=port)


def main() -> None:
    try:
        cli(standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except (click.UsageError, click.BadParameter) as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        sys.exit(1)
    except click.Abort:
        sys.exit(1)
    except VALIDATION_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except LoriError as exc:
        click.echo(f"failure: {exc}", err=True)
        sys.exit(2)
    except Exception as exc:  # pragma: no cover - last resort
        click.echo(f"internal error: {exc}", err=True)
        sys.exit(2)
    sys.exit(0)


if __name__ == "__main__":
    main()
