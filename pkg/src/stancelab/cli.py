"""Command-line interface.

Every command accepts ``--seed`` and ``--config``; the config file is a flat
JSON object whose keys are the long option names with dashes as underscores.
Explicit flags win over config values, which win over built-in defaults.
"""

from __future__ import annotations

import dataclasses
import json
import logging
from pathlib import Path

import click

from . import pipeline
from .corpus import (
    Corpus,
    extract_hashtags,
    ingest_corpus,
    load_labels,
    prepare_corpus,
    propagate_labels,
)
from .embeddings import DEFAULT_MAX_LEN, load_embedding_table
from .evaluation import (
    Calibration,
    calibrate_threshold,
    calibration_from_dict,
    calibration_to_dict,
    report_to_dict,
    report_to_text,
)
from .labels import CLASS_ORDER, Provenance, Stance, StanceLabel, parse_stance
from .models.io import save_model
from .network import (
    POLARIZED_STATUS,
    build_graph,
    candidate_edges,
    count_edges_by_status,
    dump_graph,
    k_core,
    label_edges,
    load_graph,
)
from .triage import build_queue, save_queue

logger = logging.getLogger(__name__)

POLARIZED = (Stance.PRO_RUSSIAN, Stance.PRO_UKRAINIAN)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise click.ClickException("config file must hold a JSON object")
    return cfg


def _resolve(cfg: dict, key: str, flag_value, default):
    """Explicit flag > config entry > default."""
    if flag_value is not None:
        return flag_value
    if key in cfg:
        return cfg[key]
    return default


def _outpath(path: str) -> str:
    """Create the parent directory of an output path when missing."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return path


def _common_options(f):
    f = click.option("--seed", type=int, default=None,
                     help="Random seed (default 0).")(f)
    f = click.option("--config", "config_path",
                     type=click.Path(exists=True, dir_okay=False),
                     default=None,
                     help="JSON file with default option values.")(f)
    return f


def _load_prepared(corpus_path: str, labels_path: str | None = None) -> Corpus:
    corpus = ingest_corpus(corpus_path)
    if not corpus.tweets and corpus.n_malformed:
        # every line was rejected: almost certainly not a raw corpus file
        # (the token-level output of `preprocess` is a report, not an input)
        raise click.ClickException(
            f"{corpus_path} contains no corpus records; pass the raw "
            "corpus JSONL (id, user_id, timestamp, text), not a "
            "processed-tweet file")
    if labels_path is not None:
        known = {t.id for t in corpus.tweets}
        merged = dict(corpus.labels)
        for tweet_id, stance in load_labels(labels_path).items():
            if tweet_id not in known:
                raise click.ClickException(
                    f"label for unknown tweet id {tweet_id!r}")
            merged[tweet_id] = StanceLabel(stance, Provenance.MANUAL)
        corpus = dataclasses.replace(corpus, labels=merged)
    return prepare_corpus(corpus)


def _hyperparams(cfg: dict, learning_rate, epochs, batch_size, l2,
                 family: str) -> dict:
    out = {}
    value = _resolve(cfg, "learning_rate", learning_rate, None)
    if value is not None:
        out["learning_rate"] = float(value)
    value = _resolve(cfg, "epochs", epochs, None)
    if value is not None:
        out["epochs"] = int(value)
    value = _resolve(cfg, "batch_size", batch_size, None)
    if value is not None:
        out["batch_size"] = int(value)
    value = _resolve(cfg, "l2", l2, None)
    if value is not None:
        out["l2"] = float(value)
    if family in ("random", "pmi") and out:
        raise click.ClickException(
            f"family {family!r} takes no gradient hyperparameters")
    return out


@click.group()
def main():
    """Stance classification and retweet-network triage toolkit."""
    logging.basicConfig(level=logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Corpus JSONL file.")
@click.option("--labels", "labels_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Optional labels TSV to attach and propagate.")
@click.option("--output", "output_path", required=True, type=click.Path(),
              help="Processed-tweet JSONL output.")
@_common_options
def preprocess(input_path, labels_path, output_path, seed, config_path):
    """Tokenize a corpus, group duplicates, and propagate labels."""
    _load_config(config_path)
    corpus = _load_prepared(input_path, labels_path)
    if labels_path is not None:
        corpus = propagate_labels(corpus)
    original_of = {}
    for group in corpus.groups.values():
        for member in group.member_ids:
            original_of[member] = group.original_id
    with open(_outpath(output_path), "w", encoding="utf-8") as fh:
        for tweet in corpus.tweets:
            pt = corpus.processed[tweet.id]
            label = corpus.labels.get(tweet.id)
            record = {
                "id": tweet.id,
                "is_retweet": pt.is_retweet,
                "original_id": original_of[tweet.id],
                "is_original": original_of[tweet.id] == tweet.id,
                "tokens": list(pt.tokens),
                "canonical_key": pt.canonical_key,
                "hashtags": sorted(extract_hashtags(tweet.raw_text)),
                "label": label.stance.value if label else None,
            }
            fh.write(json.dumps(record, sort_keys=True, ensure_ascii=False,
                                separators=(",", ":")) + "\n")
    click.echo(f"processed {len(corpus)} tweets "
               f"({len(corpus.groups)} groups) -> {output_path}")


@main.command()
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--labels", "labels_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--model", "family", required=True,
              type=click.Choice(pipeline.FAMILIES))
@click.option("--embeddings", "embeddings_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--model-out", "model_out", default=None, type=click.Path())
@click.option("--predictions-out", "predictions_out", default=None,
              type=click.Path(),
              help="Write per-tweet class probabilities (all tweets).")
@click.option("--max-len", type=int, default=None)
@click.option("--learning-rate", type=float, default=None)
@click.option("--epochs", type=int, default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--l2", type=float, default=None)
@_common_options
def train(input_path, labels_path, family, embeddings_path, model_out,
          predictions_out, max_len, learning_rate, epochs, batch_size, l2,
          seed, config_path):
    """Fit one model family on every labeled original tweet."""
    cfg = _load_config(config_path)
    seed = int(_resolve(cfg, "seed", seed, 0))
    max_len = int(_resolve(cfg, "max_len", max_len, DEFAULT_MAX_LEN))
    overrides = _hyperparams(cfg, learning_rate, epochs, batch_size, l2,
                             family)
    table = None
    if family in pipeline.EMBEDDING_FAMILIES:
        embeddings_path = _resolve(cfg, "embeddings", embeddings_path, None)
        if embeddings_path is None:
            raise click.ClickException(
                f"--embeddings is required for family {family!r}")
        table = load_embedding_table(embeddings_path)

    corpus = _load_prepared(input_path, labels_path)
    est = pipeline.train_family(corpus, family, table, seed=seed,
                                max_len=max_len, **overrides)

    if model_out is not None:
        if family == "random":
            raise click.ClickException(
                "the random baseline has no parameters to save")
        raw = est.table_ if family == "pmi" else est.model_
        save_model(raw, _outpath(model_out))
        click.echo(f"model -> {model_out}")
    if predictions_out is not None:
        if family == "pmi":
            raise click.ClickException(
                "the hashtag baseline yields no per-class probabilities")
        preds = pipeline.predict_all(corpus, family, est, table,
                                     max_len=max_len)
        pipeline.save_predictions(preds, _outpath(predictions_out))
        click.echo(f"predictions ({len(preds)} tweets) -> {predictions_out}")
    if model_out is None and predictions_out is None:
        click.echo("trained; nothing written (pass --model-out or "
                   "--predictions-out)")


@main.command()
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--labels", "labels_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--model", "family", required=True,
              type=click.Choice(pipeline.FAMILIES))
@click.option("--embeddings", "embeddings_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--report-out", "report_out", required=True, type=click.Path(),
              help="Prefix: writes <prefix>.json, <prefix>.txt and "
                   "<prefix>.curve.<class>.tsv files.")
@click.option("--n-folds", type=int, default=None)
@click.option("--target-precision", type=float, default=None)
@click.option("--max-len", type=int, default=None)
@click.option("--learning-rate", type=float, default=None)
@click.option("--epochs", type=int, default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--l2", type=float, default=None)
@_common_options
def evaluate(input_path, labels_path, family, embeddings_path, report_out,
             n_folds, target_precision, max_len, learning_rate, epochs,
             batch_size, l2, seed, config_path):
    """Run the cross-validated protocol and write the report files."""
    cfg = _load_config(config_path)
    seed = int(_resolve(cfg, "seed", seed, 0))
    n_folds = int(_resolve(cfg, "n_folds", n_folds, 10))
    target = float(_resolve(cfg, "target_precision", target_precision, 0.8))
    max_len = int(_resolve(cfg, "max_len", max_len, DEFAULT_MAX_LEN))
    overrides = _hyperparams(cfg, learning_rate, epochs, batch_size, l2,
                             family)
    table = None
    if family in pipeline.EMBEDDING_FAMILIES:
        embeddings_path = _resolve(cfg, "embeddings", embeddings_path, None)
        if embeddings_path is None:
            raise click.ClickException(
                f"--embeddings is required for family {family!r}")
        table = load_embedding_table(embeddings_path)

    corpus = _load_prepared(input_path, labels_path)
    report = pipeline.evaluate_family(corpus, family, table, n_folds=n_folds,
                                      seed=seed, target_precision=target,
                                      max_len=max_len, **overrides)

    json_path = Path(_outpath(f"{report_out}.json"))
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(report_to_dict(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
    text_path = Path(f"{report_out}.txt")
    text_path.write_text(report_to_text(report), encoding="utf-8")
    for stance in CLASS_ORDER:
        curve = report.pooled_curves.get(stance) or []
        curve_path = Path(f"{report_out}.curve.{stance.value}.tsv")
        with open(curve_path, "w", encoding="utf-8") as fh:
            for recall, precision in curve:
                fh.write(f"{recall!r}\t{precision!r}\n")
    click.echo(f"mean macro F1: {report.mean_macro_f1:.4f}")
    click.echo(f"report -> {json_path} / {text_path}")


@main.command()
@click.option("--predictions", "predictions_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--labels", "labels_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--target-precision", type=float, default=None)
@click.option("--output", "output_path", required=True, type=click.Path())
@_common_options
def calibrate(predictions_path, labels_path, target_precision, output_path,
              seed, config_path):
    """Choose per-class probability thresholds for a precision target."""
    cfg = _load_config(config_path)
    target = float(_resolve(cfg, "target_precision", target_precision, 0.8))
    preds = pipeline.load_predictions(predictions_path)
    labels = load_labels(labels_path)
    ids = sorted(set(preds) & set(labels))
    if not ids:
        raise click.ClickException(
            "no overlap between predictions and labels")

    out = {}
    for stance in POLARIZED:
        scored = [(preds[i].prob(stance), labels[i] is stance) for i in ids]
        calib = calibrate_threshold(scored, target)
        calib = dataclasses.replace(calib, stance=stance)
        out[stance.value] = calibration_to_dict(calib)
        if calib.achievable:
            click.echo(
                f"{stance.value}: threshold {calib.threshold:.6f} "
                f"P={calib.achieved_precision:.4f} "
                f"R={calib.achieved_recall:.4f}")
        else:
            click.echo(f"{stance.value}: target {target} unachievable "
                       f"(best P={calib.achieved_precision:.4f})")
    with open(_outpath(output_path), "w", encoding="utf-8") as fh:
        json.dump(out, fh, indent=2, sort_keys=True)
        fh.write("\n")
    click.echo(f"calibration -> {output_path}")


def load_calibrations(path: str | Path) -> dict[Stance, Calibration]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    out = {}
    for key, entry in data.items():
        stance = parse_stance(key)
        out[stance] = dataclasses.replace(calibration_from_dict(entry),
                                          stance=stance)
    return out


@main.group()
def graph():
    """Retweet-graph construction and labeling."""


@graph.command("build")
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--output", "output_path", required=True, type=click.Path())
@_common_options
def graph_build(input_path, output_path, seed, config_path):
    """Build the retweet graph from a corpus."""
    _load_config(config_path)
    corpus = _load_prepared(input_path)
    g = build_graph(corpus)
    dump_graph(g, _outpath(output_path))
    click.echo(f"{len(g.nodes)} nodes, {len(g.edges)} edges -> {output_path}")


@graph.command("kcore")
@click.option("--graph", "graph_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--k", type=int, required=True)
@click.option("--output", "output_path", required=True, type=click.Path())
@_common_options
def graph_kcore(graph_path, k, output_path, seed, config_path):
    """Extract the k-core of a dumped graph."""
    _load_config(config_path)
    g = k_core(load_graph(graph_path), k)
    dump_graph(g, _outpath(output_path))
    click.echo(f"k={k} core: {len(g.nodes)} nodes, {len(g.edges)} edges "
               f"-> {output_path}")


@graph.command("label")
@click.option("--graph", "graph_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--labels", "labels_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--output", "output_path", required=True, type=click.Path())
@_common_options
def graph_label(graph_path, input_path, labels_path, output_path, seed,
                config_path):
    """Label graph edges from annotated tweets (labels propagate to
    retweet duplicates first)."""
    _load_config(config_path)
    corpus = propagate_labels(_load_prepared(input_path, labels_path))
    g = label_edges(load_graph(graph_path), corpus.labels)
    dump_graph(g, _outpath(output_path))
    counts = count_edges_by_status(g)
    summary = ", ".join(f"{status.value}={count}"
                        for status, count in counts.items() if count)
    click.echo(f"edge statuses: {summary} -> {output_path}")


@graph.command("candidates")
@click.option("--graph", "graph_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Corpus JSONL (for the queued tweets' raw text).")
@click.option("--predictions", "predictions_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--calibration", "calibration_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--output", "output_path", required=True, type=click.Path(),
              help="Candidate list JSONL.")
@click.option("--queue-out", "queue_out", default=None, type=click.Path(),
              help="Triage queue JSONL for `triage serve`.")
@click.option("--stats-out", "stats_out", default=None, type=click.Path(),
              help="Per-class edge/candidate counts JSON.")
@_common_options
def graph_candidates(graph_path, input_path, predictions_path,
                     calibration_path, output_path, queue_out, stats_out,
                     seed, config_path):
    """Derive confident unlabeled-edge candidates and the review queue."""
    _load_config(config_path)
    g = load_graph(graph_path)
    preds = pipeline.load_predictions(predictions_path)
    calib = load_calibrations(calibration_path)
    candidates = candidate_edges(g, preds, calib)

    with open(_outpath(output_path), "w", encoding="utf-8") as fh:
        for cand in candidates:
            fh.write(json.dumps(
                {
                    "edge": list(cand.edge),
                    "class": cand.stance.value,
                    "support": [[tid, conf] for tid, conf in cand.support],
                    "conflicting": cand.conflicting,
                },
                sort_keys=True, separators=(",", ":"),
                ensure_ascii=False) + "\n")
    click.echo(f"{len(candidates)} candidates -> {output_path}")

    if queue_out is not None:
        corpus = ingest_corpus(input_path)
        texts = {t.id: t.raw_text for t in corpus.tweets}
        items = build_queue(candidates, texts)
        save_queue(items, _outpath(queue_out))
        click.echo(f"{len(items)} queue items -> {queue_out}")

    if stats_out is not None:
        status_counts = count_edges_by_status(g)
        per_class = {}
        for stance in POLARIZED:
            per_class[stance.value] = {
                "labeled_edges": status_counts[POLARIZED_STATUS[stance]],
                "candidate_edges": sum(1 for c in candidates
                                       if c.stance is stance),
            }
        with open(_outpath(stats_out), "w", encoding="utf-8") as fh:
            json.dump(per_class, fh, indent=2, sort_keys=True)
            fh.write("\n")
        click.echo(f"stats -> {stats_out}")


@main.group()
def triage():
    """Human-review tooling for confident predictions."""


@triage.command("serve")
@click.option("--queue", "queue_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--log", "log_path", required=True, type=click.Path())
@click.option("--port", type=int, default=None)
@click.option("--host", default=None)
@_common_options
def triage_serve(queue_path, log_path, port, host, seed, config_path):
    """Serve the triage HTTP API over a queue file."""
    import uvicorn

    from .service import TriageService, create_app

    cfg = _load_config(config_path)
    port = int(_resolve(cfg, "port", port, 8400))
    host = str(_resolve(cfg, "host", host, "127.0.0.1"))
    service = TriageService.recover(queue_path, _outpath(log_path))
    app = create_app(service)
    pending = len(service.pending())
    click.echo(f"serving {pending} pending items on {host}:{port} "
               f"(log: {log_path})")
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
