"""Command-line entry point.

Subcommands mirror the pipeline: synth -> ingest -> extract -> train ->
predict/evaluate/importance, plus label-serve for the annotation UI.
Exit codes: 0 ok, 1 usage error, 2 data/format error, 3 internal error.
All batch subcommands are deterministic: rerunning with the same flags
and inputs produces byte-identical output files.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import dataset as ds
from . import evaluation as ev
from .errors import BothoundError, DataFormatError, InvariantError
from .events import (
    TimeWindow,
    build_corpus,
    load_corpus,
    load_profiles,
    open_archive,
    parse_archive,
    ParseResult,
    save_corpus,
)
from .features import (
    DEFAULT_LEXICON,
    FEATURE_NAMES,
    FeatureRow,
    SubstringLexicon,
    extract as extract_features,
    read_features_csv,
    write_features_csv,
)
from .models.bagging import BASE_KINDS, DEFAULT_MEMBERS, BaggingEnsemble, fit_bagging
from .models.io import load_model, save_model
from .models.search import DEFAULT_GRIDS, derive_seed, grid_search_cv
from .synth import GeneratorConfig, generate_corpus, load_behavior_spec, write_corpus

log = logging.getLogger("bothound")

_FINAL_FIT_STAGE = 404
_SAMPLE_STAGE = 505


def _echo_config(command: str, seed: int | None, **params) -> None:
    """One reproducibility line per run: the resolved flags and seed."""
    resolved = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(params.items())}
    resolved["seed"] = seed
    click.echo(f"[{command}] config: {json.dumps(resolved, sort_keys=True, default=str)}")


@click.group()
@click.option("--threads", type=int, default=lambda: os.cpu_count() or 1,
              help="Worker processes for grid search / CV.")
@click.option("--log-level", default="warning",
              type=click.Choice(["debug", "info", "warning", "error"]))
@click.pass_context
def cli(ctx: click.Context, threads: int, log_level: str) -> None:
    logging.basicConfig(level=log_level.upper(), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    ctx.obj = {"threads": max(1, threads)}


@cli.command()
@click.option("--out-dir", required=True, type=click.Path(path_type=Path))
@click.option("--humans", default=1000, show_default=True)
@click.option("--bots-per-archetype", default=20, show_default=True)
@click.option("--start", default="2024-01-01T00:00:00Z", show_default=True)
@click.option("--days", default=90, show_default=True)
@click.option("--seed", default=42, show_default=True)
@click.option("--behavior-spec", type=click.Path(exists=True, path_type=Path),
              help="JSON overrides for the archetype behavior profiles.")
def synth(out_dir: Path, humans: int, bots_per_archetype: int, start: str,
          days: int, seed: int, behavior_spec: Path | None) -> None:
    """Generate a synthetic ground-truth corpus (events, profiles, labels)."""
    from .events import parse_timestamp

    start_ts = parse_timestamp(start)
    window = TimeWindow(start_ts, start_ts + days * 86400)
    profiles = load_behavior_spec(behavior_spec) if behavior_spec else None
    config = GeneratorConfig(
        n_humans=humans,
        n_bots_per_archetype=bots_per_archetype,
        window=window,
        seed=seed,
        **({"profiles": profiles} if profiles else {}),
    )
    _echo_config("synth", seed, out_dir=out_dir, humans=humans,
                 bots_per_archetype=bots_per_archetype, start=start, days=days)
    corpus = generate_corpus(config)
    paths = write_corpus(corpus, out_dir)
    click.echo(
        f"wrote {len(corpus.lines)} events, {len(corpus.profiles)} profiles, "
        f"{len(corpus.labels)} labels under {out_dir}"
    )
    for name, path in paths.items():
        log.info("%s -> %s", name, path)


@cli.command()
@click.argument("archives", nargs=-1, required=True,
                type=click.Path(exists=True, path_type=Path))
@click.option("--profiles", "profiles_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--window", "window_spec", required=True,
              help="UTC interval as START,END (ISO-8601, half-open).")
@click.option("--min-events", default=10, show_default=True,
              help="Keep accounts with strictly more events than this.")
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@click.option("--sample-accounts", type=float, default=None,
              help="Randomly keep this fraction of retained accounts.")
@click.option("--seed", default=42, show_default=True,
              help="Seed for --sample-accounts.")
def ingest(archives: tuple[Path, ...], profiles_path: Path, window_spec: str,
           min_events: int, out_path: Path, sample_accounts: float | None,
           seed: int) -> None:
    """Parse archives into an indexed timeline corpus."""
    try:
        start, end = window_spec.split(",", 1)
    except ValueError:
        raise click.UsageError("--window must be START,END")
    window = TimeWindow.from_iso(start.strip(), end.strip())
    _echo_config("ingest", seed, archives=[str(a) for a in archives],
                 profiles=profiles_path, window=window_spec,
                 min_events=min_events, out=out_path, sample_accounts=sample_accounts)
    profiles = load_profiles(profiles_path)
    events = []
    skipped = 0
    seq_base = 0
    for archive in archives:
        with open_archive(archive) as fh:
            result = parse_archive(fh, window)
        for event in result.events:
            events.append(
                event if seq_base == 0
                else dataclasses.replace(event, seq=event.seq + seq_base)
            )
        seq_base += len(result.events) + result.skipped
        skipped += result.skipped
    corpus = build_corpus(ParseResult(events=events, skipped=skipped), profiles,
                          window, min_events=min_events)
    if sample_accounts is not None:
        if not (0.0 < sample_accounts <= 1.0):
            raise click.UsageError("--sample-accounts must be in (0, 1]")
        logins = sorted(corpus.timelines)
        rng = np.random.default_rng(derive_seed(seed, _SAMPLE_STAGE))
        keep = set(
            rng.choice(logins, size=int(round(len(logins) * sample_accounts)), replace=False)
        )
        corpus.timelines = {l: tl for l, tl in corpus.timelines.items() if l in keep}
    save_corpus(corpus, out_path)
    click.echo(
        f"parsed {len(corpus.events)} in-window events ({skipped} malformed lines skipped); "
        f"{len(corpus.timelines)} accounts retained (> {min_events} events)"
    )


@cli.command()
@click.option("--timelines", "timelines_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@click.option("--lexicon", "lexicon_terms", default=None,
              help="Comma-separated lowercase terms overriding the default lexicon.")
@click.option("--labels", "labels_path", type=click.Path(exists=True, path_type=Path),
              help="Ground-truth labels CSV to merge into the output.")
def extract(timelines_path: Path, out_path: Path, lexicon_terms: str | None,
            labels_path: Path | None) -> None:
    """Compute the 17-feature vector for every retained account."""
    _echo_config("extract", None, timelines=timelines_path, out=out_path,
                 lexicon=lexicon_terms, labels=labels_path)
    lexicon = DEFAULT_LEXICON
    if lexicon_terms:
        lexicon = SubstringLexicon(tuple(t.strip() for t in lexicon_terms.split(",") if t.strip()))
    corpus = load_corpus(timelines_path)
    threads = corpus.threads
    rows = []
    for login in sorted(corpus.timelines):
        vector = extract_features(
            corpus.timelines[login], corpus.profiles[login], threads, lexicon
        )
        rows.append(FeatureRow(login=login, features=vector))
    if labels_path is not None:
        labeled = ds.apply_labels(rows, ds.read_labels_csv(labels_path))
        log.info("labels matched %d of %d rows", labeled, len(rows))
    write_features_csv(rows, out_path)
    click.echo(f"extracted features for {len(rows)} accounts -> {out_path}")


@cli.command("label-serve")
@click.option("--features", "features_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--labels", "labels_path", required=True, type=click.Path(path_type=Path))
@click.option("--port", default=8787, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--timelines", "timelines_path", type=click.Path(exists=True, path_type=Path),
              help="Ingest output; enables the event/comment evidence panels.")
@click.option("--ui-dir", type=click.Path(path_type=Path), default=None,
              help="Built label-ui bundle to serve at / (default: ./frontend/dist if present).")
def label_serve(features_path: Path, labels_path: Path, port: int, host: str,
                timelines_path: Path | None, ui_dir: Path | None) -> None:
    """Serve the annotation HTTP API and the labeling UI."""
    import uvicorn

    from .service import build_state, create_app

    _echo_config("label-serve", None, features=features_path, labels=labels_path,
                 port=port, host=host, timelines=timelines_path, ui_dir=ui_dir)
    if ui_dir is None:
        candidate = Path("frontend/dist")
        ui_dir = candidate if candidate.is_dir() else None
    state = build_state(features_path, labels_path, timelines_path)
    app = create_app(state, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


def _require_labeled(rows: list[FeatureRow]) -> ds.LabeledDataset:
    data = ds.LabeledDataset(rows=rows).labeled_only()
    humans, bots = data.class_counts()
    if humans == 0 or bots == 0:
        raise DataFormatError(
            f"need both classes to train/evaluate (got {humans} humans, {bots} bots)"
        )
    return data


@cli.command()
@click.option("--features", "features_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--model", "model_path", required=True, type=click.Path(path_type=Path))
@click.option("--base", "base_kind", default="forest", show_default=True,
              type=click.Choice(sorted(BASE_KINDS)))
@click.option("--grid", "grid_path", type=click.Path(exists=True, path_type=Path),
              help="JSON file mapping parameter name -> list of values.")
@click.option("--folds", default=5, show_default=True)
@click.option("--repeats", default=5, show_default=True)
@click.option("--seed", default=42, show_default=True)
@click.option("--members", default=DEFAULT_MEMBERS, show_default=True,
              help="Bagging ensemble size m.")
@click.option("--threshold", default=0.5, show_default=True)
@click.option("--report", "report_path", type=click.Path(path_type=Path),
              help="Per-combination CV metrics CSV (default: <model>.cv.csv).")
@click.option("--holdout", type=float, default=None,
              help="Optional held-out fraction evaluated once after training.")
@click.pass_context
def train(ctx: click.Context, features_path: Path, model_path: Path, base_kind: str,
          grid_path: Path | None, folds: int, repeats: int, seed: int, members: int,
          threshold: float, report_path: Path | None, holdout: float | None) -> None:
    """Grid-search with repeated stratified CV, then fit the final ensemble."""
    _echo_config("train", seed, features=features_path, model=model_path,
                 base=base_kind, grid=grid_path, folds=folds, repeats=repeats,
                 members=members, threshold=threshold, holdout=holdout)
    data = _require_labeled(read_features_csv(features_path))
    holdout_data = None
    if holdout is not None:
        data, holdout_data = ds.stratified_split(data, holdout, derive_seed(seed, 1))
        data = _require_labeled(data.rows)
    if grid_path is not None:
        with open(grid_path, encoding="utf-8") as fh:
            grid = json.load(fh)
        if not isinstance(grid, dict) or not grid:
            raise DataFormatError("--grid must be a non-empty JSON object")
    else:
        grid = DEFAULT_GRIDS[base_kind]
    X, y = data.matrix(), data.labels()
    result = grid_search_cv(
        X, y, base_kind, grid, folds=folds, repeats=repeats, seed=seed,
        m=members, threshold=threshold, n_jobs=ctx.obj["threads"],
    )
    best = result.best_row
    click.echo(
        f"best {base_kind} params {json.dumps(result.best_params, sort_keys=True)} "
        f"with mean AUC {best['mean_auc']:.4f}, mean F1 {best['mean_f1']:.4f} "
        f"over {folds}x{repeats} folds"
    )
    if report_path is None:
        report_path = Path(str(model_path) + ".cv.csv")
    _write_cv_report(report_path, base_kind, result.table)
    click.echo(f"CV report -> {report_path}")

    Xt, preprocessor = ds.impute_and_transform(data)
    keep = ds.undersample_indices(y, derive_seed(seed, _FINAL_FIT_STAGE))
    model = fit_bagging(
        Xt[keep], y[keep], base_kind, result.best_params, m=members,
        seed=derive_seed(seed, _FINAL_FIT_STAGE, 1), threshold=threshold,
        preprocessing=preprocessor.to_dict(),
    )
    save_model(model, model_path)
    click.echo(f"model ({members} x {base_kind}) -> {model_path}")

    if holdout_data is not None and holdout_data.rows:
        Xh = preprocessor.transform(holdout_data.matrix())
        y_pred, scores = model.predict(Xh)
        report = ev.evaluate_predictions(holdout_data.labels(), scores, threshold)
        click.echo(
            f"holdout: accuracy {report.accuracy:.4f} precision {report.precision:.4f} "
            f"recall {report.recall:.4f} f1 {report.f1:.4f} auc {report.auc:.4f}"
        )


def _write_cv_report(path: Path, base_kind: str, table: list[dict]) -> None:
    metric_cols = [k for k in table[0] if k != "params"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["base_kind", "params"] + metric_cols)
        for row in table:
            writer.writerow(
                [base_kind, json.dumps(row["params"], sort_keys=True)]
                + [repr(row[c]) for c in metric_cols]
            )


def _load_preprocessed(model, features_path: Path) -> tuple[list[FeatureRow], np.ndarray]:
    rows = read_features_csv(features_path)
    preprocessing = getattr(model, "preprocessing", None)
    if preprocessing is None:
        raise DataFormatError(
            "model file has no preprocessing record; train it with the train command"
        )
    pp = ds.Preprocessor.from_dict(preprocessing)
    X = ds.LabeledDataset(rows=rows).matrix()
    return rows, pp.transform(X)


@cli.command()
@click.option("--model", "model_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--features", "features_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@click.option("--threshold", type=float, default=None,
              help="Override the model's decision threshold.")
def predict(model_path: Path, features_path: Path, out_path: Path,
            threshold: float | None) -> None:
    """Label accounts: login, predicted label, and bot-vote fraction g(x)."""
    _echo_config("predict", None, model=model_path, features=features_path,
                 out=out_path, threshold=threshold)
    model = load_model(model_path)
    if not isinstance(model, BaggingEnsemble):
        raise DataFormatError("predict expects a bagging-ensemble model file")
    rows, Xt = _load_preprocessed(model, features_path)
    labels, g = model.predict(Xt, threshold=threshold)
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["login", "label", "vote_fraction"])
        for row, label, score in zip(rows, labels, g):
            writer.writerow([row.login, int(label), repr(float(score))])
    click.echo(f"predictions for {len(rows)} accounts -> {out_path}")


@cli.command()
@click.option("--model", "model_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--features", "features_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--out", "report_path", required=True, type=click.Path(path_type=Path))
@click.option("--roc", "roc_path", type=click.Path(path_type=Path))
@click.option("--threshold", type=float, default=None)
def evaluate(model_path: Path, features_path: Path, report_path: Path,
             roc_path: Path | None, threshold: float | None) -> None:
    """Score a labeled feature CSV against a trained model."""
    _echo_config("evaluate", None, model=model_path, features=features_path,
                 out=report_path, roc=roc_path, threshold=threshold)
    model = load_model(model_path)
    if not isinstance(model, BaggingEnsemble):
        raise DataFormatError("evaluate expects a bagging-ensemble model file")
    all_rows, Xt = _load_preprocessed(model, features_path)
    labeled_idx = [i for i, row in enumerate(all_rows) if row.label is not None]
    if not labeled_idx:
        raise DataFormatError("no labeled rows to evaluate")
    y = np.array([all_rows[i].label for i in labeled_idx])
    t = model.threshold if threshold is None else threshold
    _, scores = model.predict(Xt[labeled_idx], threshold=t)
    report = ev.evaluate_predictions(y, scores, t)
    tp, fp, tn, fn = report.confusion
    with open(report_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "threshold", "n", "accuracy", "precision", "recall",
                         "f1", "auc", "tp", "fp", "tn", "fn"])
        writer.writerow(
            [str(model_path), repr(float(t)), len(y)]
            + [repr(v) for v in (report.accuracy, report.precision, report.recall,
                                 report.f1, report.auc)]
            + [tp, fp, tn, fn]
        )
    if roc_path is not None:
        with open(roc_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["fpr", "tpr", "threshold"])
            for fpr, tpr, thr in report.roc:
                writer.writerow([repr(fpr), repr(tpr), repr(thr)])
    click.echo(
        f"n={len(y)} accuracy={report.accuracy:.4f} precision={report.precision:.4f} "
        f"recall={report.recall:.4f} f1={report.f1:.4f} auc={report.auc:.4f}"
    )
    click.echo(ev.ascii_roc(report.roc))


@cli.command()
@click.option("--model", "model_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--features", "features_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--method", default="permutation", show_default=True,
              type=click.Choice(["permutation", "impurity", "chi2"]))
@click.option("--out", "out_path", type=click.Path(path_type=Path))
@click.option("--repeats", default=10, show_default=True)
@click.option("--seed", default=42, show_default=True)
def importance(model_path: Path, features_path: Path, method: str,
               out_path: Path | None, repeats: int, seed: int) -> None:
    """Rank features by permutation AUC drop, Gini decrease, or chi-squared."""
    _echo_config("importance", seed, model=model_path, features=features_path,
                 method=method, repeats=repeats, out=out_path)
    model = load_model(model_path)
    rows, Xt = _load_preprocessed(model, features_path)
    header = ["feature", "value"]
    if method == "impurity":
        values = ev.impurity_importance(model)
        table = list(zip(FEATURE_NAMES, values))
    else:
        labeled_idx = [i for i, row in enumerate(rows) if row.label is not None]
        if not labeled_idx:
            raise DataFormatError(f"{method} importance needs labeled rows")
        y = np.array([rows[i].label for i in labeled_idx])
        if method == "permutation":
            values = ev.permutation_importance(model, Xt[labeled_idx], y,
                                               repeats=repeats, seed=seed)
            table = list(zip(FEATURE_NAMES, values))
        else:
            raw = ds.LabeledDataset(rows=[rows[i] for i in labeled_idx])
            X_raw, _ = ds.impute_and_transform(raw)
            stats = ev.chi_squared_screen(X_raw, y)
            header = ["feature", "statistic", "df"]
            table = stats
    ordered = sorted(table, key=lambda r: -float(r[1]))
    for entry in ordered:
        click.echo("  ".join(str(v) for v in entry))
    if out_path is not None:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for entry in table:
                writer.writerow([entry[0]] + [repr(float(v)) if isinstance(v, float) else str(v)
                                              for v in entry[1:]])
    click.echo(f"method={method} top feature: {ordered[0][0]}")


def main(argv: list[str] | None = None) -> None:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.Abort:
        click.echo("aborted", err=True)
        sys.exit(1)
    except (DataFormatError, OSError) as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(2)
    except InvariantError as exc:
        click.echo(f"internal invariant violated: {exc}", err=True)
        sys.exit(3)
    except BothoundError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)
    sys.exit(0)


if __name__ == "__main__":
    main()
