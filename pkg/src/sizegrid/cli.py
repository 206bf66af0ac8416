"""Command line front door: one subcommand per pipeline step.

Every step reads its inputs from the run's working directory, so the steps
compose: gen -> ingest -> features -> train -> tune -> evaluate covers the
same ground as run-all, just with a place to stop and look around.
"""

import json
from pathlib import Path

import click
import pandas as pd

from .errors import SizeGridError
from .evaluation import confusion, impact_report, metrics, roc_auc, roc_points
from .features import assemble_feature_table, load_feature_table
from .ingest import ingest_corpus
from .models import ModelSpec, grid_search_cv, load_model, predict_scores, save_model, train as fit
from .pipeline import (
    METRIC_ORDER,
    STAGE_MODEL_KINDS,
    PipelineConfig,
    _grid_prices,
    _model_params,
    _season_demand,
    _stage_metrics_text,
    _write_csv,
    _write_json,
    prepare_matrices,
    run_pipeline,
    stage_label,
)
from .preprocess import FittedTransform, apply_encoding, season_split
from .synth import generate_corpus, write_corpus

pass_config = click.make_pass_decorator(PipelineConfig)


def _config_options(fn):
    fn = click.option("--config", "config_path", type=click.Path(exists=True),
                      default=None, help="JSON run configuration.")(fn)
    fn = click.option("--seed", type=int, default=None, help="Override the seed.")(fn)
    fn = click.option("--workdir", type=click.Path(), default=None,
                      help="Override the run's working directory.")(fn)
    return fn


def _load_config(config_path, seed, workdir) -> PipelineConfig:
    cfg = PipelineConfig.from_file(config_path) if config_path else PipelineConfig()
    doc = cfg.to_dict()
    if seed is not None:
        doc["seed"] = seed
    if workdir is not None:
        doc["out_dir"] = workdir
    return PipelineConfig.from_dict(doc)


def _guard(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except SizeGridError as exc:
        raise click.ClickException(str(exc))


def _corpus_dir(cfg: PipelineConfig) -> Path:
    path = Path(cfg.corpus_dir) if cfg.corpus_dir else Path(cfg.out_dir) / "corpus"
    if not (path / "assortment.csv").exists():
        raise click.ClickException(
            f"no corpus at {path}; run `sizegrid gen` or point --config at one"
        )
    return path


def _feature_table(cfg: PipelineConfig) -> pd.DataFrame:
    path = Path(cfg.out_dir) / "features.csv"
    if not path.exists():
        raise click.ClickException(
            f"no feature table at {path}; run `sizegrid features` first"
        )
    return load_feature_table(path)


@click.group()
def main():
    """Size selection pipeline for planning-group grids."""


@main.command()
@_config_options
def gen(config_path, seed, workdir):
    """Write a synthetic source corpus."""
    cfg = _load_config(config_path, seed, workdir)
    out = Path(cfg.out_dir) / "corpus"
    written = _guard(write_corpus, _guard(generate_corpus, cfg.corpus_config()), out)
    click.echo(f"wrote {len(written)} tables under {out}")


@main.command()
@_config_options
def ingest(config_path, seed, workdir):
    """Load and clean the corpus, reporting what cleaning dropped."""
    cfg = _load_config(config_path, seed, workdir)
    result = _guard(ingest_corpus, _corpus_dir(cfg))
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "cleaning_reports.json",
                {k: r.to_dict() for k, r in result.reports.items()})
    text = "\n\n".join(result.reports[k].summary() for k in sorted(result.reports))
    (out / "cleaning_reports.txt").write_text(text + "\n", encoding="utf-8")
    click.echo(text)


@main.command()
@_config_options
def features(config_path, seed, workdir):
    """Assemble the candidate-cell feature table."""
    cfg = _load_config(config_path, seed, workdir)
    ing = _guard(ingest_corpus, _corpus_dir(cfg))
    table = _guard(
        assemble_feature_table,
        ing.assortment,
        ing.grids,
        ing.planning_groups,
        ing.adjusted_demand,
        ing.sell_out,
        ing.stock,
        ing.history,
        window=cfg.window,
    )
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "features.csv", table)
    click.echo(f"wrote {len(table)} rows to {out / 'features.csv'}")


@main.command(name="train")
@_config_options
def train_cmd(config_path, seed, workdir):
    """Fit the four classifier kinds and compare validation metrics."""
    cfg = _load_config(config_path, seed, workdir)
    prep = _guard(prepare_matrices, cfg, _feature_table(cfg))
    stage = stage_label(cfg.encoding, cfg.oversample)
    rows = []
    for kind in STAGE_MODEL_KINDS:
        model = _guard(fit, ModelSpec(kind, _model_params(kind, prep.transform)),
                       prep.X_train, prep.y_train)
        scores = predict_scores(model, prep.X_val)
        row = {"stage": stage, "encoding": cfg.encoding, "oversample": cfg.oversample,
               "model": kind}
        row.update(metrics(confusion(prep.y_val, (scores >= 0.5).astype(int))))
        row["auc"] = roc_auc(prep.y_val, scores)
        rows.append(row)
    table = pd.DataFrame(
        rows, columns=["stage", "encoding", "oversample", "model"] + METRIC_ORDER
    )
    out = Path(cfg.out_dir)
    _write_csv(out / "stage_metrics.csv", table)
    text = _stage_metrics_text(table)
    (out / "stage_metrics.txt").write_text(text, encoding="utf-8")
    click.echo(text.rstrip())


@main.command()
@_config_options
def tune(config_path, seed, workdir):
    """Grid-search boosted trees and persist the winner."""
    cfg = _load_config(config_path, seed, workdir)
    prep = _guard(prepare_matrices, cfg, _feature_table(cfg))
    best, results = _guard(
        grid_search_cv, "boosted_trees", cfg.model_grid,
        prep.X_train, prep.y_train, folds=cfg.folds, seed=cfg.seed,
    )
    out = Path(cfg.out_dir)
    _write_csv(
        out / "tuning_results.csv",
        pd.DataFrame(
            [
                {**r["params"], "mean_accuracy": r["mean_accuracy"],
                 **{f"fold{i}_accuracy": a
                    for i, a in enumerate(r["fold_accuracies"], start=1)}}
                for r in results
            ]
        ),
    )
    model = _guard(fit, best, prep.X_train, prep.y_train)
    save_model(model, out / "tuned_model.json")
    (out / "transform.json").write_text(prep.transform.to_json() + "\n", encoding="utf-8")
    best_rec = next(r for r in results if r["params"] == best.params)
    click.echo(f"best params: {json.dumps(best.params, sort_keys=True)}")
    click.echo(
        f"cv accuracy: {best_rec['mean_accuracy']:.4f} over {len(results)} lattice points"
    )


@main.command()
@_config_options
def evaluate(config_path, seed, workdir):
    """Score the tuned model on the held-out seasons and price the misses."""
    cfg = _load_config(config_path, seed, workdir)
    out = Path(cfg.out_dir)
    model_path = out / "tuned_model.json"
    if not model_path.exists():
        raise click.ClickException(f"no tuned model at {model_path}; run `sizegrid tune` first")
    model = _guard(load_model, model_path)
    ft = FittedTransform.from_json((out / "transform.json").read_text())
    table = _feature_table(cfg)
    ing = _guard(ingest_corpus, _corpus_dir(cfg))
    train_df, val_df, test_df = season_split(table, cfg.split())
    frames = []
    for name, part in (("validation", val_df), ("test", test_df)):
        X = apply_encoding(part, ft)
        y = part["selected"].to_numpy().astype(int)
        scores = predict_scores(model, X)
        pred = (scores >= 0.5).astype(int)
        cm = confusion(y, pred)
        part_metrics = metrics(cm)
        part_metrics["auc"] = roc_auc(y, scores)
        if name == "validation":
            _write_json(out / "validation_metrics.json", part_metrics)
        else:
            _write_json(out / "test_confusion.json", cm.as_dict())
            _write_json(out / "test_metrics.json", part_metrics)
            _write_csv(out / "test_roc_points.csv",
                       pd.DataFrame(roc_points(y, scores), columns=["fpr", "tpr"]))
            impact = impact_report(
                y, pred, _season_demand(part, ing.adjusted_demand, cfg.test),
                part["grid_name"].tolist(), _grid_prices(ing.product_master, ing.grid_map),
            )
            _write_json(out / "test_impact.json", impact.as_dict())
        kpi_cols = ["adjusted_demand_self", "sell_out_self", "sell_through_self"]
        scored = part[
            ["season", "planning_group", "grid_name", "size", "dim1", "dim2", "i", "j"]
            + kpi_cols + ["selected"]
        ].copy()
        scored.insert(0, "partition", name)
        scored["score"] = scores
        scored["model_selected"] = pred
        frames.append(scored)
        click.echo(f"{name}: accuracy {part_metrics['accuracy']:.4f}"
                   f" auc {part_metrics['auc']:.4f}")
    _write_csv(out / "scored_grids.csv", pd.concat(frames, ignore_index=True))


@main.command(name="run-all")
@_config_options
def run_all(config_path, seed, workdir):
    """Execute every step and write the full artifact set."""
    cfg = _load_config(config_path, seed, workdir)
    result = _guard(run_pipeline, cfg, log=click.echo)
    click.echo(f"report: {result.paths['run_report']}")


@main.command()
@_config_options
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8765, show_default=True, type=int)
def serve(config_path, seed, workdir, host, port):
    """Serve a completed run to the planner console."""
    import uvicorn

    from .service import build_app

    cfg = _load_config(config_path, seed, workdir)
    app = _guard(build_app, cfg.out_dir)
    click.echo(f"serving run {cfg.out_dir} on http://{host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
