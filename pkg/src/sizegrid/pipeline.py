"""One-command run from corpus to report files.

The encoding mode and oversample flag in the config place a run on the
training-stage ladder: plain dummy encoding (I), target encoding for the
wide categoricals (II), minority oversampling on top (III). A run fits all
four classifier kinds under that preprocessing so their validation metrics
land side by side in one table, then grid-searches boosted trees (IV),
carries the winner to the held-out test season, and prices out what the
misses would have cost.

Every artifact is written without timestamps and with sorted JSON keys, so
two runs with the same config produce byte-identical files.
"""

import dataclasses
import json
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import InvalidConfig, StageFailed
from .evaluation import (
    confusion,
    impact_report,
    metrics,
    roc_auc,
    roc_points,
)
from .features import (
    CATEGORICAL_COLUMNS,
    CONTINUOUS_COLUMNS,
    FLAG_COLUMNS,
    KEY_COLUMNS,
    TARGET_COLUMN,
    assemble_feature_table,
)
from .ingest import ingest_corpus
from .models import (
    ModelSpec,
    grid_search_cv,
    learning_curve,
    predict_scores,
    save_model,
    train,
)
from .preprocess import (
    DUMMY_ONLY,
    ENCODING_MODES,
    TARGET_PLUS_DUMMY,
    SplitSpec,
    apply_encoding,
    fit_encoding,
    season_split,
    smote_oversample,
)
from .synth import CorpusConfig, generate_corpus, write_corpus

STAGE_MODEL_KINDS = ("logistic", "naive_bayes", "random_forest", "boosted_trees")

_STAGE_LABELS = {
    (DUMMY_ONLY, False): "I",
    (TARGET_PLUS_DUMMY, False): "II",
    (TARGET_PLUS_DUMMY, True): "III",
}


def stage_label(encoding: str, oversample: bool) -> str:
    return _STAGE_LABELS.get((encoding, oversample), "custom")

# baseline hyperparameters for the side-by-side stage comparison
DEFAULT_MODEL_PARAMS = {
    "logistic": {"epochs": 60, "batch_size": 512, "learning_rate": 0.1, "l2": 1e-4, "seed": 0},
    "naive_bayes": {},
    "random_forest": {
        "n_estimators": 50,
        "max_depth": 18,
        "min_samples_leaf": 2,
        "max_features": None,
        "seed": 0,
    },
    "boosted_trees": {"n_estimators": 60, "max_depth": 5, "learning_rate": 0.3},
}

DEFAULT_MODEL_GRID = {
    "max_depth": [3, 5],
    "n_estimators": [40, 60],
    "learning_rate": [0.3],
}

LEARNING_CURVE_FRACTIONS = (0.1, 0.25, 0.5, 0.75, 1.0)

METRIC_ORDER = [
    "accuracy",
    "precision",
    "recall",
    "specificity",
    "fpr",
    "misclassification",
    "auc",
]


@dataclass
class PipelineConfig:
    """Everything a run needs, loadable from one JSON file.

    The corpus comes either from `corpus_dir` (CSV files written by an
    earlier run or an external export) or, when that is None, from the
    synthetic generator seeded with `seed`; `corpus` holds field overrides
    for the generator. `encoding` and `oversample` pick the preprocessing
    for the tuned stage-IV model.
    """

    seed: int = 7
    corpus_dir: str | None = None
    corpus: dict = field(default_factory=dict)
    window: int = 4
    train_max: int = 193
    validation: int = 201
    test: int = 203
    encoding: str = TARGET_PLUS_DUMMY
    oversample: bool = False
    model_grid: dict = field(default_factory=lambda: {k: list(v) for k, v in DEFAULT_MODEL_GRID.items()})
    folds: int = 3
    out_dir: str = "run"

    def __post_init__(self):
        if self.encoding not in ENCODING_MODES:
            raise InvalidConfig(f"unknown encoding mode {self.encoding!r}")
        allowed = {f.name for f in dataclasses.fields(CorpusConfig)}
        bad = set(self.corpus) - allowed
        if bad:
            raise InvalidConfig(f"unknown corpus fields: {sorted(bad)}")
        # fail early on a bad split instead of after feature assembly
        self.split()

    def split(self) -> SplitSpec:
        return SplitSpec(self.train_max, self.validation, self.test)

    def corpus_config(self) -> CorpusConfig:
        params = dict(self.corpus)
        params.setdefault("seed", self.seed)
        return CorpusConfig(**params)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "PipelineConfig":
        allowed = {f.name for f in dataclasses.fields(cls)}
        bad = set(doc) - allowed
        if bad:
            raise InvalidConfig(f"unknown config fields: {sorted(bad)}")
        return cls(**doc)

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class RunResult:
    out_dir: Path
    report: dict
    paths: dict


@dataclass
class PreparedData:
    """Split frames plus encoded matrices under one config's preprocessing."""

    train: pd.DataFrame
    validation: pd.DataFrame
    test: pd.DataFrame
    transform: object
    X_train: np.ndarray
    y_train: np.ndarray
    X_val: np.ndarray
    y_val: np.ndarray

    def test_matrix(self) -> np.ndarray:
        return apply_encoding(self.test, self.transform)


def prepare_matrices(config: PipelineConfig, table: pd.DataFrame) -> PreparedData:
    """Season split, fitted encoding and model matrices for one run.

    The training matrix is oversampled when the config says so; validation
    and test stay untouched.
    """
    train_df, val_df, test_df = season_split(table, config.split())
    enc = fit_encoding(
        train_df,
        config.encoding,
        list(CONTINUOUS_COLUMNS),
        list(FLAG_COLUMNS),
        list(CATEGORICAL_COLUMNS),
        TARGET_COLUMN,
    )
    X = apply_encoding(train_df, enc)
    y = train_df[TARGET_COLUMN].to_numpy().astype(int)
    if config.oversample:
        X, y = smote_oversample(
            X, y, seed=config.seed, binary_columns=_binary_indices(enc)
        )
    return PreparedData(
        train=train_df,
        validation=val_df,
        test=test_df,
        transform=enc,
        X_train=X,
        y_train=y,
        X_val=apply_encoding(val_df, enc),
        y_val=val_df[TARGET_COLUMN].to_numpy().astype(int),
    )


@contextmanager
def _stage(name: str):
    """Re-raise module errors with the failing stage in the message."""
    try:
        yield
    except StageFailed:
        raise
    except Exception as exc:
        raise StageFailed(f"{name}: {exc}") from exc


def _plain(value):
    # numpy integers sneak into counts; floats already subclass float
    if isinstance(value, np.integer):
        return int(value)
    raise TypeError(f"not JSON serializable: {type(value)}")


def _write_json(path: Path, doc) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2, default=_plain)
    path.write_text(text + "\n", encoding="utf-8")


def _write_csv(path: Path, frame: pd.DataFrame) -> None:
    frame.to_csv(path, index=False)


def _matrix(frame: pd.DataFrame, enc) -> np.ndarray:
    return apply_encoding(frame, enc)


def _binary_indices(enc) -> list:
    pos = {name: idx for idx, name in enumerate(enc.feature_names)}
    return [pos[c] for c in enc.binary_columns]


def _model_params(kind: str, enc) -> dict:
    params = dict(DEFAULT_MODEL_PARAMS.get(kind, {}))
    if kind == "naive_bayes":
        params["binary_columns"] = _binary_indices(enc)
    return params


def _evaluate(model, X: np.ndarray, y: np.ndarray) -> dict:
    scores = predict_scores(model, X)
    cm = confusion(y, (scores >= 0.5).astype(int))
    out = metrics(cm)
    out["auc"] = roc_auc(y, scores)
    return out


def _grid_prices(master: pd.DataFrame, grid_map: dict) -> dict:
    """Average unit price of the products behind each grid name."""
    priced = master.assign(grid_name=master["product_code"].map(grid_map))
    priced = priced.dropna(subset=["grid_name"])
    return priced.groupby("grid_name")["unit_price"].mean().to_dict()


def _season_demand(frame: pd.DataFrame, demand: pd.DataFrame, season: int) -> np.ndarray:
    """Realized demand units for each row's cell in the given season."""
    current = demand[demand["season"] == season]
    agg = current.groupby(["planning_group", "grid_name", "size"])["quantity"].sum()
    keys = list(zip(frame["planning_group"], frame["grid_name"], frame["size"]))
    return np.asarray([float(agg.get(k, 0.0)) for k in keys])


def _stage_metrics_text(table: pd.DataFrame) -> str:
    lines = ["validation metrics by stage and model", ""]
    for stage, part in table.groupby("stage", sort=False):
        enc = part["encoding"].iloc[0]
        extra = " + oversampling" if part["oversample"].iloc[0] else ""
        lines.append(f"stage {stage} ({enc}{extra})")
        header = f"  {'model':<16}" + "".join(f"{m:>18}" for m in METRIC_ORDER)
        lines.append(header)
        for _, row in part.iterrows():
            cells = "".join(f"{row[m]:>18.4f}" for m in METRIC_ORDER)
            lines.append(f"  {row['model']:<16}" + cells)
        lines.append("")
    return "\n".join(lines)


def run_pipeline(config: PipelineConfig, log=None) -> RunResult:
    """Execute every stage and write the full artifact set under out_dir."""
    say = log or (lambda msg: None)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    report = {"config": config.to_dict()}

    with _stage("corpus"):
        if config.corpus_dir is None:
            corpus_dir = out / "corpus"
            say(f"generating synthetic corpus (seed {config.seed}) -> {corpus_dir}")
            write_corpus(generate_corpus(config.corpus_config()), corpus_dir)
            paths["corpus"] = corpus_dir
        else:
            corpus_dir = Path(config.corpus_dir)
            say(f"using corpus at {corpus_dir}")
        report["corpus_dir"] = str(corpus_dir)

    with _stage("ingest"):
        ing = ingest_corpus(corpus_dir)
        reports_doc = {kind: rep.to_dict() for kind, rep in ing.reports.items()}
        _write_json(out / "cleaning_reports.json", reports_doc)
        text = "\n\n".join(ing.reports[k].summary() for k in sorted(ing.reports))
        (out / "cleaning_reports.txt").write_text(text + "\n", encoding="utf-8")
        paths["cleaning_reports"] = out / "cleaning_reports.json"
        say(f"ingested {len(ing.reports)} KPI tables, {len(ing.grids)} grids")

    with _stage("features"):
        table = assemble_feature_table(
            ing.assortment,
            ing.grids,
            ing.planning_groups,
            ing.adjusted_demand,
            ing.sell_out,
            ing.stock,
            ing.history,
            window=config.window,
        )
        _write_csv(out / "features.csv", table)
        paths["features"] = out / "features.csv"
        say(f"assembled {len(table)} candidate rows")

    stage = stage_label(config.encoding, config.oversample)
    with _stage("preprocess"):
        prep = prepare_matrices(config, table)
        val_df, test_df = prep.validation, prep.test
        enc4, X4, y4 = prep.transform, prep.X_train, prep.y_train
        X4_val, y_val = prep.X_val, prep.y_val
        y_test = test_df[TARGET_COLUMN].to_numpy().astype(int)
        report["rows"] = {
            "train": len(prep.train),
            "validation": len(val_df),
            "test": len(test_df),
        }
        pos = int(y4.sum())
        report["class_balance"] = {"positive": pos, "negative": int(len(y4) - pos)}
        report["stage"] = stage
        say(
            f"stage {stage} preprocessing: {config.encoding}"
            f"{' + oversampling' if config.oversample else ''},"
            f" {pos}:{len(y4) - pos} entering training"
        )

    stage_rows = []
    with _stage("model comparison"):
        for kind in STAGE_MODEL_KINDS:
            spec = ModelSpec(kind, _model_params(kind, enc4))
            model = train(spec, X4, y4)
            row = {
                "stage": stage,
                "encoding": config.encoding,
                "oversample": config.oversample,
                "model": kind,
            }
            row.update(_evaluate(model, X4_val, y_val))
            stage_rows.append(row)
            say(f"{kind}: accuracy {row['accuracy']:.4f} auc {row['auc']:.4f}")
        stage_table = pd.DataFrame(
            stage_rows, columns=["stage", "encoding", "oversample", "model"] + METRIC_ORDER
        )
        _write_csv(out / "stage_metrics.csv", stage_table)
        (out / "stage_metrics.txt").write_text(
            _stage_metrics_text(stage_table), encoding="utf-8"
        )
        paths["stage_metrics"] = out / "stage_metrics.csv"
        report["models"] = stage_rows

    with _stage("tuning"):
        best_spec, results = grid_search_cv(
            "boosted_trees", config.model_grid, X4, y4, folds=config.folds, seed=config.seed
        )
        tuning_table = pd.DataFrame(
            [
                {
                    **rec["params"],
                    "mean_accuracy": rec["mean_accuracy"],
                    **{
                        f"fold{i}_accuracy": acc
                        for i, acc in enumerate(rec["fold_accuracies"], start=1)
                    },
                }
                for rec in results
            ]
        )
        _write_csv(out / "tuning_results.csv", tuning_table)
        paths["tuning_results"] = out / "tuning_results.csv"
        tuned = train(best_spec, X4, y4)
        save_model(tuned, out / "tuned_model.json")
        (out / "transform.json").write_text(enc4.to_json() + "\n", encoding="utf-8")
        paths["tuned_model"] = out / "tuned_model.json"
        report["tuning"] = {"best_params": best_spec.params, "points": len(results)}
        say(f"tuned boosted trees: {best_spec.params}")

    with _stage("learning curve"):
        sizes = sorted({max(1, int(f * len(y4))) for f in LEARNING_CURVE_FRACTIONS})
        curve = learning_curve(best_spec, X4, y4, X4_val, y_val, sizes, seed=config.seed)
        _write_csv(out / "learning_curve.csv", pd.DataFrame(curve))
        paths["learning_curve"] = out / "learning_curve.csv"
        report["learning_curve"] = curve

    with _stage("validation"):
        report["validation"] = _evaluate(tuned, X4_val, y_val)
        _write_json(out / "validation_metrics.json", report["validation"])
        say(
            f"validation: accuracy {report['validation']['accuracy']:.4f}"
            f" auc {report['validation']['auc']:.4f}"
        )

    with _stage("test"):
        X4_test = _matrix(test_df, enc4)
        test_scores = predict_scores(tuned, X4_test)
        test_pred = (test_scores >= 0.5).astype(int)
        cm = confusion(y_test, test_pred)
        test_metrics = metrics(cm)
        test_metrics["auc"] = roc_auc(y_test, test_scores)
        _write_json(out / "test_confusion.json", cm.as_dict())
        _write_json(out / "test_metrics.json", test_metrics)
        points = roc_points(y_test, test_scores)
        _write_csv(
            out / "test_roc_points.csv",
            pd.DataFrame(points, columns=["fpr", "tpr"]),
        )
        prices = _grid_prices(ing.product_master, ing.grid_map)
        demand_units = _season_demand(test_df, ing.adjusted_demand, config.test)
        impact = impact_report(
            y_test, test_pred, demand_units, test_df["grid_name"].tolist(), prices
        )
        _write_json(out / "test_impact.json", impact.as_dict())
        paths["test_metrics"] = out / "test_metrics.json"
        paths["test_impact"] = out / "test_impact.json"
        report["test"] = {
            "confusion": cm.as_dict(),
            "metrics": test_metrics,
            "impact": impact.as_dict(),
        }
        say(
            f"test: accuracy {test_metrics['accuracy']:.4f}"
            f" auc {test_metrics['auc']:.4f}"
        )

    with _stage("scoring"):
        frames = []
        for part_name, part, X_part in (
            ("validation", val_df, X4_val),
            ("test", test_df, X4_test),
        ):
            kpi_cols = ["adjusted_demand_self", "sell_out_self", "sell_through_self"]
            scored = part[KEY_COLUMNS + kpi_cols + [TARGET_COLUMN]].copy()
            scores = predict_scores(tuned, X_part)
            scored.insert(0, "partition", part_name)
            scored["score"] = scores
            scored["model_selected"] = (scores >= 0.5).astype(int)
            frames.append(scored)
        scored_all = pd.concat(frames, ignore_index=True)
        _write_csv(out / "scored_grids.csv", scored_all)
        paths["scored_grids"] = out / "scored_grids.csv"

    names = {p.name for p in out.iterdir() if p.is_file()} | {"run_report.json"}
    report["artifacts"] = sorted(names)
    _write_json(out / "run_report.json", report)
    paths["run_report"] = out / "run_report.json"
    say(f"run complete, artifacts under {out}")
    return RunResult(out_dir=out, report=report, paths=paths)
