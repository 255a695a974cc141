"""End-to-end training pipeline shared by the CLI and the service."""

from __future__ import annotations

import numpy as np

from .artifacts import ModelArtifact, build_artifact
from .dataset import default_policy, deduplicate, encode_and_scale, train_test_split
from .metrics import (bin_cgpa_array, classification_metrics, cross_validate,
                      regression_metrics)
from .models import fit_model, task_of
from .schema import FactorSchema


def split_features_target(ds, target: str = "CGPA"):
    t = ds.column_index(target)
    feature_cols = [c for c in ds.columns if c != target]
    idx = [ds.column_index(c) for c in feature_cols]
    return ds.matrix[:, idx], ds.matrix[:, t], feature_cols


def train_model_pipeline(records, schema: FactorSchema, model_kind: str = "ridge",
                         params: dict | None = None, seed: int = 0,
                         test_fraction: float = 0.2, version: int = 1,
                         cv_folds: int = 5, source: str = "") -> ModelArtifact:
    """Dedupe, encode, split, fit, evaluate, and package one model."""
    params = dict(params or {})
    records = deduplicate(records)
    ds = encode_and_scale(records, schema, default_policy(schema))
    train, test = train_test_split(ds, test_fraction, seed)
    X_tr, y_tr, feature_cols = split_features_target(train)
    X_te, y_te, _ = split_features_target(test)
    task = task_of(model_kind)

    if task == "regression":
        model = fit_model(model_kind, X_tr, y_tr, params, seed=seed)
        metrics = {
            "task": "regression",
            "train": regression_metrics(y_tr, model.predict(X_tr)),
            "test": regression_metrics(y_te, model.predict(X_te)),
            "cv": cross_validate(lambda X, y: fit_model(model_kind, X, y, params, seed=seed),
                                 X_tr, y_tr, k=cv_folds, seed=seed, metric="r2",
                                 standardize=False),
        }
        metrics["cv"].pop("folds", None)
    else:
        bands_tr = bin_cgpa_array(y_tr * 4.0)
        bands_te = bin_cgpa_array(y_te * 4.0)
        model = fit_model(model_kind, X_tr, bands_tr, params, seed=seed)
        metrics = {
            "task": "classification",
            "train": classification_metrics(bands_tr, model.predict(X_tr)),
            "test": classification_metrics(bands_te, model.predict(X_te)),
        }

    feature_means = X_tr.mean(axis=0)
    scaling = {name: dict(train.scaling[train.column_index(name)])
               for name in train.columns}
    metadata = {
        "seed": seed,
        "n_train": int(train.n_rows),
        "n_test": int(test.n_rows),
        "test_fraction": test_fraction,
        "params": params,
        "metrics": metrics,
        "source": source,
        "base_value": float(np.mean(model.predict(X_tr)))
        if task == "regression" else None,
    }
    return build_artifact(model, model_kind, version, feature_cols, scaling,
                          {k: dict(v) for k, v in train.encoding_map.items()},
                          schema, feature_means, metadata)


REGRESSION_SUITE = ("ols", "ridge", "lasso", "elastic_net", "forest_reg")
CLASSIFICATION_SUITE = ("logistic", "ridge_cls", "tree_cls", "knn", "forest_cls")

# forests get mild regularization here: full-depth single-sample leaves are
# slow to grow and no more accurate on this survey-scale data
SUITE_DEFAULTS = {
    "forest_reg": {"n_trees": 40, "min_samples_leaf": 5},
    "forest_cls": {"n_trees": 60, "min_samples_leaf": 3},
}


def evaluate_model_suite(records, schema: FactorSchema, seed: int = 0,
                         test_fraction: float = 0.2, cv_folds: int = 5,
                         regression_kinds=REGRESSION_SUITE,
                         classification_kinds=CLASSIFICATION_SUITE,
                         params_by_kind: dict | None = None) -> dict:
    """Fit the whole comparison suite on one shared split; emit both tables."""
    params_by_kind = {**SUITE_DEFAULTS, **(params_by_kind or {})}
    records = deduplicate(records)
    ds = encode_and_scale(records, schema, default_policy(schema))
    train, test = train_test_split(ds, test_fraction, seed)
    X_tr, y_tr, _ = split_features_target(train)
    X_te, y_te, _ = split_features_target(test)
    bands_tr = bin_cgpa_array(y_tr * 4.0)
    bands_te = bin_cgpa_array(y_te * 4.0)

    regression = {}
    for kind in regression_kinds:
        params = dict(params_by_kind.get(kind, {}))
        model = fit_model(kind, X_tr, y_tr, params, seed=seed)
        row = regression_metrics(y_te, model.predict(X_te))
        row["cv_mean_r2"] = cross_validate(
            lambda X, y, k=kind, p=params: fit_model(k, X, y, p, seed=seed),
            X_tr, y_tr, k=cv_folds, seed=seed, metric="r2", standardize=False)["mean"]
        regression[kind] = row

    classification = {}
    for kind in classification_kinds:
        params = dict(params_by_kind.get(kind, {}))
        model = fit_model(kind, X_tr, bands_tr, params, seed=seed)
        tr_m = classification_metrics(bands_tr, model.predict(X_tr))
        te_m = classification_metrics(bands_te, model.predict(X_te))
        classification[kind] = {"train_accuracy": tr_m["accuracy"],
                                "test_accuracy": te_m["accuracy"],
                                "f1_macro": te_m["f1_macro"],
                                "f1_weighted": te_m["f1_weighted"],
                                "confusion_matrix": te_m["confusion_matrix"]}

    return {"seed": seed, "n_train": int(train.n_rows), "n_test": int(test.n_rows),
            "regression": regression, "classification": classification}


def format_comparison_tables(report: dict) -> str:
    lines = ["Regression (test split)",
             f"{'model':<14}{'MAE':>10}{'MSE':>10}{'RMSE':>10}{'R2':>10}{'CV R2':>10}"]
    for kind, row in report["regression"].items():
        lines.append(f"{kind:<14}{row['mae']:>10.4f}{row['mse']:>10.4f}"
                     f"{row['rmse']:>10.4f}{row['r2']:>10.4f}{row['cv_mean_r2']:>10.4f}")
    lines.append("")
    lines.append("Classification (CGPA bands)")
    lines.append(f"{'model':<14}{'train acc':>11}{'test acc':>11}{'F1 macro':>11}{'F1 wtd':>11}")
    for kind, row in report["classification"].items():
        lines.append(f"{kind:<14}{row['train_accuracy']:>11.4f}{row['test_accuracy']:>11.4f}"
                     f"{row['f1_macro']:>11.4f}{row['f1_weighted']:>11.4f}")
    return "\n".join(lines) + "\n"
