"""Model-kind dispatcher: one registry for fitting and (de)serializing
every predictor the pipeline knows about."""

from __future__ import annotations

import numpy as np

from .baselines import (KnnModel, LogisticModel, RidgeClassifierModel,
                        fit_baseline_classifier)
from .linear import (LinearModel, elastic_net, fit_linear_family, lasso,
                     no_penalty, ridge)
from .trees import ForestConfig, ForestModel, TreeConfig, TreeModel, fit_forest, fit_tree

REGRESSION_KINDS = ("ols", "ridge", "lasso", "elastic_net", "tree_reg", "forest_reg")
CLASSIFICATION_KINDS = ("logistic", "ridge_cls", "tree_cls", "knn", "forest_cls")


def task_of(kind: str) -> str:
    if kind in REGRESSION_KINDS:
        return "regression"
    if kind in CLASSIFICATION_KINDS:
        return "classification"
    raise ValueError(f"unknown model kind {kind!r}")


def fit_model(kind: str, X, y, params: dict | None = None, seed: int = 0):
    """Fit any supported model kind; params are kind-specific."""
    params = dict(params or {})
    if kind == "ols":
        return fit_linear_family(X, y, no_penalty())
    if kind == "ridge":
        return fit_linear_family(X, y, ridge(params.get("lam", 1.0)))
    if kind == "lasso":
        return fit_linear_family(X, y, lasso(params.get("lam", 1.0)))
    if kind == "elastic_net":
        return fit_linear_family(X, y, elastic_net(params.get("lam", 1.0),
                                                   params.get("mix", 0.5)))
    if kind in ("tree_reg", "tree_cls"):
        cfg = TreeConfig(params.get("max_depth"), params.get("min_samples_leaf", 1))
        return fit_tree(X, y, task_of(kind), cfg)
    if kind in ("forest_reg", "forest_cls"):
        cfg = ForestConfig(n_trees=params.get("n_trees", 100),
                           max_depth=params.get("max_depth"),
                           min_samples_leaf=params.get("min_samples_leaf", 1),
                           bootstrap=params.get("bootstrap", True),
                           feature_rule=params.get("feature_rule", "auto"))
        return fit_forest(X, y, task_of(kind), cfg, seed=seed)
    if kind in ("logistic", "ridge_cls", "knn"):
        return fit_baseline_classifier(kind, X, y, params)
    raise ValueError(f"unknown model kind {kind!r}")


def model_to_dict(model) -> dict:
    return model.to_dict()


def model_from_dict(d: dict):
    kind = d["kind"]
    if kind == "linear":
        return LinearModel.from_dict(d)
    if kind == "tree":
        return TreeModel.from_dict(d)
    if kind == "forest":
        return ForestModel.from_dict(d)
    if kind == "logistic":
        return LogisticModel.from_dict(d)
    if kind == "ridge_cls":
        return RidgeClassifierModel.from_dict(d)
    if kind == "knn":
        return KnnModel.from_dict(d)
    raise ValueError(f"unknown serialized model kind {kind!r}")


def predict(model, X) -> np.ndarray:
    """Uniform prediction entry point (deterministic; no clamping here)."""
    return model.predict(np.atleast_2d(np.asarray(X, dtype=float)))
