"""Evaluation metrics, CGPA bands, and k-fold cross-validation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, OutOfRange, TooFewRows


@dataclass(frozen=True)
class CgpaBand:
    label: str
    lo: float
    hi: float
    right_closed: bool = False

    def contains(self, v: float) -> bool:
        return (self.lo <= v <= self.hi) if self.right_closed else (self.lo <= v < self.hi)


CGPA_BANDS = (
    CgpaBand("<2.50", 0.0, 2.5),
    CgpaBand("2.50-2.99", 2.5, 3.0),
    CgpaBand("3.00-3.49", 3.0, 3.5),
    CgpaBand("3.50-4.00", 3.5, 4.0, right_closed=True),
)

BAND_LABELS = tuple(b.label for b in CGPA_BANDS)


def bin_cgpa(cgpa: float) -> CgpaBand:
    """Left-closed bands partitioning [0,4]; the top band includes 4.0."""
    if not 0.0 <= cgpa <= 4.0:
        raise OutOfRange(f"CGPA {cgpa} outside [0,4]")
    for band in CGPA_BANDS:
        if band.contains(cgpa):
            return band
    return CGPA_BANDS[-1]


def bin_cgpa_array(values) -> np.ndarray:
    return np.asarray([bin_cgpa(float(v)).label for v in np.asarray(values).ravel()])


def regression_metrics(y_true, y_pred) -> dict:
    y_true = np.asarray(y_true, dtype=float).ravel()
    y_pred = np.asarray(y_pred, dtype=float).ravel()
    if y_true.size != y_pred.size:
        raise LengthMismatch(f"{y_true.size} vs {y_pred.size}")
    if y_true.size < 2:
        raise LengthMismatch("need at least 2 observations")
    err = y_true - y_pred
    mse = float(np.mean(err ** 2))
    ss_tot = float(np.sum((y_true - y_true.mean()) ** 2))
    ss_res = float(np.sum(err ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)
    return {"mae": float(np.mean(np.abs(err))), "mse": mse,
            "rmse": math.sqrt(mse), "r2": r2}


def classification_metrics(y_true, y_pred, labels=None) -> dict:
    y_true = np.asarray(y_true).ravel()
    y_pred = np.asarray(y_pred).ravel()
    if y_true.size != y_pred.size:
        raise LengthMismatch(f"{y_true.size} vs {y_pred.size}")
    if labels is None:
        labels = np.unique(np.concatenate([y_true, y_pred]))
    else:
        labels = np.asarray(labels)
    k = labels.size
    index = {lbl: i for i, lbl in enumerate(labels.tolist())}
    cm = np.zeros((k, k), dtype=int)  # rows = true, cols = predicted
    for t, p in zip(y_true.tolist(), y_pred.tolist()):
        cm[index[t], index[p]] += 1
    support = cm.sum(axis=1)
    f1 = np.zeros(k)
    for c in range(k):
        tp = cm[c, c]
        fp = cm[:, c].sum() - tp
        fn = cm[c, :].sum() - tp
        prec = tp / (tp + fp) if tp + fp > 0 else 0.0
        rec = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1[c] = 2 * prec * rec / (prec + rec) if prec + rec > 0 else 0.0
    n = y_true.size
    absent = [labels[c] for c in range(k) if support[c] == 0]
    return {"accuracy": float(np.trace(cm) / n) if n else 0.0,
            "f1_macro": float(f1.mean()),
            "f1_weighted": float((f1 * support).sum() / n) if n else 0.0,
            "confusion_matrix": cm.tolist(),
            "labels": [str(l) for l in labels.tolist()],
            "absent_class_warning": [str(l) for l in absent]}


def kfold_indices(n: int, k: int, seed: int) -> list:
    """Deterministic shuffled k-fold partition of range(n)."""
    if k < 2:
        raise TooFewRows("need k >= 2 folds")
    if n < k:
        raise TooFewRows(f"need at least k={k} rows, got {n}")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(fold) for fold in np.array_split(perm, k)]


def cross_validate(fit_fn, X, y, k: int, seed: int, metric: str = "r2",
                   standardize: bool = True) -> dict:
    """k-fold CV; feature scaling is refit on each training fold.

    ``fit_fn(X_train, y_train) -> model with .predict``. ``metric`` is
    "r2" (regression) or "accuracy" (classification), reported
    explicitly because the headline CV number is otherwise ambiguous.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    folds = kfold_indices(X.shape[0], k, seed)
    per_fold = []
    for fold in folds:
        mask = np.ones(X.shape[0], dtype=bool)
        mask[fold] = False
        X_tr, X_te = X[mask], X[fold]
        y_tr, y_te = y[mask], y[fold]
        if standardize:
            mu = X_tr.mean(axis=0)
            sd = X_tr.std(axis=0, ddof=1)
            sd[sd == 0] = 1.0
            X_tr = (X_tr - mu) / sd
            X_te = (X_te - mu) / sd
        model = fit_fn(X_tr, y_tr)
        pred = model.predict(X_te)
        if metric == "r2":
            value = regression_metrics(y_te, pred)["r2"] if y_te.size >= 2 else 0.0
        elif metric == "accuracy":
            value = classification_metrics(y_te, pred)["accuracy"]
        else:
            raise ValueError(f"unknown metric {metric!r}")
        per_fold.append(float(value))
    arr = np.asarray(per_fold)
    return {"metric": metric, "per_fold": per_fold, "mean": float(arr.mean()),
            "sd": float(arr.std(ddof=1)) if arr.size > 1 else 0.0,
            "folds": [fold.tolist() for fold in folds]}
