"""Baseline classifiers: multinomial logistic, one-vs-rest ridge, kNN."""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NonConvergence, SingleClass
from .linear import fit_linear_family, ridge


def _softmax(Z: np.ndarray) -> np.ndarray:
    Z = Z - Z.max(axis=1, keepdims=True)
    e = np.exp(Z)
    return e / e.sum(axis=1, keepdims=True)


class LogisticModel:
    """Multinomial softmax classifier fit by gradient descent with a
    backtracking line search; L2 on the weights, never on the biases."""

    kind = "logistic"

    def __init__(self, classes, W, b, l2):
        self.classes = np.asarray(classes)
        self.W = np.asarray(W, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.l2 = l2

    def decision(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.W.shape[1]:
            raise DimensionMismatch(f"expected {self.W.shape[1]} features")
        return X @ self.W.T + self.b

    def predict_proba(self, X) -> np.ndarray:
        return _softmax(self.decision(X))

    def predict(self, X) -> np.ndarray:
        return self.classes[np.argmax(self.decision(X), axis=1)]

    def loss_and_grad(self, X, Y_onehot):
        n = X.shape[0]
        P = _softmax(X @ self.W.T + self.b)
        eps = 1e-300
        loss = -np.sum(Y_onehot * np.log(P + eps)) / n + 0.5 * self.l2 * np.sum(self.W ** 2)
        diff = (P - Y_onehot) / n
        gW = diff.T @ X + self.l2 * self.W
        gb = diff.sum(axis=0)
        return loss, gW, gb

    def to_dict(self) -> dict:
        return {"kind": "logistic", "classes": self.classes.tolist(),
                "W": self.W.tolist(), "b": self.b.tolist(), "l2": self.l2}

    @classmethod
    def from_dict(cls, d: dict) -> "LogisticModel":
        return cls(d["classes"], d["W"], d["b"], d["l2"])


def fit_logistic(X, y, l2: float = 1e-4, tol: float = 1e-10,
                 max_iters: int = 20000) -> LogisticModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    classes = np.unique(y)
    if classes.size < 2:
        raise SingleClass("need at least 2 classes")
    Y = (y[:, None] == classes[None, :]).astype(float)
    model = LogisticModel(classes, np.zeros((classes.size, X.shape[1])),
                          np.zeros(classes.size), l2)
    loss, gW, gb = model.loss_and_grad(X, Y)
    step = 1.0
    for _ in range(max_iters):
        # backtracking line search on the fixed descent direction -grad
        while step > 1e-16:
            W_new = model.W - step * gW
            b_new = model.b - step * gb
            trial = LogisticModel(classes, W_new, b_new, l2)
            new_loss, nW, nb = trial.loss_and_grad(X, Y)
            if new_loss <= loss - 0.5 * step * (np.sum(gW ** 2) + np.sum(gb ** 2)):
                break
            step *= 0.5
        else:
            raise NonConvergence(max_iters, "line search stalled")
        change = loss - new_loss
        model, loss, gW, gb = trial, new_loss, nW, nb
        step *= 2.0  # let the step grow back between iterations
        if change < tol:
            return model
    raise NonConvergence(max_iters, "logistic gradient descent")


class RidgeClassifierModel:
    """One-vs-rest ridge regression on +/-1 targets; argmax decision."""

    kind = "ridge_cls"

    def __init__(self, classes, models):
        self.classes = np.asarray(classes)
        self.models = models  # one LinearModel per class

    def decision(self, X) -> np.ndarray:
        return np.column_stack([m.predict(X) for m in self.models])

    def predict(self, X) -> np.ndarray:
        return self.classes[np.argmax(self.decision(X), axis=1)]

    def to_dict(self) -> dict:
        return {"kind": "ridge_cls", "classes": self.classes.tolist(),
                "models": [m.to_dict() for m in self.models]}

    @classmethod
    def from_dict(cls, d: dict) -> "RidgeClassifierModel":
        from .linear import LinearModel
        return cls(d["classes"], [LinearModel.from_dict(m) for m in d["models"]])


def fit_ridge_classifier(X, y, lam: float = 1.0) -> RidgeClassifierModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    classes = np.unique(y)
    if classes.size < 2:
        raise SingleClass("need at least 2 classes")
    models = [fit_linear_family(X, np.where(y == c, 1.0, -1.0), ridge(lam))
              for c in classes]
    return RidgeClassifierModel(classes, models)


class KnnModel:
    """k nearest Euclidean neighbors; distance-then-index tie-break."""

    kind = "knn"

    def __init__(self, X, y, k):
        self.X = np.asarray(X, dtype=float)
        self.y = np.asarray(y)
        self.k = int(k)
        self.classes = np.unique(self.y)

    def predict(self, Q) -> np.ndarray:
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        if Q.shape[1] != self.X.shape[1]:
            raise DimensionMismatch(f"expected {self.X.shape[1]} features")
        d2 = ((Q[:, None, :] - self.X[None, :, :]) ** 2).sum(axis=2)
        out = np.empty(Q.shape[0], dtype=self.y.dtype)
        idx_row = np.arange(self.X.shape[0])
        for i in range(Q.shape[0]):
            order = np.lexsort((idx_row, d2[i]))[: self.k]
            votes = self.y[order]
            counts = {c: 0 for c in self.classes.tolist()}
            for v in votes.tolist():
                counts[v] += 1
            top = max(counts.values())
            for c in self.classes.tolist():  # smallest label wins vote ties
                if counts[c] == top:
                    out[i] = c
                    break
        return out

    def to_dict(self) -> dict:
        return {"kind": "knn", "k": self.k, "X": self.X.tolist(), "y": self.y.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "KnnModel":
        return cls(np.asarray(d["X"]), np.asarray(d["y"]), d["k"])


def fit_knn(X, y, k: int = 5) -> KnnModel:
    y = np.asarray(y)
    if np.unique(y).size < 2:
        raise SingleClass("need at least 2 classes")
    return KnnModel(X, y, k)


def fit_baseline_classifier(kind: str, X, y, config: dict | None = None):
    config = dict(config or {})
    if kind == "logistic":
        return fit_logistic(X, y, l2=config.get("l2", 1e-4),
                            tol=config.get("tol", 1e-10),
                            max_iters=config.get("max_iters", 20000))
    if kind == "ridge_cls":
        return fit_ridge_classifier(X, y, lam=config.get("lam", 1.0))
    if kind == "knn":
        return fit_knn(X, y, k=config.get("k", 5))
    raise ValueError(f"unknown classifier kind {kind!r}")
