"""Linear regression family: OLS, ridge, lasso, elastic net.

One shared objective family (intercept never penalized; fit on centered
data), so the elastic-net endpoints coincide exactly with ridge and
lasso at the same lam:

    f(w) = 1/2 ||y - Xw - b||^2 + lam (mix ||w||_1 + (1-mix)/2 ||w||_2^2)

none: lam = 0 (exact normal equations). ridge: mix = 0, closed form
(X'X + lam I) w = X'y. lasso: mix = 1. lasso/elastic net run cyclic
coordinate descent to a max-coordinate-change tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NonConvergence, SingularSystem


@dataclass(frozen=True)
class Penalty:
    kind: str                    # none | ridge | lasso | elastic_net
    lam: float = 0.0
    mix: float = 1.0             # l1 share for elastic_net

    def __post_init__(self):
        if self.kind not in ("none", "ridge", "lasso", "elastic_net"):
            raise ValueError(f"unknown penalty {self.kind!r}")
        if self.lam < 0 or not 0.0 <= self.mix <= 1.0:
            raise ValueError("need lam >= 0 and mix in [0,1]")


def no_penalty() -> Penalty:
    return Penalty("none")


def ridge(lam: float = 1.0) -> Penalty:
    return Penalty("ridge", lam)


def lasso(lam: float = 1.0) -> Penalty:
    return Penalty("lasso", lam, mix=1.0)


def elastic_net(lam: float = 1.0, mix: float = 0.5) -> Penalty:
    return Penalty("elastic_net", lam, mix)


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    intercept: float
    penalty: Penalty
    excluded: tuple = ()         # zero-weight feature indices under l1

    kind = "linear"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n_features(self) -> int:
        return self.weights.size

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected {self.n_features} features, got {X.shape[1]}")
        return X @ self.weights + self.intercept

    def to_dict(self) -> dict:
        return {"kind": "linear", "weights": self.weights.tolist(),
                "intercept": self.intercept, "excluded": list(self.excluded),
                "penalty": {"kind": self.penalty.kind, "lam": self.penalty.lam,
                            "mix": self.penalty.mix}}

    @classmethod
    def from_dict(cls, d: dict) -> "LinearModel":
        p = d["penalty"]
        return cls(np.asarray(d["weights"], dtype=float), float(d["intercept"]),
                   Penalty(p["kind"], p["lam"], p["mix"]), tuple(d.get("excluded", ())))


def _center(X, y, sample_weight):
    if sample_weight is None:
        xm = X.mean(axis=0)
        ym = float(y.mean())
        return X - xm, y - ym, xm, ym, None
    s = np.asarray(sample_weight, dtype=float)
    if s.shape != y.shape:
        raise DimensionMismatch("sample_weight length must match y")
    if (s < 0).any() or s.sum() <= 0:
        raise ValueError("sample weights must be non-negative with positive sum")
    xm = (s[:, None] * X).sum(axis=0) / s.sum()
    ym = float((s * y).sum() / s.sum())
    root = np.sqrt(s * (y.size / s.sum()))  # normalized so sum of weights = n
    return (X - xm) * root[:, None], (y - ym) * root, xm, ym, root


def fit_linear_family(X, y, penalty: Penalty, sample_weight=None,
                      tol: float = 1e-7, max_sweeps: int = 10000) -> LinearModel:
    """Fit one member of the linear family; intercept always estimated."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] != y.size:
        raise DimensionMismatch("X must be n x p with len(y) = n")
    if X.shape[0] == 0:
        raise DimensionMismatch("empty training set")
    n, p = X.shape
    Xc, yc, xm, ym, _ = _center(X, y, sample_weight)

    if penalty.kind == "none":
        gram = Xc.T @ Xc
        if p > 0 and np.linalg.matrix_rank(gram) < p:
            raise SingularSystem("collinear features; OLS normal equations singular")
        w = np.linalg.solve(gram, Xc.T @ yc) if p else np.zeros(0)
        return LinearModel(w, ym - float(w @ xm), penalty)

    if penalty.kind == "ridge":
        gram = Xc.T @ Xc + penalty.lam * np.eye(p)
        w = np.linalg.solve(gram, Xc.T @ yc)
        return LinearModel(w, ym - float(w @ xm), penalty)

    mix = 1.0 if penalty.kind == "lasso" else penalty.mix
    l1 = penalty.lam * mix
    l2 = penalty.lam * (1.0 - mix)
    col_norm = (Xc ** 2).sum(axis=0)
    w = np.zeros(p)
    r = yc.copy()
    for _ in range(max_sweeps):
        max_change = 0.0
        for j in range(p):
            denom = col_norm[j] + l2
            if denom == 0.0:
                continue
            rho = Xc[:, j] @ r + col_norm[j] * w[j]
            new = np.sign(rho) * max(abs(rho) - l1, 0.0) / denom
            if new != w[j]:
                r += Xc[:, j] * (w[j] - new)
                max_change = max(max_change, abs(new - w[j]))
                w[j] = new
        if max_change < tol:
            break
    else:
        raise NonConvergence(max_sweeps, "coordinate descent")
    excluded = tuple(int(j) for j in range(p) if w[j] == 0.0) if l1 > 0 else ()
    return LinearModel(w, ym - float(w @ xm), penalty, excluded)
