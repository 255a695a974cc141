"""Decision trees and random forests, built from scratch.

Regression trees split on variance reduction, classification trees on
Gini impurity decrease. Tie-breaks are deterministic: lowest feature
index, then lowest threshold. Forests bootstrap rows per tree and draw
a feature subset per split from a per-tree generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyData


@dataclass
class TreeConfig:
    max_depth: int | None = None
    min_samples_leaf: int = 1


def _gini(counts: np.ndarray) -> float:
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return float(1.0 - (p ** 2).sum())


class TreeModel:
    """Fitted tree; nodes are dicts, leaves carry a value or a class
    distribution over the training label set."""

    kind = "tree"

    def __init__(self, task: str, root: dict, labels: np.ndarray | None,
                 config: TreeConfig):
        self.task = task
        self.root = root
        self.labels = labels
        self.config = config

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.task == "regression":
            out = np.empty(X.shape[0])
        else:
            out = np.empty(X.shape[0], dtype=self.labels.dtype)
        self._predict_into(self.root, X, np.arange(X.shape[0]), out)
        return out

    def predict_distribution(self, X) -> np.ndarray:
        """Classification only: per-row class distribution."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty((X.shape[0], self.labels.size))
        self._dist_into(self.root, X, np.arange(X.shape[0]), out)
        return out

    def _predict_into(self, node, X, idx, out):
        if idx.size == 0:
            return
        if "leaf" in node:
            if self.task == "regression":
                out[idx] = node["leaf"]
            else:
                out[idx] = self.labels[int(np.argmax(node["leaf"]))]
            return
        mask = X[idx, node["feature"]] <= node["threshold"]
        self._predict_into(node["left"], X, idx[mask], out)
        self._predict_into(node["right"], X, idx[~mask], out)

    def _dist_into(self, node, X, idx, out):
        if idx.size == 0:
            return
        if "leaf" in node:
            out[idx] = node["leaf"]
            return
        mask = X[idx, node["feature"]] <= node["threshold"]
        self._dist_into(node["left"], X, idx[mask], out)
        self._dist_into(node["right"], X, idx[~mask], out)

    def feature_importances(self, n_features: int) -> np.ndarray:
        """Total impurity decrease per feature, normalized to sum 1."""
        imp = np.zeros(n_features)

        def walk(node):
            if "leaf" in node:
                return
            imp[node["feature"]] += node["gain"]
            walk(node["left"])
            walk(node["right"])

        walk(self.root)
        total = imp.sum()
        return imp / total if total > 0 else imp

    def to_dict(self) -> dict:
        return {"kind": "tree", "task": self.task, "root": _node_to_dict(self.root),
                "labels": None if self.labels is None else self.labels.tolist(),
                "max_depth": self.config.max_depth,
                "min_samples_leaf": self.config.min_samples_leaf}

    @classmethod
    def from_dict(cls, d: dict) -> "TreeModel":
        labels = None if d["labels"] is None else np.asarray(d["labels"])
        return cls(d["task"], _node_from_dict(d["root"]), labels,
                   TreeConfig(d["max_depth"], d["min_samples_leaf"]))


def _node_to_dict(node):
    if "leaf" in node:
        leaf = node["leaf"]
        return {"leaf": leaf.tolist() if isinstance(leaf, np.ndarray) else leaf}
    return {"feature": node["feature"], "threshold": node["threshold"],
            "gain": node["gain"], "n": node["n"],
            "left": _node_to_dict(node["left"]), "right": _node_to_dict(node["right"])}


def _node_from_dict(d):
    if "leaf" in d:
        leaf = d["leaf"]
        return {"leaf": np.asarray(leaf, dtype=float) if isinstance(leaf, list) else leaf}
    return {"feature": int(d["feature"]), "threshold": float(d["threshold"]),
            "gain": float(d["gain"]), "n": int(d["n"]),
            "left": _node_from_dict(d["left"]), "right": _node_from_dict(d["right"])}


def _best_split(X, y, onehot, feature_pool, min_leaf):
    """Best (feature, threshold, impurity gain); None when no valid split."""
    n = y.size
    best = None  # (gain, feature, threshold)
    for j in feature_pool:
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        distinct = np.nonzero(xs[:-1] < xs[1:])[0]  # split after position i
        if distinct.size == 0:
            continue
        lo, hi = min_leaf - 1, n - min_leaf - 1
        distinct = distinct[(distinct >= lo) & (distinct <= hi)]
        if distinct.size == 0:
            continue
        if onehot is None:
            ys = y[order]
            csum = np.cumsum(ys)
            csq = np.cumsum(ys ** 2)
            nl = distinct + 1.0
            nr = n - nl
            sl, sq_l = csum[distinct], csq[distinct]
            sr, sq_r = csum[-1] - sl, csq[-1] - sq_l
            sse = (sq_l - sl ** 2 / nl) + (sq_r - sr ** 2 / nr)
            total = csq[-1] - csum[-1] ** 2 / n
            gains = total - sse
        else:
            oh = onehot[order]
            ccount = np.cumsum(oh, axis=0)
            nl = (distinct + 1.0)[:, None]
            left = ccount[distinct]
            right = ccount[-1] - left
            gini_l = 1.0 - ((left / nl) ** 2).sum(axis=1)
            gini_r = 1.0 - ((right / (n - nl)) ** 2).sum(axis=1)
            parent = _gini(ccount[-1])
            gains = n * parent - (nl.ravel() * gini_l + (n - nl.ravel()) * gini_r)
        k = int(np.argmax(gains))  # first max = lowest threshold
        gain = float(gains[k])
        if gain > 1e-12 and (best is None or gain > best[0] + 1e-12):
            i = distinct[k]
            best = (gain, j, float((xs[i] + xs[i + 1]) / 2.0))
    return best


def _grow(X, y, onehot, depth, config, rng, mtry):
    n = y.size
    p = X.shape[1]
    if onehot is None:
        pure = bool(np.all(y == y[0]))
    else:
        pure = bool((onehot.sum(axis=0) > 0).sum() <= 1)
    if (pure or n < 2 * config.min_samples_leaf
            or (config.max_depth is not None and depth >= config.max_depth)):
        return _leaf(y, onehot)
    if rng is not None and mtry < p:
        pool = np.sort(rng.choice(p, size=mtry, replace=False))
    else:
        pool = np.arange(p)
    best = _best_split(X, y, onehot, pool, config.min_samples_leaf)
    if best is None:
        return _leaf(y, onehot)
    gain, j, threshold = best
    mask = X[:, j] <= threshold
    left = _grow(X[mask], y[mask], None if onehot is None else onehot[mask],
                 depth + 1, config, rng, mtry)
    right = _grow(X[~mask], y[~mask], None if onehot is None else onehot[~mask],
                  depth + 1, config, rng, mtry)
    return {"feature": int(j), "threshold": threshold, "gain": gain, "n": int(n),
            "left": left, "right": right}


def _leaf(y, onehot):
    if onehot is None:
        return {"leaf": float(y.mean())}
    counts = onehot.sum(axis=0).astype(float)
    return {"leaf": counts / counts.sum()}


def fit_tree(X, y, task: str = "regression", config: TreeConfig | None = None,
             _rng=None, _mtry=None) -> TreeModel:
    """Greedy CART-style tree; deterministic given the data."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimensionMismatch("X must be n x p with len(y) = n")
    config = config or TreeConfig()
    if X.shape[0] == 0:
        raise EmptyData("no training rows")
    if task == "regression":
        y = y.astype(float)
        root = _grow(X, y, None, 0, config, _rng, _mtry or X.shape[1])
        return TreeModel(task, root, None, config)
    labels = np.unique(y)
    onehot = (y[:, None] == labels[None, :]).astype(float)
    root = _grow(X, y, onehot, 0, config, _rng, _mtry or X.shape[1])
    return TreeModel(task, root, labels, config)


@dataclass
class ForestConfig:
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_leaf: int = 1
    bootstrap: bool = True
    feature_rule: str = "auto"   # auto -> sqrt (classification) | third (regression)


class ForestModel:
    kind = "forest"

    def __init__(self, task: str, trees: list, labels: np.ndarray | None,
                 config: ForestConfig, seed: int):
        self.task = task
        self.trees = trees
        self.labels = labels
        self.config = config
        self.seed = seed

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.task == "regression":
            return np.mean([t.predict(X) for t in self.trees], axis=0)
        # majority vote, lexicographic tie-break via sorted label order
        votes = np.zeros((X.shape[0], self.labels.size))
        for t in self.trees:
            pred = t.predict(X)
            for c, lbl in enumerate(self.labels):
                votes[:, c] += pred == lbl
        return self.labels[np.argmax(votes, axis=1)]

    def feature_importances(self, n_features: int) -> np.ndarray:
        imps = np.mean([t.feature_importances(n_features) for t in self.trees], axis=0)
        total = imps.sum()
        return imps / total if total > 0 else imps

    def to_dict(self) -> dict:
        return {"kind": "forest", "task": self.task, "seed": self.seed,
                "labels": None if self.labels is None else self.labels.tolist(),
                "config": {"n_trees": self.config.n_trees, "max_depth": self.config.max_depth,
                           "min_samples_leaf": self.config.min_samples_leaf,
                           "bootstrap": self.config.bootstrap,
                           "feature_rule": self.config.feature_rule},
                "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, d: dict) -> "ForestModel":
        cfg = ForestConfig(**d["config"])
        labels = None if d["labels"] is None else np.asarray(d["labels"])
        return cls(d["task"], [TreeModel.from_dict(t) for t in d["trees"]], labels, cfg,
                   d["seed"])


def _mtry(rule: str, p: int, task: str) -> int:
    if rule == "auto":
        rule = "sqrt" if task == "classification" else "third"
    if rule == "sqrt":
        return max(1, math.ceil(math.sqrt(p)))
    if rule == "third":
        return max(1, math.ceil(p / 3))
    if rule == "all":
        return p
    return max(1, min(p, int(rule)))


def fit_forest(X, y, task: str = "regression", config: ForestConfig | None = None,
               seed: int = 0) -> ForestModel:
    """Bootstrap ensemble of trees; reproducible under ``seed``."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.shape[0] == 0:
        raise EmptyData("no training rows")
    config = config or ForestConfig()
    tree_cfg = TreeConfig(config.max_depth, config.min_samples_leaf)
    mtry = _mtry(config.feature_rule, X.shape[1], task)
    labels = None if task == "regression" else np.unique(y)
    seeds = np.random.SeedSequence(seed).spawn(config.n_trees)
    trees = []
    for t in range(config.n_trees):
        rng = np.random.default_rng(seeds[t])
        if config.bootstrap:
            idx = rng.integers(0, X.shape[0], X.shape[0])
            Xt, yt = X[idx], y[idx]
        else:
            Xt, yt = X, y
        tree = fit_tree(Xt, yt, task, tree_cfg, _rng=rng, _mtry=mtry)
        if labels is not None:
            tree = _align_labels(tree, labels)
        trees.append(tree)
    return ForestModel(task, trees, labels, config, seed)


def _align_labels(tree: TreeModel, labels: np.ndarray) -> TreeModel:
    """Re-express leaf distributions over the full training label set."""
    if tree.labels is None or np.array_equal(tree.labels, labels):
        tree.labels = labels
        return tree
    pos = {lbl: i for i, lbl in enumerate(labels.tolist())}
    idx = [pos[lbl] for lbl in tree.labels.tolist()]

    def remap(node):
        if "leaf" in node:
            dist = np.zeros(labels.size)
            dist[idx] = node["leaf"]
            node["leaf"] = dist
        else:
            remap(node["left"])
            remap(node["right"])

    remap(tree.root)
    tree.labels = labels
    return tree
