"""Model explanation: Shapley attributions, local surrogates, global importance.

Absent features are marginalized by background-mean substitution (single
interventional reference), which keeps the subset-enumeration estimator
exact for linear models and tractable as a test oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import NumericDataset
from .errors import (DegenerateNeighborhood, DimensionMismatch, TooManyFeatures)
from .linear import LinearModel, fit_linear_family, lasso
from .metrics import regression_metrics
from .trees import TreeConfig, fit_tree

NON_ACTIONABLE = frozenset({"G", "FE", "ME", "SSC", "HSC", "DI", "YS", "MI"})


@dataclass(frozen=True)
class Attribution:
    base_value: float
    phi: np.ndarray
    prediction: float
    method: str                       # exact_linear | brute_force | sampled
    feature_names: tuple = ()
    standard_errors: np.ndarray | None = None
    n_samples: int = 0
    seed: int | None = None

    def to_dict(self, raw_values=None) -> dict:
        names = self.feature_names or tuple(f"x{i}" for i in range(self.phi.size))
        contributions = []
        for i, name in enumerate(names):
            entry = {"feature": name, "phi": float(self.phi[i])}
            if raw_values is not None:
                entry["raw_value"] = raw_values[i]
            if self.standard_errors is not None:
                entry["se"] = float(self.standard_errors[i])
            contributions.append(entry)
        return {"base_value": self.base_value, "prediction": self.prediction,
                "method": self.method, "contributions": contributions}


def _background_mean(background) -> np.ndarray:
    if isinstance(background, NumericDataset):
        return background.matrix.mean(axis=0)
    return np.asarray(background, dtype=float).mean(axis=0)


def shapley_exact_linear(model: LinearModel, x, background,
                         feature_names=()) -> Attribution:
    """Closed form for linear models: phi_j = w_j (x_j - mean_j)."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size != model.n_features:
        raise DimensionMismatch(f"expected {model.n_features} features, got {x.size}")
    mu = _background_mean(background)
    if mu.size != x.size:
        raise DimensionMismatch("background width does not match x")
    phi = model.weights * (x - mu)
    base = float(model.predict(mu[None, :])[0])
    pred = float(model.predict(x[None, :])[0])
    return Attribution(base, phi, pred, "exact_linear", tuple(feature_names))


def shapley_brute_force(model_fn, x, background, max_features: int = 12,
                        feature_names=()) -> Attribution:
    """Exact subset enumeration with the factorial subset weights."""
    x = np.asarray(x, dtype=float).ravel()
    p = x.size
    if p > max_features:
        raise TooManyFeatures(f"{p} features exceeds max_features={max_features}")
    mu = _background_mean(background)
    rows = np.tile(mu, (2 ** p, 1))
    for mask in range(2 ** p):
        for j in range(p):
            if mask >> j & 1:
                rows[mask, j] = x[j]
    values = np.asarray(model_fn(rows), dtype=float).ravel()
    fact = [math.factorial(i) for i in range(p + 1)]
    weight = [fact[s] * fact[p - s - 1] / fact[p] for s in range(p)]
    phi = np.zeros(p)
    for mask in range(2 ** p):
        s = bin(mask).count("1")
        for j in range(p):
            if not mask >> j & 1:
                phi[j] += weight[s] * (values[mask | (1 << j)] - values[mask])
    return Attribution(float(values[0]), phi, float(values[-1]), "brute_force",
                       tuple(feature_names))


def shapley_sampled(model_fn, x, background, n_samples: int = 200, seed: int = 0,
                    feature_names=()) -> Attribution:
    """Permutation-sampling estimator with per-feature standard errors."""
    x = np.asarray(x, dtype=float).ravel()
    p = x.size
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    mu = _background_mean(background)
    rng = np.random.default_rng(seed)
    contribs = np.zeros((n_samples, p))
    for s in range(n_samples):
        perm = rng.permutation(p)
        rows = np.tile(mu, (p + 1, 1))
        current = mu.copy()
        for step, j in enumerate(perm):
            current[j] = x[j]
            rows[step + 1] = current
        vals = np.asarray(model_fn(rows), dtype=float).ravel()
        contribs[s, perm] = np.diff(vals)
    phi = contribs.mean(axis=0)
    se = contribs.std(axis=0, ddof=1) / math.sqrt(n_samples) if n_samples > 1 \
        else np.zeros(p)
    base = float(np.asarray(model_fn(mu[None, :])).ravel()[0])
    pred = float(np.asarray(model_fn(x[None, :])).ravel()[0])
    return Attribution(base, phi, pred, "sampled", tuple(feature_names),
                       standard_errors=se, n_samples=n_samples, seed=seed)


# --------------------------------------------------------------------------
# LIME
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LimeConfig:
    n_perturbations: int = 500
    kernel_width: float | None = None      # default 0.75 * sqrt(p)
    n_rules: int = 10
    seed: int = 0
    l1: float = 0.01


@dataclass(frozen=True)
class LocalExplanation:
    feature_rules: tuple      # ({feature, rule, interval, weight}, ...)
    intercept: float
    local_fidelity_r2: float
    prediction_range: tuple
    prediction: float
    seed: int

    def to_dict(self) -> dict:
        return {"feature_rules": [dict(r) for r in self.feature_rules],
                "intercept": self.intercept,
                "local_fidelity_r2": self.local_fidelity_r2,
                "prediction_range": list(self.prediction_range),
                "prediction": self.prediction, "seed": self.seed}


def _rule_for(name: str, value: float, col: np.ndarray) -> tuple:
    q1, q2, q3 = np.quantile(col, [0.25, 0.5, 0.75])
    if value <= q1:
        return f"{name} <= {q1:.2f}", (None, float(q1))
    if value <= q2:
        return f"{q1:.2f} < {name} <= {q2:.2f}", (float(q1), float(q2))
    if value <= q3:
        return f"{q2:.2f} < {name} <= {q3:.2f}", (float(q2), float(q3))
    return f"{name} > {q3:.2f}", (float(q3), None)


def lime_explain(model_fn, x, background: NumericDataset,
                 config: LimeConfig | None = None) -> LocalExplanation:
    """L1-regularized local surrogate on a kernel-weighted neighborhood.

    Continuous columns get Gaussian noise scaled by the background sd;
    discrete columns are resampled from their empirical background values.
    """
    config = config or LimeConfig()
    if config.n_perturbations < 50:
        raise ValueError("need n_perturbations >= 50")
    x = np.asarray(x, dtype=float).ravel()
    p = x.size
    if p != background.n_cols:
        raise DimensionMismatch("x width does not match background")
    rng = np.random.default_rng(config.seed)
    n = config.n_perturbations
    Z = np.tile(x, (n, 1))
    sds = background.matrix.std(axis=0, ddof=1) if background.n_rows > 1 \
        else np.zeros(p)
    for j in range(p):
        col = background.matrix[:, j]
        if background.kinds[j] == "continuous":
            if sds[j] > 0:
                Z[:, j] = x[j] + rng.normal(0.0, sds[j], n)
        else:
            Z[:, j] = rng.choice(col, size=n, replace=True)
    if np.allclose(Z, Z[0], atol=1e-15):
        raise DegenerateNeighborhood("all perturbations identical")

    scale = np.where(sds > 0, sds, 1.0)
    d = np.sqrt((((Z - x) / scale) ** 2).sum(axis=1))
    width = config.kernel_width if config.kernel_width is not None \
        else 0.75 * math.sqrt(p)
    weights = np.exp(-(d ** 2) / width ** 2)
    if weights.sum() <= 0:
        raise DegenerateNeighborhood("kernel weights vanished")

    f = np.asarray(model_fn(Z), dtype=float).ravel()
    surrogate = fit_linear_family(Z, f, lasso(config.l1), sample_weight=weights)
    g = surrogate.predict(Z)
    wmean = (weights * f).sum() / weights.sum()
    ss_tot = (weights * (f - wmean) ** 2).sum()
    ss_res = (weights * (f - g) ** 2).sum()
    fidelity = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)

    order = sorted(range(p), key=lambda j: (-abs(surrogate.weights[j]), j))
    rules = []
    names = background.columns
    for j in order[: config.n_rules]:
        if surrogate.weights[j] == 0.0:
            continue
        rule, interval = _rule_for(names[j], x[j], Z[:, j])
        rules.append({"feature": names[j], "rule": rule, "interval": interval,
                      "weight": float(surrogate.weights[j])})
    pred = float(np.asarray(model_fn(x[None, :])).ravel()[0])
    return LocalExplanation(tuple(rules), float(surrogate.intercept),
                            float(fidelity), (float(f.min()), float(f.max())),
                            pred, config.seed)


# --------------------------------------------------------------------------
# Global importance
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GlobalImportance:
    ranking: tuple            # ({feature, score, method}, ...) descending
    surrogate_fidelity: float | None = None

    def to_dict(self) -> dict:
        return {"ranking": [dict(r) for r in self.ranking],
                "surrogate_fidelity": self.surrogate_fidelity}


def global_importance(model_fn, ds: NumericDataset, y=None, method: str = "permutation",
                      n_shuffles: int = 10, seed: int = 0,
                      surrogate_depth: int = 3) -> GlobalImportance:
    """Permutation degradation or a depth-limited tree surrogate."""
    X = ds.matrix
    names = ds.columns
    if method == "permutation":
        y = np.asarray(ds.column("CGPA") if y is None else y, dtype=float).ravel()
        base = float(np.mean((np.asarray(model_fn(X)).ravel() - y) ** 2))
        rng = np.random.default_rng(seed)
        scores = np.zeros(len(names))
        for j in range(len(names)):
            bumps = []
            for _ in range(n_shuffles):
                Xs = np.array(X)
                Xs[:, j] = Xs[rng.permutation(X.shape[0]), j]
                mse = float(np.mean((np.asarray(model_fn(Xs)).ravel() - y) ** 2))
                bumps.append(mse - base)
            scores[j] = max(0.0, float(np.mean(bumps)))
        fidelity = None
    elif method == "tree_surrogate":
        f = np.asarray(model_fn(X), dtype=float).ravel()
        tree = fit_tree(X, f, "regression", TreeConfig(max_depth=surrogate_depth))
        scores = tree.feature_importances(len(names))
        fidelity = regression_metrics(f, tree.predict(X))["r2"] if f.size >= 2 else 1.0
    else:
        raise ValueError(f"unknown method {method!r}")
    order = sorted(range(len(names)), key=lambda j: (-scores[j], names[j]))
    ranking = tuple({"feature": names[j], "score": float(scores[j]), "method": method}
                    for j in order)
    return GlobalImportance(ranking, fidelity)


# --------------------------------------------------------------------------
# Recommendations
# --------------------------------------------------------------------------

def recommend(attr: Attribution, model_fn, x, feature_domains: dict,
              actionable=None, k: int = 3, level_labels: dict | None = None) -> list:
    """Actionable features ranked by most-negative attribution; direction is
    the admissible value that raises the model prediction the most."""
    x = np.asarray(x, dtype=float).ravel()
    names = attr.feature_names or tuple(f"x{i}" for i in range(x.size))
    index = {n: i for i, n in enumerate(names)}
    if actionable is None:
        actionable = set(feature_domains) - NON_ACTIONABLE
    else:
        actionable = set(actionable) - NON_ACTIONABLE
    candidates = sorted(
        ((float(attr.phi[index[f]]), f) for f in actionable
         if f in index and attr.phi[index[f]] < 0),
        key=lambda t: (t[0], t[1]))
    base_pred = float(np.asarray(model_fn(x[None, :])).ravel()[0])
    out = []
    for phi_val, feat in candidates:
        if len(out) >= k:
            break
        domain = feature_domains.get(feat)
        if not domain:
            continue
        j = index[feat]
        rows = np.tile(x, (len(domain), 1))
        rows[:, j] = domain
        preds = np.asarray(model_fn(rows), dtype=float).ravel()
        best = int(np.argmax(preds))
        gain = float(preds[best] - base_pred)
        if gain <= 1e-12 or domain[best] == x[j]:
            continue
        direction = "increase" if domain[best] > x[j] else "decrease"
        labels = (level_labels or {}).get(feat, {})
        target_label = labels.get(domain[best], f"{domain[best]:g}")
        rationale = (f"{feat} currently lowers the prediction by {abs(phi_val):.3f}; "
                     f"moving it to {target_label} raises the predicted value "
                     f"by {gain:.3f}")
        out.append({"feature": feat, "direction": direction,
                    "target": float(domain[best]), "target_label": target_label,
                    "gain": gain, "phi": phi_val, "rationale": rationale})
    return out
