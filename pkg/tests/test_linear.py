import numpy as np
import pytest

from cgpakit.errors import DimensionMismatch, SingularSystem
from cgpakit.linear import (LinearModel, elastic_net, fit_linear_family, lasso,
                            no_penalty, ridge)


def kkt_violation(X, y, model, lam, mix):
    """Independent subgradient check on the fitted solution.

    Stationarity of 1/2||y - Xw - b||^2 + lam(mix||w||_1 + (1-mix)/2||w||_2^2):
    for each j, g_j := -X_j'r + lam(1-mix)w_j must satisfy
    g_j = -lam*mix*sign(w_j) when w_j != 0 and |g_j| <= lam*mix otherwise;
    the intercept requires sum(r) = 0.
    """
    r = y - X @ model.weights - model.intercept
    worst = abs(float(np.sum(r))) / len(y)
    for j in range(X.shape[1]):
        g = -float(X[:, j] @ r) + lam * (1 - mix) * model.weights[j]
        if model.weights[j] != 0.0:
            worst = max(worst, abs(g + lam * mix * np.sign(model.weights[j])))
        else:
            worst = max(worst, max(0.0, abs(g) - lam * mix))
    return worst


def test_exact_line_recovered():
    X = np.arange(10, dtype=float).reshape(-1, 1)
    y = 2.0 * X[:, 0]
    m = fit_linear_family(X, y, no_penalty())
    assert m.weights[0] == pytest.approx(2.0, abs=1e-10)
    assert m.intercept == pytest.approx(0.0, abs=1e-10)
    assert m.predict([[3.0]])[0] == pytest.approx(6.0)


def test_collinear_features_raise(rng):
    x = rng.normal(size=50)
    X = np.column_stack([x, x])
    with pytest.raises(SingularSystem):
        fit_linear_family(X, x, no_penalty())


def test_huge_ridge_shrinks_to_mean(rng):
    X = rng.normal(size=(80, 3))
    y = X @ np.array([1.0, -2.0, 0.5]) + 0.3
    m = fit_linear_family(X, y, ridge(1e9))
    assert np.all(np.abs(m.weights) < 1e-6)
    assert m.intercept == pytest.approx(float(y.mean()), abs=1e-6)


def test_ridge_gradient_vanishes(rng):
    # finite-difference check of the ridge objective at the solution
    X = rng.normal(size=(60, 4))
    y = X @ rng.normal(size=4) + rng.normal(size=60) * 0.2
    lam = 3.0
    m = fit_linear_family(X, y, ridge(lam))

    def objective(w, b):
        r = y - X @ w - b
        return 0.5 * float(r @ r) + 0.5 * lam * float(w @ w)

    eps = 1e-6
    base = objective(m.weights, m.intercept)
    for j in range(4):
        w = m.weights.copy()
        w[j] += eps
        up = objective(w, m.intercept)
        w[j] -= 2 * eps
        down = objective(w, m.intercept)
        assert abs(up - down) / (2 * eps) < 1e-4
    assert abs(objective(m.weights, m.intercept + eps) - base) / eps < 1e-4


def test_lasso_satisfies_kkt(rng):
    for trial in range(20):
        n, p = 60, 6
        X = rng.normal(size=(n, p))
        y = X @ (rng.normal(size=p) * (rng.uniform(size=p) > 0.4)) + rng.normal(size=n)
        lam = float(rng.uniform(0.5, 20.0))
        m = fit_linear_family(X, y, lasso(lam), tol=1e-10)
        assert kkt_violation(X, y, m, lam, 1.0) < 1e-6


def test_elastic_net_satisfies_kkt(rng):
    X = rng.normal(size=(80, 5))
    y = X @ rng.normal(size=5) + rng.normal(size=80)
    m = fit_linear_family(X, y, elastic_net(4.0, 0.5), tol=1e-10)
    assert kkt_violation(X, y, m, 4.0, 0.5) < 1e-6


def test_elastic_net_endpoints(rng):
    X = rng.normal(size=(100, 4))
    y = X @ np.array([1.0, 0.0, -0.5, 0.2]) + rng.normal(size=100) * 0.3
    lam = 2.0
    r = fit_linear_family(X, y, ridge(lam))
    e0 = fit_linear_family(X, y, elastic_net(lam, 0.0), tol=1e-10)
    assert np.max(np.abs(r.weights - e0.weights)) < 1e-6
    l = fit_linear_family(X, y, lasso(lam), tol=1e-10)
    e1 = fit_linear_family(X, y, elastic_net(lam, 1.0), tol=1e-10)
    assert np.max(np.abs(l.weights - e1.weights)) < 1e-6


def test_ridge_shrinkage_monotone(rng):
    X = rng.normal(size=(120, 5))
    y = X @ rng.normal(size=5) + rng.normal(size=120)
    norms = [float(np.linalg.norm(fit_linear_family(X, y, ridge(lam)).weights))
             for lam in (0.0, 1.0, 10.0, 100.0, 1000.0)]
    assert all(a >= b - 1e-12 for a, b in zip(norms, norms[1:]))


def test_lasso_sparsity_monotone(rng):
    X = rng.normal(size=(120, 8))
    y = X @ (rng.normal(size=8) * (rng.uniform(size=8) > 0.3)) + rng.normal(size=120)
    lams = np.geomspace(0.01, 200.0, 10)
    nnz = [int(np.sum(fit_linear_family(X, y, lasso(l)).weights != 0.0))
           for l in lams]
    assert all(a >= b for a, b in zip(nnz, nnz[1:]))


def test_lasso_records_excluded_features(rng):
    X = rng.normal(size=(100, 5))
    y = 2.0 * X[:, 0] + rng.normal(size=100) * 0.1
    m = fit_linear_family(X, y, lasso(30.0))
    assert 0 not in m.excluded
    assert len(m.excluded) >= 3


def test_weighted_fit_reduces_to_duplication(rng):
    # row weight 2 must equal literally duplicating the row
    X = rng.normal(size=(30, 3))
    y = X @ np.array([1.0, -1.0, 0.5]) + rng.normal(size=30) * 0.2
    w = np.ones(30)
    w[4] = 2.0
    weighted = fit_linear_family(X, y, no_penalty(), sample_weight=w)
    X_dup = np.vstack([X, X[4:5]])
    y_dup = np.append(y, y[4])
    duplicated = fit_linear_family(X_dup, y_dup, no_penalty())
    assert np.allclose(weighted.weights, duplicated.weights, atol=1e-10)
    assert weighted.intercept == pytest.approx(duplicated.intercept, abs=1e-10)


def test_model_serialization_round_trip(rng):
    X = rng.normal(size=(40, 3))
    y = X @ np.array([1.0, 2.0, -1.0])
    m = fit_linear_family(X, y, ridge(0.5))
    again = LinearModel.from_dict(m.to_dict())
    assert np.allclose(again.predict(X), m.predict(X))


def test_dimension_mismatch():
    m = LinearModel(np.array([1.0, 2.0]), 0.0, no_penalty())
    with pytest.raises(DimensionMismatch):
        m.predict([[1.0, 2.0, 3.0]])
