import math

import numpy as np
import pytest
from scipy.stats import norm

from cgpakit.dataset import NumericDataset
from cgpakit.errors import ContinuousFactor, SingularCovariance, TooFewSamples
from cgpakit.stats import (crosstab, describe, fisher_z_test, partial_correlation,
                           pearson_correlation)
from conftest import linear_sem_dataset


def discrete_ds(rows, levels_a=("x", "y"), levels_b=("p", "q", "r")):
    m = np.asarray(rows, dtype=float)
    return NumericDataset.from_matrix(
        m, ("A", "B"), ("ordinal", "ordinal"),
        ({"method": "none"}, {"method": "none"}),
        {"A": {l: i for i, l in enumerate(levels_a)},
         "B": {l: i for i, l in enumerate(levels_b)}})


def test_describe_constant_column():
    ds = NumericDataset.from_matrix([[1.0, 5.0], [1.0, 6.0], [1.0, 7.0]], ("A", "B"))
    d = describe(ds)
    assert d["A"]["unique"] == 1
    assert d["A"]["sd"] == 0.0


def test_describe_mode_and_mean():
    ds = NumericDataset.from_matrix([[1.0], [2.0], [2.0], [3.0]], ("A",))
    d = describe(ds)["A"]
    assert d["mode"] == 2.0
    assert d["mean"] == pytest.approx(2.0)


def test_describe_matches_independent_recomputation(rng):
    m = rng.normal(size=(200, 3))
    ds = NumericDataset.from_matrix(m, ("A", "B", "C"))
    d = describe(ds)
    for j, name in enumerate(("A", "B", "C")):
        col = m[:, j]
        assert d[name]["mean"] == pytest.approx(sum(col) / len(col), abs=1e-12)
        mu = sum(col) / len(col)
        sd = math.sqrt(sum((v - mu) ** 2 for v in col) / (len(col) - 1))
        assert d[name]["sd"] == pytest.approx(sd, abs=1e-12)


def test_crosstab_single_cell_is_100_percent():
    ds = discrete_ds([[0, 1], [0, 1], [0, 1]])
    tab = crosstab(ds, "A", "B")
    assert tab.total_pct[0, 1] == pytest.approx(100.0)
    assert tab.counts.sum() == 3


def test_crosstab_percentages_sum(rng):
    rows = np.column_stack([rng.integers(0, 2, 80), rng.integers(0, 3, 80)])
    ds = discrete_ds(rows)
    tab = crosstab(ds, "A", "B")
    assert tab.total_pct.sum() == pytest.approx(100.0, abs=1e-9)
    for i in range(tab.counts.shape[0]):
        if tab.counts[i].sum() > 0:
            assert tab.row_pct[i].sum() == pytest.approx(100.0, abs=1e-9)


def test_crosstab_rejects_continuous():
    ds = NumericDataset.from_matrix([[0.5, 1.0]], ("A", "B"),
                                    ("continuous", "ordinal"))
    with pytest.raises(ContinuousFactor):
        crosstab(ds, "A", "B")


def test_partial_correlation_perfect_and_symmetric(rng):
    x = rng.normal(size=300)
    ds = NumericDataset.from_matrix(np.column_stack([x, 2 * x + 1, rng.normal(size=300)]),
                                    ("A", "B", "C"))
    assert partial_correlation(ds, "A", "B") == pytest.approx(1.0)
    assert partial_correlation(ds, "A", "C") == pytest.approx(
        partial_correlation(ds, "C", "A"))


def test_partial_correlation_blocks_chain():
    ds, _ = linear_sem_dataset({("A", "B"): 0.8, ("B", "C"): 0.7}, 5000, seed=9)
    assert abs(partial_correlation(ds, "A", "C", ("B",))) < 0.05
    assert abs(partial_correlation(ds, "A", "C")) > 0.3


def test_partial_correlation_matches_recursive_formula(rng):
    # classic 3-variable recursion:
    # r_ab.c = (r_ab - r_ac r_bc) / sqrt((1 - r_ac^2)(1 - r_bc^2))
    m = rng.normal(size=(400, 3))
    m[:, 1] += 0.5 * m[:, 0]
    m[:, 2] += 0.4 * m[:, 0] - 0.3 * m[:, 1]
    ds = NumericDataset.from_matrix(m, ("A", "B", "C"))
    r_ab = pearson_correlation(m[:, 0], m[:, 1])
    r_ac = pearson_correlation(m[:, 0], m[:, 2])
    r_bc = pearson_correlation(m[:, 1], m[:, 2])
    expected = (r_ab - r_ac * r_bc) / math.sqrt((1 - r_ac ** 2) * (1 - r_bc ** 2))
    assert partial_correlation(ds, "A", "B", ("C",)) == pytest.approx(expected, abs=1e-10)


def test_fisher_z_zero_statistic():
    res = fisher_z_test(0.0, 100, 0, 0.05)
    assert res.statistic == 0.0
    assert res.p_value == pytest.approx(1.0)
    assert res.independent


def test_fisher_z_strong_correlation():
    # expected p computed from the normal tail of sqrt(n-3) * atanh(r)
    stat = math.sqrt(1000 - 3) * math.atanh(0.8)
    expected_p = 2 * float(norm.sf(abs(stat)))
    res = fisher_z_test(0.8, 1000, 0, 0.05)
    assert res.statistic == pytest.approx(stat)
    assert res.p_value == pytest.approx(expected_p)
    assert res.p_value < 1e-6
    assert not res.independent


def test_fisher_z_requires_enough_samples():
    with pytest.raises(TooFewSamples):
        fisher_z_test(0.1, 4, 1, 0.05)


def test_fisher_z_agrees_with_permutation_oracle(rng):
    x = rng.normal(size=500)
    y = 0.1 * x + rng.normal(size=500)
    r = pearson_correlation(x, y)
    analytic = fisher_z_test(r, 500, 0, 0.05).p_value
    draws = 10_000
    count = 0
    for _ in range(draws):
        rp = pearson_correlation(x, y[rng.permutation(500)])
        count += abs(rp) >= abs(r)
    assert abs(analytic - count / draws) < 0.05


def test_rejection_rate_calibration(rng):
    alpha = 0.05
    rejections = 0
    trials = 1000
    for _ in range(trials):
        x = rng.normal(size=120)
        y = rng.normal(size=120)
        r = pearson_correlation(x, y)
        rejections += not fisher_z_test(r, 120, 0, alpha).independent
    assert abs(rejections / trials - alpha) < 0.02


def test_p_value_monotone_in_abs_r():
    ps = [fisher_z_test(r, 200, 0, 0.05).p_value
          for r in (0.0, 0.05, 0.1, 0.2, 0.4, 0.6, 0.9)]
    assert all(a >= b for a, b in zip(ps, ps[1:]))


def test_singular_covariance_detected():
    m = np.ones((50, 2))
    ds = NumericDataset.from_matrix(m, ("A", "B"))
    with pytest.raises(SingularCovariance):
        partial_correlation(ds, "A", "B")
