import math

import numpy as np
import pytest

from cgpakit.dataset import NumericDataset
from cgpakit.discovery import BicScorer, bic_score, ges_discover, grasp_discover
from cgpakit.graphs import Dag
from conftest import linear_sem_dataset


def zscore(m):
    return (m - m.mean(axis=0)) / m.std(axis=0, ddof=1)


def test_empty_graph_bic_matches_closed_form(rng):
    # z-scored columns: each marginal Gaussian fit gives
    # -(n/2)(log 2 pi + 1) per node up to the (n-1)/n variance factor,
    # penalty is (2/2) log n per node
    n, p = 400, 4
    m = zscore(rng.normal(size=(n, p)))
    ds = NumericDataset.from_matrix(m, tuple("ABCD"))
    dag = Dag(tuple("ABCD"))
    expected = -(n / 2.0) * (math.log(2 * math.pi) + 1.0) * p - p * math.log(n)
    assert bic_score(ds, dag) == pytest.approx(expected, rel=0.01)


def test_true_edge_improves_score():
    ds, _ = linear_sem_dataset({("X", "Y"): 0.8}, 1000, seed=1)
    empty = Dag(("X", "Y"))
    with_edge = empty.with_edge("X", "Y")
    assert bic_score(ds, with_edge) > bic_score(ds, empty)


def test_spurious_edge_lowers_score(rng):
    m = rng.normal(size=(1000, 2))
    ds = NumericDataset.from_matrix(m, ("X", "Y"))
    empty = Dag(("X", "Y"))
    assert bic_score(ds, empty.with_edge("X", "Y")) < bic_score(ds, empty)


def test_score_is_decomposable_and_cached():
    ds, _ = linear_sem_dataset({("X", "Y"): 0.6, ("Y", "Z"): 0.5}, 500, seed=3)
    scorer = BicScorer(ds)
    dag = Dag(("X", "Y", "Z"), frozenset({("X", "Y"), ("Y", "Z")}))
    total = scorer.total(dag)
    parts = sum(scorer.local(v, dag.parents(v)) for v in dag.nodes)
    assert total == pytest.approx(parts)


def test_ges_empty_on_independent_columns(rng):
    ds = NumericDataset.from_matrix(rng.normal(size=(1500, 4)), tuple("ABCD"))
    assert ges_discover(ds).edges == frozenset()


def test_ges_recovers_chain_skeleton():
    edges = {("A", "B"): 0.8, ("B", "C"): 0.7, ("C", "D"): 0.6}
    ds, truth = linear_sem_dataset(edges, 5000, seed=5)
    found = ges_discover(ds)
    assert found.skeleton() == truth.skeleton()


def test_ges_score_at_least_empty_graph():
    ds, _ = linear_sem_dataset({("A", "B"): 0.8, ("B", "C"): 0.7}, 2000, seed=6)
    found = ges_discover(ds)
    assert bic_score(ds, found) >= bic_score(ds, Dag(ds.columns))


def test_grasp_zero_lambda_identical_to_ges(rng):
    for seed in range(6):
        p = int(rng.integers(3, 6))
        names = [f"V{i}" for i in range(p)]
        edges = {}
        for i in range(p):
            for j in range(i + 1, p):
                if rng.uniform() < 0.4:
                    edges[(names[i], names[j])] = float(rng.uniform(0.4, 0.8))
        ds, _ = linear_sem_dataset(edges, 1200, seed=100 + seed, names=names)
        assert grasp_discover(ds, lam=0.0) == ges_discover(ds)


def test_grasp_huge_lambda_empty_graph():
    ds, _ = linear_sem_dataset({("A", "B"): 0.9}, 2000, seed=7)
    assert grasp_discover(ds, lam=1e9).edges == frozenset()


def test_grasp_edge_count_monotone_in_lambda():
    edges = {("A", "B"): 0.7, ("B", "C"): 0.5, ("C", "D"): 0.4, ("A", "E"): 0.3}
    ds, _ = linear_sem_dataset(edges, 3000, seed=8)
    counts = [len(grasp_discover(ds, lam=lam).edges)
              for lam in (0.0, 5.0, 20.0, 100.0, 1e4)]
    assert all(a >= b for a, b in zip(counts, counts[1:]))
    assert counts[0] >= 4 and counts[-1] == 0
