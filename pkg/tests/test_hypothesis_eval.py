from dataclasses import replace

import numpy as np
import pytest

from cgpakit.discovery import evaluate_hypothesis_graph, _markov_pairs
from cgpakit.graphs import Dag, d_separated
from cgpakit.semgen import default_sem_spec, generate_synthetic
from conftest import linear_sem_dataset


def test_markov_pair_count_matches_brute_force_enumerator():
    # brute force: (v, u) pairs with u a non-descendant outside pa(v),
    # cross-checked against the d-separation oracle on small graphs
    graphs = [
        Dag(("A", "B", "C"), frozenset({("A", "B"), ("B", "C")})),
        Dag(("A", "B", "C", "D"), frozenset({("A", "C"), ("B", "C"), ("C", "D")})),
        Dag(tuple("ABCDEF"), frozenset({("A", "B"), ("B", "C"), ("A", "D"),
                                        ("D", "E"), ("C", "F"), ("E", "F")})),
    ]
    for dag in graphs:
        listed = list(_markov_pairs(dag))
        count = 0
        for v in dag.nodes:
            parents = set(dag.parents(v))
            descendants = dag.descendants(v)
            for u in dag.nodes:
                if u != v and u not in parents and u not in descendants:
                    count += 1
                    assert d_separated(dag, v, u, parents)
        assert len(listed) == count


def test_true_dag_violation_fraction_calibrated():
    edges = {("A", "B"): 0.7, ("B", "C"): 0.6, ("C", "D"): 0.5, ("A", "E"): 0.6}
    ds, dag = linear_sem_dataset(edges, 5000, seed=0)
    report = evaluate_hypothesis_graph(ds, dag, alpha=0.05, n_permutations=100, seed=1)
    assert report.markov_violation_fraction <= 0.15  # loose bound on a tiny graph
    assert 0.0 <= report.markov_p <= 1.0
    assert report.n_markov_tests == len(list(_markov_pairs(dag)))


def test_plain_reversal_is_markov_equivalent():
    # reversing chain links without creating v-structures keeps the same
    # implied independences, so the violation fractions must coincide
    edges = {("A", "B"): 0.7, ("B", "C"): 0.6, ("C", "D"): 0.5, ("A", "E"): 0.6}
    ds, dag = linear_sem_dataset(edges, 4000, seed=1)
    equivalent = Dag(dag.nodes,
                     frozenset({("B", "A"), ("C", "B"), ("C", "D"), ("A", "E")}))
    a = evaluate_hypothesis_graph(ds, dag, 0.05, n_permutations=0, seed=0)
    b = evaluate_hypothesis_graph(ds, equivalent, 0.05, n_permutations=0, seed=0)
    assert a.markov_violation_fraction == b.markov_violation_fraction


def test_corrupted_dag_violates_more():
    # dropping two strong edges leaves real dependences unexplained
    edges = {("A", "B"): 0.7, ("B", "C"): 0.6, ("C", "D"): 0.5, ("A", "E"): 0.6}
    wins = 0
    for seed in range(10):
        ds, dag = linear_sem_dataset(edges, 4000, seed=seed)
        bad = Dag(dag.nodes, frozenset({("C", "D"), ("A", "E")}))
        good = evaluate_hypothesis_graph(ds, dag, 0.05, n_permutations=0, seed=0)
        worse = evaluate_hypothesis_graph(ds, bad, 0.05, n_permutations=0, seed=0)
        wins += (worse.markov_violation_fraction > good.markov_violation_fraction)
    assert wins >= 9


def test_triangle_check_counts_directed_triangles():
    edges = {("A", "B"): 0.7, ("B", "C"): 0.6, ("A", "C"): 0.5}
    ds, dag = linear_sem_dataset(edges, 4000, seed=3)
    report = evaluate_hypothesis_graph(ds, dag, 0.05, n_permutations=50, seed=2)
    assert report.n_triangle_tests == 1
    assert report.triangle_violation_fraction == 0.0  # real dependence persists


def test_permutation_p_value_low_for_true_graph_on_shipped_sem():
    spec = default_sem_spec()
    _, ds = generate_synthetic(replace(spec, seed=5), 4000)
    report = evaluate_hypothesis_graph(ds, spec.dag, alpha=0.05,
                                       n_permutations=100, seed=3)
    assert report.markov_p <= 0.05  # true graph beats almost all relabelings
    assert abs(report.markov_violation_fraction - 0.05) <= 0.05
