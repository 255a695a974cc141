import numpy as np
import pytest

from cgpakit.errors import GraphError, NodeMismatch
from cgpakit.graphs import (Dag, PartiallyDirectedGraph, WeightedDag, d_separated,
                            export_graph, graph_compare, parse_graph_json)


def test_dag_rejects_cycles_and_self_loops():
    with pytest.raises(GraphError):
        Dag(("A", "B"), frozenset({("A", "B"), ("B", "A")}))
    with pytest.raises(GraphError):
        Dag(("A",), frozenset({("A", "A")}))
    dag = Dag(("A", "B", "C"), frozenset({("A", "B")}))
    with pytest.raises(GraphError):
        dag.with_edge("B", "A")


def test_topological_order_is_lexicographic_on_ties():
    dag = Dag(("C", "A", "B"), frozenset({("A", "C")}))
    assert dag.topological_order() == ["A", "B", "C"]


def test_pdg_pair_in_one_edge_set_only():
    with pytest.raises(GraphError):
        PartiallyDirectedGraph(("A", "B"), frozenset({("A", "B")}),
                               frozenset({frozenset(("A", "B"))}))


def test_weighted_dag_consistency():
    dag = Dag(("A", "B"), frozenset({("A", "B")}))
    B = np.array([[0.0, 0.0], [0.7, 0.0]])
    w = WeightedDag(dag, B)
    assert w.weight("A", "B") == pytest.approx(0.7)
    with pytest.raises(GraphError):
        WeightedDag(dag, np.zeros((2, 2)))  # edge without weight


def test_graph_compare_identity_and_empty():
    truth = Dag(("A", "B", "C", "D", "E", "F"),
                frozenset({("A", "B"), ("B", "C"), ("C", "D"), ("D", "E"), ("E", "F")}))
    same = graph_compare(truth, truth)
    assert same == {"shd": 0, "skeleton_precision": 1.0, "skeleton_recall": 1.0,
                    "orientation_accuracy": 1.0}
    empty = graph_compare(Dag(truth.nodes), truth)
    assert empty["shd"] == 5
    assert empty["skeleton_recall"] == 0.0


def test_graph_compare_one_reversed_edge():
    # hand-worked: A->B, B->C vs A->B, C->B differ in exactly one pair
    truth = Dag(("A", "B", "C"), frozenset({("A", "B"), ("B", "C")}))
    est = Dag(("A", "B", "C"), frozenset({("A", "B"), ("C", "B")}))
    m = graph_compare(est, truth)
    assert m["shd"] == 1
    assert m["skeleton_precision"] == 1.0 and m["skeleton_recall"] == 1.0
    assert m["orientation_accuracy"] == pytest.approx(0.5)


def test_graph_compare_node_mismatch():
    with pytest.raises(NodeMismatch):
        graph_compare(Dag(("A", "B")), Dag(("A", "C")))


def test_dot_export_conventions():
    dag = Dag(("A", "B"), frozenset({("A", "B")}))
    assert '"A" -> "B";' in export_graph(dag, "dot")
    pdg = PartiallyDirectedGraph(("A", "B", "C"), frozenset({("A", "B")}),
                                 frozenset({frozenset(("B", "C"))}))
    dot = export_graph(pdg, "dot")
    assert '"A" -> "B";' in dot and '"B" -- "C";' in dot
    w = WeightedDag(Dag(("A", "B"), frozenset({("A", "B")})),
                    np.array([[0.0, 0.0], [0.284, 0.0]]))
    assert 'label="0.28"' in export_graph(w, "dot")


@pytest.mark.parametrize("graph", [
    Dag(("A", "B", "C"), frozenset({("A", "B"), ("A", "C")})),
    PartiallyDirectedGraph(("A", "B", "C"), frozenset({("A", "B")}),
                           frozenset({frozenset(("B", "C"))})),
    WeightedDag(Dag(("A", "B"), frozenset({("A", "B")})),
                np.array([[0.0, 0.0], [0.5, 0.0]]), prune_threshold=0.05),
])
def test_json_round_trip(graph):
    assert parse_graph_json(export_graph(graph, "json")) == graph


def test_d_separation_chain_fork_collider():
    chain = Dag(("A", "B", "C"), frozenset({("A", "B"), ("B", "C")}))
    assert d_separated(chain, "A", "C", {"B"})
    assert not d_separated(chain, "A", "C", set())
    collider = Dag(("A", "B", "C"), frozenset({("A", "C"), ("B", "C")}))
    assert d_separated(collider, "A", "B", set())
    assert not d_separated(collider, "A", "B", {"C"})
    fork = Dag(("A", "B", "C"), frozenset({("B", "A"), ("B", "C")}))
    assert not d_separated(fork, "A", "C", set())
    assert d_separated(fork, "A", "C", {"B"})
