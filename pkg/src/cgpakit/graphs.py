"""Directed, partially directed, and weighted causal graphs.

Edges are stored over node names (factor acronyms). Acyclicity is
re-checked on every mutation helper, and all iteration orders are
deterministic (lexicographic) so discovery runs reproduce exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import GraphError, NodeMismatch


def _check_acyclic(nodes, edges) -> bool:
    children = {u: [] for u in nodes}
    indeg = {u: 0 for u in nodes}
    for u, v in edges:
        children[u].append(v)
        indeg[v] += 1
    queue = sorted(u for u in nodes if indeg[u] == 0)
    seen = 0
    while queue:
        u = queue.pop(0)
        seen += 1
        for v in sorted(children[u]):
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
        queue.sort()
    return seen == len(nodes)


@dataclass(frozen=True)
class Dag:
    nodes: tuple
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise GraphError("duplicate node names")
        for u, v in self.edges:
            if u == v:
                raise GraphError(f"self-loop on {u}")
            if u not in node_set or v not in node_set:
                raise GraphError(f"edge ({u},{v}) references unknown node")
        if not _check_acyclic(self.nodes, self.edges):
            raise GraphError("graph contains a directed cycle")

    def has_edge(self, u: str, v: str) -> bool:
        return (u, v) in self.edges

    def with_edge(self, u: str, v: str) -> "Dag":
        return Dag(self.nodes, self.edges | {(u, v)})

    def without_edge(self, u: str, v: str) -> "Dag":
        return Dag(self.nodes, self.edges - {(u, v)})

    def parents(self, v: str) -> list:
        return sorted(u for u, w in self.edges if w == v)

    def children(self, u: str) -> list:
        return sorted(w for x, w in self.edges if x == u)

    def descendants(self, u: str) -> set:
        out, stack = set(), [u]
        while stack:
            x = stack.pop()
            for c in self.children(x):
                if c not in out:
                    out.add(c)
                    stack.append(c)
        return out

    def topological_order(self) -> list:
        """Kahn's algorithm with lexicographic tie-break."""
        indeg = {u: 0 for u in self.nodes}
        for _, v in self.edges:
            indeg[v] += 1
        ready = sorted(u for u in self.nodes if indeg[u] == 0)
        order = []
        while ready:
            u = ready.pop(0)
            order.append(u)
            for v in self.children(u):
                indeg[v] -= 1
                if indeg[v] == 0:
                    ready.append(v)
            ready.sort()
        if len(order) != len(self.nodes):
            raise GraphError("graph contains a directed cycle")
        return order

    def relabel(self, mapping: dict) -> "Dag":
        """Rename nodes; node tuple order is preserved positionally."""
        return Dag(tuple(mapping[u] for u in self.nodes),
                   frozenset((mapping[u], mapping[v]) for u, v in self.edges))

    def skeleton(self) -> set:
        return {frozenset((u, v)) for u, v in self.edges}


@dataclass(frozen=True)
class PartiallyDirectedGraph:
    nodes: tuple
    directed_edges: frozenset = field(default_factory=frozenset)
    undirected_edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "directed_edges", frozenset(tuple(e) for e in self.directed_edges))
        object.__setattr__(self, "undirected_edges",
                           frozenset(frozenset(e) for e in self.undirected_edges))
        node_set = set(self.nodes)
        pairs = set()
        for u, v in self.directed_edges:
            if u == v:
                raise GraphError(f"self-loop on {u}")
            if u not in node_set or v not in node_set:
                raise GraphError(f"edge ({u},{v}) references unknown node")
            key = frozenset((u, v))
            if key in pairs:
                raise GraphError(f"pair {{{u},{v}}} appears in more than one edge")
            pairs.add(key)
        for e in self.undirected_edges:
            if len(e) != 2:
                raise GraphError("undirected self-loop")
            if not e <= node_set:
                raise GraphError("undirected edge references unknown node")
            if e in pairs:
                raise GraphError("pair appears in more than one edge set")
            pairs.add(e)

    def skeleton(self) -> set:
        return {frozenset((u, v)) for u, v in self.directed_edges} | set(self.undirected_edges)


@dataclass(frozen=True)
class WeightedDag:
    """DAG plus weight matrix B: B[i][j] != 0 iff edge node_j -> node_i."""

    dag: Dag
    B: np.ndarray
    prune_threshold: float = 0.0

    def __post_init__(self):
        B = np.asarray(self.B, dtype=float).copy()
        p = len(self.dag.nodes)
        if B.shape != (p, p):
            raise GraphError("B must be square over the dag nodes")
        index = {u: i for i, u in enumerate(self.dag.nodes)}
        for i in range(p):
            for j in range(p):
                present = (self.dag.nodes[j], self.dag.nodes[i]) in self.dag.edges
                if present != (B[i, j] != 0.0):
                    raise GraphError(
                        f"B[{i},{j}] inconsistent with edge set "
                        f"({self.dag.nodes[j]} -> {self.dag.nodes[i]})")
        order = self.dag.topological_order()
        pos = {u: k for k, u in enumerate(order)}
        for u, v in self.dag.edges:
            if pos[u] >= pos[v]:
                raise GraphError("edge order inconsistent with causal order")
        B.setflags(write=False)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "_index", index)

    def weight(self, u: str, v: str) -> float:
        """Weight of edge u -> v."""
        return float(self.B[self._index[v], self._index[u]])

    def __eq__(self, other):
        return (isinstance(other, WeightedDag) and self.dag == other.dag
                and np.array_equal(self.B, other.B)
                and self.prune_threshold == other.prune_threshold)


def d_separated(dag: Dag, x: str, y: str, z) -> bool:
    """Moralized-ancestral-graph test of x _||_ y | z."""
    z = set(z)
    if x in z or y in z:
        raise GraphError("endpoints cannot be in the conditioning set")
    relevant = {x, y} | z
    anc = set(relevant)
    changed = True
    while changed:
        changed = False
        for u, v in dag.edges:
            if v in anc and u not in anc:
                anc.add(u)
                changed = True
    adj = {u: set() for u in anc}
    for u, v in dag.edges:
        if u in anc and v in anc:
            adj[u].add(v)
            adj[v].add(u)
    for v in anc:  # moralize: marry parents of common children
        ps = [u for u in dag.parents(v) if u in anc]
        for a in ps:
            for b in ps:
                if a != b:
                    adj[a].add(b)
                    adj[b].add(a)
    stack, seen = [x], {x}
    while stack:
        u = stack.pop()
        if u == y:
            return False
        for w in adj[u]:
            if w not in seen and w not in z:
                seen.add(w)
                stack.append(w)
    return True


def graph_compare(estimated, truth: Dag) -> dict:
    """Structural Hamming distance plus skeleton precision/recall."""
    if set(_nodes_of(estimated)) != set(truth.nodes):
        raise NodeMismatch("graphs are over different node sets")
    est_status = _pair_status(estimated)
    tru_status = _pair_status(truth)
    nodes = sorted(truth.nodes)
    shd = 0
    for i, a in enumerate(nodes):
        for b in nodes[i + 1:]:
            if est_status.get((a, b), "none") != tru_status.get((a, b), "none"):
                shd += 1
    est_skel = _skeleton_of(estimated)
    tru_skel = truth.skeleton()
    tp = len(est_skel & tru_skel)
    precision = tp / len(est_skel) if est_skel else 1.0
    recall = tp / len(tru_skel) if tru_skel else 1.0
    directed = {(u, v) for u, v in _directed_of(estimated)}
    oriented_on_true = [(u, v) for u, v in directed if frozenset((u, v)) in tru_skel]
    correct = sum(1 for u, v in oriented_on_true if (u, v) in truth.edges)
    orientation_accuracy = correct / len(oriented_on_true) if oriented_on_true else 1.0
    return {"shd": shd, "skeleton_precision": precision, "skeleton_recall": recall,
            "orientation_accuracy": orientation_accuracy}


def skeleton_f1(estimated, truth: Dag) -> float:
    m = graph_compare(estimated, truth)
    p, r = m["skeleton_precision"], m["skeleton_recall"]
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def _nodes_of(g):
    return g.dag.nodes if isinstance(g, WeightedDag) else g.nodes


def _directed_of(g):
    if isinstance(g, Dag):
        return g.edges
    if isinstance(g, WeightedDag):
        return g.dag.edges
    return g.directed_edges


def _undirected_of(g):
    return g.undirected_edges if isinstance(g, PartiallyDirectedGraph) else frozenset()


def _skeleton_of(g):
    return {frozenset((u, v)) for u, v in _directed_of(g)} | set(_undirected_of(g))


def _pair_status(g) -> dict:
    status = {}
    for u, v in _directed_of(g):
        a, b = sorted((u, v))
        status[(a, b)] = f"{u}->{v}"
    for e in _undirected_of(g):
        a, b = sorted(e)
        status[(a, b)] = "--"
    return status


def export_graph(g, format: str = "json") -> str:
    """Serialize any graph type to DOT or a lossless JSON document."""
    if format == "dot":
        return _to_dot(g)
    if format == "json":
        return _to_json(g)
    raise GraphError(f"unknown format {format!r}")


def _to_dot(g) -> str:
    lines = ["digraph causal {"]
    for u in _nodes_of(g):
        lines.append(f'  "{u}";')
    weighted = isinstance(g, WeightedDag)
    for u, v in sorted(_directed_of(g)):
        if weighted:
            lines.append(f'  "{u}" -> "{v}" [label="{g.weight(u, v):.2f}"];')
        else:
            lines.append(f'  "{u}" -> "{v}";')
    for e in sorted(tuple(sorted(e)) for e in _undirected_of(g)):
        lines.append(f'  "{e[0]}" -- "{e[1]}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _to_json(g) -> str:
    doc = {"nodes": list(_nodes_of(g)), "directed": [], "undirected": []}
    weighted = isinstance(g, WeightedDag)
    for u, v in sorted(_directed_of(g)):
        entry = {"from": u, "to": v}
        if weighted:
            entry["weight"] = g.weight(u, v)
        doc["directed"].append(entry)
    for e in sorted(tuple(sorted(e)) for e in _undirected_of(g)):
        doc["undirected"].append({"a": e[0], "b": e[1]})
    if weighted:
        doc["prune_threshold"] = g.prune_threshold
    return json.dumps(doc, indent=2)


def parse_graph_json(text: str):
    """Inverse of ``export_graph(..., "json")``; returns the most specific type."""
    doc = json.loads(text)
    nodes = tuple(doc["nodes"])
    directed = [(e["from"], e["to"]) for e in doc.get("directed", [])]
    undirected = [(e["a"], e["b"]) for e in doc.get("undirected", [])]
    has_weights = any("weight" in e for e in doc.get("directed", []))
    if undirected:
        return PartiallyDirectedGraph(nodes, frozenset(directed),
                                      frozenset(frozenset(e) for e in undirected))
    dag = Dag(nodes, frozenset(directed))
    if not has_weights:
        return dag
    p = len(nodes)
    index = {u: i for i, u in enumerate(nodes)}
    B = np.zeros((p, p))
    for e in doc["directed"]:
        B[index[e["to"]], index[e["from"]]] = e["weight"]
    return WeightedDag(dag, B, float(doc.get("prune_threshold", 0.0)))
