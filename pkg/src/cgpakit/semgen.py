"""Synthetic survey data from a ground-truth linear structural model.

Each node is a weighted sum of its parents plus independent noise,
computed in topological order. Ordinal/categorical factors are produced
by thresholding the latent value; continuous factors by an affine map
clipped to the schema range. The latent matrix is returned alongside
the discretized records so structure-learning results can be scored
against the exact generating graph.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources as importlib_resources

import numpy as np

from .dataset import NumericDataset
from .errors import CyclicSpec, GraphError, SchemaError
from .graphs import Dag, WeightedDag
from .schema import FactorSchema, StudentRecord, default_schema

NOISE_KINDS = ("gaussian", "uniform", "laplace")


def _draw_noise(rng: np.random.Generator, spec: dict, n: int) -> np.ndarray:
    kind = spec["kind"]
    if kind == "gaussian":
        return rng.normal(0.0, spec["sigma"], n)
    if kind == "uniform":
        return rng.uniform(spec["a"], spec["b"], n)
    if kind == "laplace":
        return rng.laplace(0.0, spec["b"], n)
    raise SchemaError(f"unknown noise kind {kind!r}")


@dataclass(frozen=True)
class SemSpec:
    """Ground-truth SEM: DAG, edge weights, node noise, discretizers."""

    dag: Dag
    weights: dict                # (from, to) -> coefficient
    noise: dict                  # node -> {"kind": ..., params}
    discretizers: dict = field(default_factory=dict)   # node -> {"thresholds": [...], "levels": [...]}
    continuous: dict = field(default_factory=dict)     # node -> {"center": c, "scale": s}
    seed: int = 0

    def __post_init__(self):
        for (u, v) in self.weights:
            if (u, v) not in self.dag.edges:
                raise SchemaError(f"weight given for absent edge {u}->{v}")
        for (u, v) in self.dag.edges:
            if (u, v) not in self.weights:
                raise SchemaError(f"edge {u}->{v} has no weight")
        for node in self.dag.nodes:
            if node not in self.noise:
                raise SchemaError(f"node {node} has no noise term")
            if self.noise[node]["kind"] not in NOISE_KINDS:
                raise SchemaError(f"node {node}: unknown noise kind")
        for node, d in self.discretizers.items():
            th = list(d["thresholds"])
            if any(b <= a for a, b in zip(th, th[1:])):
                raise SchemaError(f"node {node}: thresholds must be strictly increasing")

    def weighted_dag(self) -> WeightedDag:
        """Ground-truth weighted graph; zero-weight edges are no edges."""
        p = len(self.dag.nodes)
        index = {u: i for i, u in enumerate(self.dag.nodes)}
        B = np.zeros((p, p))
        live = frozenset(e for e, w in self.weights.items() if w != 0.0)
        for (u, v) in live:
            B[index[v], index[u]] = self.weights[(u, v)]
        return WeightedDag(Dag(self.dag.nodes, live), B)

    # -- serialization -----------------------------------------------------

    def to_json(self) -> str:
        return json.dumps({
            "nodes": list(self.dag.nodes),
            "edges": [{"from": u, "to": v, "weight": self.weights[(u, v)]}
                      for u, v in sorted(self.dag.edges)],
            "noise": self.noise,
            "discretizers": self.discretizers,
            "continuous": self.continuous,
            "seed": self.seed,
        }, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SemSpec":
        doc = json.loads(text)
        try:
            dag = Dag(tuple(doc["nodes"]),
                      frozenset((e["from"], e["to"]) for e in doc["edges"]))
        except GraphError as exc:
            raise CyclicSpec(str(exc)) from None
        weights = {(e["from"], e["to"]): float(e["weight"]) for e in doc["edges"]}
        return cls(dag=dag, weights=weights, noise=doc["noise"],
                   discretizers=doc.get("discretizers", {}),
                   continuous=doc.get("continuous", {}),
                   seed=int(doc.get("seed", 0)))


def simulate_latent(spec: SemSpec, n: int) -> np.ndarray:
    """n x p latent matrix in ``spec.dag.nodes`` order; deterministic in seed."""
    if n < 1:
        raise SchemaError("n must be >= 1")
    rng = np.random.default_rng(spec.seed)
    index = {u: i for i, u in enumerate(spec.dag.nodes)}
    latent = np.zeros((n, len(spec.dag.nodes)))
    for node in spec.dag.topological_order():
        value = _draw_noise(rng, spec.noise[node], n)
        for parent in spec.dag.parents(node):
            value = value + spec.weights[(parent, node)] * latent[:, index[parent]]
        latent[:, index[node]] = value
    return latent


def generate_synthetic(spec: SemSpec, n: int, schema: FactorSchema | None = None):
    """Returns (records, latent NumericDataset).

    Records carry schema-valid raw levels (discretized); the dataset
    carries the latent continuous values in schema column order, which
    is the view structure-learning is validated against.
    """
    schema = schema or default_schema()
    missing = [a for a in spec.dag.nodes if a not in schema.acronyms]
    if missing:
        raise SchemaError(f"spec nodes not in schema: {missing}")
    latent = simulate_latent(spec, n)
    node_index = {u: i for i, u in enumerate(spec.dag.nodes)}

    columns = [a for a in schema.acronyms if a in node_index]
    latent_cols = latent[:, [node_index[a] for a in columns]]

    raw_columns = {}
    for name in columns:
        fspec = schema[name]
        col = latent[:, node_index[name]]
        if fspec.is_continuous:
            cmap = spec.continuous.get(name, {})
            center = float(cmap.get("center", sum(fspec.range) / 2.0))
            scale = float(cmap.get("scale", (fspec.range[1] - fspec.range[0]) / 6.0))
            raw_columns[name] = np.clip(center + scale * col, fspec.range[0], fspec.range[1])
        else:
            d = spec.discretizers.get(name)
            if d is None:
                raise SchemaError(f"non-continuous node {name} has no discretizer")
            thresholds = np.asarray(d["thresholds"], dtype=float)
            level_names = list(d.get("levels", fspec.levels))
            if sorted(level_names) != sorted(fspec.levels):
                raise SchemaError(f"{name}: discretizer levels must be a permutation "
                                  f"of the schema levels")
            if len(thresholds) != len(level_names) - 1:
                raise SchemaError(f"{name}: need len(levels)-1 thresholds")
            idx = np.searchsorted(thresholds, col, side="right")
            raw_columns[name] = np.array(level_names, dtype=object)[idx]

    records = []
    for i in range(n):
        vals = {}
        for name in columns:
            fspec = schema[name]
            v = raw_columns[name][i]
            vals[name] = float(v) if fspec.is_continuous else str(v)
        records.append(StudentRecord(vals))

    kinds = tuple(schema[a].kind for a in columns)
    encoding_map = {a: {lvl: i for i, lvl in enumerate(schema[a].levels)}
                    for a in columns if not schema[a].is_continuous}
    ds = NumericDataset.from_matrix(latent_cols, columns, kinds,
                                    ({"method": "none"},) * len(columns), encoding_map)
    return records, ds


def write_csv(records, schema: FactorSchema, path) -> None:
    """Deterministic CSV emission: schema column order, repr-stable floats."""
    import csv
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(schema.acronyms)
        for r in records:
            row = []
            for a in schema.acronyms:
                v = r[a]
                row.append(repr(float(v)) if schema[a].is_continuous else str(v))
            writer.writerow(row)


def default_sem_spec() -> SemSpec:
    """The illustrative hypothesis-topology SEM shipped with the package."""
    text = importlib_resources.files("cgpakit.resources").joinpath(
        "default_sem.json").read_text("utf-8")
    return SemSpec.from_json(text)


def hypothesis_dag() -> Dag:
    """The hypothesis causal graph as a machine-readable artifact."""
    return default_sem_spec().dag
