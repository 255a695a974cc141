"""Regenerate resources/default_sem.json.

Edge weights are illustrative hand-chosen values on the hypothesis
topology. Noise variances keep each latent node's variance near 1;
discretizer thresholds are empirical quantiles hitting the target level
proportions. Run from the repo root:

    python3 tools/build_default_sem.py
"""

import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from cgpakit.graphs import Dag
from cgpakit.schema import default_schema
from cgpakit.semgen import SemSpec, simulate_latent

EDGES = {
    ("FE", "FJ"): 0.55, ("FE", "MJ"): 0.45, ("FE", "HSC"): 0.35, ("FE", "C"): 0.4,
    ("ME", "SSC"): 0.5,
    ("SSC", "HSC"): 0.5, ("SSC", "DI"): 0.3, ("SSC", "AC"): 0.4,
    ("SSC", "IF"): 0.35, ("SSC", "PSR"): 0.45,
    ("G", "AC"): 0.35, ("MI", "AC"): -0.35,
    ("HS", "SH"): -0.45, ("GS", "S"): 0.45, ("FJ", "S"): 0.35, ("MJ", "RS"): 0.45,
    ("DI", "PI"): 0.4, ("RS", "PI"): 0.35,
    ("PSR", "C"): 0.45, ("PSR", "SCI"): 0.4, ("C", "SCI"): 0.4,
    ("SH", "C"): 0.35, ("SH", "CS"): 0.45,
    ("DI", "CGPA"): 1.3, ("RS", "CGPA"): 1.0, ("SH", "CGPA"): 0.3,
    ("PSR", "CGPA"): 0.3, ("HSC", "CGPA"): 0.3, ("S", "CGPA"): 0.3,
    ("PI", "CGPA"): -0.3,
}

# target level proportions in latent-ascending order, with the level each
# interval maps to (categorical mechanisms need not follow declared order)
LEVEL_TARGETS = {
    "DI": ([0.06, 0.07, 0.07, 0.08, 0.07, 0.07, 0.16, 0.09, 0.08, 0.09, 0.08, 0.08],
           ["Pharmacy", "Physics", "Mathematics", "Economics", "Sociology",
            "Civil Engineering", "IIT", "CSE", "EEE", "BBA", "English", "Law"]),
    "YS": ([0.08, 0.09, 0.10, 0.10, 0.15, 0.12, 0.11, 0.10, 0.08, 0.07], None),
    "G": ([0.55, 0.45], None),
    "FJ": ([0.08, 0.10, 0.12, 0.15, 0.07, 0.18, 0.30],
           ["Day laborer", "Farmer", "Unemployed", "Business", "Retired",
            "Private job", "Govt. job"]),
    "MJ": ([0.45, 0.12, 0.15, 0.08, 0.20],
           ["Unemployed", "Business", "Private job", "Teacher", "Govt. job"]),
    "MI": ([0.90, 0.10], None),
    "AC": ([0.12, 0.28, 0.60], None),
    "SH": ([0.27, 0.40, 0.21, 0.12], None),
    "IF": ([0.15, 0.25, 0.60], None),
    "GS": ([0.25, 0.30, 0.45], None),
    "S": ([0.65, 0.35], None),
    "PI": ([0.85, 0.15], None),
    "HS": ([0.30, 0.25, 0.45], None),
    "PSR": ([0.75, 0.25], None),
    "C": ([0.30, 0.45, 0.17, 0.08], None),
    "RS": ([0.30, 0.40, 0.30], ["In a relationship", "Single", "Married"]),
    "CS": ([0.25, 0.50, 0.25], None),
    "SCI": ([0.15, 0.35, 0.25, 0.15, 0.10], None),
}

CONTINUOUS_MAPS = {
    "SSC": {"center": 4.6, "scale": 0.4},
    "HSC": {"center": 4.4, "scale": 0.45},
    "FE": {"center": 11.0, "scale": 4.0},
    "ME": {"center": 9.0, "scale": 3.8},
    "CGPA": {"center": 3.0, "scale": 0.5},
}

MIN_NOISE_VAR = 0.3
SEED = 20240913


def main():
    schema = default_schema()
    nodes = tuple(schema.acronyms)
    dag = Dag(nodes, frozenset(EDGES))

    # exact latent covariance, processed in topological order, choosing each
    # node's noise variance so its total variance stays near 1
    order = dag.topological_order()
    pos = {u: i for i, u in enumerate(order)}
    cov = np.zeros((len(order), len(order)))
    noise_var = {}
    for v in order:
        parents = dag.parents(v)
        i = pos[v]
        if parents:
            w = np.array([EDGES[(u, v)] for u in parents])
            pidx = [pos[u] for u in parents]
            signal = float(w @ cov[np.ix_(pidx, pidx)] @ w)
            noise_var[v] = max(MIN_NOISE_VAR, 1.0 - signal)
            cov[i, i] = signal + noise_var[v]
            for u in order[: pos[v]]:
                cov[pos[u], i] = cov[i, pos[u]] = float(w @ cov[pidx, pos[u]])
        else:
            noise_var[v] = 1.0
            cov[i, i] = 1.0

    noise = {}
    for v in nodes:
        a = float(np.sqrt(3.0 * noise_var[v]))  # uniform(-a, a) has var a^2/3
        noise[v] = {"kind": "uniform", "a": -a, "b": a}

    spec = SemSpec(dag=dag, weights=dict(EDGES), noise=noise,
                   discretizers={}, continuous={}, seed=SEED)
    latent = simulate_latent(spec, 400_000)
    col = {u: latent[:, k] for k, u in enumerate(nodes)}

    discretizers = {}
    for name, (props, assignment) in LEVEL_TARGETS.items():
        cum = np.cumsum(props)[:-1]
        thresholds = [round(float(np.quantile(col[name], q)), 6) for q in cum]
        d = {"thresholds": thresholds}
        if assignment is not None:
            d["levels"] = assignment
        discretizers[name] = d

    doc = {
        "nodes": list(nodes),
        "edges": [{"from": u, "to": v, "weight": w}
                  for (u, v), w in sorted(EDGES.items())],
        "noise": noise,
        "discretizers": discretizers,
        "continuous": CONTINUOUS_MAPS,
        "seed": SEED,
    }
    out = Path(__file__).resolve().parents[1] / "src" / "cgpakit" / "resources" / "default_sem.json"
    out.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {out}")
    sds = {v: float(np.std(col[v])) for v in nodes}
    print("latent sd range:", round(min(sds.values()), 3), "-", round(max(sds.values()), 3))


if __name__ == "__main__":
    main()
