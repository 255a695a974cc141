"""Dev check: does the shipped SEM meet the recovery/acceptance bars?"""

import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import cgpakit as ck
from cgpakit.semgen import default_sem_spec, generate_synthetic


def main():
    spec = default_sem_spec()
    truth = spec.dag
    schema = ck.default_schema()

    t0 = time.time()
    pc_f1, ges_f1 = [], []
    dir_hits, dir_total, werrs = 0, 0, []
    for seed in range(10):
        sp = replace(spec, seed=seed)
        _, ds = generate_synthetic(sp, 5000, schema)
        g = ck.pc_discover(ds, alpha=0.05, max_cond_size=4)
        pc_f1.append(ck.skeleton_f1(g, truth))
        dag = ck.ges_discover(ds)
        ges_f1.append(ck.skeleton_f1(dag, truth))
        w = ck.ica_lingam(ds, prune_threshold=0.05, seed=seed)
        for (u, v), wt in sp.weights.items():
            if abs(wt) < 0.3:
                continue
            dir_total += 1
            if (u, v) in w.dag.edges:
                dir_hits += 1
                werrs.append(abs(w.weight(u, v) - wt))
    elapsed = time.time() - t0
    print(f"PC skeleton F1: mean={np.mean(pc_f1):.3f} min={min(pc_f1):.3f}")
    print(f"GES skeleton F1: mean={np.mean(ges_f1):.3f} min={min(ges_f1):.3f}")
    print(f"LiNGAM direction recovery (|w|>=0.3): {dir_hits}/{dir_total} = {dir_hits/dir_total:.3f}")
    print(f"LiNGAM weight |err|: max={max(werrs):.3f} mean={np.mean(werrs):.3f}")
    print(f"criterion-1 wall time: {elapsed:.1f}s (budget 120s)")

    # hypothesis-graph calibration
    t0 = time.time()
    sp = replace(spec, seed=123)
    _, ds = generate_synthetic(sp, 5000, schema)
    rep = ck.evaluate_hypothesis_graph(ds, truth, alpha=0.05, n_permutations=200, seed=7)
    print(f"markov violation fraction: {rep.markov_violation_fraction:.4f} "
          f"(target 0.05 +/- 0.03), p={rep.markov_p}")
    print(f"triangle violation fraction: {rep.triangle_violation_fraction:.4f}, "
          f"p={rep.triangle_p}, tests={rep.n_triangle_tests}")
    print(f"eval time: {time.time()-t0:.1f}s")

    # RF vs logistic gap + ridge vs ols on the encoded pipeline
    t0 = time.time()
    records, _ = generate_synthetic(replace(spec, seed=42), 2000, schema)
    report = ck.evaluate_model_suite(records, schema, seed=42,
                                     params_by_kind={"forest_reg": {"n_trees": 60},
                                                     "forest_cls": {"n_trees": 60}})
    reg, cls = report["regression"], report["classification"]
    print(f"ridge MAE={reg['ridge']['mae']:.4f} ols MAE={reg['ols']['mae']:.4f} "
          f"ratio={reg['ridge']['mae']/reg['ols']['mae']:.3f}")
    print(f"forest acc={cls['forest_cls']['test_accuracy']:.3f} "
          f"logistic acc={cls['logistic']['test_accuracy']:.3f} "
          f"gap={cls['forest_cls']['test_accuracy']-cls['logistic']['test_accuracy']:.3f}")
    print(f"suite time: {time.time()-t0:.1f}s")


if __name__ == "__main__":
    main()
