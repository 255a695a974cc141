"""Command-line entry point: one subcommand per pipeline stage.

Every run writes its outputs under --out with fixed filenames plus a
manifest.json capturing inputs (hashed), flags, seeds, and outputs, so
any run can be reproduced from the manifest alone. On failure the
run's partial outputs are removed and the exit code is nonzero.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .artifacts import ModelArtifact
from .dataset import NumericDataset, default_policy, deduplicate, encode_and_scale, load_csv
from .discovery import (evaluate_hypothesis_graph, ges_discover, grasp_discover,
                        ica_lingam, pc_discover)
from .errors import CgpakitError
from .explain import (LimeConfig, global_importance, lime_explain, recommend,
                      shapley_brute_force, shapley_exact_linear, shapley_sampled)
from .graphs import export_graph, graph_compare, parse_graph_json
from .metrics import regression_metrics
from .pipeline import evaluate_model_suite, format_comparison_tables, train_model_pipeline
from .schema import default_schema
from .semgen import SemSpec, default_sem_spec, generate_synthetic, write_csv
from .stats import crosstab, describe, validation_report


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


class RunContext:
    """Tracks this run's outputs: removes them if the run fails, writes
    the manifest when it succeeds."""

    def __init__(self, command: str, args: argparse.Namespace):
        self.command = command
        self.args = {k: v for k, v in vars(args).items() if k != "func"}
        self.out_dir = args.out
        self.inputs: dict = {}
        self.outputs: list = []
        self.started = time.time()
        os.makedirs(self.out_dir, exist_ok=True)

    def __enter__(self) -> "RunContext":
        return self

    def __exit__(self, exc_type, exc, tb) -> bool:
        if exc_type is None:
            self._finish()
        else:
            for p in self.outputs:
                if os.path.exists(p):
                    os.remove(p)
        return False

    def record_input(self, path: str) -> None:
        if path and os.path.exists(path):
            self.inputs[path] = _sha256(path)

    def path(self, name: str) -> str:
        p = os.path.join(self.out_dir, name)
        self.outputs.append(p)
        return p

    def write_text(self, name: str, text: str) -> str:
        p = self.path(name)
        with open(p, "w", encoding="utf-8") as fh:
            fh.write(text)
        return p

    def write_json(self, name: str, doc) -> str:
        return self.write_text(name, json.dumps(doc, indent=2) + "\n")

    def _finish(self) -> None:
        manifest = {
            "command": self.command,
            "args": self.args,
            "toolkit_version": __version__,
            "inputs": self.inputs,
            "outputs": {p: _sha256(p) for p in self.outputs if os.path.exists(p)},
            "wall_clock_seconds": round(time.time() - self.started, 3),
        }
        with open(os.path.join(self.out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
            fh.write(json.dumps(manifest, indent=2) + "\n")


def _load_sem_spec(path: str | None, seed: int | None) -> SemSpec:
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            spec = SemSpec.from_json(fh.read())
    else:
        spec = default_sem_spec()
    if seed is not None:
        from dataclasses import replace
        spec = replace(spec, seed=seed)
    return spec


def _load_dataset(path: str, latent: bool) -> NumericDataset:
    schema = default_schema()
    if latent:
        import csv as _csv
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = _csv.reader(fh)
            header = next(reader)
            rows = [[float(c) for c in row] for row in reader]
        kinds = tuple(schema[a].kind if a in schema.acronyms else "continuous"
                      for a in header)
        return NumericDataset.from_matrix(np.asarray(rows), header, kinds)
    records = deduplicate(load_csv(path, schema))
    return encode_and_scale(records, schema, default_policy(schema))


# -- subcommand handlers --------------------------------------------------------


def cmd_generate(args) -> None:
    with RunContext("generate", args) as ctx:
        ctx.record_input(args.spec or "")
        spec = _load_sem_spec(args.spec, args.seed)
        schema = default_schema()
        records, latent = generate_synthetic(spec, args.n, schema)
        write_csv(records, schema, ctx.path("data.csv"))
        with open(ctx.path("latent.csv"), "w", encoding="utf-8") as fh:
            fh.write(",".join(latent.columns) + "\n")
            for row in latent.matrix:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
        ctx.write_text("truth.json", export_graph(spec.weighted_dag(), "json"))
        ctx.write_text("truth.dot", export_graph(spec.weighted_dag(), "dot"))
        print(f"wrote {args.n} rows to {ctx.out_dir}/data.csv")


def cmd_inspect(args) -> None:
    with RunContext("inspect", args) as ctx:
        ctx.record_input(args.data)
        schema = default_schema()
        records = deduplicate(load_csv(args.data, schema))
        ds = encode_and_scale(records, schema, default_policy(schema))
        report = {"n_records": len(records),
                  "factors": validation_report(records, schema),
                  "encoded": describe(ds)}
        tabs = []
        for pair in args.crosstab or []:
            a, b = pair.split(",")
            tab = crosstab(ds, a.strip(), b.strip())
            tabs.append(tab.to_dict())
            print(tab.to_text())
            print()
        if tabs:
            report["crosstabs"] = tabs
        ctx.write_json("report.json", report)
        width = max(len(a) for a in schema.acronyms) + 2
        print(f"{'factor':<{width}}{'non-null':>9}{'unique':>8}  mode")
        for name, row in report["factors"].items():
            print(f"{name:<{width}}{row['non_null']:>9}{row['unique']:>8}  {row['mode']}")


def cmd_discover(args) -> None:
    with RunContext("discover", args) as ctx:
        ctx.record_input(args.data)
        ctx.record_input(args.truth or "")
        ds = _load_dataset(args.data, args.latent)
        if args.algo == "pc":
            graph = pc_discover(ds, alpha=args.alpha, max_cond_size=args.max_cond)
        elif args.algo == "ges":
            graph = ges_discover(ds)
        elif args.algo == "grasp":
            graph = grasp_discover(ds, lam=args.sparsity)
        else:
            graph = ica_lingam(ds, prune_threshold=args.prune, seed=args.seed)
        ctx.write_text("graph.json", export_graph(graph, "json"))
        ctx.write_text("graph.dot", export_graph(graph, "dot"))
        if args.truth:
            with open(args.truth, "r", encoding="utf-8") as fh:
                truth = parse_graph_json(fh.read())
            truth_dag = truth.dag if hasattr(truth, "dag") else truth
            comparison = graph_compare(graph, truth_dag)
            ctx.write_json("compare.json", comparison)
            print(json.dumps(comparison, indent=2))
        print(f"{args.algo} graph written to {ctx.out_dir}/graph.json")


def cmd_evaluate_graph(args) -> None:
    with RunContext("evaluate-graph", args) as ctx:
        ctx.record_input(args.data)
        ctx.record_input(args.graph)
        ds = _load_dataset(args.data, args.latent)
        with open(args.graph, "r", encoding="utf-8") as fh:
            graph = parse_graph_json(fh.read())
        dag = graph.dag if hasattr(graph, "dag") else graph
        report = evaluate_hypothesis_graph(ds, dag, alpha=args.alpha,
                                           n_permutations=args.permutations,
                                           seed=args.seed, n_jobs=args.jobs)
        ctx.write_json("violations.json", report.to_dict())
        print(f"{'check':<12}{'violation fraction':>20}{'p-value':>10}{'tests':>8}")
        print(f"{'markov':<12}{report.markov_violation_fraction:>20.4f}"
              f"{report.markov_p:>10.3f}{report.n_markov_tests:>8}")
        print(f"{'triangle':<12}{report.triangle_violation_fraction:>20.4f}"
              f"{report.triangle_p:>10.3f}{report.n_triangle_tests:>8}")


def cmd_train(args) -> None:
    with RunContext("train", args) as ctx:
        ctx.record_input(args.data)
        schema = default_schema()
        records = load_csv(args.data, schema)
        params = json.loads(args.params) if args.params else {}
        artifact = train_model_pipeline(records, schema, model_kind=args.model,
                                        params=params, seed=args.seed,
                                        test_fraction=args.test_fraction,
                                        version=args.version, source=args.data)
        artifact.save(ctx.path("model.json"))
        ctx.write_json("metrics.json", artifact.metrics)
        print(json.dumps(artifact.metrics, indent=2))
        print(f"artifact v{artifact.version} ({args.model}) -> {ctx.out_dir}/model.json")


def cmd_evaluate(args) -> None:
    with RunContext("evaluate", args) as ctx:
        ctx.record_input(args.data)
        schema = default_schema()
        records = load_csv(args.data, schema)
        params = json.loads(args.params) if args.params else {}
        report = evaluate_model_suite(records, schema, seed=args.seed,
                                      test_fraction=args.test_fraction,
                                      cv_folds=args.cv_folds, params_by_kind=params)
        for spec in args.external or []:
            name, path = spec.split("=", 1)
            ctx.record_input(path)
            rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
            report["regression"][name] = regression_metrics(rows[:, 0], rows[:, 1])
            report["regression"][name]["cv_mean_r2"] = float("nan")
        tables = format_comparison_tables(report)
        ctx.write_json("metrics.json", report)
        ctx.write_text("tables.txt", tables)
        print(tables)


def cmd_explain(args) -> None:
    with RunContext("explain", args) as ctx:
        ctx.record_input(args.artifact)
        ctx.record_input(args.data)
        schema = default_schema()
        artifact = ModelArtifact.load(args.artifact)
        records = load_csv(args.data, schema)
        if not 0 <= args.row < len(records):
            raise CgpakitError(f"row {args.row} out of range (0..{len(records) - 1})")
        record = records[args.row]
        x = artifact.encode_input(record, schema)
        names = tuple(artifact.feature_columns)
        model_fn = artifact.predict_unit

        out: dict = {"row": args.row, "model_version": artifact.version}
        if args.method in ("shap", "all"):
            if artifact.is_linear:
                attr = shapley_exact_linear(artifact.model, x,
                                            artifact.feature_means[None, :],
                                            feature_names=names)
            elif len(names) <= 12:
                attr = shapley_brute_force(model_fn, x, artifact.feature_means[None, :],
                                           feature_names=names)
            else:
                attr = shapley_sampled(model_fn, x, artifact.feature_means[None, :],
                                       n_samples=args.samples, seed=args.seed,
                                       feature_names=names)
            out["attribution"] = attr.to_dict(raw_values=[record[n] for n in names])
            out["recommendations"] = recommend(attr, model_fn, x,
                                               artifact.feature_domains(), k=3,
                                               level_labels=artifact.level_labels())
        if args.method in ("lime", "all"):
            background = _background_dataset(artifact, records, schema)
            out["lime"] = lime_explain(model_fn, x, background,
                                       LimeConfig(seed=args.seed)).to_dict()
        if args.method in ("global", "all"):
            background = _background_dataset(artifact, records, schema)
            y = np.asarray([float(r["CGPA"]) / 4.0 for r in records])
            gi = global_importance(model_fn, background, y, method="permutation",
                                   seed=args.seed)
            ts = global_importance(model_fn, background, y, method="tree_surrogate")
            out["global_importance"] = {"permutation": gi.to_dict(),
                                        "tree_surrogate": ts.to_dict()}
        ctx.write_json("explanation.json", out)
        print(json.dumps(out, indent=2)[:2000])


def _background_dataset(artifact: ModelArtifact, records, schema) -> NumericDataset:
    rows = np.stack([artifact.encode_input(r, schema) for r in records])
    cols = artifact.feature_columns
    kinds = tuple(schema[c].kind for c in cols)
    emap = {c: artifact.payload["encoding_map"][c]
            for c in cols if c in artifact.payload["encoding_map"]}
    return NumericDataset.from_matrix(rows, cols, kinds, encoding_map=emap)


def cmd_serve(args) -> None:
    import logging
    import uvicorn
    from .service import ServiceConfig, create_app
    logging.basicConfig(level=logging.INFO, stream=sys.stdout, format="%(message)s")
    config = ServiceConfig.load(args.config)
    if args.port:
        config.port = args.port
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cgpakit",
                                     description="survey data pipeline: synthesis, "
                                                 "discovery, prediction, explanation")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--jobs", type=int, default=1,
                       help="upper bound on parallel inner work")

    p = sub.add_parser("generate", help="synthesize survey data from a SEM spec")
    common(p)
    p.add_argument("--spec", help="SemSpec JSON (default: shipped hypothesis SEM)")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("inspect", help="descriptive statistics and crosstabs")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--crosstab", action="append", metavar="ROW,COL")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("discover", help="causal structure discovery")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--algo", choices=("pc", "ges", "grasp", "lingam"), required=True)
    p.add_argument("--latent", action="store_true",
                   help="treat --data as a latent numeric matrix, not survey records")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--max-cond", type=int, default=4)
    p.add_argument("--sparsity", type=float, default=0.0, metavar="LAMBDA")
    p.add_argument("--prune", type=float, default=0.05)
    p.add_argument("--truth", help="ground-truth graph JSON for comparison")
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("evaluate-graph", help="Markov/triangle violation checks")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--latent", action="store_true")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--permutations", type=int, default=200)
    p.set_defaults(func=cmd_evaluate_graph)

    p = sub.add_parser("train", help="train one model into a versioned artifact")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--model", default="ridge")
    p.add_argument("--params", help="JSON dict of model parameters")
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--version", type=int, default=1)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="comparison tables across the model suite")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--params", help="JSON dict: kind -> parameter overrides")
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--cv-folds", type=int, default=5)
    p.add_argument("--external", action="append", metavar="NAME=CSV",
                   help="external y_true,y_pred file to add to the regression table")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("explain", help="attributions for one record")
    common(p)
    p.add_argument("--artifact", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--row", type=int, default=0)
    p.add_argument("--method", choices=("shap", "lime", "global", "all"), default="all")
    p.add_argument("--samples", type=int, default=200)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("serve", help="run the prediction service")
    p.add_argument("--config", help="service config JSON")
    p.add_argument("--port", type=int)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except CgpakitError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
