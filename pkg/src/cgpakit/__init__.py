"""cgpakit: causal discovery, CGPA prediction, and explanation toolkit."""

from .schema import FactorSchema, FactorSpec, StudentRecord, default_schema
from .dataset import (NumericDataset, default_policy, deduplicate, encode_and_scale,
                      load_csv, raw_policy, train_test_split)
from .semgen import SemSpec, default_sem_spec, generate_synthetic, hypothesis_dag
from .graphs import (Dag, PartiallyDirectedGraph, WeightedDag, d_separated,
                     export_graph, graph_compare, parse_graph_json, skeleton_f1)
from .stats import (CiResult, CrosstabReport, crosstab, describe, fisher_z_test,
                    partial_correlation, validation_report)
from .discovery import (BicScorer, ViolationReport, bic_score, evaluate_hypothesis_graph,
                        ges_discover, grasp_discover, ica_lingam, pc_discover)
from .linear import (LinearModel, Penalty, elastic_net, fit_linear_family, lasso,
                     no_penalty, ridge)
from .trees import ForestConfig, ForestModel, TreeConfig, TreeModel, fit_forest, fit_tree
from .baselines import fit_baseline_classifier
from .metrics import (CGPA_BANDS, CgpaBand, bin_cgpa, classification_metrics,
                      cross_validate, regression_metrics)
from .explain import (Attribution, GlobalImportance, LimeConfig, LocalExplanation,
                      global_importance, lime_explain, recommend,
                      shapley_brute_force, shapley_exact_linear, shapley_sampled)
from .models import fit_model, model_from_dict, predict
from .artifacts import ModelArtifact, build_artifact
from .pipeline import evaluate_model_suite, train_model_pipeline

__version__ = "0.1.0"
