"""Noise-aware active learning for network alignment."""

from .aligners import (
    AlignerConfig,
    ModelState,
    build_prior,
    estimate_accuracy,
    final_lite_align,
    isorank_align,
    predicted_label,
    row_probabilities,
)
from .denoising import LabeledPair, find_twin_pair, fuse_labels, label_batch, model_assisted_label
from .graphs import (
    Graph,
    NetworkPair,
    NoiseSpec,
    inject_structural_noise,
    load_attributes,
    load_edge_list,
    load_groundtruth,
    normalized_adjacency,
    structural_features,
    synthesize_pair,
    two_hop_features,
)
from .harness import DatasetSpec, ExperimentConfig, RunLog, run_experiment, sweep
from .influence import InfluenceField, compute_influence, influence_row
from .metrics import MetricsReport, acc_at_k, baseline_select, evaluate, map_score
from .oracle import BudgetExhaustedError, Oracle
from .selection import (
    ActivationSet,
    CandidatePair,
    SelectionConfig,
    activated_nodes,
    cleanliness_score,
    greedy_select,
    model_confidence,
    node_cleanliness,
    posterior_confidence,
    selection_confidence,
)

__all__ = [
    "ActivationSet",
    "AlignerConfig",
    "BudgetExhaustedError",
    "CandidatePair",
    "DatasetSpec",
    "ExperimentConfig",
    "Graph",
    "InfluenceField",
    "LabeledPair",
    "MetricsReport",
    "ModelState",
    "NetworkPair",
    "NoiseSpec",
    "Oracle",
    "RunLog",
    "SelectionConfig",
    "acc_at_k",
    "activated_nodes",
    "baseline_select",
    "build_prior",
    "cleanliness_score",
    "compute_influence",
    "estimate_accuracy",
    "evaluate",
    "final_lite_align",
    "find_twin_pair",
    "fuse_labels",
    "greedy_select",
    "influence_row",
    "inject_structural_noise",
    "isorank_align",
    "label_batch",
    "load_attributes",
    "load_edge_list",
    "load_groundtruth",
    "map_score",
    "model_assisted_label",
    "model_confidence",
    "node_cleanliness",
    "normalized_adjacency",
    "posterior_confidence",
    "predicted_label",
    "row_probabilities",
    "run_experiment",
    "selection_confidence",
    "structural_features",
    "sweep",
    "synthesize_pair",
    "two_hop_features",
]
