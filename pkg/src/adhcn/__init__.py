"""Adaptive dual-channel hypergraph convolution for node classification."""

from .channels import ChannelParams, dropout_mask, hypergraph_channel_forward, le_back_project, le_channel_forward
from .data import Dataset, SchemaError, SplitSpec, SynthConfig, gen_planted_partition, load_hgjson, make_splits, save_hgjson
from .estimator import ADHCNClassifier
from .fusion import AttentionParams, CommConvParams, FusionOutput, attention_fuse, commconv_fuse, fixed_alpha_fuse
from .hypergraph import Hypergraph, InvalidHypergraphError, edge_degrees, hyper_norm_operator, incidence_matrix, node_degrees
from .line_expansion import LEGraph, back_projection_matrix, le_norm_operator, line_expand, projection_matrix
from .metrics import accuracy, confusion, macro_f1, macro_recall
from .model import GraphOperators, ModelParams, NumericalError, classify, compute_gradients, cross_entropy
from .training import AdamState, TrainConfig, TrainReport, adam_step, train

__all__ = [
    "ChannelParams",
    "dropout_mask",
    "hypergraph_channel_forward",
    "le_back_project",
    "le_channel_forward",
    "Dataset",
    "SchemaError",
    "SplitSpec",
    "SynthConfig",
    "gen_planted_partition",
    "load_hgjson",
    "make_splits",
    "save_hgjson",
    "ADHCNClassifier",
    "AttentionParams",
    "CommConvParams",
    "FusionOutput",
    "attention_fuse",
    "commconv_fuse",
    "fixed_alpha_fuse",
    "Hypergraph",
    "InvalidHypergraphError",
    "edge_degrees",
    "hyper_norm_operator",
    "incidence_matrix",
    "node_degrees",
    "LEGraph",
    "back_projection_matrix",
    "le_norm_operator",
    "line_expand",
    "projection_matrix",
    "accuracy",
    "confusion",
    "macro_f1",
    "macro_recall",
    "GraphOperators",
    "ModelParams",
    "NumericalError",
    "classify",
    "compute_gradients",
    "cross_entropy",
    "AdamState",
    "TrainConfig",
    "TrainReport",
    "adam_step",
    "train",
]

__version__ = "0.1.0"
