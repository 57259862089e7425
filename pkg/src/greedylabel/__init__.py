"""Interpretable greedy node classification with a validation-gated neural refiner."""

from .graph import Graph, SplitSpec, build_graph, edge_homophily, standardize_features, symmetrize_dedup
from .io import load_dataset, load_splits, save_dataset
from .pipeline import ExperimentReport, RunConfig, SplitReport, run_experiment, run_split
from .predictor import Diagnostics, HyperParams, PredictionResult, predict
from .refiner import GateDecision, InjectionConfig, RefinerParams, gate, train_refiner
from .stats import TrainStats, compute_train_stats
from .synth import SynthConfig, generate_synthetic
from .tuner import SearchSpace, TuneResult, tune

__version__ = "0.1.0"

__all__ = [
    "Diagnostics",
    "ExperimentReport",
    "GateDecision",
    "Graph",
    "HyperParams",
    "InjectionConfig",
    "PredictionResult",
    "RefinerParams",
    "RunConfig",
    "SearchSpace",
    "SplitReport",
    "SplitSpec",
    "SynthConfig",
    "TrainStats",
    "TuneResult",
    "build_graph",
    "compute_train_stats",
    "edge_homophily",
    "gate",
    "generate_synthetic",
    "load_dataset",
    "load_splits",
    "predict",
    "run_experiment",
    "run_split",
    "save_dataset",
    "standardize_features",
    "symmetrize_dedup",
    "train_refiner",
    "tune",
]
