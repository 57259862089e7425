"""End-to-end experiment orchestration.

Per split: tune on the training set only, build training statistics,
run the combinatorial predictor on validation and test, train the refiner
and inject the combinatorial priors, gate on validation accuracy, then score
the chosen test predictions. Test labels are read exactly once, in the final
accuracy computation; both candidate test predictions exist before that
point.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .graph import Graph, SplitSpec, standardize_features
from .io import load_dataset, load_splits
from .predictor import Diagnostics, HyperParams, accuracy, predict
from .refiner import (
    GateDecision,
    InjectionConfig,
    compute_lambda,
    forward,
    gate,
    init_refiner_params,
    inject_and_refine,
    train_refiner,
)
from .stats import TrainStats, compute_train_stats
from .synth import SynthConfig, generate_synthetic
from .tuner import SearchSpace, TuneResult, tune

ABLATION_VARIANTS = ("FULL", "NO_STD", "NO_ADAPT_A2", "NO_ADAPT_A8", "TWO_HOP", "DEFER")


@dataclass(frozen=True)
class RefinerSchedule:
    h1: int = 64
    h2: int = 64
    h3: int = 32
    learning_rate: float = 0.01
    epochs: int = 200
    weight_decay: float = 5e-4


@dataclass(frozen=True)
class RunConfig:
    dataset_dir: str | None = None
    splits_path: str | None = None
    synth: SynthConfig | None = None
    variant: str = "FULL"
    budget: int = 200
    folds: int = 3
    gate_margin: float = 0.005
    seed: int = 0
    coef_bound: float = 2.0
    delta_h: float = 0.05
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 20.0
    injection: InjectionConfig = field(default_factory=InjectionConfig)
    refiner: RefinerSchedule = field(default_factory=RefinerSchedule)
    out_path: str | None = None

    def validate(self) -> None:
        file_source = self.dataset_dir is not None
        if file_source == (self.synth is not None):
            raise ValueError("exactly one of dataset_dir and synth must be set")
        if file_source and self.splits_path is None:
            raise ValueError("a dataset directory requires a splits file")
        if self.variant not in ABLATION_VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")


@dataclass(frozen=True)
class SplitReport:
    index: int
    hyperparams: HyperParams
    gate: GateDecision
    test_accuracy: float
    diagnostics: Diagnostics
    tune_seconds: float
    inference_seconds: float
    total_seconds: float


@dataclass(frozen=True)
class SplitOutcome:
    """Everything run_split produced; reports keep only the public subset."""

    report: SplitReport
    tuned: TuneResult
    stats: TrainStats
    comb_val: dict[int, int]
    comb_test: dict[int, int]
    hybrid_val: dict[int, int]
    hybrid_test: dict[int, int]
    injection_strength: float


@dataclass(frozen=True)
class ExperimentReport:
    dataset: str
    variant: str
    splits: list[SplitReport]
    mean_accuracy: float
    std_accuracy: float
    refinement_selected_count: int


def apply_ablation(variant: str, hp: HyperParams) -> HyperParams:
    """Force the flags of one ablation variant onto a HyperParams value."""
    if variant not in ABLATION_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    hp = replace(hp, standardize=True, adapt_a2=True, adapt_a8=True, use_two_hop=False)
    if variant == "NO_STD":
        return replace(hp, standardize=False)
    if variant == "NO_ADAPT_A2":
        return replace(hp, adapt_a2=False)
    if variant == "NO_ADAPT_A8":
        return replace(hp, adapt_a8=False)
    if variant == "TWO_HOP":
        return replace(hp, use_two_hop=True)
    if variant == "DEFER":
        return replace(hp, tau_defer=hp.tau_defer if hp.tau_defer > 0.0 else 0.01)
    return replace(hp, tau_defer=0.0)  # FULL


def apply_ablation_space(variant: str, space: SearchSpace) -> SearchSpace:
    """Adjust a search space so every sampled candidate obeys the variant."""
    if variant not in ABLATION_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    space = replace(
        space,
        standardize=True,
        adapt_a2=True,
        adapt_a8=True,
        use_two_hop=False,
        tau_defer_choices=(0.0,),
    )
    if variant == "NO_STD":
        return replace(space, standardize=False)
    if variant == "NO_ADAPT_A2":
        return replace(space, adapt_a2=False)
    if variant == "NO_ADAPT_A8":
        return replace(space, adapt_a8=False)
    if variant == "TWO_HOP":
        return replace(space, use_two_hop=True)
    if variant == "DEFER":
        return replace(space, tau_defer_choices=(0.01, 0.05))
    return space


def run_split(graph: Graph, split: SplitSpec, cfg: RunConfig, split_seed: int) -> SplitOutcome:
    """Tune, predict, refine, gate, and score a single split."""
    cfg.validate()
    split.validate(graph.n)
    t_start = time.perf_counter()

    space = apply_ablation_space(
        cfg.variant,
        SearchSpace(
            budget=cfg.budget,
            folds=cfg.folds,
            seed=split_seed,
            coef_bound=cfg.coef_bound,
            delta_h=cfg.delta_h,
        ),
    )
    if space.standardize:
        graph = graph.with_features(standardize_features(graph.features))

    def stats_builder(g: Graph, tr: np.ndarray) -> TrainStats:
        return compute_train_stats(g, tr, alpha=cfg.alpha, beta=cfg.beta, gamma=cfg.gamma)

    t0 = time.perf_counter()
    tuned = tune(graph, split.train, space, stats_builder)
    tune_seconds = time.perf_counter() - t0
    hp = tuned.best

    stats = stats_builder(graph, split.train)
    comb_val = predict(graph, split.train, split.val, hp, stats)
    t0 = time.perf_counter()
    comb_test = predict(graph, split.train, split.test, hp, stats)
    inference_seconds = time.perf_counter() - t0

    sched = cfg.refiner
    params = init_refiner_params(
        graph.features.shape[1],
        graph.num_classes,
        h1=sched.h1,
        h2=sched.h2,
        h3=sched.h3,
        learning_rate=sched.learning_rate,
        epochs=sched.epochs,
        weight_decay=sched.weight_decay,
        seed=split_seed,
    )
    trained = train_refiner(graph, graph.features, split.train, graph.labels, params)
    logits = forward(trained, graph, graph.features)
    lam = compute_lambda(stats, cfg.injection)
    comb_all = dict(comb_val.predicted)
    comb_all.update(comb_test.predicted)
    injected = inject_and_refine(logits, comb_all, lam)
    hybrid_val = {int(u): int(np.argmax(injected[u])) for u in split.val.tolist()}
    hybrid_test = {int(u): int(np.argmax(injected[u])) for u in split.test.tolist()}

    val_acc_comb = accuracy(comb_val.predicted, graph.labels, split.val)
    val_acc_hybrid = accuracy(hybrid_val, graph.labels, split.val)
    decision = gate(val_acc_comb, val_acc_hybrid, cfg.gate_margin)

    chosen_test = hybrid_test if decision.chosen == "hybrid" else comb_test.predicted
    test_accuracy = accuracy(chosen_test, graph.labels, split.test)
    total_seconds = time.perf_counter() - t_start

    report = SplitReport(
        index=0,  # set by run_experiment
        hyperparams=hp,
        gate=decision,
        test_accuracy=test_accuracy,
        diagnostics=comb_test.diagnostics,
        tune_seconds=tune_seconds,
        inference_seconds=inference_seconds,
        total_seconds=total_seconds,
    )
    return SplitOutcome(
        report=report,
        tuned=tuned,
        stats=stats,
        comb_val=comb_val.predicted,
        comb_test=comb_test.predicted,
        hybrid_val=hybrid_val,
        hybrid_test=hybrid_test,
        injection_strength=lam,
    )


def load_experiment_inputs(cfg: RunConfig) -> tuple[Graph, list[SplitSpec], str]:
    cfg.validate()
    if cfg.synth is not None:
        graph, split = generate_synthetic(cfg.synth)
        return graph, [split], f"synthetic(seed={cfg.synth.seed})"
    graph = load_dataset(cfg.dataset_dir)
    splits = load_splits(cfg.splits_path, graph.n)
    return graph, splits, str(cfg.dataset_dir)


def run_experiment(cfg: RunConfig) -> ExperimentReport:
    """Run every split with per-split derived seeds and aggregate."""
    graph, splits, dataset_name = load_experiment_inputs(cfg)
    reports: list[SplitReport] = []
    try:
        for i, split in enumerate(splits):
            outcome = run_split(graph, split, cfg, cfg.seed + i)
            reports.append(replace(outcome.report, index=i))
    except Exception:
        if cfg.out_path and reports:
            partial = _aggregate(dataset_name, cfg.variant, reports)
            write_report(partial, cfg.out_path + ".partial")
        raise
    report = _aggregate(dataset_name, cfg.variant, reports)
    if cfg.out_path:
        write_report(report, cfg.out_path)
    return report


def _aggregate(dataset: str, variant: str, reports: list[SplitReport]) -> ExperimentReport:
    accs = np.asarray([r.test_accuracy for r in reports], dtype=np.float64)
    mean = float(accs.mean()) if accs.size else 0.0
    std = float(accs.std(ddof=1)) if accs.size > 1 else 0.0
    selected = sum(1 for r in reports if r.gate.chosen == "hybrid")
    return ExperimentReport(
        dataset=dataset,
        variant=variant,
        splits=reports,
        mean_accuracy=mean,
        std_accuracy=std,
        refinement_selected_count=selected,
    )


def report_to_json(report: ExperimentReport) -> dict:
    return {
        "dataset": report.dataset,
        "variant": report.variant,
        "splits": [
            {
                "index": r.index,
                "hyperparams": asdict(r.hyperparams),
                "gate": {
                    "chosen": r.gate.chosen,
                    "val_acc_comb": r.gate.val_acc_comb,
                    "val_acc_hybrid": r.gate.val_acc_hybrid,
                },
                "test_accuracy": r.test_accuracy,
                "diagnostics": {
                    "tie_rate": r.diagnostics.tie_rate,
                    "mean_margin": r.diagnostics.mean_margin,
                    "deferral_count": r.diagnostics.deferral_count,
                },
                "timings": {
                    "tune_s": r.tune_seconds,
                    "infer_s": r.inference_seconds,
                    "total_s": r.total_seconds,
                },
            }
            for r in report.splits
        ],
        "mean_accuracy": report.mean_accuracy,
        "std_accuracy": report.std_accuracy,
        "refinement_selected_count": report.refinement_selected_count,
    }


def write_report(report: ExperimentReport, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report_to_json(report), fh, indent=2, sort_keys=True)
        fh.write("\n")


def format_table(report: ExperimentReport) -> str:
    """Aligned plain-text summary for terminals."""
    lines = [
        f"dataset: {report.dataset}   variant: {report.variant}",
        f"{'split':>5}  {'test_acc':>8}  {'chosen':>13}  {'val_comb':>8}  "
        f"{'val_hyb':>8}  {'tie_rate':>8}  {'margin':>7}  {'tune_s':>7}  {'total_s':>7}",
    ]
    for r in report.splits:
        lines.append(
            f"{r.index:>5}  {r.test_accuracy:>8.4f}  {r.gate.chosen:>13}  "
            f"{r.gate.val_acc_comb:>8.4f}  {r.gate.val_acc_hybrid:>8.4f}  "
            f"{r.diagnostics.tie_rate:>8.4f}  {r.diagnostics.mean_margin:>7.4f}  "
            f"{r.tune_seconds:>7.2f}  {r.total_seconds:>7.2f}"
        )
    lines.append(
        f"mean accuracy {report.mean_accuracy:.4f} +- {report.std_accuracy:.4f} "
        f"({report.refinement_selected_count}/{len(report.splits)} splits refined)"
    )
    return "\n".join(lines)


def randomize_labels(graph: Graph, nodes: np.ndarray, seed: int) -> Graph:
    """Leakage-audit hook: same graph with `nodes` relabeled uniformly at random."""
    rng = np.random.default_rng(seed)
    labels = graph.labels.copy()
    nodes = np.asarray(nodes, dtype=np.int64)
    labels[nodes] = rng.integers(0, graph.num_classes, size=nodes.size)
    return graph.with_labels(labels)


def leakage_audit(
    graph: Graph, split: SplitSpec, cfg: RunConfig, split_seed: int = 0, noise_seed: int = 0
) -> tuple[SplitOutcome, SplitOutcome]:
    """Run a split twice, the second time with val/test labels randomized.

    Asserts that the tuned hyperparameters, training statistics, and both
    candidate test predictions are identical; only accuracies computed
    against the perturbed labels may move. Returns both outcomes.
    """
    base = run_split(graph, split, cfg, split_seed)
    perturbed_graph = randomize_labels(
        graph, np.concatenate([split.val, split.test]), noise_seed
    )
    alt = run_split(perturbed_graph, split, cfg, split_seed)

    if base.report.hyperparams != alt.report.hyperparams:
        raise AssertionError("leakage: tuned hyperparameters changed")
    same_stats = (
        np.array_equal(base.stats.priors, alt.stats.priors)
        and np.array_equal(base.stats.compat, alt.stats.compat)
        and np.array_equal(base.stats.prototypes, alt.stats.prototypes)
        and base.stats.h == alt.stats.h
        and base.stats.h_raw == alt.stats.h_raw
        and base.stats.train_edges == alt.stats.train_edges
    )
    if not same_stats:
        raise AssertionError("leakage: training statistics changed")
    if base.comb_test != alt.comb_test or base.hybrid_test != alt.hybrid_test:
        raise AssertionError("leakage: test predictions changed")
    if base.comb_val != alt.comb_val or base.hybrid_val != alt.hybrid_val:
        raise AssertionError("leakage: validation predictions changed")
    return base, alt
