"""Command-line interface.

Subcommands: ``run`` (full experiment on a dataset directory), ``tune``
(hyperparameter search log for one split), ``synth`` (write a synthetic
dataset directory), ``ablate`` (run every ablation variant).

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback

import numpy as np

from .errors import DataFormatError
from .io import load_dataset, load_splits, save_dataset
from .pipeline import (
    ABLATION_VARIANTS,
    RunConfig,
    format_table,
    run_experiment,
)
from .synth import SynthConfig, generate_synthetic, stratified_split
from .tuner import SearchSpace, tune, tuning_log_json
from . import pipeline


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; this artifact reserves 2
    # for data errors.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_common_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--budget", type=int, default=200, help="random-search candidates per split")
    p.add_argument("--folds", type=int, default=3, help="training-only CV folds")
    p.add_argument("--seed", type=int, default=0, help="global seed; split i uses seed+i")
    p.add_argument("--coef-bound", type=float, default=2.0, help="coefficient search bound")
    p.add_argument("--delta-h", type=float, default=0.05, help="homophily dead band for a2 sign")


def build_parser() -> _Parser:
    parser = _Parser(prog="greedylabel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run_p = sub.add_parser("run", help="run a full experiment over all splits")
    run_p.add_argument("--dataset", required=True, help="dataset directory")
    run_p.add_argument("--splits", required=True, help="splits.json path")
    run_p.add_argument("--variant", choices=ABLATION_VARIANTS, default="FULL")
    run_p.add_argument("--gate-margin", type=float, default=0.005)
    run_p.add_argument("--out", required=True, help="report JSON path")
    _add_common_run_options(run_p)

    tune_p = sub.add_parser("tune", help="emit the tuning log for one split")
    tune_p.add_argument("--dataset", required=True)
    tune_p.add_argument("--splits", required=True)
    tune_p.add_argument("--split-index", type=int, required=True)
    tune_p.add_argument("--variant", choices=ABLATION_VARIANTS, default="FULL")
    tune_p.add_argument("--out", help="tuning log JSON path (printed summary otherwise)")
    _add_common_run_options(tune_p)

    synth_p = sub.add_parser("synth", help="write a synthetic dataset directory")
    synth_p.add_argument("--n", type=int, required=True)
    synth_p.add_argument("--classes", type=int, required=True)
    synth_p.add_argument("--p-in", type=float, required=True)
    synth_p.add_argument("--p-out", type=float, required=True)
    synth_p.add_argument("--noise", type=float, default=1.0)
    synth_p.add_argument("--d", type=int, default=None, help="feature dimension (default classes+8)")
    synth_p.add_argument("--seed", type=int, default=0)
    synth_p.add_argument("--num-splits", type=int, default=1)
    synth_p.add_argument("--out", required=True, help="output dataset directory")

    ablate_p = sub.add_parser("ablate", help="run all ablation variants")
    ablate_p.add_argument("--dataset", required=True)
    ablate_p.add_argument("--splits", required=True)
    ablate_p.add_argument("--gate-margin", type=float, default=0.005)
    ablate_p.add_argument("--out", required=True, help="output directory for per-variant reports")
    _add_common_run_options(ablate_p)

    return parser


def _cmd_run(args, parser: _Parser) -> int:
    cfg = RunConfig(
        dataset_dir=args.dataset,
        splits_path=args.splits,
        variant=args.variant,
        budget=args.budget,
        folds=args.folds,
        gate_margin=args.gate_margin,
        seed=args.seed,
        coef_bound=args.coef_bound,
        delta_h=args.delta_h,
        out_path=args.out,
    )
    try:
        cfg.validate()
    except ValueError as exc:
        parser.error(str(exc))
    report = run_experiment(cfg)
    print(format_table(report))
    print(f"report written to {args.out}")
    return 0


def _cmd_tune(args, parser: _Parser) -> int:
    graph = load_dataset(args.dataset)
    splits = load_splits(args.splits, graph.n)
    if not 0 <= args.split_index < len(splits):
        parser.error(f"split index {args.split_index} out of range (have {len(splits)})")
    split = splits[args.split_index]
    space = pipeline.apply_ablation_space(
        args.variant,
        SearchSpace(
            budget=args.budget,
            folds=args.folds,
            seed=args.seed + args.split_index,
            coef_bound=args.coef_bound,
            delta_h=args.delta_h,
        ),
    )
    graph_for_tuning = graph
    if space.standardize:
        from .graph import standardize_features

        graph_for_tuning = graph.with_features(standardize_features(graph.features))
    result = tune(graph_for_tuning, split.train, space)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(tuning_log_json(result), fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"tuning log written to {args.out}")
    print(
        f"best cv accuracy {result.cv_mean_accuracy:.4f} "
        f"(a2 range {result.a2_range[0]:+.1f}..{result.a2_range[1]:+.1f})"
    )
    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return 0


def _cmd_synth(args, parser: _Parser) -> int:
    cfg = SynthConfig(
        n=args.n,
        num_classes=args.classes,
        d=args.d if args.d is not None else args.classes + 8,
        p_in=args.p_in,
        p_out=args.p_out,
        feature_noise=args.noise,
        seed=args.seed,
    )
    try:
        cfg.validate()
        if args.num_splits < 1:
            raise ValueError("--num-splits must be >= 1")
    except ValueError as exc:
        parser.error(str(exc))
    graph, first_split = generate_synthetic(cfg)
    splits = [first_split]
    for i in range(1, args.num_splits):
        splits.append(stratified_split(graph.labels, np.random.default_rng([cfg.seed, i])))
    save_dataset(graph, args.out, splits)
    print(
        f"wrote {graph.n} nodes, {graph.num_edges} edges, "
        f"{len(splits)} split(s) to {args.out}"
    )
    return 0


def _cmd_ablate(args, parser: _Parser) -> int:
    import os

    os.makedirs(args.out, exist_ok=True)
    summary = []
    for variant in ABLATION_VARIANTS:
        out_path = os.path.join(args.out, f"report_{variant}.json")
        cfg = RunConfig(
            dataset_dir=args.dataset,
            splits_path=args.splits,
            variant=variant,
            budget=args.budget,
            folds=args.folds,
            gate_margin=args.gate_margin,
            seed=args.seed,
            coef_bound=args.coef_bound,
            delta_h=args.delta_h,
            out_path=out_path,
        )
        report = run_experiment(cfg)
        summary.append((variant, report.mean_accuracy, report.std_accuracy))
        print(format_table(report))
        print()
    width = max(len(v) for v, _, _ in summary)
    print("variant summary:")
    for variant, mean, std in summary:
        print(f"  {variant:<{width}}  {mean:.4f} +- {std:.4f}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "run":
            return _cmd_run(args, parser)
        if args.command == "tune":
            return _cmd_tune(args, parser)
        if args.command == "synth":
            return _cmd_synth(args, parser)
        return _cmd_ablate(args, parser)
    except SystemExit as exc:  # parser.error inside a command
        return int(exc.code or 0)
    except DataFormatError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        traceback.print_exc()
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
