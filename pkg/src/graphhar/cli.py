"""Command-line front end: reproducible runs from layered configs.

Exit codes: 0 success, 1 verification failure or internal error, 2 config
error, 3 training divergence.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import data as data_mod
from .autodiff import run_op_suite, save_checkpoint
from .autodiff.checkpoint import load_checkpoint, read_checkpoint_meta
from .config import (RunConfig, config_to_dict, parse_modes, resolve_config,
                     write_snapshot)
from .errors import ConfigError, DivergenceError, GraphHarError
from .graphs import SensorLayout, build_all_graphs, builtin_layout_path, load_layout
from .model import GraphHarModel, adversarial_gradient_check, model_from_checkpoint_meta
from .report import load_report, render_report, write_report_files
from .train import evaluate, run_experiment

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_DIVERGED = 3


@dataclass
class CliInvocation:
    subcommand: str
    config: str | None = None
    sets: list[str] = field(default_factory=list)
    out: str | None = None
    seed: int | None = None
    jobs: int = 1
    dataset: str | None = None
    mode: str | None = None
    run_dir: str | None = None
    checkpoint: str | None = None
    inject_fault: str | None = None


def _resolve(inv: CliInvocation) -> RunConfig:
    cfg = resolve_config(inv.config, inv.sets)
    if inv.dataset is not None:
        cfg = replace(cfg, data=replace(cfg.data, dataset=inv.dataset))
    if inv.seed is not None:
        cfg = replace(cfg, train=replace(cfg.train, seed=inv.seed))
    if inv.mode is not None:
        first = parse_modes(inv.mode)[0]
        cfg = replace(cfg, train=replace(cfg.train, mode=first))
    return cfg


def _layout_for(cfg: RunConfig) -> SensorLayout:
    if cfg.data.dataset == "synth":
        return data_mod.synthetic_layout(cfg.data.synth)
    name_or_path = cfg.data.layout
    path = Path(name_or_path)
    if not path.suffix and not path.exists():
        path = builtin_layout_path(name_or_path)
    return load_layout(path)


def _clusters_for(cfg: RunConfig) -> dict[str, list[int]]:
    if cfg.data.clusters is not None:
        return {str(k): [int(v) for v in vs] for k, vs in cfg.data.clusters.items()}
    if cfg.data.dataset == "synth":
        return data_mod.synth_clusters(cfg.data.synth)
    if cfg.data.dataset == "dsads":
        return data_mod.dsads_clusters()
    return data_mod.oppt_clusters()


def _load_dataset(cfg: RunConfig, layout: SensorLayout):
    data_cfg = cfg.data
    if data_cfg.dataset == "synth":
        if data_cfg.root:
            return data_mod.load_samples(data_cfg.root)
        return data_mod.generate_synthetic(data_cfg.synth)
    if not data_cfg.root:
        raise ConfigError(f"data.root is required for dataset {data_cfg.dataset!r}")
    root = Path(data_cfg.root)
    if root.is_file():
        return data_mod.load_samples(root)
    if not root.exists():
        raise ConfigError(f"dataset root not found: {root}")
    clusters = _clusters_for(cfg)
    if data_cfg.dataset == "dsads":
        return data_mod.ingest_dsads(root, layout, clusters,
                                     limit_segments=data_cfg.limit_segments)
    column_map_path = data_cfg.column_map or \
        builtin_layout_path("oppt").with_name("oppt_columns.yaml")
    column_map = data_mod.load_column_map(column_map_path)
    return data_mod.ingest_oppt(root, layout, column_map, clusters,
                                window_len=data_cfg.window_len,
                                overlap=data_cfg.overlap,
                                max_nan_gap=data_cfg.max_nan_gap)


def _model_cfg_for(cfg: RunConfig, samples) -> "RunConfig":
    """Align the model's input geometry with the loaded samples."""
    model = replace(cfg.model, n_nodes=samples.n_nodes,
                    in_channels=samples.n_channels,
                    window_len=samples.window_len)
    if samples.n_classes:
        model = replace(model, n_classes=samples.n_classes)
    return replace(cfg, model=model)


def cmd_train(inv: CliInvocation) -> int:
    cfg = _resolve(inv)
    if not inv.out:
        raise ConfigError("--out is required for train")
    layout = _layout_for(cfg)
    samples = _load_dataset(cfg, layout)
    if len(samples) == 0:
        raise ConfigError("dataset is empty; nothing to train on")
    cfg = _model_cfg_for(cfg, samples)
    clusters = _clusters_for(cfg)
    modes = parse_modes(inv.mode) if inv.mode else [cfg.train.mode]

    outdir = Path(inv.out)
    outdir.mkdir(parents=True, exist_ok=True)
    write_snapshot(outdir, cfg)
    try:
        keep = inv.jobs <= 1
        report, models = run_experiment(samples, clusters, modes, cfg.model,
                                        cfg.train, layout,
                                        dataset=cfg.data.dataset,
                                        jobs=inv.jobs, keep_models=keep)
    except DivergenceError as exc:
        (outdir / "divergence.json").write_text(
            json.dumps({"error": str(exc), "snapshot": exc.snapshot},
                       sort_keys=True, indent=2) + "\n")
        print(f"training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED

    doc = report.to_dict()
    doc["config"] = config_to_dict(cfg)
    write_report_files(outdir, doc)
    for (mode, fold), model in models.items():
        meta = model.checkpoint_meta()
        meta.update({"mode": mode, "fold": fold, "dataset": cfg.data.dataset,
                     "layout": cfg.data.layout})
        save_checkpoint(outdir / f"model_{mode.replace(':', '')}_{fold}.ckpt",
                        model.params, meta)
    for agg in report.modes:
        print(f"{agg.mode}: {100 * agg.mean_accuracy:.2f}% "
              f"+- {100 * agg.std_accuracy:.2f}%")
    print(f"report written to {outdir / 'report.json'}")
    return EXIT_OK


def cmd_eval(inv: CliInvocation) -> int:
    if not inv.checkpoint:
        raise ConfigError("--checkpoint is required for eval")
    cfg = _resolve(inv)
    meta = read_checkpoint_meta(inv.checkpoint)
    model = model_from_checkpoint_meta(meta)
    load_checkpoint(inv.checkpoint, model.params)
    layout = _layout_for(cfg)
    samples = _load_dataset(cfg, layout)
    if len(samples) == 0:
        raise ConfigError("dataset is empty; nothing to evaluate")
    graphs = build_all_graphs(layout)
    a_hats = [g.normalized for g in graphs.values()]
    result = evaluate(model, samples.x.astype(model.config.np_dtype()),
                      samples.y, a_hats)
    print(f"accuracy: {100 * result.accuracy:.2f}% over {len(samples)} samples")
    if inv.out:
        outdir = Path(inv.out)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "eval.json").write_text(json.dumps({
            "accuracy": result.accuracy,
            "confusion": result.confusion.tolist(),
            "checkpoint": str(inv.checkpoint),
        }, sort_keys=True, indent=2) + "\n")
    return EXIT_OK


def cmd_gradcheck(inv: CliInvocation) -> int:
    seed = inv.seed if inv.seed is not None else 0
    checks = run_op_suite(seed=seed, flip_sign_of=inv.inject_fault)
    failed = []
    for check in checks:
        status = "ok" if check.passed else "FAIL"
        print(f"{check.op:24s} max_rel_err={check.max_rel_error:.3e} "
              f"tol={check.tolerance:.0e} {status}")
        if not check.passed:
            failed.append(check.op)

    reversal_err = adversarial_gradient_check(betas=(0.0, 0.5, 1.0), seed=seed)
    status = "ok" if reversal_err < 1e-10 else "FAIL"
    print(f"{'model_reversal':24s} max_rel_err={reversal_err:.3e} tol=1e-10 {status}")
    if reversal_err >= 1e-10:
        failed.append("model_reversal")

    zero_lambda_err = adversarial_gradient_check(betas=(1.0,), seed=seed, lam=0.0)
    status = "ok" if zero_lambda_err < 1e-10 else "FAIL"
    print(f"{'zero_lambda_reversal':24s} max_rel_err={zero_lambda_err:.3e} "
          f"tol=1e-10 {status}")
    if zero_lambda_err >= 1e-10:
        failed.append("zero_lambda_reversal")

    if failed:
        print(f"gradient checks failed for: {', '.join(failed)}", file=sys.stderr)
        return EXIT_FAIL
    print("all gradient checks passed")
    return EXIT_OK


def cmd_gen_synth(inv: CliInvocation) -> int:
    cfg = _resolve(inv)
    if not inv.out:
        raise ConfigError("--out is required for gen-synth")
    spec = cfg.data.synth
    if inv.seed is not None:
        spec = replace(spec, seed=inv.seed)
        cfg = replace(cfg, data=replace(cfg.data, synth=spec))
    samples = data_mod.generate_synthetic(spec)
    outdir = Path(inv.out)
    outdir.mkdir(parents=True, exist_ok=True)
    write_snapshot(outdir, cfg)
    data_mod.save_samples(outdir / "synthetic.ghd", samples,
                          extra_meta={"clusters": data_mod.synth_clusters(spec)})
    print(f"wrote {len(samples)} samples to {outdir / 'synthetic.ghd'}")
    return EXIT_OK


def cmd_ingest(inv: CliInvocation) -> int:
    cfg = _resolve(inv)
    if not inv.out:
        raise ConfigError("--out is required for ingest")
    if cfg.data.dataset == "synth":
        raise ConfigError("ingest expects --dataset dsads or oppt")
    layout = _layout_for(cfg)
    samples = _load_dataset(cfg, layout)
    outdir = Path(inv.out)
    outdir.mkdir(parents=True, exist_ok=True)
    write_snapshot(outdir, cfg)
    cache = outdir / f"{cfg.data.dataset}.ghd"
    data_mod.save_samples(cache, samples,
                          extra_meta={"clusters": _clusters_for(cfg)})
    print(f"wrote {len(samples)} samples to {cache}")
    return EXIT_OK


def cmd_report(inv: CliInvocation) -> int:
    report = load_report(inv.run_dir)
    print(render_report(report), end="")
    return EXIT_OK


_COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "gradcheck": cmd_gradcheck,
    "gen-synth": cmd_gen_synth,
    "ingest": cmd_ingest,
    "report": cmd_report,
}


def _add_common(parser):
    parser.add_argument("--config", help="YAML config file")
    parser.add_argument("--set", dest="sets", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config key")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int, help="override train.seed")
    parser.add_argument("--jobs", type=int, default=1,
                        help="parallel fold workers")
    parser.add_argument("--dataset", choices=["dsads", "oppt", "synth"],
                        help="override data.dataset")
    parser.add_argument("--mode",
                        help="mode or comma list: fusion, single:I, single:A, "
                             "single:L, baseline, all")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphhar",
        description="Train and evaluate anatomical-graph activity recognizers.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in ("train", "gen-synth", "ingest"):
        _add_common(sub.add_parser(name))
    eval_parser = sub.add_parser("eval")
    _add_common(eval_parser)
    eval_parser.add_argument("--checkpoint", help="trained model checkpoint")
    grad_parser = sub.add_parser("gradcheck")
    _add_common(grad_parser)
    grad_parser.add_argument("--inject-fault", dest="inject_fault",
                             metavar="OP",
                             help="test hook: flip the named op's gradient sign")
    report_parser = sub.add_parser("report")
    _add_common(report_parser)
    report_parser.add_argument("run_dir", help="directory holding report.json")
    return parser


def invocation_from_args(args) -> CliInvocation:
    return CliInvocation(
        subcommand=args.subcommand,
        config=getattr(args, "config", None),
        sets=list(getattr(args, "sets", [])),
        out=getattr(args, "out", None),
        seed=getattr(args, "seed", None),
        jobs=getattr(args, "jobs", 1),
        dataset=getattr(args, "dataset", None),
        mode=getattr(args, "mode", None),
        run_dir=getattr(args, "run_dir", None),
        checkpoint=getattr(args, "checkpoint", None),
        inject_fault=getattr(args, "inject_fault", None),
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    inv = invocation_from_args(args)
    try:
        return _COMMANDS[inv.subcommand](inv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except GraphHarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
