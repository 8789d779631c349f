"""Cyclic training over the anatomical graph families, fold evaluation, and
per-run metric collection."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .autodiff import make_optimizer
from .data.samples import SampleSet, apply_zscore, channel_stats
from .data.splits import LosoSplit, make_loso_splits
from .errors import ConfigError, DivergenceError, TraceError, UndefinedCorrelationError
from .graphs import (CYCLE_ORDER, CycleSchedule, GraphKind, SensorLayout,
                     active_graph, build_all_graphs, identity_adjacency)
from .model import GraphHarModel, ModelConfig
from .stats import accuracy_from_confusion, confusion_matrix, pearson

MODES = ("fusion", "single:I", "single:A", "single:L", "baseline")

_SINGLE_KINDS = {"I": GraphKind.INTERCONNECTED, "A": GraphKind.ANALOGOUS,
                 "L": GraphKind.LATERAL}


def parse_mode(mode: str) -> tuple[str, GraphKind | None]:
    """Returns (strategy, fixed graph kind or None)."""
    if mode == "fusion":
        return "fusion", None
    if mode == "baseline":
        return "baseline", None
    if mode.startswith("single:"):
        key = mode.split(":", 1)[1].upper()
        if key in _SINGLE_KINDS:
            return "single", _SINGLE_KINDS[key]
    raise ConfigError(f"unknown mode {mode!r}; expected one of {MODES}")


@dataclass(frozen=True)
class TrainConfig:
    epochs_total: int = 12
    phase_len: int = 2            # epochs per graph family before rotating
    beta: float = 1.0             # weight of the reversed discriminator loss
    grl_lambda: float = 1.0
    optimizer: str = "adam"
    lr: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    sgd_momentum: float = 0.0
    batch_size: int = 32
    seed: int = 0
    mode: str = "fusion"
    zscore: bool = True

    def __post_init__(self):
        if self.epochs_total < 1:
            raise ConfigError(f"epochs_total must be >= 1, got {self.epochs_total}")
        if self.phase_len < 1:
            raise ConfigError(f"phase_len must be >= 1, got {self.phase_len}")
        if self.batch_size < 2:
            raise ConfigError(f"batch_size must be >= 2, got {self.batch_size}")
        parse_mode(self.mode)

    def make_optimizer(self, params):
        if self.optimizer == "adam":
            return make_optimizer("adam", params, lr=self.lr, beta1=self.adam_beta1,
                                  beta2=self.adam_beta2, eps=self.adam_eps)
        if self.optimizer == "sgd":
            return make_optimizer("sgd", params, lr=self.lr,
                                  momentum=self.sgd_momentum)
        raise ConfigError(f"unknown optimizer {self.optimizer!r}")


@dataclass
class EpochRecord:
    epoch: int
    graph: str
    loss_total: float
    loss_activity: float
    loss_domain: float
    train_accuracy: float
    test_accuracy: float


@dataclass
class EvalResult:
    accuracy: float
    confusion: np.ndarray
    predictions: np.ndarray


@dataclass
class RunReport:
    mode: str
    fold: str
    seed: int
    n_domains: int
    effective_beta: float
    epochs: list[EpochRecord]
    final_accuracy: float
    confusion: list[list[int]]
    pearson_activity: tuple[float, float] | None
    pearson_domain: tuple[float, float] | None
    normalization_mean: list[list[float]] | None
    normalization_std: list[list[float]] | None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["epochs"] = [asdict(e) for e in self.epochs]
        return out


def _epoch_graphs(mode: str, graphs, n_nodes: int, schedule: CycleSchedule):
    """Per-epoch propagation selector and the matrices used at evaluation."""
    strategy, fixed = parse_mode(mode)
    if strategy == "fusion":
        rotation = {kind: graphs[kind].normalized for kind in CYCLE_ORDER}

        def pick(epoch):
            kind = active_graph(epoch, schedule)
            return kind.value, rotation[kind]

        return pick, list(rotation.values())
    if strategy == "single":
        matrix = graphs[fixed].normalized
        return (lambda epoch: (fixed.value, matrix)), [matrix]
    identity = identity_adjacency(n_nodes)
    return (lambda epoch: ("identity", identity)), [identity]


def _batches(n: int, batch_size: int, rng: np.random.Generator):
    """Shuffled mini-batches; a trailing single sample is merged into the
    previous batch so train-mode batch statistics stay defined."""
    order = rng.permutation(n)
    bounds = list(range(0, n, batch_size))
    for i, start in enumerate(bounds):
        stop = start + batch_size
        if n - stop == 1:
            yield order[start:]
            return
        yield order[start:stop]


def predict_logits(model: GraphHarModel, x: np.ndarray, a_hats,
                   batch_size: int = 256) -> np.ndarray:
    """Eval-mode activity logits averaged over the given propagation matrices."""
    outputs = np.zeros((x.shape[0], model.config.n_classes), dtype=np.float64)
    for start in range(0, x.shape[0], batch_size):
        chunk = x[start:start + batch_size]
        for a_hat in a_hats:
            activity, _, _ = model.forward(chunk, a_hat, mode="eval")
            outputs[start:start + chunk.shape[0]] += activity.data
    return outputs / len(a_hats)


def evaluate(model: GraphHarModel, x: np.ndarray, y: np.ndarray, a_hats,
             n_classes: int | None = None, batch_size: int = 256) -> EvalResult:
    """Argmax accuracy and confusion matrix (rows = true class)."""
    n_classes = n_classes or model.config.n_classes
    logits = predict_logits(model, x, a_hats, batch_size)
    predictions = logits.argmax(axis=1)
    matrix = confusion_matrix(y, predictions, n_classes)
    return EvalResult(accuracy=accuracy_from_confusion(matrix),
                      confusion=matrix, predictions=predictions)


def _series_pearson(xs, ys):
    try:
        return pearson(xs, ys)
    except UndefinedCorrelationError:
        return None


def train_fold(samples: SampleSet, split: LosoSplit, model_cfg: ModelConfig,
               train_cfg: TrainConfig, layout: SensorLayout,
               fold_index: int = 0) -> tuple[GraphHarModel, RunReport]:
    """Train on every cluster but the held-out one and report the run."""
    dtype = model_cfg.np_dtype()
    x_train = samples.x[split.train_idx].astype(dtype)
    y_train = samples.y[split.train_idx]
    d_train = split.train_domains
    x_test = samples.x[split.test_idx].astype(dtype)
    y_test = samples.y[split.test_idx]

    norm_mean = norm_std = None
    if train_cfg.zscore:
        stats = channel_stats(x_train)
        x_train = apply_zscore(x_train, stats).astype(dtype)
        x_test = apply_zscore(x_test, stats).astype(dtype)
        norm_mean = stats.mean.tolist()
        norm_std = stats.std.tolist()

    graphs = build_all_graphs(layout)
    schedule = CycleSchedule(phase_len=train_cfg.phase_len)
    pick_graph, eval_graphs = _epoch_graphs(train_cfg.mode, graphs,
                                            layout.n_positions, schedule)
    effective_beta = 0.0 if train_cfg.mode == "baseline" else train_cfg.beta

    init_rng = np.random.default_rng([train_cfg.seed, fold_index, 0])
    shuffle_rng = np.random.default_rng([train_cfg.seed, fold_index, 1])
    model = GraphHarModel(model_cfg, n_domains=split.n_domains, rng=init_rng)
    optimizer = train_cfg.make_optimizer(model.params)

    records: list[EpochRecord] = []
    for epoch in range(train_cfg.epochs_total):
        graph_name, a_hat = pick_graph(epoch)
        sum_total = sum_activity = sum_domain = 0.0
        for batch in _batches(len(split.train_idx), train_cfg.batch_size,
                              shuffle_rng):
            optimizer.zero_grad()
            try:
                total, l_act, l_dom, _ = model.phase_loss(
                    x_train[batch], y_train[batch], d_train[batch], a_hat,
                    beta=effective_beta, lam=train_cfg.grl_lambda, mode="train")
            except TraceError as exc:
                raise DivergenceError(
                    f"non-finite forward values at epoch {epoch}: {exc}",
                    snapshot={"epoch": epoch, "graph": graph_name,
                              "mode": train_cfg.mode}) from exc
            if not np.isfinite(total.data):
                raise DivergenceError(
                    f"non-finite loss at epoch {epoch}",
                    snapshot={"epoch": epoch, "graph": graph_name,
                              "mode": train_cfg.mode,
                              "loss_activity": float(l_act.data),
                              "loss_domain": float(l_dom.data)})
            total.backward()
            optimizer.step()
            weight = batch.size
            sum_total += float(total.data) * weight
            sum_activity += float(l_act.data) * weight
            sum_domain += float(l_dom.data) * weight

        n_train = len(split.train_idx)
        train_eval = evaluate(model, x_train, y_train, [a_hat])
        test_eval = evaluate(model, x_test, y_test, [a_hat])
        records.append(EpochRecord(
            epoch=epoch, graph=graph_name,
            loss_total=sum_total / n_train,
            loss_activity=sum_activity / n_train,
            loss_domain=sum_domain / n_train,
            train_accuracy=train_eval.accuracy,
            test_accuracy=test_eval.accuracy))

    final = evaluate(model, x_test, y_test, eval_graphs)
    test_curve = [r.test_accuracy for r in records]
    report = RunReport(
        mode=train_cfg.mode, fold=split.held_out, seed=train_cfg.seed,
        n_domains=split.n_domains, effective_beta=effective_beta,
        epochs=records, final_accuracy=final.accuracy,
        confusion=final.confusion.tolist(),
        pearson_activity=_series_pearson([r.loss_activity for r in records],
                                         test_curve),
        pearson_domain=_series_pearson([r.loss_domain for r in records],
                                       test_curve),
        normalization_mean=norm_mean, normalization_std=norm_std)
    return model, report


@dataclass
class ModeAggregate:
    mode: str
    fold_accuracies: dict[str, float]
    mean_accuracy: float
    std_accuracy: float
    confusion: list[list[int]]
    pearson_activity: tuple[float, float] | None
    pearson_domain: tuple[float, float] | None


@dataclass
class ExperimentReport:
    schema_version: int
    dataset: str
    modes: list[ModeAggregate]
    runs: list[RunReport]

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "dataset": self.dataset,
            "modes": [asdict(m) for m in self.modes],
            "runs": [r.to_dict() for r in self.runs],
        }


SCHEMA_VERSION = 1


def _run_one(args):
    samples, split, model_cfg, train_cfg, layout, fold_index, mode = args
    cfg = TrainConfig(**{**asdict(train_cfg), "mode": mode})
    _, report = train_fold(samples, split, model_cfg, cfg, layout, fold_index)
    return report


def run_experiment(samples: SampleSet, clusters: dict[str, list[int]],
                   modes, model_cfg: ModelConfig, train_cfg: TrainConfig,
                   layout: SensorLayout, dataset: str = "synth",
                   jobs: int = 1,
                   keep_models: bool = False):
    """Folds x modes grid; aggregates mean/std accuracy and pooled statistics.

    Returns (ExperimentReport, models) where models maps (mode, fold) to the
    trained model when ``keep_models`` is set (serial execution only).
    """
    splits = make_loso_splits(samples, clusters)
    tasks = [(samples, split, model_cfg, train_cfg, layout, fi, mode)
             for mode in modes for fi, split in enumerate(splits)]

    models = {}
    if jobs > 1 and not keep_models:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_run_one, tasks))
    else:
        runs = []
        for task in tasks:
            if keep_models:
                samples_, split, mcfg, tcfg, layout_, fi, mode = task
                cfg = TrainConfig(**{**asdict(tcfg), "mode": mode})
                model, report = train_fold(samples_, split, mcfg, cfg, layout_, fi)
                models[(mode, split.held_out)] = model
                runs.append(report)
            else:
                runs.append(_run_one(task))

    aggregates = []
    for mode in modes:
        mode_runs = [r for r in runs if r.mode == mode]
        accs = np.array([r.final_accuracy for r in mode_runs])
        confusion = np.sum([np.asarray(r.confusion) for r in mode_runs], axis=0)
        activity_series = [e.loss_activity for r in mode_runs for e in r.epochs]
        domain_series = [e.loss_domain for r in mode_runs for e in r.epochs]
        acc_series = [e.test_accuracy for r in mode_runs for e in r.epochs]
        aggregates.append(ModeAggregate(
            mode=mode,
            fold_accuracies={r.fold: r.final_accuracy for r in mode_runs},
            mean_accuracy=float(accs.mean()),
            std_accuracy=float(accs.std(ddof=1)) if accs.size > 1 else 0.0,
            confusion=confusion.tolist(),
            pearson_activity=_series_pearson(activity_series, acc_series),
            pearson_domain=_series_pearson(domain_series, acc_series)))

    report = ExperimentReport(schema_version=SCHEMA_VERSION, dataset=dataset,
                              modes=aggregates, runs=runs)
    return report, models
