"""Cross-user activity recognition from body-worn sensors, built on
anatomical sensor graphs, cyclic graph training, and adversarial
user-invariance."""

__version__ = "0.1.0"

from .autodiff import (Adam, BatchNormState, Parameter, ParameterStore, SGD,
                       Value, batchnorm, conv1d, global_mean_pool,
                       grad_reverse, matmul, maxpool1d, relu, run_op_suite,
                       softmax_cross_entropy)
from .data import (LosoSplit, SampleSet, SynthSpec, WindowedSample,
                   generate_synthetic, ingest_dsads, ingest_oppt,
                   make_loso_splits)
from .graphs import (AnatomicalGraph, CycleSchedule, GraphKind, SensorLayout,
                     active_graph, build_analogous, build_interconnected,
                     build_lateral, builtin_layout, load_layout, normalize)
from .model import (ForwardTrace, GraphHarModel, ModelConfig,
                    adversarial_gradient_check)
from .stats import confusion_matrix, pearson
from .train import (EvalResult, RunReport, TrainConfig, evaluate,
                    run_experiment, train_fold)

__all__ = [
    "Adam", "AnatomicalGraph", "BatchNormState", "CycleSchedule", "EvalResult",
    "ForwardTrace", "GraphHarModel", "GraphKind", "LosoSplit", "ModelConfig",
    "Parameter", "ParameterStore", "RunReport", "SGD", "SampleSet",
    "SensorLayout", "SynthSpec", "TrainConfig", "Value", "WindowedSample",
    "active_graph", "adversarial_gradient_check", "batchnorm",
    "build_analogous", "build_interconnected", "build_lateral",
    "builtin_layout", "confusion_matrix", "conv1d", "evaluate",
    "generate_synthetic", "global_mean_pool", "grad_reverse", "ingest_dsads",
    "ingest_oppt", "load_layout", "make_loso_splits", "matmul", "maxpool1d",
    "normalize", "pearson", "relu", "run_experiment", "run_op_suite",
    "softmax_cross_entropy", "train_fold",
]
