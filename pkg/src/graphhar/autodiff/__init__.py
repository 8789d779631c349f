"""Minimal reverse-mode differentiation core: exactly the ops the model needs."""
from .checkpoint import load_checkpoint, read_checkpoint_meta, save_checkpoint
from .gradcheck import OP_NAMES, OpCheck, fd_check, max_rel_error, run_op_suite
from .ops import (BatchNormState, batchnorm, conv1d, global_mean_pool,
                  grad_reverse, maxpool1d, softmax_cross_entropy)
from .optim import SGD, Adam, make_optimizer
from .params import Parameter, ParameterStore
from .value import Value, matmul, relu, unbroadcast

__all__ = [
    "Adam", "BatchNormState", "OP_NAMES", "OpCheck", "Parameter",
    "ParameterStore", "SGD", "Value", "batchnorm", "conv1d", "fd_check",
    "global_mean_pool", "grad_reverse", "load_checkpoint", "make_optimizer",
    "matmul", "max_rel_error", "maxpool1d", "read_checkpoint_meta", "relu",
    "run_op_suite", "save_checkpoint", "softmax_cross_entropy", "unbroadcast",
]
