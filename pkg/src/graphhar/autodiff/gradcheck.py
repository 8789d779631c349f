"""Central finite-difference verification for every differentiable op.

Each check builds the op inside a random linear functional (so every output
element is weighted), differentiates analytically, and compares against
central differences at 64-bit precision. The reversal op is verified by its
defining dual-graph property instead, since its backward intentionally
disagrees with the forward map's true derivative.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ops import (BatchNormState, batchnorm, conv1d, global_mean_pool,
                  grad_reverse, maxpool1d, softmax_cross_entropy)
from .value import Value, matmul

DEFAULT_STEP = 1e-5
SMOOTH_TOL = 1e-6
KINKED_TOL = 1e-4
REVERSAL_TOL = 1e-12


@dataclass
class OpCheck:
    op: str
    max_rel_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance


def max_rel_error(analytic, numeric) -> float:
    scale = max(float(np.abs(analytic).max(initial=0.0)),
                float(np.abs(numeric).max(initial=0.0)), 1e-8)
    return float(np.abs(analytic - numeric).max(initial=0.0)) / scale


def fd_check(make_output, arrays, rng, step: float = DEFAULT_STEP,
             flip_sign: bool = False) -> float:
    """Compare backward() against central differences for each input array.

    ``make_output`` maps a list of Value leaves to the op output (any shape);
    a fixed random weighting turns it into a scalar so the whole Jacobian is
    exercised. Returns the worst relative error across all inputs.
    """
    arrays = [np.asarray(a, dtype=np.float64) for a in arrays]

    probe = make_output([Value(a) for a in arrays])
    weights = rng.standard_normal(probe.data.size)

    def loss_value(values):
        out = make_output(values)
        flat = out.reshape(1, out.data.size)
        return matmul(flat, Value(weights.reshape(-1, 1))).sum()

    leaves = [Value(a) for a in arrays]
    loss_value(leaves).backward()
    analytic = [leaf.grad * (-1.0 if flip_sign else 1.0) for leaf in leaves]

    worst = 0.0
    for idx, base in enumerate(arrays):
        numeric = np.zeros_like(base)
        flat = base.ravel()
        num_flat = numeric.ravel()
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + step
            up = float(loss_value([Value(a) for a in arrays]).data)
            flat[i] = keep - step
            down = float(loss_value([Value(a) for a in arrays]).data)
            flat[i] = keep
            num_flat[i] = (up - down) / (2.0 * step)
        worst = max(worst, max_rel_error(analytic[idx], numeric))
    return worst


def _away_from_zero(rng, shape, margin=0.25):
    data = rng.standard_normal(shape)
    return data + margin * np.sign(data)


# -- per-op checks ---------------------------------------------------------------

def _check_matmul(rng, flip):
    shapes = [((4, 3), (3, 2)), ((2, 5), (5, 5)), ((3, 4, 3), (3, 2))]
    a_shape, b_shape = shapes[rng.integers(len(shapes))]
    return fd_check(lambda v: matmul(v[0], v[1]),
                    [rng.standard_normal(a_shape), rng.standard_normal(b_shape)],
                    rng, flip_sign=flip)


def _check_conv1d(rng, flip):
    stride = int(rng.integers(1, 3))
    padding = int(rng.integers(0, 3))
    x = rng.standard_normal((3, 32))
    k = rng.standard_normal((4, 3, 5))
    b = rng.standard_normal(4)
    return fd_check(lambda v: conv1d(v[0], v[1], v[2], stride=stride, padding=padding),
                    [x, k, b], rng, flip_sign=flip)


def _check_batchnorm(mode):
    def check(rng, flip):
        x = rng.standard_normal((8, 6))
        gamma = 0.5 + rng.random(6)
        beta = rng.standard_normal(6)

        def build(values):
            state = BatchNormState(6)
            state.running_mean[...] = 0.1
            state.running_var[...] = 1.3
            return batchnorm(values[0], values[1], values[2], state,
                             mode=mode, axis=1)

        return fd_check(build, [x, gamma, beta], rng, flip_sign=flip)

    return check


def _check_relu(rng, flip):
    x = _away_from_zero(rng, (5, 7))
    return fd_check(lambda v: v[0].relu(), [x], rng, flip_sign=flip)


def _check_maxpool1d(rng, flip):
    window = int(rng.integers(2, 4))
    x = rng.standard_normal((3, 17))
    return fd_check(lambda v: maxpool1d(v[0], window), [x], rng, flip_sign=flip)


def _check_global_mean_pool(rng, flip):
    x = rng.standard_normal((4, 5, 6))
    return fd_check(lambda v: global_mean_pool(v[0]), [x], rng, flip_sign=flip)


def _check_softmax_cross_entropy(rng, flip):
    logits = rng.standard_normal((4, 5))
    targets = rng.integers(0, 5, size=4)
    return fd_check(lambda v: softmax_cross_entropy(v[0], targets),
                    [logits], rng, flip_sign=flip)


def _check_add(rng, flip):
    a = rng.standard_normal((4, 6))
    b = rng.standard_normal(6)
    return fd_check(lambda v: v[0] + v[1], [a, b], rng, flip_sign=flip)


def _check_scale(rng, flip):
    x = rng.standard_normal((3, 4))
    c = float(rng.standard_normal())
    return fd_check(lambda v: v[0] * c, [x], rng, flip_sign=flip)


def _check_sum(rng, flip):
    x = rng.standard_normal((2, 3, 4))
    return fd_check(lambda v: v[0].sum().reshape(1), [x], rng, flip_sign=flip)


def _check_reshape(rng, flip):
    x = rng.standard_normal((3, 8))
    return fd_check(lambda v: v[0].reshape(4, 6), [x], rng, flip_sign=flip)


def _check_grad_reverse(rng, flip):
    """Dual-graph property: grads equal -lam times the same graph without GRL."""
    lam = float(rng.uniform(0.2, 2.0))
    x_data = rng.standard_normal((4, 5))
    w_data = rng.standard_normal((5, 3))

    x1 = Value(x_data)
    out = matmul(grad_reverse(x1, lam), Value(w_data)).relu().sum()
    if not np.array_equal(out.data, np.maximum(x_data @ w_data, 0).sum()):
        return float("inf")
    out.backward()

    x2 = Value(x_data)
    matmul(x2, Value(w_data)).relu().sum().backward()

    flipped = x1.grad * (-1.0 if flip else 1.0)
    return max_rel_error(flipped, -lam * x2.grad)


_CHECKS = {
    "matmul": (_check_matmul, SMOOTH_TOL),
    "conv1d": (_check_conv1d, SMOOTH_TOL),
    "batchnorm_train": (_check_batchnorm("train"), KINKED_TOL),
    "batchnorm_eval": (_check_batchnorm("eval"), KINKED_TOL),
    "relu": (_check_relu, KINKED_TOL),
    "maxpool1d": (_check_maxpool1d, KINKED_TOL),
    "global_mean_pool": (_check_global_mean_pool, SMOOTH_TOL),
    "softmax_cross_entropy": (_check_softmax_cross_entropy, SMOOTH_TOL),
    "grad_reverse": (_check_grad_reverse, REVERSAL_TOL),
    "add": (_check_add, SMOOTH_TOL),
    "scale": (_check_scale, SMOOTH_TOL),
    "sum": (_check_sum, SMOOTH_TOL),
    "reshape": (_check_reshape, SMOOTH_TOL),
}

OP_NAMES = tuple(_CHECKS)


def run_op_suite(seed: int = 0, instances: int = 10,
                 flip_sign_of: str | None = None) -> list[OpCheck]:
    """Run every op check over seeded random instances.

    ``flip_sign_of`` is a fault-injection hook for exercising the failure
    path: it negates the analytic gradient of the named op.
    """
    if flip_sign_of is not None and flip_sign_of not in _CHECKS:
        raise ValueError(f"unknown op {flip_sign_of!r}; known ops: {sorted(_CHECKS)}")
    results = []
    for op_index, (op, (check, tol)) in enumerate(_CHECKS.items()):
        rng = np.random.default_rng([seed, op_index])
        flip = op == flip_sign_of
        worst = 0.0
        for _ in range(instances):
            worst = max(worst, check(rng, flip))
        results.append(OpCheck(op=op, max_rel_error=worst, tolerance=tol))
    return results
