"""Network operations over :class:`~graphhar.autodiff.value.Value` nodes.

Single instances use the 2-D shapes given in each docstring; every op also
accepts a leading batch axis, which is what the model uses.
"""
from __future__ import annotations

import math

import numpy as np
from numpy.lib.stride_tricks import as_strided

from ..errors import DegenerateBatchError, LabelError, ShapeError
from .value import Value


def _batched(x: Value, ndim: int) -> tuple[np.ndarray, bool]:
    """View x.data with a leading batch axis; report whether one was added."""
    if x.data.ndim == ndim:
        return x.data[None], True
    if x.data.ndim == ndim + 1:
        return x.data, False
    raise ShapeError(f"expected a {ndim}-D or {ndim + 1}-D array, got {x.data.shape}")


# -- convolution --------------------------------------------------------------

def conv1d(x: Value, kernels: Value, bias: Value, stride: int = 1,
           padding: int = 0) -> Value:
    """Cross-correlation of [C_in, T] (or [B, C_in, T]) with [C_out, C_in, W]."""
    if stride < 1 or padding < 0:
        raise ShapeError(f"conv1d needs stride >= 1 and padding >= 0, "
                         f"got stride={stride}, padding={padding}")
    data, single = _batched(x, 2)
    if kernels.data.ndim != 3:
        raise ShapeError(f"conv1d kernels must be [C_out, C_in, W], got {kernels.data.shape}")
    n_out, n_in, width = kernels.data.shape
    if data.shape[1] != n_in:
        raise ShapeError(f"conv1d channel mismatch: input {data.shape} vs "
                         f"kernels {kernels.data.shape}")
    if bias.data.shape != (n_out,):
        raise ShapeError(f"conv1d bias must be [C_out]={n_out}, got {bias.data.shape}")
    length = data.shape[2]
    padded_len = length + 2 * padding
    if padded_len < width:
        raise ShapeError(f"conv1d window of {width} does not fit the padded "
                         f"input of length {padded_len}")
    out_len = (padded_len - width) // stride + 1

    padded = np.pad(data, ((0, 0), (0, 0), (padding, padding)))
    sb, sc, st = padded.strides
    patches = as_strided(
        padded,
        shape=(data.shape[0], n_in, out_len, width),
        strides=(sb, sc, st * stride, st),
    )
    out = np.einsum("oiw,bitw->bot", kernels.data, patches) + bias.data[None, :, None]
    out = out.astype(x.dtype, copy=False)

    def vjp(g):
        g3 = g[None] if single else g
        d_bias = g3.sum(axis=(0, 2)).astype(bias.dtype, copy=False)
        d_kernels = np.einsum("bot,bitw->oiw", g3, patches).astype(kernels.dtype, copy=False)
        d_padded = np.zeros_like(padded)
        for w in range(width):
            stop = w + stride * (out_len - 1) + 1
            d_padded[:, :, w:stop:stride] += np.einsum("bot,oi->bit", g3, kernels.data[:, :, w])
        d_x = d_padded[:, :, padding:padding + length] if padding else d_padded
        if single:
            d_x = d_x[0]
        return d_x, d_kernels, d_bias

    return Value(out[0] if single else out, parents=(x, kernels, bias),
                 vjp=vjp, op="conv1d")


# -- pooling ------------------------------------------------------------------

def maxpool1d(x: Value, window: int, stride: int | None = None) -> Value:
    """Windowed max over the time axis of [C, T] (or [B, C, T]).

    Ties route the gradient to the earliest maximal index.
    """
    if stride is None:
        stride = window
    if window < 1 or stride < 1:
        raise ShapeError(f"maxpool1d needs window >= 1 and stride >= 1, "
                         f"got window={window}, stride={stride}")
    data, single = _batched(x, 2)
    batch, chans, length = data.shape
    if length < window:
        raise ShapeError(f"maxpool1d window of {window} does not fit input of "
                         f"length {length}")
    out_len = (length - window) // stride + 1
    sb, sc, st = data.strides
    windows = as_strided(data, shape=(batch, chans, out_len, window),
                         strides=(sb, sc, st * stride, st))
    argmax = windows.argmax(axis=3)  # first occurrence wins ties
    out = np.take_along_axis(windows, argmax[..., None], axis=3)[..., 0]

    def vjp(g):
        g3 = g[None] if single else g
        d_x = np.zeros_like(data)
        b_idx, c_idx, w_idx = np.indices(argmax.shape)
        np.add.at(d_x, (b_idx, c_idx, w_idx * stride + argmax), g3)
        return (d_x[0] if single else d_x,)

    return Value(out[0] if single else out, parents=(x,), vjp=vjp, op="maxpool1d")


def global_mean_pool(x: Value) -> Value:
    """Mean over the node axis: [N, F] -> [F], or [B, N, F] -> [B, F]."""
    if x.data.ndim not in (2, 3):
        raise ShapeError(f"global_mean_pool expects [N, F] or [B, N, F], got {x.data.shape}")
    n_nodes = x.data.shape[-2]
    if n_nodes < 1:
        raise ShapeError("global_mean_pool over an empty node set")
    out = x.data.mean(axis=-2)

    def vjp(g):
        expanded = np.broadcast_to(np.expand_dims(g / n_nodes, -2), x.data.shape)
        return (expanded,)

    return Value(out, parents=(x,), vjp=vjp, op="global_mean_pool")


# -- batch normalization --------------------------------------------------------

class BatchNormState:
    """Running statistics for one batch-norm site; mutated in place in train mode."""

    def __init__(self, num_features: int, momentum: float = 0.1, dtype=np.float64):
        self.running_mean = np.zeros(num_features, dtype=dtype)
        self.running_var = np.ones(num_features, dtype=dtype)
        self.momentum = momentum

    def update(self, batch_mean: np.ndarray, batch_var_unbiased: np.ndarray):
        m = self.momentum
        self.running_mean[...] = (1.0 - m) * self.running_mean + m * batch_mean
        self.running_var[...] = (1.0 - m) * self.running_var + m * batch_var_unbiased


def batchnorm(x: Value, gamma: Value, beta: Value, state: BatchNormState,
              mode: str = "train", axis: int = 1, eps: float = 1e-5) -> Value:
    """Normalize per feature over every other axis, then apply the affine pair.

    ``axis`` selects the feature axis (channels for [B, C, T] input, the
    last axis for [B, N, F] node embeddings). Train mode uses batch
    statistics and updates ``state``; eval mode reads ``state``.
    """
    if mode not in ("train", "eval"):
        raise ValueError(f"batchnorm mode must be 'train' or 'eval', got {mode!r}")
    data = x.data
    axis = axis % data.ndim
    n_features = data.shape[axis]
    if gamma.data.shape != (n_features,) or beta.data.shape != (n_features,):
        raise ShapeError(f"batchnorm affine parameters must have shape "
                         f"({n_features},), got {gamma.data.shape} and {beta.data.shape}")
    reduce_axes = tuple(i for i in range(data.ndim) if i != axis)
    count = int(np.prod([data.shape[i] for i in reduce_axes]))
    bshape = tuple(n_features if i == axis else 1 for i in range(data.ndim))
    gamma_b = gamma.data.reshape(bshape)
    beta_b = beta.data.reshape(bshape)

    if mode == "train":
        if count < 2:
            raise DegenerateBatchError(
                f"batchnorm in train mode needs at least 2 elements per feature, got {count}")
        mean = data.mean(axis=reduce_axes, keepdims=True)
        var = data.var(axis=reduce_axes, keepdims=True)
        inv_std = 1.0 / np.sqrt(var + eps)
        xhat = (data - mean) * inv_std
        state.update(mean.reshape(n_features),
                     var.reshape(n_features) * count / (count - 1))

        def vjp(g):
            d_gamma = (g * xhat).sum(axis=reduce_axes).astype(gamma.dtype, copy=False)
            d_beta = g.sum(axis=reduce_axes).astype(beta.dtype, copy=False)
            d_xhat = g * gamma_b
            d_x = inv_std / count * (
                count * d_xhat
                - d_xhat.sum(axis=reduce_axes, keepdims=True)
                - xhat * (d_xhat * xhat).sum(axis=reduce_axes, keepdims=True))
            return d_x.astype(x.dtype, copy=False), d_gamma, d_beta
    else:
        mean = state.running_mean.reshape(bshape)
        inv_std = 1.0 / np.sqrt(state.running_var.reshape(bshape) + eps)
        xhat = (data - mean) * inv_std

        def vjp(g):
            d_gamma = (g * xhat).sum(axis=reduce_axes).astype(gamma.dtype, copy=False)
            d_beta = g.sum(axis=reduce_axes).astype(beta.dtype, copy=False)
            d_x = (g * gamma_b * inv_std).astype(x.dtype, copy=False)
            return d_x, d_gamma, d_beta

    out = (gamma_b * xhat + beta_b).astype(x.dtype, copy=False)
    return Value(out, parents=(x, gamma, beta), vjp=vjp, op="batchnorm")


# -- adversarial reversal -------------------------------------------------------

def grad_reverse(x: Value, lam: float = 1.0) -> Value:
    """Identity forward; backward multiplies the incoming gradient by -lam."""
    lam = float(lam)
    if not math.isfinite(lam):
        raise ValueError(f"grad_reverse coefficient must be finite, got {lam}")

    def vjp(g):
        return (g * -lam,)

    # Forward output shares x's array, so it is bit-identical by construction.
    return Value(x.data, parents=(x,), vjp=vjp, op="grad_reverse")


# -- loss ----------------------------------------------------------------------

def softmax_cross_entropy(logits: Value, targets) -> Value:
    """Mean negative log-softmax of the target class for [B, C] logits."""
    if logits.data.ndim != 2:
        raise ShapeError(f"softmax_cross_entropy expects [B, C] logits, got {logits.data.shape}")
    batch, n_classes = logits.data.shape
    if batch < 1:
        raise ShapeError("softmax_cross_entropy on an empty batch")
    targets = np.asarray(targets)
    if targets.shape != (batch,):
        raise LabelError(f"targets must have shape ({batch},), got {targets.shape}")
    if not np.issubdtype(targets.dtype, np.integer):
        raise LabelError(f"targets must be integer class indices, got dtype {targets.dtype}")
    if targets.min() < 0 or targets.max() >= n_classes:
        raise LabelError(f"target labels must lie in [0, {n_classes}), got "
                         f"range [{targets.min()}, {targets.max()}]")

    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_z
    rows = np.arange(batch)
    loss = np.asarray(-log_probs[rows, targets].mean(), dtype=logits.dtype)

    def vjp(g):
        probs = np.exp(log_probs)
        probs[rows, targets] -= 1.0
        return ((g / batch) * probs,)

    return Value(loss, parents=(logits,), vjp=vjp, op="softmax_cross_entropy")
