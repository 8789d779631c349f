"""Reverse-mode differentiable arrays.

The graph is built eagerly: every operation returns a new ``Value`` holding
the result, the parent nodes, and a vector-Jacobian closure. ``backward``
walks the graph once in reverse topological order and adds the per-call
gradient flow into each node's persistent ``grad`` accumulator, so repeated
backward calls without zeroing accumulate (twice -> doubled gradients).
"""
from __future__ import annotations

import numpy as np

from ..errors import ContractError, ShapeError

_FLOAT_TYPES = (np.dtype(np.float32), np.dtype(np.float64))


def _as_float_array(data, dtype=None) -> np.ndarray:
    arr = np.asarray(data, dtype=dtype)
    if arr.dtype not in _FLOAT_TYPES:
        arr = arr.astype(np.float64)
    return arr


def unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum `grad` down to `shape`, inverting numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Value:
    """Array node carrying data, a gradient accumulator, and an op record."""

    def __init__(self, data, dtype=None, parents=(), vjp=None, op="leaf"):
        self.data = _as_float_array(data, dtype)
        self.grad = np.zeros_like(self.data)
        self._parents = tuple(parents)
        self._vjp = vjp  # g -> tuple of gradients aligned with parents
        self._op = op

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def zero_grad(self):
        self.grad[...] = 0.0

    def __repr__(self):
        return f"Value(op={self._op!r}, shape={self.data.shape}, dtype={self.data.dtype})"

    # -- backward -----------------------------------------------------------

    def backward(self):
        """Accumulate d(self)/d(node) into every reachable node's grad."""
        if self.data.size != 1:
            raise ContractError(
                f"backward requires a scalar loss, got shape {self.data.shape}")

        order = []
        seen = set()

        def visit(node):
            if id(node) in seen:
                return
            seen.add(id(node))
            for parent in node._parents:
                visit(parent)
            order.append(node)

        visit(self)

        # Per-call gradient flow kept separate from the persistent
        # accumulators so repeated calls add rather than compound.
        flow = {id(self): np.ones_like(self.data)}
        for node in reversed(order):
            g = flow.get(id(node))
            if g is None:
                continue
            node.grad = node.grad + g
            if node._vjp is None:
                continue
            for parent, pg in zip(node._parents, node._vjp(g)):
                if pg is None:
                    continue
                acc = flow.get(id(parent))
                flow[id(parent)] = pg if acc is None else acc + pg

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        other = other if isinstance(other, Value) else Value(
            np.asarray(other, dtype=self.dtype))
        out = self.data + other.data

        def vjp(g):
            return unbroadcast(g, self.data.shape), unbroadcast(g, other.data.shape)

        return Value(out, parents=(self, other), vjp=vjp, op="add")

    __radd__ = __add__

    def __mul__(self, scalar):
        if isinstance(scalar, Value):
            raise TypeError("Value * Value is not an operation the model needs; "
                            "only scaling by a plain number is supported")
        c = float(scalar)

        def vjp(g):
            return (g * c,)

        return Value(self.data * c, parents=(self,), vjp=vjp, op="scale")

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def sum(self):
        """Sum of all elements, as a scalar node."""
        out = np.asarray(self.data.sum(), dtype=self.dtype)

        def vjp(g):
            return (np.broadcast_to(g, self.data.shape),)

        return Value(out, parents=(self,), vjp=vjp, op="sum")

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        original = self.data.shape
        out = self.data.reshape(shape)

        def vjp(g):
            return (g.reshape(original),)

        return Value(out, parents=(self,), vjp=vjp, op="reshape")

    def relu(self):
        mask = self.data > 0

        def vjp(g):
            return (g * mask,)

        return Value(np.maximum(self.data, 0), parents=(self,), vjp=vjp, op="relu")

    def __matmul__(self, other):
        return matmul(self, other)


def relu(x: Value) -> Value:
    return x.relu()


def matmul(a, b) -> Value:
    """Matrix product with numpy batch broadcasting over leading axes."""
    a = a if isinstance(a, Value) else Value(a)
    b = b if isinstance(b, Value) else Value(b)
    if a.data.ndim < 2 or b.data.ndim < 2:
        raise ShapeError(
            f"matmul operands must be at least 2-D: {a.data.shape} @ {b.data.shape}")
    if a.data.shape[-1] != b.data.shape[-2]:
        raise ShapeError(
            f"matmul inner dimensions do not match: {a.data.shape} @ {b.data.shape}")
    out = np.matmul(a.data, b.data)

    def vjp(g):
        da = unbroadcast(np.matmul(g, b.data.swapaxes(-1, -2)), a.data.shape)
        db = unbroadcast(np.matmul(a.data.swapaxes(-1, -2), g), b.data.shape)
        return da, db

    return Value(out, parents=(a, b), vjp=vjp, op="matmul")
