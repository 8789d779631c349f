"""Parameter update rules. Deterministic given parameter order and gradients."""
from __future__ import annotations

import numpy as np

from .params import Parameter


class SGD:
    def __init__(self, params, lr: float = 1e-2, momentum: float = 0.0):
        self.params = [p for p in params if p.learnable]
        self.lr = lr
        self.momentum = momentum
        self._velocity = [np.zeros_like(p.value.data) for p in self.params]

    def zero_grad(self):
        for p in self.params:
            p.value.zero_grad()

    def step(self):
        for p, vel in zip(self.params, self._velocity):
            if self.momentum:
                vel *= self.momentum
                vel += p.value.grad
                update = vel
            else:
                update = p.value.grad
            p.value.data -= self.lr * update


class Adam:
    def __init__(self, params, lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.params = [p for p in params if p.learnable]
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self._step = 0
        self._m = [np.zeros_like(p.value.data) for p in self.params]
        self._v = [np.zeros_like(p.value.data) for p in self.params]

    def zero_grad(self):
        for p in self.params:
            p.value.zero_grad()

    def step(self):
        self._step += 1
        t = self._step
        correction1 = 1.0 - self.beta1 ** t
        correction2 = 1.0 - self.beta2 ** t
        for p, m, v in zip(self.params, self._m, self._v):
            g = p.value.grad
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            m_hat = m / correction1
            v_hat = v / correction2
            p.value.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def make_optimizer(name: str, params, **kwargs):
    if name == "adam":
        return Adam(params, **kwargs)
    if name == "sgd":
        return SGD(params, **kwargs)
    raise ValueError(f"unknown optimizer {name!r}")
