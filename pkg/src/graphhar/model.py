"""The four-part recognizer: a position-shared convolutional encoder, a
two-layer graph convolution over the sensor graph, an activity head, and a
reversal-fronted user-discriminator head."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .autodiff import (BatchNormState, ParameterStore, Value, batchnorm,
                       conv1d, global_mean_pool, grad_reverse, matmul,
                       maxpool1d, softmax_cross_entropy)
from .errors import ConfigError, ShapeError, TraceError


@dataclass(frozen=True)
class ModelConfig:
    n_nodes: int = 5
    in_channels: int = 9
    window_len: int = 125
    n_classes: int = 19
    conv_channels: tuple[int, int] = (16, 16)
    conv_kernels: tuple[int, int] = (5, 3)
    pool_window: int = 2
    pool_stride: int = 2
    gcn_hidden: int = 64
    head_hidden: int = 64
    dtype: str = "float32"

    def np_dtype(self):
        if self.dtype not in ("float32", "float64"):
            raise ConfigError(f"dtype must be float32 or float64, got {self.dtype!r}")
        return np.float32 if self.dtype == "float32" else np.float64

    def encoder_shapes(self) -> list[tuple[int, int]]:
        """(channels, length) after each conv/pool stage of the encoder.

        conv stages are valid (no padding, stride 1); pools floor-divide:
        T -> T-k1+1 -> pooled -> T-k2+1 -> pooled. With the defaults and a
        125-sample window: 125 -> 121 -> 60 -> 58 -> 29.
        """
        shapes = []
        length = self.window_len
        channels = self.in_channels
        for conv_c, kernel in zip(self.conv_channels, self.conv_kernels):
            length = length - kernel + 1
            if length < 1:
                raise ConfigError(f"window of {self.window_len} is too short for "
                                  f"kernels {self.conv_kernels}")
            channels = conv_c
            shapes.append((channels, length))
            length = (length - self.pool_window) // self.pool_stride + 1
            if length < 1:
                raise ConfigError(f"pooling leaves no samples for window "
                                  f"{self.window_len}")
            shapes.append((channels, length))
        return shapes

    @property
    def feature_width(self) -> int:
        """Per-node embedding width: channels x remaining samples after the encoder."""
        channels, length = self.encoder_shapes()[-1]
        return channels * length


@dataclass
class ForwardTrace:
    """Intermediate activations of one forward pass, for inspection and tests."""
    features: np.ndarray        # [B, N, F0]
    gcn1: np.ndarray            # [B, N, H]
    gcn2: np.ndarray            # [B, N, H]
    pooled: np.ndarray          # [B, H]
    activity_logits: np.ndarray
    domain_logits: np.ndarray

    def validate(self):
        for name in ("features", "gcn1", "gcn2", "pooled",
                     "activity_logits", "domain_logits"):
            arr = getattr(self, name)
            if not np.isfinite(arr).all():
                raise TraceError(f"forward pass produced non-finite values in {name}")


def _kaiming(rng, shape, fan_in, dtype):
    return (rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)).astype(dtype)


class GraphHarModel:
    """One parameter set serving every graph family; heads share the pooled
    embedding. All learnable state lives in ``self.params``."""

    def __init__(self, config: ModelConfig, n_domains: int,
                 rng: np.random.Generator | None = None):
        if n_domains < 1:
            raise ConfigError(f"need at least one source domain, got {n_domains}")
        self.config = config
        self.n_domains = n_domains
        rng = rng or np.random.default_rng(0)
        dtype = config.np_dtype()
        self.params = ParameterStore()
        self._bn_states: dict[str, BatchNormState] = {}

        c_in = config.in_channels
        for i, (c_out, kernel) in enumerate(zip(config.conv_channels,
                                                config.conv_kernels), start=1):
            self._add(f"encoder.conv{i}.weight",
                      _kaiming(rng, (c_out, c_in, kernel), c_in * kernel, dtype))
            self._add(f"encoder.conv{i}.bias", np.zeros(c_out, dtype=dtype))
            self._add_bn(f"encoder.bn{i}", c_out, dtype)
            c_in = c_out

        f0 = config.feature_width
        h = config.gcn_hidden
        self._add("gcn1.weight", _kaiming(rng, (f0, h), f0, dtype))
        self._add_bn("gcn1.bn", h, dtype)
        self._add("gcn2.weight", _kaiming(rng, (h, h), h, dtype))
        self._add_bn("gcn2.bn", h, dtype)

        hh = config.head_hidden
        for head, width in (("classifier", config.n_classes),
                            ("discriminator", n_domains)):
            self._add(f"{head}.fc1.weight", _kaiming(rng, (h, hh), h, dtype))
            self._add(f"{head}.fc1.bias", np.zeros(hh, dtype=dtype))
            self._add(f"{head}.fc2.weight", _kaiming(rng, (hh, width), hh, dtype))
            self._add(f"{head}.fc2.bias", np.zeros(width, dtype=dtype))

    def _add(self, name, data, learnable=True):
        self.params.add(name, Value(data), learnable=learnable)

    def _add_bn(self, name, width, dtype):
        self._add(f"{name}.gamma", np.ones(width, dtype=dtype))
        self._add(f"{name}.beta", np.zeros(width, dtype=dtype))
        state = BatchNormState(width, momentum=0.1, dtype=dtype)
        self._bn_states[name] = state
        # Running statistics ride along as non-learnable parameters so
        # checkpoints capture them; the arrays are shared with the state.
        self.params.add(f"{name}.running_mean", Value(state.running_mean),
                        learnable=False)
        self.params.add(f"{name}.running_var", Value(state.running_var),
                        learnable=False)

    def _p(self, name) -> Value:
        return self.params[name].value

    def _bn(self, name, x, mode, axis):
        return batchnorm(x, self._p(f"{name}.gamma"), self._p(f"{name}.beta"),
                         self._bn_states[name], mode=mode, axis=axis)

    # -- components --------------------------------------------------------------

    def extract_features(self, x: Value, mode: str = "train") -> Value:
        """Shared encoder over every node: conv-BN-ReLU-pool twice, flattened.

        Input [B, N, C, T]; output [B, N, F0]. The same convolution kernels
        see every node, so permuting nodes permutes the output rows.
        """
        batch, n_nodes, channels, length = x.shape
        cfg = self.config
        if n_nodes != cfg.n_nodes or channels != cfg.in_channels or length != cfg.window_len:
            raise ConfigError(
                f"input window shape {x.shape[1:]} does not match the configured "
                f"({cfg.n_nodes}, {cfg.in_channels}, {cfg.window_len})")
        h = x.reshape(batch * n_nodes, channels, length)
        for i in range(1, len(cfg.conv_channels) + 1):
            h = conv1d(h, self._p(f"encoder.conv{i}.weight"),
                       self._p(f"encoder.conv{i}.bias"))
            h = self._bn(f"encoder.bn{i}", h, mode, axis=1)
            h = h.relu()
            h = maxpool1d(h, cfg.pool_window, cfg.pool_stride)
        return h.reshape(batch, n_nodes, cfg.feature_width)

    def _operator(self, a_hat, dtype) -> Value:
        n = self.config.n_nodes
        a_hat = np.asarray(a_hat, dtype=dtype)
        if a_hat.shape != (n, n):
            raise ShapeError(f"propagation matrix must be ({n}, {n}), got {a_hat.shape}")
        if not np.isfinite(a_hat).all():
            raise TraceError("propagation matrix contains non-finite entries")
        return Value(a_hat)

    def _gcn_layers(self, features: Value, operator: Value, mode: str):
        h1 = matmul(matmul(operator, features), self._p("gcn1.weight"))
        h1 = self._bn("gcn1.bn", h1, mode, axis=2).relu()
        h2 = matmul(matmul(operator, h1), self._p("gcn2.weight"))
        h2 = self._bn("gcn2.bn", h2, mode, axis=2).relu()
        return h1, h2

    def gcn_forward(self, features: Value, a_hat: np.ndarray,
                    mode: str = "train") -> Value:
        """Two propagation layers then a mean over nodes: [B, N, F0] -> [B, H]."""
        operator = self._operator(a_hat, features.dtype)
        _, h2 = self._gcn_layers(features, operator, mode)
        return global_mean_pool(h2)

    def _head(self, name: str, h: Value) -> Value:
        h = (matmul(h, self._p(f"{name}.fc1.weight")) + self._p(f"{name}.fc1.bias")).relu()
        return matmul(h, self._p(f"{name}.fc2.weight")) + self._p(f"{name}.fc2.bias")

    def classify(self, pooled: Value) -> Value:
        return self._head("classifier", pooled)

    def discriminate(self, pooled: Value, lam: float | None = 1.0) -> Value:
        """User-domain logits; ``lam`` scales the reversed gradient, None
        disables the reversal entirely (used by verification)."""
        h = pooled if lam is None else grad_reverse(pooled, lam)
        return self._head("discriminator", h)

    # -- full passes --------------------------------------------------------------

    def forward(self, x, a_hat: np.ndarray, mode: str = "train",
                lam: float | None = 1.0):
        """Run all components; returns (activity logits, domain logits, trace)."""
        if not isinstance(x, Value):
            x = Value(np.asarray(x, dtype=self.config.np_dtype()))
        features = self.extract_features(x, mode)
        operator = self._operator(a_hat, features.dtype)
        h1, h2 = self._gcn_layers(features, operator, mode)
        pooled = global_mean_pool(h2)
        activity = self.classify(pooled)
        domain = self.discriminate(pooled, lam)
        trace = ForwardTrace(features=features.data, gcn1=h1.data, gcn2=h2.data,
                             pooled=pooled.data, activity_logits=activity.data,
                             domain_logits=domain.data)
        trace.validate()
        return activity, domain, trace

    def phase_loss(self, x, y, d, a_hat: np.ndarray, beta: float = 1.0,
                   lam: float = 1.0, mode: str = "train"):
        """Phase objective: activity loss plus beta times the reversed
        discriminator loss under the active propagation matrix.

        Returns (total, activity_loss, domain_loss, trace) as graph nodes;
        backward on the total drives one training step.
        """
        activity, domain, trace = self.forward(x, a_hat, mode=mode, lam=lam)
        loss_activity = softmax_cross_entropy(activity, np.asarray(y))
        loss_domain = softmax_cross_entropy(domain, np.asarray(d))
        total = loss_activity + loss_domain * float(beta)
        return total, loss_activity, loss_domain, trace

    # -- bookkeeping ---------------------------------------------------------------

    def zero_grad(self):
        self.params.zero_grad()

    def checkpoint_meta(self) -> dict:
        cfg = asdict(self.config)
        cfg["conv_channels"] = list(cfg["conv_channels"])
        cfg["conv_kernels"] = list(cfg["conv_kernels"])
        return {"model_config": cfg, "n_domains": self.n_domains}


def model_from_checkpoint_meta(meta: dict) -> GraphHarModel:
    cfg = dict(meta["model_config"])
    cfg["conv_channels"] = tuple(cfg["conv_channels"])
    cfg["conv_kernels"] = tuple(cfg["conv_kernels"])
    return GraphHarModel(ModelConfig(**cfg), n_domains=int(meta["n_domains"]))


def adversarial_gradient_check(betas=(0.0, 0.5, 1.0), seed: int = 0,
                               lam: float = 1.0) -> float:
    """Model-level reversal contract.

    For each beta, gradients of the shared trunk (encoder + graph layers +
    classifier) under activity_loss + beta * reversed domain_loss must equal
    the gradients of activity_loss - lam * beta * domain_loss built without
    any reversal. Returns the worst elementwise relative error.
    """
    from .autodiff.gradcheck import max_rel_error

    rng = np.random.default_rng(seed)
    cfg = ModelConfig(n_nodes=4, in_channels=2, window_len=16, n_classes=3,
                      conv_channels=(4, 4), conv_kernels=(3, 3),
                      gcn_hidden=8, head_hidden=8, dtype="float64")
    model = GraphHarModel(cfg, n_domains=3, rng=rng)
    batch = 6
    x = rng.standard_normal((batch, 4, 2, 16))
    y = rng.integers(0, 3, size=batch)
    d = rng.integers(0, 3, size=batch)
    a_hat = np.full((4, 4), 0.25)
    trunk = [p for p in model.params
             if p.learnable and not p.name.startswith("discriminator")]

    worst = 0.0
    for beta in betas:
        model.zero_grad()
        total, _, _, _ = model.phase_loss(x, y, d, a_hat, beta=beta, lam=lam,
                                          mode="eval")
        total.backward()
        with_reversal = {p.name: p.value.grad.copy() for p in trunk}

        model.zero_grad()
        activity, domain, _ = model.forward(x, a_hat, mode="eval", lam=None)
        loss = softmax_cross_entropy(activity, y) + \
            softmax_cross_entropy(domain, d) * (-lam * beta)
        loss.backward()
        for p in trunk:
            worst = max(worst, max_rel_error(with_reversal[p.name], p.value.grad))
        model.zero_grad()
    return worst
