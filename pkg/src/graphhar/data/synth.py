"""Synthetic multi-user activity data for desk-scale verification.

Activities are encoded purely in cross-node structure: all limb nodes share
one latent waveform per window, multiplied by an activity-specific sign
template, while the core node carries an independent latent. Per-node
marginals are therefore identical across activities; only the inter-node
correlation pattern tells them apart. Users perturb gain, offset, and timing,
which shifts the marginal distributions without touching that pattern.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..graphs import SensorLayout, SensorPosition
from .samples import SampleSet


@dataclass(frozen=True)
class SynthSpec:
    n_users: int = 8
    users_per_cluster: int = 2
    n_activities: int = 4
    n_nodes: int = 5
    channels: int = 3
    window_len: int = 64
    samples_per_user_activity: int = 16
    gain_low: float = 0.5          # user gains partition [gain_low, gain_high]
    gain_high: float = 2.0
    gain_jitter: float = 0.1       # per-window wobble around the user gain
    offset_scale: float = 0.3      # user offsets spread over +-offset_scale
    phase_shift_max: int = 6       # largest per-user circular time shift
    noise: float = 0.1
    templates: tuple[tuple[int, ...], ...] | None = None
    seed: int = 7

    def __post_init__(self):
        if self.n_nodes < 2:
            raise ConfigError("synthetic data needs a core node plus at least one limb")
        if self.n_users < 1 or self.n_activities < 1:
            raise ConfigError("need at least one user and one activity")
        if self.n_users % self.users_per_cluster != 0:
            raise ConfigError(f"{self.n_users} users do not split into clusters "
                              f"of {self.users_per_cluster}")

    @property
    def n_clusters(self) -> int:
        return self.n_users // self.users_per_cluster


def default_templates(n_activities: int, n_limbs: int) -> tuple[tuple[int, ...], ...]:
    """Walsh-style sign patterns; distinct per activity so that limb-pair
    alignment differs between activities."""
    templates = []
    for a in range(n_activities):
        row = tuple(1 if bin(a & (j + 1)).count("1") % 2 == 0 else -1
                    for j in range(n_limbs))
        templates.append(row)
    if len(set(templates)) != len(templates):
        raise ConfigError(f"cannot derive {n_activities} distinct sign templates "
                          f"over {n_limbs} limbs; supply templates explicitly")
    return tuple(templates)


def resolved_templates(spec: SynthSpec) -> tuple[tuple[int, ...], ...]:
    n_limbs = spec.n_nodes - 1
    if spec.templates is not None:
        templates = tuple(tuple(int(v) for v in row) for row in spec.templates)
        if len(templates) != spec.n_activities:
            raise ConfigError(f"expected {spec.n_activities} templates, "
                              f"got {len(templates)}")
        if any(len(row) != n_limbs for row in templates):
            raise ConfigError(f"each template must cover {n_limbs} limb nodes")
        return templates
    return default_templates(spec.n_activities, n_limbs)


def synthetic_layout(spec: SynthSpec) -> SensorLayout:
    """Core-plus-limbs layout matching the generator's node roles. Limbs
    alternate right/left so mirror pairs and side cliques are well defined."""
    positions = [SensorPosition(id=0, name="Core", side="middle",
                                links=tuple(range(1, spec.n_nodes)),
                                channels=spec.channels)]
    for i in range(1, spec.n_nodes):
        pair = (i + 1) // 2
        side = "right" if i % 2 == 1 else "left"
        positions.append(SensorPosition(
            id=i, name=f"{side.capitalize()}_Limb_{pair}", side=side,
            links=(0,), channels=spec.channels))
    return SensorLayout(positions=tuple(positions))


def synth_clusters(spec: SynthSpec) -> dict[str, list[int]]:
    return {chr(ord("A") + c): list(range(c * spec.users_per_cluster,
                                          (c + 1) * spec.users_per_cluster))
            for c in range(spec.n_clusters)}


def _latent(rng, count: int, window_len: int, shift: float) -> np.ndarray:
    """Band-limited waveforms with per-window random phase: [count, T]."""
    t = np.arange(window_len)[None, None, :]
    freqs = rng.uniform(2.0, 6.0, size=(count, 2, 1))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(count, 2, 1))
    amps = rng.uniform(0.7, 1.3, size=(count, 2, 1))
    waves = amps * np.sin(2.0 * np.pi * freqs * (t + shift) / window_len + phases)
    return waves.sum(axis=1)


def generate_synthetic(spec: SynthSpec) -> SampleSet:
    """Deterministic sample generation: identical spec and seed give
    bit-identical output."""
    rng = np.random.default_rng(spec.seed)
    templates = np.asarray(resolved_templates(spec), dtype=np.float64)
    n_limbs = spec.n_nodes - 1
    per = spec.samples_per_user_activity
    total = spec.n_users * spec.n_activities * per

    # User-level shift parameters, drawn up front in user order.
    gain_step = (spec.gain_high - spec.gain_low) / spec.n_users
    user_gain_low = spec.gain_low + gain_step * np.arange(spec.n_users)
    if spec.n_users > 1:
        centered = (np.arange(spec.n_users) - (spec.n_users - 1) / 2.0) \
            / ((spec.n_users - 1) / 2.0)
    else:
        centered = np.zeros(1)
    user_offset = spec.offset_scale * centered
    user_shift = rng.integers(0, spec.phase_shift_max + 1, size=spec.n_users)

    x = np.zeros((total, spec.n_nodes, spec.channels, spec.window_len),
                 dtype=np.float64)
    y = np.zeros(total, dtype=np.int64)
    d = np.zeros(total, dtype=np.int64)
    subject = np.zeros(total, dtype=np.int64)
    offset_col = np.zeros(total, dtype=np.int64)

    row = 0
    for user in range(spec.n_users):
        for activity in range(spec.n_activities):
            limb_latent = _latent(rng, per, spec.window_len, float(user_shift[user]))
            core_latent = _latent(rng, per, spec.window_len, float(user_shift[user]))
            signs = templates[activity]  # [n_limbs]
            node_sig = np.empty((per, spec.n_nodes, spec.window_len))
            node_sig[:, 0, :] = core_latent
            node_sig[:, 1:, :] = signs[None, :, None] * limb_latent[:, None, :]

            gains = rng.uniform(user_gain_low[user],
                                user_gain_low[user] + gain_step, size=per)
            gains *= rng.uniform(1.0 - spec.gain_jitter, 1.0 + spec.gain_jitter,
                                 size=per)
            block = np.empty((per, spec.n_nodes, spec.channels, spec.window_len))
            for c in range(spec.channels):
                # Same per-channel lag on every node keeps cross-node
                # correlations intact while decorrelating channels.
                rolled = np.roll(node_sig, shift=2 * c, axis=-1)
                block[:, :, c, :] = rolled * (1.0 + 0.2 * c)
            block *= gains[:, None, None, None]
            block += user_offset[user]
            if spec.noise > 0:
                block += spec.noise * rng.standard_normal(block.shape)

            x[row:row + per] = block
            y[row:row + per] = activity
            d[row:row + per] = user // spec.users_per_cluster
            subject[row:row + per] = user
            offset_col[row:row + per] = np.arange(per)
            row += per

    source = (f"synthetic(seed={spec.seed},users={spec.n_users},"
              f"activities={spec.n_activities})")
    return SampleSet(x=x.astype(np.float32), y=y, d=d, subject=subject,
                     sources=[source], source_idx=np.zeros(total, dtype=np.int64),
                     offset=offset_col)


def benchmark_spec(seed: int = 7) -> SynthSpec:
    """The shipped four-cluster benchmark used by the acceptance suite."""
    return SynthSpec(seed=seed)


def overfit_spec(seed: int = 3) -> SynthSpec:
    """32-sample, 2-class toy task for the training sanity check."""
    return SynthSpec(n_users=1, users_per_cluster=1, n_activities=2,
                     samples_per_user_activity=16, window_len=32,
                     noise=0.05, phase_shift_max=0, seed=seed)
