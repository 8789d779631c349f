"""Layered run configuration: defaults, then a YAML file, then environment
overrides, then command-line ``--set key=value`` pairs. Unknown keys are
rejected and every run writes back the fully resolved document."""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .data.synth import SynthSpec
from .errors import ConfigError
from .model import ModelConfig
from .train import MODES, TrainConfig

ENV_PREFIX = "GRAPHHAR_SET_"


@dataclass(frozen=True)
class DataConfig:
    dataset: str = "synth"
    root: str | None = None
    layout: str = "dsads"            # builtin layout name or a file path
    column_map: str | None = None    # OPPT column map path; builtin when None
    window_len: int = 64             # OPPT sliding-window length
    overlap: float = 0.5
    max_nan_gap: int = 5
    limit_segments: int | None = None
    clusters: dict | None = None     # cluster name -> list of subject ids
    synth: SynthSpec = field(default_factory=SynthSpec)

    def __post_init__(self):
        if self.dataset not in ("synth", "dsads", "oppt"):
            raise ConfigError(f"dataset must be synth, dsads, or oppt, "
                              f"got {self.dataset!r}")


@dataclass(frozen=True)
class RunConfig:
    data: DataConfig = field(default_factory=DataConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)


def _to_tuple(value):
    if isinstance(value, list):
        return tuple(_to_tuple(v) for v in value)
    return value


def _build_dataclass(cls, doc: dict, prefix: str):
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(doc) - set(fields))
    if unknown:
        raise ConfigError(f"unknown config keys under {prefix!r}: {unknown}")
    kwargs = {}
    for name, value in doc.items():
        default = fields[name].default
        if isinstance(default, tuple) or name == "templates":
            value = _to_tuple(value)
        kwargs[name] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad value under {prefix!r}: {exc}") from exc


def config_from_dict(doc: dict) -> RunConfig:
    doc = dict(doc or {})
    data_doc = dict(doc.pop("data", {}) or {})
    model_doc = dict(doc.pop("model", {}) or {})
    train_doc = dict(doc.pop("train", {}) or {})
    if doc:
        raise ConfigError(f"unknown config sections: {sorted(doc)}")
    synth_doc = dict(data_doc.pop("synth", {}) or {})
    synth = _build_dataclass(SynthSpec, synth_doc, "data.synth")
    data = _build_dataclass(DataConfig, {**data_doc, "synth": synth}, "data")
    model = _build_dataclass(ModelConfig, model_doc, "model")
    train = _build_dataclass(TrainConfig, train_doc, "train")
    return RunConfig(data=data, model=model, train=train)


def config_to_dict(cfg: RunConfig) -> dict:
    def plain(value):
        if dataclasses.is_dataclass(value) and not isinstance(value, type):
            return {f.name: plain(getattr(value, f.name))
                    for f in dataclasses.fields(value)}
        if isinstance(value, tuple):
            return [plain(v) for v in value]
        if isinstance(value, dict):
            return {k: plain(v) for k, v in value.items()}
        return value

    return plain(cfg)


def _set_nested(doc: dict, dotted: str, value):
    keys = dotted.split(".")
    node = doc
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot set {dotted!r}: {key!r} is not a section")
    node[keys[-1]] = value


def _merge(base: dict, overlay: dict):
    for key, value in overlay.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _merge(base[key], value)
        else:
            base[key] = value


def env_overrides(environ=None) -> list[tuple[str, object]]:
    """GRAPHHAR_SET_TRAIN__LR=0.01 -> ('train.lr', 0.01)."""
    environ = os.environ if environ is None else environ
    pairs = []
    for key in sorted(environ):
        if not key.startswith(ENV_PREFIX):
            continue
        dotted = key[len(ENV_PREFIX):].lower().replace("__", ".")
        pairs.append((dotted, yaml.safe_load(environ[key])))
    return pairs


def parse_set(assignment: str) -> tuple[str, object]:
    if "=" not in assignment:
        raise ConfigError(f"--set expects key=value, got {assignment!r}")
    dotted, raw = assignment.split("=", 1)
    return dotted.strip(), yaml.safe_load(raw)


def resolve_config(config_path=None, sets=(), environ=None) -> RunConfig:
    doc = config_to_dict(RunConfig())
    if config_path is not None:
        path = Path(config_path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        loaded = yaml.safe_load(path.read_text()) or {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"{path}: config file must be a mapping")
        _merge(doc, loaded)
    for dotted, value in env_overrides(environ):
        _set_nested(doc, dotted, value)
    for assignment in sets:
        dotted, value = parse_set(assignment)
        _set_nested(doc, dotted, value)
    return config_from_dict(doc)


def write_snapshot(outdir, cfg: RunConfig) -> Path:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "resolved_config.yaml"
    path.write_text(yaml.safe_dump(config_to_dict(cfg), sort_keys=True))
    return path


def parse_modes(spec: str) -> list[str]:
    """Comma-separated mode list; 'all' expands to every mode."""
    if spec == "all":
        return list(MODES)
    modes = [m.strip() for m in spec.split(",") if m.strip()]
    if not modes:
        raise ConfigError("no modes given")
    for mode in modes:
        if mode not in MODES:
            raise ConfigError(f"unknown mode {mode!r}; expected one of "
                              f"{MODES} or 'all'")
    return modes
