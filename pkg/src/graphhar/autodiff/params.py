"""Named parameters attached to a model."""
from __future__ import annotations

from dataclasses import dataclass, field

from .value import Value


@dataclass
class Parameter:
    """A named leaf in the graph; non-learnable entries hold running state."""
    name: str
    value: Value
    learnable: bool = True


class ParameterStore:
    """Ordered, unique-by-name collection of parameters."""

    def __init__(self):
        self._params: dict[str, Parameter] = {}

    def add(self, name: str, value: Value, learnable: bool = True) -> Parameter:
        if name in self._params:
            raise ValueError(f"duplicate parameter name {name!r}")
        param = Parameter(name=name, value=value, learnable=learnable)
        self._params[name] = param
        return param

    def __getitem__(self, name: str) -> Parameter:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __iter__(self):
        return iter(self._params.values())

    def __len__(self):
        return len(self._params)

    def names(self) -> list[str]:
        return list(self._params)

    def learnable(self) -> list[Parameter]:
        return [p for p in self._params.values() if p.learnable]

    def zero_grad(self):
        for p in self._params.values():
            p.value.zero_grad()
