"""Experiment configuration loaded from YAML or JSON."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from .model import Potential, ising, potts


class ConfigError(ValueError):
    pass


@dataclass
class ModelConfig:
    family: str = "ising"          # ising | potts | custom
    d: int = 2
    beta: float = 0.0
    h: float = 0.0                 # ising external field
    states: int = 2
    range: int = 1
    couplings: list = field(default_factory=list)      # custom: [[offset, coupling], ...]
    field_terms: list = field(default_factory=list)    # custom: per-symbol weights

    def to_potential(self) -> Potential:
        if self.range < 1:
            raise ConfigError("range must be at least 1")
        if self.family == "ising":
            if self.states != 2:
                raise ConfigError("the ising family has exactly 2 states")
            return ising(self.d, self.beta, self.h, self.range)
        if self.family == "potts":
            if self.states < 3:
                raise ConfigError("the potts family needs at least 3 states")
            return potts(self.d, self.states, self.beta, self.range)
        if self.family == "custom":
            terms = []
            for item in self.couplings:
                offset, coupling = item
                if max(abs(int(x)) for x in offset) > self.range:
                    raise ConfigError(f"offset {offset} lies outside declared range {self.range}")
                terms.append((tuple(offset), coupling))
            return Potential(self.d, self.states, tuple(terms), tuple(self.field_terms),
                             name=f"custom(m={self.states},terms={len(terms)})")
        raise ConfigError(f"unknown model family {self.family!r}")


@dataclass
class SamplerConfig:
    sweeps: int = 50
    burn_in: Optional[int] = None


@dataclass
class EstimatorConfig:
    radius: int = 1
    c: float = 1.0
    force_radius: bool = False
    schedule: str = "fixed"        # fixed | theory
    alpha: Optional[float] = None
    window_policy: str = "common"


@dataclass
class ExperimentConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    sizes: list = field(default_factory=lambda: [64])
    replicates: int = 1
    seed: int = 0
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    output: Optional[str] = None
    summary: Optional[str] = None

    def __post_init__(self):
        if self.replicates < 1:
            raise ConfigError("replicates must be at least 1")
        if not self.sizes:
            raise ConfigError("at least one size is required")
        if self.estimator.schedule not in ("fixed", "theory"):
            raise ConfigError("estimator.schedule must be 'fixed' or 'theory'")
        self.to_potential()

    def to_potential(self) -> Potential:
        return self.model.to_potential()

    def dims(self, size) -> tuple[int, ...]:
        """Per-axis lengths for a size entry: an int (cube side) or a list."""
        if isinstance(size, int):
            return (size,) * self.model.d
        dims = tuple(int(n) for n in size)
        if len(dims) != self.model.d:
            raise ConfigError(f"size {size} does not have d={self.model.d} axes")
        return dims

    def to_dict(self) -> dict:
        return asdict(self)


def _build(cls, data, where):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be a mapping")
    known = set(cls.__dataclass_fields__)
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown keys in {where}: {sorted(extra)}")
    try:
        return cls(**data)
    except TypeError as e:
        raise ConfigError(f"{where}: {e}") from None


def config_from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping")
    data = dict(data)
    model = _build(ModelConfig, data.pop("model", None), "model")
    sampler = _build(SamplerConfig, data.pop("sampler", None), "sampler")
    est = _build(EstimatorConfig, data.pop("estimator", None), "estimator")
    extra = set(data) - set(ExperimentConfig.__dataclass_fields__)
    if extra:
        raise ConfigError(f"unknown keys: {sorted(extra)}")
    return ExperimentConfig(model=model, sampler=sampler, estimator=est, **data)


def load_config(path) -> ExperimentConfig:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse {path}: {e}") from None
    return config_from_dict(data)
