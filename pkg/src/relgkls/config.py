"""Run configuration: flat JSON sections, one per module, with lossless round-trip."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path


class ConfigError(ValueError):
    pass


def _positive(name, v):
    if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
        raise ConfigError(f"{name} must be a positive number, got {v!r}")


def _non_negative(name, v):
    if not (isinstance(v, (int, float)) and v >= 0 and math.isfinite(v)):
        raise ConfigError(f"{name} must be a non-negative number, got {v!r}")


@dataclass
class SpaceConfig:
    L: float = 2 * math.pi
    J: int = 1
    m: float = 1.0
    n_max: int = 2

    def validate(self):
        _positive("space.L", self.L)
        _non_negative("space.m", self.m)
        if int(self.J) != self.J or self.J < 0:
            raise ConfigError("space.J must be a non-negative integer")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ConfigError("space.n_max must be an integer >= 1")


@dataclass
class DissipatorConfig:
    kind: str = "poulin"  # poulin | blp | none
    gamma: float = 0.1
    g: float = 1.0
    ordering: str = "decay"  # decay | heating (escape hatch)
    hamiltonian: bool = True

    def validate(self):
        if self.kind not in ("poulin", "blp", "none"):
            raise ConfigError(f"dissipator.kind must be poulin, blp or none, got {self.kind!r}")
        if self.ordering not in ("decay", "heating"):
            raise ConfigError(f"dissipator.ordering must be decay or heating, got {self.ordering!r}")
        _non_negative("dissipator.gamma", self.gamma)
        _non_negative("dissipator.g", self.g)


@dataclass
class IntegratorConfig:
    dt: float = 0.01
    t_max: float = 1.0
    record_every: int = 1
    # vacuum | fock:n_-J,...,n_J | superposition:j | random
    initial_state: str = "fock:0,1,0"

    def validate(self):
        _positive("integrator.dt", self.dt)
        _positive("integrator.t_max", self.t_max)
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ConfigError("integrator.record_every must be an integer >= 1")


@dataclass
class DilationConfig:
    dt: float = 0.01
    t_max: float = 1.0
    n_anc: int = 1
    max_trace_distance: float = 5e-3
    max_dim: int = 4096

    def validate(self):
        _positive("dilation.dt", self.dt)
        _positive("dilation.t_max", self.t_max)
        _positive("dilation.max_trace_distance", self.max_trace_distance)
        if int(self.n_anc) != self.n_anc or self.n_anc < 1:
            raise ConfigError("dilation.n_anc must be an integer >= 1")
        if int(self.max_dim) != self.max_dim or self.max_dim < 1:
            raise ConfigError("dilation.max_dim must be a positive integer")


@dataclass
class CheckConfig:
    identity_file: str | None = None


@dataclass
class BoostConfig:
    gamma: float = 0.2
    zeta: float = 0.3
    k: float = 1.0

    def validate(self):
        _non_negative("boost.gamma", self.gamma)
        for name in ("zeta", "k"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"boost.{name} must be finite")


SECTIONS = {
    "space": SpaceConfig,
    "dissipator": DissipatorConfig,
    "integrator": IntegratorConfig,
    "dilation": DilationConfig,
    "check": CheckConfig,
    "boost": BoostConfig,
}


@dataclass
class RunConfig:
    space: SpaceConfig = field(default_factory=SpaceConfig)
    dissipator: DissipatorConfig = field(default_factory=DissipatorConfig)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    dilation: DilationConfig = field(default_factory=DilationConfig)
    check: CheckConfig = field(default_factory=CheckConfig)
    boost: BoostConfig = field(default_factory=BoostConfig)
    out_dir: str = "out"
    seed: int = 0

    def validate(self) -> "RunConfig":
        for name in SECTIONS:
            section = getattr(self, name)
            if hasattr(section, "validate"):
                section.validate()
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        unknown = set(data) - set(SECTIONS) - {"out_dir", "seed"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {}
        for name, section_cls in SECTIONS.items():
            raw = data.get(name, {})
            if not isinstance(raw, dict):
                raise ConfigError(f"section {name!r} must be an object")
            allowed = {f.name for f in fields(section_cls)}
            bad = set(raw) - allowed
            if bad:
                raise ConfigError(f"unknown keys in {name!r}: {sorted(bad)}")
            kwargs[name] = section_cls(**raw)
        for key in ("out_dir", "seed"):
            if key in data:
                kwargs[key] = data[key]
        return cls(**kwargs).validate()

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as err:
            raise ConfigError(f"config is not valid JSON: {err}") from None
        if not isinstance(data, dict):
            raise ConfigError("config root must be an object")
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        return cls.from_json(Path(path).read_text())

    def override(self, dotted: str, value) -> None:
        """Set ``section.field`` (or ``out_dir`` / ``seed``) in place."""
        if "." not in dotted:
            setattr(self, dotted, value)
            return
        section, name = dotted.split(".", 1)
        setattr(getattr(self, section), name, value)


def override_fields() -> list[tuple[str, type]]:
    """``(dotted name, value type)`` for every overridable field."""
    out = []
    for name, section_cls in SECTIONS.items():
        for f in fields(section_cls):
            default = getattr(section_cls(), f.name)
            out.append((f"{name}.{f.name}", type(default) if default is not None else str))
    return out
