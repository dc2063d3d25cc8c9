"""Experiment configuration: a versioned YAML tree parsed into dataclasses.

Parsing is strict. Unknown keys, wrong types and out-of-range values raise
:class:`ConfigError` before any computation starts.
"""
from __future__ import annotations

import dataclasses
import math
import typing
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError, ValidationError
from .operators import BoundaryCondition, OperatorParams

SCHEMA_VERSION = 1


@dataclass
class GridSpec:
    """Either explicit ``values`` or ``num`` points between ``min`` and ``max``."""

    min: float | None = None
    max: float | None = None
    num: int | None = None
    log: bool = False
    values: list[float] | None = None

    def array(self) -> np.ndarray:
        if self.values is not None:
            if any(v is not None for v in (self.min, self.max, self.num)):
                raise ConfigError("grid takes either values or min/max/num, not both")
            arr = np.asarray(self.values, dtype=float)
            if arr.size == 0:
                raise ConfigError("grid values must be nonempty")
            return arr
        if self.min is None or self.max is None or self.num is None:
            raise ConfigError("grid needs min, max and num")
        if self.num < 1 or self.min > self.max:
            raise ConfigError(f"bad grid [{self.min}, {self.max}] with {self.num} nodes")
        if self.log:
            if self.min <= 0:
                raise ConfigError("log grid needs min > 0")
            return np.logspace(math.log10(self.min), math.log10(self.max), self.num)
        return np.linspace(self.min, self.max, self.num)


@dataclass
class OperatorBlock:
    d: float = 1.0
    b: float = 0.0
    c: float = 0.0


@dataclass
class BCBlock:
    kind: str = "dirichlet"
    sigma: float | None = None
    length: float = 1.0


@dataclass
class EigenBlock:
    n_max: int = 8


@dataclass
class ClassifyBlock:
    A1: list[float] | None = None
    A2: list[float] | None = None
    n_max: int = 32
    nonnegative_only: bool = False
    c0: float = 1.0
    n_x: int = 101
    n_t: int = 21
    t_end: float = 2.0


@dataclass
class ASetBlock:
    n_max: int = 4
    d_grid: GridSpec = field(default_factory=lambda: GridSpec(min=0.0, max=1.0, num=21))
    b_grid: GridSpec = field(default_factory=lambda: GridSpec(min=-2.0, max=2.0, num=21))


@dataclass
class MProfile:
    x: list[float]
    m: list[float]


@dataclass
class NonlinearBlock:
    d: float | None = None
    a: float | None = None
    b: float | None = None
    m_profile: MProfile | None = None
    P1: list[float] | None = None
    P2: list[float] | None = None
    n_scan: int = 4000
    shoot_range: list[float] | None = None
    nonnegative_only: bool = False


@dataclass
class SimulateBlock:
    model: str = "linear"
    method: str = "spectral"
    ic: list[float] = field(default_factory=lambda: [1.0])
    n_x: int = 101
    n_t: int = 21
    t_end: float = 2.0


@dataclass
class InferBlock:
    omega: float = 0.1
    N: int = 8
    eta: float = 10.0
    sigma: float = 0.3
    seed: int = 0
    c_true: float = 1.0
    d_true: float = 0.05
    c_grid: GridSpec = field(default_factory=lambda: GridSpec(min=0.0, max=4.0, num=81))
    d_grid: GridSpec = field(default_factory=lambda: GridSpec(min=1e-3, max=1.0, num=81, log=True))
    profile_noise: bool = False


@dataclass
class OutputBlock:
    path: str | None = None
    format: str = "csv"


@dataclass
class ExperimentConfig:
    version: int = SCHEMA_VERSION
    operator: OperatorBlock = field(default_factory=OperatorBlock)
    bc: BCBlock = field(default_factory=BCBlock)
    eigen: EigenBlock = field(default_factory=EigenBlock)
    classify: ClassifyBlock = field(default_factory=ClassifyBlock)
    aset: ASetBlock = field(default_factory=ASetBlock)
    nonlinear: NonlinearBlock = field(default_factory=NonlinearBlock)
    simulate: SimulateBlock = field(default_factory=SimulateBlock)
    infer: InferBlock = field(default_factory=InferBlock)
    output: OutputBlock = field(default_factory=OutputBlock)

    # -- derived objects, validated on access --------------------------------------

    def operator_params(self) -> OperatorParams:
        o = self.operator
        return OperatorParams(o.d, o.b, o.c)

    def boundary(self) -> BoundaryCondition:
        return BoundaryCondition(self.bc.kind, self.bc.sigma, self.bc.length)

    def validate(self) -> None:
        if self.version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported config version {self.version}")
        try:
            self.boundary()
            self.operator_params()
        except ValidationError as exc:
            raise ConfigError(str(exc)) from exc
        if self.output.format != "csv":
            raise ConfigError(f"unsupported output format {self.output.format!r}")
        for name in ("A1", "A2"):
            v = getattr(self.classify, name)
            if v is not None and len(v) != 3:
                raise ConfigError(f"classify.{name} must be [d, b, c]")
        for name in ("P1", "P2"):
            v = getattr(self.nonlinear, name)
            if v is not None and len(v) != 3:
                raise ConfigError(f"nonlinear.{name} must be [d, a, b]")
        if self.nonlinear.shoot_range is not None and len(self.nonlinear.shoot_range) != 2:
            raise ConfigError("nonlinear.shoot_range must be [lo, hi]")
        if not self.infer.omega > 0:
            raise ConfigError(f"infer.omega must be > 0, got {self.infer.omega}")
        if self.infer.seed < 0:
            raise ConfigError("infer.seed must be >= 0")
        if self.simulate.model not in ("linear", "logistic"):
            raise ConfigError(f"unknown simulate.model {self.simulate.model!r}")
        if self.simulate.method not in ("spectral", "fd"):
            raise ConfigError(f"unknown simulate.method {self.simulate.method!r}")
        for blk, names in ((self.classify, ("n_x", "n_t")), (self.simulate, ("n_x", "n_t"))):
            for n in names:
                if getattr(blk, n) < 2:
                    raise ConfigError(f"{n} must be >= 2")
        for g in (self.aset.d_grid, self.aset.b_grid, self.infer.c_grid, self.infer.d_grid):
            g.array()


def _coerce(tp, value, where: str):
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if origin is typing.Union or (origin is not None and type(None) in args):
        if value is None:
            if type(None) in args:
                return None
            raise ConfigError(f"{where} must not be null")
        inner = [a for a in args if a is not type(None)]
        return _coerce(inner[0], value, where)
    if dataclasses.is_dataclass(tp):
        if tp is GridSpec and isinstance(value, list):
            value = {"values": value}
        return _build(tp, value, where)
    if origin is list:
        if not isinstance(value, list):
            raise ConfigError(f"{where} must be a list")
        return [_coerce(args[0], v, f"{where}[{i}]") for i, v in enumerate(value)]
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be true or false")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where} must be an integer")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number")
        if not math.isfinite(value):
            raise ConfigError(f"{where} must be finite")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where} must be a string")
        return value
    raise ConfigError(f"{where}: unsupported field type {tp}")


def _build(cls, data, where: str):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{where or 'config'} must be a mapping")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where or 'config'}: {', '.join(map(str, unknown))}")
    kwargs = {k: _coerce(hints[k], v, f"{where}.{k}" if where else k) for k, v in data.items()}
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{where or 'config'}: {exc}") from exc


def parse_config(data) -> ExperimentConfig:
    """Build and validate an :class:`ExperimentConfig` from a parsed tree."""
    if data is None:
        data = {}
    if isinstance(data, dict) and "version" not in data:
        raise ConfigError("config needs a 'version' field")
    cfg = _build(ExperimentConfig, data, "")
    cfg.validate()
    return cfg


def load_config(path: str | Path | None) -> ExperimentConfig:
    if path is None:
        cfg = ExperimentConfig()
        cfg.validate()
        return cfg
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {' '.join(str(exc).split())}") from exc
    return parse_config(data)
