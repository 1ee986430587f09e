"""Experiment configuration files (YAML, nested key-value pairs)."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from .averaging import QuadratureConfig
from .core import SystemState
from .errors import ConfigError
from .integrate import IntegratorConfig
from .models import DEFAULT_INITIAL_STATES, MODELS, get_model

SCALING_MODES = ("truncation", "classical")


@dataclass(frozen=True)
class BoundsConfig:
    """Optional overrides for the Gronwall bound inputs; unset values are derived."""

    c_L: Optional[float] = None
    sup_f1: Optional[float] = None
    sup_f2: Optional[float] = None

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if v is not None and not v > 0:
                raise ValueError(f"{f.name} must be positive, got {v}")


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = "bianchi3"
    model_params: dict = field(default_factory=dict)
    initial_state: Optional[SystemState] = None
    integrator: IntegratorConfig = IntegratorConfig()
    quadrature: QuadratureConfig = QuadratureConfig()
    gamma: float = 0.5
    L: float = 1.0
    H_star_list: tuple = (0.2, 0.1, 0.05, 0.025)
    H_star: Optional[float] = None
    t_star: Optional[float] = None
    t_end: float = 50.0
    samples: int = 201
    scaling_mode: str = "truncation"
    bounds: BoundsConfig = BoundsConfig()
    lipschitz_samples: int = 2000
    seed: int = 0
    output_dir: str = "out"

    def build_model(self):
        return get_model(self.model, **self.model_params)

    @property
    def state(self) -> SystemState:
        return self.initial_state if self.initial_state is not None else DEFAULT_INITIAL_STATES[self.model]


_NESTED = {"integrator": IntegratorConfig, "quadrature": QuadratureConfig, "bounds": BoundsConfig}
_FLOAT_KEYS = ("gamma", "L", "H_star", "t_star", "t_end")
_INT_KEYS = ("samples", "lipschitz_samples", "seed")


def _number(value, key, kind=float):
    if isinstance(value, str):
        # YAML 1.1 reads exponent literals without a dot (1e-10) as strings
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(f"{key}: expected a number, got {value!r}") from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    if kind is int:
        if int(value) != value:
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _section(cls, data, key):
    if not isinstance(data, dict):
        raise ConfigError(f"{key}: expected a mapping")
    names = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for k, v in data.items():
        if k not in names:
            raise ConfigError(f"unknown key '{key}.{k}'")
        ftype = names[k].type
        if ftype == "str":
            if not isinstance(v, str):
                raise ConfigError(f"{key}.{k}: expected a string, got {v!r}")
            kwargs[k] = v
        elif v is None and ftype.startswith("Optional"):
            kwargs[k] = None
        else:
            kwargs[k] = _number(v, f"{key}.{k}", int if ftype == "int" else float)
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: {exc}") from None


def _state(data) -> Optional[SystemState]:
    if data is None:
        return None
    if not isinstance(data, dict):
        raise ConfigError("initial_state: expected a mapping with keys H, x, t")
    unknown = set(data) - {"H", "x", "t"}
    if unknown:
        raise ConfigError(f"unknown key 'initial_state.{sorted(unknown)[0]}'")
    if "H" not in data or "x" not in data:
        raise ConfigError("initial_state: keys H and x are required")
    x = data["x"]
    if not isinstance(x, list) or not x:
        raise ConfigError("initial_state.x: expected a non-empty list")
    H = _number(data["H"], "initial_state.H")
    if not H > 0:
        raise ConfigError("initial_state.H: must be positive")
    return SystemState(
        H=H,
        x=[_number(v, f"initial_state.x[{i}]") for i, v in enumerate(x)],
        t=_number(data.get("t", 0.0), "initial_state.t"),
    )


def config_from_dict(data: dict) -> ExperimentConfig:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a mapping")
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"unknown key '{key}'")
        if key in _NESTED:
            kwargs[key] = _section(_NESTED[key], value, key)
        elif key == "initial_state":
            kwargs[key] = _state(value)
        elif key in _FLOAT_KEYS:
            kwargs[key] = None if value is None else _number(value, key)
        elif key in _INT_KEYS:
            kwargs[key] = _number(value, key, int)
        elif key == "H_star_list":
            if not isinstance(value, list):
                raise ConfigError("H_star_list: expected a list")
            kwargs[key] = tuple(_number(v, f"H_star_list[{i}]") for i, v in enumerate(value))
        elif key == "model_params":
            if not isinstance(value, dict):
                raise ConfigError("model_params: expected a mapping")
            kwargs[key] = dict(value)
        else:
            if not isinstance(value, str):
                raise ConfigError(f"{key}: expected a string")
            kwargs[key] = value
    cfg = ExperimentConfig(**kwargs)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.model not in MODELS:
        raise ConfigError(f"model: unknown model {cfg.model!r}; available {sorted(MODELS)}")
    try:
        model = cfg.build_model()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"model_params: {exc}") from None
    if cfg.initial_state is not None and cfg.initial_state.dimension != model.dimension:
        raise ConfigError(
            f"initial_state.x: model {cfg.model!r} needs {model.dimension} components"
        )
    if not model.admissible(cfg.state.x):
        raise ConfigError("initial_state.x: outside the model's admissible region")
    if not 0.0 < cfg.gamma < 1.0:
        raise ConfigError("gamma: must lie in (0, 1)")
    if not cfg.L > 0:
        raise ConfigError("L: must be positive")
    if cfg.samples < 200:
        raise ConfigError("samples: need at least 200 window samples")
    if cfg.scaling_mode not in SCALING_MODES:
        raise ConfigError(f"scaling_mode: use one of {SCALING_MODES}")
    if cfg.H_star is not None and cfg.t_star is not None:
        raise ConfigError("H_star and t_star are mutually exclusive")
    if cfg.H_star is not None and not cfg.H_star > 0:
        raise ConfigError("H_star: must be positive")
    if cfg.lipschitz_samples < 1:
        raise ConfigError("lipschitz_samples: must be positive")


def parse_config(text: str) -> ExperimentConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" (line {mark.line + 1}, column {mark.column + 1})" if mark else ""
        raise ConfigError(f"malformed config{where}: {getattr(exc, 'problem', exc)}") from None
    return config_from_dict(data)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    out = {}
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        if f.name in _NESTED:
            v = dataclasses.asdict(v)
        elif f.name == "initial_state" and v is not None:
            v = {"H": v.H, "x": [float(c) for c in v.x], "t": v.t}
        elif f.name == "H_star_list":
            v = list(v)
        elif f.name == "model_params":
            v = dict(v)
        out[f.name] = v
    return out


def dump_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False)
