"""Experiment configuration: presets, ``key = value`` files and overrides."""
from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field

from ..errors import ConfigError
from ..levy_path import LevyTriplet, SigmaModel
from ..limit_law import U_WEIGHTS, LimitForm
from ..randomness import DistSpec, parse_dist

FUNCTIONALS = ("X_error", "decomposition", "jump_terms", "milstein", "divergent", "limit_only")
ALL_FORMS = tuple(f.value for f in LimitForm)


@dataclass(frozen=True)
class ExperimentConfig:
    functional: str = "X_error"
    b: float = 0.0
    c: float = 1.0
    jump_intensity: float = 0.0
    jump_size: DistSpec = field(default_factory=lambda: DistSpec("two_point", (-1.0, 0.5, 1.0)))
    sigma: SigmaModel = field(default_factory=SigmaModel)
    n_list: tuple = (64,)
    inner_refinement: int = 64
    replicates: int = 1000
    epsilon_list: tuple = (1.0, 0.5, 0.25)
    limit_forms: tuple = ALL_FORMS
    jump_sign: float = 1.0
    u_weights: str = "auto"
    method: str = "ito"
    master_seed: int = 20240601
    out_dir: str = "out"
    workers: int = 1
    preset: str = ""

    def __post_init__(self):
        if self.functional not in FUNCTIONALS:
            raise ConfigError(f"must be one of {FUNCTIONALS}", field="functional")
        if not self.n_list or any(n < 1 for n in self.n_list):
            raise ConfigError("must be a non-empty list of positive integers", field="n_list")
        if list(self.n_list) != sorted(set(self.n_list)):
            raise ConfigError("must be strictly ascending", field="n_list")
        if self.inner_refinement < 2:
            raise ConfigError("must be >= 2", field="inner_refinement")
        if self.replicates < 1:
            raise ConfigError("must be >= 1", field="replicates")
        if self.workers < 1:
            raise ConfigError("must be >= 1", field="workers")
        if any(e <= 0 for e in self.epsilon_list):
            raise ConfigError("entries must be > 0", field="epsilon_list")
        if not self.limit_forms or any(f not in ALL_FORMS for f in self.limit_forms):
            raise ConfigError(f"entries must be among {ALL_FORMS}", field="limit_forms")
        if self.jump_sign not in (1.0, -1.0):
            raise ConfigError("must be +1 or -1", field="jump_sign")
        if self.u_weights != "auto" and self.u_weights not in U_WEIGHTS:
            raise ConfigError(f"must be 'auto' or one of {U_WEIGHTS}", field="u_weights")
        if self.method not in ("ito", "riemann"):
            raise ConfigError("must be 'ito' or 'riemann'", field="method")
        if self.functional == "decomposition" and not (self.sigma.is_constant and self.sigma.sigma0 == 1.0):
            raise ConfigError("decomposition requires sigma = constant(1)", field="sigma")
        self.triplet  # validates the model

    @property
    def triplet(self) -> LevyTriplet:
        try:
            return LevyTriplet(self.b, self.c, self.jump_intensity, self.jump_size)
        except ConfigError as exc:
            raise ConfigError(str(exc), field=exc.field or "model") from None

    @property
    def mesh_n(self) -> int:
        return max(self.n_list) * self.inner_refinement

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        """Serialise in the ``key = value`` format accepted by :func:`parse_config_text`."""
        lines = []
        for f in dataclasses.fields(self):
            lines.append(f"{f.name} = {_format_value(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    def echo(self) -> dict:
        return {f.name: _format_value(getattr(self, f.name)) for f in dataclasses.fields(self)}


def _format_value(value):
    if isinstance(value, tuple):
        return ",".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


_SIGMA_RE = re.compile(r"^\s*(constant|ito)\s*\((.*)\)\s*$")


def parse_sigma(text: str) -> SigmaModel:
    m = _SIGMA_RE.match(text)
    if not m:
        raise ConfigError(f"cannot parse {text!r}; use constant(s0) or ito(s0, b, c)", field="sigma")
    try:
        args = [float(a) for a in m.group(2).split(",") if a.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse {text!r}", field="sigma") from None
    if m.group(1) == "constant":
        if len(args) != 1:
            raise ConfigError("constant takes one argument", field="sigma")
        return SigmaModel("constant", args[0])
    if len(args) != 3:
        raise ConfigError("ito takes three arguments", field="sigma")
    return SigmaModel("ito", *args)


def _ints(text):
    return tuple(int(v) for v in text.split(",") if v.strip())


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _forms(text):
    text = text.strip()
    if text == "all":
        return ALL_FORMS
    return tuple(v.strip() for v in text.split(",") if v.strip())


_PARSERS = {
    "functional": str.strip,
    "b": float,
    "c": float,
    "jump_intensity": float,
    "lambda": float,
    "jump_size": parse_dist,
    "sigma": parse_sigma,
    "n_list": _ints,
    "inner_refinement": int,
    "m": int,
    "replicates": int,
    "epsilon_list": _floats,
    "limit_forms": _forms,
    "limit_form": _forms,
    "jump_sign": float,
    "u_weights": str.strip,
    "method": str.strip,
    "master_seed": int,
    "seed": int,
    "out_dir": str.strip,
    "workers": int,
    "preset": str.strip,
}
_ALIASES = {"lambda": "jump_intensity", "m": "inner_refinement", "limit_form": "limit_forms",
            "seed": "master_seed"}


def parse_assignments(items) -> dict:
    """Turn ``(key, raw_value)`` pairs into typed config fields."""
    out = {}
    for key, raw in items:
        key = key.strip()
        if key not in _PARSERS:
            raise ConfigError("unknown configuration key", field=key)
        try:
            value = _PARSERS[key](raw.strip())
        except ConfigError as exc:
            raise ConfigError(str(exc), field=key) from None
        except ValueError:
            raise ConfigError(f"cannot parse value {raw.strip()!r}", field=key) from None
        out[_ALIASES.get(key, key)] = value
    return out


def parse_config_text(text: str) -> dict:
    items = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value", field="config")
        key, value = line.split("=", 1)
        items.append((key, value))
    return parse_assignments(items)


PRESETS = {
    "continuous": dict(functional="X_error", b=0.0, c=1.0, jump_intensity=0.0,
                       n_list=(64,), inner_refinement=64, replicates=20000),
    "pure-jump": dict(functional="X_error", b=0.0, c=0.0, jump_intensity=2.0,
                      jump_size=DistSpec("two_point", (-1.0, 0.5, 1.0)),
                      n_list=(16, 64, 256), inner_refinement=4, replicates=10000),
    "mixed": dict(functional="X_error", b=0.0, c=1.0, jump_intensity=1.0,
                  jump_size=DistSpec("two_point", (-1.0, 0.5, 1.0)),
                  n_list=(8, 16, 32, 64, 128, 256), inner_refinement=64, replicates=10000),
    "milstein": dict(functional="milstein", b=0.0, c=1.0, jump_intensity=1.0,
                     jump_size=DistSpec("two_point", (-0.5, 0.5, 0.5)),
                     n_list=(8, 16, 32, 64), inner_refinement=64, replicates=10000),
    "divergent": dict(functional="divergent", b=0.0, c=1.0, jump_intensity=1.0,
                      jump_size=DistSpec("two_point", (-1.0, 0.5, 1.0)),
                      n_list=(16, 64, 256), inner_refinement=2, replicates=10000),
    "decomposition": dict(functional="decomposition", b=0.0, c=1.0, jump_intensity=2.0,
                          jump_size=DistSpec("normal", (0.0, 0.5)),
                          n_list=(64,), inner_refinement=64, replicates=5000,
                          epsilon_list=(1.0, 0.5, 0.25)),
}


def preset_config(name: str, **overrides) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}", field="preset")
    fields = dict(PRESETS[name], preset=name)
    fields.update(overrides)
    return ExperimentConfig(**fields)


def build_config(preset: str | None = None, config_text: str | None = None,
                 overrides: dict | None = None) -> ExperimentConfig:
    """Layer preset, then config file, then explicit overrides."""
    fields = {}
    if config_text:
        fields.update(parse_config_text(config_text))
    preset = preset or fields.pop("preset", None)
    fields.pop("preset", None)
    if overrides:
        fields.update({k: v for k, v in overrides.items() if v is not None})
    if preset:
        return preset_config(preset, **fields)
    return ExperimentConfig(**fields)


def describe_presets() -> str:
    lines = []
    for name, fields in PRESETS.items():
        tr = f"b={fields['b']}, c={fields['c']}, lambda={fields['jump_intensity']}"
        if fields["jump_intensity"]:
            tr += f", jumps={fields['jump_size']}"
        lines.append(f"{name:14s} {fields['functional']:14s} {tr}; sigma=constant(1.0); "
                     f"n={list(fields['n_list'])}, m={fields['inner_refinement']}, R={fields['replicates']}")
    return "\n".join(lines)
