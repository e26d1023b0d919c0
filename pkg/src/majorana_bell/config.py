"""Experiment configuration documents.

A run is described by one YAML (or JSON) mapping.  Physical quantities
are in units of the tunnel coupling (energies) and its inverse (times).

Example::

    name: my-run
    scheme: teleportation
    params: {E_c: 20, epsilon: 5}
    initial: "0001"
    target: psi_T
    fields:
      H1: {kind: lyapunov, gain: 200}
      H2: {kind: same_as, control: H1}
    grid: {t_start: 0, t_end: 20, dt: 0.01}

Field kinds: ``constant`` (value), ``linear_ramp`` (slope, intercept,
window, clamp), ``lyapunov`` (gain, target, sense, bootstrap),
``bang_bang`` (F, gain, deadband, boundary_layer, target, sense,
bootstrap) and ``same_as`` (control) for equal-field tying.
"""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field, fields as dc_fields
from pathlib import Path
from typing import Any

import yaml

from .schemes import BUILDERS, DEFAULT_PARAMS, SchemeParams, build_scheme

FIELD_KEYS: dict[str, dict[str, Any]] = {
    "constant": {"value": None},
    "linear_ramp": {"slope": None, "intercept": None, "window": None, "clamp": False},
    "lyapunov": {"gain": None, "target": None, "sense": None, "bootstrap": False},
    "bang_bang": {
        "F": None, "gain": 1.0, "deadband": None, "boundary_layer": False,
        "target": None, "sense": None, "bootstrap": False,
    },
    "same_as": {"control": None},
}


class ConfigError(ValueError):
    """The configuration document is malformed or does not resolve."""


@dataclass
class MeasurementPlan:
    """Parity measurement after the evolution.

    ``branches`` maps outcome (+1 even, -1 odd) to the name of the target
    whose fidelity is reported after collapse.  Probabilities are always
    exact Born values; ``shots > 0`` together with a seed additionally
    samples outcome frequencies.
    """

    modes: list[str]
    branches: dict[int, str] = field(default_factory=dict)
    shots: int = 0
    seed: int | None = None

    def validate(self) -> None:
        if not self.modes:
            raise ConfigError("measurement.modes must name at least one mode")
        for k in self.branches:
            if k not in (1, -1):
                raise ConfigError(f"measurement branch keys must be +1/-1, got {k!r}")
        if self.shots < 0:
            raise ConfigError("measurement.shots must be >= 0")
        if self.shots > 0 and self.seed is None:
            raise ConfigError("sampled shots need a seed")


@dataclass
class ExperimentConfig:
    name: str
    scheme: str
    params: dict[str, float] = field(default_factory=dict)
    initial: str = ""
    target: str | None = None
    fields: dict[str, dict[str, Any]] = field(default_factory=dict)
    grid: dict[str, float] = field(default_factory=lambda: {"t_start": 0.0, "t_end": 10.0, "dt": 0.01})
    stop: float | None = None
    threshold: float = 0.9
    sampling: str = "midpoint"
    descent_guard: bool = True
    measurement: MeasurementPlan | None = None
    sample_interval: float | None = None
    sweep: dict[str, Any] | None = None
    assumed: list[str] = field(default_factory=list)
    description: str = ""

    # -- conversion -------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        if self.measurement is not None:
            d["measurement"]["branches"] = {int(k): v for k, v in self.measurement.branches.items()}
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a mapping")
        known = {f.name for f in dc_fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        for req in ("name", "scheme"):
            if req not in data:
                raise ConfigError(f"configuration needs {req!r}")
        d = copy.deepcopy(data)
        m = d.get("measurement")
        if m is not None:
            if not isinstance(m, dict):
                raise ConfigError("measurement must be a mapping")
            try:
                branches = {int(k): str(v) for k, v in (m.get("branches") or {}).items()}
                d["measurement"] = MeasurementPlan(
                    modes=list(m.get("modes") or []),
                    branches=branches,
                    shots=int(m.get("shots", 0)),
                    seed=None if m.get("seed") is None else int(m["seed"]),
                )
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad measurement plan: {exc}") from None
        return cls(**d)

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, allow_unicode=True)

    def copy(self) -> "ExperimentConfig":
        return ExperimentConfig.from_dict(self.to_dict())

    # -- resolution -------------------------------------------------------

    def scheme_params(self) -> SchemeParams:
        base = DEFAULT_PARAMS[self.scheme]
        try:
            return base.updated(**{k: (None if v is None else float(v)) for k, v in self.params.items()})
        except TypeError as exc:
            raise ConfigError(f"bad scheme parameter: {exc}") from None

    def effective(self) -> "ExperimentConfig":
        """Copy with every scheme parameter and field option spelled out."""
        out = self.copy()
        out.params = {k: v for k, v in asdict(self.scheme_params()).items()}
        for label, field_spec in out.fields.items():
            kind = field_spec.get("kind")
            full = dict(FIELD_KEYS.get(kind, {}))
            full.update(field_spec)
            out.fields[label] = {"kind": kind, **{k: v for k, v in full.items() if k != "kind"}}
        return out

    def validate(self) -> None:
        """Check that every reference resolves; raise :class:`ConfigError`."""
        if self.scheme not in BUILDERS:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {sorted(BUILDERS)}")
        unknown = set(self.params) - {f.name for f in dc_fields(SchemeParams)}
        if unknown:
            raise ConfigError(f"unknown scheme parameters: {sorted(unknown)}")
        try:
            model = build_scheme(self.scheme, self.scheme_params())
        except ValueError as exc:
            raise ConfigError(f"scheme parameters rejected: {exc}") from None
        if self.sweep is not None and self.sweep.get("mode") == "eigen":
            _check_sweep(self.sweep)
            return
        if self.initial == "":
            raise ConfigError("initial state label is required")
        try:
            model.index(self.initial)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.target is not None and self.target not in model.targets:
            raise ConfigError(f"unknown target {self.target!r}; choose from {sorted(model.targets)}")
        for key in ("t_start", "t_end", "dt"):
            if key not in self.grid:
                raise ConfigError(f"grid needs {key!r}")
        if float(self.grid["dt"]) <= 0 or float(self.grid["t_end"]) <= float(self.grid["t_start"]):
            raise ConfigError("grid needs dt > 0 and t_end > t_start")
        if self.sampling not in ("midpoint", "start"):
            raise ConfigError("sampling must be 'midpoint' or 'start'")
        for label, field_spec in self.fields.items():
            if label not in model.control_labels:
                raise ConfigError(f"field for unknown control {label!r}; scheme has {model.control_labels}")
            _check_field(label, field_spec, model, self.fields)
        if self.measurement is not None:
            self.measurement.validate()
            for mode in self.measurement.modes:
                if mode not in model.register.fermion_modes:
                    raise ConfigError(f"unknown measurement mode {mode!r}")
            for name in self.measurement.branches.values():
                if name not in model.targets:
                    raise ConfigError(f"unknown branch target {name!r}")
        if self.sweep is not None:
            _check_sweep(self.sweep)


def _check_field(label: str, field_spec: dict, model, all_fields: dict) -> None:
    if not isinstance(field_spec, dict) or "kind" not in field_spec:
        raise ConfigError(f"field {label!r} needs a 'kind'")
    kind = field_spec["kind"]
    if kind not in FIELD_KEYS:
        raise ConfigError(f"field {label!r}: unknown kind {kind!r}; choose from {sorted(FIELD_KEYS)}")
    extra = set(field_spec) - set(FIELD_KEYS[kind]) - {"kind"}
    if extra:
        raise ConfigError(f"field {label!r}: unknown options {sorted(extra)} for kind {kind!r}")
    for key, default in FIELD_KEYS[kind].items():
        if default is None and field_spec.get(key) is None and key not in ("target", "sense", "deadband"):
            raise ConfigError(f"field {label!r}: {kind} needs {key!r}")
    if kind == "same_as":
        other = field_spec["control"]
        if other not in all_fields or all_fields[other].get("kind") == "same_as":
            raise ConfigError(f"field {label!r}: same_as must point at a directly specified control")
    if kind == "linear_ramp":
        w = field_spec["window"]
        if len(w) != 2 or float(w[0]) > float(w[1]):
            raise ConfigError(f"field {label!r}: ramp window must be [start, end] with start <= end")
    if kind in ("lyapunov", "bang_bang"):
        if float(field_spec.get("gain", 1.0)) <= 0:
            raise ConfigError(f"field {label!r}: gain must be positive")
        if kind == "bang_bang" and float(field_spec["F"]) <= 0:
            raise ConfigError(f"field {label!r}: F must be positive")
        tgt = field_spec.get("target")
        if tgt is not None and tgt not in model.targets:
            raise ConfigError(f"field {label!r}: unknown target {tgt!r}")
        sense = field_spec.get("sense")
        if sense is not None and sense not in model.control_labels:
            raise ConfigError(f"field {label!r}: unknown sensing control {sense!r}")


def _check_sweep(sweep: dict) -> None:
    if "parameter" not in sweep or "values" not in sweep:
        raise ConfigError("sweep needs 'parameter' and 'values'")
    if sweep.get("mode", "run") not in ("run", "eigen"):
        raise ConfigError("sweep mode must be 'run' or 'eigen'")


def load_config(path: str | Path) -> ExperimentConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text) if str(path).endswith(".json") else yaml.safe_load(text)
    except (yaml.YAMLError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    return ExperimentConfig.from_dict(data)


def save_config(config: ExperimentConfig, path: str | Path) -> None:
    Path(path).write_text(config.dump(), encoding="utf-8")


def get_path(config: ExperimentConfig, path: str) -> Any:
    node: Any = config.to_dict()
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"config path {path!r} does not exist")
        node = node[part]
    return node


def set_path(config: ExperimentConfig, path: str, value: Any) -> ExperimentConfig:
    """Copy of ``config`` with the scalar at dotted ``path`` replaced."""
    data = config.to_dict()
    parts = path.split(".")
    node = data
    for part in parts[:-1]:
        if not isinstance(node, dict):
            raise ConfigError(f"config path {path!r} does not exist")
        node = node.setdefault(part, {}) if part == "params" else node.get(part)
        if node is None:
            raise ConfigError(f"config path {path!r} does not exist")
    leaf = parts[-1]
    if not isinstance(node, dict):
        raise ConfigError(f"config path {path!r} does not exist")
    if parts[0] != "params" and leaf not in node:
        raise ConfigError(f"config path {path!r} does not exist")
    current = node.get(leaf)
    if isinstance(current, (dict, list)):
        raise ConfigError(f"config path {path!r} is not a scalar")
    node[leaf] = value
    return ExperimentConfig.from_dict(data)
