"""Named experiment configurations.

Every preset spells out all settings.  Settings that are conventions
rather than reference values are listed in the preset's ``assumed`` field so that emitted
configurations say which numbers were chosen here.
"""

from __future__ import annotations

from typing import Callable

from .config import ConfigError, ExperimentConfig, MeasurementPlan

HORIZON = "grid.t_end: control horizon chosen to let V settle"
TIE = "fields.H2: equal-field tying f1 = f2 with H1 as sensing operator"
BOUNDARY = "bang_bang.boundary_layer: saturated switching law of width 0.01"
BOOTSTRAP = "lyapunov.bootstrap: phase reference 1 at zero target overlap"
FINE_DT = "grid.dt: reduced so halving dt moves fidelities by less than 1e-5"


def _ramp_pair(slope: float, intercept: float, window, clamp: bool = False) -> dict:
    ramp = {"kind": "linear_ramp", "slope": slope, "intercept": intercept, "window": list(window), "clamp": clamp}
    return {"H1": ramp, "H2": {"kind": "same_as", "control": "H1"}}


def _tied(kind: str, **opts) -> dict:
    return {"H1": {"kind": kind, **opts}, "H2": {"kind": "same_as", "control": "H1"}}


def fig2(T: float, tag: str) -> ExperimentConfig:
    return ExperimentConfig(
        name=f"fig2{tag}",
        scheme="teleportation",
        params={"E_c": 30.0, "epsilon": 5.0},
        initial="0001",
        target="psi_T",
        fields=_ramp_pair(-40.0 / T, 20.0, (-T, T)),
        grid={"t_start": -T, "t_end": T, "dt": 0.01},
        description=f"Teleportation by adiabatic passage, f(t) = -(40/T) t + 20 on both dots, T = {T:g}.",
    )


def fig3(tag: str, field: dict, what: str, extra_assumed: list[str]) -> ExperimentConfig:
    return ExperimentConfig(
        name=f"fig3{tag}",
        scheme="teleportation",
        params={"E_c": 20.0, "epsilon": 5.0},
        initial="0001",
        target="psi_T",
        fields=field,
        grid={"t_start": 0.0, "t_end": 20.0, "dt": 0.01},
        assumed=[HORIZON, TIE] + extra_assumed,
        description=f"Teleportation by Lyapunov control, {what}.",
    )


def josephson(name: str, fields: dict, t_end: float, what: str, assumed: list[str], t_start: float = 0.0) -> ExperimentConfig:
    return ExperimentConfig(
        name=name,
        scheme="josephson",
        params={"E_c": 20.0, "epsilon": 5.0, "E_J": 0.5},
        initial="0001",
        target="psi_T",
        fields=fields,
        grid={"t_start": t_start, "t_end": t_end, "dt": 0.01},
        assumed=assumed,
        description=what,
    )


def car(name: str, fields: dict, what: str, assumed: list[str], measurement=None, dt: float = 0.01) -> ExperimentConfig:
    return ExperimentConfig(
        name=name,
        scheme="car",
        params={"E_c": 20.0, "epsilon": 5.0, "E_J": 1.0, "n_g": 0.0},
        initial="0110",
        target="psi_T+",
        fields=fields,
        grid={"t_start": 0.0, "t_end": 300.0, "dt": dt},
        measurement=measurement,
        assumed=["params.E_c, params.E_J: assumed values", "initial: |0110> start", HORIZON] + assumed,
        description=what,
    )


def spin_flip(name: str, fields: dict, grid: dict, what: str, assumed: list[str]) -> ExperimentConfig:
    return ExperimentConfig(
        name=name,
        scheme="spin_flip",
        params={"epsilon": -10.0, "t_flip": 1.0},
        initial="000",
        target="psi_T'",
        fields=fields,
        grid=grid,
        assumed=["params.t_flip: spin-flip strength chosen as 1"] + assumed,
        description=what,
    )


def two_wire(name: str, eps: float, target: str, fields: dict, grid: dict, what: str,
             assumed: list[str], measurement=None) -> ExperimentConfig:
    return ExperimentConfig(
        name=name,
        scheme="two_wire",
        params={"epsilon": eps},
        initial="0000",
        target=target,
        fields=fields,
        grid=grid,
        measurement=measurement,
        assumed=["params.lambda1..lambda4: equal couplings"] + assumed,
        description=what,
    )


def _fig13_lyapunov(target: str) -> dict:
    rule = {"kind": "lyapunov", "gain": 1000.0, "target": target, "bootstrap": True}
    return {"H1": dict(rule), "H2": dict(rule)}


PRESETS: dict[str, Callable[[], ExperimentConfig]] = {
    "fig2a": lambda: fig2(40.0, "a"),
    "fig2b": lambda: fig2(10.0, "b"),
    "fig3ab": lambda: fig3("ab", _tied("lyapunov", gain=200.0), "continuous field B1 = 200", []),
    "fig3cd": lambda: fig3("cd", _tied("lyapunov", gain=300.0), "continuous field B1 = 300", []),
    "fig3ef": lambda: fig3(
        "ef", _tied("bang_bang", F=5.0, gain=1.0, deadband=0.01, boundary_layer=True),
        "square pulses F = 5", [BOUNDARY]),
    "fig3gh": lambda: fig3(
        "gh", _tied("bang_bang", F=10.0, gain=1.0, deadband=0.01, boundary_layer=True),
        "square pulses F = 10", [BOUNDARY]),
    "fig4a": lambda: josephson(
        "fig4a", _ramp_pair(-40.0 / 20.0, 20.0, (-20.0, 20.0)), 20.0,
        "Josephson-coupled teleportation by adiabatic passage, T = 20.", [], t_start=-20.0),
    "fig4bc": lambda: josephson(
        "fig4bc", _tied("lyapunov", gain=300.0), 60.0,
        "Josephson-coupled teleportation, Lyapunov control B1 = 300.", [HORIZON, TIE]),
    "fig4de": lambda: josephson(
        "fig4de", _tied("bang_bang", F=5.0, gain=1.0, deadband=0.01, boundary_layer=True), 100.0,
        "Josephson-coupled teleportation, square pulses F = 5.", [HORIZON, TIE, BOUNDARY]),
    "fig5ab": lambda: josephson(
        "fig5ab", {"H3": {"kind": "lyapunov", "gain": 100.0}}, 100.0,
        "Cooper-pair-exchange control H3, B3 = 100.", [HORIZON]),
    "fig5cd": lambda: josephson(
        "fig5cd", {"H3": {"kind": "bang_bang", "F": 2.0, "gain": 1.0, "deadband": 0.01, "boundary_layer": True}},
        200.0, "Cooper-pair-exchange control H3, square pulses F = 2.", [HORIZON, BOUNDARY]),
    "fig7a": lambda: car(
        "fig7a",
        {"H1": {"kind": "lyapunov", "gain": 100.0}, "H2": {"kind": "lyapunov", "gain": 100.0}},
        "Crossed Andreev reflection, independent dot-level controls B1 = B2 = 100.",
        ["fields: gains B1 = B2 = 100", FINE_DT], dt=0.0025),
    "fig7b": lambda: car(
        "fig7b", {"H3": {"kind": "lyapunov", "gain": 100.0}},
        "Crossed Andreev reflection, Cooper-pair-exchange control B3 = 100, then n_f parity measurement.",
        ["fields: gain B3 = 100", FINE_DT],
        measurement=MeasurementPlan(modes=["f"], branches={1: "psi_T+", -1: "odd_pair"}), dt=0.005),
    "fig9c": lambda: spin_flip(
        "fig9c", _ramp_pair(-2.0 / 5.0, 20.0, (-50.0, 50.0)),
        {"t_start": -50.0, "t_end": 50.0, "dt": 0.01},
        "Spin-flip scheme by adiabatic passage, f(t) = -(2/5) t + 20.",
        ["grid: ramp window [-50, 50] (field from 40 down to 0)"]),
    "fig9d": lambda: spin_flip(
        "fig9d", _tied("lyapunov", gain=1000.0),
        {"t_start": 0.0, "t_end": 30.0, "dt": 0.00125},
        "Spin-flip scheme by Lyapunov control, B1 = 1000.", [HORIZON, TIE, FINE_DT]),
    "fig13a": lambda: two_wire(
        "fig13a", 0.0, "psi_1", _ramp_pair(-6.0 / 5.0, 30.0, (-50.0, 50.0)),
        {"t_start": -50.0, "t_end": 50.0, "dt": 0.01},
        "Two wires, simultaneous equal ramps f1 = f2 = -(6/5) t + 30.", []),
    "fig13b": lambda: two_wire(
        "fig13b", 0.0, "psi_2",
        {
            "H1": {"kind": "linear_ramp", "slope": -1.2, "intercept": 30.0, "window": [-50.0, 50.0], "clamp": True},
            "H2": {"kind": "linear_ramp", "slope": -1.2, "intercept": 150.0, "window": [50.0, 150.0], "clamp": True},
        },
        {"t_start": -50.0, "t_end": 150.0, "dt": 0.01},
        "Two wires, sequential ramps (f1 on [-50, 50], then f2 = -(6/5)(t - 100) + 30 on [50, 150]), "
        "then n_f1 parity measurement.",
        ["fields: ramps hold their end values outside their windows"],
        measurement=MeasurementPlan(modes=["f1"], branches={1: "psi_2", -1: "psi_1"})),
    "fig13c": lambda: two_wire(
        "fig13c", -10.0, "psi_1", _fig13_lyapunov("psi_1"),
        {"t_start": 0.0, "t_end": 60.0, "dt": 0.01},
        "Two wires, Lyapunov control toward psi_1, B1 = B2 = 1000.",
        ["params.epsilon: -10", "fields: gains B1 = B2 = 1000", HORIZON, BOOTSTRAP]),
    "fig13d": lambda: two_wire(
        "fig13d", -10.0, "psi_2", _fig13_lyapunov("psi_2"),
        {"t_start": 0.0, "t_end": 30.0, "dt": 0.00125},
        "Two wires, Lyapunov control toward psi_2, B1 = B2 = 1000.",
        ["params.epsilon: -10", "fields: gains B1 = B2 = 1000", HORIZON, BOOTSTRAP, FINE_DT]),
}


def _eigen_sweep(name: str, scheme: str, params: dict, values: list[float], what: str, assumed: list[str]) -> ExperimentConfig:
    return ExperimentConfig(
        name=name,
        scheme=scheme,
        params=params,
        sweep={"mode": "eigen", "parameter": "params.epsilon", "values": values, "levels": 2},
        assumed=assumed,
        description=what,
    )


# half-integer grid: the CAR model is exactly degenerate at epsilon = 0
_CAR_GRID = [x + 0.5 for x in range(-40, 40)]
_SPIN_GRID = [float(x) for x in range(-40, 41, 2)]

EIGEN_PRESETS: dict[str, Callable[[], ExperimentConfig]] = {
    "fig6": lambda: _eigen_sweep(
        "fig6", "car", {"E_c": 30.0, "E_J": 1.0, "n_g": 0.0}, _CAR_GRID,
        "Two lowest CAR eigenvectors versus the dot level epsilon.",
        ["params.E_c = 30, params.E_J = 1: assumed values",
         "sweep.values: half-integer grid avoiding the exact degeneracy at epsilon = 0"]),
    "fig9ab": lambda: _eigen_sweep(
        "fig9ab", "spin_flip", {"t_flip": 1.0}, _SPIN_GRID,
        "Two lowest spin-flip eigenvectors versus the dot level epsilon.",
        ["params.t_flip: spin-flip strength chosen as 1"]),
    "fig12": lambda: _eigen_sweep(
        "fig12", "two_wire", {}, _SPIN_GRID,
        "Two lowest two-wire eigenvectors versus the dot level epsilon.",
        ["params.lambda1..lambda4: equal couplings"]),
}


def preset_names() -> list[str]:
    return list(PRESETS) + list(EIGEN_PRESETS)


def preset(name: str) -> ExperimentConfig:
    """Fully specified configuration for a named preset."""
    factory = PRESETS.get(name) or EIGEN_PRESETS.get(name)
    if factory is None:
        raise ConfigError(f"unknown preset {name!r}; valid names: {', '.join(preset_names())}")
    cfg = factory()
    if cfg.sample_interval is None and cfg.sweep is None:
        cfg.sample_interval = 0.05
    return cfg.effective()
