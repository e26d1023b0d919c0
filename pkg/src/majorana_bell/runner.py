"""Execute experiment configurations: single runs and parameter sweeps."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .config import ConfigError, ExperimentConfig, get_path, set_path
from .control import (
    BangBang,
    ControllerDiagnostics,
    LinearRamp,
    LyapunovFeedback,
    Constant,
    run_controlled_evolution,
)
from .dynamics import TimeGrid, Trajectory, measure_parity, outcome_probabilities, parity_operator, population
from .fock import hermitian_eigensolve
from .schemes import SchemeModel, bell_target, build_scheme, steering_target, total_parity


DEFAULT_SHOTS = 10_000


class StageError(RuntimeError):
    """Failure inside one stage of a run; ``stage`` names it."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass
class BranchStatistics:
    outcome: int
    probability: float
    frequency: float | None
    target: str | None
    fidelity: float | None


@dataclass
class RunSummary:
    """Scalar results of one run."""

    name: str
    final_populations: dict[str, float]
    final_target_population: float
    first_passage: float | None
    lyapunov_min: float
    lyapunov_max: float
    lyapunov_max_increase: float
    norm_drift: float
    parity_drift: float
    steps: int
    branches: list[BranchStatistics] = field(default_factory=list)

    def row(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "name": self.name,
            "final_target_population": self.final_target_population,
            "first_passage": self.first_passage,
            "lyapunov_min": self.lyapunov_min,
            "lyapunov_max": self.lyapunov_max,
            "lyapunov_max_increase": self.lyapunov_max_increase,
            "norm_drift": self.norm_drift,
            "parity_drift": self.parity_drift,
        }
        out.update({f"pop|{k}>": v for k, v in self.final_populations.items()})
        for b in self.branches:
            tag = "even" if b.outcome == 1 else "odd"
            out[f"{tag}_probability"] = b.probability
            out[f"{tag}_fidelity"] = b.fidelity
        return out


@dataclass
class RunResult:
    config: ExperimentConfig
    model: SchemeModel
    trajectory: Trajectory
    diagnostics: ControllerDiagnostics
    summary: RunSummary


def build_fields(config: ExperimentConfig, model: SchemeModel) -> list[Any]:
    """Field objects aligned with ``model.control_labels``."""
    built: dict[str, Any] = {}
    for label, field_spec in config.fields.items():
        kind = field_spec["kind"]
        if kind == "constant":
            built[label] = Constant(float(field_spec["value"]))
        elif kind == "linear_ramp":
            w = field_spec["window"]
            built[label] = LinearRamp(float(field_spec["slope"]), float(field_spec["intercept"]),
                                      (float(w[0]), float(w[1])), bool(field_spec.get("clamp", False)))
        elif kind in ("lyapunov", "bang_bang"):
            tgt = field_spec.get("target")
            rule = LyapunovFeedback(
                gain=float(field_spec.get("gain", 1.0)),
                target=None if tgt is None else steering_target(model, tgt),
                sense=field_spec.get("sense"),
                bootstrap=bool(field_spec.get("bootstrap", False)),
            )
            if kind == "lyapunov":
                built[label] = rule
            else:
                db = field_spec.get("deadband")
                built[label] = BangBang(float(field_spec["F"]), rule, None if db is None else float(db),
                                        bool(field_spec.get("boundary_layer", False)))
    for label, field_spec in config.fields.items():
        if field_spec["kind"] == "same_as":
            built[label] = built[field_spec["control"]]
    return [built.get(label) for label in model.control_labels]


def run(config: ExperimentConfig, seed: int | None = None, dt: float | None = None) -> RunResult:
    """Build, evolve and (optionally) measure.

    ``seed`` overrides the measurement seed and switches on sampled shots
    if the plan has a shot count; ``dt`` overrides the grid step.
    """
    try:
        config = config.effective()
        if dt is not None:
            config.grid["dt"] = float(dt)
        if seed is not None and config.measurement is not None:
            config.measurement.seed = int(seed)
            if config.measurement.shots == 0:
                config.measurement.shots = DEFAULT_SHOTS
        config.validate()
    except (ConfigError, ValueError, TypeError) as exc:
        raise StageError("config", str(exc)) from exc
    if config.sweep is not None:
        raise StageError("config", "this configuration describes a sweep; use sweep()")
    try:
        model = build_scheme(config.scheme, config.scheme_params())
        fields = build_fields(config, model)
        report = bell_target(model, config.target)
        psi0 = model.ket(config.initial)
        grid = TimeGrid(float(config.grid["t_start"]), float(config.grid["t_end"]), float(config.grid["dt"]))
    except (ValueError, TypeError) as exc:
        raise StageError("build", str(exc)) from exc
    try:
        traj, diag = run_controlled_evolution(
            model, fields, psi0, grid,
            stop=config.stop, target=report,
            steering=steering_target(model, config.target),
            sampling=config.sampling, descent_guard=config.descent_guard,
            threshold=config.threshold,
        )
    except (ValueError, TypeError, np.linalg.LinAlgError) as exc:
        raise StageError("evolve", str(exc)) from exc
    try:
        branches = _measure(config, model, traj)
    except ValueError as exc:
        raise StageError("measure", str(exc)) from exc
    summary = summarize(config.name, model, traj, diag, branches)
    return RunResult(config, model, traj, diag, summary)


def summarize(name: str, model: SchemeModel, traj: Trajectory, diag: ControllerDiagnostics,
              branches: list[BranchStatistics]) -> RunSummary:
    lv = diag.lyapunov
    return RunSummary(
        name=name,
        final_populations={lbl: float(p) for lbl, p in zip(model.labels, traj.populations[-1])},
        final_target_population=float(traj.target_population[-1]),
        first_passage=diag.first_passage,
        lyapunov_min=float(lv.min()),
        lyapunov_max=float(lv.max()),
        lyapunov_max_increase=diag.max_increase,
        norm_drift=traj.norm_drift(),
        parity_drift=traj.expectation_drift(total_parity(model)),
        steps=len(traj) - 1,
        branches=branches,
    )


def _measure(config: ExperimentConfig, model: SchemeModel, traj: Trajectory) -> list[BranchStatistics]:
    plan = config.measurement
    if plan is None or not plan.modes:
        return []
    parity = parity_operator(model.register, plan.modes, model.basis)
    final = traj.final_state
    probs = outcome_probabilities(final, parity)
    freq: dict[int, float] = {}
    if plan.shots > 0:
        rng = np.random.default_rng(plan.seed)
        hits = sum(measure_parity(final, parity, rng=rng).outcome == 1 for _ in range(plan.shots))
        freq = {1: hits / plan.shots, -1: (plan.shots - hits) / plan.shots}
    out = []
    for outcome in (1, -1):
        name = plan.branches.get(outcome)
        fid = None
        if probs[outcome] >= 1e-12:
            collapsed = measure_parity(final, parity, outcome=outcome).collapsed
            if name is not None:
                fid = population(collapsed, bell_target(model, name))
        out.append(BranchStatistics(outcome, probs[outcome], freq.get(outcome), name, fid))
    return out


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


def sweep(config: ExperimentConfig, parameter: str, values: Sequence[float], workers: int = 4) -> list[dict[str, Any]]:
    """One summary row per value of the scalar at ``parameter``.

    Rows are computed independently (concurrently) and returned in the
    order of ``values``.
    """
    base = config.effective()
    base.sweep = None
    current = get_path(base, parameter) if not parameter.startswith("params.") else None
    if isinstance(current, (dict, list)):
        raise ConfigError(f"config path {parameter!r} is not a scalar")
    configs = [set_path(base, parameter, float(v)) for v in values]

    def one(item):
        value, cfg = item
        row = {"value": value}
        row.update(run(cfg).summary.row())
        return row

    if not configs:
        return []
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return list(pool.map(one, zip(values, configs)))


def eigen_sweep(scheme: str, params: dict[str, float], parameter: str, values: Sequence[float],
                levels: int = 2) -> list[dict[str, Any]]:
    """Lowest ``levels`` eigenpairs of ``H0`` as ``parameter`` varies.

    One row per (value, level) with the energy and the real basis
    amplitudes (the models are real symmetric, and eigenvectors are
    phased so their largest component is positive).
    """
    key = parameter.split(".", 1)[1] if parameter.startswith("params.") else parameter
    base = ExperimentConfig(name="sweep", scheme=scheme, params=dict(params))
    rows: list[dict[str, Any]] = []
    for v in values:
        cfg = base.copy()
        cfg.params[key] = float(v)
        try:
            model = build_scheme(scheme, cfg.scheme_params())
        except ValueError as exc:
            raise StageError("build", str(exc)) from exc
        eig = hermitian_eigensolve(model.H0)
        for level in range(min(levels, len(eig))):
            vec = eig.vectors[:, level]
            row: dict[str, Any] = {"value": float(v), "level": level, "energy": float(eig.values[level])}
            row.update({f"amp|{lbl}>": float(a.real) for lbl, a in zip(model.labels, vec)})
            rows.append(row)
    return rows


def run_config_sweep(config: ExperimentConfig) -> list[dict[str, Any]]:
    """Execute the ``sweep`` block of a configuration."""
    sw = config.sweep
    if sw is None:
        raise ConfigError("configuration has no sweep block")
    values = [float(v) for v in sw["values"]]
    if sw.get("mode", "run") == "eigen":
        return eigen_sweep(config.scheme, config.params, sw["parameter"], values, int(sw.get("levels", 2)))
    return sweep(config, sw["parameter"], values)


def weight(row: dict[str, Any], labels: Sequence[str]) -> float:
    return float(sum(row[f"amp|{lbl}>"] ** 2 for lbl in labels))
