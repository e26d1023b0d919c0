"""Control fields: open-loop ramps and Lyapunov feedback.

Lyapunov design
---------------
With ``V = 1 - |<T|psi>|^2`` and ``|T>`` an eigenstate of ``H0``, the
Schrödinger equation gives::

    dV/dt = -2 |<psi|T>| sum_k f_k Im[exp(i arg<psi|T>) <T|H_k|psi>]

so choosing ``f_k = B_k Im[exp(i arg<psi|T>) <T|H_k|psi>]`` with
``B_k > 0`` makes ``dV/dt = -2 |<psi|T>| sum_k f_k^2 / B_k <= 0``.
Replacing ``f_k`` by ``F sign(f_k)`` (bang-bang) keeps the sign of every
term and hence the descent.

Discrete closed loop
--------------------
The loop holds each field constant over a step.  By default the field is
evaluated at a predicted half-step state (exact half step with the
start-of-step field), which makes the sampled-data loop second-order
accurate in ``dt``.  An optional descent guard halves the feedback
amplitude on a step until ``V`` does not increase; for an eigenstate
target free evolution leaves ``V`` unchanged, so the guard always
terminates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
from numpy.typing import NDArray

from .dynamics import TimeGrid, Trajectory, _unitary
from .fock import BasisError, Operator, QuantumState

PHASE_DEADBAND = 1e-10
GUARD_SLACK = 1e-15
GUARD_HALVINGS = 40


# ---------------------------------------------------------------------------
# field specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Constant:
    """Time-independent amplitude."""

    value: float
    feedback = False

    def amplitude(self, t: float) -> float:
        return self.value


@dataclass(frozen=True)
class LinearRamp:
    """``slope * t + intercept`` inside ``window``.

    Outside the window the field is zero, or, with ``clamp=True``, held at
    the value of the nearer window edge.
    """

    slope: float
    intercept: float
    window: tuple[float, float]
    clamp: bool = False
    feedback = False

    def __post_init__(self) -> None:
        a, b = self.window
        if not a <= b:
            raise ValueError(f"ramp window {self.window} is not ordered")

    def amplitude(self, t: float) -> float:
        a, b = self.window
        if t < a or t > b:
            if not self.clamp:
                return 0.0
            t = a if t < a else b
        return self.slope * t + self.intercept


def linear_ramp(slope: float, intercept: float, window: tuple[float, float], clamp: bool = False) -> LinearRamp:
    return LinearRamp(float(slope), float(intercept), (float(window[0]), float(window[1])), bool(clamp))


@dataclass(frozen=True, eq=False)
class LyapunovFeedback:
    """Continuous Lyapunov field ``f = B Im[exp(i arg<psi|T>) <T|H_sense|psi>]``.

    Parameters
    ----------
    gain : float
        ``B > 0``.
    target : QuantumState, optional
        Steering target ``|T>``; filled in by the closed loop from the
        scheme (see :func:`majorana_bell.schemes.steering_target`) if None.
    sense : str, optional
        Label of the control Hamiltonian used inside the law.  Defaults to
        the first control this field is assigned to, so one object shared
        by two controls (equal-field tying) is computed once.
    bootstrap : bool
        At zero overlap the phase ``arg<psi|T>`` is undefined.  By default
        the field is then zero; with ``bootstrap=True`` the phase factor is
        taken as 1 so the field can leave an invariant zero-overlap set.
    """

    gain: float
    target: QuantumState | None = None
    sense: str | None = None
    bootstrap: bool = False
    feedback = True

    def __post_init__(self) -> None:
        if not self.gain > 0:
            raise ValueError(f"Lyapunov gain must be positive, got {self.gain}")


@dataclass(frozen=True, eq=False)
class BangBang:
    """Square-pulse version of a Lyapunov rule.

    ``F * sign(raw)`` outside ``|raw| <= deadband`` and zero inside.  With
    ``boundary_layer=True`` the law is instead the saturation
    ``F * clip(raw / deadband, -1, 1)``, continuous at the switching
    surface.  ``deadband=None`` means ``1e-8 * F``.
    """

    F: float
    rule: LyapunovFeedback
    deadband: float | None = None
    boundary_layer: bool = False
    feedback = True

    def __post_init__(self) -> None:
        if not self.F > 0:
            raise ValueError(f"bang-bang amplitude must be positive, got {self.F}")
        if self.deadband is not None and self.deadband < 0:
            raise ValueError("deadband must be non-negative")
        if self.boundary_layer and not (self.deadband and self.deadband > 0):
            raise ValueError("a boundary layer needs a positive deadband")

    @property
    def effective_deadband(self) -> float:
        return 1e-8 * self.F if self.deadband is None else self.deadband


# ---------------------------------------------------------------------------
# laws
# ---------------------------------------------------------------------------


def lyapunov_value(state: QuantumState, target: QuantumState) -> float:
    """``V = 1 - |<target|state>|^2``."""
    return 1.0 - abs(target.overlap(state)) ** 2


def _phase(overlap: complex, bootstrap: bool) -> complex | None:
    mag = abs(overlap)
    if mag < PHASE_DEADBAND:
        return 1.0 + 0j if bootstrap else None
    return overlap / mag


def _raw_law(psi: NDArray, target: NDArray, hk: NDArray, gain: float, bootstrap: bool) -> float:
    ph = _phase(np.vdot(psi, target), bootstrap)
    if ph is None:
        return 0.0
    return gain * float(np.imag(ph * np.vdot(target, hk @ psi)))


def lyapunov_field(
    state: QuantumState,
    target: QuantumState,
    Hk: Operator,
    Bk: float,
    bootstrap: bool = False,
) -> float:
    """Descent field ``B_k Im[exp(i arg<psi|T>) <T|H_k|psi>]``.

    Returns 0 when ``|<psi|T>| < 1e-10`` unless ``bootstrap`` is set.
    """
    if not Bk > 0:
        raise ValueError("gain must be positive")
    if state.basis != target.basis or Hk.basis != state.basis:
        raise BasisError("state, target and control must share a basis")
    return _raw_law(state.amplitudes, target.amplitudes, Hk.matrix, Bk, bootstrap)


def bang_bang_field(raw: float, F: float, deadband: float = 0.0, boundary_layer: bool = False) -> float:
    """Square-pulse amplitude with the sign of ``raw``.

    Examples
    --------
    >>> bang_bang_field(0.3, 5.0, 1e-8)
    5.0
    >>> bang_bang_field(0.0, 5.0, 1e-8)
    0.0
    """
    if not F > 0:
        raise ValueError("F must be positive")
    if deadband < 0:
        raise ValueError("deadband must be non-negative")
    if boundary_layer:
        if deadband <= 0:
            raise ValueError("a boundary layer needs a positive deadband")
        return F * min(1.0, max(-1.0, raw / deadband))
    if raw > deadband:
        return F
    if raw < -deadband:
        return -F
    return 0.0


# ---------------------------------------------------------------------------
# closed loop
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ControllerDiagnostics:
    """Summary of a closed-loop run.

    Attributes
    ----------
    lyapunov : array
        ``V`` after each step (index 0 is the initial state).
    first_passage : float or None
        First time the target population reaches ``threshold``.
    threshold : float
    switch_count : int
        Sign changes of the square-pulse fields (chattering measure).
    guard_activations : int
        Steps on which the descent guard reduced the feedback amplitude.
    max_increase : float
        Largest single-step increase of ``V`` (negative if ``V`` never rose).
    """

    lyapunov: NDArray[np.float64]
    first_passage: float | None
    threshold: float
    switch_count: int
    guard_activations: int
    max_increase: float


def first_passage_time(times: NDArray, values: NDArray, threshold: float) -> float | None:
    """First time ``values >= threshold``, linearly interpolated between samples."""
    hit = np.nonzero(values >= threshold)[0]
    if hit.size == 0:
        return None
    i = int(hit[0])
    if i == 0:
        return float(times[0])
    v0, v1 = values[i - 1], values[i]
    frac = (threshold - v0) / (v1 - v0)
    return float(times[i - 1] + frac * (times[i] - times[i - 1]))


def count_switches(signal: NDArray) -> int:
    """Sign changes between consecutive nonzero samples."""
    s = np.sign(signal[signal != 0])
    return int(np.count_nonzero(s[1:] != s[:-1]))


class _FeedbackPlan:
    """Resolve field specs for a scheme into fast array-level evaluators."""

    def __init__(self, scheme, fields: Sequence[Any], steering_default: QuantumState | None):
        labels = scheme.control_labels
        if len(fields) != len(labels):
            raise ValueError(f"expected {len(labels)} fields for controls {labels}, got {len(fields)}")
        self.n = len(labels)
        self.hk = [op.matrix for _, op in scheme.controls]
        self.open: list[tuple[int, Any]] = []
        self.groups: list[dict] = []
        by_id: dict[int, dict] = {}
        for k, (f, lbl) in enumerate(zip(fields, labels)):
            if f is None or isinstance(f, (int, float)):
                v = 0.0 if f is None else float(f)
                if v != 0.0:
                    self.open.append((k, Constant(v)))
                continue
            if not getattr(f, "feedback", False):
                if not hasattr(f, "amplitude"):
                    raise TypeError(f"cannot interpret field {f!r} for control {lbl}")
                self.open.append((k, f))
                continue
            if id(f) in by_id:
                by_id[id(f)]["apply"].append(k)
                continue
            rule = f.rule if isinstance(f, BangBang) else f
            sense = rule.sense if rule.sense is not None else lbl
            target = rule.target if rule.target is not None else steering_default
            if target is None:
                raise ValueError("feedback field has no target")
            if target.basis != scheme.basis:
                raise BasisError("feedback target is not on the scheme basis")
            g = {
                "field_spec": f,
                "apply": [k],
                "h_sense": scheme.control(sense).matrix,
                "target": np.asarray(target.amplitudes),
                "target_state": target,
                "gain": rule.gain,
                "bootstrap": rule.bootstrap,
            }
            by_id[id(f)] = g
            self.groups.append(g)
        self.bang = [isinstance(g["field_spec"], BangBang) for g in self.groups]

    @property
    def has_feedback(self) -> bool:
        return bool(self.groups)

    def steering(self) -> QuantumState | None:
        return self.groups[0]["target_state"] if self.groups else None

    def feedback_values(self, psi: NDArray) -> list[float]:
        out = []
        for g in self.groups:
            raw = _raw_law(psi, g["target"], g["h_sense"], g["gain"], g["bootstrap"])
            field_spec = g["field_spec"]
            if isinstance(field_spec, BangBang):
                raw = bang_bang_field(raw, field_spec.F, field_spec.effective_deadband, field_spec.boundary_layer)
            out.append(raw)
        return out

    def open_values(self, t: float) -> NDArray:
        f = np.zeros(self.n)
        for k, field_spec in self.open:
            f[k] = field_spec.amplitude(t)
        return f

    def spread(self, fb: Sequence[float], scale: float = 1.0) -> NDArray:
        f = np.zeros(self.n)
        for g, v in zip(self.groups, fb):
            for k in g["apply"]:
                f[k] += scale * v
        return f

    def hamiltonian(self, h0: NDArray, f: NDArray) -> NDArray:
        h = h0
        for k in range(self.n):
            if f[k] != 0.0:
                h = h + f[k] * self.hk[k]
        return h


def run_controlled_evolution(
    scheme,
    fields: Sequence[Any],
    psi0: QuantumState,
    grid: TimeGrid,
    stop: float | None = None,
    target: QuantumState | None = None,
    steering: QuantumState | None = None,
    sampling: str = "midpoint",
    descent_guard: bool = True,
    threshold: float = 0.9,
) -> tuple[Trajectory, ControllerDiagnostics]:
    """Closed-loop evolution under feedback and/or open-loop fields.

    Parameters
    ----------
    scheme : SchemeModel
    fields : sequence
        One entry per control: ``None``/number, open-loop field,
        :class:`LyapunovFeedback` or :class:`BangBang`.  Passing the same
        feedback object for several controls ties their amplitudes.
    psi0 : QuantumState
    grid : TimeGrid
    stop : float, optional
        Stop once the target population reaches this value.
    target : QuantumState, optional
        Reporting target (default: the scheme's main Bell state).
    steering : QuantumState, optional
        Target for feedback fields that do not carry one (default: the
        ``H0`` eigenstate closest to ``target``).
    sampling : {"midpoint", "start"}
        Where in the step the feedback law is evaluated.  ``"start"`` is
        a plain zero-order hold of the step-start value.
    descent_guard : bool
        Halve the feedback on a step until ``V`` does not increase.
    threshold : float
        Population level for the first-passage diagnostic.
    """
    from .schemes import steering_target

    if sampling not in ("midpoint", "start"):
        raise ValueError("sampling must be 'midpoint' or 'start'")
    if psi0.basis != scheme.basis:
        raise BasisError("initial state is not on the scheme basis")
    report = scheme.target if target is None else target
    if steering is None:
        steering = _steering_for(scheme, report, steering_target)
    plan = _FeedbackPlan(scheme, fields, steering)
    guard_target = plan.steering()
    h0 = scheme.H0.matrix
    times = grid.times()
    n = len(times) - 1
    amps = np.empty((n + 1, scheme.dimension), dtype=complex)
    applied = np.zeros((n, plan.n))
    psi = np.array(psi0.amplitudes, dtype=complex)
    amps[0] = psi
    rep = np.asarray(report.amplitudes)
    tgt = None if guard_target is None else np.asarray(guard_target.amplitudes)
    guard_hits = 0
    last = n
    for i in range(n):
        t0, t1 = times[i], times[i + 1]
        h = t1 - t0
        f_open = plan.open_values(0.5 * (t0 + t1))
        fb: list[float] = []
        if plan.has_feedback:
            fb = plan.feedback_values(psi)
            if sampling == "midpoint":
                hs = plan.hamiltonian(h0, f_open + plan.spread(fb))
                half = _unitary(hs, 0.5 * h) @ psi
                fb = plan.feedback_values(half)
        scale = 1.0
        while True:
            f = f_open + plan.spread(fb, scale)
            new = _unitary(plan.hamiltonian(h0, f), h) @ psi
            if not (descent_guard and plan.has_feedback) or scale == 0.0:
                break
            v_old = 1.0 - abs(np.vdot(tgt, psi)) ** 2
            v_new = 1.0 - abs(np.vdot(tgt, new)) ** 2
            if v_new <= v_old + GUARD_SLACK:
                break
            if scale == 1.0:
                guard_hits += 1
            scale = scale / 2 if scale > 2.0**-GUARD_HALVINGS else 0.0
        psi = new
        amps[i + 1] = psi
        applied[i] = f
        if stop is not None and abs(np.vdot(rep, psi)) ** 2 >= stop:
            last = i + 1
            break
    traj = Trajectory(
        times=times[: last + 1],
        amplitudes=amps[: last + 1],
        fields=applied[:last],
        field_labels=scheme.control_labels,
        basis=scheme.basis,
        labels=scheme.labels,
        target=report,
        steering=guard_target if guard_target is not None else steering,
    )
    lv = traj.lyapunov if traj.lyapunov is not None else np.zeros(len(traj))
    switches = 0
    for g, is_bang in zip(plan.groups, plan.bang):
        if is_bang:
            switches += count_switches(traj.fields[:, g["apply"][0]])
    diag = ControllerDiagnostics(
        lyapunov=lv,
        first_passage=first_passage_time(traj.times, traj.target_population, threshold),
        threshold=threshold,
        switch_count=switches,
        guard_activations=guard_hits,
        max_increase=float(np.max(np.diff(lv), initial=-math.inf)) if len(lv) > 1 else 0.0,
    )
    return traj, diag


def _steering_for(scheme, report: QuantumState, steering_target) -> QuantumState:
    for name, st in scheme.targets.items():
        if st is report or np.array_equal(st.amplitudes, report.amplitudes):
            return steering_target(scheme, name)
    return report
