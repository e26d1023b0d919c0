"""Time evolution, populations and projective parity measurement.

The Schrödinger equation ``i d|psi>/dt = [H0 + sum_k f_k(t) H_k] |psi>``
is integrated with piecewise-constant Hamiltonians: on each step the
fields are frozen at the step midpoint and the state is multiplied by the
exact ``exp(-i H dt)`` obtained from an eigendecomposition.  Nothing is
renormalized, so the norm drift of a trajectory is a genuine accuracy
diagnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from numpy.typing import NDArray

from .fock import (
    BasisError,
    BasisState,
    ModeRegister,
    NotHermitianError,
    Operator,
    QuantumState,
    HERMITIAN_TOL,
)

DEFAULT_DT = 0.01


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid from ``t_start`` to ``t_end`` with step ``dt``.

    If the span is not an integer number of steps the final step is
    shortened so the grid still ends exactly at ``t_end``.
    """

    t_start: float
    t_end: float
    dt: float = DEFAULT_DT

    def __post_init__(self) -> None:
        if not (math.isfinite(self.t_start) and math.isfinite(self.t_end) and math.isfinite(self.dt)):
            raise ValueError("time grid values must be finite")
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if (self.t_end - self.t_start) / self.dt < 1 - 1e-9:
            raise ValueError("time grid must contain at least one step")

    @property
    def n_steps(self) -> int:
        span = (self.t_end - self.t_start) / self.dt
        n = round(span)
        return n if abs(span - n) <= 1e-9 * max(1.0, span) else math.ceil(span)

    def times(self) -> NDArray[np.float64]:
        n = self.n_steps
        t = self.t_start + self.dt * np.arange(n + 1, dtype=float)
        t[-1] = self.t_end
        return t


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Record of one evolution.

    Attributes
    ----------
    times : (n+1,) array
    amplitudes : (n+1, d) complex array
        State after each step (row 0 is the initial state).
    populations : (n+1, d) array
    target_population : (n+1,) array or None
        ``|<target|psi(t)>|^2`` for the reporting target.
    lyapunov : (n+1,) array or None
        ``1 - |<steer|psi(t)>|^2`` for the steering target.
    fields : (n, K) array
        Amplitude applied to each control on each step.
    field_labels : tuple of str
    basis, labels : basis states and their ket labels.
    """

    times: NDArray[np.float64]
    amplitudes: NDArray[np.complex128]
    fields: NDArray[np.float64]
    field_labels: tuple[str, ...]
    basis: tuple[BasisState, ...]
    labels: tuple[str, ...]
    target: QuantumState | None = None
    steering: QuantumState | None = None
    populations: NDArray[np.float64] = field(init=False)
    target_population: NDArray[np.float64] | None = field(init=False)
    lyapunov: NDArray[np.float64] | None = field(init=False)

    def __post_init__(self) -> None:
        amps = self.amplitudes
        object.__setattr__(self, "populations", np.abs(amps) ** 2)
        tp = None if self.target is None else np.abs(amps @ self.target.amplitudes.conj()) ** 2
        object.__setattr__(self, "target_population", tp)
        steer = self.steering if self.steering is not None else self.target
        lv = None if steer is None else 1.0 - np.abs(amps @ steer.amplitudes.conj()) ** 2
        object.__setattr__(self, "lyapunov", lv)

    def __len__(self) -> int:
        return len(self.times)

    def state(self, i: int) -> QuantumState:
        return QuantumState(self.basis, self.amplitudes[i], normalize=False)

    @property
    def final_state(self) -> QuantumState:
        return self.state(-1)

    def norm_drift(self) -> float:
        return float(np.max(np.abs(np.linalg.norm(self.amplitudes, axis=1) - 1.0)))

    def expectation_drift(self, op: Operator) -> float:
        """Largest deviation of ``<op>`` from its initial value."""
        vals = np.einsum("ti,ij,tj->t", self.amplitudes.conj(), op.matrix, self.amplitudes).real
        return float(np.max(np.abs(vals - vals[0])))

    def population_of(self, label: str) -> NDArray[np.float64]:
        return self.populations[:, self.labels.index(label)]


# ---------------------------------------------------------------------------
# stepping
# ---------------------------------------------------------------------------


def _unitary(h: NDArray[np.complex128], dt: float) -> NDArray[np.complex128]:
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * dt)) @ v.conj().T


def propagator_step(H: Operator, dt: float) -> Operator:
    """Exact ``exp(-i H dt)`` for a Hermitian ``H``."""
    H.require_hermitian()
    return Operator(H.basis, _unitary(H.matrix, dt))


def _as_open_loop(f: Any, label: str):
    """Return a callable ``t -> amplitude`` for an open-loop field."""
    if f is None:
        return lambda t: 0.0
    if isinstance(f, (int, float)):
        v = float(f)
        return lambda t: v
    if getattr(f, "feedback", False):
        raise TypeError(f"field on {label} needs the state; use control.run_controlled_evolution")
    if hasattr(f, "amplitude"):
        return f.amplitude
    if callable(f):
        return f
    raise TypeError(f"cannot interpret field {f!r} for control {label}")


def evolve(
    scheme,
    fields: Sequence[Any],
    psi0: QuantumState,
    grid: TimeGrid,
    target: QuantumState | None = None,
    steering: QuantumState | None = None,
) -> Trajectory:
    """Open-loop evolution with fields sampled at step midpoints.

    Parameters
    ----------
    scheme : SchemeModel
    fields : sequence
        One entry per control of ``scheme`` in order: a number, ``None``
        (zero), a callable of time or an open-loop control field.
    psi0 : QuantumState
        Initial state on the scheme basis.
    grid : TimeGrid
    target, steering : QuantumState, optional
        ``target`` defaults to the scheme's main Bell state.
    """
    labels = scheme.control_labels
    if len(fields) != len(labels):
        raise ValueError(f"expected {len(labels)} fields for controls {labels}, got {len(fields)}")
    if psi0.basis != scheme.basis:
        raise BasisError("initial state is not on the scheme basis")
    rules = [_as_open_loop(f, lbl) for f, lbl in zip(fields, labels)]
    h0 = scheme.H0.matrix
    hk = [op.matrix for _, op in scheme.controls]
    times = grid.times()
    n = len(times) - 1
    amps = np.empty((n + 1, scheme.dimension), dtype=complex)
    applied = np.zeros((n, len(labels)))
    psi = np.array(psi0.amplitudes, dtype=complex)
    amps[0] = psi
    for i in range(n):
        t0, t1 = times[i], times[i + 1]
        tm = 0.5 * (t0 + t1)
        h = h0.copy()
        for k, rule in enumerate(rules):
            fk = float(rule(tm))
            applied[i, k] = fk
            if fk != 0.0:
                h = h + fk * hk[k]
        psi = _unitary(h, t1 - t0) @ psi
        amps[i + 1] = psi
    return Trajectory(
        times=times,
        amplitudes=amps,
        fields=applied,
        field_labels=labels,
        basis=scheme.basis,
        labels=scheme.labels,
        target=scheme.target if target is None else target,
        steering=steering,
    )


def population(state: QuantumState, target: QuantumState) -> float:
    """``|<target|state>|^2``."""
    return abs(target.overlap(state)) ** 2


# ---------------------------------------------------------------------------
# measurement
# ---------------------------------------------------------------------------


def parity_operator(
    register: ModeRegister,
    modes: Sequence[str],
    basis: Sequence[BasisState] | None = None,
) -> Operator:
    """``(-1)^(sum of n_m over modes)``, diagonal on ``basis``.

    ``basis`` defaults to the full register basis; pass a scheme basis to
    get the operator on the low-energy space.
    """
    if len(modes) == 0:
        raise ValueError("parity needs at least one mode")
    idx = [register.mode_index(m) for m in modes]
    states = register.basis if basis is None else tuple(basis)
    diag = [(-1.0) ** sum(s.occupations[i] for i in idx) for s in states]
    return Operator(tuple(states), np.diag(np.asarray(diag, dtype=complex)))


@dataclass(frozen=True, eq=False)
class ParityOutcome:
    outcome: int
    probability: float
    collapsed: QuantumState


def outcome_probabilities(state: QuantumState, parity: Operator) -> dict[int, float]:
    """Born probabilities of the ``+1`` and ``-1`` outcomes."""
    diag = _parity_diagonal(state, parity)
    pops = np.abs(state.amplitudes) ** 2
    return {+1: float(pops[diag > 0].sum()), -1: float(pops[diag < 0].sum())}


def _parity_diagonal(state: QuantumState, parity: Operator) -> NDArray[np.float64]:
    if state.basis != parity.basis:
        raise BasisError("state and parity operator live on different bases")
    m = parity.matrix
    diag = np.real(np.diag(m))
    if np.max(np.abs(m - np.diag(np.diag(m))), initial=0.0) > HERMITIAN_TOL or np.any(
        np.abs(np.abs(diag) - 1.0) > HERMITIAN_TOL
    ):
        raise NotHermitianError("parity operator must be diagonal with entries +-1")
    return diag


def measure_parity(
    state: QuantumState,
    parity: Operator,
    outcome: int | None = None,
    rng: np.random.Generator | int | None = None,
) -> ParityOutcome:
    """Projective parity measurement with collapse.

    Parameters
    ----------
    outcome : {+1, -1}, optional
        Force this outcome; its Born probability is returned.
    rng : Generator or int, optional
        Source of randomness when the outcome is not forced.  It must be
        supplied explicitly; there is no ambient default.

    Raises
    ------
    ValueError
        If a forced outcome has probability below ``1e-12``, or if
        neither ``outcome`` nor ``rng`` is given.
    """
    diag = _parity_diagonal(state, parity)
    probs = outcome_probabilities(state, parity)
    if outcome is None:
        if rng is None:
            raise ValueError("an unforced measurement needs a seeded rng")
        gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        outcome = +1 if gen.random() < probs[+1] else -1
    if outcome not in (1, -1):
        raise ValueError("parity outcome must be +1 or -1")
    p = probs[outcome]
    if p < 1e-12:
        raise ValueError(f"outcome {outcome:+d} has probability {p:.3e}")
    kept = np.where(diag * outcome > 0, state.amplitudes, 0.0)
    return ParityOutcome(outcome, p, QuantumState(state.basis, kept))
