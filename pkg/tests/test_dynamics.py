import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from majorana_bell.control import Constant, linear_ramp
from majorana_bell.dynamics import (
    TimeGrid,
    evolve,
    measure_parity,
    outcome_probabilities,
    parity_operator,
    population,
    propagator_step,
)
from majorana_bell.fock import (
    BasisError,
    NotHermitianError,
    Operator,
    QuantumState,
    hermitian_eigensolve,
    make_register,
)
from majorana_bell.schemes import SchemeParams, build_car, build_scheme, build_teleportation, total_parity, BUILDERS

QUBIT = make_register(["q"]).basis


def test_propagator_zero_hamiltonian_is_identity():
    u = propagator_step(Operator.zeros(QUBIT), 0.7).matrix
    assert np.allclose(u, np.eye(2), atol=1e-15)


def test_propagator_rabi_half_flip():
    lam = 1.3
    u = propagator_step(Operator(QUBIT, lam * np.array([[0, 1], [1, 0]])), math.pi / (2 * lam)).matrix
    assert np.allclose(u @ np.array([1, 0]), [0, -1j], atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dt=st.floats(1e-3, 2.0), d=st.integers(1, 9))
def test_propagator_composition_and_unitarity(seed, dt, d):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    basis = make_register([f"m{i}" for i in range(4)]).basis[:d]
    h = Operator(basis, 5 * (a + a.conj().T))
    u1 = propagator_step(h, dt).matrix
    u2 = propagator_step(h, 2 * dt).matrix
    assert np.max(np.abs(u1 @ u1 - u2)) <= 1e-12 * max(1.0, np.linalg.norm(h.matrix, 2))
    assert np.linalg.norm(u1.conj().T @ u1 - np.eye(d)) <= 1e-10


def test_propagator_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        propagator_step(Operator(QUBIT, np.array([[0, 1], [0, 0]])), 0.1)


def test_time_grid():
    g = TimeGrid(-1.0, 1.0, 0.5)
    assert g.n_steps == 4
    assert np.allclose(g.times(), [-1, -0.5, 0, 0.5, 1])
    short = TimeGrid(0.0, 1.0, 0.3)
    assert short.n_steps == 4 and short.times()[-1] == 1.0
    for bad in [(0, 1, 0), (0, 1, -0.1), (1, 0, 0.1), (0, 0.05, 0.1), (0, math.inf, 0.1)]:
        with pytest.raises(ValueError):
            TimeGrid(*bad)


def test_stationary_eigenstate():
    s = build_teleportation(SchemeParams(E_c=30, epsilon=5))
    vec = hermitian_eigensolve(s.H0).vectors[:, 1]
    traj = evolve(s, [0.0, 0.0], QuantumState(s.basis, vec), TimeGrid(0, 20, 0.05))
    assert np.max(np.abs(traj.populations - traj.populations[0])) <= 1e-9
    assert traj.norm_drift() <= 1e-9
    assert np.allclose(traj.populations.sum(axis=1), 1, atol=1e-9)


def test_evolve_samples_fields_at_midpoints():
    s = build_teleportation()
    ramp = linear_ramp(2.0, 1.0, (-10, 10))
    traj = evolve(s, [ramp, None], s.ket("0001"), TimeGrid(0, 0.3, 0.1))
    assert np.allclose(traj.fields[:, 0], [1.1, 1.3, 1.5])
    assert np.all(traj.fields[:, 1] == 0)


def test_evolve_field_count_mismatch():
    s = build_teleportation()
    with pytest.raises(ValueError):
        evolve(s, [0.0], s.ket("0001"), TimeGrid(0, 1, 0.1))


def test_evolve_rejects_feedback_field():
    from majorana_bell.control import LyapunovFeedback

    s = build_teleportation()
    with pytest.raises(TypeError):
        evolve(s, [LyapunovFeedback(1.0), None], s.ket("0001"), TimeGrid(0, 1, 0.1))


def test_adiabatic_teleportation(run_preset):
    final = run_preset("fig2a").summary.final_target_population
    assert final >= 0.95


def test_adiabatic_teleportation_dt_halving(run_preset):
    a = run_preset("fig2a").trajectory.populations[-1]
    b = run_preset("fig2a", 0.005).trajectory.populations[-1]
    assert np.max(np.abs(a - b)) <= 1e-6


@pytest.mark.parametrize("name", list(BUILDERS))
def test_energy_conserved_under_constant_fields(name):
    s = build_scheme(name)
    consts = [0.7 * (k + 1) for k in range(len(s.controls))]
    h = s.H0
    for c, (_, op) in zip(consts, s.controls):
        h = h + c * op
    traj = evolve(s, [Constant(c) for c in consts], s.ket(s.labels[0]), TimeGrid(0, 10, 0.01))
    assert traj.expectation_drift(h) <= 1e-10
    assert traj.expectation_drift(total_parity(s)) <= 1e-10
    assert traj.norm_drift() <= 1e-9


def test_destructive_interference_two_wire(run_preset):
    traj = run_preset("fig13a").trajectory
    assert traj.population_of("↑↓00").max() <= 0.05
    assert traj.population_of("↓↑00").max() <= 0.05


def test_population_examples():
    a, b = QuantumState(QUBIT, [1, 0]), QuantumState(QUBIT, [0, 1])
    assert population(a, a) == pytest.approx(1)
    assert population(a, b) == 0
    assert population(QuantumState(QUBIT, [1, 1]), a) == pytest.approx(0.5)
    with pytest.raises(BasisError):
        population(a, QuantumState(make_register(["x", "y"]).basis, [1, 0, 0, 0]))


def test_parity_operator_examples():
    reg = make_register(["d1", "d2", "f"])
    p = parity_operator(reg, ["f"])
    assert np.allclose(p.matrix @ p.matrix, np.eye(8))
    i_f = reg.index_of(reg.state({"f": 1}))
    assert p.matrix[i_f, i_f] == -1
    assert p.matrix[0, 0] == 1
    two = parity_operator(reg, ["d1", "f"])
    i_both = reg.index_of(reg.state({"d1": 1, "f": 1}))
    assert two.matrix[i_both, i_both] == 1
    with pytest.raises(BasisError):
        parity_operator(reg, ["g"])
    with pytest.raises(ValueError):
        parity_operator(reg, [])


def _car_superposition():
    s = build_car()
    return s, s.superposition({"0000": 1, "011-1": 1, "0110": 1, "1100": 1})


def test_measure_forced_collapse():
    s, psi = _car_superposition()
    p = parity_operator(s.register, ["f"], s.basis)
    res = measure_parity(psi, p, outcome=+1)
    assert res.probability == pytest.approx(0.5, abs=1e-12)
    want = s.superposition({"0000": 1, "1100": 1})
    assert np.allclose(res.collapsed.amplitudes, want.amplitudes, atol=1e-12)


def test_measure_eigenstate_unchanged():
    s = build_car()
    psi = s.ket("0110")
    p = parity_operator(s.register, ["f"], s.basis)
    res = measure_parity(psi, p, outcome=-1)
    assert res.probability == pytest.approx(1.0)
    assert np.allclose(res.collapsed.amplitudes, psi.amplitudes)
    with pytest.raises(ValueError):
        measure_parity(psi, p, outcome=+1)


def test_measure_needs_explicit_randomness():
    s, psi = _car_superposition()
    p = parity_operator(s.register, ["f"], s.basis)
    with pytest.raises(ValueError):
        measure_parity(psi, p)
    outs = [measure_parity(psi, p, rng=7).outcome for _ in range(3)]
    assert len(set(outs)) == 1
    gen = np.random.default_rng(11)
    draws = [measure_parity(psi, p, rng=gen).outcome for _ in range(2000)]
    assert abs(np.mean(np.array(draws) == 1) - 0.5) < 0.05


def test_measure_rejects_non_parity_operator():
    s, psi = _car_superposition()
    with pytest.raises(NotHermitianError):
        measure_parity(psi, s.H0, outcome=1)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), mode=st.sampled_from(["d1", "d2", "f"]))
def test_measurement_completeness(seed, mode):
    s = build_car()
    rng = np.random.default_rng(seed)
    psi = QuantumState(s.basis, rng.normal(size=s.dimension) + 1j * rng.normal(size=s.dimension))
    probs = outcome_probabilities(psi, parity_operator(s.register, [mode], s.basis))
    assert abs(probs[1] + probs[-1] - 1) <= 1e-12


def test_two_wire_sequential_collapse(run_preset):
    r = run_preset("fig13b")
    s = r.model
    p = parity_operator(s.register, ["f1"], s.basis)
    collapsed = measure_parity(r.trajectory.final_state, p, outcome=+1).collapsed
    assert population(collapsed, s.targets["psi_2"]) >= 0.95
