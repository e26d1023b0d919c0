"""Bell-state preparation in quantum-dot / Majorana-wire models.

Modules
-------
fock
    Occupation-number bases, creation/annihilation and Cooper-pair shift
    operators, Hermitian eigensolver.
schemes
    The five concrete models and their Bell targets.
dynamics
    Piecewise-constant propagation, populations, parity measurement.
control
    Linear ramps, Lyapunov feedback and its square-pulse variant.
config, presets, runner, report, cli
    Configuration documents, named presets, execution and output.
"""

from .fock import (
    BasisState,
    ModeRegister,
    Operator,
    QuantumState,
    annihilation_op,
    cooper_shift_op,
    creation_op,
    hermitian_eigensolve,
    make_register,
    project_subspace,
)
from .schemes import (
    SchemeModel,
    SchemeParams,
    bell_target,
    build_car,
    build_scheme,
    build_spin_flip,
    build_teleportation,
    build_teleportation_josephson,
    build_two_wire,
    steering_target,
    teleportation_analytic_eigs,
)
from .dynamics import TimeGrid, Trajectory, evolve, measure_parity, parity_operator, population, propagator_step
from .control import (
    BangBang,
    LinearRamp,
    LyapunovFeedback,
    bang_bang_field,
    linear_ramp,
    lyapunov_field,
    lyapunov_value,
    run_controlled_evolution,
)

__version__ = "0.1.0"
