"""Quantum-dot / Majorana models used to prepare Bell states.

Two families are built here.

*Charge models* (:func:`build_teleportation`,
:func:`build_teleportation_josephson`, :func:`build_car`).  Two spinless
dots ``d1, d2`` tunnel-couple to the Dirac fermion ``f`` formed by the
Majorana pair of one floating topological wire, whose island carries
``N_c`` Cooper pairs.  With ``S+ = exp(-i phi)`` adding one pair::

    H = E_c (2 N_c - n_g + n_f)^2 + eps1 n1 + eps2 n2 + (E_J / 2)(S+ + S-)
        + sum_n lambda_n [f^dag d_n + (-1)^(n-1) S+ f d_n] + h.c.

Kets are labelled ``n1 n2 n_f N_c`` (``"011-1"`` has ``N_c = -1``).  The
controls are ``H1 = n1``, ``H2 = n2`` and ``H3 = cos(phi) = (S+ + S-)/2``.

*Spinful models* (:func:`build_spin_flip`, :func:`build_two_wire`).  Each
dot holds at most one electron of either spin (Coulomb blockade), so the
Hamiltonian is projected onto the blockaded subspace.  Kets are labelled
dot 1, dot 2 (each ``0``, ``↑`` or ``↓``) followed by the Majorana
fermion occupations.  ``H1``/``H2`` count the electrons on dot 1/2.

All models are assembled from second-quantized terms on a
:class:`~majorana_bell.fock.ModeRegister` with ``"commuting"`` exchange
statistics, then projected onto the low-energy basis in the published
ordering.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Mapping

import numpy as np

from .fock import (
    BasisError,
    BasisState,
    ModeRegister,
    Operator,
    QuantumState,
    annihilation_op,
    cooper_number_op,
    cooper_shift_op,
    creation_op,
    hermitian_eigensolve,
    make_register,
    number_op,
    project_subspace,
)

UP, DOWN = "↑", "↓"
_SPIN_ALIASES = {"u": UP, "d": DOWN, "^": UP, "v": DOWN}

SCHEME_STATISTICS = "commuting"


@dataclass(frozen=True)
class SchemeParams:
    """Physical parameters, all in units of the tunnel coupling.

    ``epsilon2`` defaults to ``epsilon`` (the CAR builder forces
    ``epsilon2 = -epsilon``).  ``lambda3``/``lambda4`` are only used by the
    two-wire model.
    """

    epsilon: float = 5.0
    epsilon2: float | None = None
    E_c: float = 20.0
    E_J: float = 0.0
    lambda1: float = 1.0
    lambda2: float = 1.0
    lambda3: float = 1.0
    lambda4: float = 1.0
    n_g: float = 1.0
    t_flip: float = 1.0

    def __post_init__(self) -> None:
        for name, value in asdict(self).items():
            if value is not None and not math.isfinite(value):
                raise ValueError(f"parameter {name} must be finite, got {value}")

    @property
    def eps2(self) -> float:
        return self.epsilon if self.epsilon2 is None else self.epsilon2

    def updated(self, **changes: float) -> "SchemeParams":
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class SchemeModel:
    """A model restricted to its low-energy basis.

    Attributes
    ----------
    name : str
    register : ModeRegister
        Full Fock register the model was assembled on.
    basis : tuple of BasisState
        Low-energy basis, in published order.
    labels : tuple of str
        Ket label for each basis state.
    H0 : Operator
        Static Hamiltonian on ``basis``.
    controls : tuple of (str, Operator)
        Control Hamiltonians ``H_k``.
    targets : dict
        Named Bell states on ``basis``; ``default_target`` names the main one.
    params : SchemeParams
    """

    name: str
    register: ModeRegister
    basis: tuple[BasisState, ...]
    labels: tuple[str, ...]
    H0: Operator
    controls: tuple[tuple[str, Operator], ...]
    targets: Mapping[str, QuantumState]
    default_target: str
    params: SchemeParams
    full_H0: Operator = field(repr=False)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @property
    def control_labels(self) -> tuple[str, ...]:
        return tuple(lbl for lbl, _ in self.controls)

    @property
    def target(self) -> QuantumState:
        return self.targets[self.default_target]

    def control(self, label: str) -> Operator:
        for lbl, op in self.controls:
            if lbl == label:
                return op
        raise BasisError(f"scheme {self.name!r} has no control {label!r}; choose from {self.control_labels}")

    def index(self, label: str) -> int:
        key = normalize_label(label)
        try:
            return self.labels.index(key)
        except ValueError:
            raise BasisError(f"scheme {self.name!r} has no basis state {label!r}; basis is {list(self.labels)}") from None

    def ket(self, label: str) -> QuantumState:
        a = np.zeros(self.dimension, dtype=complex)
        a[self.index(label)] = 1.0
        return QuantumState(self.basis, a)

    def superposition(self, amplitudes: Mapping[str, complex]) -> QuantumState:
        """Normalized state from ``{label: amplitude}``."""
        a = np.zeros(self.dimension, dtype=complex)
        for label, amp in amplitudes.items():
            a[self.index(label)] += amp
        return QuantumState(self.basis, a)


def normalize_label(label: str) -> str:
    """Map ASCII spin aliases (``u``/``d``) to arrows."""
    return "".join(_SPIN_ALIASES.get(ch, ch) for ch in str(label).strip().strip("|>⟩"))


# ---------------------------------------------------------------------------
# charge models
# ---------------------------------------------------------------------------

CHARGE_MODES = ("d1", "d2", "f")
CHARGE_COOPER_RANGE = (-1, 1)


def _charge_state(label: str) -> BasisState:
    bits = tuple(int(ch) for ch in label[:3])
    return BasisState(bits, int(label[3:]))


def _charge_hamiltonian(reg: ModeRegister, p: SchemeParams, eps1: float, eps2: float) -> Operator:
    ident = Operator.identity(reg.basis)
    n1, n2, nf = (number_op(reg, m) for m in CHARGE_MODES)
    charge = 2.0 * cooper_number_op(reg) - p.n_g * ident + nf
    s_plus = cooper_shift_op(reg, +1)
    s_minus = cooper_shift_op(reg, -1)
    f_dag = creation_op(reg, "f")
    f = annihilation_op(reg, "f")
    h = p.E_c * (charge @ charge) + eps1 * n1 + eps2 * n2 + (p.E_J / 2.0) * (s_plus + s_minus)
    for n, (mode, lam) in enumerate((("d1", p.lambda1), ("d2", p.lambda2)), start=1):
        d = annihilation_op(reg, mode)
        hop = lam * ((f_dag @ d) + (-1) ** (n - 1) * (s_plus @ f @ d))
        h = h + hop + hop.dagger()
    return h


def _charge_model(
    name: str,
    labels: tuple[str, ...],
    p: SchemeParams,
    eps1: float,
    eps2: float,
    targets: dict[str, dict[str, float]],
    default_target: str,
    with_h3: bool,
) -> SchemeModel:
    reg = make_register(CHARGE_MODES, CHARGE_COOPER_RANGE, SCHEME_STATISTICS)
    full = _charge_hamiltonian(reg, p, eps1, eps2)
    kept = tuple(_charge_state(lbl) for lbl in labels)
    controls = [
        ("H1", project_subspace(number_op(reg, "d1"), kept)),
        ("H2", project_subspace(number_op(reg, "d2"), kept)),
    ]
    if with_h3:
        cos_phi = 0.5 * (cooper_shift_op(reg, +1) + cooper_shift_op(reg, -1))
        controls.append(("H3", project_subspace(cos_phi, kept)))
    return _finish(name, reg, kept, labels, full, controls, targets, default_target, p)


def _finish(name, reg, kept, labels, full, controls, targets, default_target, p) -> SchemeModel:
    h0 = project_subspace(full, kept)
    h0.require_hermitian()
    states = {}
    for tname, amps in targets.items():
        a = np.zeros(len(kept), dtype=complex)
        for lbl, amp in amps.items():
            a[labels.index(lbl)] = amp
        states[tname] = QuantumState(kept, a)
    return SchemeModel(
        name=name,
        register=reg,
        basis=kept,
        labels=labels,
        H0=h0,
        controls=tuple(controls),
        targets=states,
        default_target=default_target,
        params=p,
        full_H0=full,
    )


TELEPORTATION_LABELS = ("0001", "0110", "1010", "1100")
JOSEPHSON_LABELS = ("0000", "0001", "0110", "1010", "1100", "1101")
CAR_LABELS = ("0000", "0001", "011-1", "0110", "1010", "101-1", "110-1", "1100")

_R = 1.0 / math.sqrt(2.0)
_TELEPORTED = {"psi_T": {"1010": _R, "0110": -_R}}


def build_teleportation(params: SchemeParams = SchemeParams()) -> SchemeModel:
    """Four-state teleportation model ``{|0001>, |0110>, |1010>, |1100>}``.

    Requires ``E_J = 0`` and ``n_g = 1``.  The target is
    ``(|1010> - |0110>)/sqrt(2)``: one electron shared between the dots
    while the Majorana fermion is occupied.
    """
    if params.E_J != 0.0:
        raise ValueError("teleportation model needs E_J = 0; use build_teleportation_josephson")
    if params.n_g != 1.0:
        raise ValueError("teleportation model needs n_g = 1")
    return _charge_model(
        "teleportation", TELEPORTATION_LABELS, params, params.epsilon, params.eps2,
        _TELEPORTED, "psi_T", with_h3=False,
    )


def build_teleportation_josephson(params: SchemeParams = SchemeParams(E_J=0.5)) -> SchemeModel:
    """Teleportation model extended by Josephson coupling to six states.

    ``|0000>`` and ``|1100>`` acquire partners ``|0001>`` and ``|1101>``
    through Cooper-pair exchange; the cooper-exchange control ``H3`` is
    available.
    """
    if params.n_g != 1.0:
        raise ValueError("Josephson teleportation model needs n_g = 1")
    return _charge_model(
        "josephson", JOSEPHSON_LABELS, params, params.epsilon, params.eps2,
        _TELEPORTED, "psi_T", with_h3=True,
    )


def build_car(params: SchemeParams = SchemeParams(E_J=1.0, n_g=0.0)) -> SchemeModel:
    """Crossed-Andreev-reflection model on eight low-energy states.

    Uses ``n_g = 0`` and opposite dot levels ``eps1 = -eps2 = epsilon``.
    Targets: ``psi_T+ = (|0000> + |1100>)/sqrt(2)``, ``psi_T-`` with a
    minus sign, and ``odd_pair = (|011-1> + |0110>)/sqrt(2)``, the state
    left after finding the Majorana fermion occupied.
    """
    if params.n_g != 0.0:
        raise ValueError("CAR model needs n_g = 0")
    p = params.updated(epsilon2=-params.epsilon)
    targets = {
        "psi_T+": {"0000": _R, "1100": _R},
        "psi_T-": {"0000": _R, "1100": -_R},
        "odd_pair": {"011-1": _R, "0110": _R},
    }
    return _charge_model("car", CAR_LABELS, p, p.epsilon, -p.epsilon, targets, "psi_T+", with_h3=True)


# ---------------------------------------------------------------------------
# spinful models
# ---------------------------------------------------------------------------

DOT_MODES = ("d1↓", "d1↑", "d2↓", "d2↑")


def _dot_occupation(dot: int, ch: str) -> dict[str, int]:
    if ch == "0":
        return {}
    if ch not in (UP, DOWN):
        raise BasisError(f"bad dot symbol {ch!r}")
    return {f"d{dot}{ch}": 1}


def _spin_state(reg: ModeRegister, label: str, majorana_modes: tuple[str, ...]) -> BasisState:
    occ: dict[str, int] = {}
    occ.update(_dot_occupation(1, label[0]))
    occ.update(_dot_occupation(2, label[1]))
    for mode, ch in zip(majorana_modes, label[2:]):
        occ[mode] = int(ch)
    return reg.state(occ)


def _blockaded(reg: ModeRegister) -> tuple[BasisState, ...]:
    """States with at most one electron per dot."""
    i = [reg.mode_index(m) for m in DOT_MODES]
    return tuple(
        s for s in reg.basis
        if s.occupations[i[0]] + s.occupations[i[1]] <= 1 and s.occupations[i[2]] + s.occupations[i[3]] <= 1
    )


def _spin_model(name, reg, full, labels, majorana_modes, targets, default_target, p) -> SchemeModel:
    kept = tuple(_spin_state(reg, lbl, majorana_modes) for lbl in labels)
    controls = [
        ("H1", project_subspace(number_op(reg, "d1↑") + number_op(reg, "d1↓"), kept)),
        ("H2", project_subspace(number_op(reg, "d2↑") + number_op(reg, "d2↓"), kept)),
    ]
    blockaded = project_subspace(full, _blockaded(reg))
    return _finish(name, reg, kept, labels, blockaded, controls, targets, default_target, p)


def _majorana_hop(reg: ModeRegister, f_mode: str, d_mode: str, lam: float, sign: int) -> Operator:
    """``lam (f^dag + sign f) d + h.c.``"""
    f_dag = creation_op(reg, f_mode)
    f = annihilation_op(reg, f_mode)
    term = lam * ((f_dag + sign * f) @ annihilation_op(reg, d_mode))
    return term + term.dagger()


SPIN_FLIP_LABELS = ("000", "↓01", "0↑1", "↑01", "0↓1", "↓↑0", "↑↑0", "↑↓0", "↓↓0")


def build_spin_flip(params: SchemeParams = SchemeParams(epsilon=-10.0)) -> SchemeModel:
    """Single-wire model with spinful dots and intra-dot spin flips.

    Only ``d1↓`` and ``d2↑`` tunnel to the Majorana fermion; the spin flip
    ``t (d_n↑^dag d_n↓ + h.c.)`` gives the other spin projections access.
    Target ``psi_T' = (|↑↑0> - |↓↓0>)/sqrt(2)``.
    """
    p = params
    reg = make_register(DOT_MODES + ("f",), None, SCHEME_STATISTICS)
    eps = {1: p.epsilon, 2: p.eps2}
    h = Operator.zeros(reg.basis)
    for n in (1, 2):
        h = h + eps[n] * (number_op(reg, f"d{n}↑") + number_op(reg, f"d{n}↓"))
        flip = p.t_flip * (creation_op(reg, f"d{n}↑") @ annihilation_op(reg, f"d{n}↓"))
        h = h + flip + flip.dagger()
    h = h + _majorana_hop(reg, "f", "d1↓", p.lambda1, +1)
    h = h + _majorana_hop(reg, "f", "d2↑", p.lambda2, -1)
    targets = {"psi_T'": {"↑↑0": _R, "↓↓0": -_R}}
    return _spin_model("spin_flip", reg, h, SPIN_FLIP_LABELS, ("f",), targets, "psi_T'", p)


TWO_WIRE_LABELS = ("0000", "0↓01", "↓010", "0↑10", "↑001", "↓↓11", "↑↓00", "↓↑00", "↑↑11")


def build_two_wire(params: SchemeParams = SchemeParams(epsilon=0.0)) -> SchemeModel:
    """Two wires, each coupling one spin species of each dot.

    Wire 1 (``f1``) couples ``d1↓`` and ``d2↑``; wire 2 (``f2``) couples
    ``d1↑`` and ``d2↓``.  Couplings alternate ``(f^dag + f)`` and
    ``(f^dag - f)`` between the two dots of each wire, which makes the two
    routes from ``|0000>`` to ``|↑↓00>`` and ``|↓↑00>`` cancel.  Targets
    ``psi_1 = (|↓↓11> + |↑↑11>)/sqrt(2)`` and
    ``psi_2 = (|↑↓00> + |↓↑00>)/sqrt(2)``.
    """
    p = params
    reg = make_register(DOT_MODES + ("f1", "f2"), None, SCHEME_STATISTICS)
    eps = {1: p.epsilon, 2: p.eps2}
    h = Operator.zeros(reg.basis)
    for n in (1, 2):
        h = h + eps[n] * (number_op(reg, f"d{n}↑") + number_op(reg, f"d{n}↓"))
    h = h + _majorana_hop(reg, "f1", "d1↓", p.lambda1, +1)
    h = h + _majorana_hop(reg, "f1", "d2↑", p.lambda2, -1)
    h = h + _majorana_hop(reg, "f2", "d1↑", p.lambda3, +1)
    h = h + _majorana_hop(reg, "f2", "d2↓", p.lambda4, -1)
    targets = {
        "psi_1": {"↓↓11": _R, "↑↑11": _R},
        "psi_2": {"↑↓00": _R, "↓↑00": _R},
    }
    return _spin_model("two_wire", reg, h, TWO_WIRE_LABELS, ("f1", "f2"), targets, "psi_1", p)


# ---------------------------------------------------------------------------
# registry, targets, analytic oracle
# ---------------------------------------------------------------------------

BUILDERS: dict[str, Callable[[SchemeParams], SchemeModel]] = {
    "teleportation": build_teleportation,
    "josephson": build_teleportation_josephson,
    "car": build_car,
    "spin_flip": build_spin_flip,
    "two_wire": build_two_wire,
}

DEFAULT_PARAMS: dict[str, SchemeParams] = {
    "teleportation": SchemeParams(epsilon=5.0, E_c=20.0, E_J=0.0, n_g=1.0),
    "josephson": SchemeParams(epsilon=5.0, E_c=20.0, E_J=0.5, n_g=1.0),
    "car": SchemeParams(epsilon=5.0, E_c=20.0, E_J=1.0, n_g=0.0),
    "spin_flip": SchemeParams(epsilon=-10.0, t_flip=1.0),
    "two_wire": SchemeParams(epsilon=0.0),
}

# parameters a caller must know were chosen here rather than measured
ASSUMED_PARAMS: dict[str, tuple[str, ...]] = {
    "teleportation": (),
    "josephson": (),
    "car": ("E_c", "E_J", "lambda1", "lambda2"),
    "spin_flip": ("t_flip", "lambda1", "lambda2"),
    "two_wire": ("lambda1", "lambda2", "lambda3", "lambda4"),
}


def build_scheme(name: str, params: SchemeParams | None = None) -> SchemeModel:
    try:
        builder = BUILDERS[name]
    except KeyError:
        raise ValueError(f"unknown scheme {name!r}; choose from {sorted(BUILDERS)}") from None
    return builder(DEFAULT_PARAMS[name] if params is None else params)


def bell_target(scheme: SchemeModel, which: str | None = None) -> QuantumState:
    """Named Bell state of ``scheme`` (its default target if ``which`` is None)."""
    key = scheme.default_target if which is None else which
    try:
        return scheme.targets[key]
    except KeyError:
        raise BasisError(f"scheme {scheme.name!r} has no target {key!r}; choose from {sorted(scheme.targets)}") from None


def steering_target(scheme: SchemeModel, which: str | None = None) -> QuantumState:
    """Eigenstate of ``H0`` closest to a Bell target, phased to match it.

    The Bell states are only approximately stationary.  Feedback aimed at
    an exact eigenstate has the eigenstate as a fixed point, so the
    controllers steer toward this state while populations are reported
    against the Bell state itself.
    """
    bell = bell_target(scheme, which)
    eig = hermitian_eigensolve(scheme.H0)
    overlaps = eig.vectors.conj().T @ bell.amplitudes
    k = int(np.argmax(np.abs(overlaps)))
    v = eig.vectors[:, k] * (overlaps[k] / abs(overlaps[k]))
    return QuantumState(scheme.basis, v)


@dataclass(frozen=True)
class AnalyticEigenpair:
    energy: float
    state: QuantumState


def teleportation_coefficients(params: SchemeParams) -> tuple[float, float, float]:
    """The mixing coefficients ``(A1, A2, A3)`` of the four-state model."""
    ec, eps, lam = params.E_c, params.epsilon, params.lambda1
    a1 = (eps - ec + math.sqrt((ec - eps) ** 2 + 8 * lam**2)) / (2 * lam)
    a2 = (ec - eps + math.sqrt((ec - eps) ** 2 + 8 * lam**2)) / (2 * lam)
    a3 = (ec + eps + math.sqrt((ec + eps) ** 2 + 8 * lam**2)) / (2 * lam)
    return a1, a2, a3


def teleportation_analytic_eigs(params: SchemeParams) -> list[AnalyticEigenpair]:
    """Closed-form eigensystem of the four-state teleportation model.

    Valid for ``lambda1 = lambda2 = lambda > 0``, equal dot levels, ``E_J = 0``
    and ``n_g = 1``.  In basis order ``(|0001>, |0110>, |1010>, |1100>)``::

        E1 = eps - lam A1      |E1> ~ -A1|0001> - |0110> + |1010>
        E2 = E_c + lam A1      |E2> ~  A2|0001> - |0110> + |1010>
        E3 = E_c + 2eps - lam A3   |E3> ~ -A3/2 (|0110> + |1010>) + |1100>
        E4 = eps + lam A3      |E4> ~ (|0110> + |1010>)/A3 + |1100>
    """
    if params.E_J != 0.0 or params.n_g != 1.0:
        raise ValueError("closed form needs E_J = 0 and n_g = 1")
    if params.lambda1 != params.lambda2 or params.lambda1 <= 0:
        raise ValueError("closed form needs lambda1 = lambda2 > 0")
    if params.epsilon2 is not None and params.epsilon2 != params.epsilon:
        raise ValueError("closed form needs equal dot levels")
    ec, eps, lam = params.E_c, params.epsilon, params.lambda1
    a1, a2, a3 = teleportation_coefficients(params)
    energies = (eps - lam * a1, ec + lam * a1, ec + 2 * eps - lam * a3, eps + lam * a3)
    vectors = (
        (-a1, -1.0, 1.0, 0.0),
        (a2, -1.0, 1.0, 0.0),
        (0.0, -a3 / 2, -a3 / 2, 1.0),
        (0.0, 1 / a3, 1 / a3, 1.0),
    )
    basis = tuple(_charge_state(lbl) for lbl in TELEPORTATION_LABELS)
    return [AnalyticEigenpair(e, QuantumState(basis, np.asarray(v, dtype=complex))) for e, v in zip(energies, vectors)]


def total_parity(scheme: SchemeModel) -> Operator:
    """``(-1)^(electron number)`` on the scheme basis."""
    return Operator(scheme.basis, np.diag([complex(s.parity) for s in scheme.basis]))
