"""Occupation-number bases and second-quantized operators.

A :class:`ModeRegister` is an ordered set of fermionic modes, optionally
paired with a bounded Cooper-pair counter ``N_c`` for a floating
superconducting island.  Its canonical basis enumerates occupation bit
strings lexicographically (first mode most significant) and, within each
bit string, the Cooper count in ascending order.

Two exchange conventions are supported:

``"fermion"``
    Jordan-Wigner signs.  ``c_k^dagger`` picks up ``(-1)**m`` where ``m``
    is the number of occupied modes preceding ``k`` in register order, so
    that ``{c_a, c_b^dagger} = delta_ab``.

``"commuting"``
    Operators on distinct modes commute; each single mode still obeys
    ``{c_k, c_k^dagger} = 1`` and ``c_k**2 = 0``.  This is the convention
    in which the dot/Majorana models of :mod:`majorana_bell.schemes` are
    written, where every tunnelling term changes the occupation of one dot
    and the shared Majorana mode together.

Everything here is dense: the largest register used by the models has 64
states.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from numpy.typing import NDArray

STATISTICS = ("fermion", "commuting")

HERMITIAN_TOL = 1e-12


class BasisError(ValueError):
    """A state, label or mode does not belong to the basis in use."""


class NotHermitianError(ValueError):
    """An operator required to be Hermitian is not."""


@dataclass(frozen=True)
class BasisState:
    """One occupation-number ket ``|n_1 ... n_m; N_c>``.

    Parameters
    ----------
    occupations : tuple of int
        One bit per fermionic mode, in register order.
    cooper_count : int or None
        Number of Cooper pairs on the island, ``None`` if the register has
        no island.
    """

    occupations: tuple[int, ...]
    cooper_count: int | None = None

    def __post_init__(self) -> None:
        if any(b not in (0, 1) for b in self.occupations):
            raise BasisError(f"occupations must be bits, got {self.occupations}")

    @property
    def fermion_number(self) -> int:
        return int(sum(self.occupations))

    @property
    def parity(self) -> int:
        """+1 for an even number of occupied fermionic modes, -1 otherwise."""
        return 1 if self.fermion_number % 2 == 0 else -1

    def label(self) -> str:
        bits = "".join(str(b) for b in self.occupations)
        return bits if self.cooper_count is None else f"{bits}{self.cooper_count}"


@dataclass(frozen=True)
class ModeRegister:
    """Ordered fermionic modes plus an optional Cooper-pair counter.

    Use :func:`make_register` to construct one; it validates the labels.
    """

    fermion_modes: tuple[str, ...]
    cooper_range: tuple[int, int] | None = None
    statistics: str = "fermion"
    basis: tuple[BasisState, ...] = field(init=False, repr=False, compare=False)
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(set(self.fermion_modes)) != len(self.fermion_modes):
            raise ValueError(f"duplicate mode labels in {self.fermion_modes}")
        if self.statistics not in STATISTICS:
            raise ValueError(f"statistics must be one of {STATISTICS}")
        if self.cooper_range is not None:
            lo, hi = self.cooper_range
            if lo > hi:
                raise ValueError(f"empty cooper_range {self.cooper_range}")
            counts: list[int | None] = list(range(lo, hi + 1))
        else:
            counts = [None]
        states = tuple(
            BasisState(tuple(occ), n)
            for occ in itertools.product((0, 1), repeat=len(self.fermion_modes))
            for n in counts
        )
        object.__setattr__(self, "basis", states)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(states)})

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @property
    def has_island(self) -> bool:
        return self.cooper_range is not None

    def mode_index(self, mode: str) -> int:
        try:
            return self.fermion_modes.index(mode)
        except ValueError:
            raise BasisError(
                f"unknown mode {mode!r}; register has {list(self.fermion_modes)}"
            ) from None

    def index_of(self, state: BasisState) -> int:
        try:
            return self._index[state]
        except KeyError:
            raise BasisError(f"{state} is not in this register") from None

    def state(self, occupation: Mapping[str, int], cooper_count: int | None = None) -> BasisState:
        """Basis state from a ``{mode: bit}`` mapping; unnamed modes are empty."""
        for m in occupation:
            self.mode_index(m)
        occ = tuple(int(occupation.get(m, 0)) for m in self.fermion_modes)
        if self.has_island and cooper_count is None:
            cooper_count = 0
        st = BasisState(occ, cooper_count if self.has_island else None)
        self.index_of(st)
        return st


def make_register(
    fermion_modes: Sequence[str],
    cooper_range: tuple[int, int] | None = None,
    statistics: str = "fermion",
) -> ModeRegister:
    """Build a register with its canonical basis enumeration.

    Examples
    --------
    >>> make_register(["d1", "d2", "f"], (-1, 1)).dimension
    24
    """
    rng = None if cooper_range is None else (int(cooper_range[0]), int(cooper_range[1]))
    return ModeRegister(tuple(fermion_modes), rng, statistics)


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense complex matrix tagged with the basis it acts on."""

    basis: tuple[BasisState, ...]
    matrix: NDArray[np.complex128]

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {m.shape}")
        if m.shape[0] != len(self.basis):
            raise ValueError("operator dimension does not match its basis")
        m.setflags(write=False)
        object.__setattr__(self, "basis", tuple(self.basis))
        object.__setattr__(self, "matrix", m)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def _check(self, other: "Operator") -> None:
        if other.basis != self.basis:
            raise BasisError("operators act on different bases")

    def __add__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.basis, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.basis, self.matrix - other.matrix)

    def __neg__(self) -> "Operator":
        return Operator(self.basis, -self.matrix)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self.basis, scalar * self.matrix)

    __rmul__ = __mul__

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.basis, self.matrix @ other.matrix)

    def dagger(self) -> "Operator":
        return Operator(self.basis, self.matrix.conj().T)

    def max_asymmetry(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0))

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.max_asymmetry() <= tol

    def require_hermitian(self, tol: float = HERMITIAN_TOL) -> None:
        asym = self.max_asymmetry()
        if asym > tol:
            raise NotHermitianError(f"operator is not Hermitian: max |M - M^dagger| = {asym:.3e}")

    def apply(self, state: "QuantumState") -> "QuantumState":
        if state.basis != self.basis:
            raise BasisError("state and operator live on different bases")
        return QuantumState(self.basis, self.matrix @ state.amplitudes, normalize=False)

    def expectation(self, state: "QuantumState") -> complex:
        if state.basis != self.basis:
            raise BasisError("state and operator live on different bases")
        a = state.amplitudes
        return complex(np.vdot(a, self.matrix @ a))

    @staticmethod
    def identity(basis: Sequence[BasisState]) -> "Operator":
        return Operator(tuple(basis), np.eye(len(basis), dtype=complex))

    @staticmethod
    def zeros(basis: Sequence[BasisState]) -> "Operator":
        n = len(basis)
        return Operator(tuple(basis), np.zeros((n, n), dtype=complex))


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Pure state as a complex amplitude vector on an ordered basis.

    Parameters
    ----------
    basis : sequence of BasisState
    amplitudes : array_like
    normalize : bool, default True
        Rescale to unit norm.  A zero vector cannot be normalized.
    """

    basis: tuple[BasisState, ...]
    amplitudes: NDArray[np.complex128]
    normalize: bool = True

    def __post_init__(self) -> None:
        a = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if a.shape[0] != len(self.basis):
            raise ValueError("amplitude count does not match the basis")
        if self.normalize:
            n = np.linalg.norm(a)
            if n == 0.0:
                raise ValueError("cannot normalize the zero vector")
            a = a / n
        a.setflags(write=False)
        object.__setattr__(self, "basis", tuple(self.basis))
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def basis_state(cls, basis: Sequence[BasisState], which: BasisState) -> "QuantumState":
        basis = tuple(basis)
        try:
            i = basis.index(which)
        except ValueError:
            raise BasisError(f"{which} is not in the basis") from None
        a = np.zeros(len(basis), dtype=complex)
        a[i] = 1.0
        return cls(basis, a)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other: "QuantumState") -> complex:
        """``<self|other>``."""
        if other.basis != self.basis:
            raise BasisError("states live on different bases")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def populations(self) -> NDArray[np.float64]:
        return np.abs(self.amplitudes) ** 2


# ---------------------------------------------------------------------------
# operator construction
# ---------------------------------------------------------------------------


def creation_op(register: ModeRegister, mode: str) -> Operator:
    """Matrix of ``c_mode^dagger`` on the full register basis.

    Examples
    --------
    >>> reg = make_register(["a", "b"])
    >>> cb = creation_op(reg, "b")
    >>> ten, eleven = reg.state({"a": 1}), reg.state({"a": 1, "b": 1})
    >>> cb.matrix[reg.index_of(eleven), reg.index_of(ten)].real
    -1.0
    """
    k = register.mode_index(mode)
    d = register.dimension
    m = np.zeros((d, d), dtype=complex)
    jordan_wigner = register.statistics == "fermion"
    for i, s in enumerate(register.basis):
        if s.occupations[k]:
            continue
        occ = list(s.occupations)
        occ[k] = 1
        target = BasisState(tuple(occ), s.cooper_count)
        sign = (-1) ** sum(s.occupations[:k]) if jordan_wigner else 1
        m[register.index_of(target), i] = sign
    return Operator(register.basis, m)


def annihilation_op(register: ModeRegister, mode: str) -> Operator:
    """Adjoint of :func:`creation_op`."""
    return creation_op(register, mode).dagger()


def number_op(register: ModeRegister, mode: str) -> Operator:
    """Diagonal occupation ``n_mode``."""
    k = register.mode_index(mode)
    diag = [s.occupations[k] for s in register.basis]
    return Operator(register.basis, np.diag(np.asarray(diag, dtype=complex)))


def cooper_number_op(register: ModeRegister) -> Operator:
    """Diagonal Cooper-pair count ``N_c``."""
    if not register.has_island:
        raise BasisError("register has no Cooper-pair counter")
    diag = [s.cooper_count for s in register.basis]
    return Operator(register.basis, np.diag(np.asarray(diag, dtype=complex)))


def cooper_shift_op(register: ModeRegister, direction: int) -> Operator:
    """``|..., N_c> -> |..., N_c + direction>``, truncated at the range edges.

    ``direction=+1`` is ``exp(-i phi)``, which adds one pair to the island.
    """
    if not register.has_island:
        raise BasisError("register has no Cooper-pair counter")
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    d = register.dimension
    lo, hi = register.cooper_range  # type: ignore[misc]
    m = np.zeros((d, d), dtype=complex)
    for i, s in enumerate(register.basis):
        n = s.cooper_count + direction  # type: ignore[operator]
        if lo <= n <= hi:
            m[register.index_of(BasisState(s.occupations, n)), i] = 1.0
    return Operator(register.basis, m)


def total_parity_op(basis: Sequence[BasisState]) -> Operator:
    """Diagonal ``(-1)**N_fermion`` on any basis."""
    return Operator(tuple(basis), np.diag([complex(s.parity) for s in basis]))


# ---------------------------------------------------------------------------
# linear algebra
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Eigen-decomposition with ascending eigenvalues.

    ``vectors[:, i]`` is the eigenvector of ``values[i]``.
    """

    basis: tuple[BasisState, ...]
    values: NDArray[np.float64]
    vectors: NDArray[np.complex128]

    def __len__(self) -> int:
        return len(self.values)

    def state(self, i: int) -> QuantumState:
        return QuantumState(self.basis, self.vectors[:, i])


def _fix_phase(v: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """Rotate so the first component of (near) maximal modulus is real positive."""
    mag = np.abs(v)
    k = int(np.argmax(mag >= mag.max() * (1 - 1e-9)))
    return v * (abs(v[k]) / v[k])


def hermitian_eigensolve(op: Operator, tol: float = HERMITIAN_TOL) -> EigenSystem:
    """Deterministic eigen-decomposition of a Hermitian operator.

    Eigenvalues come out ascending.  Inside a degenerate cluster (spread
    below ``1e-10 * max(1, ||M||)``) the eigenvectors are replaced by the
    Gram-Schmidt orthonormalisation of the cluster projector applied to
    the basis vectors in input order, so the result does not depend on
    LAPACK's arbitrary choice.  Every vector is then phased so that its
    first largest-modulus component is real and positive.

    Raises
    ------
    NotHermitianError
        If ``max|M - M^dagger| > tol``; the message reports the asymmetry.
    """
    op.require_hermitian(tol)
    m = 0.5 * (op.matrix + op.matrix.conj().T)
    values, vectors = np.linalg.eigh(m)
    vectors = vectors.astype(complex)
    scale = max(1.0, float(np.max(np.abs(values), initial=0.0)))
    gap = 1e-10 * scale
    out = vectors.copy()
    start = 0
    n = len(values)
    while start < n:
        stop = start + 1
        while stop < n and values[stop] - values[stop - 1] <= gap:
            stop += 1
        if stop - start > 1:
            block = vectors[:, start:stop]
            proj = block @ block.conj().T
            chosen: list[NDArray[np.complex128]] = []
            for j in range(n):
                if len(chosen) == stop - start:
                    break
                w = proj[:, j].copy()
                for u in chosen:
                    w -= np.vdot(u, w) * u
                nrm = np.linalg.norm(w)
                if nrm > 1e-6:
                    chosen.append(w / nrm)
            out[:, start:stop] = np.column_stack(chosen)
            values[start:stop] = np.mean(values[start:stop])
        start = stop
    for i in range(n):
        out[:, i] = _fix_phase(out[:, i])
    return EigenSystem(op.basis, values, out)


def project_subspace(op: Operator, kept: Sequence[BasisState]) -> Operator:
    """Submatrix of ``op`` on ``kept``, in the given order."""
    index = {s: i for i, s in enumerate(op.basis)}
    try:
        rows = [index[s] for s in kept]
    except KeyError as exc:
        raise BasisError(f"kept state {exc.args[0]} is not in the operator basis") from None
    return Operator(tuple(kept), op.matrix[np.ix_(rows, rows)])


def project_state(state: QuantumState, kept: Sequence[BasisState]) -> QuantumState:
    """Restrict a state to ``kept`` and renormalize."""
    index = {s: i for i, s in enumerate(state.basis)}
    try:
        rows = [index[s] for s in kept]
    except KeyError as exc:
        raise BasisError(f"kept state {exc.args[0]} is not in the state basis") from None
    return QuantumState(tuple(kept), state.amplitudes[rows])


def anticommutator(a: Operator, b: Operator) -> Operator:
    return a @ b + b @ a


def commutator(a: Operator, b: Operator) -> Operator:
    return a @ b - b @ a


def basis_index(basis: Iterable[BasisState]) -> dict[BasisState, int]:
    return {s: i for i, s in enumerate(basis)}
