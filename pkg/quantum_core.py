"""Dense density-matrix algebra for registers of one to four qubits.

Qubit 0 is the most significant bit of a basis index, so ``|01>`` is index 1
and ``tensor(a, b)`` puts ``a`` on the low-numbered (high-order) qubits.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import reduce

import numpy as np
import numpy.typing as npt

logger = logging.getLogger(__name__)

# --- Configuration ---

ATOL = 1e-12          # algebraic identities
STAT_TOL = 1e-9       # derived statistical quantities
PSD_FLOOR = -1e-10    # smallest eigenvalue accepted on a valid state
IMAG_TOL = 1e-9       # largest imaginary part tolerated in an expectation value
MAX_QUBITS = 4

ComplexMatrix = npt.NDArray[np.complex128]


# --- Errors ---

class QuantumCoreError(ValueError):
    """Base class for invalid quantum-core inputs."""


class DimensionMismatchError(QuantumCoreError):
    pass


class NotDichotomicError(QuantumCoreError):
    pass


class InvalidStateError(QuantumCoreError):
    pass


class NotUnitaryError(QuantumCoreError):
    pass


class QubitIndexError(QuantumCoreError):
    pass


class NonHermitianResultError(QuantumCoreError):
    pass


# --- Matrix helpers ---

def as_matrix(data) -> ComplexMatrix:
    """Copies ``data`` into a read-only complex square matrix."""
    matrix = np.array(data, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {matrix.shape}")
    matrix.setflags(write=False)
    return matrix


def matrices_close(a, b, atol: float = ATOL) -> bool:
    """Entry-wise comparison with an absolute tolerance."""
    a = np.asarray(a)
    b = np.asarray(b)
    return a.shape == b.shape and bool(np.max(np.abs(a - b), initial=0.0) <= atol)


def _qubit_count(dim: int) -> int:
    n_qubits = int(dim).bit_length() - 1
    if dim < 2 or 2 ** n_qubits != dim:
        raise DimensionMismatchError(f"dimension {dim} is not a power of two")
    if n_qubits > MAX_QUBITS:
        raise DimensionMismatchError(f"{n_qubits} qubits exceeds the {MAX_QUBITS}-qubit register limit")
    return n_qubits


def _hermiticity_gap(matrix: ComplexMatrix) -> float:
    return float(np.max(np.abs(matrix - matrix.conj().T)))


# --- Value types ---

@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite state of a qubit register."""

    matrix: ComplexMatrix

    def __post_init__(self):
        matrix = as_matrix(self.matrix)
        _qubit_count(matrix.shape[0])
        if _hermiticity_gap(matrix) > ATOL:
            raise InvalidStateError("density matrix is not Hermitian")
        trace = np.trace(matrix)
        if abs(trace - 1.0) > ATOL:
            raise InvalidStateError(f"density matrix trace is {trace.real:.15g}, expected 1")
        smallest = float(np.linalg.eigvalsh(matrix)[0])
        if smallest < PSD_FLOOR:
            raise InvalidStateError(f"density matrix has negative eigenvalue {smallest:.3e}")
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_qubits(self) -> int:
        return _qubit_count(self.dim)

    @classmethod
    def from_ket(cls, psi) -> "DensityMatrix":
        """Projector onto the normalized ket ``psi``."""
        psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise InvalidStateError("cannot build a state from the zero vector")
        psi = psi / norm
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def basis(cls, bits: str) -> "DensityMatrix":
        """Computational basis projector, e.g. ``basis("01")``."""
        if not bits or set(bits) - {"0", "1"}:
            raise InvalidStateError(f"invalid basis label {bits!r}")
        psi = np.zeros(2 ** len(bits), dtype=np.complex128)
        psi[int(bits, 2)] = 1.0
        return cls.from_ket(psi)

    @classmethod
    def maximally_mixed(cls, n_qubits: int = 1) -> "DensityMatrix":
        dim = 2 ** n_qubits
        return cls(np.eye(dim, dtype=np.complex128) / dim)

    @classmethod
    def from_bloch(cls, vector) -> "DensityMatrix":
        """Single-qubit state (I + r.sigma) / 2."""
        x, y, z = (float(v) for v in vector)
        return cls(0.5 * (_I2 + x * _X + y * _Y + z * _Z))

    def bloch_vector(self) -> npt.NDArray[np.float64]:
        """(<sigma_x>, <sigma_y>, <sigma_z>) of a single-qubit state."""
        if self.dim != 2:
            raise DimensionMismatchError("Bloch vectors are defined for single qubits only")
        return np.array([np.trace(self.matrix @ pauli).real for pauli in (_X, _Y, _Z)])

    def isclose(self, other: "DensityMatrix", atol: float = ATOL) -> bool:
        return matrices_close(self.matrix, other.matrix, atol)


@dataclass(frozen=True, eq=False)
class Unitary:
    """Square matrix with U^dagger U = I."""

    matrix: ComplexMatrix

    def __post_init__(self):
        matrix = as_matrix(self.matrix)
        _qubit_count(matrix.shape[0])
        gap = np.max(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[0])))
        if gap > ATOL:
            raise NotUnitaryError(f"matrix deviates from unitarity by {gap:.3e}")
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_qubits(self) -> int:
        return _qubit_count(self.dim)

    def __matmul__(self, other: "Unitary") -> "Unitary":
        if self.dim != other.dim:
            raise DimensionMismatchError(f"cannot compose {self.dim}x{self.dim} with {other.dim}x{other.dim}")
        return Unitary(self.matrix @ other.matrix)

    def dagger(self) -> "Unitary":
        return Unitary(self.matrix.conj().T)

    def isclose(self, other: "Unitary", atol: float = ATOL) -> bool:
        return matrices_close(self.matrix, other.matrix, atol)


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian operator; dichotomic observables square to the identity."""

    matrix: ComplexMatrix
    dichotomic: bool = True

    def __post_init__(self):
        matrix = as_matrix(self.matrix)
        _qubit_count(matrix.shape[0])
        if _hermiticity_gap(matrix) > ATOL:
            raise InvalidStateError("observable is not Hermitian")
        if self.dichotomic and not matrices_close(matrix @ matrix, np.eye(matrix.shape[0]), 1e-10):
            raise NotDichotomicError("observable flagged dichotomic but O^2 != I")
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def sigma_x(cls) -> "Observable":
        return cls(_X)

    @classmethod
    def sigma_y(cls) -> "Observable":
        return cls(_Y)

    @classmethod
    def sigma_z(cls) -> "Observable":
        return cls(_Z)

    @classmethod
    def from_state(cls, psi0) -> "Observable":
        """O = 2|psi0><psi0| - I, dichotomic by construction."""
        projector = DensityMatrix.from_ket(psi0).matrix
        return cls(2 * projector - np.eye(projector.shape[0]))

    def on_qubit(self, target: int, n_qubits: int) -> "Observable":
        """Embeds a single-qubit observable at ``target`` of an ``n_qubits`` register."""
        return Observable(_embed(self.matrix, target, n_qubits), self.dichotomic)

    def projector(self, outcome: int) -> ComplexMatrix:
        """P_outcome = (I + outcome * O) / 2."""
        return 0.5 * (np.eye(self.dim) + outcome * self.matrix)


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    """One branch of a projective measurement.

    ``post_state`` is None when the branch has probability below ATOL.
    """

    outcome: int
    probability: float
    post_state: DensityMatrix | None


# --- Single-qubit constants ---

_I2 = np.eye(2, dtype=np.complex128)
_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
_S = np.array([[1, 0], [0, 1j]], dtype=np.complex128)


def _check_index(index: int, n_qubits: int) -> None:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise QubitIndexError(f"register size {n_qubits} outside 1..{MAX_QUBITS}")
    if not 0 <= index < n_qubits:
        raise QubitIndexError(f"qubit index {index} out of range for {n_qubits} qubits")


def _embed(single: ComplexMatrix, target: int, n_qubits: int) -> ComplexMatrix:
    _check_index(target, n_qubits)
    factors = [single if q == target else _I2 for q in range(n_qubits)]
    return reduce(np.kron, factors)


# --- Gate constructors ---

def identity(n_qubits: int = 1) -> Unitary:
    return Unitary(np.eye(2 ** n_qubits, dtype=np.complex128))


def pauli_x() -> Unitary:
    return Unitary(_X)


def pauli_y() -> Unitary:
    return Unitary(_Y)


def pauli_z() -> Unitary:
    return Unitary(_Z)


def hadamard() -> Unitary:
    return Unitary(_H)


def phase_s() -> Unitary:
    return Unitary(_S)


def on_qubit(gate: Unitary, target: int, n_qubits: int) -> Unitary:
    """Embeds a single-qubit gate at ``target``, identity elsewhere."""
    if gate.dim != 2:
        raise DimensionMismatchError("on_qubit expects a single-qubit gate")
    return Unitary(_embed(gate.matrix, target, n_qubits))


def u_theta(theta: float) -> Unitary:
    """cos(theta) I + i sin(theta) sigma_x."""
    return Unitary(np.cos(theta) * _I2 + 1j * np.sin(theta) * _X)


def _controlled(active: ComplexMatrix, single: ComplexMatrix, control: int, target: int, n_qubits: int) -> Unitary:
    _check_index(control, n_qubits)
    _check_index(target, n_qubits)
    if control == target:
        raise QubitIndexError("control and target must be distinct qubits")
    idle = _I2 - active
    fired = reduce(np.kron, [active if q == control else single if q == target else _I2 for q in range(n_qubits)])
    skipped = reduce(np.kron, [idle if q == control else _I2 for q in range(n_qubits)])
    return Unitary(fired + skipped)


def _basis_projector(control_value: int) -> ComplexMatrix:
    if control_value not in (0, 1):
        raise QubitIndexError(f"control value must be 0 or 1, got {control_value}")
    active = np.zeros((2, 2), dtype=np.complex128)
    active[control_value, control_value] = 1.0
    return active


def controlled_phase(control_index: int, target_index: int, n_qubits: int) -> Unitary:
    """sigma_z on the target when the control is |1>."""
    return _controlled(_basis_projector(1), _Z, control_index, target_index, n_qubits)


def controlled_not(control_index: int, target_index: int, n_qubits: int, control_value: int = 1) -> Unitary:
    """Flips the target only when the control is in |control_value>."""
    return conditional_not(_basis_projector(control_value), control_index, target_index, n_qubits)


def conditional_not(projector, control_index: int, target_index: int, n_qubits: int) -> Unitary:
    """Flips the target only inside the range of ``projector`` on the control qubit.

    ``projector`` may be 0 or I, in which case the target never or always flips.
    """
    active = np.asarray(projector, dtype=np.complex128)
    if active.shape != (2, 2):
        raise DimensionMismatchError(f"control projector must be 2x2, got shape {active.shape}")
    if _hermiticity_gap(active) > ATOL or not matrices_close(active @ active, active, 1e-10):
        raise QuantumCoreError("control operator is not an orthogonal projector")
    return _controlled(active, _X, control_index, target_index, n_qubits)


# --- Operations ---

def tensor(a, b):
    """Kronecker product of two states or two gates; ``a`` holds the high-order qubits."""
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(np.kron(a.matrix, b.matrix))
    if isinstance(a, Unitary) and isinstance(b, Unitary):
        return Unitary(np.kron(a.matrix, b.matrix))
    raise TypeError(f"tensor expects two DensityMatrix or two Unitary operands, got {type(a).__name__} and {type(b).__name__}")


def apply(u: Unitary, rho: DensityMatrix) -> DensityMatrix:
    """U rho U^dagger."""
    if u.dim != rho.dim:
        raise DimensionMismatchError(f"gate acts on dimension {u.dim}, state has dimension {rho.dim}")
    return DensityMatrix(u.matrix @ rho.matrix @ u.matrix.conj().T)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduced state on the qubits in ``keep`` (returned in ascending qubit order)."""
    n_qubits = rho.n_qubits
    kept = sorted(set(keep))
    if not kept:
        raise QubitIndexError("partial_trace needs at least one qubit to keep")
    for index in kept:
        _check_index(index, n_qubits)

    tensor_form = rho.matrix.reshape([2] * (2 * n_qubits))
    # trace from the highest index down so lower axis positions stay valid
    remaining = n_qubits
    for qubit in reversed(range(n_qubits)):
        if qubit in kept:
            continue
        tensor_form = np.trace(tensor_form, axis1=qubit, axis2=qubit + remaining)
        remaining -= 1
    dim = 2 ** len(kept)
    return DensityMatrix(tensor_form.reshape(dim, dim))


def _require_match(obs: Observable, rho: DensityMatrix) -> None:
    if obs.dim != rho.dim:
        raise DimensionMismatchError(f"observable has dimension {obs.dim}, state has dimension {rho.dim}")


def _renormalized_branch(unnormalized: ComplexMatrix, probability: float) -> ComplexMatrix:
    """P rho P / p as a valid state.

    Dividing by a small p scales round-off into eigenvalues well below zero,
    so the spectrum is clipped at zero and the trace restored.
    """
    values, vectors = np.linalg.eigh(0.5 * (unnormalized + unnormalized.conj().T) / probability)
    values = np.clip(values, 0.0, None)
    values /= values.sum()
    branch = (vectors * values) @ vectors.conj().T
    return 0.5 * (branch + branch.conj().T)


def measure(obs: Observable, rho: DensityMatrix) -> tuple[MeasurementRecord, MeasurementRecord]:
    """Both branches of a projective measurement of a dichotomic observable.

    Returns the +1 record first. Each branch carries tr(P rho) and the
    collapsed state P rho P / tr(P rho).
    """
    if not obs.dichotomic:
        raise NotDichotomicError("projective measurement requires a dichotomic observable")
    _require_match(obs, rho)

    records = []
    for outcome in (+1, -1):
        projector = obs.projector(outcome)
        unnormalized = projector @ rho.matrix @ projector
        probability = float(np.trace(unnormalized).real)
        probability = min(max(probability, 0.0), 1.0)
        post_state = DensityMatrix(_renormalized_branch(unnormalized, probability)) if probability > ATOL else None
        if post_state is None:
            logger.debug("outcome %+d has vanishing probability %.3e", outcome, probability)
        records.append(MeasurementRecord(outcome, probability, post_state))
    return records[0], records[1]


def expectation(obs: Observable, rho: DensityMatrix) -> float:
    """tr(O rho)."""
    _require_match(obs, rho)
    value = np.trace(obs.matrix @ rho.matrix)
    if abs(value.imag) > IMAG_TOL:
        raise NonHermitianResultError(f"expectation value has imaginary part {value.imag:.3e}")
    return float(value.real)


def sample_outcomes(obs: Observable, rho: DensityMatrix, shots: int, rng: np.random.Generator) -> npt.NDArray[np.int64]:
    """Draws ``shots`` +/-1 outcomes with the probabilities of :func:`measure`."""
    if shots < 1:
        raise QuantumCoreError(f"shots must be positive, got {shots}")
    plus, _ = measure(obs, rho)
    return np.where(rng.random(shots) < plus.probability, 1, -1)
