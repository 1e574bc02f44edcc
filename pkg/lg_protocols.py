"""Leggett-Garg correlator protocols and the K statistic.

Times t1, t2, t3 are equally spaced; the system evolves by ``u_theta(theta)``
between consecutive times and ``u_theta((m - k) * theta)`` from t_k to t_m.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache, reduce

import numpy as np

from quantum_core import (
    STAT_TOL,
    DensityMatrix,
    Observable,
    Unitary,
    apply,
    conditional_not,
    controlled_phase,
    expectation,
    hadamard,
    matrices_close,
    measure,
    on_qubit,
    partial_trace,
    phase_s,
    sample_outcomes,
    tensor,
    u_theta,
)

logger = logging.getLogger(__name__)

# --- Configuration ---

LG_BOUND = 1.0
TIME_PAIRS = ((1, 2), (2, 3), (1, 3))

# Simultaneous circuit register: system on qubit 0, one ancilla per correlator.
SYSTEM_QUBIT = 0
ANCILLA_FOR_PAIR = {(1, 2): 1, (2, 3): 2, (1, 3): 3}
CIRCUIT_QUBITS = 4


class Engine(str, Enum):
    SEPARATE = "separate"
    SIMULTANEOUS = "simultaneous"
    INRM = "inrm"


class Readout(str, Enum):
    """Ancilla phase convention of the simultaneous circuit."""

    SIGMA_X = "sigma_x"
    SIGMA_Y = "sigma_y"


# --- Errors ---

class ProtocolError(ValueError):
    """Base class for invalid protocol requests."""


class TimeIndexError(ProtocolError):
    pass


class UnsupportedObservableError(ProtocolError):
    pass


class EmptyGridError(ProtocolError):
    pass


# --- Value types ---

@dataclass(frozen=True)
class CorrelatorSet:
    """C12, C23, C13 and K = C12 + C23 - C13."""

    c12: float
    c23: float
    c13: float

    def __post_init__(self):
        for name in ("c12", "c23", "c13"):
            value = getattr(self, name)
            if abs(value) > 1 + STAT_TOL:
                raise ProtocolError(f"{name} = {value!r} lies outside [-1, 1]")

    @property
    def k(self) -> float:
        return self.c12 + self.c23 - self.c13

    @property
    def violates_bound(self) -> bool:
        return self.k > LG_BOUND + STAT_TOL


def _sigma_z_default() -> Observable:
    return Observable.sigma_z()


def _mixed_default() -> DensityMatrix:
    return DensityMatrix.maximally_mixed(1)


@dataclass(frozen=True)
class ProtocolConfig:
    """Evolution angle per interval, state at t1 and the measured observable."""

    theta: float
    initial_state: DensityMatrix = field(default_factory=_mixed_default)
    observable: Observable = field(default_factory=_sigma_z_default)

    def __post_init__(self):
        if self.initial_state.dim != 2 or self.observable.dim != 2:
            raise ProtocolError("protocols act on a single system qubit (2x2 state and observable)")
        if not self.observable.dichotomic:
            raise UnsupportedObservableError("the LG observable must be dichotomic")


@dataclass(frozen=True)
class PerturbationReport:
    """Effect of one scattering-circuit interaction on the system Bloch vector.

    ``bloch_before`` is the interaction-free evolution, ``bloch_after`` the
    evolution with the ancilla coupling, ``stage_blochs`` the system after
    each circuit stage (prepared, coupled at t1, evolved, coupled at t2).
    """

    input_label: str
    bloch_initial: tuple[float, float, float]
    bloch_before: tuple[float, float, float]
    bloch_after: tuple[float, float, float]
    stage_blochs: tuple[tuple[float, float, float], ...] = ()

    def __post_init__(self):
        for vector in (self.bloch_initial, self.bloch_before, self.bloch_after, *self.stage_blochs):
            if np.linalg.norm(vector) > 1 + STAT_TOL:
                raise ProtocolError(f"Bloch vector {vector} is longer than 1")

    @property
    def displacement(self) -> tuple[float, float, float]:
        return tuple(after - before for after, before in zip(self.bloch_after, self.bloch_before))


@dataclass(frozen=True)
class NegativeResultRun:
    """One post-selected sub-experiment of the ideal-negative-result scheme.

    The probe fires when the system is in the ``coupled_outcome`` eigenspace;
    kept runs (no flip) are assigned ``inferred_outcome``.
    """

    coupled_outcome: int
    flip_probability: float
    kept_probability: float
    conditional_correlator: float

    @property
    def inferred_outcome(self) -> int:
        return -self.coupled_outcome

    @property
    def weighted_contribution(self) -> float:
        return self.kept_probability * self.conditional_correlator


# --- Helpers ---

def _check_pair(k: int, m: int) -> None:
    if not (isinstance(k, (int, np.integer)) and isinstance(m, (int, np.integer))):
        raise TimeIndexError(f"time indices must be integers, got {k!r}, {m!r}")
    if not 1 <= k < m <= 3:
        raise TimeIndexError(f"need 1 <= k < m <= 3, got k={k}, m={m}")


def _state_at(config: ProtocolConfig, time_index: int) -> DensityMatrix:
    return apply(u_theta((time_index - 1) * config.theta), config.initial_state)


def _bloch(rho: DensityMatrix) -> tuple[float, float, float]:
    return tuple(float(v) for v in rho.bloch_vector())


def _mean_outcome(obs: Observable, rho: DensityMatrix) -> float:
    """Sum over both measurement branches of outcome * probability."""
    return sum(record.outcome * record.probability for record in measure(obs, rho))


# --- Separate runs ---

def correlator_separate(config: ProtocolConfig, k: int, m: int) -> float:
    """<O(t_k) O(t_m)> from its own experiment: measure at t_k, evolve, measure at t_m."""
    _check_pair(k, m)
    obs = config.observable
    evolution = u_theta((m - k) * config.theta)

    correlator = 0.0
    for first in measure(obs, _state_at(config, k)):
        if first.post_state is None:
            continue
        for second in measure(obs, apply(evolution, first.post_state)):
            correlator += first.probability * second.probability * first.outcome * second.outcome
    return correlator


def k_statistic_separate(config: ProtocolConfig) -> CorrelatorSet:
    return CorrelatorSet(*(correlator_separate(config, k, m) for k, m in TIME_PAIRS))


def sampled_correlator_separate(config: ProtocolConfig, k: int, m: int, shots: int, rng: np.random.Generator) -> float:
    """Shot-sampled estimate of :func:`correlator_separate`."""
    _check_pair(k, m)
    obs = config.observable
    evolution = u_theta((m - k) * config.theta)
    rho_k = _state_at(config, k)

    first = sample_outcomes(obs, rho_k, shots, rng)
    branches = {record.outcome: record for record in measure(obs, rho_k)}
    total = 0
    for outcome, record in branches.items():
        count = int(np.count_nonzero(first == outcome))
        if count == 0 or record.post_state is None:
            continue
        second = sample_outcomes(obs, apply(evolution, record.post_state), count, rng)
        total += outcome * int(second.sum())
    return total / shots


def sampled_k_statistic_separate(config: ProtocolConfig, shots: int, rng: np.random.Generator) -> CorrelatorSet:
    return CorrelatorSet(*(sampled_correlator_separate(config, k, m, shots, rng) for k, m in TIME_PAIRS))


# --- Single-run scattering circuit ---

@lru_cache(maxsize=None)
def _coupling_at(time_index: int) -> Unitary:
    """Controlled phases from the system onto the two ancillas probed at ``time_index``."""
    ancillas = [ancilla for pair, ancilla in ANCILLA_FOR_PAIR.items() if time_index in pair]
    gates = [controlled_phase(SYSTEM_QUBIT, ancilla, CIRCUIT_QUBITS) for ancilla in ancillas]
    return reduce(lambda left, right: left @ right, gates)


@lru_cache(maxsize=None)
def _ancilla_preparation(readout: Readout) -> DensityMatrix:
    prepare = hadamard() if readout is Readout.SIGMA_X else phase_s() @ hadamard()
    return apply(prepare, DensityMatrix.basis("0"))


def _readout_observable(readout: Readout) -> Observable:
    return Observable.sigma_x() if readout is Readout.SIGMA_X else Observable.sigma_y()


def simultaneous_circuit(config: ProtocolConfig, readout: Readout = Readout.SIGMA_X) -> CorrelatorSet:
    """All three correlators read from the ancillas of one four-qubit run."""
    if not matrices_close(config.observable.matrix, Observable.sigma_z().matrix):
        raise UnsupportedObservableError("the simultaneous circuit couples through controlled phases and needs O = sigma_z")
    readout = Readout(readout)

    ancilla = _ancilla_preparation(readout)
    register = reduce(tensor, [config.initial_state, ancilla, ancilla, ancilla])
    evolution = on_qubit(u_theta(config.theta), SYSTEM_QUBIT, CIRCUIT_QUBITS)
    circuit = _coupling_at(3) @ evolution @ _coupling_at(2) @ evolution @ _coupling_at(1)
    final = apply(circuit, register)

    probe = _readout_observable(readout)
    correlators = [expectation(probe, partial_trace(final, {ANCILLA_FOR_PAIR[pair]})) for pair in TIME_PAIRS]
    return CorrelatorSet(*correlators)


# --- Ideal negative result measurement ---

def _probe_coupling(obs: Observable, coupled_outcome: int) -> Unitary:
    """CNOT onto the probe that fires only inside the ``coupled_outcome`` eigenspace of ``obs``."""
    return conditional_not(obs.projector(coupled_outcome), SYSTEM_QUBIT, 1, 2)


def inrm_subexperiment(config: ProtocolConfig, k: int, m: int, coupled_outcome: int) -> NegativeResultRun:
    """Probe at t_k coupled to one outcome, keep only the runs where it did not flip."""
    _check_pair(k, m)
    if coupled_outcome not in (+1, -1):
        raise ProtocolError(f"coupled outcome must be +1 or -1, got {coupled_outcome!r}")
    obs = config.observable

    joint = tensor(_state_at(config, k), DensityMatrix.basis("0"))
    joint = apply(_probe_coupling(obs, coupled_outcome), joint)
    no_flip, flip = measure(Observable.sigma_z().on_qubit(1, 2), joint)

    conditional = 0.0
    if no_flip.post_state is not None:
        system = partial_trace(no_flip.post_state, {SYSTEM_QUBIT})
        later = apply(u_theta((m - k) * config.theta), system)
        conditional = -coupled_outcome * _mean_outcome(obs, later)
    return NegativeResultRun(coupled_outcome, flip.probability, no_flip.probability, conditional)


def inrm_correlator(config: ProtocolConfig, k: int, m: int) -> float:
    """Both negative-result sub-experiments, weighted by how often their runs are kept."""
    runs = [inrm_subexperiment(config, k, m, coupled) for coupled in (-1, +1)]
    return sum(run.weighted_contribution for run in runs)


def k_statistic_inrm(config: ProtocolConfig) -> CorrelatorSet:
    return CorrelatorSet(*(inrm_correlator(config, k, m) for k, m in TIME_PAIRS))


# --- Invasiveness on mixed states ---

INVASIVENESS_INPUTS = (
    ("|0>", lambda: DensityMatrix.basis("0")),
    ("|1>", lambda: DensityMatrix.basis("1")),
    ("I/2", lambda: DensityMatrix.maximally_mixed(1)),
)


def perturbation_report(label: str, rho: DensityMatrix, theta: float) -> PerturbationReport:
    """One scattering interaction (couple, evolve, couple) against plain evolution."""
    evolution = u_theta(theta)
    coupling = controlled_phase(SYSTEM_QUBIT, 1, 2)

    joint = tensor(rho, _ancilla_preparation(Readout.SIGMA_X))
    stages = [joint]
    for gate in (coupling, on_qubit(evolution, SYSTEM_QUBIT, 2), coupling):
        joint = apply(gate, joint)
        stages.append(joint)

    stage_blochs = tuple(_bloch(partial_trace(stage, {SYSTEM_QUBIT})) for stage in stages)
    return PerturbationReport(
        input_label=label,
        bloch_initial=_bloch(rho),
        bloch_before=_bloch(apply(evolution, rho)),
        bloch_after=stage_blochs[-1],
        stage_blochs=stage_blochs,
    )


def invasiveness_demo(theta: float) -> tuple[PerturbationReport, PerturbationReport, PerturbationReport]:
    """Reports for |0>, |1> and I/2, in that order."""
    return tuple(perturbation_report(label, make(), theta) for label, make in INVASIVENESS_INPUTS)


# --- Sweeps ---

_ENGINES = {
    Engine.SEPARATE: k_statistic_separate,
    Engine.SIMULTANEOUS: simultaneous_circuit,
    Engine.INRM: k_statistic_inrm,
}


def sweep_k(theta_grid, engine: Engine | str = Engine.SEPARATE) -> list[tuple[float, CorrelatorSet]]:
    """CorrelatorSet per grid angle, in grid order."""
    thetas = [float(theta) for theta in theta_grid]
    if not thetas:
        raise EmptyGridError("theta grid is empty")
    engine = Engine(engine)
    logger.debug("sweeping %d angles with the %s engine", len(thetas), engine.value)
    run = _ENGINES[engine]
    return [(theta, run(ProtocolConfig(theta))) for theta in thetas]
