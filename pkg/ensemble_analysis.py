"""Thermal NMR ensembles: pseudo-pure decomposition, polarization and fair sampling."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import constants

from quantum_core import (
    ATOL,
    DensityMatrix,
    Observable,
    Unitary,
    apply,
    expectation,
    measure,
)

logger = logging.getLogger(__name__)

# --- Configuration ---

BOLTZMANN = constants.k                # J/K
PROTON_MAGNETIC_MOMENT = constants.physical_constants["proton mag. mom."][0]  # J/T
DEFAULT_FIELD = 11.7                   # T
DEFAULT_TEMPERATURE = 300.0            # K
CLAIMED_EPSILON_BOUND = 1e-7           # the "typical values" figure quoted for room-temperature NMR


class EnsembleError(ValueError):
    """Invalid ensemble parameters or observables."""


# --- Value types ---

@dataclass(frozen=True)
class PseudoPureState:
    """rho = epsilon * pure_part + (1 - epsilon) * I/2.

    ``degenerate`` marks epsilon = 0, where ``pure_part`` is |0><0| by convention
    and carries no information about the state.
    """

    epsilon: float
    pure_part: DensityMatrix
    degenerate: bool = False

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise EnsembleError(f"epsilon must lie in [0, 1], got {self.epsilon!r}")
        if self.pure_part.dim != 2:
            raise EnsembleError("pseudo-pure states are single-qubit")

    def reconstruct(self) -> DensityMatrix:
        mixed = DensityMatrix.maximally_mixed(1).matrix
        return DensityMatrix(self.epsilon * self.pure_part.matrix + (1.0 - self.epsilon) * mixed)


@dataclass(frozen=True)
class ThermalParams:
    magnetic_moment: float = PROTON_MAGNETIC_MOMENT
    field: float = DEFAULT_FIELD
    temperature: float = DEFAULT_TEMPERATURE
    boltzmann: float = BOLTZMANN

    def __post_init__(self):
        if self.field < 0:
            raise EnsembleError(f"field must be non-negative, got {self.field!r} T")
        if self.temperature <= 0:
            raise EnsembleError(f"temperature must be positive, got {self.temperature!r} K")
        if self.magnetic_moment <= 0:
            raise EnsembleError(f"magnetic moment must be positive, got {self.magnetic_moment!r} J/T")

    @property
    def zeeman_ratio(self) -> float:
        """mu_N B / k T."""
        return self.magnetic_moment * self.field / (self.boltzmann * self.temperature)

    @property
    def alpha(self) -> float:
        return math.exp(-self.zeeman_ratio)


@dataclass(frozen=True)
class MeasurementCircuit:
    """Single-qubit unitaries applied in order, then a projective measurement."""

    gates: tuple[Unitary, ...] = ()
    observable: Observable = field(default_factory=Observable.sigma_z)

    def run(self, rho: DensityMatrix) -> tuple[float, float]:
        """(P(+1), P(-1)) after the gates."""
        for gate in self.gates:
            rho = apply(gate, rho)
        plus, minus = measure(self.observable, rho)
        return plus.probability, minus.probability


@dataclass(frozen=True)
class FairSamplingReport:
    epsilon: float
    pure_distribution: tuple[float, float]
    identity_distribution: tuple[float, float]
    pure_signal: float
    observed_signal: float

    @property
    def distributions_differ(self) -> bool:
        return any(abs(p - q) > ATOL for p, q in zip(self.pure_distribution, self.identity_distribution))


@dataclass(frozen=True)
class EfficiencyReport:
    params: ThermalParams
    epsilon: float
    claimed_bound: float = CLAIMED_EPSILON_BOUND

    @property
    def matches_claim(self) -> bool:
        return self.epsilon < self.claimed_bound


# --- Operations ---

def decompose(rho: DensityMatrix) -> PseudoPureState:
    """Splits a qubit state into its polarized and maximally mixed parts."""
    if rho.dim != 2:
        raise EnsembleError("decompose expects a single-qubit state")
    bloch = rho.bloch_vector()
    epsilon = float(np.linalg.norm(bloch))
    if epsilon <= ATOL:
        logger.warning("state is maximally mixed; pseudo-pure direction is undefined")
        return PseudoPureState(0.0, DensityMatrix.basis("0"), degenerate=True)
    epsilon = min(epsilon, 1.0)
    return PseudoPureState(epsilon, DensityMatrix.from_bloch(bloch / np.linalg.norm(bloch)))


def epsilon_from_ratio(ratio: float) -> float:
    """(1 - alpha) / (1 + alpha) with alpha = exp(-ratio), exact for small ratios."""
    if ratio < 0:
        raise EnsembleError(f"Zeeman ratio must be non-negative, got {ratio!r}")
    shifted = math.expm1(-ratio)  # alpha - 1
    return -shifted / (2.0 + shifted)


def thermal_epsilon(params: ThermalParams) -> float:
    return epsilon_from_ratio(params.zeeman_ratio)


def _check_signal_observable(obs: Observable) -> None:
    if not obs.dichotomic:
        raise EnsembleError("signal observable must be dichotomic")
    if abs(np.trace(obs.matrix)) > ATOL:
        raise EnsembleError("signal observable must be traceless for the identity part to cancel")
    if obs.dim != 2:
        raise EnsembleError("signal observable must act on one qubit")


def observable_signal(state: PseudoPureState, obs: Observable) -> float:
    """tr(O rho); only the epsilon-weighted pure part contributes."""
    _check_signal_observable(obs)
    return expectation(obs, state.reconstruct())


def fair_sampling_report(state: PseudoPureState, circuit: MeasurementCircuit) -> FairSamplingReport:
    """Runs ``circuit`` on the pure and identity components separately."""
    _check_signal_observable(circuit.observable)
    pure = circuit.run(state.pure_part)
    identity = circuit.run(DensityMatrix.maximally_mixed(1))
    pure_signal = pure[0] - pure[1]
    identity_signal = identity[0] - identity[1]
    observed = state.epsilon * pure_signal + (1.0 - state.epsilon) * identity_signal
    return FairSamplingReport(
        epsilon=state.epsilon,
        pure_distribution=pure,
        identity_distribution=identity,
        pure_signal=pure_signal,
        observed_signal=observed,
    )


def efficiency_report(params: ThermalParams | None = None) -> EfficiencyReport:
    """Polarization at ``params`` (documented defaults if omitted) against the 1e-7 claim."""
    params = params or ThermalParams()
    report = EfficiencyReport(params, thermal_epsilon(params))
    if not report.matches_claim:
        logger.warning(
            "epsilon = %.3e at B = %g T, T = %g K is above the claimed bound %.0e",
            report.epsilon, params.field, params.temperature, report.claimed_bound,
        )
    return report


def epsilon_table(fields, temperatures, params: ThermalParams | None = None) -> pd.DataFrame:
    """epsilon over every (field, temperature) pair, field-major."""
    params = params or ThermalParams()
    rows = []
    for b in fields:
        for t in temperatures:
            point = ThermalParams(params.magnetic_moment, float(b), float(t), params.boltzmann)
            rows.append({"field": point.field, "temperature": point.temperature, "epsilon": thermal_epsilon(point)})
    return pd.DataFrame(rows, columns=["field", "temperature", "epsilon"])
