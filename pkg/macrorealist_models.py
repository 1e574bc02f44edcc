"""Classical two-state baselines for the LG statistic.

The hidden state is +1 or -1 at every time. Between consecutive times it
flips with ``p_flip_per_step`` (a stationary Markov telegraph process). An
invasive readout flips it with ``invasive_kick`` right after being read, and
only readouts followed by a later readout in the same experiment matter.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from lg_protocols import TIME_PAIRS, CorrelatorSet, EmptyGridError

logger = logging.getLogger(__name__)

# --- Configuration ---

TIMES = (1, 2, 3)
FLIP = "flip"
UNIFORM_OBSERVER = (0.5, 0.5)


class ModelError(ValueError):
    """Invalid classical model parameters or requests."""


# --- Value types ---

@dataclass(frozen=True)
class TelegraphModel:
    p_flip_per_step: float
    initial_prob_up: float = 0.5
    invasive_kick: float = 0.0

    def __post_init__(self):
        for name in ("p_flip_per_step", "initial_prob_up", "invasive_kick"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ModelError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class Trajectory:
    """Hidden values read at (t1, t2, t3) and the probability of that history."""

    states: tuple[int, int, int]
    probability: float


@dataclass(frozen=True)
class CoinWorld:
    """Physical face (+1 heads, -1 tails) and the blindfolded observer's (P heads, P tails)."""

    face: int
    observer_distribution: tuple[float, float] = UNIFORM_OBSERVER

    def __post_init__(self):
        if self.face not in (1, -1):
            raise ModelError(f"coin face must be +1 or -1, got {self.face!r}")
        heads, tails = self.observer_distribution
        if heads < 0 or tails < 0 or abs(heads + tails - 1.0) > 1e-12:
            raise ModelError(f"observer distribution {self.observer_distribution} is not a probability pair")


# --- Trajectory enumeration ---

def _step_flip_probability(model: TelegraphModel, kicked: bool) -> float:
    """Chance the hidden value differs at the next time, kick included."""
    if not kicked:
        return model.p_flip_per_step
    kick, flip = model.invasive_kick, model.p_flip_per_step
    return kick * (1.0 - flip) + (1.0 - kick) * flip


def enumerate_trajectories(model: TelegraphModel, probed=TIMES) -> list[Trajectory]:
    """All 8 hidden histories of one experiment that reads at the ``probed`` times."""
    probed = tuple(sorted(probed))
    last_readout = probed[-1]

    trajectories = []
    for states in itertools.product((1, -1), repeat=len(TIMES)):
        probability = model.initial_prob_up if states[0] == 1 else 1.0 - model.initial_prob_up
        for time, (now, later) in zip(TIMES, itertools.pairwise(states)):
            kicked = time in probed and time < last_readout
            flip = _step_flip_probability(model, kicked)
            probability *= flip if now != later else 1.0 - flip
        trajectories.append(Trajectory(states, probability))
    return trajectories


def _correlator(trajectories: list[Trajectory], k: int, m: int) -> float:
    return sum(t.probability * t.states[k - 1] * t.states[m - 1] for t in trajectories)


def _correlator_set(model: TelegraphModel) -> CorrelatorSet:
    # each correlator is its own experiment, probed only at its two times
    return CorrelatorSet(*(_correlator(enumerate_trajectories(model, (k, m)), k, m) for k, m in TIME_PAIRS))


def enumerate_k(model: TelegraphModel) -> CorrelatorSet:
    """Exact correlators of a non-invasive telegraph model; K <= 1 always."""
    if model.invasive_kick > 0:
        raise ModelError("enumerate_k needs non-invasive readout; use invasive_k for invasive_kick > 0")
    return _correlator_set(model)


def invasive_k(model: TelegraphModel) -> CorrelatorSet:
    """Correlators when readouts may kick the hidden state (the clumsiness loophole)."""
    return _correlator_set(model)


def telegraph_from_theta(theta: float) -> TelegraphModel:
    """Non-invasive model whose flip chance per step is the quantum sin^2(theta)."""
    return TelegraphModel(p_flip_per_step=float(np.sin(theta) ** 2), initial_prob_up=0.5)


def sweep_classical(theta_grid) -> list[tuple[float, CorrelatorSet]]:
    thetas = [float(theta) for theta in theta_grid]
    if not thetas:
        raise EmptyGridError("theta grid is empty")
    logger.debug("enumerating telegraph models for %d angles", len(thetas))
    return [(theta, enumerate_k(telegraph_from_theta(theta))) for theta in thetas]


# --- Blindfolded coin ---

def flip_coin(world: CoinWorld) -> CoinWorld:
    """Turns the coin over; the observer's ascription is relabelled the same way."""
    heads, tails = world.observer_distribution
    return CoinWorld(face=-world.face, observer_distribution=(tails, heads))


def coin_demo(n_steps: int, initial_face: int = 1) -> list[tuple[CoinWorld, str, CoinWorld]]:
    """Repeated blind flips: the face toggles while the observer's state never changes."""
    if n_steps < 1:
        raise ModelError(f"n_steps must be at least 1, got {n_steps}")
    world = CoinWorld(face=initial_face)
    steps = []
    for _ in range(n_steps):
        flipped = flip_coin(world)
        steps.append((world, FLIP, flipped))
        world = flipped
    return steps
