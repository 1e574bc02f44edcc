import math

import numpy as np
import pytest

from macrorealist_models import (
    CoinWorld,
    ModelError,
    TelegraphModel,
    coin_demo,
    enumerate_k,
    enumerate_trajectories,
    flip_coin,
    invasive_k,
    sweep_classical,
    telegraph_from_theta,
)


# --- Non-invasive readout ---

class TestEnumerateK:
    def test_frozen_dynamics(self):
        cs = enumerate_k(TelegraphModel(p_flip_per_step=0.0, initial_prob_up=0.5))
        assert (cs.c12, cs.c23, cs.c13, cs.k) == (1.0, 1.0, 1.0, 1.0)

    def test_memoryless_dynamics(self):
        cs = enumerate_k(TelegraphModel(p_flip_per_step=0.5, initial_prob_up=0.5))
        assert (cs.c12, cs.c23, cs.c13) == pytest.approx((0.0, 0.0, 0.0), abs=1e-12)
        assert cs.k == pytest.approx(0.0, abs=1e-12)

    def test_random_parameters_obey_bound(self, rng):
        for p_flip, prob_up in rng.uniform(0, 1, size=(10_000, 2)):
            assert enumerate_k(TelegraphModel(p_flip, prob_up)).k <= 1 + 1e-12

    def test_parameter_grid_obeys_bound(self):
        grid = np.linspace(0, 1, 100)
        for p_flip in grid:
            for prob_up in grid:
                assert enumerate_k(TelegraphModel(p_flip, prob_up)).k <= 1 + 1e-12

    @pytest.mark.parametrize("p_flip", [0.0, 0.1, 0.37, 0.9])
    def test_closed_form(self, p_flip):
        q = 1 - 2 * p_flip
        cs = enumerate_k(TelegraphModel(p_flip, 0.3))
        assert (cs.c12, cs.c23, cs.c13) == pytest.approx((q, q, q * q), abs=1e-12)

    def test_rejects_invasive_model(self):
        with pytest.raises(ModelError):
            enumerate_k(TelegraphModel(0.2, 0.5, invasive_kick=0.1))

    @pytest.mark.parametrize("kwargs", [
        {"p_flip_per_step": -0.1},
        {"p_flip_per_step": 0.2, "initial_prob_up": 1.5},
        {"p_flip_per_step": 0.2, "invasive_kick": 2.0},
    ])
    def test_rejects_invalid_probabilities(self, kwargs):
        with pytest.raises(ModelError):
            TelegraphModel(**kwargs)


class TestTrajectories:
    def test_eight_histories(self):
        trajectories = enumerate_trajectories(TelegraphModel(0.3, 0.6))
        assert len(trajectories) == 8
        assert len({t.states for t in trajectories}) == 8

    def test_probabilities_sum_to_one(self, rng):
        for p_flip, prob_up, kick in rng.uniform(0, 1, size=(500, 3)):
            model = TelegraphModel(p_flip, prob_up, kick)
            for probed in ((1, 2, 3), (1, 2), (2, 3), (1, 3)):
                total = sum(t.probability for t in enumerate_trajectories(model, probed))
                assert total == pytest.approx(1.0, abs=1e-12)

    def test_frozen_history_probabilities(self):
        trajectories = {t.states: t.probability for t in enumerate_trajectories(TelegraphModel(0.0, 0.25))}
        assert trajectories[(1, 1, 1)] == pytest.approx(0.25)
        assert trajectories[(-1, -1, -1)] == pytest.approx(0.75)
        assert trajectories[(1, -1, 1)] == 0.0


# --- Invasive readout ---

class TestInvasiveK:
    def test_zero_kick_is_bitwise_non_invasive(self, rng):
        for p_flip, prob_up in rng.uniform(0, 1, size=(200, 2)):
            model = TelegraphModel(p_flip, prob_up, invasive_kick=0.0)
            assert invasive_k(model) == enumerate_k(model)

    def test_certain_kick_on_frozen_dynamics(self):
        cs = invasive_k(TelegraphModel(0.0, 0.5, invasive_kick=1.0))
        assert cs.k == pytest.approx(-1.0, abs=1e-12)
        assert (cs.c12, cs.c23, cs.c13) == pytest.approx((-1.0, -1.0, -1.0), abs=1e-12)

    def test_clumsy_readout_can_violate(self):
        grid = np.linspace(0, 1, 21)
        best = max(invasive_k(TelegraphModel(p, 0.5, kick)).k for p in grid for kick in grid)
        assert best > 1
        assert invasive_k(TelegraphModel(1.0, 0.5, invasive_kick=1.0)).k == pytest.approx(3.0, abs=1e-12)


# --- Angle-matched model ---

class TestAngleMatchedModel:
    def test_flip_probability_matches_quantum_transition(self):
        assert telegraph_from_theta(math.pi / 6).p_flip_per_step == pytest.approx(0.25)

    def test_sweep_follows_classical_curve(self):
        grid = np.linspace(0, math.pi, 181)
        for theta, cs in sweep_classical(grid):
            q = math.cos(2 * theta)
            assert cs.k == pytest.approx(2 * q - q * q, abs=1e-12)
            assert cs.k <= 1 + 1e-12


# --- Blindfolded coin ---

class TestCoin:
    def test_single_flip(self):
        [(before, operation, after)] = coin_demo(1)
        assert operation == "flip"
        assert after.face == -before.face
        assert after.observer_distribution == before.observer_distribution == (0.5, 0.5)

    def test_two_flips_restore_face(self):
        steps = coin_demo(2)
        assert steps[-1][2].face == steps[0][0].face

    def test_observer_never_learns(self):
        steps = coin_demo(100)
        assert len(steps) == 100
        for before, _, after in steps:
            assert after.face != before.face
            assert after.observer_distribution == (0.5, 0.5)

    def test_flip_relabels_a_biased_observer(self):
        world = CoinWorld(face=1, observer_distribution=(0.9, 0.1))
        assert flip_coin(world).observer_distribution == (0.1, 0.9)

    def test_rejects_no_steps(self):
        with pytest.raises(ModelError):
            coin_demo(0)

    @pytest.mark.parametrize("face, observer", [(0, (0.5, 0.5)), (1, (0.7, 0.7)), (-1, (-0.1, 1.1))])
    def test_rejects_invalid_worlds(self, face, observer):
        with pytest.raises(ModelError):
            CoinWorld(face, observer)
