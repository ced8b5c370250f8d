import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from idrefine.engine import Engine, compile_network
from idrefine.fixtures import constant_utility, mini_weather
from idrefine.generate import GeneratorSpec, gen_random_id, gen_two_stage
from idrefine.oracle import (StateSpaceCapError, oracle_optimal,
                             oracle_optimal_multistage, state_action_values)

TOL = 1e-9


class TestSingleDecision:
    def test_mini_weather_by_hand(self):
        # hand enumeration of the 8-cell joint:
        #   EU(take|sunny)=560/23, EU(leave|sunny)=2100/23
        #   EU(take|rainy)=1820/31, EU(leave|rainy)=700/31
        # P(sunny)=0.69 -> value 0.69*2100/23 + 0.31*1820/31 = 81.2
        result = oracle_optimal(mini_weather())
        assert result.table == {("sunny",): "leave", ("rainy",): "take"}
        assert result.value == pytest.approx(0.812, abs=TOL)
        assert result.raw_value == pytest.approx(81.2, abs=TOL)
        assert result.state_probs[("sunny",)] == pytest.approx(0.69, abs=TOL)
        assert result.per_state[("sunny",)] == pytest.approx(21 / 23, abs=TOL)

    def test_value_matches_per_state_identity(self):
        result = oracle_optimal(mini_weather())
        mixed = sum(result.state_probs[s] * result.per_state[s] for s in result.table)
        assert mixed == pytest.approx(result.value, abs=TOL)

    def test_degenerate_all_first_action(self):
        result = oracle_optimal(constant_utility())
        assert set(result.table.values()) == {"take"}
        assert result.value == pytest.approx(0.5)

    @given(seed=st.integers(0, 2_000), n=st.integers(2, 4))
    def test_dominates_random_tables(self, seed, n):
        diagram = gen_random_id(GeneratorSpec(n=n, seed=seed))
        preds, num, den = state_action_values(diagram, "d")
        result = oracle_optimal(diagram, "d")
        rng = np.random.default_rng(seed)
        n_states, n_actions = num.shape
        picks = rng.integers(n_actions, size=(1000, n_states))
        values = num[np.arange(n_states), picks].sum(axis=1)
        assert (result.raw_value >= values - TOL).all()

    def test_cap(self):
        diagram = gen_random_id(GeneratorSpec(n=8, seed=0))
        with pytest.raises(StateSpaceCapError):
            oracle_optimal(diagram, "d", cap=100)

    def test_counters_untouched(self):
        diagram = mini_weather()
        engine = Engine(compile_network(diagram))
        oracle_optimal(diagram)
        assert engine.counter.snapshot() == (0, 0)


class TestMultistage:
    def test_single_decision_agrees_with_plain_oracle(self):
        diagram = mini_weather()
        multi = oracle_optimal_multistage(diagram)
        single = oracle_optimal(diagram)
        assert multi.value == pytest.approx(single.value, abs=TOL)
        assert multi.tables["D"] == single.table

    @given(seed=st.integers(0, 2_000))
    def test_beats_uniform_random_play(self, seed):
        diagram = gen_two_stage(seed)
        result = oracle_optimal_multistage(diagram)
        # value of acting uniformly at random is the plain network mean
        eng = Engine(compile_network(diagram))
        assert result.value >= eng.network_value() - TOL

    def test_cap(self):
        with pytest.raises(StateSpaceCapError):
            oracle_optimal_multistage(gen_two_stage(0), cap=4)
