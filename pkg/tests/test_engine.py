import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import (enum_best_action, enum_posterior, enum_probability,
                     normalized)
from idrefine.diagram import DiagramError
from idrefine.engine import (Engine, ZeroProbabilityError, compile_network)
from idrefine.fixtures import (constant_utility, deterministic_exclusion,
                               mini_weather)
from idrefine.generate import GeneratorSpec, gen_random_id, gen_two_stage

TOL = 1e-9


@pytest.fixture
def mini_engine():
    return Engine(compile_network(mini_weather()))


class TestCompile:
    def test_mini_weather_normalization(self, mini_engine):
        net = mini_engine.network
        assert (net.u_min, net.u_max) == (0.0, 100.0)
        assert not net.degenerate
        assert set(net.outcomes) == {"W", "R", "D", "V"}
        assert net.outcomes["V"] == ("false", "true")

    def test_value_given_action(self, mini_engine):
        # brute force: EU(leave) = 0.7 * 100 = 70, normalized 0.70
        assert mini_engine.action_value("D", "leave", {}) == pytest.approx(0.70, abs=TOL)

    def test_degenerate_flag(self):
        net = compile_network(constant_utility())
        assert net.degenerate

    def test_uncompiled_decisions_are_uniform_roots(self, mini_engine):
        dist = mini_engine.posterior("D", {})
        assert dist == {"take": pytest.approx(0.5), "leave": pytest.approx(0.5)}

    def test_fixed_policies_must_be_suffix(self):
        d = gen_two_stage(0)
        from idrefine.engine import PolicyCpt
        table = np.zeros((2,))
        table[0] = 1.0
        with pytest.raises(ValueError, match="suffix"):
            compile_network(d, {"d1": PolicyCpt((), table)})


class TestBestAction:
    def test_empty_context(self, mini_engine):
        assert mini_engine.best_action("D", {}) == ("leave", pytest.approx(0.70, abs=TOL))

    def test_rainy(self, mini_engine):
        action, value = mini_engine.best_action("D", {"R": "rainy"})
        assert action == "take"
        assert value == pytest.approx(1820 / 3100, abs=TOL)

    def test_sunny(self, mini_engine):
        action, value = mini_engine.best_action("D", {"R": "sunny"})
        assert action == "leave"
        assert value == pytest.approx(2100 / 2300, abs=TOL)

    def test_tie_breaks_by_declaration_order(self):
        eng = Engine(compile_network(constant_utility()))
        action, value = eng.best_action("D", {})
        assert action == "take"
        assert value == pytest.approx(0.5)

    def test_zero_probability_context(self):
        eng = Engine(compile_network(deterministic_exclusion()))
        with pytest.raises(ZeroProbabilityError):
            eng.best_action("D", {"A": "a0", "B": "b1"})

    def test_unknown_variable(self, mini_engine):
        with pytest.raises(DiagramError):
            mini_engine.best_action("D", {"Q": "x"})


class TestPosteriors:
    def test_report_prior(self, mini_engine):
        assert mini_engine.posterior("R", {}) == {
            "sunny": pytest.approx(0.69, abs=TOL),
            "rainy": pytest.approx(0.31, abs=TOL)}

    def test_weather_given_sunny(self, mini_engine):
        dist = mini_engine.posterior("W", {"R": "sunny"})
        assert dist["sun"] == pytest.approx(21 / 23, abs=TOL)
        assert dist["rain"] == pytest.approx(2 / 23, abs=TOL)

    def test_batched_single_pass(self, mini_engine):
        before = mini_engine.counter.snapshot()
        out = mini_engine.posteriors(["W", "R"], {})
        fine, passes = (mini_engine.counter.fine - before[0],
                        mini_engine.counter.passes - before[1])
        assert passes == 1
        assert fine == 4
        assert set(out) == {"W", "R"}

    def test_assigned_variable_rejected(self, mini_engine):
        with pytest.raises(ValueError):
            mini_engine.posterior("R", {"R": "sunny"})

    def test_zero_probability_evidence(self):
        eng = Engine(compile_network(deterministic_exclusion()))
        with pytest.raises(ZeroProbabilityError):
            eng.posterior("C", {"A": "a0", "B": "b1"})


class TestContextProbability:
    def test_sunny(self, mini_engine):
        assert mini_engine.context_probability({"R": "sunny"}) == pytest.approx(0.69, abs=TOL)

    def test_empty(self, mini_engine):
        assert mini_engine.context_probability({}) == pytest.approx(1.0, abs=TOL)

    def test_impossible_returns_zero(self):
        eng = Engine(compile_network(deterministic_exclusion()))
        assert eng.context_probability({"A": "a0", "B": "b1"}) == 0.0

    def test_uncounted(self, mini_engine):
        before = mini_engine.counter.snapshot()
        mini_engine.context_probability({"R": "sunny"})
        assert mini_engine.counter.snapshot() == before


class TestCounterDiscipline:
    def test_best_action(self, mini_engine):
        mini_engine.best_action("D", {})
        assert mini_engine.counter.snapshot() == (4, 2)

    def test_posterior(self, mini_engine):
        mini_engine.posterior("R", {})
        assert mini_engine.counter.snapshot() == (2, 1)

    def test_action_value(self, mini_engine):
        mini_engine.action_value("D", "take", {})
        assert mini_engine.counter.snapshot() == (2, 1)

    def test_calibration_reads_are_lookups(self, mini_engine):
        cal = mini_engine.calibrate({})
        assert mini_engine.counter.snapshot() == (0, 1)
        cal.posterior("R")
        cal.posterior("W")
        cal.probability()
        assert mini_engine.counter.snapshot() == (0, 1)

    def test_candidate_evaluation(self, mini_engine):
        cal = mini_engine.calibrate({})
        cal.evaluate_candidate("D", "R")
        assert mini_engine.counter.snapshot() == (4, 3)

    def test_reset(self, mini_engine):
        mini_engine.best_action("D", {})
        mini_engine.counter.reset()
        assert mini_engine.counter.snapshot() == (0, 0)


class TestCandidateEvaluation:
    def test_matches_per_child_queries(self, mini_engine):
        cal = mini_engine.calibrate({})
        ev = cal.evaluate_candidate("D", "R")
        assert ev.outcomes == ("sunny", "rainy")
        assert ev.actions == ("leave", "take")
        assert ev.probs[0] == pytest.approx(0.69, abs=TOL)
        assert ev.values[0] == pytest.approx(2100 / 2300, abs=TOL)
        assert ev.values[1] == pytest.approx(1820 / 3100, abs=TOL)

    def test_impossible_child_gets_zero_prob(self):
        eng = Engine(compile_network(deterministic_exclusion()))
        cal = eng.calibrate({"A": "a0"})
        ev = cal.evaluate_candidate("D", "B")
        assert ev.probs[1] == 0.0
        assert ev.values[1] == 0.0


class TestExactness:
    @given(seed=st.integers(0, 10_000))
    def test_queries_match_enumeration(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 6))
        diagram = gen_random_id(GeneratorSpec(n=n, seed=seed))
        eng = Engine(compile_network(diagram))
        preds = [v.name for v in diagram.predecessors("d")]
        k = int(rng.integers(0, n))
        chosen = list(rng.choice(preds, size=k, replace=False))
        evidence = {c: diagram.variable(c).outcomes[int(rng.integers(2))] for c in chosen}

        assert eng.context_probability(evidence) == pytest.approx(
            enum_probability(diagram, evidence), abs=TOL)
        query = next(p for p in preds if p not in evidence)
        assert eng.posterior(query, evidence) == pytest.approx(
            enum_posterior(diagram, query, evidence), abs=TOL)
        action, value = eng.best_action("d", evidence)
        ref_action, ref_raw = enum_best_action(diagram, "d", evidence)
        assert action == ref_action
        assert value == pytest.approx(normalized(diagram, ref_raw), abs=TOL)

    @given(seed=st.integers(0, 10_000))
    def test_two_stage_queries_match_enumeration(self, seed):
        diagram = gen_two_stage(seed)
        eng = Engine(compile_network(diagram))
        evidence = {"d1": "go"} if seed % 2 else {"m": "y"}
        assert eng.context_probability(evidence) == pytest.approx(
            enum_probability(diagram, evidence), abs=TOL)
        assert eng.posterior("c1", evidence) == pytest.approx(
            enum_posterior(diagram, "c1", evidence), abs=TOL)


class TestLawOfTotalExpectation:
    @given(seed=st.integers(0, 10_000))
    def test_value_decomposes_over_posterior(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 5))
        diagram = gen_random_id(GeneratorSpec(n=n, seed=seed))
        eng = Engine(compile_network(diagram))
        preds = [v.name for v in diagram.predecessors("d")]
        x = preds[int(rng.integers(n))]
        rest = [p for p in preds if p != x]
        evidence = {}
        if rest and rng.integers(2):
            c = rest[int(rng.integers(len(rest)))]
            evidence[c] = diagram.variable(c).outcomes[int(rng.integers(2))]
        action = diagram.variable("d").outcomes[int(rng.integers(2))]

        direct = eng.action_value("d", action, evidence)
        posterior = eng.posterior(x, evidence)
        mixed = sum(
            posterior[o] * eng.action_value("d", action, {**evidence, x: o})
            for o in diagram.variable(x).outcomes)
        assert mixed == pytest.approx(direct, abs=TOL)


class TestArgmaxEquivalence:
    @given(seed=st.integers(0, 2_000))
    def test_action_posterior_matches_value_argmax(self, seed):
        diagram = gen_random_id(GeneratorSpec(n=3, seed=seed))
        eng = Engine(compile_network(diagram))
        evidence = {"c1": "v0"} if seed % 2 else {}
        chosen, _ = eng.best_action("d", evidence)
        by_value = max(
            diagram.variable("d").outcomes,
            key=lambda a: eng.action_value("d", a, evidence))
        assert chosen == by_value


class TestDenormalization:
    @given(seed=st.integers(0, 5_000), v=st.floats(0, 1))
    def test_roundtrip_identity(self, seed, v):
        net = compile_network(gen_random_id(GeneratorSpec(n=2, seed=seed)))
        raw = net.denormalize(v)
        assert raw == pytest.approx(v * (net.u_max - net.u_min) + net.u_min, abs=TOL)

    def test_mini_weather_raw(self, mini_engine):
        assert mini_engine.denormalize(0.812) == pytest.approx(81.2, abs=TOL)
