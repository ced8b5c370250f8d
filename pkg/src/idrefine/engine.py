"""Exact inference over the compiled chance-only network.

An influence diagram is compiled into a network of chance variables only:
decisions not yet fixed by a policy become uniform root variables, fixed
decisions keep their contingency tables, and the value node becomes a
binary proxy variable whose true-probability is the utility normalized to
[0, 1].  Queries are answered exactly by variable elimination.

Query costs are tracked by two counters with join-tree semantics,
independent of the elimination backend:

* ``passes`` counts evidence-conditioned propagation passes (one per
  calibration of a context, two per action/value query pair);
* ``fine`` counts extracted posterior/value numbers; reads from an
  existing calibration are lookups and cost nothing.

A ChanceNetwork is immutable; per-run query state (counters) lives in an
Engine, which is single-owner.  Distinct engines over one network may run
concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .diagram import ChanceNode, DecisionNode, DiagramError, InfluenceDiagram, ValueNode

ZERO_PROB = 1e-12


class ZeroProbabilityError(ValueError):
    """Evidence describes a logically impossible context (probability zero)."""


@dataclass
class QueryCounter:
    """Monotone query-cost counters; reset only explicitly."""

    fine: int = 0
    passes: int = 0

    def snapshot(self) -> tuple[int, int]:
        return (self.fine, self.passes)

    def reset(self) -> None:
        self.fine = 0
        self.passes = 0


@dataclass(frozen=True)
class PolicyCpt:
    """A decision function encoded as a CPT over (parents..., decision)."""

    parents: tuple[str, ...]
    table: np.ndarray  # axes (*parents, decision outcome)


class _Factor(NamedTuple):
    vars: tuple[str, ...]  # always sorted by network variable index
    values: np.ndarray


def _canonical(vars_: tuple[str, ...], values: np.ndarray, index: dict[str, int]) -> _Factor:
    order = sorted(range(len(vars_)), key=lambda i: index[vars_[i]])
    if order != list(range(len(vars_))):
        values = np.transpose(values, order)
        vars_ = tuple(vars_[i] for i in order)
    return _Factor(vars_, values)


def _restrict(f: _Factor, evidence: Mapping[str, int]) -> _Factor:
    if not any(v in evidence for v in f.vars):
        return f
    slicer = tuple(evidence.get(v, slice(None)) for v in f.vars)
    return _Factor(tuple(v for v in f.vars if v not in evidence), f.values[slicer])


def _product(factors: list[_Factor], index: dict[str, int], doms: dict[str, int]) -> _Factor:
    union = sorted({v for f in factors for v in f.vars}, key=index.__getitem__)
    out = None
    for f in factors:
        members = set(f.vars)
        shape = tuple(doms[v] if v in members else 1 for v in union)
        arr = f.values.reshape(shape)
        out = arr if out is None else out * arr
    return _Factor(tuple(union), out)


def _query(factors: Iterable[_Factor], evidence: Mapping[str, int],
           targets: tuple[str, ...], index: dict[str, int],
           doms: dict[str, int]) -> np.ndarray:
    """Unnormalized joint P(targets, evidence), axes in target order."""
    work = [_restrict(f, evidence) for f in factors]
    target_set = set(targets)
    hidden = sorted({v for f in work for v in f.vars} - target_set, key=index.__getitem__)
    while hidden:
        best_var, best_key = None, None
        for v in hidden:
            scope: set[str] = set()
            for f in work:
                if v in f.vars:
                    scope.update(f.vars)
            key = (math.prod(doms[u] for u in scope if u != v), index[v])
            if best_key is None or key < best_key:
                best_var, best_key = v, key
        hidden.remove(best_var)
        related = [f for f in work if best_var in f.vars]
        work = [f for f in work if best_var not in f.vars]
        merged = _product(related, index, doms)
        axis = merged.vars.index(best_var)
        work.append(_Factor(merged.vars[:axis] + merged.vars[axis + 1:],
                            merged.values.sum(axis=axis)))
    result = _product(work, index, doms)
    if not targets:
        return result.values
    perm = [result.vars.index(t) for t in targets]
    return np.transpose(result.values, perm)


class ChanceNetwork:
    """Compiled chance-only model: one factor per variable, plus metadata.

    Immutable after construction.
    """

    def __init__(self, diagram: InfluenceDiagram, fixed_policies: dict[str, PolicyCpt],
                 outcomes: dict[str, tuple[str, ...]], index: dict[str, int],
                 factors: dict[str, _Factor], proxy: str,
                 u_min: float, u_max: float):
        self.diagram = diagram
        self.fixed_policies = fixed_policies
        self.outcomes = outcomes
        self.index = index
        self.factors = factors
        self.proxy = proxy
        self.u_min = u_min
        self.u_max = u_max

    @property
    def degenerate(self) -> bool:
        """True when the utility is constant; any policy is then optimal."""
        return self.u_max == self.u_min

    @property
    def compiled(self) -> frozenset[str]:
        return frozenset(self.fixed_policies)

    def arity(self, name: str) -> int:
        return len(self.outcomes[name])

    @property
    def doms(self) -> dict[str, int]:
        return {v: len(o) for v, o in self.outcomes.items()}

    def denormalize(self, value: float) -> float:
        return value * (self.u_max - self.u_min) + self.u_min


def compile_network(diagram: InfluenceDiagram,
                    fixed_policies: Mapping[str, PolicyCpt] | None = None) -> ChanceNetwork:
    """Compile a diagram, optionally fixing a trailing run of decisions.

    Unfixed decisions become uniform roots; fixed decisions get their
    contingency table as a CPT over the predecessors they actually use.
    The value node becomes a binary proxy with P(true) the utility scaled
    to [0, 1]; a constant utility yields a degenerate network (flagged,
    not an error) with P(true) = 0.5 everywhere.
    """
    fixed = dict(fixed_policies or {})
    order = diagram.decision_order
    suffix = order[len(order) - len(fixed):]
    if set(suffix) != set(fixed):
        raise ValueError("fixed policies must cover a suffix of the decision order")

    value = diagram.value_node
    proxy = value.name
    names = [n for n in diagram.nodes if n != proxy] + [proxy]
    index = {n: i for i, n in enumerate(names)}
    outcomes: dict[str, tuple[str, ...]] = {}
    for n, node in diagram.nodes.items():
        if not isinstance(node, ValueNode):
            outcomes[n] = node.variable.outcomes
    outcomes[proxy] = ("false", "true")
    doms = {v: len(o) for v, o in outcomes.items()}

    u = value.utility
    u_min, u_max = float(u.min()), float(u.max())
    if u_max == u_min:
        p_true = np.full(u.shape, 0.5)
    else:
        p_true = (u - u_min) / (u_max - u_min)

    factors: dict[str, _Factor] = {}
    for n, node in diagram.nodes.items():
        if isinstance(node, ChanceNode):
            factors[n] = _canonical(node.parents + (n,), node.cpt, index)
        elif isinstance(node, DecisionNode):
            if n in fixed:
                pol = fixed[n]
                expected = tuple(doms[p] for p in pol.parents) + (doms[n],)
                if pol.table.shape != expected:
                    raise ValueError(f"contingency table for {n!r} has shape "
                                     f"{pol.table.shape}, expected {expected}")
                factors[n] = _canonical(pol.parents + (n,), pol.table, index)
            else:
                factors[n] = _Factor((n,), np.full(doms[n], 1.0 / doms[n]))
        else:
            vals = np.stack([1.0 - p_true, p_true], axis=-1)
            factors[n] = _canonical(node.parents + (proxy,), vals, index)

    return ChanceNetwork(diagram, fixed, outcomes, index, factors, proxy, u_min, u_max)


@dataclass(frozen=True)
class CandidateEvaluation:
    """Per-child results of exploring one extension variable in a context."""

    variable: str
    outcomes: tuple[str, ...]
    probs: np.ndarray    # P(outcome | context)
    actions: tuple[str, ...]  # maximizing action per outcome
    values: np.ndarray   # normalized value of that action per outcome


class Engine:
    """Query session over a ChanceNetwork, with its own counters."""

    def __init__(self, network: ChanceNetwork):
        self.network = network
        self.counter = QueryCounter()

    # -- helpers ---------------------------------------------------------

    def _evidence_idx(self, evidence: Mapping[str, str]) -> dict[str, int]:
        net = self.network
        out: dict[str, int] = {}
        for var, outcome in evidence.items():
            if var not in net.outcomes or var == net.proxy:
                raise DiagramError(f"unknown variable {var!r} in evidence")
            try:
                out[var] = net.outcomes[var].index(outcome)
            except ValueError:
                raise DiagramError(f"variable {var!r} has no outcome {outcome!r}") from None
        return out

    def _check_decision(self, decision: str) -> None:
        node = self.network.diagram.node(decision)
        if not isinstance(node, DecisionNode):
            raise DiagramError(f"{decision!r} is not a decision node")
        if decision in self.network.compiled:
            raise ValueError(f"decision {decision!r} is already fixed in this network")

    # -- counted query operations ----------------------------------------

    def best_action(self, decision: str, evidence: Mapping[str, str]) -> tuple[str, float]:
        """Maximizing action and its normalized value in the given context.

        Ties break by action declaration order.  Costs two passes: one
        action-selection pass, one value pass.
        """
        net = self.network
        self._check_decision(decision)
        ev = self._evidence_idx(evidence)
        if decision in ev:
            raise ValueError(f"evidence must not assign the decision {decision!r}")
        self.counter.passes += 2
        self.counter.fine += 2 * net.arity(decision)
        joint = _query(net.factors.values(), ev, (decision, net.proxy), net.index, net.doms)
        if float(joint.sum()) < ZERO_PROB:
            raise ZeroProbabilityError(f"context has probability zero: {dict(evidence)!r}")
        a_idx = int(np.argmax(joint[:, 1]))
        ev2 = dict(ev)
        ev2[decision] = a_idx
        vjoint = _query(net.factors.values(), ev2, (net.proxy,), net.index, net.doms)
        total = float(vjoint.sum())
        value = float(vjoint[1] / total) if total > 0.0 else 0.0
        return net.outcomes[decision][a_idx], value

    def action_value(self, decision: str, action: str, evidence: Mapping[str, str]) -> float:
        """Normalized expected value of one fixed action in a context (one pass)."""
        net = self.network
        self._check_decision(decision)
        ev = self._evidence_idx(evidence)
        ev[decision] = net.outcomes[decision].index(action)
        self.counter.passes += 1
        self.counter.fine += net.arity(decision)
        vjoint = _query(net.factors.values(), ev, (net.proxy,), net.index, net.doms)
        total = float(vjoint.sum())
        if total < ZERO_PROB:
            raise ZeroProbabilityError(f"context has probability zero: {dict(evidence)!r}")
        return float(vjoint[1] / total)

    def posterior(self, variable: str, evidence: Mapping[str, str]) -> dict[str, float]:
        """Exact P(variable | evidence) as an outcome-keyed mapping."""
        return self.posteriors([variable], evidence)[variable]

    def posteriors(self, variables: Iterable[str],
                   evidence: Mapping[str, str]) -> dict[str, dict[str, float]]:
        """Posteriors for several variables under one context (a single pass)."""
        net = self.network
        cal = self.calibrate(evidence)
        out: dict[str, dict[str, float]] = {}
        for var in variables:
            dist = cal.posterior(var)
            self.counter.fine += net.arity(var)
            out[var] = dict(zip(net.outcomes[var], dist.tolist()))
        return out

    def calibrate(self, evidence: Mapping[str, str]) -> "Calibration":
        """Enter a context as findings (one pass); posteriors become lookups."""
        self.counter.passes += 1
        return Calibration(self, self._evidence_idx(evidence))

    # -- uncounted diagnostics -------------------------------------------

    def context_probability(self, evidence: Mapping[str, str]) -> float:
        """Exact P(evidence); 0 for impossible contexts, never an error."""
        net = self.network
        ev = self._evidence_idx(evidence)
        return float(_query(net.factors.values(), ev, (), net.index, net.doms))

    def network_value(self) -> float:
        """Normalized expected value of the network as compiled, P(proxy true)."""
        net = self.network
        joint = _query(net.factors.values(), {}, (net.proxy,), net.index, net.doms)
        return float(joint[1] / joint.sum())

    def denormalize(self, value: float) -> float:
        return self.network.denormalize(value)


class Calibration:
    """A context entered as findings; queries against it are lookups.

    Created through Engine.calibrate (which counts the pass).
    """

    def __init__(self, engine: Engine, evidence_idx: dict[str, int]):
        self._engine = engine
        self._evidence = evidence_idx
        net = engine.network
        self._factors = {name: _restrict(f, evidence_idx) for name, f in net.factors.items()}
        self._posteriors: dict[str, np.ndarray] = {}
        self._prob: float | None = None

    @property
    def evidence_idx(self) -> dict[str, int]:
        return dict(self._evidence)

    def probability(self) -> float:
        """P(context); computed lazily once."""
        if self._prob is None:
            net = self._engine.network
            self._prob = float(_query(self._factors.values(), {}, (), net.index, net.doms))
        return self._prob

    def posterior(self, variable: str) -> np.ndarray:
        """P(variable | context) over declared outcomes."""
        net = self._engine.network
        if variable in self._evidence:
            raise ValueError(f"{variable!r} is assigned in the context")
        if variable not in self._posteriors:
            if self.probability() < ZERO_PROB:
                raise ZeroProbabilityError("context has probability zero")
            joint = _query(self._factors.values(), {}, (variable,), net.index, net.doms)
            self._posteriors[variable] = joint / joint.sum()
        return self._posteriors[variable]

    def evaluate_candidate(self, decision: str, variable: str) -> CandidateEvaluation:
        """Best action and value for every outcome of one extension variable.

        Two passes: an action-selection pass over the joint of decision and
        variable given the proxy, and a value pass with the decision acting
        by the selected per-outcome actions.
        """
        eng = self._engine
        net = eng.network
        eng._check_decision(decision)
        if variable in self._evidence or variable == decision:
            raise ValueError(f"{variable!r} is not a possible extension here")
        eng.counter.passes += 2
        eng.counter.fine += 2 * net.arity(variable)
        if self.probability() < ZERO_PROB:
            raise ZeroProbabilityError("context has probability zero")

        joint = _query(self._factors.values(), {net.proxy: 1}, (decision, variable),
                       net.index, net.doms)
        action_idx = np.argmax(joint, axis=0)

        one_hot = np.zeros((net.arity(variable), net.arity(decision)))
        one_hot[np.arange(len(action_idx)), action_idx] = 1.0
        policy = _canonical((variable, decision), one_hot, net.index)
        swapped = dict(self._factors)
        swapped[decision] = policy
        vjoint = _query(swapped.values(), {}, (net.proxy, variable), net.index, net.doms)
        totals = vjoint.sum(axis=0)
        probs = totals / self.probability()
        safe = np.where(totals > 0.0, totals, 1.0)
        values = np.where(totals > 0.0, vjoint[1] / safe, 0.0)
        actions = tuple(net.outcomes[decision][i] for i in action_idx)
        return CandidateEvaluation(variable, net.outcomes[variable], probs, actions, values)
