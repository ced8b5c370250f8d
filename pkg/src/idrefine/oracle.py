"""Brute-force ground truth by raw joint enumeration.

These oracles never touch the inference engine: probabilities come
straight from the diagram's tables, summed over the full joint in a fixed
lexicographic order, so results are bit-reproducible for a given diagram.
They are the independent reference that the engine and the refinement
algorithms are tested against.

Decisions other than the queried one are treated as uniform, matching how
an unfixed decision enters the compiled network.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .diagram import ChanceNode, DecisionNode, DiagramError, InfluenceDiagram, ValueNode

DEFAULT_CAP = 1 << 20


class StateSpaceCapError(ValueError):
    """Joint enumeration would exceed the configured size cap."""


@dataclass(eq=False)
class OracleResult:
    decision: str
    predecessors: tuple[str, ...]
    # information state (outcome labels, predecessor order) -> optimal action
    table: dict[tuple[str, ...], str]
    # per-state normalized value of the best action (0.0 for impossible states)
    per_state: dict[tuple[str, ...], float]
    state_probs: dict[tuple[str, ...], float]
    value: float       # normalized optimal expected value
    raw_value: float


@dataclass(eq=False)
class MultistageOracleResult:
    tables: dict[str, dict[tuple[str, ...], str]]
    value: float
    raw_value: float


def _layout(diagram: InfluenceDiagram, cap: int):
    names = [n for n, nd in diagram.nodes.items() if not isinstance(nd, ValueNode)]
    doms = [diagram.variable(n).arity for n in names]
    if math.prod(doms) > cap:
        raise StateSpaceCapError(
            f"joint state space {math.prod(doms)} exceeds cap {cap}")
    pos = {n: i for i, n in enumerate(names)}
    value = diagram.value_node
    return names, doms, pos, value


def _chance_weight(diagram, pos, config) -> float:
    p = 1.0
    for name, node in diagram.nodes.items():
        if isinstance(node, ChanceNode):
            idx = tuple(config[pos[q]] for q in node.parents) + (config[pos[name]],)
            p *= float(node.cpt[idx])
            if p == 0.0:
                return 0.0
    return p


def _utility(value_node, pos, config) -> float:
    idx = tuple(config[pos[q]] for q in value_node.parents)
    return float(value_node.utility[idx])


def state_action_values(diagram: InfluenceDiagram, decision: str,
                        cap: int = DEFAULT_CAP):
    """Raw E[u | state, action] and state probabilities by enumeration.

    Every decision other than the queried one is weighted uniformly.
    Returns (predecessor variables, num, den) where num/den are arrays of
    shape (#states, #actions): den[w, a] is P(state w, uniform others) and
    num[w, a] the corresponding utility mass.
    """
    node = diagram.node(decision)
    if not isinstance(node, DecisionNode):
        raise DiagramError(f"{decision!r} is not a decision node")
    names, doms, pos, value_node = _layout(diagram, cap)

    preds = diagram.predecessors(decision)
    pred_pos = [pos[v.name] for v in preds]
    pred_doms = [v.arity for v in preds]
    n_states = math.prod(pred_doms)
    n_actions = diagram.variable(decision).arity
    d_pos = pos[decision]

    others = [n for n in names if n != decision
              and isinstance(diagram.nodes[n], DecisionNode)]
    uniform = math.prod(1.0 / diagram.variable(n).arity for n in others)

    num = np.zeros((n_states, n_actions))
    den = np.zeros((n_states, n_actions))
    for config in product(*(range(d) for d in doms)):
        p = _chance_weight(diagram, pos, config)
        if p == 0.0:
            continue
        p *= uniform
        w = 0
        for i, dom in zip(pred_pos, pred_doms):
            w = w * dom + config[i]
        a = config[d_pos]
        den[w, a] += p
        num[w, a] += p * _utility(value_node, pos, config)
    return preds, num, den


def oracle_optimal(diagram: InfluenceDiagram, decision: str | None = None,
                   cap: int = DEFAULT_CAP) -> OracleResult:
    """Exact optimal tabular decision function for one decision.

    Ties break by action declaration order; impossible states get the
    first action and a zero value contribution.
    """
    if decision is None:
        decisions = diagram.decisions
        if len(decisions) != 1:
            raise DiagramError("decision must be named for a multi-decision diagram")
        decision = decisions[0]
    preds, num, den = state_action_values(diagram, decision, cap)
    actions = diagram.variable(decision).outcomes
    u = diagram.value_node.utility
    u_min, u_max = float(u.min()), float(u.max())
    span = u_max - u_min

    table: dict[tuple[str, ...], str] = {}
    per_state: dict[tuple[str, ...], float] = {}
    state_probs: dict[tuple[str, ...], float] = {}
    raw_total = 0.0
    prob_total = 0.0
    state_labels = list(product(*(v.outcomes for v in preds)))
    for w, labels in enumerate(state_labels):
        best_a, best_eu = 0, None
        for a in range(len(actions)):
            if den[w, a] <= 0.0:
                continue
            eu = num[w, a] / den[w, a]
            if best_eu is None or eu > best_eu:
                best_a, best_eu = a, eu
        table[labels] = actions[best_a]
        if best_eu is None:  # impossible state
            per_state[labels] = 0.0
            state_probs[labels] = 0.0
            continue
        # den already marginalizes everything but the fixed own action, so
        # for a state over non-descendants it equals P(state) directly
        p_state = float(den[w, best_a])
        state_probs[labels] = p_state
        per_state[labels] = 0.5 if span == 0.0 else (best_eu - u_min) / span
        raw_total += p_state * best_eu
        prob_total += p_state

    if span == 0.0:
        value = 0.5
        raw_value = u_min
    else:
        raw_value = raw_total
        value = (raw_value - u_min * prob_total) / span
    return OracleResult(decision, tuple(v.name for v in preds), table,
                        per_state, state_probs, value, raw_value)


def oracle_optimal_multistage(diagram: InfluenceDiagram,
                              cap: int = DEFAULT_CAP) -> MultistageOracleResult:
    """Exhaustive backward induction over full information states.

    Processes decisions last to first; while computing a decision, later
    decisions act by their already-computed tables and earlier ones are
    weighted uniformly (they may still appear in the conditioning state).
    """
    names, doms, pos, value_node = _layout(diagram, cap)
    order = diagram.decision_order
    if not order:
        raise DiagramError("diagram has no decision node")

    pred_info = {}
    for d in order:
        preds = diagram.predecessors(d)
        pred_info[d] = ([pos[v.name] for v in preds], [v.arity for v in preds], preds)

    def policy_index(d, config, tables_idx):
        ppos, pdoms, _ = pred_info[d]
        w = 0
        for i, dom in zip(ppos, pdoms):
            w = w * dom + config[i]
        return tables_idx[d][w]

    tables_idx: dict[str, list[int]] = {}
    for k in range(len(order) - 1, -1, -1):
        d = order[k]
        ppos, pdoms, _ = pred_info[d]
        n_states = math.prod(pdoms)
        n_actions = diagram.variable(d).arity
        d_pos = pos[d]
        earlier = order[:k]
        later = order[k + 1:]
        uniform = math.prod(1.0 / diagram.variable(e).arity for e in earlier)

        num = np.zeros((n_states, n_actions))
        den = np.zeros((n_states, n_actions))
        for config in product(*(range(x) for x in doms)):
            consistent = True
            for m in later:
                if config[pos[m]] != policy_index(m, config, tables_idx):
                    consistent = False
                    break
            if not consistent:
                continue
            p = _chance_weight(diagram, pos, config)
            if p == 0.0:
                continue
            p *= uniform
            w = 0
            for i, dom in zip(ppos, pdoms):
                w = w * dom + config[i]
            a = config[d_pos]
            den[w, a] += p
            num[w, a] += p * _utility(value_node, pos, config)

        chosen = []
        for w in range(n_states):
            best_a, best_eu = 0, None
            for a in range(n_actions):
                if den[w, a] <= 0.0:
                    continue
                eu = num[w, a] / den[w, a]
                if best_eu is None or eu > best_eu:
                    best_a, best_eu = a, eu
            chosen.append(best_a)
        tables_idx[d] = chosen

    raw_value = 0.0
    for config in product(*(range(x) for x in doms)):
        if any(config[pos[d]] != policy_index(d, config, tables_idx) for d in order):
            continue
        p = _chance_weight(diagram, pos, config)
        if p == 0.0:
            continue
        raw_value += p * _utility(value_node, pos, config)

    u = value_node.utility
    u_min, u_max = float(u.min()), float(u.max())
    span = u_max - u_min
    value = 0.5 if span == 0.0 else (raw_value - u_min) / span

    tables: dict[str, dict[tuple[str, ...], str]] = {}
    for d in order:
        _, _, preds = pred_info[d]
        actions = diagram.variable(d).outcomes
        rows = {}
        for w, labels in enumerate(product(*(v.outcomes for v in preds))):
            rows[labels] = actions[tables_idx[d][w]]
        tables[d] = rows
    return MultistageOracleResult(tables, value, raw_value)
