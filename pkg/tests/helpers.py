"""Independent brute-force reference computations for the test suite.

Everything here enumerates the raw joint straight from the diagram's
tables, bypassing the compiled network and the elimination engine, so the
engine is checked against a genuinely separate code path.
"""

from itertools import product

from idrefine.diagram import ChanceNode, DecisionNode, ValueNode


def _frame(diagram):
    names = [n for n, nd in diagram.nodes.items() if not isinstance(nd, ValueNode)]
    doms = [diagram.variable(n).arity for n in names]
    pos = {n: i for i, n in enumerate(names)}
    return names, doms, pos


def _weight(diagram, pos, config):
    """Joint weight of one configuration, decisions uniform."""
    p = 1.0
    for name, node in diagram.nodes.items():
        if isinstance(node, ChanceNode):
            idx = tuple(config[pos[q]] for q in node.parents) + (config[pos[name]],)
            p *= float(node.cpt[idx])
        elif isinstance(node, DecisionNode):
            p *= 1.0 / node.variable.arity
        if p == 0.0:
            return 0.0
    return p


def _consistent(diagram, pos, config, evidence):
    for var, outcome in evidence.items():
        if config[pos[var]] != diagram.variable(var).index_of(outcome):
            return False
    return True


def enum_probability(diagram, evidence):
    """P(evidence) with every decision uniform."""
    names, doms, pos = _frame(diagram)
    total = 0.0
    for config in product(*(range(d) for d in doms)):
        if _consistent(diagram, pos, config, evidence):
            total += _weight(diagram, pos, config)
    return total


def enum_posterior(diagram, variable, evidence):
    """P(variable | evidence) as an outcome-keyed dict, decisions uniform."""
    names, doms, pos = _frame(diagram)
    var = diagram.variable(variable)
    mass = [0.0] * var.arity
    for config in product(*(range(d) for d in doms)):
        if _consistent(diagram, pos, config, evidence):
            mass[config[pos[variable]]] += _weight(diagram, pos, config)
    total = sum(mass)
    return {o: m / total for o, m in zip(var.outcomes, mass)}


def enum_action_value(diagram, decision, action, evidence):
    """Raw E[u | evidence, decision=action], other decisions uniform."""
    names, doms, pos = _frame(diagram)
    value_node = diagram.value_node
    ev = dict(evidence)
    ev[decision] = action
    num = den = 0.0
    for config in product(*(range(d) for d in doms)):
        if not _consistent(diagram, pos, config, ev):
            continue
        p = _weight(diagram, pos, config)
        if p == 0.0:
            continue
        idx = tuple(config[pos[q]] for q in value_node.parents)
        num += p * float(value_node.utility[idx])
        den += p
    return num / den


def enum_best_action(diagram, decision, evidence):
    """(action, raw value) maximizing enum_action_value, declaration ties."""
    best = None
    for action in diagram.variable(decision).outcomes:
        v = enum_action_value(diagram, decision, action, evidence)
        if best is None or v > best[1]:
            best = (action, v)
    return best


def normalized(diagram, raw):
    u = diagram.value_node.utility
    lo, hi = float(u.min()), float(u.max())
    return (raw - lo) / (hi - lo)
