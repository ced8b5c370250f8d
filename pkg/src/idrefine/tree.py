"""Decision-tree policies and their incremental extension.

A tree for a decision maps every information state to an action: internal
vertices are labelled by observable predecessors, leaves by actions.  A
leaf's value is the normalized expected value of its action in its
context; the tree's value is the reach-probability-weighted sum over
leaves.  Extending a leaf on a variable replaces it with an internal
vertex whose children carry the maximizing action for each refined
context, which never decreases the tree value.

Leaves whose context has probability zero are marked pruned: they inherit
the parent leaf's action, contribute nothing to the value, and are never
extended.

Trees are single-owner mutable values; extension results are cached on
leaves so that a greedy exploration pays for queries once.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from typing import Iterator, Union

from .diagram import Variable
from .engine import Calibration, CandidateEvaluation, Engine, ZERO_PROB

Context = tuple[tuple[str, str], ...]


@dataclass(eq=False)
class Leaf:
    action: str
    value: float   # normalized expected value of action in this context
    reach: float   # probability of the context
    context: Context
    pruned: bool = False
    cache: dict[str, CandidateEvaluation] = field(default_factory=dict, repr=False)


@dataclass(eq=False)
class Internal:
    variable: str
    children: dict[str, "Vertex"]  # outcome label -> child, declaration order
    gain: float  # tree-value increase recorded when this vertex was created


Vertex = Union[Leaf, Internal]


@dataclass(eq=False)
class DecisionTree:
    decision: str
    actions: tuple[str, ...]
    predecessors: tuple[Variable, ...]
    u_min: float
    u_max: float
    root: Vertex

    def denormalize(self, value: float) -> float:
        return value * (self.u_max - self.u_min) + self.u_min


def init_tree(engine: Engine, decision: str) -> DecisionTree:
    """Single-leaf tree holding the best unconditional action (two passes)."""
    net = engine.network
    action, value = engine.best_action(decision, {})
    preds = net.diagram.predecessors(decision)
    return DecisionTree(decision, net.outcomes[decision], preds,
                        net.u_min, net.u_max, Leaf(action, value, 1.0, ()))


def iter_leaves(tree: DecisionTree) -> Iterator[Leaf]:
    """All leaves in depth-first, outcome-declaration order."""
    stack: list[Vertex] = [tree.root]
    while stack:
        v = stack.pop()
        if isinstance(v, Leaf):
            yield v
        else:
            stack.extend(reversed(list(v.children.values())))


def iter_internals(tree: DecisionTree) -> Iterator[Internal]:
    stack: list[Vertex] = [tree.root]
    while stack:
        v = stack.pop()
        if isinstance(v, Internal):
            yield v
            stack.extend(reversed(list(v.children.values())))


def tree_counts(tree: DecisionTree) -> tuple[int, int]:
    """(internal vertices, non-pruned leaves)."""
    internals = sum(1 for _ in iter_internals(tree))
    leaves = sum(1 for l in iter_leaves(tree) if not l.pruned)
    return internals, leaves


def tree_value(tree: DecisionTree) -> float:
    """Expected value: sum over leaves of value times reach probability."""
    return sum(l.value * l.reach for l in iter_leaves(tree) if not l.pruned)


def extensions(tree: DecisionTree, leaf: Leaf) -> tuple[Variable, ...]:
    """Predecessors absent from the leaf's context, in declaration order."""
    seen = {var for var, _ in leaf.context}
    return tuple(v for v in tree.predecessors if v.name not in seen)


def find_leaf(tree: DecisionTree, context: Context) -> Leaf:
    """Locate the leaf a context path leads to."""
    assignment = dict(context)
    v = tree.root
    while isinstance(v, Internal):
        v = v.children[assignment[v.variable]]
    return v


def _locate(tree: DecisionTree, leaf: Leaf) -> tuple[Internal | None, str | None]:
    """Parent vertex and child key of a leaf, by walking its context."""
    parent: Internal | None = None
    key: str | None = None
    v: Vertex = tree.root
    for var, outcome in leaf.context:
        if not isinstance(v, Internal) or v.variable != var:
            raise ValueError("leaf does not belong to this tree")
        parent, key = v, outcome
        v = v.children[outcome]
    if v is not leaf:
        raise ValueError("leaf does not belong to this tree")
    return parent, key


def _require_extensible(tree: DecisionTree, leaf: Leaf) -> tuple[Variable, ...]:
    if leaf.pruned:
        raise ValueError("a pruned leaf cannot be extended")
    exts = extensions(tree, leaf)
    if not exts:
        raise ValueError("leaf context already contains every predecessor")
    return exts


def _evaluation(tree: DecisionTree, leaf: Leaf, variable: str,
                engine: Engine, calibration: Calibration | None = None) -> CandidateEvaluation:
    if variable not in leaf.cache:
        cal = calibration or engine.calibrate(dict(leaf.context))
        leaf.cache[variable] = cal.evaluate_candidate(tree.decision, variable)
    return leaf.cache[variable]


def _gain(leaf: Leaf, ev: CandidateEvaluation) -> float:
    """Tree-value increase from swapping the leaf for this extension."""
    total = 0.0
    for j in range(len(ev.outcomes)):
        reach = leaf.reach * float(ev.probs[j])
        if reach >= ZERO_PROB:
            total += float(ev.values[j]) * reach
    return total - leaf.value * leaf.reach


def evi(tree: DecisionTree, leaf: Leaf, variable: str, engine: Engine) -> float:
    """Expected value of improvement from extending the leaf on a variable.

    Leaves the tree unchanged; the result is reach-weighted so values are
    comparable across leaves, and is never below -1e-9.
    """
    exts = _require_extensible(tree, leaf)
    if variable not in {v.name for v in exts}:
        raise ValueError(f"{variable!r} is not a possible extension of this leaf")
    return _gain(leaf, _evaluation(tree, leaf, variable, engine))


def best_extension(tree: DecisionTree, leaf: Leaf, engine: Engine) -> tuple[str, float]:
    """Greedy choice: the extension with the largest improvement.

    Evaluates every candidate (ties break by declaration order) and caches
    each result on the leaf, so a following extend() issues no queries.
    Uncached exploration costs one calibration pass plus two passes per
    candidate.
    """
    exts = _require_extensible(tree, leaf)
    missing = [v.name for v in exts if v.name not in leaf.cache]
    if missing:
        cal = engine.calibrate(dict(leaf.context))
        for name in missing:
            leaf.cache[name] = cal.evaluate_candidate(tree.decision, name)
    best_name, best_gain = None, None
    for v in exts:
        g = _gain(leaf, leaf.cache[v.name])
        if best_gain is None or g > best_gain:
            best_name, best_gain = v.name, g
    return best_name, best_gain


def extend(tree: DecisionTree, leaf: Leaf, variable: str, engine: Engine) -> Internal:
    """Replace a leaf with an internal vertex over one extension variable.

    Children below the zero-probability threshold are marked pruned and
    inherit the parent leaf's action.  Reuses a cached evaluation when the
    leaf was explored before; otherwise costs one calibration pass plus
    two passes for the chosen candidate.
    """
    exts = _require_extensible(tree, leaf)
    names = {v.name for v in exts}
    if variable not in names:
        raise ValueError(f"{variable!r} is not a possible extension of this leaf")
    parent, key = _locate(tree, leaf)
    ev = _evaluation(tree, leaf, variable, engine)

    children: dict[str, Vertex] = {}
    for j, outcome in enumerate(ev.outcomes):
        reach = leaf.reach * float(ev.probs[j])
        if reach < ZERO_PROB:
            children[outcome] = Leaf(leaf.action, 0.0, reach,
                                     leaf.context + ((variable, outcome),), pruned=True)
        else:
            children[outcome] = Leaf(ev.actions[j], float(ev.values[j]), reach,
                                     leaf.context + ((variable, outcome),))
    gain = _gain(leaf, ev)
    if gain < -1e-9:
        raise RuntimeError(f"extension decreased the tree value by {-gain!r}")
    node = Internal(variable, children, gain)
    if parent is None:
        tree.root = node
    else:
        parent.children[key] = node
    return node


def apply_policy(tree: DecisionTree, state: dict[str, str]) -> str:
    """Action prescribed for a complete information state."""
    missing = [v.name for v in tree.predecessors if v.name not in state]
    if missing:
        raise ValueError(f"incomplete information state, missing {missing}")
    v = tree.root
    while isinstance(v, Internal):
        v = v.children[state[v.variable]]
    return v.action


def to_table(tree: DecisionTree) -> list[dict]:
    """Tabular decision function: one row per information state."""
    rows = []
    for combo in product(*(v.outcomes for v in tree.predecessors)):
        state = {v.name: o for v, o in zip(tree.predecessors, combo)}
        leaf = find_leaf(tree, tuple(state.items()))
        rows.append({"state": state, "action": leaf.action,
                     "value_normalized": leaf.value,
                     "value_raw": tree.denormalize(leaf.value)})
    return rows


def vertex_to_json(vertex: Vertex) -> dict:
    if isinstance(vertex, Leaf):
        return {"action": vertex.action, "value": vertex.value,
                "prob": vertex.reach, "pruned": vertex.pruned}
    return {"var": vertex.variable,
            "children": {o: vertex_to_json(c) for o, c in vertex.children.items()}}


def policy_json(tree: DecisionTree) -> dict:
    value = tree_value(tree)
    return {"decision": tree.decision,
            "value_normalized": value,
            "value_raw": tree.denormalize(value),
            "tree": vertex_to_json(tree.root)}


def dumps_policy(tree: DecisionTree) -> str:
    return json.dumps(policy_json(tree), indent=2)
