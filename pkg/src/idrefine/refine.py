"""The anytime refinement loop.

Starting from a single-leaf tree, repeatedly choose a leaf, choose an
extension variable for it, and extend, until a stopping rule fires or no
extensible leaf remains.  Every intermediate tree is a usable policy; the
trace records value and query cost after the initial tree and after each
extension.

Leaf choice and extension choice are orthogonal and pluggable:

* leaf strategies: ``posthoc`` (a max-gain priority queue over internal
  vertices; all leaves of the dequeued vertex are served before the queue
  is consulted again; ties break by seeded RNG) or ``random`` (uniform
  over extensible, non-pruned leaves);
* extension strategies: ``greedy`` (best improvement, all candidates
  evaluated and cached) or ``random`` (uniform over candidates, only the
  chosen one evaluated).

A fixed seed makes a run fully deterministic.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from itertools import count
from typing import Callable

import numpy as np

from .engine import Engine
from .tree import (DecisionTree, Internal, Leaf, best_extension, extend,
                   extensions, init_tree, iter_internals, iter_leaves,
                   tree_counts, tree_value)

CSV_HEADER = "iteration,fine_queries,passes,internal_vertices,leaves,value_normalized,value_raw"

LEAF_STRATEGIES = ("posthoc", "random")
EXTENSION_STRATEGIES = ("greedy", "random")


@dataclass
class StoppingRule:
    """When to stop refining; at least one bound or run_to_complete."""

    max_extensions: int | None = None
    max_fine: int | None = None
    max_passes: int | None = None
    min_evi: float | None = None
    run_to_complete: bool = False

    def __post_init__(self):
        bounds = (self.max_extensions, self.max_fine, self.max_passes, self.min_evi)
        if not self.run_to_complete and all(b is None for b in bounds):
            raise ValueError("stopping rule needs at least one bound or run_to_complete")

    def budget_reached(self, iterations: int, engine: Engine) -> bool:
        if self.max_extensions is not None and iterations >= self.max_extensions:
            return True
        if self.max_fine is not None and engine.counter.fine >= self.max_fine:
            return True
        if self.max_passes is not None and engine.counter.passes >= self.max_passes:
            return True
        return False


@dataclass
class RefinementConfig:
    leaf_strategy: str = "posthoc"
    extension_strategy: str = "greedy"
    stop: StoppingRule = field(default_factory=lambda: StoppingRule(run_to_complete=True))
    seed: int = 0

    def __post_init__(self):
        if self.leaf_strategy not in LEAF_STRATEGIES:
            raise ValueError(f"unknown leaf strategy {self.leaf_strategy!r}")
        if self.extension_strategy not in EXTENSION_STRATEGIES:
            raise ValueError(f"unknown extension strategy {self.extension_strategy!r}")
        if self.stop.min_evi is not None and self.extension_strategy != "greedy":
            raise ValueError("min_evi stopping applies to the greedy extension strategy only")


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    fine_queries: int
    passes: int
    internal_vertices: int
    leaves: int
    value_normalized: float
    value_raw: float


@dataclass
class AnytimeTrace:
    records: list[TraceRecord] = field(default_factory=list)

    def add(self, record: TraceRecord) -> None:
        self.records.append(record)

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for r in self.records:
            lines.append(f"{r.iteration},{r.fine_queries},{r.passes},"
                         f"{r.internal_vertices},{r.leaves},"
                         f"{r.value_normalized!r},{r.value_raw!r}")
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_csv())


@dataclass(frozen=True)
class ExtensionEvent:
    """Per-extension instrumentation passed to an observer callback."""

    iteration: int
    context_size: int
    variable: str
    gain: float
    fine_delta: int
    passes_delta: int


class PosthocSelector:
    """Serve leaves under the internal vertex whose creation gained most.

    Vertices enqueue once, at creation, with their recorded gain; equal
    gains break at random (seeded).  The root leaf is served before the
    queue is first consulted.
    """

    def __init__(self, tree: DecisionTree, rng: np.random.Generator):
        self._rng = rng
        self._seq = count()
        self._heap: list[tuple[float, float, int, Internal]] = []
        self._pending: list = []
        if isinstance(tree.root, Leaf):
            self._pending.append(tree.root)
        else:
            for vertex in iter_internals(tree):
                self.notify_extended(vertex)

    def notify_extended(self, vertex: Internal) -> None:
        heapq.heappush(self._heap, (-vertex.gain, self._rng.random(), next(self._seq), vertex))

    def next_leaf(self, tree: DecisionTree) -> Leaf | None:
        while True:
            while self._pending:
                leaf = self._pending.pop(0)
                if isinstance(leaf, Leaf) and not leaf.pruned and extensions(tree, leaf):
                    return leaf
            if not self._heap:
                return None
            _, _, _, vertex = heapq.heappop(self._heap)
            self._pending.extend(vertex.children.values())


class RandomLeafSelector:
    """Uniform choice over extensible, non-pruned leaves."""

    def __init__(self, tree: DecisionTree, rng: np.random.Generator):
        self._rng = rng

    def notify_extended(self, vertex: Internal) -> None:
        pass

    def next_leaf(self, tree: DecisionTree) -> Leaf | None:
        candidates = [l for l in iter_leaves(tree) if not l.pruned and extensions(tree, l)]
        if not candidates:
            return None
        return candidates[int(self._rng.integers(len(candidates)))]


def make_selector(strategy: str, tree: DecisionTree, rng: np.random.Generator):
    if strategy == "posthoc":
        return PosthocSelector(tree, rng)
    return RandomLeafSelector(tree, rng)


def choose_extension(strategy: str, tree: DecisionTree, leaf: Leaf,
                     engine: Engine, rng: np.random.Generator) -> tuple[str, float | None]:
    """Pick the extension variable for a leaf; greedy returns its gain too."""
    if strategy == "greedy":
        return best_extension(tree, leaf, engine)
    candidates = extensions(tree, leaf)
    return candidates[int(rng.integers(len(candidates)))].name, None


def refine(engine: Engine, decision: str, config: RefinementConfig | None = None,
           observer: Callable[[ExtensionEvent], None] | None = None,
           ) -> tuple[DecisionTree, AnytimeTrace]:
    """Run the anytime loop for one decision; returns the tree and its trace.

    The trace holds one record for the initial tree and one per extension;
    its value column is non-decreasing.  Budget bounds are checked between
    iterations, so an iteration in flight may overshoot them slightly.
    """
    config = config or RefinementConfig()
    rng = np.random.default_rng(config.seed)
    trace = AnytimeTrace()

    tree = init_tree(engine, decision)

    def record(iteration: int) -> None:
        internals, leaves = tree_counts(tree)
        value = tree_value(tree)
        trace.add(TraceRecord(iteration, engine.counter.fine, engine.counter.passes,
                              internals, leaves, value, tree.denormalize(value)))

    record(0)
    if engine.network.degenerate:
        return tree, trace

    selector = make_selector(config.leaf_strategy, tree, rng)
    iterations = 0
    while not config.stop.budget_reached(iterations, engine):
        leaf = selector.next_leaf(tree)
        if leaf is None:
            break
        before = engine.counter.snapshot()
        variable, gain = choose_extension(config.extension_strategy, tree, leaf, engine, rng)
        if config.stop.min_evi is not None and gain is not None and gain < config.stop.min_evi:
            break
        context_size = len(leaf.context)
        node = extend(tree, leaf, variable, engine)
        selector.notify_extended(node)
        iterations += 1
        record(iterations)
        if observer is not None:
            after = engine.counter.snapshot()
            observer(ExtensionEvent(iterations, context_size, variable, node.gain,
                                    after[0] - before[0], after[1] - before[1]))
    return tree, trace
