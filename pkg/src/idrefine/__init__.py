"""Anytime influence-diagram solving by information refinement.

Policies are decision trees over a decision's observable predecessors,
grown one vertex at a time against an exact inference engine; every
intermediate tree is a usable policy with a non-decreasing expected value.
"""

from .diagram import (DiagramError, InfluenceDiagram, ValidationReport,
                      Variable, information_states, load_diagram,
                      parse_diagram, serialize_diagram, validate)
from .engine import (ChanceNetwork, Engine, PolicyCpt, QueryCounter,
                     ZeroProbabilityError, compile_network)
from .generate import GeneratorSpec, gen_random_id, gen_two_stage
from .harness import (ProfileSummary, baseline_states, greedy_query_bound,
                      run_profile, run_sweep_profile)
from .multistage import (CompiledPolicy, MultistagePolicy, compile_decision,
                         contingency_from_tree, sweep_back, used_predecessors)
from .oracle import (MultistageOracleResult, OracleResult, StateSpaceCapError,
                     oracle_optimal, oracle_optimal_multistage)
from .refine import (AnytimeTrace, RefinementConfig, StoppingRule,
                     TraceRecord, refine)
from .tree import (DecisionTree, Internal, Leaf, apply_policy, best_extension,
                   evi, extend, extensions, init_tree, to_table, tree_value)

__version__ = "0.1.0"
