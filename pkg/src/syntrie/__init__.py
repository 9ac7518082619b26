"""Top-k string auto-completion with synonym rewriting.

Three index structures over the same scored dictionary and rule set:

- twin tries (``build_tt``): smallest, dictionary trie plus a rule trie
- expansion trie (``build_et``): fastest, every synonym spelling materialized
- hybrid tries (``build_ht``): expands the best rules within a byte budget

All three answer ``topk(query, k)`` identically; they differ in size and
speed.  Queries match a dictionary string when some rewrite of the query
(replacing whole right-hand sides with left-hand sides, spans disjoint, no
chaining) is a prefix of it.  Results are ordered by score descending, then
text ascending.
"""

from .bench import (
    BenchResult,
    DatasetSpec,
    StructureStats,
    generate_synthetic,
    generate_workload,
    load_dictionary,
    measure,
    parse_dictionary,
    run_benchmark,
)
from .errors import ExpansionLimitError, SnapshotError, ValidationError
from .expansion import ExpansionTrie, build_et, topk_et
from .hybrid import (
    BBSolution,
    HybridTries,
    KnapsackItem,
    Part,
    build_ht,
    compute_items,
    exact_weight,
    lower_bound,
    partition_items,
    solve_knapsack_bb,
    topk_ht,
    upper_bound,
)
from .lookup import topk
from .oracle import match_set, oracle_topk, replaced_strings
from .rules import RuleSet, SynonymRule, parse_rules, serialize_rules
from .snapshot import dump, load
from .trie import Completion, CostModel, DEFAULT_COST_MODEL, ScoredString
from .twin import TwinTries, build_tt, topk_tt

__version__ = "0.1.0"

__all__ = [
    "BBSolution",
    "BenchResult",
    "Completion",
    "CostModel",
    "DEFAULT_COST_MODEL",
    "DatasetSpec",
    "ExpansionLimitError",
    "ExpansionTrie",
    "HybridTries",
    "KnapsackItem",
    "Part",
    "RuleSet",
    "ScoredString",
    "SnapshotError",
    "StructureStats",
    "SynonymRule",
    "TwinTries",
    "ValidationError",
    "build_et",
    "build_ht",
    "build_tt",
    "compute_items",
    "dump",
    "exact_weight",
    "generate_synthetic",
    "generate_workload",
    "load",
    "load_dictionary",
    "lower_bound",
    "match_set",
    "measure",
    "oracle_topk",
    "parse_dictionary",
    "parse_rules",
    "partition_items",
    "replaced_strings",
    "run_benchmark",
    "serialize_rules",
    "solve_knapsack_bb",
    "topk",
    "topk_et",
    "topk_ht",
    "topk_tt",
    "upper_bound",
]
