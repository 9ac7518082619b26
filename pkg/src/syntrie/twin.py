"""Twin tries: a dictionary trie plus a rule trie joined by synonym links.

The smallest of the three structures.  Each distinct rhs is stored once in
the rule trie; its end node carries one link per lhs occurrence across the
whole dictionary, so lookups must validate which occurrence a link belongs
to (see lookup.probe_rule_trie).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ValidationError
from .lookup import ProbeIndex, ascend, build_probe_index, topk
from .rules import LhsScanner, RuleSet
from .trie import (
    Completion,
    CostModel,
    DEFAULT_COST_MODEL,
    ScoredString,
    SynonymLink,
    Trie,
    TrieNode,
    insert_path,
    insert_string,
    path_nodes,
    recompute_max_scores,
    size_bytes,
)


@dataclass
class TwinTries:
    dict_trie: Trie
    rule_trie: Trie
    ruleset: RuleSet
    string_count: int
    cost_model: CostModel = field(default=DEFAULT_COST_MODEL)
    dictionary: list[ScoredString] | None = field(default=None, repr=False)
    probe_rules: ProbeIndex | None = field(default=None, repr=False, compare=False)

    kind = "tt"

    def topk(self, query: str | bytes, k: int) -> list[Completion]:
        return topk_tt(self, query, k)

    def size_bytes(self) -> int:
        total = size_bytes(self.dict_trie, self.cost_model)
        if len(self.ruleset):
            total += size_bytes(self.rule_trie, self.cost_model)
        return total


def build_tt(
    dictionary: list[ScoredString],
    ruleset: RuleSet,
    cost_model: CostModel = DEFAULT_COST_MODEL,
) -> TwinTries:
    if not dictionary:
        raise ValidationError("dictionary must be non-empty")
    dict_trie = Trie(dict_root=True)
    ends: list[tuple[bytes, TrieNode]] = []
    for entry in dictionary:
        data = entry.text.encode("utf-8")
        ends.append((data, insert_string(dict_trie, data, entry.score)))
    recompute_max_scores(dict_trie)

    rule_trie = Trie(dict_root=False)
    attach_rule_links(dict_trie, rule_trie, ruleset, (data for data, _ in ends))
    return TwinTries(dict_trie, rule_trie, ruleset, len(dictionary), cost_model, dictionary)


def attach_rule_links(dict_trie: Trie, rule_trie: Trie, ruleset: RuleSet, strings) -> None:
    """Insert every rhs into the rule trie and link each lhs occurrence.

    Links are attached to the rhs end node and deduplicated on
    (target, delta); two rules can only collide there when they share both
    sides, which parsing already removed.
    """
    rhs_ends = {rule.id: insert_path(rule_trie, rule.rhs_b) for rule in ruleset}
    scanner = LhsScanner(ruleset)
    for data in strings:
        matches = scanner.scan(data)
        if not matches:
            continue
        node_at = path_nodes(dict_trie, data)
        for rule, offset in matches:
            target = node_at[offset + len(rule.lhs_b)]
            rhs_ends[rule.id].add_link(target, rule.delta, rule.id, len(rule.rhs_b))


def validate_link(link: SynonymLink, rhs_len: int, candidate_node: TrieNode) -> bool:
    """True iff the link's occurrence sits right after candidate_node's path."""
    dest = ascend(link.target, rhs_len + link.delta)
    return dest is candidate_node


def topk_tt(tt: TwinTries, query: str | bytes, k: int) -> list[Completion]:
    if tt.probe_rules is None:
        tt.probe_rules = build_probe_index(tt.rule_trie, tt.ruleset)
    return topk(tt.dict_trie, tt.rule_trie, tt.ruleset, query, k, tt.probe_rules)
