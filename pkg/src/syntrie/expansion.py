"""Expansion trie: dictionary strings and synonym spellings in one trie.

Every applicable rule occurrence grows an rhs branch under the node
preceding the lhs occurrence; the branch end links back to the lhs end on
the dictionary path.  Branch nodes reuse existing nodes with the same label
(dictionary nodes or branches of other rules), which is where the hybrid
structure's weight interactions come from.  Fresh branch nodes carry no
score and are invisible to plain prefix enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .errors import ValidationError
from .lookup import topk
from .rules import LhsScanner, RuleSet
from .trie import (
    Completion,
    CostModel,
    DEFAULT_COST_MODEL,
    ScoredString,
    Trie,
    TrieNode,
    insert_string,
    path_nodes,
    recompute_max_scores,
    size_bytes,
)


@dataclass
class ExpansionTrie:
    trie: Trie
    ruleset: RuleSet
    string_count: int
    cost_model: CostModel = field(default=DEFAULT_COST_MODEL)
    dictionary: list[ScoredString] | None = field(default=None, repr=False)

    kind = "et"
    rule_trie = None

    @property
    def dict_trie(self) -> Trie:
        return self.trie

    def topk(self, query: str | bytes, k: int) -> list[Completion]:
        return topk_et(self, query, k)

    def size_bytes(self) -> int:
        return size_bytes(self.trie, self.cost_model)


def build_et(
    dictionary: list[ScoredString],
    ruleset: RuleSet,
    cost_model: CostModel = DEFAULT_COST_MODEL,
) -> ExpansionTrie:
    if not dictionary:
        raise ValidationError("dictionary must be non-empty")
    trie = Trie(dict_root=True)
    data = []
    for entry in dictionary:
        raw = entry.text.encode("utf-8")
        insert_string(trie, raw, entry.score)
        data.append(raw)
    expand_rules(trie, ruleset, [r.id for r in ruleset], data)
    recompute_max_scores(trie)
    return ExpansionTrie(trie, ruleset, len(dictionary), cost_model, dictionary)


def expand_rules(
    dict_trie: Trie,
    ruleset: RuleSet,
    rule_ids: Iterable[int],
    strings: Iterable[bytes],
) -> None:
    """Attach rhs branches for the given rules at every locus on ``strings``.

    The resulting trie is independent of application order: nodes are the
    union of branch paths and links deduplicate on (target, delta).  Call
    recompute_max_scores afterwards.
    """
    ids = set(rule_ids)
    scanner = LhsScanner(ruleset)
    for raw in strings:
        matches = scanner.scan(raw)
        if not matches:
            continue
        path = path_nodes(dict_trie, raw)
        for rule, offset in matches:
            if rule.id not in ids:
                continue
            end = attach_branch(path[offset], rule.rhs_b)
            end.add_link(path[offset + len(rule.lhs_b)], rule.delta, rule.id, len(rule.rhs_b))


def attach_branch(parent: TrieNode, rhs: bytes) -> TrieNode:
    """Grow the rhs path under ``parent``, reusing same-labeled nodes."""
    node = parent
    for b in rhs:
        nxt = node.child(b)
        if nxt is None:
            nxt = node.add_child(b, is_dict=False)
        node = nxt
    return node


def topk_et(et: ExpansionTrie, query: str | bytes, k: int) -> list[Completion]:
    return topk(et.trie, None, et.ruleset, query, k)
