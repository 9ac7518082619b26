"""Shared query engine for all three index structures.

A lookup has two phases:

1. Consumption: starting at the dictionary-trie root, walk the query bytes
   while firing synonym rewrites.  Expanded-branch links (stored on
   dictionary-trie nodes) fire backwards over the rhs bytes just walked;
   rule-trie matches fire forwards over upcoming query bytes after link
   validation.  Every fully-consumed dictionary node becomes a seed.
2. Enumeration: exact best-first top-k over the seed subtrees
   (trie.best_first_topk).

Rewrite spans stay disjoint by construction: backward firings require that
the rhs bytes were walked after the most recent jump, and forward firings
only cover bytes not yet consumed.  Twin tries use only the forward path,
the expansion trie only the backward path, and hybrid tries both.
"""

from __future__ import annotations

from .rules import RuleSet, SynonymRule
from .trie import Completion, Rewrites, Trie, TrieNode, best_first_topk

ProbeIndex = dict[int, list[SynonymRule]]


def ascend(node: TrieNode, levels: int) -> TrieNode | None:
    for _ in range(levels):
        if node.parent is None:
            return None
        node = node.parent
    return node


def build_probe_index(rule_trie: Trie, ruleset: RuleSet, rule_ids=None) -> ProbeIndex:
    """Map rule-trie end nodes (by identity) to the rules whose rhs ends there.

    ``rule_ids`` restricts the index; rules whose rhs is absent from this
    rule trie are skipped.
    """
    index: ProbeIndex = {}
    for rule in ruleset:
        if rule_ids is not None and rule.id not in rule_ids:
            continue
        node = rule_trie.root
        for b in rule.rhs_b:
            node = node.child(b)
            if node is None:
                break
        else:
            index.setdefault(id(node), []).append(rule)
    return index


def probe_rule_trie(rule_root: TrieNode, remaining: bytes, at_node: TrieNode, probe_rules: ProbeIndex):
    """Yield (target, consumed, rule_id) for rule firings at ``at_node``.

    Walks ``remaining`` down the rule trie; whenever it reaches a node that
    completes some rule's rhs, the rule fires iff its lhs spells a dictionary
    path directly below ``at_node``.  That dictionary-side check is
    equivalent to validating stored links by climbing from their targets, but
    costs O(len(lhs)) regardless of how many occurrences the rhs node
    accumulated.
    """
    node = rule_root
    for consumed in range(1, len(remaining) + 1):
        node = node.children.get(remaining[consumed - 1]) if node.children else None
        if node is None:
            return
        rules = probe_rules.get(id(node))
        if not rules:
            continue
        for rule in rules:
            target = at_node
            for b in rule.lhs_b:
                target = target.child(b)
                if target is None or not target.is_dict:
                    break
            else:
                yield target, consumed, rule.id


def gather_seeds(
    dict_trie: Trie,
    rule_trie: Trie | None,
    ruleset: RuleSet,
    query: bytes,
    probe_rules: ProbeIndex | None = None,
) -> list[tuple[TrieNode, Rewrites]]:
    """All dictionary nodes whose path is a rewrite of the full query."""
    rule_root = rule_trie.root if rule_trie is not None else None
    if rule_root is not None and probe_rules is None:
        probe_rules = build_probe_index(rule_trie, ruleset)
    n = len(query)
    # (node id, query index) -> most literal bytes walked since the last
    # jump; a state is only worth revisiting if that count improved, since a
    # larger count enables a superset of backward firings.
    best_clean: dict[tuple[int, int], int] = {}
    seeds: dict[int, tuple[TrieNode, Rewrites]] = {}
    stack: list[tuple[TrieNode, int, int, Rewrites]] = [(dict_trie.root, 0, 0, ())]

    while stack:
        node, qidx, clean, rewrites = stack.pop()
        key = (id(node), qidx)
        if best_clean.get(key, -1) >= clean:
            continue
        best_clean[key] = clean

        if qidx == n and node.is_dict:
            prev = seeds.get(id(node))
            if prev is None or rewrites < prev[1]:
                seeds[id(node)] = (node, rewrites)

        # Backward firing: this node ends an expanded rhs branch.
        if node.links:
            for lk in node.links:
                rhs_len = lk.rhs_len
                if clean >= rhs_len:
                    stack.append(
                        (lk.target, qidx, 0, rewrites + ((lk.rule_id, qidx - rhs_len, qidx),))
                    )

        if qidx < n:
            child = node.children.get(query[qidx]) if node.children else None
            if child is not None:
                stack.append((child, qidx + 1, clean + 1, rewrites))
            # Forward firing: match upcoming bytes against the rule trie.
            # Only dictionary nodes can precede an lhs occurrence, and
            # validation compares against the current node anyway.
            if rule_root is not None and node.is_dict:
                for target, consumed, rule_id in probe_rule_trie(
                    rule_root, query[qidx:], node, probe_rules
                ):
                    stack.append(
                        (target, qidx + consumed, 0, rewrites + ((rule_id, qidx, qidx + consumed),))
                    )

    return list(seeds.values())


def topk(
    dict_trie: Trie,
    rule_trie: Trie | None,
    ruleset: RuleSet,
    query: str | bytes,
    k: int,
    probe_rules: ProbeIndex | None = None,
) -> list[Completion]:
    if k <= 0:
        return []
    qb = query.encode("utf-8") if isinstance(query, str) else query
    seeds = gather_seeds(dict_trie, rule_trie, ruleset, qb, probe_rules)
    return best_first_topk(seeds, k)
