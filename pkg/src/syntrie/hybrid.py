"""Hybrid tries: expand the most useful rules, keep the rest in a rule trie.

Rule selection is a 0/1 knapsack where an item's weight depends on which
other items are packed: rhs branches can share freshly created nodes, so
expanding a rule after its neighbours is cheaper than expanding it alone.
Items are grouped into parts (connected components of the node-sharing
relation); weights are additive across parts and are computed by simulating
branch growth inside a part.  The solver is exact branch and bound with a
fractional upper bound on minimum weights and a greedy feasible lower
bound, with an explicit approximate-greedy fallback past a node cap.
"""

from __future__ import annotations

import bisect
import heapq
from dataclasses import dataclass, field
from typing import Iterable, Protocol

from .errors import ValidationError
from .expansion import expand_rules
from .lookup import ProbeIndex, build_probe_index, topk
from .rules import LhsScanner, RuleSet
from .trie import (
    Completion,
    CostModel,
    DEFAULT_COST_MODEL,
    ScoredString,
    Trie,
    TrieNode,
    insert_path,
    insert_string,
    path_nodes,
    recompute_max_scores,
    size_bytes,
)


@dataclass(frozen=True)
class KnapsackItem:
    rule_id: int
    value: int        # number of (string, locus) applications
    weight: int       # bytes when expanded alone
    min_weight: int   # bytes when every interacting rule is already expanded
    part_id: int

    def __post_init__(self) -> None:
        if self.value < 1:
            raise ValidationError("items must have at least one application")
        # every expansion carries at least its own link record, so even a
        # rule whose branch nodes are all shared keeps a positive floor
        if not 0 < self.min_weight <= self.weight:
            raise ValidationError("expected 0 < min_weight <= weight")


class InteractionModel(Protocol):
    """Expansion cost of rule sets; order independent, union semantics."""

    def joint_bytes(self, rule_ids: frozenset[int]) -> int: ...

    def incremental_bytes(self, rule_id: int, included: frozenset[int]) -> int: ...


@dataclass
class Part:
    """One connected component of the node-sharing interaction graph."""

    part_id: int
    rule_ids: tuple[int, ...]
    model: InteractionModel = field(repr=False)


class RulePlanner:
    """Precomputes applications, interaction parts, and expansion costs.

    Branch growth is simulated against the unexpanded dictionary trie:
    a prospective node is identified by (deepest existing dictionary node,
    label suffix below it), which is exactly what makes two branches share
    it.  Per fresh node the cost is one node plus one child reference; each
    new branch-end link costs one link record.
    """

    def __init__(
        self,
        dict_trie: Trie,
        ruleset: RuleSet,
        strings: Iterable[bytes],
        cost_model: CostModel = DEFAULT_COST_MODEL,
        value_mode: str = "applications",
    ):
        if value_mode not in ("applications", "strings"):
            raise ValidationError(f"unknown value_mode {value_mode!r}")
        self.ruleset = ruleset
        self.cost_model = cost_model
        self._fresh_unit = cost_model.node_bytes + cost_model.per_child_ref_bytes
        self._link_unit = cost_model.per_link_bytes

        # Per rule: the fresh-node keys and link keys its expansion creates.
        # A key appearing in several rules' sets is created once no matter
        # which of them is expanded; all cost questions reduce to counting
        # keys, weighted by how many owners are present.
        self._node_keys: dict[int, frozenset] = {}
        self._link_keys: dict[int, frozenset] = {}
        values: dict[int, int] = {}
        apps: dict[int, list[tuple[TrieNode, TrieNode]]] = {}
        scanner = LhsScanner(ruleset)
        for raw in strings:
            matches = scanner.scan(raw)
            if not matches:
                continue
            path = path_nodes(dict_trie, raw)
            for rule, off in matches:
                apps.setdefault(rule.id, []).append((path[off], path[off + len(rule.lhs_b)]))
            if value_mode == "applications":
                for rule, _ in matches:
                    values[rule.id] = values.get(rule.id, 0) + 1
            else:
                for rid in {rule.id for rule, _ in matches}:
                    values[rid] = values.get(rid, 0) + 1
        for rid, pairs in apps.items():
            rule = self.ruleset[rid]
            nodes: set = set()
            links: set = set()
            for parent, target in pairs:
                end = _walk_branch(parent, rule.rhs_b, nodes)
                links.add((end, id(target), rule.delta, len(rule.rhs_b)))
            self._node_keys[rid] = frozenset(nodes)
            self._link_keys[rid] = frozenset(links)

        self._node_owners: dict[object, tuple[int, ...]] = {}
        self._link_owners: dict[object, tuple[int, ...]] = {}
        for rid in sorted(apps):
            for key in self._node_keys[rid]:
                self._node_owners[key] = self._node_owners.get(key, ()) + (rid,)
            for key in self._link_keys[rid]:
                self._link_owners[key] = self._link_owners.get(key, ()) + (rid,)

        part_of = self._partition(sorted(apps))
        self._part_members: dict[int, tuple[int, ...]] = {}
        for rid in sorted(apps):
            self._part_members[part_of[rid]] = self._part_members.get(part_of[rid], ()) + (rid,)

        self._joint_cache: dict[frozenset[int], int] = {}
        self.items = []
        for rid in sorted(apps):
            weight = (
                len(self._node_keys[rid]) * self._fresh_unit
                + len(self._link_keys[rid]) * self._link_unit
            )
            min_weight = sum(
                self._fresh_unit
                for key in self._node_keys[rid]
                if len(self._node_owners[key]) == 1
            ) + sum(
                self._link_unit
                for key in self._link_keys[rid]
                if len(self._link_owners[key]) == 1
            )
            self.items.append(KnapsackItem(rid, values[rid], weight, min_weight, part_of[rid]))
        self.parts = [
            Part(pid, members, self) for pid, members in sorted(self._part_members.items())
        ]
        self.items_by_id = {item.rule_id: item for item in self.items}
        # Disjoint key sets across parts, so the global union is the per-part sum.
        self.total_joint_bytes = (
            len(self._node_owners) * self._fresh_unit + len(self._link_owners) * self._link_unit
        )

    def _partition(self, rids: list[int]) -> dict[int, int]:
        """Union rules that would create an identical fresh node or link."""
        parent: dict[int, int] = {rid: rid for rid in rids}

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for owners_map in (self._node_owners, self._link_owners):
            for owners in owners_map.values():
                first = owners[0]
                for rid in owners[1:]:
                    parent[find(rid)] = find(first)
        roots = sorted({find(rid) for rid in rids})
        dense = {root: i for i, root in enumerate(roots)}
        return {rid: dense[find(rid)] for rid in rids}

    def joint_bytes(self, rule_ids: frozenset[int]) -> int:
        """Exact expansion bytes for a set of rules (any parts)."""
        if not rule_ids:
            return 0
        cached = self._joint_cache.get(rule_ids)
        if cached is not None:
            return cached
        nodes = set().union(*(self._node_keys[rid] for rid in rule_ids))
        links = set().union(*(self._link_keys[rid] for rid in rule_ids))
        total = len(nodes) * self._fresh_unit + len(links) * self._link_unit
        self._joint_cache[rule_ids] = total
        return total

    def incremental_bytes(self, rule_id: int, included: frozenset[int]) -> int:
        """joint(included + rule) - joint(included), by owner counting."""
        total = 0
        for key in self._node_keys[rule_id]:
            if not any(rid in included for rid in self._node_owners[key]):
                total += self._fresh_unit
        for key in self._link_keys[rule_id]:
            if not any(rid in included for rid in self._link_owners[key]):
                total += self._link_unit
        return total


def _walk_branch(parent: TrieNode, rhs: bytes, created: set) -> tuple[int, bytes] | int:
    """Simulate attaching rhs under parent; returns the end-node key.

    Fresh nodes are keyed by (deepest existing dictionary node, label suffix
    below it); existing nodes by their identity.
    """
    node = parent
    anchor: TrieNode | None = None
    suffix = b""
    for i, b in enumerate(rhs):
        if anchor is None:
            nxt = node.child(b)
            if nxt is not None:
                node = nxt
                continue
            anchor = node
            suffix = rhs[i : i + 1]
        else:
            suffix += bytes([b])
        created.add((id(anchor), suffix))
    if anchor is None:
        return id(node)
    return (id(anchor), suffix)


def _build_dict_trie(dictionary: list[ScoredString]) -> tuple[Trie, list[bytes]]:
    if not dictionary:
        raise ValidationError("dictionary must be non-empty")
    trie = Trie(dict_root=True)
    data = []
    for entry in dictionary:
        raw = entry.text.encode("utf-8")
        insert_string(trie, raw, entry.score)
        data.append(raw)
    return trie, data


def make_planner(
    dictionary: list[ScoredString],
    ruleset: RuleSet,
    cost_model: CostModel = DEFAULT_COST_MODEL,
    value_mode: str = "applications",
) -> RulePlanner:
    trie, data = _build_dict_trie(dictionary)
    return RulePlanner(trie, ruleset, data, cost_model, value_mode)


def compute_items(
    dictionary: list[ScoredString],
    ruleset: RuleSet,
    cost_model: CostModel = DEFAULT_COST_MODEL,
    value_mode: str = "applications",
) -> list[KnapsackItem]:
    return make_planner(dictionary, ruleset, cost_model, value_mode).items


def partition_items(
    items: list[KnapsackItem],
    dictionary: list[ScoredString],
    ruleset: RuleSet,
    cost_model: CostModel = DEFAULT_COST_MODEL,
) -> list[Part]:
    planner = make_planner(dictionary, ruleset, cost_model)
    got = {item.rule_id: item.part_id for item in planner.items}
    for item in items:
        if got.get(item.rule_id) != item.part_id:
            raise ValidationError("items do not match this dictionary and rule set")
    return planner.parts


def exact_weight(item: KnapsackItem, part: Part, included_set: Iterable[int]) -> int:
    """Incremental bytes of expanding ``item`` given already-included rules."""
    inc = frozenset(included_set) & frozenset(part.rule_ids)
    return part.model.incremental_bytes(item.rule_id, inc)


def upper_bound(
    sorted_items: list[KnapsackItem], index: int, value: int, weight_used: int, budget: int
) -> float:
    """Fractional bound assuming every remaining item gets its minimum weight.

    Admissible: no completion of the state can beat it.
    """
    remaining = budget - weight_used
    bound = float(value)
    for item in sorted_items[index:]:
        if item.min_weight <= remaining:
            bound += item.value
            remaining -= item.min_weight
        else:
            if remaining > 0:
                bound += item.value * remaining / item.min_weight
            break
    return bound


def lower_bound(
    sorted_items: list[KnapsackItem], index: int, value: int, weight_used: int, budget: int
) -> int:
    """Greedy feasible bound: take items at original weight until one misfits."""
    remaining = budget - weight_used
    bound = value
    for item in sorted_items[index:]:
        if item.weight > remaining:
            break
        bound += item.value
        remaining -= item.weight
    return bound


@dataclass(frozen=True)
class BBSolution:
    selected: tuple[int, ...]
    excluded: tuple[int, ...]
    value: int
    weight: int
    exact: bool
    nodes_explored: int


def sort_items(items: list[KnapsackItem]) -> list[KnapsackItem]:
    """Bound order: value per minimum-weight byte descending, ties by id."""
    return sorted(items, key=lambda it: (-it.value / it.min_weight, it.rule_id))


def solve_knapsack_bb(
    items: list[KnapsackItem],
    parts: list[Part],
    budget_bytes: int,
    node_cap: int = 10_000_000,
) -> BBSolution:
    """Exact best-first branch and bound over include/exclude decisions.

    Feasibility uses exact incremental weights (part simulation).  If the
    node cap is hit, returns the best feasible solution found so far with
    ``exact=False``; the greedy lower-bound solution seeds the incumbent, so
    the fallback is never worse than greedy.
    """
    if budget_bytes < 0:
        raise ValidationError("budget must be >= 0")
    order = sort_items(items)
    part_by_rule = {rid: part for part in parts for rid in part.rule_ids}
    item_by_rule = {item.rule_id: item for item in items}
    n = len(order)

    # Prefix sums over the sorted order make both bounds O(log n): the
    # fractional bound and the greedy take are contiguous prefixes.
    v_ps = [0]
    wmin_ps = [0]
    w_ps = [0]
    for it in order:
        v_ps.append(v_ps[-1] + it.value)
        wmin_ps.append(wmin_ps[-1] + it.min_weight)
        w_ps.append(w_ps[-1] + it.weight)

    def fast_ub(index: int, value: int, weight: int) -> float:
        remaining = budget_bytes - weight
        j = bisect.bisect_right(wmin_ps, wmin_ps[index] + remaining) - 1
        ub = float(value + v_ps[j] - v_ps[index])
        if j < n:
            leftover = remaining - (wmin_ps[j] - wmin_ps[index])
            if leftover > 0:
                ub += order[j].value * leftover / order[j].min_weight
        return ub

    def greedy_take(index: int, weight: int) -> tuple[int, int]:
        # Items index..j-1 fit at their original (solo) weights; original
        # weights only overestimate the exact accounting, so the take is
        # always feasible.
        remaining = budget_bytes - weight
        j = bisect.bisect_right(w_ps, w_ps[index] + remaining) - 1
        return v_ps[j] - v_ps[index], j

    def materialize(included: frozenset[int], index: int, stop: int) -> frozenset[int]:
        return included | {it.rule_id for it in order[index:stop]}

    lb0, j0 = greedy_take(0, 0)
    best_value, best_sel = lb0, materialize(frozenset(), 0, j0)
    nodes = 0
    exact = True
    seq = 0
    heap: list[tuple[float, int, int, int, int, frozenset[int]]] = [
        (-fast_ub(0, 0, 0), seq, 0, 0, 0, frozenset())
    ]
    while heap:
        neg_ub, _, index, value, weight, included = heapq.heappop(heap)
        if -neg_ub <= best_value or index >= n:
            continue
        nodes += 1
        if nodes > node_cap:
            exact = False
            break
        item = order[index]
        # include branch
        part = part_by_rule[item.rule_id]
        inc_weight = weight + exact_weight(item, part, included)
        if inc_weight <= budget_bytes:
            inc_included = included | {item.rule_id}
            inc_value = value + item.value
            lb, j = greedy_take(index + 1, inc_weight)
            if inc_value + lb > best_value:
                best_value = inc_value + lb
                best_sel = materialize(inc_included, index + 1, j)
            ub = fast_ub(index + 1, inc_value, inc_weight)
            if ub > best_value:
                seq += 1
                heapq.heappush(heap, (-ub, seq, index + 1, inc_value, inc_weight, inc_included))
        # exclude branch
        lb, j = greedy_take(index + 1, weight)
        if value + lb > best_value:
            best_value = value + lb
            best_sel = materialize(included, index + 1, j)
        ub = fast_ub(index + 1, value, weight)
        if ub > best_value:
            seq += 1
            heapq.heappush(heap, (-ub, seq, index + 1, value, weight, included))

    exact_total = sum(
        part.model.joint_bytes(frozenset(part.rule_ids) & best_sel) for part in parts
    )
    selected = tuple(sorted(best_sel))
    excluded = tuple(sorted(item_by_rule.keys() - best_sel))
    return BBSolution(selected, excluded, best_value, exact_total, exact, nodes)


@dataclass
class HybridTries:
    dict_trie: Trie
    rule_trie: Trie
    ruleset: RuleSet
    selected: frozenset[int]
    budget_bytes: int
    alpha: float
    string_count: int
    cost_model: CostModel = field(default=DEFAULT_COST_MODEL)
    solution: BBSolution | None = field(default=None, repr=False)
    dictionary: list[ScoredString] | None = field(default=None, repr=False)
    probe_rules: ProbeIndex | None = field(default=None, repr=False, compare=False)

    kind = "ht"

    def topk(self, query: str | bytes, k: int) -> list[Completion]:
        return topk_ht(self, query, k)

    def size_bytes(self) -> int:
        total = size_bytes(self.dict_trie, self.cost_model)
        if len(self.selected) < len(self.ruleset):
            total += size_bytes(self.rule_trie, self.cost_model)
        return total


def build_ht(
    dictionary: list[ScoredString],
    ruleset: RuleSet,
    alpha: float,
    cost_model: CostModel = DEFAULT_COST_MODEL,
    node_cap: int = 10_000_000,
    value_mode: str = "applications",
) -> HybridTries:
    """Pick rules to expand within alpha of the full expansion cost.

    alpha=0 yields a structure identical to twin tries, alpha=1 to the
    expansion trie (plus rhs paths for rules that never apply, as in TT).
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError(f"alpha must be in [0, 1], got {alpha}")
    dict_trie, data = _build_dict_trie(dictionary)
    planner = RulePlanner(dict_trie, ruleset, data, cost_model, value_mode)
    budget = round(alpha * planner.total_joint_bytes)
    solution = solve_knapsack_bb(planner.items, planner.parts, budget, node_cap)
    if solution.weight > budget:
        raise AssertionError("solver returned an infeasible selection")

    selected = frozenset(solution.selected)
    expand_rules(dict_trie, ruleset, selected, data)
    recompute_max_scores(dict_trie)

    rule_trie = Trie(dict_root=False)
    attach_unselected(dict_trie, rule_trie, ruleset, selected, data)
    return HybridTries(
        dict_trie, rule_trie, ruleset, selected, budget, alpha, len(dictionary), cost_model, solution, dictionary
    )


def assemble_ht(
    dictionary: list[ScoredString],
    ruleset: RuleSet,
    selected: frozenset[int],
    alpha: float,
    budget_bytes: int,
    cost_model: CostModel = DEFAULT_COST_MODEL,
) -> HybridTries:
    """Rebuild a hybrid structure from an already-solved rule selection."""
    for rid in selected:
        ruleset[rid]  # raises on unknown ids
    dict_trie, data = _build_dict_trie(dictionary)
    expand_rules(dict_trie, ruleset, selected, data)
    recompute_max_scores(dict_trie)
    rule_trie = Trie(dict_root=False)
    attach_unselected(dict_trie, rule_trie, ruleset, selected, data)
    return HybridTries(
        dict_trie, rule_trie, ruleset, frozenset(selected), budget_bytes, alpha, len(dictionary), cost_model, None, dictionary
    )


def attach_unselected(
    dict_trie: Trie, rule_trie: Trie, ruleset: RuleSet, selected: frozenset[int], data: list[bytes]
) -> None:
    rhs_ends = {
        rule.id: insert_path(rule_trie, rule.rhs_b) for rule in ruleset if rule.id not in selected
    }
    scanner = LhsScanner(ruleset)
    for raw in data:
        matches = scanner.scan(raw)
        if not matches:
            continue
        path = path_nodes(dict_trie, raw)
        for rule, off in matches:
            if rule.id in selected:
                continue
            rhs_ends[rule.id].add_link(
                path[off + len(rule.lhs_b)], rule.delta, rule.id, len(rule.rhs_b)
            )


def topk_ht(ht: HybridTries, query: str | bytes, k: int) -> list[Completion]:
    if len(ht.selected) >= len(ht.ruleset):
        return topk(ht.dict_trie, None, ht.ruleset, query, k)
    if ht.probe_rules is None:
        unselected = {r.id for r in ht.ruleset} - ht.selected
        ht.probe_rules = build_probe_index(ht.rule_trie, ht.ruleset, unselected)
    return topk(ht.dict_trie, ht.rule_trie, ht.ruleset, query, k, ht.probe_rules)
