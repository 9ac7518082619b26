import itertools
import random

import pytest

from syntrie import ScoredString, build_et, build_ht, build_tt, parse_rules
from syntrie.errors import ExpansionLimitError, ValidationError
from syntrie.hybrid import (
    KnapsackItem,
    assemble_ht,
    compute_items,
    exact_weight,
    lower_bound,
    make_planner,
    partition_items,
    solve_knapsack_bb,
    sort_items,
    upper_bound,
)
from syntrie.oracle import oracle_topk
from syntrie.trie import DEFAULT_COST_MODEL

from conftest import random_instance

FRESH = DEFAULT_COST_MODEL.node_bytes + DEFAULT_COST_MODEL.per_child_ref_bytes  # 29
LINK = DEFAULT_COST_MODEL.per_link_bytes  # 12


def exhaustive_best(items, parts, budget):
    best = -1
    vals = {it.rule_id: it.value for it in items}
    ids = [it.rule_id for it in items]
    for r in range(len(ids) + 1):
        for combo in itertools.combinations(ids, r):
            sel = frozenset(combo)
            weight = sum(p.model.joint_bytes(sel & frozenset(p.rule_ids)) for p in parts)
            if weight <= budget:
                best = max(best, sum(vals[i] for i in combo))
    return best


def test_item_weights_on_shared_branch():
    # rule 1's branch (mnp) shares nodes m, n with rule 0's (mn); only p and
    # its own link remain once rule 0 is expanded
    dictionary = [ScoredString("abcde", 1)]
    ruleset = parse_rules("abc\tmn\nabc\tmnp\n")
    items = compute_items(dictionary, ruleset)
    by_id = {it.rule_id: it for it in items}
    assert by_id[0].weight == 2 * FRESH + LINK
    assert by_id[0].min_weight == LINK  # both nodes shadowed by rule 1
    assert by_id[1].weight == 3 * FRESH + LINK
    assert by_id[1].min_weight == FRESH + LINK  # p is unique to rule 1
    assert by_id[0].part_id == by_id[1].part_id


def test_total_weight_counts_shared_nodes_once():
    dictionary = [ScoredString("abcde", 1)]
    ruleset = parse_rules("abc\tmn\nabc\tmnp\n")
    planner = make_planner(dictionary, ruleset)
    assert planner.total_joint_bytes == 3 * FRESH + 2 * LINK


def test_fully_shadowed_branch_still_costs_its_link():
    # cab->cx grows the same fresh node under "c" as ab->x, but the two
    # rewrites fire over different synonym lengths, so each keeps its own
    # link record and min_weight stays positive
    dictionary = [ScoredString("cab", 1)]
    ruleset = parse_rules("ab\tx\ncab\tcx\n")
    items = compute_items(dictionary, ruleset)
    assert [it.min_weight for it in items] == [LINK, LINK]
    assert all(it.weight == FRESH + LINK for it in items)
    planner = make_planner(dictionary, ruleset)
    assert planner.total_joint_bytes == FRESH + 2 * LINK


def test_disjoint_rules_land_in_separate_parts():
    dictionary = [ScoredString("abcde", 1)]
    ruleset = parse_rules("ab\tqq\nde\tzz\n")
    items = compute_items(dictionary, ruleset)
    assert items[0].part_id != items[1].part_id
    assert all(it.min_weight == it.weight for it in items)


def test_partition_items_validates_inputs():
    dictionary = [ScoredString("abcde", 1)]
    ruleset = parse_rules("ab\tqq\nde\tzz\n")
    items = compute_items(dictionary, ruleset)
    parts = partition_items(items, dictionary, ruleset)
    assert [p.rule_ids for p in parts] == [(0,), (1,)]
    forged = [KnapsackItem(0, 1, 10, 10, 0), KnapsackItem(1, 1, 10, 10, 0)]
    with pytest.raises(ValidationError):
        partition_items(forged, dictionary, ruleset)


def test_exact_weight_is_incremental():
    dictionary = [ScoredString("abcde", 1)]
    ruleset = parse_rules("abc\tmn\nabc\tmnp\n")
    planner = make_planner(dictionary, ruleset)
    [part] = planner.parts
    by_id = planner.items_by_id
    assert exact_weight(by_id[1], part, frozenset()) == by_id[1].weight
    assert exact_weight(by_id[1], part, frozenset({0})) == FRESH + LINK
    assert exact_weight(by_id[0], part, frozenset({1})) == LINK


def test_incremental_matches_joint_difference_on_random_instances():
    rng = random.Random(12)
    for _ in range(60):
        dictionary, ruleset, _ = random_instance(rng, max_strings=8, max_rules=5)
        planner = make_planner(dictionary, ruleset)
        rids = [it.rule_id for it in planner.items]
        if not rids:
            continue
        for _ in range(6):
            rid = rng.choice(rids)
            included = frozenset(rng.sample(rids, rng.randint(0, len(rids)))) - {rid}
            want = planner.joint_bytes(included | {rid}) - planner.joint_bytes(included)
            assert planner.incremental_bytes(rid, included) == want


def test_bound_functions_hand_case():
    items = [
        KnapsackItem(0, 60, 10, 10, 0),
        KnapsackItem(1, 100, 20, 20, 1),
        KnapsackItem(2, 120, 30, 30, 2),
    ]
    order = sort_items(items)
    assert [it.rule_id for it in order] == [0, 1, 2]
    assert upper_bound(order, 0, 0, 0, 50) == pytest.approx(60 + 100 + 120 * (20 / 30))
    assert lower_bound(order, 0, 0, 0, 50) == 160
    assert upper_bound(order, 0, 0, 0, 0) == 0
    assert lower_bound(order, 3, 5, 0, 50) == 5


def test_item_validation_rejects_degenerate_weights():
    with pytest.raises(ValidationError):
        KnapsackItem(0, 1, 10, 0, 0)
    with pytest.raises(ValidationError):
        KnapsackItem(0, 1, 5, 10, 0)
    with pytest.raises(ValidationError):
        KnapsackItem(0, 0, 10, 10, 0)


def test_solver_on_random_instances_matches_exhaustive():
    rng = random.Random(13)
    solved = 0
    while solved < 200:
        dictionary, ruleset, _ = random_instance(rng, max_strings=10, max_rules=7, sigma="abc")
        planner = make_planner(dictionary, ruleset)
        if not planner.items or len(planner.items) > 15:
            continue
        budget = rng.randint(0, planner.total_joint_bytes)
        sol = solve_knapsack_bb(planner.items, planner.parts, budget)
        assert sol.exact
        assert sol.weight <= budget
        assert sol.value == exhaustive_best(planner.items, planner.parts, budget)
        assert set(sol.selected).isdisjoint(sol.excluded)
        assert set(sol.selected) | set(sol.excluded) == {it.rule_id for it in planner.items}
        solved += 1


def test_solver_rejects_negative_budget():
    with pytest.raises(ValidationError):
        solve_knapsack_bb([], [], -1)


def test_node_cap_falls_back_to_feasible_greedy():
    dictionary = [ScoredString("abcabc", 1), ScoredString("bcabca", 2)]
    ruleset = parse_rules("ab\tqq\nbc\tzz\nca\tyy\n")
    planner = make_planner(dictionary, ruleset)
    budget = next(
        b
        for b in range(planner.total_joint_bytes, 0, -7)
        if solve_knapsack_bb(planner.items, planner.parts, b).nodes_explored > 1
    )
    sol = solve_knapsack_bb(planner.items, planner.parts, budget, node_cap=1)
    assert not sol.exact
    assert sol.weight <= budget
    greedy = lower_bound(sort_items(planner.items), 0, 0, 0, budget)
    assert sol.value >= greedy


def test_alpha_validation():
    dictionary = [ScoredString("ab", 1)]
    with pytest.raises(ValidationError):
        build_ht(dictionary, parse_rules(""), 1.5)


def test_alpha_endpoints_reproduce_the_other_structures(two_string_corpus):
    dictionary, ruleset = two_string_corpus
    tt = build_tt(dictionary, ruleset)
    et = build_et(dictionary, ruleset)
    ht0 = build_ht(dictionary, ruleset, 0.0)
    ht1 = build_ht(dictionary, ruleset, 1.0)
    assert ht0.selected == frozenset()
    assert ht0.size_bytes() == tt.size_bytes()
    assert ht1.selected == {0, 1}
    assert ht1.size_bytes() == et.size_bytes()
    assert sum(1 for _ in ht1.rule_trie.iter_nodes()) == 1  # bare root, uncounted


def test_partial_alpha_splits_rules(two_string_corpus):
    dictionary, ruleset = two_string_corpus
    ht = build_ht(dictionary, ruleset, 0.5)
    assert 0 < len(ht.selected) < len(ruleset)
    tt = build_tt(dictionary, ruleset)
    et = build_et(dictionary, ruleset)
    assert tt.size_bytes() < ht.size_bytes() < et.size_bytes()
    assert ht.solution is not None and ht.solution.exact


def test_budget_is_fraction_of_full_expansion(two_string_corpus):
    dictionary, ruleset = two_string_corpus
    planner = make_planner(dictionary, ruleset)
    ht = build_ht(dictionary, ruleset, 0.5)
    assert ht.budget_bytes == round(0.5 * planner.total_joint_bytes)
    assert ht.solution.weight <= ht.budget_bytes


def test_assemble_matches_build(two_string_corpus):
    dictionary, ruleset = two_string_corpus
    ht = build_ht(dictionary, ruleset, 0.5)
    rebuilt = assemble_ht(dictionary, ruleset, ht.selected, ht.alpha, ht.budget_bytes)
    assert rebuilt.size_bytes() == ht.size_bytes()
    for q in ["abmp", "amn", "ab", "", "mpde"]:
        assert rebuilt.topk(q, 5) == ht.topk(q, 5)


def test_matches_oracle_across_alphas():
    rng = random.Random(14)
    checked = 0
    for _ in range(60):
        dictionary, ruleset, alphabet = random_instance(rng)
        structures = [build_ht(dictionary, ruleset, a) for a in (0.0, 0.3, 0.7, 1.0)]
        for _ in range(4):
            q = "".join(rng.choices(alphabet, k=rng.randint(0, 6)))
            k = rng.choice([1, 3, 10])
            try:
                want = [(c.text, c.score) for c in oracle_topk(dictionary, ruleset, q, k)]
            except ExpansionLimitError:
                continue
            for ht in structures:
                assert [(c.text, c.score) for c in ht.topk(q, k)] == want, (q, k, ht.alpha)
            checked += 1
    assert checked > 150
