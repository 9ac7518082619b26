import random

import pytest

from syntrie import ScoredString, parse_rules
from syntrie.rules import RuleSet, SynonymRule


@pytest.fixture
def two_string_corpus():
    """Tiny corpus used across structure tests: two strings, two rules."""
    dictionary = [ScoredString("abc", 5), ScoredString("cde", 2)]
    ruleset = parse_rules("bc\tmn\nc\tmp\n")
    return dictionary, ruleset


@pytest.fixture
def name_corpus():
    """Name-completion corpus with a single synonym pair."""
    dictionary = [
        ScoredString("Andrew Parker", 288),
        ScoredString("Andrew Pavlo", 247),
        ScoredString("Andrew Paterson", 10),
        ScoredString("Andy Grove", 90),
    ]
    ruleset = parse_rules("Andrew\tAndy\n")
    return dictionary, ruleset


def random_instance(rng: random.Random, max_strings=12, max_rules=4, sigma="abcd"):
    alphabet = sigma[: rng.randint(2, len(sigma))]
    n = rng.randint(1, max_strings)
    dictionary = [
        ScoredString("".join(rng.choices(alphabet, k=rng.randint(1, 6))), rng.randint(1, 50))
        for _ in range(n)
    ]
    rules: list[SynonymRule] = []
    pairs: set[tuple[str, str]] = set()
    for _ in range(rng.randint(0, max_rules)):
        lhs = "".join(rng.choices(alphabet, k=rng.randint(1, 3)))
        rhs = "".join(rng.choices(alphabet, k=rng.randint(1, 3)))
        if lhs == rhs or (lhs, rhs) in pairs:
            continue
        pairs.add((lhs, rhs))
        rules.append(SynonymRule(len(rules), lhs, rhs))
    return dictionary, RuleSet(rules), alphabet
