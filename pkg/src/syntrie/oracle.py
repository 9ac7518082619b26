"""Structure-independent reference semantics.

Everything here is deliberately brute force: enumerate every rewrite of a
query, scan the dictionary, sort.  The index structures are tested against
these functions, never the other way around.  Exponential by design; the
``limit`` arguments exist to fail loudly on pathological rule sets.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ExpansionLimitError
from .rules import RuleSet, substring_offsets
from .trie import Completion, Rewrites, ScoredString

DEFAULT_LIMIT = 10_000


@dataclass(frozen=True)
class ReplacedString:
    """A dictionary-form rewrite of a query.

    ``rewrites`` holds (rule id, start, end) spans over the original query;
    spans are disjoint, ordered, and each matched that rule's rhs.
    """

    text: bytes
    rewrites: Rewrites


@dataclass(frozen=True)
class BaselineVariant:
    """A query-form expansion of a dictionary string (materialized baseline).

    ``spans`` are the substituted regions in variant coordinates, used to
    tell full-rhs prefix matches apart from matches that would cut a
    substitution in half.
    """

    text: bytes
    source: ScoredString
    spans: tuple[tuple[int, int], ...]


def replaced_strings(p: str | bytes, ruleset: RuleSet, limit: int = DEFAULT_LIMIT) -> list[ReplacedString]:
    """All rewrites of query ``p`` by substituting disjoint full rhs spans.

    Substituted output is never re-matched (no chaining) and ``p`` itself is
    always included.  Raises ExpansionLimitError past ``limit`` variants.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    pb = p.encode("utf-8") if isinstance(p, str) else p
    results: list[ReplacedString] = []

    def rec(i: int, parts: list[bytes], rewrites: Rewrites) -> None:
        if i == len(pb):
            if len(results) >= limit:
                raise ExpansionLimitError(
                    f"more than {limit} replaced strings for query {pb!r}"
                )
            results.append(ReplacedString(b"".join(parts), rewrites))
            return
        for rule in ruleset:
            end = i + len(rule.rhs_b)
            if pb[i:end] == rule.rhs_b:
                parts.append(rule.lhs_b)
                rec(end, parts, rewrites + ((rule.id, i, end),))
                parts.pop()
        parts.append(pb[i : i + 1])
        rec(i + 1, parts, rewrites)
        parts.pop()

    rec(0, [], ())
    return results


def match_set(
    dictionary: list[ScoredString], ruleset: RuleSet, p: str | bytes, limit: int = DEFAULT_LIMIT
) -> dict[str, tuple[int, Rewrites]]:
    """Every dictionary string some rewrite of ``p`` is a prefix of.

    Maps text -> (score, lexicographically smallest witnessing rewrites).
    Duplicate dictionary strings keep their maximum score.
    """
    scores: dict[str, int] = {}
    for entry in dictionary:
        if entry.text not in scores or entry.score > scores[entry.text]:
            scores[entry.text] = entry.score
    encoded = [(text.encode("utf-8"), text) for text in scores]
    matched: dict[str, tuple[int, Rewrites]] = {}
    for rs in replaced_strings(p, ruleset, limit):
        for raw, text in encoded:
            if raw.startswith(rs.text):
                prev = matched.get(text)
                if prev is None or rs.rewrites < prev[1]:
                    matched[text] = (scores[text], rs.rewrites)
    return matched


def oracle_topk(
    dictionary: list[ScoredString],
    ruleset: RuleSet,
    p: str | bytes,
    k: int,
    limit: int = DEFAULT_LIMIT,
) -> list[Completion]:
    """Ground-truth top-k: score descending, ties by ascending text."""
    if k <= 0:
        return []
    matched = match_set(dictionary, ruleset, p, limit)
    ranked = sorted(matched.items(), key=lambda item: (-item[1][0], item[0]))
    return [Completion(text, score, rewrites) for text, (score, rewrites) in ranked[:k]]


def expand_string(s: str | bytes, ruleset: RuleSet, limit: int = DEFAULT_LIMIT) -> list[tuple[bytes, tuple[tuple[int, int], ...]]]:
    """All variants of ``s`` from substituting disjoint lhs occurrences with rhs.

    Returns (variant bytes, substituted spans in variant coordinates).
    """
    sb = s.encode("utf-8") if isinstance(s, str) else s
    variants: list[tuple[bytes, tuple[tuple[int, int], ...]]] = []
    seen: set[tuple[bytes, tuple[tuple[int, int], ...]]] = set()

    def rec(i: int, parts: list[bytes], out_len: int, spans: tuple[tuple[int, int], ...]) -> None:
        if i == len(sb):
            key = (b"".join(parts), spans)
            if key not in seen:
                if len(variants) >= limit:
                    raise ExpansionLimitError(
                        f"more than {limit} expanded variants for string {sb!r}"
                    )
                seen.add(key)
                variants.append(key)
            return
        for rule in ruleset:
            end = i + len(rule.lhs_b)
            if sb[i:end] == rule.lhs_b:
                parts.append(rule.rhs_b)
                rec(end, parts, out_len + len(rule.rhs_b), spans + ((out_len, out_len + len(rule.rhs_b)),))
                parts.pop()
        parts.append(sb[i : i + 1])
        rec(i + 1, parts, out_len + 1, spans)
        parts.pop()

    rec(0, [], 0, ())
    return variants


def build_baseline_expanded_set(
    dictionary: list[ScoredString], ruleset: RuleSet, limit: int = DEFAULT_LIMIT
) -> list[BaselineVariant]:
    """Materialize every rule-expanded variant of every dictionary string.

    This is the naive baseline the trie structures replace; it blows up
    exponentially on permissive rule sets, which is exactly what the limit
    guards against.  Reference use only.
    """
    out: list[BaselineVariant] = []
    for entry in dictionary:
        for text, spans in expand_string(entry.text, ruleset, limit):
            out.append(BaselineVariant(text, entry, spans))
    return out


def baseline_matches(variant: BaselineVariant, p: bytes) -> bool:
    """Full-rhs prefix match: p is a prefix that does not cut any span."""
    if not variant.text.startswith(p):
        return False
    return all(not (start < len(p) < end) for start, end in variant.spans)
