"""Datasets, workloads, and measurement helpers.

Covers TSV loading, a seeded synthetic dataset generator shaped like a
protein-name corpus (many strings, moderate length, a few hundred to a few
thousand rules, around two rule applications per string), query workload
generation, wall-clock latency benchmarking with per-length buckets, and
structure size breakdowns that always sum to the reported total.
"""

from __future__ import annotations

import random
import statistics
import time
from dataclasses import dataclass, field

from .errors import ValidationError
from .rules import LhsScanner, RuleSet, SynonymRule
from .trie import ScoredString, node_cost


def parse_dictionary(text: str) -> list[ScoredString]:
    """Parse ``string<TAB>score`` lines; '#' comments and blanks skipped."""
    out: list[ScoredString] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValidationError(f"line {lineno}: expected 2 tab-separated fields")
        string, raw_score = parts[0], parts[1].strip()
        if not string:
            raise ValidationError(f"line {lineno}: empty string")
        try:
            score = int(raw_score)
        except ValueError:
            raise ValidationError(f"line {lineno}: score {raw_score!r} is not an integer")
        if score < 1:
            raise ValidationError(f"line {lineno}: score must be >= 1")
        out.append(ScoredString(string, score))
    if not out:
        raise ValidationError("dictionary is empty")
    return out


def serialize_dictionary(dictionary: list[ScoredString]) -> str:
    return "".join(f"{e.text}\t{e.score}\n" for e in dictionary)


def load_dictionary(path: str) -> list[ScoredString]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_dictionary(fh.read())


@dataclass(frozen=True)
class DatasetSpec:
    """Knobs for the synthetic generator; same seed, same dataset."""

    n_strings: int = 100_000
    avg_len: int = 19
    n_rules: int = 1000
    alphabet_size: int = 16
    apps_per_string: float = 2.11  # target mean rule applications per string
    max_score: int = 100_000
    seed: int = 7

    def __post_init__(self) -> None:
        if self.n_strings < 1 or self.n_rules < 0:
            raise ValidationError("n_strings must be >= 1 and n_rules >= 0")
        if not 2 <= self.avg_len <= 200:
            raise ValidationError("avg_len must be in [2, 200]")
        if not 2 <= self.alphabet_size <= 26:
            raise ValidationError("alphabet_size must be in [2, 26]")


def generate_synthetic(spec: DatasetSpec) -> tuple[list[ScoredString], RuleSet]:
    """Deterministic corpus plus rules that are guaranteed to apply.

    Strings use a skewed letter distribution so prefixes actually share trie
    paths.  Rule left sides are sampled from dictionary substrings whose
    document frequency is close to the per-rule budget implied by
    ``apps_per_string``, which keeps the realized application rate near the
    target.
    """
    rng = random.Random(spec.seed)
    alphabet = "abcdefghijklmnopqrstuvwxyz"[: spec.alphabet_size]
    weights = [1.0 / (i + 1) for i in range(spec.alphabet_size)]

    seen: set[str] = set()
    dictionary: list[ScoredString] = []
    while len(dictionary) < spec.n_strings:
        length = max(4, min(2 * spec.avg_len, round(rng.gauss(spec.avg_len, spec.avg_len / 4))))
        text = "".join(rng.choices(alphabet, weights, k=length))
        if text in seen:
            continue
        seen.add(text)
        dictionary.append(ScoredString(text, rng.randint(1, spec.max_score)))

    if spec.n_rules == 0:
        return dictionary, RuleSet([])

    # Document frequency of substrings of length 2..4, sampled if large.
    df: dict[str, int] = {}
    sample = dictionary if len(dictionary) <= 20_000 else rng.sample(dictionary, 20_000)
    for entry in sample:
        text = entry.text
        subs = {text[i : i + ln] for ln in (2, 3, 4) for i in range(len(text) - ln + 1)}
        for sub in subs:
            df[sub] = df.get(sub, 0) + 1

    scale = len(dictionary) / len(sample)
    target_df = spec.apps_per_string * len(dictionary) / spec.n_rules
    candidates = sorted(df, key=lambda sub: (abs(df[sub] * scale - target_df), sub))

    rules: list[SynonymRule] = []
    used_pairs: set[tuple[str, str]] = set()
    for lhs in candidates:
        if len(rules) >= spec.n_rules:
            break
        rhs = "".join(rng.choices(alphabet, weights, k=rng.randint(1, 4)))
        if rhs == lhs or (lhs, rhs) in used_pairs:
            continue
        used_pairs.add((lhs, rhs))
        rules.append(SynonymRule(len(rules), lhs, rhs))
    if len(rules) < spec.n_rules:
        raise ValidationError("not enough distinct substrings to build the rule set")
    return dictionary, RuleSet(rules)


def applications_per_string(dictionary: list[ScoredString], ruleset: RuleSet) -> float:
    scanner = LhsScanner(ruleset)
    total = sum(len(scanner.scan(entry.text.encode("utf-8"))) for entry in dictionary)
    return total / len(dictionary)


def generate_workload(
    dictionary: list[ScoredString],
    ruleset: RuleSet,
    n_queries: int,
    seed: int = 11,
    substring_mode: bool = False,
    max_rewrites: int = 2,
) -> list[str]:
    """Queries a user could plausibly type: pieces of rewritten strings.

    Each query picks a dictionary string, replaces up to ``max_rewrites``
    disjoint lhs occurrences with the rule's rhs, then takes a prefix of
    length >= 2 (or an arbitrary substring with ``substring_mode``).
    """
    rng = random.Random(seed)
    scanner = LhsScanner(ruleset)
    queries: list[str] = []
    while len(queries) < n_queries:
        raw = rng.choice(dictionary).text.encode("utf-8")
        occs = scanner.scan(raw)
        rng.shuffle(occs)
        budget = rng.randint(0, max_rewrites)
        taken: list[tuple[int, int, bytes]] = []
        for rule, off in occs:
            if len(taken) >= budget:
                break
            end = off + len(rule.lhs_b)
            if all(end <= s or off >= e for s, e, _ in taken):
                taken.append((off, end, rule.rhs_b))
        variant = raw
        for s, e, rhs in sorted(taken, reverse=True):
            variant = variant[:s] + rhs + variant[e:]
        # rhs substitutions sit on character boundaries, so this decodes
        text = variant.decode("utf-8")
        if len(text) < 2:
            continue
        if substring_mode:
            start = rng.randint(0, len(text) - 2)
            stop = rng.randint(start + 2, len(text))
            queries.append(text[start:stop])
        else:
            queries.append(text[: rng.randint(2, len(text))])
    return queries


@dataclass(frozen=True)
class LatencyStats:
    count: int
    mean_us: float
    median_us: float
    p99_us: float


def summarize_us(samples_ns: list[int]) -> LatencyStats:
    us = sorted(ns / 1000.0 for ns in samples_ns)
    p99 = us[min(len(us) - 1, int(0.99 * (len(us) - 1) + 0.5))]
    return LatencyStats(len(us), statistics.fmean(us), statistics.median(us), p99)


@dataclass
class BenchResult:
    structure: str
    k: int
    overall: LatencyStats
    by_length: dict[int, LatencyStats] = field(default_factory=dict)


def run_benchmark(structure, queries: list[str], k: int = 10, warmup: int = 50) -> BenchResult:
    """Time structure.topk over the workload; results bucketed by query length."""
    for q in queries[: min(warmup, len(queries))]:
        structure.topk(q, k)
    samples: dict[int, list[int]] = {}
    everything: list[int] = []
    for q in queries:
        t0 = time.perf_counter_ns()
        structure.topk(q, k)
        dt = time.perf_counter_ns() - t0
        samples.setdefault(len(q), []).append(dt)
        everything.append(dt)
    by_length = {ln: summarize_us(v) for ln, v in sorted(samples.items())}
    return BenchResult(structure.kind, k, summarize_us(everything), by_length)


def latency_csv(results: list[BenchResult]) -> str:
    lines = ["structure,len,mean_us,median_us,p99_us"]
    for res in results:
        for ln, st in res.by_length.items():
            lines.append(f"{res.structure},{ln},{st.mean_us:.3f},{st.median_us:.3f},{st.p99_us:.3f}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class StructureStats:
    """Size and shape of a built structure; byte fields sum to bytes_total."""

    kind: str
    string_count: int
    rule_count: int
    dict_node_count: int
    branch_node_count: int   # unscored nodes grown into the dictionary trie
    rule_node_count: int     # nodes in the separate rule trie, when counted
    link_count: int
    dict_bytes: int
    branch_bytes: int
    rule_trie_bytes: int

    @property
    def bytes_total(self) -> int:
        return self.dict_bytes + self.branch_bytes + self.rule_trie_bytes


def measure(structure) -> StructureStats:
    model = structure.cost_model
    dict_nodes = branch_nodes = links = 0
    dict_bytes = branch_bytes = 0
    for node in structure.dict_trie.iter_nodes():
        links += len(node.links) if node.links else 0
        if node.is_dict:
            dict_nodes += 1
            dict_bytes += node_cost(node, model)
        else:
            branch_nodes += 1
            branch_bytes += node_cost(node, model)

    rule_trie_bytes = structure.size_bytes() - dict_bytes - branch_bytes
    rule_nodes = 0
    if structure.rule_trie is not None and rule_trie_bytes:
        for node in structure.rule_trie.iter_nodes():
            rule_nodes += 1
            links += len(node.links) if node.links else 0

    stats = StructureStats(
        structure.kind,
        structure.string_count,
        len(structure.ruleset),
        dict_nodes,
        branch_nodes,
        rule_nodes,
        links,
        dict_bytes,
        branch_bytes,
        rule_trie_bytes,
    )
    assert stats.bytes_total == structure.size_bytes()
    return stats


def fit_linear(xs: list[float], ys: list[float]) -> tuple[float, float, float]:
    """Least-squares line; returns (slope, intercept, r_squared)."""
    n = len(xs)
    if n < 2:
        raise ValidationError("need at least two points")
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    if sxx == 0:
        raise ValidationError("x values are all equal")
    slope = sxy / sxx
    intercept = my - slope * mx
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    ss_tot = sum((y - my) ** 2 for y in ys)
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return slope, intercept, r2
