"""Synonym rule model, TSV parsing, and applicability scanning.

Direction convention: ``lhs`` is the dictionary-side spelling and ``rhs`` the
query-side spelling.  A rule fires when the query contains ``rhs`` and the
dictionary string contains ``lhs`` at the corresponding position.
Bidirectional synonymy is expressed by listing both directed rules.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ValidationError


@dataclass(frozen=True)
class SynonymRule:
    id: int
    lhs: str
    rhs: str

    def __post_init__(self) -> None:
        if not self.lhs or not self.rhs:
            raise ValidationError("rule sides must be non-empty")
        if self.lhs == self.rhs:
            raise ValidationError(f"rule lhs equals rhs: {self.lhs!r}")
        object.__setattr__(self, "lhs_b", self.lhs.encode("utf-8"))
        object.__setattr__(self, "rhs_b", self.rhs.encode("utf-8"))

    lhs_b: bytes = field(init=False, repr=False, compare=False, default=b"")
    rhs_b: bytes = field(init=False, repr=False, compare=False, default=b"")

    @property
    def delta(self) -> int:
        """len(lhs) - len(rhs) in bytes; may be negative."""
        return len(self.lhs_b) - len(self.rhs_b)


class RuleSet:
    """Immutable collection of rules with dense ids and an rhs index."""

    def __init__(self, rules: list[SynonymRule]):
        self.rules = list(rules)
        for i, rule in enumerate(self.rules):
            if rule.id != i:
                raise ValidationError("rule ids must be dense from 0")
        self.rhs_index: dict[bytes, list[SynonymRule]] = {}
        for rule in self.rules:
            self.rhs_index.setdefault(rule.rhs_b, []).append(rule)

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def __getitem__(self, rule_id: int) -> SynonymRule:
        return self.rules[rule_id]


def parse_rules(text: str) -> RuleSet:
    """Parse ``lhs<TAB>rhs`` lines; '#' lines are comments, duplicates dropped."""
    rules: list[SynonymRule] = []
    seen: set[tuple[str, str]] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValidationError(f"line {lineno}: expected 'lhs<TAB>rhs', got {line!r}")
        lhs, rhs = parts
        if not lhs or not rhs:
            raise ValidationError(f"line {lineno}: empty rule side")
        if lhs == rhs:
            raise ValidationError(f"line {lineno}: lhs equals rhs ({lhs!r})")
        if (lhs, rhs) in seen:
            continue
        seen.add((lhs, rhs))
        rules.append(SynonymRule(len(rules), lhs, rhs))
    return RuleSet(rules)


def serialize_rules(ruleset: RuleSet) -> str:
    return "".join(f"{r.lhs}\t{r.rhs}\n" for r in ruleset)


def locus_points(rule: SynonymRule, s: str | bytes) -> list[int]:
    """All byte offsets where rule.lhs occurs in s, including overlaps."""
    data = s.encode("utf-8") if isinstance(s, str) else s
    return substring_offsets(rule.lhs_b, data)


def substring_offsets(needle: bytes, haystack: bytes) -> list[int]:
    offsets = []
    start = 0
    while True:
        i = haystack.find(needle, start)
        if i < 0:
            return offsets
        offsets.append(i)
        start = i + 1


class LhsScanner:
    """Aho-Corasick automaton over every lhs; finds all occurrences in one pass.

    Scanning a string costs O(len + matches) instead of one substring search
    per rule, which is what makes building over large corpora tractable.
    """

    def __init__(self, ruleset: RuleSet):
        self._goto: list[dict[int, int]] = [{}]
        self._out: list[list[SynonymRule]] = [[]]
        for rule in ruleset:
            state = 0
            for b in rule.lhs_b:
                nxt = self._goto[state].get(b)
                if nxt is None:
                    nxt = len(self._goto)
                    self._goto[state][b] = nxt
                    self._goto.append({})
                    self._out.append([])
                state = nxt
            self._out[state].append(rule)

        fail = [0] * len(self._goto)
        queue = list(self._goto[0].values())
        head = 0
        while head < len(queue):
            state = queue[head]
            head += 1
            for b, nxt in self._goto[state].items():
                queue.append(nxt)
                f = fail[state]
                while f and b not in self._goto[f]:
                    f = fail[f]
                fail[nxt] = self._goto[f].get(b, 0)
                if fail[nxt] == nxt:
                    fail[nxt] = 0
                self._out[nxt] = self._out[nxt] + self._out[fail[nxt]]
        self._fail = fail

    def scan(self, haystack: bytes) -> list[tuple[SynonymRule, int]]:
        """All (rule, byte offset) occurrences of any lhs, overlaps included."""
        goto, fail, out = self._goto, self._fail, self._out
        state = 0
        found: list[tuple[SynonymRule, int]] = []
        for i, b in enumerate(haystack):
            while state and b not in goto[state]:
                state = fail[state]
            state = goto[state].get(b, 0)
            if out[state]:
                for rule in out[state]:
                    found.append((rule, i + 1 - len(rule.lhs_b)))
        return found


def applicable_rules(ruleset: RuleSet, s: str | bytes) -> list[tuple[SynonymRule, list[int]]]:
    """Every rule with at least one lhs occurrence on s, with its offsets."""
    data = s.encode("utf-8") if isinstance(s, str) else s
    out = []
    for rule in ruleset:
        offsets = substring_offsets(rule.lhs_b, data)
        if offsets:
            out.append((rule, offsets))
    return out
