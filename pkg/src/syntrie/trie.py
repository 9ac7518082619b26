"""Scored byte-level trie shared by all index structures.

Strings are stored as UTF-8 byte paths.  Every node carries the maximum
score found anywhere below it, which is what makes exact best-first top-k
enumeration possible: a node's max_score is an admissible upper bound for
every completion in its subtree.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, fields

from .errors import ValidationError


@dataclass(frozen=True)
class ScoredString:
    """A dictionary entry: completion text plus its ranking score."""

    text: str
    score: int


@dataclass(frozen=True)
class CostModel:
    """Byte accounting used for size reports.

    Node labels are one byte each.  Only relative sizes matter; the defaults
    are a representative in-memory node layout.
    """

    node_header_bytes: int = 16
    per_child_ref_bytes: int = 8
    per_link_bytes: int = 12
    score_bytes: int = 4

    def __post_init__(self) -> None:
        for f in fields(self):
            if getattr(self, f.name) <= 0:
                raise ValidationError(f"cost model field {f.name} must be > 0")

    @property
    def node_bytes(self) -> int:
        """Fixed cost of one node: header + 1-byte label + score slot."""
        return self.node_header_bytes + 1 + self.score_bytes


DEFAULT_COST_MODEL = CostModel()


@dataclass(frozen=True)
class Completion:
    """One ranked result.

    ``rewrites`` lists the synonym substitutions used to reach the string, as
    (rule id, byte start, byte end) spans over the original query.  Spans are
    disjoint and ordered; an empty tuple means plain prefix match.
    """

    text: str
    score: int
    rewrites: tuple[tuple[int, int, int], ...] = ()


class SynonymLink:
    """Edge from a synonym-spelling end node back into the dictionary trie.

    ``delta`` is len(lhs) - len(rhs) of the originating rule and is used to
    validate which occurrence a link belongs to by walking up the dictionary
    trie.  ``rhs_len`` is stored because expanded branches can share their
    end node between rules whose synonyms have different lengths.
    """

    __slots__ = ("target", "delta", "rule_id", "rhs_len")

    def __init__(self, target: "TrieNode", delta: int, rule_id: int, rhs_len: int):
        self.target = target
        self.delta = delta
        self.rule_id = rule_id
        self.rhs_len = rhs_len

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"SynonymLink(rule={self.rule_id}, delta={self.delta})"


class TrieNode:
    __slots__ = (
        "label",
        "parent",
        "depth",
        "children",
        "max_score",
        "terminal_score",
        "is_dict",
        "links",
    )

    def __init__(self, label: int, parent: "TrieNode | None", is_dict: bool):
        self.label = label  # single byte; -1 for the root
        self.parent = parent
        self.depth = 0 if parent is None else parent.depth + 1
        self.children: dict[int, TrieNode] | None = None
        self.max_score = 0
        self.terminal_score: int | None = None
        self.is_dict = is_dict
        self.links: list[SynonymLink] | None = None

    def child(self, label: int) -> "TrieNode | None":
        return self.children.get(label) if self.children else None

    def add_child(self, label: int, is_dict: bool) -> "TrieNode":
        node = TrieNode(label, self, is_dict)
        if self.children is None:
            self.children = {}
        self.children[label] = node
        return node

    def add_link(self, target: "TrieNode", delta: int, rule_id: int, rhs_len: int) -> bool:
        """Attach a link unless an equivalent (target, delta, rhs_len) one exists.

        Links agreeing on all three fields describe the same rewrite (same
        span length, same landing node), so one copy suffices; links that
        differ only in rhs_len fire under different conditions and must both
        be kept.
        """
        if self.links is None:
            self.links = []
        for lk in self.links:
            if lk.target is target and lk.delta == delta and lk.rhs_len == rhs_len:
                return False
        self.links.append(SynonymLink(target, delta, rule_id, rhs_len))
        return True

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"TrieNode({full_string(self)!r}, max={self.max_score})"


class Trie:
    """A byte trie with one root; all mutation goes through module functions."""

    def __init__(self, dict_root: bool = True):
        self.root = TrieNode(-1, None, dict_root)

    def iter_nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if node.children:
                stack.extend(node.children.values())


def insert_string(trie: Trie, data: bytes, score: int) -> TrieNode:
    """Insert a dictionary string; duplicates keep the maximum score.

    max_score aggregates are NOT maintained here; call recompute_max_scores
    once after the last insert.
    """
    if not data:
        raise ValidationError("cannot insert an empty string")
    if score < 1:
        raise ValidationError(f"score must be >= 1, got {score}")
    node = trie.root
    for b in data:
        nxt = node.child(b)
        if nxt is None:
            nxt = node.add_child(b, is_dict=True)
        else:
            nxt.is_dict = True
        node = nxt
    if node.terminal_score is None or score > node.terminal_score:
        node.terminal_score = score
    return node


def insert_path(trie: Trie, data: bytes) -> TrieNode:
    """Insert an unscored path (rule-trie side); returns the end node."""
    if not data:
        raise ValidationError("cannot insert an empty path")
    node = trie.root
    for b in data:
        nxt = node.child(b)
        if nxt is None:
            nxt = node.add_child(b, is_dict=False)
        node = nxt
    return node


def recompute_max_scores(trie: Trie) -> None:
    """Set every node's max_score to the max terminal score below it.

    Nodes with no scored descendants (synonym-only branches, rule-trie paths)
    end up with max_score 0.
    """

    def visit(node: TrieNode) -> int:
        best = node.terminal_score or 0
        if node.children:
            for child in node.children.values():
                best = max(best, visit(child))
        node.max_score = best
        return best

    visit(trie.root)


def locus(start_node: TrieNode, query: bytes) -> tuple[TrieNode, int]:
    """Deepest node reachable from start_node along a prefix of ``query``.

    Returns (node, bytes consumed); a partial match is a normal result and
    consuming zero bytes returns start_node itself.
    """
    node = start_node
    consumed = 0
    for b in query:
        nxt = node.child(b)
        if nxt is None:
            break
        node = nxt
        consumed += 1
    return node, consumed


def path_nodes(trie: Trie, data: bytes) -> list[TrieNode]:
    """Nodes along ``data``'s path, root first; the path must exist."""
    nodes = [trie.root]
    node = trie.root
    for b in data:
        node = node.child(b)
        nodes.append(node)
    return nodes


def full_string(node: TrieNode) -> bytes:
    """Concatenated labels from the root down to ``node``."""
    labels = []
    while node.parent is not None:
        labels.append(node.label)
        node = node.parent
    return bytes(reversed(labels))


def size_bytes(trie: Trie, model: CostModel = DEFAULT_COST_MODEL) -> int:
    """Total bytes of the trie under ``model``: nodes + child refs + links."""
    total = 0
    for node in trie.iter_nodes():
        total += node_cost(node, model)
    return total


def node_cost(node: TrieNode, model: CostModel) -> int:
    cost = model.node_bytes
    if node.children:
        cost += len(node.children) * model.per_child_ref_bytes
    if node.links:
        cost += len(node.links) * model.per_link_bytes
    return cost


_EXPAND = 0
_EMIT = 1

Rewrites = tuple[tuple[int, int, int], ...]


def best_first_topk(seeds, k: int) -> list[Completion]:
    """Exact top-k enumeration under a set of seed nodes.

    ``seeds`` is an iterable of (node, rewrites) pairs whose subtrees hold
    every candidate completion; only dictionary nodes are traversed, so
    synonym-only branches never surface.  Output is sorted by score
    descending, ties by ascending text.  A node that is both terminal and
    internal enters the queue as a separate virtual-leaf entry keyed by its
    own terminal score, which keeps every queue key an admissible upper
    bound.  Entries tied with the k-th best score are drained before the
    final sort so tie-breaking is exact.
    """
    if k <= 0:
        return []
    heap: list[tuple] = []
    seq = 0
    queued: set[int] = set()
    for node, rewrites in seeds:
        if not node.is_dict or id(node) in queued:
            continue
        queued.add(id(node))
        heap.append((-node.max_score, seq, _EXPAND, node, rewrites))
        seq += 1
    heapq.heapify(heap)

    emitted: dict[bytes, tuple[int, Rewrites]] = {}
    kth_scores: list[int] = []  # k largest scores seen, ascending

    while heap:
        if len(kth_scores) >= k and -heap[0][0] < kth_scores[0]:
            break
        neg_key, _, kind, node, rewrites = heapq.heappop(heap)
        if kind == _EMIT:
            text = full_string(node)
            prev = emitted.get(text)
            if prev is None:
                emitted[text] = (-neg_key, rewrites)
                if len(kth_scores) < k:
                    heapq.heappush(kth_scores, -neg_key)
                elif -neg_key > kth_scores[0]:
                    heapq.heapreplace(kth_scores, -neg_key)
            elif rewrites < prev[1]:
                emitted[text] = (prev[0], rewrites)
            continue
        if node.terminal_score is not None:
            heapq.heappush(heap, (-node.terminal_score, seq, _EMIT, node, rewrites))
            seq += 1
        if node.children:
            for child in node.children.values():
                if child.is_dict and id(child) not in queued:
                    queued.add(id(child))
                    heapq.heappush(heap, (-child.max_score, seq, _EXPAND, child, rewrites))
                    seq += 1

    ranked = sorted(emitted.items(), key=lambda item: (-item[1][0], item[0]))
    return [
        Completion(text.decode("utf-8"), score, rewrites)
        for text, (score, rewrites) in ranked[:k]
    ]
