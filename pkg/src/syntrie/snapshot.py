"""Binary snapshots for built structures.

Layout (all integers little endian):

    magic   5s   b"SYNC1"
    version u16
    kind    u8   0 = twin tries, 1 = expansion trie, 2 = hybrid
    cost    4*u32  node header, per child ref, per link, score bytes
    [hybrid only]
        alpha    f64
        budget   u64
        selected u32 count, then that many u32 rule ids
    dict    u64 length + utf-8 tab-separated dictionary block
    rules   u64 length + utf-8 tab-separated rules block
    check   u64  blake2b-8 of everything above

Snapshots embed the canonical inputs and rebuild on load, so they survive
in-memory layout changes; hybrid snapshots reuse the stored selection
instead of re-running the solver.
"""

from __future__ import annotations

import hashlib
import io
import struct

from .bench import parse_dictionary, serialize_dictionary
from .errors import SnapshotError
from .expansion import ExpansionTrie, build_et
from .hybrid import HybridTries, assemble_ht
from .rules import parse_rules, serialize_rules
from .trie import CostModel
from .twin import TwinTries, build_tt

MAGIC = b"SYNC1"
VERSION = 1
_KINDS = {"tt": 0, "et": 1, "ht": 2}
_KIND_NAMES = {v: k for k, v in _KINDS.items()}

Structure = TwinTries | ExpansionTrie | HybridTries


def dump(structure: Structure, path: str) -> None:
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<HB", VERSION, _KINDS[structure.kind]))
    cm = structure.cost_model
    buf.write(
        struct.pack(
            "<4I", cm.node_header_bytes, cm.per_child_ref_bytes, cm.per_link_bytes, cm.score_bytes
        )
    )
    if structure.kind == "ht":
        selected = sorted(structure.selected)
        buf.write(struct.pack("<dQI", structure.alpha, structure.budget_bytes, len(selected)))
        buf.write(struct.pack(f"<{len(selected)}I", *selected))
    dictionary = getattr(structure, "dictionary", None)
    if dictionary is None:
        raise SnapshotError("structure was built without retaining its inputs")
    for block in (serialize_dictionary(dictionary), serialize_rules(structure.ruleset)):
        raw = block.encode("utf-8")
        buf.write(struct.pack("<Q", len(raw)))
        buf.write(raw)
    body = buf.getvalue()
    digest = hashlib.blake2b(body, digest_size=8).digest()
    with open(path, "wb") as fh:
        fh.write(body)
        fh.write(digest)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise SnapshotError("snapshot truncated")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load(path: str) -> Structure:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < len(MAGIC) + 8:
        raise SnapshotError("snapshot truncated")
    body, digest = raw[:-8], raw[-8:]
    if hashlib.blake2b(body, digest_size=8).digest() != digest:
        raise SnapshotError("checksum mismatch")
    r = _Reader(body)
    if r.take(len(MAGIC)) != MAGIC:
        raise SnapshotError("bad magic")
    version, kind_code = r.unpack("<HB")
    if version != VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    kind = _KIND_NAMES.get(kind_code)
    if kind is None:
        raise SnapshotError(f"unknown structure kind {kind_code}")
    cm = CostModel(*r.unpack("<4I"))
    if kind == "ht":
        alpha, budget, count = r.unpack("<dQI")
        selected = frozenset(r.unpack(f"<{count}I"))
    (dict_len,) = r.unpack("<Q")
    dictionary = parse_dictionary(r.take(dict_len).decode("utf-8"))
    (rules_len,) = r.unpack("<Q")
    ruleset = parse_rules(r.take(rules_len).decode("utf-8"))
    if r.pos != len(body):
        raise SnapshotError("trailing bytes after payload")

    if kind == "tt":
        return build_tt(dictionary, ruleset, cm)
    if kind == "et":
        return build_et(dictionary, ruleset, cm)
    return assemble_ht(dictionary, ruleset, selected, alpha, budget, cm)
