"""Command line front end: build snapshots, query them, benchmark, serve."""

from __future__ import annotations

import argparse
import sys

from . import bench as bench_mod
from . import snapshot
from .errors import ValidationError
from .expansion import build_et
from .hybrid import build_ht
from .rules import RuleSet, parse_rules
from .twin import build_tt


def _load_inputs(args) -> tuple[list, RuleSet]:
    dictionary = bench_mod.load_dictionary(args.dict)
    with open(args.rules, "r", encoding="utf-8") as fh:
        ruleset = parse_rules(fh.read())
    return dictionary, ruleset


def cmd_build(args) -> int:
    dictionary, ruleset = _load_inputs(args)
    if args.kind == "tt":
        structure = build_tt(dictionary, ruleset)
    elif args.kind == "et":
        structure = build_et(dictionary, ruleset)
    else:
        structure = build_ht(dictionary, ruleset, args.alpha, node_cap=args.node_cap)
    snapshot.dump(structure, args.output)
    stats = bench_mod.measure(structure)
    print(
        f"built {args.kind} over {stats.string_count} strings, {stats.rule_count} rules: "
        f"{stats.bytes_total} bytes -> {args.output}"
    )
    return 0


def format_rewrites(ruleset: RuleSet, rewrites) -> str:
    return ";".join(
        f"{ruleset[rid].lhs}->{ruleset[rid].rhs}@[{start},{end})" for rid, start, end in rewrites
    )


def cmd_query(args) -> int:
    structure = snapshot.load(args.snapshot)
    for completion in structure.topk(args.query, args.k):
        marks = format_rewrites(structure.ruleset, completion.rewrites)
        print(f"{completion.score}\t{completion.text}\t{marks}")
    return 0


def cmd_bench(args) -> int:
    if args.dict:
        dictionary, ruleset = _load_inputs(args)
    else:
        spec = bench_mod.DatasetSpec(
            n_strings=args.n_strings, n_rules=args.n_rules, seed=args.seed
        )
        dictionary, ruleset = bench_mod.generate_synthetic(spec)
    queries = bench_mod.generate_workload(
        dictionary, ruleset, args.queries, seed=args.seed, substring_mode=args.substring_mode
    )
    results = []
    for kind in args.structures.split(","):
        kind = kind.strip()
        if kind == "tt":
            structure = build_tt(dictionary, ruleset)
        elif kind == "et":
            structure = build_et(dictionary, ruleset)
        elif kind == "ht":
            structure = build_ht(dictionary, ruleset, args.alpha, node_cap=args.node_cap)
        else:
            raise ValidationError(f"unknown structure kind {kind!r}")
        stats = bench_mod.measure(structure)
        res = bench_mod.run_benchmark(structure, queries, k=args.k)
        results.append(res)
        print(
            f"{kind}: {stats.bytes_total} bytes, mean {res.overall.mean_us:.1f} us, "
            f"median {res.overall.median_us:.1f} us, p99 {res.overall.p99_us:.1f} us"
        )
        del structure
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(bench_mod.latency_csv(results))
        print(f"wrote {args.csv}")
    return 0


def cmd_serve(args) -> int:
    from .server import CompletionService, serve_forever

    paths: dict[str, str] = {}
    if args.snapshot:
        paths["default"] = args.snapshot
    for item in args.index or []:
        name, sep, path = item.partition("=")
        if not sep or not name or not path:
            raise ValidationError(f"--index expects NAME=PATH, got {item!r}")
        paths[name] = path
    if not paths:
        raise ValidationError("provide --snapshot or at least one --index NAME=PATH")
    service = CompletionService(paths, default=args.default, webroot=args.webroot)
    print(f"serving {sorted(paths)} on http://{args.host}:{args.port}")
    serve_forever(service, args.host, args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="syntrie", description="top-k completion with synonyms")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a structure and write a snapshot")
    p.add_argument("--dict", required=True, help="dictionary TSV: string<TAB>score")
    p.add_argument("--rules", required=True, help="rules TSV: lhs<TAB>rhs")
    p.add_argument("--kind", choices=["tt", "et", "ht"], default="tt")
    p.add_argument("--alpha", type=float, default=0.5, help="hybrid expansion budget fraction")
    p.add_argument("--node-cap", type=int, default=10_000_000)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="run one lookup against a snapshot")
    p.add_argument("--snapshot", required=True)
    p.add_argument("-k", type=int, default=10)
    p.add_argument("query")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("bench", help="latency benchmark over a workload")
    p.add_argument("--dict", help="dictionary TSV; omit for a synthetic corpus")
    p.add_argument("--rules", help="rules TSV, required with --dict")
    p.add_argument("--n-strings", type=int, default=20_000)
    p.add_argument("--n-rules", type=int, default=200)
    p.add_argument("--queries", type=int, default=2000)
    p.add_argument("-k", type=int, default=10)
    p.add_argument("--structures", default="tt,et,ht")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--node-cap", type=int, default=300_000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--substring-mode", action="store_true", help="queries from substrings, not prefixes")
    p.add_argument("--csv", help="write per-length latency rows here")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="HTTP completion service")
    p.add_argument("--snapshot", help="single snapshot served as 'default'")
    p.add_argument("--index", action="append", help="NAME=PATH, repeatable")
    p.add_argument("--default", help="name of the default structure")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--webroot", help="directory of static files to host")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "bench" and bool(args.dict) != bool(args.rules):
        print("error: --dict and --rules must be given together", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
