"""Acceptance gate: one test per contract criterion, each printing a pass line.

The full-scale tests share a single sequential sweep over the 100k-string
synthetic dataset (structures are built, measured, benchmarked, and freed one
at a time to bound memory).
"""

import gc
import itertools
import json
import random
import threading
import time
import urllib.parse
import urllib.request

import pytest

from syntrie import (
    ScoredString,
    build_et,
    build_ht,
    build_tt,
    oracle_topk,
    parse_rules,
)
from syntrie.bench import (
    DatasetSpec,
    fit_linear,
    generate_synthetic,
    generate_workload,
    run_benchmark,
)
from syntrie.cli import main as cli_main
from syntrie.errors import ExpansionLimitError
from syntrie.hybrid import make_planner, solve_knapsack_bb
from syntrie.server import CompletionService, make_server
from syntrie.snapshot import dump, load

from conftest import random_instance

NODE_CAP = 300_000


def report(capfd, line):
    with capfd.disabled():
        print(f"\n{line}", flush=True)


# --- randomized correctness ------------------------------------------------


def instance_queries(rng, dictionary, ruleset, alphabet):
    """Prefixes of (sometimes rewritten) dictionary strings plus random noise."""
    rules = list(ruleset)
    while True:
        if rng.random() < 0.7:
            text = rng.choice(dictionary).text
            if rules and rng.random() < 0.5:
                rule = rng.choice(rules)
                i = text.find(rule.lhs)
                if i >= 0:
                    text = text[:i] + rule.rhs + text[i + len(rule.lhs) :]
            yield text[: rng.randint(0, len(text))]
        else:
            yield "".join(rng.choices(alphabet, k=rng.randint(0, 8)))


def test_all_structures_match_oracle_on_randomized_instances(capfd):
    rng = random.Random(2024)
    t0 = time.time()
    instances = 0
    comparisons = 0
    while instances < 1000:
        dictionary, ruleset, alphabet = random_instance(
            rng,
            max_strings=rng.choice([10, 40, 200]),
            max_rules=rng.choice([4, 12, 20]),
            sigma="abcdef",
        )
        structures = [
            build_tt(dictionary, ruleset),
            build_et(dictionary, ruleset),
            *(build_ht(dictionary, ruleset, a) for a in (0.0, 0.5, 1.0)),
        ]
        evaluated = 0
        for q in itertools.islice(instance_queries(rng, dictionary, ruleset, alphabet), 200):
            if evaluated >= 20:
                break
            k = rng.choice([1, 3, 10])
            try:
                want = [(c.text, c.score) for c in oracle_topk(dictionary, ruleset, q, k)]
            except ExpansionLimitError:
                continue
            for s in structures:
                got = [(c.text, c.score) for c in s.topk(q, k)]
                assert got == want, (s.kind, q, k, dictionary, list(ruleset))
                comparisons += 1
            evaluated += 1
        assert evaluated >= 20
        instances += 1
    elapsed = time.time() - t0
    assert elapsed < 120, f"correctness battery took {elapsed:.0f}s"
    report(
        capfd,
        f"PASS oracle equivalence: {instances} randomized instances, "
        f"{comparisons} comparisons across tt/et/ht(0,0.5,1), {elapsed:.0f}s",
    )


def test_worked_examples(capfd):
    dictionary = [ScoredString("abc", 5), ScoredString("cde", 2)]
    ruleset = parse_rules("bc\tmn\nc\tmp\n")
    for build in (build_tt, build_et, lambda d, r: build_ht(d, r, 0.5)):
        [hit] = build(dictionary, ruleset).topk("abmp", 1)
        assert (hit.text, hit.score) == ("abc", 5)

    names = [
        ScoredString("Andrew Parker", 288),
        ScoredString("Andrew Pavlo", 247),
        ScoredString("Andrew Paterson", 10),
        ScoredString("Andy Grove", 90),
    ]
    tt = build_tt(names, parse_rules("Andrew\tAndy\n"))
    got = [(c.text, c.score) for c in tt.topk("Andy Pa", 10)]
    assert got == [
        ("Andrew Parker", 288),
        ("Andrew Pavlo", 247),
        ("Andrew Paterson", 10),
    ]
    report(capfd, 'PASS worked examples: "abmp" -> abc on tt/et/ht; "Andy Pa" -> 3 Andrew P names')


def test_knapsack_solver_matches_exhaustive_enumeration(capfd):
    rng = random.Random(99)
    t0 = time.time()
    solved = 0
    while solved < 200:
        dictionary, ruleset, _ = random_instance(rng, max_strings=10, max_rules=7, sigma="abc")
        planner = make_planner(dictionary, ruleset)
        if not 0 < len(planner.items) <= 15 or len(planner.parts) > 5:
            continue
        budget = rng.randint(0, planner.total_joint_bytes)
        sol = solve_knapsack_bb(planner.items, planner.parts, budget)
        assert sol.exact
        assert sol.weight <= budget, "feasibility violation"

        best = -1
        vals = {it.rule_id: it.value for it in planner.items}
        ids = [it.rule_id for it in planner.items]
        for r in range(len(ids) + 1):
            for combo in itertools.combinations(ids, r):
                sel = frozenset(combo)
                weight = sum(
                    p.model.joint_bytes(sel & frozenset(p.rule_ids)) for p in planner.parts
                )
                if weight <= budget:
                    best = max(best, sum(vals[i] for i in combo))
        assert sol.value == best
        solved += 1
    elapsed = time.time() - t0
    assert elapsed < 60
    report(
        capfd,
        f"PASS knapsack optimality: {solved} instances equal exhaustive enumeration, "
        f"0 feasibility violations, {elapsed:.0f}s",
    )


# --- full-scale behavior ----------------------------------------------------


@pytest.fixture(scope="module")
def full_scale():
    """Build/measure/benchmark each structure over 100k strings, one at a time."""
    dictionary, ruleset = generate_synthetic(DatasetSpec())
    queries = generate_workload(dictionary, ruleset, 10_000, seed=11)
    lens = sorted(len(q) for q in queries)
    q3 = lens[3 * len(lens) // 4]
    long_queries = [q for q in queries if len(q) >= q3]

    stats = {}

    def record(name, build):
        structure = build(dictionary, ruleset)
        res = run_benchmark(structure, queries, k=10, warmup=200)
        long_res = run_benchmark(structure, long_queries, k=10, warmup=100)
        points = [(ln, st.mean_us) for ln, st in res.by_length.items() if st.count >= 30]
        slope, _, _ = fit_linear([p[0] for p in points], [p[1] for p in points])
        stats[name] = {
            "size": structure.size_bytes(),
            "mean_us": res.overall.mean_us,
            "long_mean_us": long_res.overall.mean_us,
            "slope_us_per_char": slope,
        }
        del structure
        gc.collect()

    record("tt", build_tt)
    for alpha in (0.0, 0.25, 0.5, 0.75, 1.0):
        record(f"ht{alpha}", lambda d, r, a=alpha: build_ht(d, r, a, node_cap=NODE_CAP))
    record("et", build_et)
    return stats


def test_size_ordering_at_full_scale(full_scale, capfd):
    s = {name: v["size"] for name, v in full_scale.items()}
    assert s["tt"] < s["ht0.5"] < s["et"]
    assert s["ht0.0"] == s["tt"]
    assert s["ht1.0"] == s["et"]
    report(
        capfd,
        f"PASS size ordering: tt {s['tt']:,} < ht(0.5) {s['ht0.5']:,} < et {s['et']:,} bytes; "
        f"ht(0)=tt and ht(1)=et exactly",
    )


def test_latency_flat_in_query_length_for_expanded_trie(full_scale, capfd):
    et, tt = full_scale["et"], full_scale["tt"]
    assert et["long_mean_us"] <= tt["long_mean_us"]
    # a negative slope (long queries resolve faster) counts as flat or better
    assert et["slope_us_per_char"] <= 0.2 * tt["slope_us_per_char"]
    report(
        capfd,
        f"PASS latency shape: long-query mean et {et['long_mean_us']:.0f}us <= "
        f"tt {tt['long_mean_us']:.0f}us; slope et {et['slope_us_per_char']:.2f} vs "
        f"tt {tt['slope_us_per_char']:.2f} us/char",
    )


def test_latency_improves_with_expansion_budget(full_scale, capfd):
    alphas = ["ht0.0", "ht0.25", "ht0.5", "ht0.75", "ht1.0"]
    means = [full_scale[a]["mean_us"] for a in alphas]
    for prev, cur in zip(means, means[1:]):
        assert cur <= prev * 1.10, f"latency increased along budget sweep: {means}"
    speedup = full_scale["tt"]["long_mean_us"] / full_scale["ht0.75"]["long_mean_us"]
    assert speedup >= 1.3
    report(
        capfd,
        "PASS budget monotonicity: means "
        + " >= ".join(f"{m:.0f}us" for m in means)
        + f"; ht(0.75) {speedup:.1f}x faster than tt on long queries",
    )


def test_throughput_floor_at_full_scale(full_scale, capfd):
    worst = max((v["mean_us"], name) for name, v in full_scale.items())
    assert worst[0] < 10_000
    report(capfd, f"PASS throughput: worst mean top-10 latency {worst[0]:.0f}us ({worst[1]}) < 10ms")


def test_sizes_grow_linearly_with_string_count(capfd):
    dictionary, ruleset = generate_synthetic(DatasetSpec())
    scales = [20_000, 40_000, 60_000, 80_000, 100_000]
    builders = {
        "tt": build_tt,
        "ht0.5": lambda d, r: build_ht(d, r, 0.5, node_cap=NODE_CAP),
        "et": build_et,
    }
    fits = {}
    for name, build in builders.items():
        sizes = []
        for n in scales:
            structure = build(dictionary[:n], ruleset)
            sizes.append(structure.size_bytes())
            del structure
            gc.collect()
        _, _, r2 = fit_linear([float(n) for n in scales], [float(s) for s in sizes])
        assert r2 >= 0.99, (name, sizes, r2)
        fits[name] = r2
    report(
        capfd,
        "PASS scalability: size-vs-N linear fit r^2 "
        + ", ".join(f"{k}={v:.4f}" for k, v in fits.items()),
    )


# --- persistence and service parity -----------------------------------------


def parse_cli_lines(out):
    rows = []
    for line in out.splitlines():
        score, text, _ = line.split("\t")
        rows.append((text, int(score)))
    return rows


def test_snapshot_cli_and_http_paths_agree(tmp_path, capsys):
    rng = random.Random(424)
    dictionary, ruleset = generate_synthetic(
        DatasetSpec(n_strings=2000, n_rules=40, seed=21)
    )
    queries = generate_workload(dictionary, ruleset, 60, seed=5) + [""]

    built = {
        "tt": build_tt(dictionary, ruleset),
        "et": build_et(dictionary, ruleset),
        "ht": build_ht(dictionary, ruleset, 0.5),
    }
    paths = {}
    for name, structure in built.items():
        paths[name] = str(tmp_path / f"{name}.snap")
        dump(structure, paths[name])
    loaded = {name: load(path) for name, path in paths.items()}

    service = CompletionService(paths, default="tt")
    server = make_server(service, "127.0.0.1", 0)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    base = f"http://127.0.0.1:{server.server_address[1]}"
    try:
        checked = 0
        for q in queries:
            k = rng.choice([1, 5, 10])
            for name, structure in built.items():
                want = [(c.text, c.score) for c in structure.topk(q, k)]
                got_lib = [(c.text, c.score) for c in loaded[name].topk(q, k)]
                assert got_lib == want, (name, q)

                assert cli_main(["query", "--snapshot", paths[name], "-k", str(k), q]) == 0
                assert parse_cli_lines(capsys.readouterr().out) == want, (name, q)

                url = (
                    f"{base}/api/complete?"
                    + urllib.parse.urlencode({"q": q, "k": k, "structure": name})
                )
                with urllib.request.urlopen(url, timeout=10) as resp:
                    body = json.loads(resp.read())
                got_http = [(c["text"], c["score"]) for c in body["completions"]]
                assert got_http == want, (name, q)
                checked += 1
    finally:
        server.shutdown()
        server.server_close()
    report(
        capsys,
        f"PASS persistence parity: {checked} (query, structure) cases identical via "
        f"library, snapshot reload, command line, and HTTP",
    )
