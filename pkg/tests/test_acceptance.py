"""Acceptance suite: nine criteria, one PASS/FAIL line each.

Run under pytest (lines are gathered into the terminal summary) or
directly with ``python tests/test_acceptance.py``.
"""
import itertools
import math
import os
import random
import re
import subprocess
import sys
import time
from pathlib import Path

import pytest

HERE = Path(__file__).parent
sys.path.insert(0, str(HERE))

from metafold import data_path, mgf  # noqa: E402
from metafold.construct import crf_count, decompose, decompose_random, displayed_crf_bound, \
    enumerate_crfs  # noqa: E402
from metafold.core import DTMG, validate  # noqa: E402
from metafold.errors import MgfError, PartitionError, StateError  # noqa: E402
from metafold.gen import Bounds, random_expr, random_registry, random_twin_mapping  # noqa: E402
from metafold.laws import laws_check  # noqa: E402
from metafold.morph import (ana, cata, chain_coalgebra, check_history, chrono,
                            chunked_path_coalgebra, duplicating_coalgebra, expr_coalgebra, futu,
                            histo, hylo, numtargets, oblivious_algebra, oblivious_coalgebra,
                            path_table_algebra, rebuild_algebra, shortestpathlength)  # noqa: E402
from metafold.process import (StateOp, TraversalEvent, edge_roles, is_pruned_out,
                              realized_from, replay_ops, reverse_trace, stamp,
                              traversal_to_dtmg)  # noqa: E402
from metafold.topology import (all_opens, heyting_check, is_open, m2m_continuity_check, preimage,
                               smooth_check)  # noqa: E402

from oracles import bfs_edge_count, total_arity  # noqa: E402

SEED = 20240917
BUNDLED = ("fig1.mgf", "fig3.mgf", "chains.mgf")
RESULTS: list[str] = []


def _record(num, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {num}. {title}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def _bundled_dtmgs():
    for name in BUNDLED:
        doc = mgf.load(data_path(name))
        for view, d in doc.dtmgs:
            yield f"{name}:{view}", d


# ---------------------------------------------------------------------------
# 1. law suite
# ---------------------------------------------------------------------------

def criterion_laws():
    bounds = Bounds(max_depth=6, max_arity=4, max_types=8, max_edges=8)
    t0 = time.perf_counter()
    report = laws_check(seed=SEED, trials=1000, bounds=bounds)
    dt = time.perf_counter() - t0
    fails = sum(r.failures for r in report.results.values())
    ok = fails == 0 and len(report.results) == 13 and dt < 60
    return _record(1, "law suite", ok,
                   f"13 laws x 1000 trials, {fails} failures, {dt:.1f}s (limit 60s)")


# ---------------------------------------------------------------------------
# 2. crf counting
# ---------------------------------------------------------------------------

def _brute(m, n):
    out = set()
    for k in range(1, min(m, n) + 1):
        for outs in itertools.product(range(1, m + 1), repeat=k):
            for ins in itertools.product(range(1, n + 1), repeat=k):
                if len(set(outs)) == k and len(set(ins)) == k:
                    out.add(tuple(sorted(zip(outs, ins))))
    return out


def criterion_crfs():
    bad = []
    for m in range(5):
        for n in range(5):
            got = enumerate_crfs(m, n)
            closed = sum(math.comb(m, k) * math.comb(n, k) * math.factorial(k)
                         for k in range(1, min(m, n) + 1))
            if {p.pairs for p in got} != _brute(m, n) or len(got) != closed \
                    or len(got) != len(set(got)) or crf_count(m, n) != closed:
                bad.append((m, n))
    disc = (crf_count(2, 2), displayed_crf_bound(2, 2))
    ok = not bad and disc == (6, 4)
    return _record(2, "crf counting", ok,
                   f"25 (m,n) pairs vs brute force, {len(bad)} mismatches; "
                   f"m=n=2 gives {disc[0]} against the displayed bound {disc[1]}")


# ---------------------------------------------------------------------------
# 3. catamorphism well-definedness
# ---------------------------------------------------------------------------

def criterion_cata():
    rng = random.Random(SEED + 3)
    cases = mismatches = oracle_bad = pairs = 0
    while cases < 300:
        reg = random_registry(rng, 8)
        _, d = random_expr(rng, reg, Bounds(max_edges=10))
        if not d.base.edges:
            continue
        cases += 1
        x1, x2 = decompose(d), decompose_random(d, rng)
        n1, n2 = cata(numtargets(), x1), cata(numtargets(), x2)
        mismatches += n1 != n2 or n1 != total_arity(d.base)
        t1, t2 = cata(path_table_algebra(), x1), cata(path_table_algebra(), x2)
        for s in d.base.edge_ids:
            for t in d.base.edge_ids:
                ext = shortestpathlength(s, t).extract
                v1, v2 = ext(t1), ext(t2)
                pairs += 1
                mismatches += v1 != v2
                oracle_bad += v1 != bfs_edge_count(d.base, s, t)
    ok = mismatches == 0 and oracle_bad == 0
    return _record(3, "catamorphism well-definedness", ok,
                   f"{cases} DTMGs x 2 decompositions, {pairs} path queries; "
                   f"{mismatches} fold mismatches, {oracle_bad} BFS disagreements")


# ---------------------------------------------------------------------------
# 4. morphism identities and history invariant
# ---------------------------------------------------------------------------

def _morph_case(rng):
    reg = random_registry(rng, 6)
    kind = rng.randrange(3)
    if kind == 0:
        x, _ = random_expr(rng, reg, Bounds(max_edges=8))
        coalg, seed = expr_coalgebra(), x
    elif kind == 1:
        coalg, seed = chain_coalgebra(), [f"n{i}" for i in range(rng.randint(0, 7))]
    else:
        coalg = chunked_path_coalgebra(rng.randint(1, 3))
        seed = [f"n{i}" for i in range(rng.randint(0, 7))]
    algs = [numtargets(), rebuild_algebra(reg)]
    return reg, coalg, seed, algs


def criterion_morphisms():
    rng = random.Random(SEED + 4)
    cases = eq_bad = nodes = good = 0
    for _ in range(200):
        reg, coalg, seed, algs = _morph_case(rng)
        cases += 1
        for alg in algs:
            h = hylo(alg, coalg, seed)
            eq_bad += h != cata(alg, ana(coalg, seed))
            eq_bad += chrono(oblivious_algebra(alg), oblivious_coalgebra(coalg), seed, reg) != h
        x, fforest = futu(oblivious_coalgebra(coalg), seed, reg)
        _, hforest = histo(oblivious_algebra(numtargets()), x, reg)
        for forest in (fforest, hforest):
            t, g = check_history(forest)
            nodes += t
            good += g
    ok = eq_bad == 0 and nodes > 0 and good == nodes
    return _record(4, "morphism identities", ok,
                   f"{cases} cases; {eq_bad} hylo/chrono inequalities; "
                   f"history invariant at {good}/{nodes} internal nodes")


# ---------------------------------------------------------------------------
# 5. Heyting suite
# ---------------------------------------------------------------------------

def heyting_corpus():
    rng = random.Random(SEED + 5)
    hosts = [d for _, d in _bundled_dtmgs() if len(d.base.edges) <= 6]
    while len(hosts) < 300:
        reg = random_registry(rng, 6)
        _, d = random_expr(rng, reg, Bounds(max_edges=6))
        if len(d.base.edges) <= 6:
            hosts.append(d)
    return hosts


def criterion_heyting():
    t0 = time.perf_counter()
    hosts = heyting_corpus()
    res = mx = triples = 0
    witness = None
    for d in hosts:
        rep = heyting_check(d)
        res += rep.residuation_failures
        mx += rep.maximality_failures
        triples += rep.opens ** 3
        if witness is None and rep.non_boolean:
            witness = rep.non_boolean
    dt = time.perf_counter() - t0
    ok = res == 0 and mx == 0 and witness is not None and dt < 120
    return _record(5, "Heyting suite", ok,
                   f"{len(hosts)} hosts, {triples} open triples, {res} residuation and {mx} "
                   f"maximality failures, non-Boolean witness {witness}, {dt:.1f}s (limit 120s)")


# ---------------------------------------------------------------------------
# 6. continuity
# ---------------------------------------------------------------------------

def criterion_continuity():
    rng = random.Random(SEED + 6)
    checked = bad = 0
    for _ in range(100):
        host, m = random_twin_mapping(rng, random_registry(rng, 6), 8)
        assert len(host.base.edges) <= 8 and smooth_check(host, m)
        for o in all_opens(host):
            checked += 1
            try:
                bad += not is_open(host, preimage(host, m, o).mask)
            except Exception:
                bad += 1
    m2m = m2m_bad = 0
    for _, d in _bundled_dtmgs():
        for coalg in (duplicating_coalgebra(1), duplicating_coalgebra(2),
                      duplicating_coalgebra(3), expr_coalgebra()):
            rep = m2m_continuity_check("ana", {"coalgebra": coalg}, d)
            m2m += 1
            m2m_bad += not (rep.hypothesis_ok and rep.continuous)
    ok = bad == 0 and m2m_bad == 0
    return _record(6, "continuity", ok,
                   f"100 smooth maps, {checked} preimages, {bad} not open; "
                   f"M2M ana on bundled views {m2m - m2m_bad}/{m2m} continuous")


# ---------------------------------------------------------------------------
# 7. process semantics
# ---------------------------------------------------------------------------

def _parity_host():
    doc = mgf.parse("type A\ntype B\nedge a : A (1:A)\nedge b : B (1:B)\n"
                    "edge c : A (1:A) values 1\nedge d : A (1:A) values 1\n")
    return doc.tmg


def criterion_process():
    g = _parity_host()
    base = realized_from(g)
    alphabet = [StateOp(k, e) for k in ("forget", "reinsert") for e in ("a", "b", "c", "d")]
    key = {"a": "a", "b": "b", "c": "cd", "d": "cd"}  # c and d share content
    seqs = parity_bad = 0
    for n in range(7):
        for ops in itertools.product(alphabet, repeat=n):
            seqs += 1
            count, expect_error = {}, False
            for op in ops:
                k = key[op.edge]
                if op.kind == "reinsert" and count.get(k, 0) == 0:
                    expect_error = True
                    break
                count[k] = count.get(k, 0) + 1
            try:
                r = replay_ops(base, ops)
            except StateError:
                parity_bad += not expect_error
                continue
            if expect_error:
                parity_bad += 1
                continue
            out = {e.id for e in r.tmg.edges if is_pruned_out(r, e)}
            parity_bad += out != {e for e in "abcd" if count.get(key[e], 0) % 2}

    rng = random.Random(SEED + 7)
    traces = valid_bad = rev_bad = conflicts = 0
    pool = [mgf.load(data_path(n)) for n in BUNDLED]
    for doc in pool:
        for t in doc.traces:
            traces += 1
            d = traversal_to_dtmg(doc.tmg, t)
            valid_bad += bool(validate(d.base))
            rev_bad += not _reversal_swaps(doc.tmg, t, d)
    while traces < 500:
        reg = random_registry(rng, 4)
        _, host = random_expr(rng, reg, Bounds(max_edges=6))
        g = host.base
        edges = [e for e in g.edges if e.arity]
        if len(edges) < 2:
            continue
        evs = []
        for _ in range(rng.randint(1, 4)):
            a, b = rng.sample(edges, 2)
            k = rng.randint(1, min(a.arity, b.arity))
            sa = rng.sample(range(1, a.arity + 1), k)
            sb = rng.sample(range(1, b.arity + 1), k)
            if all(reg.comparable(a.target_type(i), b.target_type(j)) for i, j in zip(sa, sb)):
                evs.append(TraversalEvent(a.id, tuple(sa), b.id, tuple(sb)))
        if not evs:
            continue
        tr = stamp(evs)
        traces += 1
        try:
            d = traversal_to_dtmg(g, tr)
        except PartitionError:
            conflicts += 1
            continue
        valid_bad += bool(validate(d.base))
        rev_bad += not _reversal_swaps(g, tr, d)
    ok = parity_bad == 0 and valid_bad == 0 and rev_bad == 0
    return _record(7, "process semantics", ok,
                   f"{seqs} forget/reinsert sequences, {parity_bad} parity violations; "
                   f"{traces} traces ({conflicts} partition conflicts), {valid_bad} invalid "
                   f"outputs, {rev_bad} reversal mismatches")


def _reversal_swaps(g, trace, d: DTMG) -> bool:
    r = traversal_to_dtmg(g, reverse_trace(trace))
    a, b = edge_roles(d), edge_roles(r)
    return a.keys() == b.keys() and all(
        b[e][0] == a[e][1] and b[e][1] == a[e][0] and b[e][2] == a[e][2] for e in a)


# ---------------------------------------------------------------------------
# 8. IO
# ---------------------------------------------------------------------------

def criterion_io():
    golden = sorted((HERE / "golden").glob("[0-9][0-9].mgf"))
    rt_bad = 0
    for p in golden:
        text = p.read_text(encoding="utf-8")
        doc = mgf.parse(text)
        rt_bad += mgf.serialize(doc) != text or mgf.parse(mgf.serialize(doc)) != doc
        rt_bad += mgf.canonicalize(p.with_suffix(".raw.mgf").read_text(encoding="utf-8")) != text
    invalid = sorted((HERE / "invalid").glob("*.mgf"))
    diag_bad = 0
    for p in invalid:
        text = p.read_text(encoding="utf-8")
        line, frag = re.match(r"# expect line (\d+): (.*)", text).groups()
        try:
            mgf.parse(text)
            diag_bad += 1
        except MgfError as exc:
            diag_bad += exc.line != int(line) or frag not in exc.reason
    ok = len(golden) == 50 and rt_bad == 0 and len(invalid) == 20 and diag_bad == 0
    return _record(8, "IO", ok,
                   f"{len(golden)} golden documents, {rt_bad} round-trip differences; "
                   f"{len(invalid)} invalid documents, {diag_bad} wrong diagnostics")


# ---------------------------------------------------------------------------
# 9. CLI determinism
# ---------------------------------------------------------------------------

def _cli(args, hashseed):
    env = dict(os.environ, PYTHONHASHSEED=str(hashseed))
    p = subprocess.run([sys.executable, "-m", "metafold.cli", *map(str, args)],
                       capture_output=True, env=env)
    return p.returncode, p.stdout, p.stderr


def criterion_cli():
    chains, fig1, fig3 = data_path("chains.mgf"), data_path("fig1.mgf"), data_path("fig3.mgf")
    runs = [
        ("fold", fig1, "--alg", "numtargets"),
        ("fold", chains, "--dtmg", "line", "--alg", "shortestpathlist", "--src", "load", "--dst", "emit"),
        ("fold", fig3, "--alg", "shortestpathlength", "--src", "a", "--dst", "b"),
        ("crfs", "--m", "3", "--n", "3"),
        ("crfs", "--m", "4", "--n", "4", "--count-only"),
        ("laws", "--seed", "11", "--trials", "40"),
        ("heyting", chains, "--dtmg", "all", "--op", "implies", "--a", "load,parse", "--b", "parse,check"),
        ("heyting", chains, "--dtmg", "line", "--op", "not", "--a", "load"),
    ]
    differ = failed = 0
    for args in runs:
        a, b = _cli(args, 1), _cli(args, 12345)
        differ += a != b
        failed += a[0] != 0
    ok = differ == 0 and failed == 0
    return _record(9, "CLI determinism", ok,
                   f"{len(runs)} invocations run twice under different hash seeds; "
                   f"{differ} differ, {failed} nonzero exits")


CRITERIA = [criterion_laws, criterion_crfs, criterion_cata, criterion_morphisms,
            criterion_heyting, criterion_continuity, criterion_process, criterion_io,
            criterion_cli]


@pytest.mark.acceptance
@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda f: f.__name__.removeprefix("criterion_"))
def test_acceptance(criterion):
    assert criterion(), RESULTS[-1]


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    sys.exit(0 if all(results) else 1)
