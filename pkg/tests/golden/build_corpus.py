"""Regenerate the golden MGF corpus: ``python tests/golden/build_corpus.py``.

Writes ``NN.mgf`` (canonical text) and ``NN.raw.mgf`` (same document with
statements shuffled, comments and blank lines added).  The tests check
that both parse and serialize to exactly the canonical bytes.
"""
import random
import shutil
from importlib import resources
from pathlib import Path

from metafold import mgf
from metafold.core import Edge, restrict
from metafold.gen import Bounds, random_expr, random_registry
from metafold.process import Trace, TraversalEvent, StateOp

HERE = Path(__file__).parent
N_DOCS = 50

HANDMADE = [
    "",
    "type T\ntype T1\ntype T2\ntype T3\ntype T4\nedge x : T (1:T1, 2:T2, 3:T3, 3:T4)\n",
    "type A\ntype B : A @ 0.25\ntype C : A\ntype C : B @ 0.5\n"
    "edge p : A (1:A, 2:B) values 1 -2 3.5 \"s p#ace\" [1 [2 \"x\"]]\n"
    "edge q : C (1:C, 1:C)\nconn p.0 q.1\nconn p.2 q.2\n",
    "type N\nedge a : N (1:N, 2:N)\nedge b : N (1:N, 2:N)\nedge c : N (1:N, 2:N)\n"
    "conn a.2 b.1\nconn b.2 c.1\ndtmg all in a.1 out c.2\ndtmg mid on b in b.1 out b.2\n"
    "trace t\nev a 2 -> b 1\nev b 2 -> c 1\nforget b\nreinsert b\n",
    "edge w : e ()\nedge v : e (1:e) values \"\"\n",
]


def random_values(rng):
    pool = [lambda: rng.randint(-9, 99), lambda: round(rng.uniform(-5, 5), 3),
            lambda: rng.choice(["a", "b c", "q\"t", "#x"]),
            lambda: (rng.randint(0, 3), rng.choice(["u", "v"]))]
    return tuple(rng.choice(pool)() for _ in range(rng.randint(0, 3)))


def random_doc(seed):
    rng = random.Random(f"golden:{seed}")
    reg = random_registry(rng, 8, weighted=rng.random() < 0.4)
    _, d = random_expr(rng, reg, Bounds(max_edges=8))
    g = d.base
    g = g.replace(edges=[Edge(e.id, e.type, e.targets, random_values(rng), e.wire) for e in g.edges])
    d = type(d)(g, d.inputs, d.outputs, d.lateral)
    views = [("main", d)]
    if len(g.edges) > 1 and rng.random() < 0.5:
        keep = rng.sample(g.edge_ids, rng.randint(1, len(g.edges) - 1))
        views.append(("part", restrict(d, keep)))
    traces = []
    for k in range(rng.randint(0, 2) if g.edges else 0):
        steps = []
        for _ in range(rng.randint(1, 3)):
            a, b = rng.choice(g.edges), rng.choice(g.edges)
            n = min(a.arity, b.arity)
            if n == 0:
                continue
            m = rng.randint(1, n)
            steps.append(TraversalEvent(a.id, tuple(rng.sample(range(1, a.arity + 1), m)),
                                        b.id, tuple(rng.sample(range(1, b.arity + 1), m))))
        if rng.random() < 0.5:
            steps.append(StateOp("forget", rng.choice(g.edge_ids)))
        traces.append(Trace(f"t{k}", tuple(steps)))
    return mgf.serialize(mgf.MgfDocument(reg, g, tuple(views), tuple(traces)))


def scramble(text, rng):
    lines = text.splitlines()
    cut = next((i for i, l in enumerate(lines) if l.startswith("trace ")), len(lines))
    head, tail = lines[:cut], lines[cut:]
    rng.shuffle(head)
    out = ["# scrambled copy"]
    for l in head:
        if rng.random() < 0.3:
            out.append("")
        out.append(("  " if rng.random() < 0.3 else "") + l + ("   # note" if rng.random() < 0.3 else ""))
    return "\n".join(out + tail) + "\n"


def main():
    bundled = [resources.files("metafold") / "data" / n for n in ("fig1.mgf", "fig3.mgf", "chains.mgf")]
    sources = [mgf.canonicalize(p.read_text()) for p in bundled]
    sources += [mgf.canonicalize(t) for t in HANDMADE]
    seed = 0
    while len(sources) < N_DOCS:
        sources.append(random_doc(seed))
        seed += 1
    for old in HERE.glob("*.mgf"):
        old.unlink()
    for i, text in enumerate(sources):
        rng = random.Random(i)
        (HERE / f"{i:02d}.mgf").write_text(text, encoding="utf-8")
        (HERE / f"{i:02d}.raw.mgf").write_text(scramble(text, rng), encoding="utf-8")


if __name__ == "__main__":
    main()
