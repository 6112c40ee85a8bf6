"""Seeded random registries, construction expressions and arrows.

Used by the law suite, the CLI and the tests.  Every generator takes a
``random.Random`` so runs are reproducible from a seed.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .construct import (CRF, Beside, ConnectC, EdgeC, EmptyC, SwapPrim, beside, connect,
                        evaluate)
from .core import DTMG, ROOT, TMG, Connection, TypeRegistry, lateral_dtmg


@dataclass(frozen=True)
class Bounds:
    max_depth: int = 6
    max_arity: int = 4
    max_types: int = 8
    max_edges: int = 8


def random_registry(rng: random.Random, max_types: int = 8, weighted: bool = False) -> TypeRegistry:
    """Random tree-shaped registry with between 2 and ``max_types`` names (``e`` included)."""
    k = rng.randint(1, max(1, max_types - 1))
    names = [ROOT]
    parents = {}
    for i in range(1, k + 1):
        name = f"T{i}"
        par = rng.choice(names)
        parents[name] = (par, round(rng.uniform(0.2, 1.0), 3)) if weighted else par
        names.append(name)
    return TypeRegistry(parents)


def ancestors(reg: TypeRegistry, t: str) -> list[str]:
    return [u for u in reg.names if reg.inherits(t, u)]


class _Namer:
    def __init__(self, prefix="x"):
        self.prefix, self.n = prefix, 0

    def __call__(self):
        self.n += 1
        return f"{self.prefix}{self.n}"


def random_leaf(rng: random.Random, reg: TypeRegistry, name: str, max_arity: int = 4) -> EdgeC:
    types = reg.names
    n = rng.randint(0, max_arity)
    if n and rng.random() < 0.25:
        labels = [1] * n  # unordered edge
    else:
        labels = list(range(1, n + 1))
        if n >= 3 and rng.random() < 0.3:
            labels[-1] = labels[-2]
    targets = tuple((l, rng.choice(types)) for l in labels)
    slots = list(range(1, n + 1))
    rng.shuffle(slots)
    roles = [rng.choice("iiool") for _ in slots]
    ins = tuple(s for s, r in zip(slots, roles) if r == "i")
    outs = tuple(s for s, r in zip(slots, roles) if r == "o")
    values = tuple(rng.randint(0, 3) for _ in range(rng.randint(0, 1)))
    return EdgeC(rng.choice(types), targets, values, ins, outs, name)


def random_crf(rng: random.Random, g: DTMG, h: DTMG, full: bool = False) -> CRF:
    """Random type-compatible crf from ``g``'s outputs into ``h``'s inputs.

    With ``full`` every compatible pairing found greedily is used;
    otherwise each candidate is kept with probability one half.
    """
    reg = g.registry
    outs = list(range(1, len(g.outputs) + 1))
    ins = list(range(1, len(h.inputs) + 1))
    rng.shuffle(outs)
    rng.shuffle(ins)
    to, ti = g.output_types(), h.input_types()
    pairs, used = [], set()
    for o in outs:
        if not full and rng.random() < 0.5:
            continue
        for i in ins:
            if i not in used and reg.comparable(to[o - 1], ti[i - 1]):
                pairs.append((o, i))
                used.add(i)
                break
    return CRF(tuple(pairs))


def random_expr(rng: random.Random, reg: TypeRegistry, bounds: Bounds = Bounds(),
                namer: _Namer | None = None):
    """Random expression and its value, as ``(expr, dtmg)``."""
    namer = namer or _Namer()
    budget = [rng.randint(1, bounds.max_edges)]

    def go(depth):
        if depth == 0 or budget[0] <= 1 or rng.random() < 0.2:
            budget[0] -= 1
            r = rng.random()
            if r < 0.05:
                x = EmptyC()
            elif r < 0.12:
                x = SwapPrim(rng.randint(0, 2), rng.randint(0, 2))
            else:
                x = random_leaf(rng, reg, namer(), bounds.max_arity)
            return x, evaluate(x, reg)
        lx, ld = go(depth - 1)
        rx, rd = go(depth - 1)
        if rng.random() < 0.35:
            return Beside(lx, rx), beside(ld, rd)
        p = random_crf(rng, ld, rd)
        return ConnectC(p, lx, rx), connect(ld, p, rd)

    return go(bounds.max_depth)


def random_arrow(rng: random.Random, reg: TypeRegistry, in_types, depth: int = 2,
                 max_arity: int = 4, namer: _Namer | None = None):
    """Random ``(expr, dtmg)`` whose inputs match ``in_types`` one for one.

    Each input slot gets an ancestor of the required type, so composing
    with an arrow whose outputs have ``in_types`` always type-checks.
    """
    namer = namer or _Namer("a")
    types = reg.names
    need = list(in_types)
    leaves = []
    while need or not leaves:
        take = rng.randint(0 if not need else 1, min(len(need), max_arity)) if need else 0
        req, need = need[:take], need[take:]
        room = max_arity - take
        n_out = rng.randint(0, min(2, room))
        n_lat = rng.randint(0, min(1, room - n_out))
        slot_types = ([rng.choice(ancestors(reg, t)) for t in req]
                      + [rng.choice(types) for _ in range(n_out + n_lat)])
        n = len(slot_types)
        order = list(range(1, n + 1))
        rng.shuffle(order)
        targets = [None] * n
        for s, t in zip(order, slot_types):
            targets[s - 1] = (s, t)
        ins = tuple(order[:take])
        outs = tuple(order[take:take + n_out])
        leaves.append(EdgeC(rng.choice(types), tuple(targets), (), ins, outs, namer()))
        if not need and rng.random() < 0.5:
            break
    x, d = leaves[0], evaluate(leaves[0], reg)
    for leaf in leaves[1:]:
        x, d = Beside(x, leaf), beside(d, evaluate(leaf, reg))
    if depth > 0 and d.outputs and rng.random() < 0.6:
        y, yd = random_arrow(rng, reg, d.output_types(), depth - 1, max_arity, namer)
        p = CRF.identity(len(d.outputs))
        return ConnectC(p, x, y), connect(d, p, yd)
    return x, d


def random_twin_mapping(rng: random.Random, reg: TypeRegistry, max_edges: int = 8):
    """Random host with duplicated ("twin") edges and the smooth map folding each twin back.

    A twin copies its original's type, targets and every connection
    (including those to other twins).  Returns ``(host, mapping)`` where
    ``mapping`` is a :class:`metafold.topology.HomMapping` from the twins
    onto their originals; the host has at most ``max_edges`` edges.
    """
    from .topology import HomMapping

    while True:
        _, d = random_expr(rng, reg, Bounds(max_edges=max(1, max_edges // 2)))
        g = d.base
        plain = [e for e in g.edges if not e.wire]
        if plain and len(g.edges) < max_edges:
            break
    room = max_edges - len(g.edges)
    chosen = rng.sample(plain, rng.randint(1, min(room, len(plain))))
    twin = {e.id: e.id + "'" for e in chosen}
    edges = list(g.edges) + [e.renamed(twin[e.id]) for e in chosen]
    conns = set(g.connections)
    for c in g.connections:
        for a in {c.a, twin.get(c.a, c.a)}:
            for b in {c.b, twin.get(c.b, c.b)}:
                conns.add(Connection(a, c.sa, b, c.sb))
    host = lateral_dtmg(TMG(reg, edges, conns))
    return host, HomMapping.positional(host.base, {t: o for o, t in twin.items()})
