"""Canonical forms and isomorphism for TMGs and DTMGs.

Colour refinement over the connection structure, followed by
individualisation on the first ambiguous cell, separately for each
connected component.  Boundary positions (the index of a target in the
input/output/lateral lists) are part of an edge's initial colour, so a
DTMG with many dangling targets is usually discrete after refinement.
"""
from __future__ import annotations

from .core import DTMG, TMG, Connection, TargetRef

_NONE = ("-",)


def _initial_colours(g: TMG, roles, ordered):
    cols = {}
    for e in g.edges:
        slots = []
        for i in range(1, e.arity + 1):
            tag = roles.get((e.id, i))
            if tag is None:
                slots.append(_NONE)
            else:
                keep = ordered is True or (ordered == "io" and tag[0] != "L")
                slots.append(tag if keep else tag[:1])
        cols[e.id] = (e.key, tuple(slots))
    return cols


def _adjacency(g: TMG):
    adj = {e.id: [] for e in g.edges}
    for c in g.connections:
        adj[c.a].append(("o", c.sa, c.sb, c.b))
        adj[c.b].append(("i", c.sb, c.sa, c.a))
    return adj


def _rank(sig: dict):
    order = {s: i for i, s in enumerate(sorted(set(sig.values())))}
    return {v: order[s] for v, s in sig.items()}


def _refine(colour: dict, adj, nodes):
    n_cls = len(set(colour[v] for v in nodes))
    while True:
        sig = {v: (colour[v], tuple(sorted((d, s, t, colour[u]) for d, s, t, u in adj[v])))
               for v in nodes}
        new = _rank(sig)
        k = len(set(new.values()))
        colour = new
        if k == n_cls:
            return colour
        n_cls = k


def _certificate(order, init, g: TMG, nodes):
    pos = {v: i for i, v in enumerate(order)}
    conns = sorted((pos[c.a], c.sa, pos[c.b], c.sb) for c in g.connections
                   if c.a in pos)
    return (tuple(init[v] for v in order), tuple(conns))


def _canon_component(nodes, init, adj, g):
    base = _rank({v: init[v] for v in nodes})
    best = None

    def search(colour):
        nonlocal best
        colour = _refine(colour, adj, nodes)
        cells = {}
        for v in nodes:
            cells.setdefault(colour[v], []).append(v)
        ambiguous = sorted(c for c, vs in cells.items() if len(vs) > 1)
        if not ambiguous:
            order = sorted(nodes, key=lambda v: colour[v])
            cert = _certificate(order, init, g, nodes)
            if best is None or cert < best:
                best = cert
            return
        target = ambiguous[0]
        for v in sorted(cells[target]):
            trial = {u: (2 * c, 1) for u, c in colour.items()}
            trial[v] = (2 * colour[v], 0)
            search(_rank(trial))

    search(base)
    return best


def _components(g: TMG):
    parent = {e.id: e.id for e in g.edges}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c in g.connections:
        ra, rb = find(c.a), find(c.b)
        if ra != rb:
            parent[ra] = rb
    comps = {}
    for e in g.edges:
        comps.setdefault(find(e.id), []).append(e.id)
    return list(comps.values())


def canonical_form(x: TMG | DTMG, ordered: bool = True):
    """Id-free certificate; equal certificates iff isomorphic.

    For a DTMG, ``ordered=True`` also respects the position of each
    boundary target in its list; ``ordered=False`` only its role;
    ``ordered="io"`` keeps input/output positions but not lateral ones.
    """
    if isinstance(x, DTMG):
        g = x.base
        roles = {}
        for tag, refs in (("I", x.inputs), ("O", x.outputs), ("L", x.lateral)):
            for i, r in enumerate(refs):
                roles[(r.edge, r.slot)] = (tag, i)
        sizes = (len(x.inputs), len(x.outputs), len(x.lateral))
    else:
        g, roles, sizes = x, {}, None
    init = _initial_colours(g, roles, ordered)
    adj = _adjacency(g)
    comps = sorted(_canon_component(nodes, init, adj, g) for nodes in _components(g))
    return (sizes, tuple(comps))


def isomorphic(a: TMG | DTMG, b: TMG | DTMG, ordered: bool = True) -> bool:
    if type(a) is not type(b) or len(a.edges) != len(b.edges):
        return False
    if len(a.base.connections if isinstance(a, DTMG) else a.connections) != \
            len(b.base.connections if isinstance(b, DTMG) else b.connections):
        return False
    return canonical_form(a, ordered) == canonical_form(b, ordered)


def contract_wires(d: DTMG) -> DTMG:
    """Remove identity wires, splicing their two ends together.

    A wire whose ends are both dangling is kept (it is a bare identity).
    """
    edges = {e.id: e for e in d.base.edges}
    conns = set(d.base.connections)
    lists = [list(d.inputs), list(d.outputs), list(d.lateral)]

    def boundary_pos(ref):
        for li, lst in enumerate(lists):
            for j, r in enumerate(lst):
                if r == ref:
                    return li, j
        return None

    changed = True
    while changed:
        changed = False
        for wid in sorted(edges):
            w = edges[wid]
            if not w.wire or w.arity != 2:
                continue
            ends = {}
            for s in (1, 2):
                ref = TargetRef(wid, s)
                cs = [c for c in conns if (c.a, c.sa) == ref or (c.b, c.sb) == ref]
                ends[s] = cs
            if len(ends[1]) > 1 or len(ends[2]) > 1:
                continue
            c1 = ends[1][0] if ends[1] else None
            c2 = ends[2][0] if ends[2] else None
            if c1 is None and c2 is None:
                continue
            if c1 is not None and c2 is not None:
                x = c1.ends[0] if c1.ends[1] == (wid, 1) else c1.ends[1]
                y = c2.ends[1] if c2.ends[0] == (wid, 2) else c2.ends[0]
                if x.edge == wid or y.edge == wid:
                    continue
                conns -= {c1, c2}
                conns.add(Connection(x.edge, x.slot, y.edge, y.slot))
            else:
                c = c1 if c1 is not None else c2
                free = TargetRef(wid, 2 if c1 is not None else 1)
                other = c.ends[0] if c.ends[1].edge == wid else c.ends[1]
                if other.edge == wid:
                    continue
                pos = boundary_pos(free)
                conns.discard(c)
                if pos is not None:
                    lists[pos[0]][pos[1]] = other
            del edges[wid]
            changed = True
    base = TMG(d.registry, tuple(edges.values()), tuple(conns))
    return DTMG(base, tuple(lists[0]), tuple(lists[1]), tuple(lists[2]))


def equivalent(a: DTMG, b: DTMG, ordered: bool = True) -> bool:
    """Isomorphism after contracting identity wires on both sides."""
    return isomorphic(contract_wires(a), contract_wires(b), ordered)
