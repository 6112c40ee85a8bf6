"""DTMG constructors, routing functions and construction expressions."""
from __future__ import annotations

import heapq
import itertools
import math
import random as _random
from dataclasses import dataclass
from typing import NamedTuple, Union

from .core import (DTMG, ROOT, TMG, Connection, Edge, Target, TargetRef, TypeRegistry,
                   empty_dtmg, fresh_id, target_roles)
from .errors import (CapacityError, CrfError, DecomposeError, RouteError, SizeError,
                     SlotRangeError, TypeMismatchError, UnknownNameError)

MAX_CRF_SIDE = 8


# ---------------------------------------------------------------------------
# connection routing functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CRF:
    """Invertible partial pairing of output positions with input positions (1-based)."""

    pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        pairs = tuple(sorted((int(o), int(i)) for o, i in self.pairs))
        outs = [o for o, _ in pairs]
        ins = [i for _, i in pairs]
        if any(x < 1 for x in outs + ins):
            raise CrfError(f"crf indices are 1-based: {pairs}")
        if len(set(outs)) != len(outs) or len(set(ins)) != len(ins):
            raise CrfError(f"crf is not invertible: {pairs}")
        object.__setattr__(self, "pairs", pairs)

    @property
    def size(self) -> int:
        return len(self.pairs)

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    @property
    def max_output(self) -> int:
        return max((o for o, _ in self.pairs), default=0)

    @property
    def max_input(self) -> int:
        return max((i for _, i in self.pairs), default=0)

    def __str__(self):
        return "[" + ",".join(f"{o}>{i}" for o, i in self.pairs) + "]"

    @classmethod
    def identity(cls, k: int) -> "CRF":
        return cls(tuple((i, i) for i in range(1, k + 1)))

    @classmethod
    def parse(cls, text: str) -> "CRF":
        body = text.strip()
        if not (body.startswith("[") and body.endswith("]")):
            raise CrfError(f"malformed crf {text!r}")
        body = body[1:-1].strip()
        if not body:
            return cls()
        pairs = []
        for item in body.split(","):
            o, _, i = item.partition(">")
            try:
                pairs.append((int(o), int(i)))
            except ValueError:
                raise CrfError(f"malformed crf {text!r}") from None
        return cls(tuple(pairs))


EMPTY_CRF = CRF()


def crf_count(m: int, n: int) -> int:
    """Number of nonempty invertible partial pairings between m outputs and n inputs."""
    return sum(math.comb(m, k) * math.comb(n, k) * math.factorial(k)
               for k in range(1, min(m, n) + 1))


def displayed_crf_bound(m: int, n: int) -> int:
    """The closed-form upper bound printed next to the crf definition.

    Kept for comparison only; it undercounts, e.g. 4 against the true 6
    for m = n = 2.
    """
    lo, hi = min(m, n), max(m, n)
    return sum(math.factorial(hi) // math.factorial(hi - lo) for _ in range(1, lo + 1))


def enumerate_crfs(m: int, n: int) -> list[CRF]:
    if m < 0 or n < 0:
        raise ValueError("m and n must be nonnegative")
    if min(m, n) > MAX_CRF_SIDE:
        raise CapacityError(f"min(m, n) = {min(m, n)} exceeds the enumeration cap {MAX_CRF_SIDE}")
    out = []
    for k in range(1, min(m, n) + 1):
        for outs in itertools.combinations(range(1, m + 1), k):
            for ins in itertools.permutations(range(1, n + 1), k):
                out.append(CRF(tuple(zip(outs, ins))))
    return out


def crf_beside(p: CRF, q: CRF, m_p: int | None = None, n_p: int | None = None) -> CRF:
    """Block routing: ``q`` shifted past ``p``'s ``m_p`` outputs and ``n_p`` inputs."""
    m_p = p.max_output if m_p is None else m_p
    n_p = p.max_input if n_p is None else n_p
    return CRF(p.pairs + tuple((o + m_p, i + n_p) for o, i in q.pairs))


class SwapStep(NamedTuple):
    side: str  # "out" or "in"
    j: int
    k: int


def apply_swap(p: CRF, step: SwapStep) -> CRF:
    def sw(x):
        return step.k if x == step.j else step.j if x == step.k else x
    if step.side == "out":
        return CRF(tuple((sw(o), i) for o, i in p.pairs))
    return CRF(tuple((o, sw(i)) for o, i in p.pairs))


def apply_swaps(p: CRF, steps) -> CRF:
    for s in steps:
        p = apply_swap(p, s)
    return p


def crf_from_swaps(p: CRF, p1: CRF, m: int | None = None, n: int | None = None) -> list[SwapStep]:
    """Swap steps turning ``p`` into ``p1`` (same size, same m and n)."""
    if p.size != p1.size:
        raise SizeError(f"crf sizes differ: {p.size} vs {p1.size}")
    if p == p1:
        return []
    m = max(p.max_output, p1.max_output) if m is None else m
    n = max(p.max_input, p1.max_input) if n is None else n
    steps: list[SwapStep] = []
    cur = p
    # outputs: move each output of cur onto the matching output of p1
    want_out = [o for o, _ in p1.pairs]
    have_out = [o for o, _ in cur.pairs]
    keep = set(have_out) & set(want_out)
    free_have = [o for o in have_out if o not in keep]
    free_want = [o for o in want_out if o not in keep]
    for a, b in zip(free_have, free_want):
        steps.append(SwapStep("out", a, b))
        cur = apply_swap(cur, steps[-1])
    # inputs: now outputs agree; fix the input paired with each output
    target = dict(p1.pairs)
    while True:
        wrong = [(o, i) for o, i in cur.pairs if target[o] != i]
        if not wrong:
            break
        o, i = wrong[0]
        steps.append(SwapStep("in", i, target[o]))
        cur = apply_swap(cur, steps[-1])
    if cur != p1:  # pragma: no cover - construction guarantees this
        raise AssertionError("swap replay failed")
    for s in steps:
        bound = m if s.side == "out" else n
        if max(s.j, s.k) > bound:
            raise SlotRangeError(f"swap {s} exceeds side size {bound}")
    return steps


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def _typed_targets(targets) -> tuple[Target, ...]:
    return tuple(Target(int(l), t) for l, t in targets)


def edge_c(registry: TypeRegistry, ttt, values=(), inputs=(), outputs=(), name: str = "x",
           wire: bool = False) -> DTMG:
    """Single-edge DTMG from a typed-target tuple ``(T, ((L1, T1), ...))``.

    Slots not named in ``inputs``/``outputs`` are lateral.
    """
    etype, targets = ttt
    targets = _typed_targets(targets)
    for t in (etype,) + tuple(t.type for t in targets):
        if t not in registry:
            raise UnknownNameError(f"unknown type {t!r}")
    n = len(targets)
    inputs, outputs = tuple(inputs), tuple(outputs)
    for s in inputs + outputs:
        if not 1 <= s <= n:
            raise SlotRangeError(f"slot {s} outside [1,{n}]")
    if len(set(inputs + outputs)) != len(inputs + outputs):
        raise SlotRangeError("a slot cannot be both input and output")
    e = Edge(name, etype, targets, values, wire)
    used = set(inputs) | set(outputs)
    return DTMG(TMG(registry, (e,)),
                tuple(TargetRef(name, s) for s in inputs),
                tuple(TargetRef(name, s) for s in outputs),
                tuple(TargetRef(name, s) for s in range(1, n + 1) if s not in used))


def _merge(g: DTMG, h: DTMG):
    """Disjoint union of bases; ``h``'s colliding ids are freshened."""
    taken = set(g.base.edge_ids)
    rename = {}
    for e in h.base.edges:
        new = fresh_id(e.id, taken | set(h.base.edge_ids) - {e.id}) if e.id in taken else e.id
        taken.add(new)
        rename[e.id] = new

    def rr(r: TargetRef) -> TargetRef:
        return TargetRef(rename[r.edge], r.slot)

    edges = g.base.edges + tuple(e.renamed(rename[e.id]) for e in h.base.edges)
    conns = g.base.connections + tuple(
        Connection(rename[c.a], c.sa, rename[c.b], c.sb) for c in h.base.connections)
    return edges, conns, rr


def beside(g: DTMG, h: DTMG) -> DTMG:
    edges, conns, rr = _merge(g, h)
    return DTMG(TMG(g.registry, edges, conns),
                g.inputs + tuple(map(rr, h.inputs)),
                g.outputs + tuple(map(rr, h.outputs)),
                g.lateral + tuple(map(rr, h.lateral)))


def times(m: int, g: DTMG) -> DTMG:
    if m < 1:
        raise ValueError("times needs a positive count")
    out = g
    for _ in range(m - 1):
        out = beside(out, g)
    return out


def check_route(g: DTMG, p: CRF, h: DTMG):
    reg = g.registry
    for o, i in p.pairs:
        if o > len(g.outputs):
            raise SlotRangeError(f"crf output index {o} exceeds {len(g.outputs)} outputs")
        if i > len(h.inputs):
            raise SlotRangeError(f"crf input index {i} exceeds {len(h.inputs)} inputs")
        to = g.base.ref_type(g.outputs[o - 1])
        ti = h.base.ref_type(h.inputs[i - 1])
        if not reg.comparable(to, ti):
            raise TypeMismatchError(f"crf pair {o}>{i} joins incomparable types {to!r} and {ti!r}")


def connect(g: DTMG, p: CRF, h: DTMG) -> DTMG:
    check_route(g, p, h)
    edges, conns, rr = _merge(g, h)
    h_in = tuple(map(rr, h.inputs))
    new = tuple(Connection(g.outputs[o - 1].edge, g.outputs[o - 1].slot,
                           h_in[i - 1].edge, h_in[i - 1].slot) for o, i in p.pairs)
    used_o = {o for o, _ in p.pairs}
    used_i = {i for _, i in p.pairs}
    return DTMG(TMG(g.registry, edges, conns + new),
                g.inputs + tuple(r for k, r in enumerate(h_in, 1) if k not in used_i),
                tuple(r for k, r in enumerate(g.outputs, 1) if k not in used_o)
                + tuple(map(rr, h.outputs)),
                g.lateral + tuple(map(rr, h.lateral)))


def swap_edge(e: Edge, j: int, k: int) -> Edge:
    """Exchange targets j and k (type and index label travel together)."""
    for s in (j, k):
        if not 1 <= s <= e.arity:
            raise SlotRangeError(f"swap index {s} outside [1,{e.arity}]")
    ts = list(e.targets)
    ts[j - 1], ts[k - 1] = ts[k - 1], ts[j - 1]
    return Edge(e.id, e.type, tuple(ts), e.values, e.wire)


def swap_prim(registry: TypeRegistry, j: int, k: int, tys=None) -> DTMG:
    """Wiring that exchanges a block of ``j`` wires with a block of ``k`` wires.

    Inputs are wires 1..j+k in order; outputs list wires j+1..j+k first,
    then 1..j.  Wires are binary root-typed edges flagged ``wire``.
    """
    if j < 0 or k < 0:
        raise ValueError("swap block sizes must be nonnegative")
    n = j + k
    tys = tuple(tys) if tys is not None else (ROOT,) * n
    if len(tys) != n:
        raise SizeError(f"swap needs {n} wire types, got {len(tys)}")
    edges, ins, outs = [], [], []
    for w in range(1, n + 1):
        wid = f"w{w}"
        edges.append(Edge(wid, ROOT, ((1, tys[w - 1]), (2, tys[w - 1])), (), True))
        ins.append(TargetRef(wid, 1))
    order = list(range(j + 1, n + 1)) + list(range(1, j + 1))
    outs = [TargetRef(f"w{w}", 2) for w in order]
    for t in tys:
        if t not in registry:
            raise UnknownNameError(f"unknown type {t!r}")
    return DTMG(TMG(registry, edges), tuple(ins), tuple(outs), ())


def identity_wiring(registry: TypeRegistry, n: int, tys=None) -> DTMG:
    return swap_prim(registry, n, 0, tys)


def identity_dtmg(g: DTMG) -> DTMG:
    """Identity arrow on ``g``'s output boundary: one wire per output."""
    return identity_wiring(g.registry, len(g.outputs))


# ---------------------------------------------------------------------------
# construction expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EmptyC:
    pass


@dataclass(frozen=True)
class EdgeC:
    type: str
    targets: tuple = ()
    values: tuple = ()
    inputs: tuple = ()
    outputs: tuple = ()
    name: str | None = None
    wire: bool = False

    def __post_init__(self):
        object.__setattr__(self, "targets", _typed_targets(self.targets))
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "values", Edge("_", self.type, (), self.values).values)

    @property
    def ttt(self):
        return (self.type, self.targets)

    @property
    def arity(self) -> int:
        return len(self.targets)

    @property
    def key(self):
        return Edge("_", self.type, self.targets, self.values, self.wire).key


@dataclass(frozen=True)
class Beside:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class ConnectC:
    crf: CRF
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class SwapPrim:
    j: int
    k: int
    tys: tuple | None = None


Expr = Union[EmptyC, EdgeC, Beside, ConnectC, SwapPrim]


def swap_wire_leaves(x: SwapPrim) -> list[EdgeC]:
    n = x.j + x.k
    tys = x.tys or (ROOT,) * n
    return [EdgeC(ROOT, ((1, tys[w]), (2, tys[w])), (), (1,), (2,), f"w{w + 1}", True)
            for w in range(n)]


def evaluate(x: Expr, registry: TypeRegistry) -> DTMG:
    match x:
        case EmptyC():
            return empty_dtmg(registry)
        case EdgeC():
            return edge_c(registry, x.ttt, x.values, x.inputs, x.outputs, x.name or "x", x.wire)
        case Beside(l, r):
            return beside(evaluate(l, registry), evaluate(r, registry))
        case ConnectC(p, l, r):
            return connect(evaluate(l, registry), p, evaluate(r, registry))
        case SwapPrim(j, k, tys):
            return swap_prim(registry, j, k, tys)
    raise TypeError(f"not a construction expression: {x!r}")


def expr_size(x: Expr) -> int:
    match x:
        case Beside(l, r) | ConnectC(_, l, r):
            return expr_size(l) + expr_size(r)
        case EdgeC():
            return 1
        case SwapPrim(j, k, _):
            return j + k
    return 0


def expr_depth(x: Expr) -> int:
    match x:
        case Beside(l, r) | ConnectC(_, l, r):
            return 1 + max(expr_depth(l), expr_depth(r))
    return 0


def to_prefix(x: Expr) -> str:
    match x:
        case EmptyC():
            return "(empty)"
        case EdgeC():
            return f"(edge {x.name})" if x.name else f"(edge {x.type}/{x.arity})"
        case Beside(l, r):
            return f"(beside {to_prefix(l)} {to_prefix(r)})"
        case ConnectC(p, l, r):
            return f"(connect {p} {to_prefix(l)} {to_prefix(r)})"
        case SwapPrim(j, k, _):
            return f"(swap {j} {k})"
    raise TypeError(f"not a construction expression: {x!r}")


# ---------------------------------------------------------------------------
# decomposition
# ---------------------------------------------------------------------------

def _leaf_roles(d: DTMG):
    for c in d.base.connections:
        if c.sa == 0 or c.sb == 0:
            raise DecomposeError(f"whole-edge connection {c} cannot come from connect")
    seen = {}
    for c in d.base.connections:
        for r in c.ends:
            if r in seen:
                raise DecomposeError(f"target {r} joins several connections")
            seen[r] = c
    roles = target_roles(d)
    bad = [r for r, v in roles.items() if v == "conflict"]
    if bad:
        raise DecomposeError(f"target {bad[0]} is both input and output")
    return roles


def _leaf(d: DTMG, e: Edge, roles) -> EdgeC:
    pos = {r: i for i, r in enumerate(d.inputs + d.outputs + d.lateral)}

    def ordered(role):
        refs = [TargetRef(e.id, s) for s in range(1, e.arity + 1) if roles.get(TargetRef(e.id, s)) == role]
        refs.sort(key=lambda r: (pos.get(r, len(pos)), r.slot))
        return tuple(r.slot for r in refs)

    if e.wire and e.arity == 2 and ordered("in") == (1,) and ordered("out") == (2,):
        return EdgeC(e.type, e.targets, e.values, (1,), (2,), e.id, True)
    return EdgeC(e.type, e.targets, e.values, ordered("in"), ordered("out"), e.id, e.wire)


def _topo(d: DTMG, ids, tiebreak):
    ids = set(ids)
    succ = {i: set() for i in ids}
    indeg = {i: 0 for i in ids}
    for c in d.base.connections:
        if c.a in ids and c.b in ids and c.b not in succ[c.a]:
            if c.a == c.b:
                raise DecomposeError(f"self-connection on {c.a}")
            succ[c.a].add(c.b)
            indeg[c.b] += 1
    heap = [(tiebreak(i), i) for i in ids if indeg[i] == 0]
    heapq.heapify(heap)
    out = []
    while heap:
        _, i = heapq.heappop(heap)
        out.append(i)
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(heap, (tiebreak(j), j))
    if len(out) != len(ids):
        raise DecomposeError("connections form a directed cycle")
    return out


def _crossing(d: DTMG, left: DTMG, right: DTMG, lids, rids) -> CRF:
    pairs = []
    for c in d.base.connections:
        if c.a in lids and c.b in rids:
            o = left.outputs.index(TargetRef(c.a, c.sa)) + 1
            i = right.inputs.index(TargetRef(c.b, c.sb)) + 1
            pairs.append((o, i))
    return CRF(tuple(pairs))


def decompose(d: DTMG) -> Expr:
    """Canonical construction expression for ``d``.

    Edges are placed in topological order of the connection structure,
    ties broken by content key then id, and accumulated left to right:
    an edge fed by already-placed edges is attached with ``ConnectC``,
    otherwise with ``Beside``.  ``evaluate(decompose(d))`` reproduces
    ``d`` up to role-preserving isomorphism.
    """
    if d.is_empty():
        return EmptyC()
    roles = _leaf_roles(d)
    reg = d.registry
    order = _topo(d, d.base.edge_ids, lambda i: (d.base.edge(i).key, i))
    acc_x = acc_d = None
    placed = set()
    for eid in order:
        leaf = _leaf(d, d.base.edge(eid), roles)
        leaf_d = evaluate(leaf, reg)
        if acc_x is None:
            acc_x, acc_d = leaf, leaf_d
        else:
            p = _crossing(d, acc_d, leaf_d, placed, {eid})
            if p.size:
                acc_x, acc_d = ConnectC(p, acc_x, leaf), connect(acc_d, p, leaf_d)
            else:
                acc_x, acc_d = Beside(acc_x, leaf), beside(acc_d, leaf_d)
        placed.add(eid)
    return acc_x


def decompose_random(d: DTMG, rng: _random.Random | int | None = None) -> Expr:
    """A randomly bracketed construction expression for ``d``.

    Splits the edge set at a random cut of a random topological order,
    so every split is a down-set; recursion bottoms out on single edges.
    """
    rng = rng if isinstance(rng, _random.Random) else _random.Random(rng)
    if d.is_empty():
        return EmptyC()
    roles = _leaf_roles(d)
    reg = d.registry

    def build(ids):
        if len(ids) == 1:
            leaf = _leaf(d, d.base.edge(next(iter(ids))), roles)
            return leaf, evaluate(leaf, reg)
        keys = {i: rng.random() for i in ids}
        order = _topo(d, ids, lambda i: keys[i])
        cut = rng.randint(1, len(order) - 1)
        lids, rids = set(order[:cut]), set(order[cut:])
        lx, ld = build(lids)
        rx, rd = build(rids)
        p = _crossing(d, ld, rd, lids, rids)
        if p.size:
            return ConnectC(p, lx, rx), connect(ld, p, rd)
        return Beside(lx, rx), beside(ld, rd)

    return build(set(d.base.edge_ids))[0]


# ---------------------------------------------------------------------------
# undirected construction (QCRF)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FreshEdge:
    """A mediating edge created by Connect_Q; absorbs ``(side, ref)`` targets in order."""

    type: str
    absorbed: tuple

    def __post_init__(self):
        object.__setattr__(self, "absorbed",
                           tuple((int(s), TargetRef(*r)) for s, r in self.absorbed))


@dataclass(frozen=True)
class QCRF:
    direct: tuple = ()   # ((ref on side 1, ref on side 2), ...)
    fresh: tuple = ()    # FreshEdge, ...

    def __post_init__(self):
        object.__setattr__(self, "direct",
                           tuple((TargetRef(*a), TargetRef(*b)) for a, b in self.direct))
        object.__setattr__(self, "fresh", tuple(self.fresh))


def _as_tmg(x, registry=None) -> TMG:
    if isinstance(x, TMG):
        return x
    if isinstance(x, DTMG):
        return x.base
    if isinstance(x, Edge):
        if registry is None:
            raise ValueError("a bare edge needs a registry")
        return TMG(registry, (x,))
    raise TypeError(f"expected Edge, TMG or DTMG, got {type(x).__name__}")


def connect_q(e1, q: QCRF, e2, registry: TypeRegistry | None = None, fresh_prefix: str = "q") -> TMG:
    """Undirected connection of two edges/TMGs as specified by ``q``.

    Ids on side 2 that collide with side 1 are freshened; refs in ``q``
    always name the original ids of their own side.
    """
    g1 = _as_tmg(e1, registry)
    g2 = _as_tmg(e2, registry or g1.registry)
    reg = g1.registry
    taken = set(g1.edge_ids)
    rename = {}
    for e in g2.edges:
        new = fresh_id(e.id, taken) if e.id in taken else e.id
        taken.add(new)
        rename[e.id] = new

    def ref(side, r):
        g = g1 if side == 1 else g2
        g.edge(r.edge)
        e = g.edge(r.edge)
        if not 1 <= r.slot <= e.arity:
            raise SlotRangeError(f"slot {r.slot} outside [1,{e.arity}] on {r.edge!r}")
        return (r if side == 1 else TargetRef(rename[r.edge], r.slot)), e.target_type(r.slot)

    edges = list(g1.edges) + [e.renamed(rename[e.id]) for e in g2.edges]
    conns = list(g1.connections) + [Connection(rename[c.a], c.sa, rename[c.b], c.sb)
                                    for c in g2.connections]
    for a, b in q.direct:
        ra, ta = ref(1, a)
        rb, tb = ref(2, b)
        if not reg.comparable(ta, tb):
            raise TypeMismatchError(f"direct pair {a} ~ {b} joins incomparable {ta!r} and {tb!r}")
        conns.append(Connection(ra.edge, ra.slot, rb.edge, rb.slot))
    for n, fe in enumerate(q.fresh, 1):
        if fe.type not in reg:
            raise UnknownNameError(f"unknown type {fe.type!r}")
        fid = fresh_id(f"{fresh_prefix}{n}", taken)
        taken.add(fid)
        targets = []
        for slot, (side, r) in enumerate(fe.absorbed, 1):
            rr, t = ref(side, r)
            targets.append((slot, t))
            conns.append(Connection(fid, slot, rr.edge, rr.slot))
        edges.append(Edge(fid, fe.type, tuple(targets)))
    return TMG(reg, edges, conns)


def mokhov_connect(g1, g2, registry=None, link_type: str = ROOT) -> QCRF:
    """QCRF linking every target on side 1 to every target on side 2 with a fresh binary edge."""
    a = _as_tmg(g1, registry)
    b = _as_tmg(g2, registry or a.registry)
    fresh = []
    for e in a.edges:
        for s in range(1, e.arity + 1):
            for f in b.edges:
                for t in range(1, f.arity + 1):
                    fresh.append(FreshEdge(link_type, ((1, (e.id, s)), (2, (f.id, t)))))
    return QCRF((), tuple(fresh))


def union(g: TMG, h: TMG) -> TMG:
    """Edge-set and connection-set union; shared ids must name identical edges."""
    edges = {e.id: e for e in g.edges}
    for e in h.edges:
        if e.id in edges and edges[e.id] != e:
            raise ValueError(f"edge id {e.id!r} names different edges in the two operands")
        edges[e.id] = e
    return TMG(g.registry, tuple(edges.values()), g.connections + h.connections)


def undirected_metapath(g: TMG, start: str, end: str) -> list[str] | None:
    """Shortest neighbour-linked edge sequence from ``start`` to ``end``; None if unreachable."""
    g.edge(start)
    g.edge(end)
    nbrs = {e: set() for e in g.edge_ids}
    for c in g.connections:
        if c.a != c.b:
            nbrs[c.a].add(c.b)
            nbrs[c.b].add(c.a)
    prev = {start: None}
    frontier = [start]
    while frontier:
        nxt = []
        for u in frontier:
            if u == end:
                path = []
                while u is not None:
                    path.append(u)
                    u = prev[u]
                return path[::-1]
            for v in sorted(nbrs[u]):
                if v not in prev:
                    prev[v] = u
                    nxt.append(v)
        frontier = nxt
    return None


# ---------------------------------------------------------------------------
# connector-ordered DTMGs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConDTMG:
    graph: DTMG
    routing: CRF = EMPTY_CRF

    def __post_init__(self):
        if self.routing.max_output > len(self.graph.outputs):
            raise RouteError(f"routing {self.routing} addresses output "
                             f"{self.routing.max_output} of {len(self.graph.outputs)}")


def con_connect(c: ConDTMG, h: DTMG | ConDTMG) -> DTMG | ConDTMG:
    """``(G, P) ⋈ H``; a routed right operand keeps its routing, shifted past G's leftovers."""
    target = h.graph if isinstance(h, ConDTMG) else h
    try:
        out = connect(c.graph, c.routing, target)
    except (SlotRangeError, TypeMismatchError) as exc:
        raise RouteError(f"routing {c.routing} cannot route into the right operand: {exc}") from exc
    if isinstance(h, ConDTMG):
        shift = len(c.graph.outputs) - c.routing.size
        return ConDTMG(out, CRF(tuple((o + shift, i) for o, i in h.routing.pairs)))
    return out


@dataclass(frozen=True)
class Route:
    """Glue a crf onto the value of ``body``."""

    crf: CRF
    body: "ConExpr"


@dataclass(frozen=True)
class ConJoin:
    """Unparametrised connect; the routing comes from ``left``."""

    left: "ConExpr"
    right: "ConExpr"


ConExpr = Union[EmptyC, EdgeC, Beside, Route, ConJoin, SwapPrim]


def evaluate_con(x, registry: TypeRegistry) -> DTMG | ConDTMG:
    match x:
        case Route(p, body):
            v = evaluate_con(body, registry)
            g = v.graph if isinstance(v, ConDTMG) else v
            return ConDTMG(g, p)
        case ConJoin(l, r):
            lv = evaluate_con(l, registry)
            if not isinstance(lv, ConDTMG):
                lv = ConDTMG(lv, EMPTY_CRF)
            return con_connect(lv, evaluate_con(r, registry))
        case Beside(l, r):
            lv, rv = evaluate_con(l, registry), evaluate_con(r, registry)
            lg = lv.graph if isinstance(lv, ConDTMG) else lv
            rg = rv.graph if isinstance(rv, ConDTMG) else rv
            out = beside(lg, rg)
            if isinstance(lv, ConDTMG) or isinstance(rv, ConDTMG):
                lp = lv.routing if isinstance(lv, ConDTMG) else EMPTY_CRF
                rp = rv.routing if isinstance(rv, ConDTMG) else EMPTY_CRF
                return ConDTMG(out, crf_beside(lp, rp, len(lg.outputs), lp.max_input))
            return out
    return evaluate(x, registry)


def con_to_expr(x, registry: TypeRegistry) -> Expr:
    """Translate a con expression into an ordinary construction expression.

    The routing used at each join is the one the left operand evaluates to,
    so shifted routings surfaced through nested joins are accounted for.
    """
    match x:
        case Route(_, body):
            return con_to_expr(body, registry)
        case ConJoin(l, r):
            lv = evaluate_con(l, registry)
            p = lv.routing if isinstance(lv, ConDTMG) else EMPTY_CRF
            return ConnectC(p, con_to_expr(l, registry), con_to_expr(r, registry))
        case Beside(l, r):
            return Beside(con_to_expr(l, registry), con_to_expr(r, registry))
    return x
