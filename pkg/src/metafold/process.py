"""Processes over a shared TMG: traversals, realized TMGs, forgetting."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .core import (DTMG, TMG, Connection, Edge, TargetRef, TypeRegistry, fresh_id,
                   target_roles, validate, value_key)
from .errors import (MembershipError, PartitionError, SlotRangeError, StateError, TraceError,
                     TypeMismatchError, UnknownNameError)
from .morph import FTMG


# ---------------------------------------------------------------------------
# traversals
# ---------------------------------------------------------------------------

class TraversalEvent(NamedTuple):
    src: str
    src_idx: tuple
    dst: str
    dst_idx: tuple
    time: int = 0


class StateOp(NamedTuple):
    """A forget/reinsert step recorded inside a trace."""

    kind: str  # "forget" | "reinsert"
    edge: str


@dataclass(frozen=True)
class Trace:
    name: str
    steps: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    @property
    def events(self) -> tuple:
        return tuple(s for s in self.steps if isinstance(s, TraversalEvent))

    @property
    def ops(self) -> tuple:
        return tuple(s for s in self.steps if isinstance(s, StateOp))


def events_of(trace) -> list[TraversalEvent]:
    if isinstance(trace, Trace):
        return list(trace.events)
    return [s for s in trace if isinstance(s, TraversalEvent)]


def stamp(events: Iterable) -> list[TraversalEvent]:
    """Renumber timestamps 1, 2, ... in list order."""
    return [TraversalEvent(e.src, tuple(e.src_idx), e.dst, tuple(e.dst_idx), t)
            for t, e in enumerate(events, 1)]


def _check_event(base: TMG, ev: TraversalEvent):
    for eid, idx in ((ev.src, ev.src_idx), (ev.dst, ev.dst_idx)):
        e = base.edge(eid)
        for i in idx:
            if not 1 <= i <= e.arity:
                raise SlotRangeError(f"index {i} outside [1,{e.arity}] on edge {eid!r}")
    if len(ev.src_idx) != len(ev.dst_idx):
        raise TraceError(f"event {ev.src}->{ev.dst} binds {len(ev.src_idx)} source "
                         f"and {len(ev.dst_idx)} destination indices")


def traversal_to_dtmg(base: TMG, trace) -> DTMG:
    """The DTMG a traversal carves out of ``base``.

    Each event binds source targets to destination targets pairwise and
    orients the binding source to destination, so bound source targets
    act as outputs and bound destination targets as inputs.  Targets
    the trace never binds are lateral.
    """
    events = events_of(trace)
    last = None
    for ev in events:
        if last is not None and ev.time <= last:
            raise TraceError(f"timestamps must increase ({last} then {ev.time})")
        last = ev.time
        _check_event(base, ev)
    reg = base.registry
    touched, conns = [], []
    for ev in events:
        for eid in (ev.src, ev.dst):
            if eid not in touched:
                touched.append(eid)
        for i, j in zip(ev.src_idx, ev.dst_idx):
            x, y = TargetRef(ev.src, i), TargetRef(ev.dst, j)
            tx, ty = base.ref_type(x), base.ref_type(y)
            if not base.has_link(x, y) and not reg.comparable(tx, ty):
                raise TypeMismatchError(f"binding {x} -> {y} joins incomparable {tx!r} and {ty!r}")
            conns.append(Connection(ev.src, i, ev.dst, j))
    sub = TMG(reg, [base.edge(e) for e in touched], conns)
    bound = {r for c in sub.connections for r in c.ends}
    lateral = tuple(TargetRef(e.id, i) for e in sub.edges for i in range(1, e.arity + 1)
                    if TargetRef(e.id, i) not in bound)
    d = DTMG(sub, (), (), lateral)
    clash = sorted(r for r, v in target_roles(d).items() if v == "conflict")
    if clash:
        raise PartitionError(f"target {clash[0]} is both input and output in one traversal",
                             duplicated=clash)
    return d


def edge_roles(d: DTMG) -> dict[str, tuple[frozenset, frozenset, frozenset]]:
    """Per edge: (input slots, output slots, lateral slots), connected targets included."""
    roles = target_roles(d)
    out = {}
    for e in d.base.edges:
        ins, outs, lat = set(), set(), set()
        for i in range(1, e.arity + 1):
            r = roles.get(TargetRef(e.id, i), "lat")
            {"in": ins, "out": outs}.get(r, lat).add(i)
        out[e.id] = (frozenset(ins), frozenset(outs), frozenset(lat))
    return out


def reverse_trace(trace):
    """Same bindings, opposite temporal order."""
    evs = [TraversalEvent(e.dst, e.dst_idx, e.src, e.src_idx) for e in reversed(events_of(trace))]
    evs = stamp(evs)
    if isinstance(trace, Trace):
        return Trace(trace.name, tuple(evs) + trace.ops)
    return evs


def traces_to_ftmg(base: TMG, traces, weights=None) -> FTMG:
    forest = []
    extra = []
    for k, tr in enumerate(traces):
        try:
            d = traversal_to_dtmg(base, tr)
        except Exception as exc:
            raise TraceError(f"trace {k}: {exc}", k) from exc
        forest.append(d)
        for c in d.base.connections:
            if not base.has_link(*c.ends):
                extra.append(c)
    full = base.replace(connections=base.connections + tuple(extra)) if extra else base
    return FTMG(full, tuple(forest), weights)


# ---------------------------------------------------------------------------
# virtual and realized TMGs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VirtualTMG:
    """Membership oracle for the bounded universe of possible edges."""

    registry: TypeRegistry
    max_arity: int = 8
    value_range: tuple | None = None  # inclusive (lo, hi) for numeric values
    max_values: int = 8

    def reason(self, e: Edge) -> str | None:
        if e.arity > self.max_arity:
            return f"arity {e.arity} exceeds the bound {self.max_arity}"
        for t in (e.type,) + tuple(t.type for t in e.targets):
            if t not in self.registry:
                return f"type {t!r} is not registered"
        if len(e.values) > self.max_values:
            return f"{len(e.values)} values exceed the bound {self.max_values}"
        if self.value_range is not None:
            lo, hi = self.value_range
            for v in _flat(e.values):
                if isinstance(v, (int, float)) and not lo <= v <= hi:
                    return f"value {v} outside [{lo},{hi}]"
        return None

    def admits(self, e: Edge) -> bool:
        return self.reason(e) is None


def _flat(values):
    for v in values:
        if isinstance(v, tuple):
            yield from _flat(v)
        else:
            yield v


def forget_key(e: Edge):
    """Value-stripped identity of an edge for forgetting purposes."""
    return (e.type, e.targets, tuple(value_key(v) for v in e.values))


@dataclass(frozen=True)
class RealizedTMG:
    virtual: VirtualTMG
    tmg: TMG
    counters: tuple = ()      # sorted ((key, (c1, c2, ...)), ...)
    superseded: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "counters", tuple(sorted(dict(self.counters).items(), key=repr)))

    def counter_log(self, key) -> tuple:
        return dict(self.counters).get(key, ())

    def forgotten(self, key) -> int:
        return max(self.counter_log(key), default=0)

    def _with(self, **kw) -> "RealizedTMG":
        args = dict(virtual=self.virtual, tmg=self.tmg, counters=self.counters,
                    superseded=self.superseded)
        args.update(kw)
        return RealizedTMG(**args)


def empty_realized(virtual: VirtualTMG) -> RealizedTMG:
    return RealizedTMG(virtual, TMG(virtual.registry))


def _check_connections(g: TMG, conns):
    reg = g.registry
    for c in conns:
        for eid, s in ((c.a, c.sa), (c.b, c.sb)):
            e = g.edge(eid)
            if not 0 <= s <= e.arity:
                raise SlotRangeError(f"slot {s} outside {{0}}+[{e.arity}] on {eid!r}")
        if c.sa == 0 and c.sb == 0:
            raise SlotRangeError(f"{c}: at most one side may be the whole edge")
        ta, tb = g.edge(c.a).target_type(c.sa), g.edge(c.b).target_type(c.sb)
        if not reg.comparable(ta, tb):
            raise TypeMismatchError(f"{c} joins incomparable {ta!r} and {tb!r}")


def realize(r: RealizedTMG, edge: Edge, connections=()) -> RealizedTMG:
    why = r.virtual.reason(edge)
    if why:
        raise MembershipError(why)
    if edge.id in r.tmg:
        raise StateError(f"edge id {edge.id!r} is already realized")
    conns = tuple(Connection(*c) for c in connections)
    g = r.tmg.replace(edges=r.tmg.edges + (edge,))
    _check_connections(g, conns)
    return r._with(tmg=g.replace(connections=g.connections + conns))


def value_update(r: RealizedTMG, eid: str, values, new_id: str | None = None) -> RealizedTMG:
    """Bring in an edge with new values and move every connection onto it.

    The old edge stays, disconnected, until :func:`compact`.
    """
    old = r.tmg.edge(eid)
    nid = new_id or fresh_id(eid, set(r.tmg.edge_ids))
    if nid in r.tmg:
        raise StateError(f"edge id {nid!r} is already realized")
    new = Edge(nid, old.type, old.targets, values, old.wire)
    why = r.virtual.reason(new)
    if why:
        raise MembershipError(why)

    def move(x, s):
        return (nid if x == eid else x), s

    conns = []
    for c in r.tmg.connections:
        a, sa = move(c.a, c.sa)
        b, sb = move(c.b, c.sb)
        conns.append(Connection(a, sa, b, sb))
    g = TMG(r.tmg.registry, r.tmg.edges + (new,), conns)
    return r._with(tmg=g, superseded=r.superseded | {eid})


def compact(r: RealizedTMG) -> RealizedTMG:
    """Drop superseded edges that no longer take part in any connection."""
    busy = {x for c in r.tmg.connections for x in (c.a, c.b)}
    gone = {e for e in r.superseded if e not in busy}
    g = r.tmg.replace(edges=[e for e in r.tmg.edges if e.id not in gone])
    return r._with(tmg=g, superseded=r.superseded - gone)


def _bump(r: RealizedTMG, key) -> RealizedTMG:
    log = dict(r.counters)
    seen = log.get(key, ())
    log[key] = seen + (max(seen, default=0) + 1,)
    return r._with(counters=tuple(log.items()))


def forget(r: RealizedTMG, eid: str) -> RealizedTMG:
    if eid not in r.tmg:
        raise StateError(f"cannot forget {eid!r}: not realized")
    return _bump(r, forget_key(r.tmg.edge(eid)))


def reinsert(r: RealizedTMG, eid: str) -> RealizedTMG:
    if eid not in r.tmg:
        raise StateError(f"cannot reinsert {eid!r}: not realized")
    key = forget_key(r.tmg.edge(eid))
    if not r.counter_log(key):
        raise StateError(f"cannot reinsert {eid!r}: it was never forgotten")
    return _bump(r, key)


def is_pruned_out(r: RealizedTMG, e: Edge) -> bool:
    return r.forgotten(forget_key(e)) % 2 == 1


def pruned(r: RealizedTMG) -> TMG:
    keep = [e for e in r.tmg.edges if not is_pruned_out(r, e)]
    ids = {e.id for e in keep}
    return TMG(r.tmg.registry, keep,
               [c for c in r.tmg.connections if c.a in ids and c.b in ids])


def replay_ops(r: RealizedTMG, ops) -> RealizedTMG:
    for op in ops:
        match op:
            case StateOp("forget", eid):
                r = forget(r, eid)
            case StateOp("reinsert", eid):
                r = reinsert(r, eid)
            case _:
                raise TraceError(f"unknown state operation {op!r}")
    return r


def realized_from(g: TMG, max_arity: int = 64) -> RealizedTMG:
    """Treat an existing TMG as the realized part of a generous virtual TMG."""
    v = VirtualTMG(g.registry, max(max_arity, max((e.arity for e in g.edges), default=0)),
                   None, max(8, max((len(e.values) for e in g.edges), default=0)))
    bad = validate(g)
    if bad:
        raise MembershipError(str(bad[0]))
    return RealizedTMG(v, g)
