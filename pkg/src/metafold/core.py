"""Typed metagraphs: registries, edges, connections, TMGs and DTMGs.

Everything here is immutable once built.  A :class:`TMG` may hold
invalid connections (that is what :func:`validate` reports on); the
constructors in :mod:`metafold.construct` only ever produce valid ones.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

from .errors import PartitionError, RegistryError, UnknownNameError

ROOT = "e"
WRAPPER = "M"


# ---------------------------------------------------------------------------
# types
# ---------------------------------------------------------------------------

class TypeRegistry:
    """Named types with an acyclic inheritance relation rooted at ``e``.

    ``parents`` maps a type name to a sequence of parent links; each link
    is either a parent name or a ``(parent, weight)`` pair.  Types listed
    without parents inherit directly from ``e``.  The closure is computed
    eagerly, so lookups are dictionary hits.
    """

    __slots__ = ("_links", "_best")

    def __init__(self, parents: Mapping[str, Iterable] | None = None):
        links: dict[str, tuple[tuple[str, float], ...]] = {ROOT: ()}
        for name, plist in (parents or {}).items():
            if name == ROOT:
                if plist:
                    raise RegistryError("the root type e cannot have parents")
                continue
            if isinstance(plist, (str, tuple)) and not _is_link_list(plist):
                plist = [plist]
            norm = []
            for link in plist:
                if isinstance(link, str):
                    norm.append((link, 1.0))
                else:
                    p, w = link
                    w = float(w)
                    if not 0.0 <= w <= 1.0:
                        raise RegistryError(f"inheritance weight {w} for {name}:{p} outside [0,1]")
                    norm.append((p, w))
            links[name] = tuple(norm) if norm else ((ROOT, 1.0),)
        for name, plist in links.items():
            for p, _ in plist:
                if p not in links:
                    raise UnknownNameError(f"type {name!r} names unknown parent {p!r}")
        self._links = links
        self._best = self._closure()

    def _closure(self):
        # best[t][a] = max product of weights over chains t -> ... -> a
        best: dict[str, dict[str, float]] = {}
        state: dict[str, int] = {}

        def visit(t, stack):
            if state.get(t) == 2:
                return
            if state.get(t) == 1:
                raise RegistryError("inheritance cycle through " + " -> ".join(stack + [t]))
            state[t] = 1
            row = {t: 1.0}
            for p, w in self._links[t]:
                visit(p, stack + [t])
                for a, v in best[p].items():
                    if w * v > row.get(a, -1.0):
                        row[a] = w * v
            best[t] = row
            state[t] = 2

        for t in sorted(self._links):
            visit(t, [])
        return best

    # -- construction helpers ------------------------------------------------
    def with_type(self, name: str, parent: str | Iterable = ROOT, weight: float = 1.0) -> "TypeRegistry":
        parents = {n: l for n, l in self._links.items() if n != ROOT}
        if isinstance(parent, str):
            new = [(parent, weight)]
        else:
            new = list(parent)
        parents[name] = tuple(parents.get(name, ())) + tuple(
            (l, 1.0) if isinstance(l, str) else tuple(l) for l in new)
        return TypeRegistry(parents)

    # -- queries --------------------------------------------------------------
    @property
    def names(self) -> tuple[str, ...]:
        return tuple(sorted(self._links))

    def parents(self, name: str) -> tuple[tuple[str, float], ...]:
        self._check(name)
        return self._links[name]

    def links(self):
        """All parent links as ``(child, parent, weight)``, sorted."""
        return sorted((c, p, w) for c, pl in self._links.items() for p, w in pl)

    def __contains__(self, name) -> bool:
        return name in self._links

    def _check(self, name):
        if name not in self._links:
            raise UnknownNameError(f"unknown type {name!r}")

    def inherits(self, t1: str, t2: str) -> bool:
        self._check(t1)
        self._check(t2)
        return t2 in self._best[t1]

    def inherit_weight(self, t1: str, t2: str) -> float:
        self._check(t1)
        self._check(t2)
        return self._best[t1].get(t2, 0.0)

    def comparable(self, t1: str, t2: str) -> bool:
        return self.inherits(t1, t2) or self.inherits(t2, t1)

    def comparable_weight(self, t1: str, t2: str) -> float:
        return max(self.inherit_weight(t1, t2), self.inherit_weight(t2, t1))

    def __eq__(self, other):
        return isinstance(other, TypeRegistry) and self._links == other._links

    def __hash__(self):
        return hash(frozenset(self._links.items()))

    def __repr__(self):
        body = ", ".join(f"{c}:{p}" + ("" if w == 1.0 else f"@{w}") for c, p, w in self.links())
        return f"TypeRegistry({body})"


def _is_link_list(x) -> bool:
    # ("A", 0.5) is a single weighted link, ["A", "B"] is a list of links
    return isinstance(x, tuple) and not (len(x) == 2 and isinstance(x[0], str)
                                         and isinstance(x[1], (int, float)))


def inherits(reg: TypeRegistry, t1: str, t2: str) -> bool:
    return reg.inherits(t1, t2)


def comparable(reg: TypeRegistry, t1: str, t2: str) -> bool:
    return reg.comparable(t1, t2)


def comparable_weight(reg: TypeRegistry, t1: str, t2: str) -> float:
    return reg.comparable_weight(t1, t2)


# ---------------------------------------------------------------------------
# values
# ---------------------------------------------------------------------------

def freeze_values(values) -> tuple:
    """Normalize a value list: nested lists become tuples."""
    out = []
    for v in values:
        if isinstance(v, (list, tuple)):
            out.append(freeze_values(v))
        elif isinstance(v, bool):
            out.append(int(v))
        elif isinstance(v, (int, float, str)):
            out.append(v)
        else:
            raise TypeError(f"unsupported value {v!r}; use int, float, str or lists of them")
    return tuple(out)


def value_key(v):
    """Total-order key for a (possibly nested) value."""
    if isinstance(v, tuple):
        return ("l", tuple(value_key(x) for x in v))
    if isinstance(v, float):
        return ("f", v)
    if isinstance(v, int):
        return ("i", v)
    return ("s", v)


# ---------------------------------------------------------------------------
# edges and connections
# ---------------------------------------------------------------------------

class Target(NamedTuple):
    label: int
    type: str


class TargetRef(NamedTuple):
    edge: str
    slot: int

    def __str__(self):
        return f"{self.edge}.{self.slot}"


@dataclass(frozen=True)
class Edge:
    """A typed-target tuple plus values.

    ``wire`` marks the structural identity/swap edges produced by
    :func:`metafold.construct.swap_prim`; they are contracted away when
    law checks compare DTMGs.
    """

    id: str
    type: str
    targets: tuple[Target, ...] = ()
    values: tuple = ()
    wire: bool = False

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(Target(int(l), t) for l, t in self.targets))
        object.__setattr__(self, "values", freeze_values(self.values))

    @property
    def arity(self) -> int:
        return len(self.targets)

    def target_type(self, slot: int) -> str:
        """Type at ``slot``; slot 0 is the whole edge."""
        return self.type if slot == 0 else self.targets[slot - 1].type

    @property
    def key(self):
        """Id-free content key used for canonical ordering."""
        return (self.type, tuple(self.targets), tuple(value_key(v) for v in self.values), self.wire)

    def renamed(self, new_id: str) -> "Edge":
        return Edge(new_id, self.type, self.targets, self.values, self.wire)


@dataclass(frozen=True, order=True)
class Connection:
    """``(a, sa, b, sb)``: slot ``sa`` of edge ``a`` joined to slot ``sb`` of ``b``.

    Orientation is meaningful inside DTMGs: ``a.sa`` plays the output
    role and ``b.sb`` the input role.
    """

    a: str
    sa: int
    b: str
    sb: int

    @property
    def ends(self) -> tuple[TargetRef, TargetRef]:
        return TargetRef(self.a, self.sa), TargetRef(self.b, self.sb)

    def reversed(self) -> "Connection":
        return Connection(self.b, self.sb, self.a, self.sa)

    def __str__(self):
        return f"{self.a}.{self.sa}->{self.b}.{self.sb}"


# ---------------------------------------------------------------------------
# TMG
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TMG:
    registry: TypeRegistry
    edges: tuple[Edge, ...] = ()
    connections: tuple[Connection, ...] = ()
    _index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        edges = tuple(sorted(self.edges, key=lambda e: e.id))
        index = {}
        for e in edges:
            if e.id in index:
                raise ValueError(f"duplicate edge id {e.id!r}")
            index[e.id] = e
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "connections", tuple(sorted(set(self.connections))))
        object.__setattr__(self, "_index", index)

    def edge(self, eid: str) -> Edge:
        try:
            return self._index[eid]
        except KeyError:
            raise UnknownNameError(f"unknown edge {eid!r}") from None

    def __contains__(self, eid) -> bool:
        return eid in self._index

    @property
    def edge_ids(self) -> tuple[str, ...]:
        return tuple(self._index)

    def __len__(self):
        return len(self.edges)

    def ref_type(self, ref: TargetRef) -> str:
        return self.edge(ref.edge).target_type(ref.slot)

    def connected_refs(self) -> set[TargetRef]:
        out = set()
        for c in self.connections:
            for r in c.ends:
                if r.slot != 0:
                    out.add(r)
        return out

    def connections_of(self, eid: str) -> tuple[Connection, ...]:
        return tuple(c for c in self.connections if c.a == eid or c.b == eid)

    def replace(self, edges=None, connections=None) -> "TMG":
        return TMG(self.registry,
                   self.edges if edges is None else tuple(edges),
                   self.connections if connections is None else tuple(connections))

    def has_link(self, x: TargetRef, y: TargetRef) -> bool:
        c = Connection(x.edge, x.slot, y.edge, y.slot)
        return c in self.connections or c.reversed() in self.connections


def empty_tmg(registry: TypeRegistry) -> TMG:
    return TMG(registry)


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: str
    message: str
    severity: str = "error"

    def __str__(self):
        return f"{self.kind}: {self.subject}: {self.message}"


def validate(g: TMG, notes: bool = False) -> list[Violation]:
    """Check every TMG invariant; returns violations as data.

    With ``notes=True`` targets that take part in several connections
    are reported with severity ``"note"`` (allowed, but worth knowing).
    """
    reg = g.registry
    out: list[Violation] = []
    for e in g.edges:
        if e.type not in reg:
            out.append(Violation("unknown-type", e.id, f"edge type {e.type!r} is not registered"))
        for i, t in enumerate(e.targets, 1):
            if t.type not in reg:
                out.append(Violation("unknown-type", f"{e.id}.{i}", f"target type {t.type!r} is not registered"))
            if not 1 <= t.label <= e.arity:
                out.append(Violation("label-range", f"{e.id}.{i}",
                                     f"index label {t.label} outside [1,{e.arity}]"))
    uses: dict[TargetRef, int] = {}
    for c in g.connections:
        subj = str(c)
        missing = [x for x in (c.a, c.b) if x not in g]
        if missing:
            out.append(Violation("unknown-edge", subj, f"references missing edge {missing[0]!r}"))
            continue
        ea, eb = g.edge(c.a), g.edge(c.b)
        bad = False
        for eid, s, e in ((c.a, c.sa, ea), (c.b, c.sb, eb)):
            if not 0 <= s <= e.arity:
                out.append(Violation("slot-range", subj, f"slot {s} of {eid!r} outside {{0}}+[{e.arity}]"))
                bad = True
        if bad:
            continue
        if c.sa == 0 and c.sb == 0:
            out.append(Violation("whole-whole", subj, "at most one side may be the whole edge (slot 0)"))
            continue
        ta, tb = ea.target_type(c.sa), eb.target_type(c.sb)
        if ta in reg and tb in reg and not reg.comparable(ta, tb):
            out.append(Violation("type-compat", subj, f"types {ta!r} and {tb!r} are not comparable"))
        for r in c.ends:
            if r.slot:
                uses[r] = uses.get(r, 0) + 1
    if notes:
        for r, n in sorted(uses.items()):
            if n > 1:
                out.append(Violation("shared-target", str(r), f"target joins {n} connections", "note"))
    return out


def dangling_targets(g: TMG) -> list[tuple[TargetRef, str]]:
    used = g.connected_refs()
    return [(TargetRef(e.id, i), t.type)
            for e in g.edges for i, t in enumerate(e.targets, 1)
            if TargetRef(e.id, i) not in used]


def external_targets(g: TMG, sub: Iterable[str]) -> list[tuple[TargetRef, str]]:
    """Targets of ``sub`` that are dangling or connected only outside ``sub``."""
    sub = set(sub)
    for eid in sub:
        g.edge(eid)
    internal = set()
    for c in g.connections:
        (x, y) = c.ends
        if x.slot and x.edge in sub and y.edge in sub:
            internal.add(x)
        if y.slot and y.edge in sub and x.edge in sub:
            internal.add(y)
    return [(TargetRef(e.id, i), t.type)
            for e in g.edges if e.id in sub
            for i, t in enumerate(e.targets, 1)
            if TargetRef(e.id, i) not in internal]


def fresh_id(base: str, taken) -> str:
    if base not in taken:
        return base
    k = 1
    while f"{base}_{k}" in taken:
        k += 1
    return f"{base}_{k}"


def wrap(g: TMG, wrapper_type: str = WRAPPER, wrapper_id: str = "M") -> TMG:
    """Add one unordered wrapper edge with a target on each edge of ``g``."""
    if wrapper_type not in g.registry:
        raise UnknownNameError(f"wrapper type {wrapper_type!r} is not registered")
    wid = fresh_id(wrapper_id, g.edge_ids)
    targets = tuple(Target(1, e.type) for e in g.edges)
    conns = [Connection(wid, i, e.id, 0) for i, e in enumerate(g.edges, 1)]
    return g.replace(edges=g.edges + (Edge(wid, wrapper_type, targets),),
                     connections=g.connections + tuple(conns))


# ---------------------------------------------------------------------------
# DTMG
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DTMG:
    """A TMG whose dangling targets are split into input/output/lateral lists."""

    base: TMG
    inputs: tuple[TargetRef, ...] = ()
    outputs: tuple[TargetRef, ...] = ()
    lateral: tuple[TargetRef, ...] = ()

    def __post_init__(self):
        for name in ("inputs", "outputs", "lateral"):
            object.__setattr__(self, name, tuple(TargetRef(*r) for r in getattr(self, name)))

    @property
    def registry(self) -> TypeRegistry:
        return self.base.registry

    @property
    def edges(self):
        return self.base.edges

    @property
    def connections(self):
        return self.base.connections

    def is_empty(self) -> bool:
        return not self.base.edges

    def __len__(self):
        return len(self.base.edges)

    def input_types(self) -> tuple[str, ...]:
        return tuple(self.base.ref_type(r) for r in self.inputs)

    def output_types(self) -> tuple[str, ...]:
        return tuple(self.base.ref_type(r) for r in self.outputs)


def empty_dtmg(registry: TypeRegistry) -> DTMG:
    return DTMG(TMG(registry))


def check_partition(externals, inputs, outputs, lateral):
    seen: dict[TargetRef, int] = {}
    for r in list(inputs) + list(outputs) + list(lateral):
        seen[r] = seen.get(r, 0) + 1
    ext = set(externals)
    missing = sorted(ext - set(seen))
    dup = sorted(r for r, n in seen.items() if n > 1)
    extra = sorted(set(seen) - ext)
    if missing or dup or extra:
        parts = []
        if missing:
            parts.append("missing " + " ".join(map(str, missing)))
        if dup:
            parts.append("duplicated " + " ".join(map(str, dup)))
        if extra:
            parts.append("not external " + " ".join(map(str, extra)))
        raise PartitionError("; ".join(parts), missing, dup, extra)


def make_dtmg(g: TMG, inputs=(), outputs=(), lateral=()) -> DTMG:
    inputs, outputs, lateral = (tuple(TargetRef(*r) for r in x) for x in (inputs, outputs, lateral))
    check_partition([r for r, _ in dangling_targets(g)], inputs, outputs, lateral)
    return DTMG(g, inputs, outputs, lateral)


def lateral_dtmg(g: TMG) -> DTMG:
    """View a TMG as a DTMG with every dangling target lateral."""
    return DTMG(g, (), (), tuple(r for r, _ in dangling_targets(g)))


def target_roles(d: DTMG) -> dict[TargetRef, str]:
    """Role of every target: ``in``/``out``/``lat``.

    External targets take their role from the partition lists; a
    connected target takes the role implied by connection orientation
    (source side ``out``, destination side ``in``).  A target that is
    both gets ``conflict``.
    """
    roles: dict[TargetRef, str] = {}
    for r in d.inputs:
        roles[r] = "in"
    for r in d.outputs:
        roles[r] = "out"
    for r in d.lateral:
        roles[r] = "lat"
    for c in d.base.connections:
        for r, role in ((TargetRef(c.a, c.sa), "out"), (TargetRef(c.b, c.sb), "in")):
            if r.slot == 0:
                continue
            prev = roles.get(r)
            roles[r] = role if prev in (None, role) else "conflict"
    return roles


def restrict(d: DTMG | TMG, edge_ids: Iterable[str]) -> DTMG:
    """Sub-DTMG induced by ``edge_ids``.

    Targets cut off from the rest of ``d`` keep the role they had in
    ``d`` (see :func:`target_roles`).  List order follows the position
    in ``d``'s own lists, then ``(edge, slot)``.
    """
    if isinstance(d, TMG):
        d = lateral_dtmg(d)
    keep = set(edge_ids)
    for eid in keep:
        d.base.edge(eid)
    g = d.base
    sub = TMG(g.registry, [e for e in g.edges if e.id in keep],
              [c for c in g.connections if c.a in keep and c.b in keep])
    roles = target_roles(d)
    order = {r: i for i, r in enumerate(d.inputs + d.outputs + d.lateral)}
    ext = [r for r, _ in dangling_targets(sub)]
    ext.sort(key=lambda r: (order.get(r, len(order)), r))
    buckets = {"in": [], "out": [], "lat": []}
    for r in ext:
        role = roles.get(r, "lat")
        if role == "conflict":
            raise PartitionError(f"target {r} is both input and output", duplicated=[r])
        buckets[role].append(r)
    return DTMG(sub, tuple(buckets["in"]), tuple(buckets["out"]), tuple(buckets["lat"]))


# ---------------------------------------------------------------------------
# metapath predicates
# ---------------------------------------------------------------------------

def _host_tmg(parts, host):
    if host is not None:
        return host.base if isinstance(host, DTMG) else host
    edges, conns = {}, set()
    for p in parts:
        for e in p.base.edges:
            edges.setdefault(e.id, e)
        conns.update(p.base.connections)
    return TMG(parts[0].registry, tuple(edges.values()),
               tuple(c for c in conns if c.a in edges and c.b in edges))


def _feeds(refs, sources, host: TMG) -> bool:
    sources = set(sources)
    for r in refs:
        if not any(host.has_link(r, s) for s in sources):
            return False
    return True


def provides_input(g2: DTMG, g: DTMG, host=None) -> bool:
    """Every input of ``g`` is connected to some output of ``g2`` in ``host``."""
    if not g.inputs:
        return True
    return _feeds(g.inputs, g2.outputs, _host_tmg([g, g2], host))


def receives_output(g3: DTMG, g: DTMG, host=None) -> bool:
    """Every output of ``g`` is connected to some input of ``g3`` in ``host``."""
    if not g.outputs:
        return True
    return _feeds(g.outputs, g3.inputs, _host_tmg([g, g3], host))


def is_metapath(g: DTMG, g2: DTMG, g3: DTMG, host=None) -> bool:
    return provides_input(g2, g, host) and receives_output(g3, g, host)


def metapath_weight(d: DTMG | TMG) -> float:
    """Product of the compatibility weights of every connection."""
    g = d.base if isinstance(d, DTMG) else d
    w = 1.0
    for c in g.connections:
        ta = g.edge(c.a).target_type(c.sa)
        tb = g.edge(c.b).target_type(c.sb)
        w *= g.registry.comparable_weight(ta, tb)
    return w
