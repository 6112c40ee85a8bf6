"""Metapath topology, Heyting operations, homomorphisms and smooth maps.

The topology on a host DTMG is the one generated by its length-2
metapaths: for every connection ``a.i -> b.j`` between distinct edges
with nonzero slots, ``{a, b}`` is a subbasis element.  Open sets are
unions of finite intersections of those, plus the whole edge set.
Finite intersections of two-element sets are the sets themselves, a
shared singleton, or empty, so the basis is the subbasis together with
every edge lying in at least two subbasis elements as a singleton.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from . import kernels
from .core import DTMG, TMG, Connection, TargetRef, lateral_dtmg
from .errors import (ApplicabilityError, ContinuityError, HostError, MappingError,
                     SmoothnessError, UnknownNameError)


# ---------------------------------------------------------------------------
# topology
# ---------------------------------------------------------------------------

class Topology:
    """Edge indexing and basis masks for one host."""

    def __init__(self, host: DTMG):
        self.host = host
        self.ids = host.base.edge_ids
        self.index = {e: i for i, e in enumerate(self.ids)}
        self.full = (1 << len(self.ids)) - 1
        pairs = set()
        for c in host.base.connections:
            if c.a != c.b and c.sa and c.sb:
                pairs.add(frozenset((c.a, c.b)))
        self.subbasis = tuple(sorted((self.mask(p) for p in pairs)))
        count = {}
        for m in self.subbasis:
            for i in range(len(self.ids)):
                if m >> i & 1:
                    count[i] = count.get(i, 0) + 1
        singles = tuple(1 << i for i, n in sorted(count.items()) if n >= 2)
        self.basis = self.subbasis + singles

    def mask(self, edges: Iterable[str]) -> int:
        m = 0
        for e in edges:
            try:
                m |= 1 << self.index[e]
            except KeyError:
                raise UnknownNameError(f"edge {e!r} is not in the host") from None
        return m

    def edges(self, mask: int) -> frozenset:
        return frozenset(e for i, e in enumerate(self.ids) if mask >> i & 1)

    def interior(self, mask: int) -> int:
        return kernels.interior(mask, self.basis, self.full)

    def is_open(self, mask: int) -> bool:
        return self.interior(mask) == mask

    def opens(self) -> list[int]:
        return kernels.open_family(self.basis, self.full)


@functools.lru_cache(maxsize=512)
def topology(host: DTMG | TMG) -> Topology:
    if isinstance(host, TMG):
        host = lateral_dtmg(host)
    return Topology(host)


@dataclass(frozen=True)
class OpenSet:
    host: DTMG
    mask: int

    @property
    def edges(self) -> frozenset:
        return topology(self.host).edges(self.mask)

    @property
    def is_empty(self) -> bool:
        return self.mask == 0

    @property
    def is_whole(self) -> bool:
        return self.mask == topology(self.host).full

    def __le__(self, other: "OpenSet") -> bool:
        return leq(self, other)

    def __str__(self):
        return "{" + ",".join(sorted(self.edges)) + "}"


def _topo(d):
    return topology(d)


def _as_mask(t: Topology, s) -> int:
    if isinstance(s, OpenSet):
        if s.host != t.host:
            raise HostError("open set belongs to a different host")
        return s.mask
    if isinstance(s, int):
        return s
    return t.mask(s)


def subbasis(d: DTMG) -> list[OpenSet]:
    t = _topo(d)
    return [OpenSet(t.host, m) for m in t.subbasis]


def is_open(d: DTMG, s) -> bool:
    t = _topo(d)
    return t.is_open(_as_mask(t, s))


def interior(d: DTMG, s) -> OpenSet:
    t = _topo(d)
    return OpenSet(t.host, t.interior(_as_mask(t, s)))


def open_set(d: DTMG, s) -> OpenSet:
    """Wrap ``s`` as an open set; raises ValueError when it is not open."""
    t = _topo(d)
    m = _as_mask(t, s)
    if not t.is_open(m):
        raise ValueError(f"{sorted(t.edges(m))} is not open")
    return OpenSet(t.host, m)


def whole(d: DTMG) -> OpenSet:
    t = _topo(d)
    return OpenSet(t.host, t.full)


def empty_open(d: DTMG) -> OpenSet:
    return OpenSet(_topo(d).host, 0)


def all_opens(d: DTMG) -> list[OpenSet]:
    t = _topo(d)
    return [OpenSet(t.host, m) for m in t.opens()]


def _same_host(a: OpenSet, b: OpenSet) -> Topology:
    if a.host != b.host:
        raise HostError("open sets live on different hosts")
    return topology(a.host)


def join(a: OpenSet, b: OpenSet) -> OpenSet:
    _same_host(a, b)
    return OpenSet(a.host, a.mask | b.mask)


def meet(a: OpenSet, b: OpenSet) -> OpenSet:
    t = _same_host(a, b)
    return OpenSet(a.host, t.interior(a.mask & b.mask))


def leq(a: OpenSet, b: OpenSet) -> bool:
    _same_host(a, b)
    return a.mask & ~b.mask == 0


def heyting_implies(a: OpenSet, b: OpenSet) -> OpenSet:
    t = _same_host(a, b)
    return OpenSet(a.host, kernels.implies(a.mask, b.mask, t.basis, t.full))


def pseudo_complement(a: OpenSet) -> OpenSet:
    return heyting_implies(a, OpenSet(a.host, 0))


@dataclass(frozen=True)
class HeytingReport:
    edges: int
    opens: int
    residuation_failures: int
    maximality_failures: int
    non_boolean: tuple = ()  # an open a with join(not a, a) != whole, as edge ids

    @property
    def ok(self) -> bool:
        return self.residuation_failures == 0 and self.maximality_failures == 0


def heyting_check(d: DTMG) -> HeytingReport:
    """Exhaustive residuation and maximality check over every open triple."""
    t = _topo(d)
    opens = t.opens()
    res = kernels.residuation_failures(opens, t.basis, t.full)
    mx = kernels.implies_max_failures(opens, t.basis, t.full)
    witness = ()
    for a in opens:
        na = kernels.implies(a, 0, t.basis, t.full)
        if a | na != t.full:
            witness = tuple(sorted(t.edges(a)))
            break
    return HeytingReport(len(t.ids), len(opens), res, mx, witness)


# ---------------------------------------------------------------------------
# elementary homomorphisms
# ---------------------------------------------------------------------------

def _refs(targets: Mapping) -> dict[TargetRef, TargetRef]:
    return {TargetRef(*k): TargetRef(*v) for k, v in targets.items()}


def _all_targets(m: TMG, edges) -> set[TargetRef]:
    return {TargetRef(e, i) for e in edges for i in range(1, m.edge(e).arity + 1)}


@dataclass(frozen=True)
class HomMapping:
    """Identification of subgraph ``s1`` with ``s2`` through a target correspondence."""

    s1: frozenset
    s2: frozenset
    targets: Mapping = field(default_factory=dict)
    edge_map: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "s1", frozenset(self.s1))
        object.__setattr__(self, "s2", frozenset(self.s2))
        object.__setattr__(self, "targets", _refs(self.targets))
        object.__setattr__(self, "edge_map", dict(self.edge_map))

    @classmethod
    def positional(cls, m: TMG, pairs: Mapping[str, str]):
        """Map each source edge's ``k``-th target to the image edge's ``k``-th target."""
        targets, emap = {}, {}
        for a, b in pairs.items():
            ea, eb = m.edge(a), m.edge(b)
            if ea.arity != eb.arity:
                raise MappingError(f"{a!r} and {b!r} have different arities")
            emap[a] = b
            for k in range(1, ea.arity + 1):
                targets[(a, k)] = (b, k)
        return cls(frozenset(pairs), frozenset(pairs.values()), targets, emap)

    def induced_edges(self, m: TMG) -> dict[str, str]:
        """Edge map of ``s1`` into ``s2``; raises MappingError if a source edge splits."""
        out = dict(self.edge_map)
        for src, dst in self.targets.items():
            prev = out.get(src.edge)
            if prev is not None and prev != dst.edge:
                raise MappingError(f"targets of {src.edge!r} land on several edges")
            out[src.edge] = dst.edge
        for e in self.s1:
            if e not in out:
                if e in self.s2:
                    out[e] = e
                else:
                    raise MappingError(f"edge {e!r} has no image")
        return out


SmoothMapping = HomMapping  # same data; the conditions differ


def _subgraph_errors(m: TMG, h: HomMapping) -> list[str]:
    errs = []
    for e in h.s1 | h.s2:
        if e not in m:
            errs.append(f"edge {e!r} is not in the metagraph")
    if errs:
        return errs
    dom = _all_targets(m, h.s1)
    cod = _all_targets(m, h.s2)
    for s, t in h.targets.items():
        if s not in dom:
            errs.append(f"source {s} is not a target of S1")
        if t not in cod:
            errs.append(f"image {t} is not a target of S2")
    return errs


def elem_hom_violations(m: TMG, h: HomMapping) -> list[str]:
    """Failed conditions, first failure first; empty when ``h`` is elementary."""
    errs = _subgraph_errors(m, h)
    if errs:
        return errs
    dom = _all_targets(m, h.s1)
    cod = _all_targets(m, h.s2)
    tmap = h.targets
    if set(tmap) != dom:
        errs.append("bijection: not every target of S1 is mapped")
    if set(tmap.values()) != cod or len(set(tmap.values())) != len(tmap):
        errs.append("bijection: the correspondence is not 1-1 onto the targets of S2")
    for s, t in sorted(tmap.items()):
        if m.edge(s.edge).type != m.edge(t.edge).type:
            errs.append(f"edge types: {s.edge!r} and {t.edge!r} differ")
            break
    for s, t in sorted(tmap.items()):
        if m.ref_type(s) != m.ref_type(t):
            errs.append(f"target types: {s} and {t} differ")
            break
    items = sorted(tmap.items())
    for (s, t) in items:
        for (s2, t2) in items:
            ls = m.edge(s.edge).targets[s.slot - 1].label
            ls2 = m.edge(s2.edge).targets[s2.slot - 1].label
            lt = m.edge(t.edge).targets[t.slot - 1].label
            lt2 = m.edge(t2.edge).targets[t2.slot - 1].label
            src_same = s.edge == s2.edge
            dst_same = t.edge == t2.edge
            if src_same != dst_same or (src_same and (ls == ls2) != (lt == lt2)):
                errs.append(f"co-location: {s},{s2} vs {t},{t2}")
                return errs
    return errs


def elem_hom_check(m: TMG, h: HomMapping) -> bool:
    return not elem_hom_violations(m, h)


def _redirect(m: TMG, emap: Mapping[str, str], tmap: Mapping[TargetRef, TargetRef]) -> TMG:
    moved = {e for e, img in emap.items() if img != e}

    def move(r: TargetRef) -> TargetRef:
        if r.edge not in moved:
            return r
        if r.slot == 0:
            return TargetRef(emap[r.edge], 0)
        return tmap.get(r, TargetRef(emap[r.edge], r.slot))

    conns = []
    for c in m.connections:
        x, y = move(TargetRef(c.a, c.sa)), move(TargetRef(c.b, c.sb))
        if x == y:
            continue
        conns.append(Connection(x.edge, x.slot, y.edge, y.slot))
    return TMG(m.registry, [e for e in m.edges if e.id not in moved], conns)


def elem_hom_apply(m: TMG, h: HomMapping) -> TMG:
    errs = elem_hom_violations(m, h)
    if errs:
        raise MappingError(errs[0])
    return _redirect(m, h.induced_edges(m), h.targets)


def edge_map_apply(m: TMG, f: Mapping[str, str]) -> TMG:
    """Apply a positional edge map of ``m`` into itself in one go."""
    tmap = {TargetRef(a, k): TargetRef(b, k) for a, b in f.items()
            for k in range(1, m.edge(a).arity + 1)}
    return _redirect(m, dict(f), tmap)


MAX_HOM_STEPS = 6


def hom_decompose(m: TMG, f: Mapping[str, str], max_steps: int = MAX_HOM_STEPS):
    """Split an idempotent positional edge map into elementary steps.

    Edges sent to the same image must be identified one step at a time,
    so step ``k`` takes the ``k``-th source of every image.  Returns None
    when the map is not idempotent, a step is not elementary, or more
    than ``max_steps`` steps would be needed.
    """
    f = {a: b for a, b in f.items() if a != b}
    if not f:
        return []
    if any(b in f for b in f.values()):
        return None
    fibers: dict[str, list[str]] = {}
    for a in sorted(f):
        fibers.setdefault(f[a], []).append(a)
    n = max(len(v) for v in fibers.values())
    if n > max_steps:
        return None
    steps = []
    for k in range(n):
        pairs = {v[k]: img for img, v in sorted(fibers.items()) if len(v) > k}
        try:
            h = HomMapping.positional(m, pairs)
        except MappingError:
            return None
        if not elem_hom_check(m, h):
            return None
        steps.append(h)
    return steps


def hom_replay(m: TMG, steps) -> TMG:
    for h in steps:
        m = elem_hom_apply(m, h)
    return m


# ---------------------------------------------------------------------------
# smooth transformations
# ---------------------------------------------------------------------------

def smooth_violations(m: TMG, s: HomMapping) -> list[str]:
    errs = _subgraph_errors(m, s)
    if errs:
        return errs
    reg = m.registry
    dom = _all_targets(m, s.s1)
    if set(s.targets) != dom:
        errs.append("every target of S1 must be mapped")
    try:
        s.induced_edges(m)
    except MappingError as exc:
        errs.append(f"co-location: {exc}")
    for a, b in sorted(s.targets.items()):
        if not reg.inherits(m.edge(b.edge).type, m.edge(a.edge).type):
            errs.append(f"edge types: {b.edge!r} does not inherit from {a.edge!r}'s type")
            break
    for a, b in sorted(s.targets.items()):
        if not reg.inherits(m.ref_type(b), m.ref_type(a)):
            errs.append(f"target types: {b} does not inherit from {a}")
            break
    items = sorted(s.targets.items())
    for a, b in items:
        for a2, b2 in items:
            if a.edge == a2.edge and \
                    m.edge(a.edge).targets[a.slot - 1].label == m.edge(a2.edge).targets[a2.slot - 1].label:
                if b.edge != b2.edge or \
                        m.edge(b.edge).targets[b.slot - 1].label != m.edge(b2.edge).targets[b2.slot - 1].label:
                    errs.append(f"co-location: {a},{a2} split into {b},{b2}")
                    return errs
    return errs


def smooth_check(m: TMG | DTMG, s: HomMapping) -> bool:
    g = m.base if isinstance(m, DTMG) else m
    return not smooth_violations(g, s)


def induced_edge_map(m: TMG, s: HomMapping) -> dict[str, str]:
    """Whole-host edge map: identity off ``s1``."""
    emap = {e: e for e in m.edge_ids}
    emap.update(s.induced_edges(m))
    return emap


def preimage(host: DTMG, s: HomMapping, o: OpenSet) -> OpenSet:
    """``F^-1(o)`` for the edge map induced by ``s``; must come out open."""
    errs = smooth_violations(host.base, s)
    if errs:
        raise SmoothnessError(errs[0])
    t = topology(host)
    m = _as_mask(t, o)
    emap = induced_edge_map(host.base, s)
    images = [1 << t.index[emap[e]] for e in t.ids]
    pre = kernels.lower_preimage(images, m)
    if not t.is_open(pre):
        raise ContinuityError(f"preimage {sorted(t.edges(pre))} of {sorted(t.edges(m))} is not open")
    return OpenSet(t.host, pre)


# ---------------------------------------------------------------------------
# continuity of DTMG-to-DTMG morphisms
# ---------------------------------------------------------------------------

PROVENANCE_SEP = "#"


def provenance(name: str) -> str:
    """Source edge of an output edge named ``src`` or ``src#k``."""
    return name.split(PROVENANCE_SEP, 1)[0]


@dataclass(frozen=True)
class ContinuityReport:
    kind: str
    hypothesis_ok: bool
    continuous: bool
    checked: int
    failures: tuple = ()

    @property
    def theorem_violation(self) -> bool:
        return self.hypothesis_ok and not self.continuous


def continuity_of(source: DTMG, output: DTMG) -> tuple[bool, int, tuple]:
    """Check that every open of ``output`` pulls back to an open of ``source``.

    Lower preimages distribute over unions, so checking the basis and
    the whole set covers every open.
    """
    ts, to = topology(source), topology(output)
    images = [0] * len(ts.ids)
    for e in to.ids:
        src = provenance(e)
        if src not in ts.index:
            raise ApplicabilityError(f"output edge {e!r} has no source edge in the input")
        images[ts.index[src]] |= 1 << to.index[e]
    fails = []
    checks = list(to.basis) + [to.full, 0]
    for o in checks:
        pre = kernels.lower_preimage(images, o)
        if not ts.is_open(pre):
            fails.append((tuple(sorted(to.edges(o))), tuple(sorted(ts.edges(pre)))))
    return not fails, len(checks), tuple(fails)


M2M_KINDS = ("ana", "futu", "cata", "histo", "hylo", "chrono")


def m2m_continuity_check(kind: str, components: Mapping[str, Any], d: DTMG) -> ContinuityReport:
    """Run a DTMG-to-DTMG morphism on ``d`` and check continuity of the result.

    Output edges must be named after their source edge (``src`` or
    ``src#k``).  For the fold kinds the caller certifies continuity of
    the combining operators with ``components["oplus_continuous"]`` and
    ``components["otimes_continuous"]``; a discontinuous output is only
    a theorem violation when both certificates hold.
    """
    from . import morph
    from .construct import decompose, evaluate

    reg = d.registry
    seed = components.get("seed", decompose(d))
    match kind:
        case "ana":
            out = evaluate(morph.ana(components["coalgebra"], seed), reg)
        case "futu":
            out = evaluate(morph.futu(components["coalgebra"], seed, reg)[0], reg)
        case "cata":
            out = morph.cata(components["algebra"], seed)
        case "histo":
            out = morph.histo(components["algebra"], seed, reg)[0]
        case "hylo":
            out = morph.hylo(components["algebra"], components["coalgebra"], seed)
        case "chrono":
            out = morph.chrono(components["algebra"], components["coalgebra"], seed, reg)
        case _:
            raise ApplicabilityError(f"unknown morphism kind {kind!r}")
    if not isinstance(out, DTMG):
        raise ApplicabilityError(f"{kind} does not produce a DTMG here (got {type(out).__name__})")
    if kind in ("ana", "futu"):
        hyp = True
    else:
        hyp = bool(components.get("oplus_continuous", False)) and \
            bool(components.get("otimes_continuous", False))
    ok, n, fails = continuity_of(d, out)
    return ContinuityReport(kind, hyp, ok, n, fails)


# ---------------------------------------------------------------------------
# opens of a forest
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FtmgOpen:
    index: int
    open: OpenSet


def ftmg_open_sets(f) -> list[FtmgOpen]:
    return [FtmgOpen(i, o) for i, d in enumerate(f.forest) for o in subbasis(d)]
