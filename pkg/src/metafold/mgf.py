"""MGF v1: a line-oriented text format for registries, TMGs, DTMGs and traces.

    type B : A @ 0.5
    edge x : B (1:A, 2:e) values 3 "s" [1 2]
    edge w : e (1:e, 2:e) wire
    conn x.2 y.1
    dtmg main on x y in x.1 out y.2 lat
    trace t
    ev x 2 -> y 1
    forget x

``#`` starts a comment.  A type may list several parents on separate
lines.  ``on`` (optional) restricts a dtmg to a subset of edges; ``wire``
marks the identity wires that swap primitives are built from.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass

from .core import (DTMG, ROOT, TMG, Connection, Edge, TargetRef, TypeRegistry, check_partition,
                   dangling_targets, value_key)
from .errors import MetagraphError, MgfError, UnknownNameError
from .process import StateOp, Trace, TraversalEvent

ID = r"[A-Za-z_][A-Za-z0-9_#']*"
NUM = r"[-+]?(?:\d+\.?\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)"

_TYPE = re.compile(rf"^type\s+({ID})(?:\s*:\s*({ID})(?:\s*@\s*({NUM}))?)?$")
_EDGE = re.compile(rf"^edge\s+({ID})\s*:\s*({ID})\s*\((.*?)\)\s*(wire\b)?\s*(?:values(?:\s+(.*))?)?$")
_TARGET = re.compile(rf"^(\d+)\s*:\s*({ID})$")
_CONN = re.compile(rf"^conn\s+({ID})\.(\d+)\s+({ID})\.(\d+)$")
_REF = re.compile(rf"^({ID})\.(\d+)$")
_DTMG = re.compile(rf"^dtmg\s+({ID})(?:\s+(.*))?$")
_TRACE = re.compile(rf"^trace\s+({ID})$")
_EV = re.compile(rf"^ev\s+({ID})((?:\s+\d+)*)\s*->\s*({ID})((?:\s+\d+)*)$")
_OP = re.compile(rf"^(forget|reinsert)\s+({ID})$")
_VALTOK = re.compile(r'"(?:[^"\\]|\\.)*"|\[|\]|[^\s\[\]"]+')


@dataclass(frozen=True)
class MgfDocument:
    registry: TypeRegistry
    tmg: TMG
    dtmgs: tuple = ()    # ((name, DTMG), ...)
    traces: tuple = ()   # (Trace, ...)

    def dtmg(self, name: str) -> DTMG:
        for n, d in self.dtmgs:
            if n == name:
                return d
        raise UnknownNameError(f"no dtmg named {name!r}")

    def trace(self, name: str) -> Trace:
        for t in self.traces:
            if t.name == name:
                return t
        raise UnknownNameError(f"no trace named {name!r}")


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def _parse_values(text: str, line: int) -> tuple:
    toks = _VALTOK.findall(text)
    stack: list[list] = [[]]
    for tok in toks:
        if tok == "[":
            stack.append([])
        elif tok == "]":
            if len(stack) == 1:
                raise MgfError(line, "unbalanced ']' in values")
            inner = stack.pop()
            stack[-1].append(inner)
        elif tok.startswith('"'):
            try:
                stack[-1].append(json.loads(tok))
            except json.JSONDecodeError:
                raise MgfError(line, f"bad string literal {tok}") from None
        elif re.fullmatch(r"[-+]?\d+", tok):
            stack[-1].append(int(tok))
        elif re.fullmatch(NUM, tok):
            stack[-1].append(float(tok))
        else:
            raise MgfError(line, f"bad value {tok!r}")
    if len(stack) != 1:
        raise MgfError(line, "unbalanced '[' in values")
    return tuple(stack[0])


def _ref(tok: str, line: int) -> TargetRef:
    m = _REF.match(tok)
    if not m:
        raise MgfError(line, f"bad target reference {tok!r}")
    return TargetRef(m.group(1), int(m.group(2)))


def _strip(raw: str) -> str:
    # drop comments outside string literals
    out, in_str, esc = [], False, False
    for ch in raw:
        if in_str:
            out.append(ch)
            if esc:
                esc = False
            elif ch == "\\":
                esc = True
            elif ch == '"':
                in_str = False
        elif ch == '"':
            in_str = True
            out.append(ch)
        elif ch == "#" and (not out or out[-1].isspace()):
            break
        else:
            out.append(ch)
    return "".join(out).strip()


def parse(text: str) -> MgfDocument:
    links: dict[str, list] = {}
    type_line: dict[str, int] = {}
    edges: list[tuple[int, Edge]] = []
    conns: list[tuple[int, Connection]] = []
    dtmgs: list[tuple[int, str, dict]] = []
    traces: list[tuple[int, str, list]] = []
    current = None
    for n, raw in enumerate(text.splitlines(), 1):
        line = _strip(raw)
        if not line:
            continue
        word = line.split(None, 1)[0]
        if word != "ev" and word not in ("forget", "reinsert"):
            current = None
        match word:
            case "type":
                m = _TYPE.match(line)
                if not m:
                    raise MgfError(n, "expected 'type <Name> [: <Parent> [@ <weight>]]'")
                name, parent, w = m.groups()
                if name == ROOT:
                    if parent:
                        raise MgfError(n, "the root type e cannot have a parent")
                    continue
                weight = 1.0 if w is None else float(w)
                if not 0.0 <= weight <= 1.0 or math.isnan(weight):
                    raise MgfError(n, f"weight {w} outside [0,1]")
                type_line.setdefault(name, n)
                lst = links.setdefault(name, [])
                if parent is not None:
                    if any(p == parent for p, _ in lst):
                        raise MgfError(n, f"duplicate parent {parent!r} for {name!r}")
                    lst.append((parent, weight))
            case "edge":
                m = _EDGE.match(line)
                if not m:
                    raise MgfError(n, "expected 'edge <id> : <Type> (<label>:<Type>, ...) [wire] [values ...]'")
                eid, etype, body, wire, vals = m.groups()
                targets = []
                if body.strip():
                    for part in body.split(","):
                        tm = _TARGET.match(part.strip())
                        if not tm:
                            raise MgfError(n, f"bad target {part.strip()!r}")
                        targets.append((int(tm.group(1)), tm.group(2)))
                values = _parse_values(vals or "", n)
                edges.append((n, Edge(eid, etype, tuple(targets), values, bool(wire))))
            case "conn":
                m = _CONN.match(line)
                if not m:
                    raise MgfError(n, "expected 'conn <id>.<slot> <id>.<slot>'")
                a, sa, b, sb = m.groups()
                conns.append((n, Connection(a, int(sa), b, int(sb))))
            case "dtmg":
                m = _DTMG.match(line)
                if not m:
                    raise MgfError(n, "expected 'dtmg <name> [on ids] in ... out ... lat ...'")
                name, rest = m.group(1), m.group(2) or ""
                sections = {"on": None, "in": [], "out": [], "lat": []}
                key = None
                for tok in rest.split():
                    if tok in sections:
                        if key is not None and tok != "on" and sections[tok]:
                            raise MgfError(n, f"section {tok!r} repeated")
                        key = tok
                        if tok == "on":
                            sections["on"] = []
                        continue
                    if key is None:
                        raise MgfError(n, f"unexpected {tok!r} before a section keyword")
                    if key == "on":
                        if not re.fullmatch(ID, tok):
                            raise MgfError(n, f"bad edge id {tok!r}")
                        sections["on"].append(tok)
                    else:
                        sections[key].append(_ref(tok, n))
                dtmgs.append((n, name, sections))
            case "trace":
                m = _TRACE.match(line)
                if not m:
                    raise MgfError(n, "expected 'trace <name>'")
                current = []
                traces.append((n, m.group(1), current))
            case "ev":
                if current is None:
                    raise MgfError(n, "'ev' outside a trace")
                m = _EV.match(line)
                if not m:
                    raise MgfError(n, "expected 'ev <src> <idx>... -> <dst> <idx>...'")
                s, si, d, di = m.groups()
                current.append((n, TraversalEvent(s, tuple(map(int, si.split())), d,
                                                  tuple(map(int, di.split())),
                                                  len(current) + 1)))
            case "forget" | "reinsert":
                m = _OP.match(line)
                if not m:
                    raise MgfError(n, f"expected '{word} <id>'")
                if current is None:
                    raise MgfError(n, f"'{word}' outside a trace")
                current.append((n, StateOp(m.group(1), m.group(2))))
            case _:
                raise MgfError(n, f"unknown statement {word!r}")
    return _build(links, type_line, edges, conns, dtmgs, traces)


def _build(links, type_line, edges, conns, dtmgs, traces) -> MgfDocument:
    names = set(links) | {ROOT}
    for name, lst in links.items():
        for p, _ in lst:
            if p not in names:
                raise MgfError(type_line[name], f"unknown parent type {p!r}")
    try:
        reg = TypeRegistry({k: (v if v else ROOT) for k, v in links.items()})
    except MetagraphError as exc:
        line = min(type_line.values(), default=0)
        raise MgfError(line, str(exc)) from None

    seen = {}
    for n, e in edges:
        if e.id in seen:
            raise MgfError(n, f"duplicate edge id {e.id!r} (first on line {seen[e.id]})")
        seen[e.id] = n
        for t in (e.type,) + tuple(t.type for t in e.targets):
            if t not in reg:
                raise MgfError(n, f"unknown type {t!r}")
        for i, t in enumerate(e.targets, 1):
            if not 1 <= t.label <= e.arity:
                raise MgfError(n, f"index label {t.label} of target {i} outside [1,{e.arity}]")
    g = TMG(reg, tuple(e for _, e in edges))
    for n, c in conns:
        for eid, s in ((c.a, c.sa), (c.b, c.sb)):
            if eid not in g:
                raise MgfError(n, f"unknown edge {eid!r}")
            if s > g.edge(eid).arity:
                raise MgfError(n, f"slot {s} outside {{0}}+[{g.edge(eid).arity}] on {eid!r}")
        if c.sa == 0 and c.sb == 0:
            raise MgfError(n, "both slots are 0; at most one side may be the whole edge")
        ta, tb = g.edge(c.a).target_type(c.sa), g.edge(c.b).target_type(c.sb)
        if not reg.comparable(ta, tb):
            raise MgfError(n, f"types {ta!r} and {tb!r} are not comparable")
    g = g.replace(connections=tuple(c for _, c in conns))

    out_d, names_seen = [], set()
    for n, name, sec in dtmgs:
        if name in names_seen:
            raise MgfError(n, f"duplicate dtmg name {name!r}")
        names_seen.add(name)
        if sec["on"] is None:
            base = g
        else:
            for eid in sec["on"]:
                if eid not in g:
                    raise MgfError(n, f"unknown edge {eid!r}")
            keep = set(sec["on"])
            base = TMG(reg, [e for e in g.edges if e.id in keep],
                       [c for c in g.connections if c.a in keep and c.b in keep])
        for r in sec["in"] + sec["out"] + sec["lat"]:
            if r.edge not in base:
                raise MgfError(n, f"reference {r} names an edge outside the dtmg")
        try:
            check_partition([r for r, _ in dangling_targets(base)], sec["in"], sec["out"], sec["lat"])
        except MetagraphError as exc:
            raise MgfError(n, f"not a partition of the dangling targets: {exc}") from None
        out_d.append((name, DTMG(base, tuple(sec["in"]), tuple(sec["out"]), tuple(sec["lat"]))))

    out_t, tnames = [], set()
    for n, name, steps in traces:
        if name in tnames:
            raise MgfError(n, f"duplicate trace name {name!r}")
        tnames.add(name)
        for ln, st in steps:
            ids = (st.src, st.dst) if isinstance(st, TraversalEvent) else (st.edge,)
            for eid in ids:
                if eid not in g:
                    raise MgfError(ln, f"unknown edge {eid!r}")
            if isinstance(st, TraversalEvent):
                if len(st.src_idx) != len(st.dst_idx):
                    raise MgfError(ln, "source and destination index lists differ in length")
                for eid, idx in ((st.src, st.src_idx), (st.dst, st.dst_idx)):
                    ar = g.edge(eid).arity
                    bad = [i for i in idx if not 1 <= i <= ar]
                    if bad:
                        raise MgfError(ln, f"index {bad[0]} outside [1,{ar}] on {eid!r}")
        out_t.append(Trace(name, tuple(st for _, st in steps)))
    return MgfDocument(reg, g, tuple(out_d), tuple(out_t))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _fmt_value(v) -> str:
    if isinstance(v, tuple):
        return "[" + " ".join(_fmt_value(x) for x in v) + "]"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError(f"non-finite value {v} cannot be written")
        return repr(v)
    return str(v)


def _fmt_weight(w: float) -> str:
    return repr(float(w))


def format_edge(e: Edge) -> str:
    ts = ", ".join(f"{t.label}:{t.type}" for t in e.targets)
    out = f"edge {e.id} : {e.type} ({ts})"
    if e.wire:
        out += " wire"
    if e.values:
        out += " values " + " ".join(_fmt_value(v) for v in e.values)
    return out


def _edge_sort(e: Edge):
    return (e.type, tuple(e.targets), tuple(value_key(v) for v in e.values), e.id)


def serialize(doc) -> str:
    """Canonical MGF text for a document, TMG or DTMG."""
    doc = as_document(doc)
    lines = []
    for child, parent, w in doc.registry.links():
        if parent == ROOT and w == 1.0 and len(doc.registry.parents(child)) == 1:
            lines.append(f"type {child}")
        elif w == 1.0:
            lines.append(f"type {child} : {parent}")
        else:
            lines.append(f"type {child} : {parent} @ {_fmt_weight(w)}")
    for e in sorted(doc.tmg.edges, key=_edge_sort):
        lines.append(format_edge(e))
    for c in sorted(doc.tmg.connections):
        lines.append(f"conn {c.a}.{c.sa} {c.b}.{c.sb}")
    whole = set(doc.tmg.edge_ids)
    for name, d in sorted(doc.dtmgs, key=lambda x: x[0]):
        parts = [f"dtmg {name}"]
        if set(d.base.edge_ids) != whole:
            parts.append("on " + " ".join(sorted(d.base.edge_ids)))
        for key, refs in (("in", d.inputs), ("out", d.outputs), ("lat", d.lateral)):
            parts.append(" ".join([key] + [str(r) for r in refs]))
        lines.append(" ".join(parts))
    for t in sorted(doc.traces, key=lambda t: t.name):
        lines.append(f"trace {t.name}")
        for st in t.steps:
            if isinstance(st, TraversalEvent):
                si = "".join(f" {i}" for i in st.src_idx)
                di = "".join(f" {i}" for i in st.dst_idx)
                lines.append(f"ev {st.src}{si} -> {st.dst}{di}")
            else:
                lines.append(f"{st.kind} {st.edge}")
    return "".join(l + "\n" for l in lines)


def as_document(x, name: str = "main") -> MgfDocument:
    match x:
        case MgfDocument():
            return x
        case DTMG():
            return MgfDocument(x.registry, x.base, ((name, x),))
        case TMG():
            return MgfDocument(x.registry, x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def canonicalize(text: str) -> str:
    return serialize(parse(text))


def load(path) -> MgfDocument:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())
