"""Graphviz DOT export for metagraphs and history forests."""
from __future__ import annotations

import json

from .core import DTMG, TMG, target_roles


def _q(s: str) -> str:
    return json.dumps(str(s), ensure_ascii=False)


def _roles_note(d: DTMG, eid: str) -> str:
    roles = target_roles(d)
    parts = []
    for tag, key in (("in", "in"), ("out", "out"), ("lat", "lat")):
        slots = [str(r.slot) for r, v in sorted(roles.items()) if r.edge == eid and v == key]
        if slots:
            parts.append(f"{tag} {' '.join(slots)}")
    return "; ".join(parts)


def _graph_body(g: TMG, d: DTMG | None, prefix: str = "", indent: str = "  ") -> list[str]:
    lines = []
    for e in g.edges:
        label = f"{e.id} : {e.type}/{e.arity}"
        if d is not None:
            note = _roles_note(d, e.id)
            if note:
                label += "\\n" + note
        shape = "point" if e.wire else "box"
        lines.append(f"{indent}{_q(prefix + e.id)} [shape={shape}, label={_q(label)}];")
    for c in g.connections:
        lines.append(f"{indent}{_q(prefix + c.a)} -> {_q(prefix + c.b)} [label={_q(f'{c.sa}→{c.sb}')}];")
    return lines


def tmg_to_dot(x: TMG | DTMG, name: str = "G") -> str:
    d = x if isinstance(x, DTMG) else None
    g = x.base if isinstance(x, DTMG) else x
    lines = [f"digraph {_q(name)} {{", "  rankdir=LR;"]
    lines += _graph_body(g, d)
    lines.append("}")
    return "\n".join(lines) + "\n"


def history_to_dot(forest, name: str = "H") -> str:
    """History nodes are boxes listing their label's edges; each link is a
    point node fed by the roots of both child forests and feeding the parent."""
    lines = [f"digraph {_q(name)} {{", "  rankdir=BT;"]
    counter = [0]

    def emit(tree) -> str:
        nid = f"n{counter[0]}"
        counter[0] += 1
        lab = tree.label
        ids = ",".join(lab.base.edge_ids) or "∅"
        lines.append(f"  {nid} [shape=box, label={_q(f'{ids} ({len(lab.inputs)}→{len(lab.outputs)})')}];")
        if tree.link is not None:
            p, left, right = tree.link
            lid = f"l{nid[1:]}"
            lines.append(f"  {lid} [shape=point, xlabel={_q(str(p))}];")
            for side, sub in (("left", left), ("right", right)):
                for child in sub:
                    cid = emit(child)
                    lines.append(f"  {cid} -> {lid} [arrowhead=none, label={_q(side)}];")
            lines.append(f"  {lid} -> {nid} [label={_q(str(p))}];")
        return nid

    for t in forest:
        emit(t)
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_dot(x, name: str | None = None) -> str:
    if isinstance(x, (TMG, DTMG)):
        return tmg_to_dot(x, name or "G")
    return history_to_dot(tuple(x), name or "H")
