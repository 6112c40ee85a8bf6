"""Command-line front end: ``metafold <subcommand> ...``.

Exit status is 0 on success, 1 on a domain error (one-line diagnostic on
stderr) and 2 on a usage error.
"""
from __future__ import annotations

import argparse
import sys

from . import mgf
from .construct import decompose, enumerate_crfs, crf_count, to_prefix
from .core import DTMG, lateral_dtmg, validate
from .dot import to_dot
from .errors import MetagraphError
from .gen import Bounds
from .laws import laws_check
from .morph import ALGEBRAS, cata, histo, oblivious_algebra
from .process import pruned, realized_from, replay_ops, traces_to_ftmg, edge_roles
from .topology import (heyting_implies, interior, is_open, join, meet, pseudo_complement,
                       topology)


class DomainError(Exception):
    pass


def _doc(path):
    try:
        return mgf.load(path)
    except OSError as exc:
        raise DomainError(f"{path}: {exc.strerror or exc}") from None


def _pick_dtmg(doc, name) -> DTMG:
    if name is None:
        return lateral_dtmg(doc.tmg)
    return doc.dtmg(name)


def _algebra(args):
    make = ALGEBRAS[args.alg]
    if args.alg == "numtargets":
        return make()
    if args.src is None or args.dst is None:
        raise DomainError(f"--alg {args.alg} needs --src and --dst")
    return make(args.src, args.dst)


def _show(value) -> str:
    match value:
        case None:
            return "none"
        case list() | tuple():
            return " ".join(map(str, value))
    return str(value)


def _edgeset(text: str | None):
    if text is None:
        return None
    return [t for t in (s.strip() for s in text.split(",")) if t]


def _fmt_set(edges) -> str:
    return "{" + ",".join(sorted(edges)) + "}"


def cmd_validate(args, out, err):
    try:
        doc = mgf.load(args.file)
    except mgf.MgfError as exc:
        print(f"invalid: {exc}", file=out)
        return 1
    except OSError as exc:
        raise DomainError(f"{args.file}: {exc.strerror or exc}") from None
    problems = validate(doc.tmg, notes=True)
    errors = [v for v in problems if v.severity == "error"]
    for v in problems:
        print(f"{v.severity}: {v}", file=out)
    if not errors:
        print(f"ok: {len(doc.tmg.edges)} edges, {len(doc.tmg.connections)} connections, "
              f"{len(doc.dtmgs)} dtmgs, {len(doc.traces)} traces", file=out)
    return 1 if errors else 0


def cmd_fold(args, out, err):
    doc = _doc(args.file)
    d = _pick_dtmg(doc, args.dtmg)
    print(_show(cata(_algebra(args), decompose(d))), file=out)
    return 0


def cmd_crfs(args, out, err):
    if args.m < 0 or args.n < 0:
        raise DomainError("--m and --n must be nonnegative")
    if args.count_only:
        print(crf_count(args.m, args.n), file=out)
        return 0
    for p in enumerate_crfs(args.m, args.n):
        print(p, file=out)
    return 0


def cmd_laws(args, out, err):
    bounds = Bounds(max_edges=args.max_edges)
    report = laws_check(args.seed, args.trials, bounds)
    for line in report.lines():
        print(line, file=out)
    print(f"{'ALL PASS' if report.ok else 'FAILURES'} (seed {args.seed}, {args.trials} trials)", file=out)
    return 0 if report.ok else 1


def cmd_heyting(args, out, err):
    doc = _doc(args.file)
    d = doc.dtmg(args.dtmg)
    t = topology(d)

    def opened(label, edges):
        if edges is None:
            raise DomainError(f"--op {args.op} needs --{label}")
        m = t.mask(edges)
        if not is_open(d, m):
            o = interior(d, m)
            print(f"note: --{label} {_fmt_set(edges)} is not open; using its interior {o}", file=err)
            return o
        return interior(d, m)

    a = opened("a", _edgeset(args.a))
    match args.op:
        case "not":
            res = pseudo_complement(a)
        case "implies" | "meet" | "join":
            b = opened("b", _edgeset(args.b))
            res = {"implies": heyting_implies, "meet": meet, "join": join}[args.op](a, b)
    print(res, file=out)
    return 0


def cmd_decompose(args, out, err):
    doc = _doc(args.file)
    print(to_prefix(decompose(_pick_dtmg(doc, args.dtmg))), file=out)
    return 0


def cmd_history(args, out, err):
    doc = _doc(args.file)
    d = _pick_dtmg(doc, args.dtmg)
    _, forest = histo(oblivious_algebra(_algebra(args)), decompose(d), d.registry)
    out.write(to_dot(forest, "history"))
    return 0


def cmd_replay(args, out, err):
    doc = _doc(args.file)
    tr = doc.trace(args.trace)
    f = traces_to_ftmg(doc.tmg, [tr])
    d = f.forest[0]
    print(f"trace {tr.name}: {len(tr.events)} events, {len(d.base.edges)} edges touched, "
          f"{len(d.base.connections)} directed connections", file=out)
    for eid, (ins, outs, lat) in sorted(edge_roles(d).items()):
        print(f"  {eid}: in {_fmt_set(map(str, ins))} out {_fmt_set(map(str, outs))} "
              f"lat {_fmt_set(map(str, lat))}", file=out)
    if args.prune:
        r = replay_ops(realized_from(f.base), tr.ops)
        p = pruned(r)
        dropped = sorted(set(r.tmg.edge_ids) - set(p.edge_ids))
        print(f"pruned: kept {len(p.edges)} edges, dropped {_fmt_set(dropped)}", file=out)
        out.write(mgf.serialize(p))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="metafold", description="Typed metagraph toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate an MGF file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("fold", help="run a built-in catamorphism")
    p.add_argument("file")
    p.add_argument("--alg", required=True, choices=sorted(ALGEBRAS))
    p.add_argument("--src")
    p.add_argument("--dst")
    p.add_argument("--dtmg")
    p.set_defaults(func=cmd_fold)

    p = sub.add_parser("crfs", help="enumerate connection routing functions")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--count-only", action="store_true")
    p.set_defaults(func=cmd_crfs)

    p = sub.add_parser("laws", help="run the constructor law suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--max-edges", type=int, default=8)
    p.set_defaults(func=cmd_laws)

    p = sub.add_parser("heyting", help="Heyting operations on open edge sets")
    p.add_argument("file")
    p.add_argument("--dtmg", required=True)
    p.add_argument("--op", required=True, choices=["implies", "not", "meet", "join"])
    p.add_argument("--a", required=True)
    p.add_argument("--b")
    p.set_defaults(func=cmd_heyting)

    p = sub.add_parser("decompose", help="print a construction expression")
    p.add_argument("file")
    p.add_argument("--dtmg")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("history", help="emit the history forest of a fold")
    p.add_argument("file")
    p.add_argument("--dtmg")
    p.add_argument("--alg", default="numtargets", choices=sorted(ALGEBRAS))
    p.add_argument("--src")
    p.add_argument("--dst")
    p.add_argument("--emit", default="dot", choices=["dot"])
    p.set_defaults(func=cmd_history)

    p = sub.add_parser("replay", help="replay a process trace")
    p.add_argument("file")
    p.add_argument("--trace", required=True)
    p.add_argument("--prune", action="store_true")
    p.set_defaults(func=cmd_replay)
    return ap


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out, err)
    except (MetagraphError, DomainError) as exc:
        print(f"metafold {args.command}: {exc}", file=err)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
