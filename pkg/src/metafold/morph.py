"""Folds and unfolds over construction expressions.

Catamorphisms, anamorphisms and their compositions, the history-carrying
variants, connector-ordered folds and forest folds.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, NamedTuple, Union

from .construct import (CRF, EMPTY_CRF, Beside, ConJoin, ConnectC, EdgeC, EmptyC, Expr, Route,
                        SwapPrim, beside, connect, crf_beside, decompose, evaluate,
                        swap_wire_leaves)
from .canon import isomorphic
from .core import DTMG, ROOT, TMG, TypeRegistry, empty_dtmg
from .errors import ArityError, DivergenceError, FoldError, WeightError

MAX_UNFOLD_DEPTH = 10_000


def _identity(v):
    return v


# ---------------------------------------------------------------------------
# algebras and coalgebras
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DtmgAlgebra:
    """Handlers for the four constructors.

    ``edge`` receives the :class:`EdgeC` leaf (typed-target tuple, values,
    roles and name).  ``extract`` post-processes the final carrier value.
    A swap primitive goes to ``swap`` when given; otherwise it is folded
    as its wires side by side, which is only right for carriers that do
    not see boundary order.
    """

    empty: Any
    edge: Callable
    oplus: Callable
    otimes: Callable
    extract: Callable = _identity
    name: str = "algebra"
    swap: Callable | None = None


class Atom(NamedTuple):
    pass


class Leaf(NamedTuple):
    edge: EdgeC  # or a SwapPrim, which is a primitive too


class SplitBeside(NamedTuple):
    left: Any
    right: Any


class SplitConnect(NamedTuple):
    crf: CRF
    left: Any
    right: Any


Shape = Union[Atom, Leaf, SplitBeside, SplitConnect]


@dataclass(frozen=True)
class DtmgCoalgebra:
    """``classify(seed)`` returns a :data:`Shape`.

    ``measure`` maps seeds to naturals; every split must strictly
    decrease it, otherwise unfolding stops with :class:`DivergenceError`.
    """

    classify: Callable
    measure: Callable | None = None


def _check_measure(coalg, seed, children):
    if coalg.measure is None:
        return
    m = coalg.measure(seed)
    for c in children:
        mc = coalg.measure(c)
        if not (0 <= mc < m):
            raise DivergenceError(f"measure did not decrease: {m} -> {mc}", seed)


def _fold_wrap(exc, path):
    if isinstance(exc, (FoldError, DivergenceError, ArityError)):
        return exc
    where = "/".join(path) or "root"
    err = FoldError(f"handler failed at {where}: {exc}", path)
    err.__cause__ = exc
    return err


# ---------------------------------------------------------------------------
# cata / ana / hylo / metamorph
# ---------------------------------------------------------------------------

def _cata(alg: DtmgAlgebra, x: Expr, path):
    match x:
        case EmptyC():
            return alg.empty
        case EdgeC():
            try:
                return alg.edge(x)
            except Exception as exc:
                raise _fold_wrap(exc, path) from exc
        case Beside(l, r):
            a, b = _cata(alg, l, path + ("l",)), _cata(alg, r, path + ("r",))
            try:
                return alg.oplus(a, b)
            except Exception as exc:
                raise _fold_wrap(exc, path) from exc
        case ConnectC(p, l, r):
            a, b = _cata(alg, l, path + ("l",)), _cata(alg, r, path + ("r",))
            try:
                return alg.otimes(p, a, b)
            except Exception as exc:
                raise _fold_wrap(exc, path) from exc
        case SwapPrim():
            if alg.swap is not None:
                return alg.swap(x)
            acc = alg.empty
            for i, leaf in enumerate(swap_wire_leaves(x)):
                v = _cata(alg, leaf, path + (f"w{i + 1}",))
                acc = v if i == 0 else alg.oplus(acc, v)
            return acc
    raise TypeError(f"not a construction expression: {x!r}")


def cata(alg: DtmgAlgebra, x: Expr):
    return alg.extract(_cata(alg, x, ()))


def ana(coalg: DtmgCoalgebra, seed) -> Expr:
    def go(s, depth):
        if depth > MAX_UNFOLD_DEPTH:
            raise DivergenceError("unfold exceeded the depth limit", s)
        match coalg.classify(s):
            case Atom():
                return EmptyC()
            case Leaf(e):
                return e
            case SplitBeside(l, r):
                _check_measure(coalg, s, (l, r))
                return Beside(go(l, depth + 1), go(r, depth + 1))
            case SplitConnect(p, l, r):
                _check_measure(coalg, s, (l, r))
                return ConnectC(p, go(l, depth + 1), go(r, depth + 1))
            case other:
                raise TypeError(f"classify returned {other!r}")
    return go(seed, 0)


def hylo(alg: DtmgAlgebra, coalg: DtmgCoalgebra, seed):
    """``cata(alg, ana(coalg, seed))`` without building the expression."""
    def go(s, depth):
        if depth > MAX_UNFOLD_DEPTH:
            raise DivergenceError("unfold exceeded the depth limit", s)
        match coalg.classify(s):
            case Atom():
                return alg.empty
            case Leaf(e):
                return _cata(alg, e, ())
            case SplitBeside(l, r):
                _check_measure(coalg, s, (l, r))
                return alg.oplus(go(l, depth + 1), go(r, depth + 1))
            case SplitConnect(p, l, r):
                _check_measure(coalg, s, (l, r))
                return alg.otimes(p, go(l, depth + 1), go(r, depth + 1))
            case other:
                raise TypeError(f"classify returned {other!r}")
    return alg.extract(go(seed, 0))


def metamorph(coalg2: DtmgCoalgebra, alg: DtmgAlgebra, x: Expr) -> Expr:
    return ana(coalg2, cata(alg, x))


# ---------------------------------------------------------------------------
# history forests
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HistoryTree:
    """A node labelled by a DTMG; ``link`` is ``(crf, left forest, right forest)`` or None."""

    label: DTMG
    link: tuple | None = None

    @property
    def children(self):
        return () if self.link is None else (self.link[1], self.link[2])


HistoryForest = tuple  # of HistoryTree


def forest_label(forest, registry: TypeRegistry) -> DTMG:
    """The DTMG a forest stands for: its root labels side by side."""
    if not forest:
        return empty_dtmg(registry)
    out = forest[0].label
    for t in forest[1:]:
        out = beside(out, t.label)
    return out


def hist_leaf(label: DTMG) -> tuple:
    return (HistoryTree(label),)


def hist_beside(h1, h2) -> tuple:
    return tuple(h1) + tuple(h2)


def hist_connect(h1, p: CRF, h2, registry: TypeRegistry | None = None) -> tuple:
    if not h1 or not h2:
        raise ArityError("hist_connect needs two nonempty forests")
    reg = registry or h1[0].label.registry
    label = connect(forest_label(h1, reg), p, forest_label(h2, reg))
    return (HistoryTree(label, (p, tuple(h1), tuple(h2))),)


def forest_depth(forest) -> int:
    """Height of the tallest tree (a single node has depth 1; the empty forest 0)."""
    best = 0
    for t in forest:
        d = 1
        if t.link is not None:
            d = 1 + max(forest_depth(t.link[1]), forest_depth(t.link[2]))
        best = max(best, d)
    return best


def forest_size(forest) -> int:
    return sum(1 + (forest_size(t.link[1]) + forest_size(t.link[2]) if t.link else 0)
               for t in forest)


def check_history(forest, registry: TypeRegistry | None = None) -> tuple[int, int]:
    """Check ``label ≅ connect(label(left), crf, label(right))`` at every internal node.

    Returns ``(internal nodes, nodes satisfying the invariant)``.
    """
    total = good = 0
    stack = list(forest)
    while stack:
        t = stack.pop()
        if t.link is None:
            continue
        p, lf, rf = t.link
        reg = registry or t.label.registry
        total += 1
        try:
            expect = connect(forest_label(lf, reg), p, forest_label(rf, reg))
            good += isomorphic(t.label, expect)
        except Exception:
            pass
        stack.extend(lf)
        stack.extend(rf)
    return total, good


class Step(NamedTuple):
    """A partial result seen by a history-aware handler."""

    value: Any
    history: tuple
    prior: tuple = ()


@dataclass(frozen=True)
class HistoAlgebra:
    """Like :class:`DtmgAlgebra`, but ``oplus``/``otimes`` receive :class:`Step` operands."""

    empty: Any
    edge: Callable
    oplus: Callable
    otimes: Callable
    extract: Callable = _identity
    swap: Callable | None = None


def oblivious_algebra(alg: DtmgAlgebra) -> HistoAlgebra:
    return HistoAlgebra(alg.empty, alg.edge,
                        lambda a, b: alg.oplus(a.value, b.value),
                        lambda p, a, b: alg.otimes(p, a.value, b.value),
                        alg.extract, alg.swap)


def histo(alg: HistoAlgebra, x: Expr, registry: TypeRegistry, prior=()):
    """Fold returning ``(value, history forest)``."""
    prior = tuple(prior)

    def go(x, path):
        match x:
            case EmptyC():
                return alg.empty, hist_leaf(empty_dtmg(registry))
            case EdgeC():
                try:
                    v = alg.edge(x)
                except Exception as exc:
                    raise _fold_wrap(exc, path) from exc
                return v, hist_leaf(evaluate(x, registry))
            case SwapPrim() if alg.swap is not None:
                return alg.swap(x), hist_leaf(evaluate(x, registry))
            case SwapPrim():
                leaves = swap_wire_leaves(x)
                acc = alg.empty
                for i, leaf in enumerate(leaves):
                    v = alg.edge(leaf)
                    acc = v if i == 0 else alg.oplus(Step(acc, (), prior), Step(v, (), prior))
                return acc, hist_leaf(evaluate(x, registry))
            case Beside(l, r):
                (a, ha), (b, hb) = go(l, path + ("l",)), go(r, path + ("r",))
                try:
                    v = alg.oplus(Step(a, ha, prior), Step(b, hb, prior))
                except Exception as exc:
                    raise _fold_wrap(exc, path) from exc
                return v, hist_beside(ha, hb)
            case ConnectC(p, l, r):
                (a, ha), (b, hb) = go(l, path + ("l",)), go(r, path + ("r",))
                try:
                    v = alg.otimes(p, Step(a, ha, prior), Step(b, hb, prior))
                except Exception as exc:
                    raise _fold_wrap(exc, path) from exc
                return v, hist_connect(ha, p, hb, registry)
        raise TypeError(f"not a construction expression: {x!r}")

    v, h = go(x, ())
    return alg.extract(v), h


@dataclass(frozen=True)
class FutuCoalgebra:
    """``classify(seed, history)``: ``history`` is the forest produced so far.

    Unfolding runs left to right, so the right half of a split sees the
    left half's history appended to everything produced before it.
    """

    classify: Callable
    measure: Callable | None = None


def oblivious_coalgebra(coalg: DtmgCoalgebra) -> FutuCoalgebra:
    return FutuCoalgebra(lambda s, _h: coalg.classify(s), coalg.measure)


def futu(coalg: FutuCoalgebra, seed, registry: TypeRegistry, prior=()):
    """Unfold returning ``(expression, history forest)``."""
    def go(s, acc, depth):
        if depth > MAX_UNFOLD_DEPTH:
            raise DivergenceError("unfold exceeded the depth limit", s)
        match coalg.classify(s, acc):
            case Atom():
                return EmptyC(), hist_leaf(empty_dtmg(registry))
            case Leaf(e):
                return e, hist_leaf(evaluate(e, registry))
            case SplitBeside(l, r):
                _check_measure(coalg, s, (l, r))
                lx, lh = go(l, acc, depth + 1)
                rx, rh = go(r, acc + lh, depth + 1)
                return Beside(lx, rx), hist_beside(lh, rh)
            case SplitConnect(p, l, r):
                _check_measure(coalg, s, (l, r))
                lx, lh = go(l, acc, depth + 1)
                rx, rh = go(r, acc + lh, depth + 1)
                return ConnectC(p, lx, rx), hist_connect(lh, p, rh, registry)
            case other:
                raise TypeError(f"classify returned {other!r}")
    return go(seed, tuple(prior), 0)


def chrono(alg: HistoAlgebra, coalg: FutuCoalgebra, seed, registry: TypeRegistry):
    """Unfold with ``futu``, then fold with ``histo`` seeing the unfold's history."""
    x, hf = futu(coalg, seed, registry)
    return histo(alg, x, registry, prior=hf)[0]


def metachrono(coalg: FutuCoalgebra, alg: HistoAlgebra, x: Expr, registry: TypeRegistry) -> Expr:
    """Fold with ``histo``, then unfold from the value with the fold's history available."""
    v, hh = histo(alg, x, registry)
    return futu(coalg, v, registry, prior=hh)[0]


def nested(alg: HistoAlgebra, coalg1: FutuCoalgebra, alg2: HistoAlgebra, coalg: FutuCoalgebra,
           seed, registry: TypeRegistry):
    """``f ∘ u1 ∘ f2 ∘ u``: unfold, refold, unfold again, refold."""
    x, h0 = futu(coalg, seed, registry)
    v, h1 = histo(alg2, x, registry, prior=h0)
    x2, h2 = futu(coalg1, v, registry, prior=h1)
    return histo(alg, x2, registry, prior=h2)[0]


# ---------------------------------------------------------------------------
# built-in algebras
# ---------------------------------------------------------------------------

def numtargets() -> DtmgAlgebra:
    return DtmgAlgebra(0, lambda e: e.arity, lambda a, b: a + b,
                       lambda _p, a, b: a + b, name="numtargets")


@dataclass(frozen=True)
class PathTable:
    """Carrier of the shortest-path algebras.

    ``names[k]`` designates node ``k``; ``inputs``/``outputs`` mirror the
    DTMG boundary as node indices; ``best[(u, v)]`` is the lexicographically
    least shortest node path from ``u`` to ``v`` (by length, then names).
    """

    names: tuple = ()
    inputs: tuple = ()
    outputs: tuple = ()
    best: dict = field(default_factory=dict)


def _edge_table(e: EdgeC) -> PathTable:
    name = e.name if e.name is not None else repr(e.key)
    return PathTable((name,), tuple(0 for _ in e.inputs), tuple(0 for _ in e.outputs),
                     {(0, 0): (0,)})


def _shift(t: PathTable, k: int):
    return {(u + k, v + k): tuple(x + k for x in p) for (u, v), p in t.best.items()}


def _rank(names, path):
    return (len(path), tuple(names[i] for i in path))


def _table_beside(a: PathTable, b: PathTable) -> PathTable:
    k = len(a.names)
    best = dict(a.best)
    best.update(_shift(b, k))
    return PathTable(a.names + b.names, a.inputs + tuple(x + k for x in b.inputs),
                     a.outputs + tuple(x + k for x in b.outputs), best)


def _table_connect(p: CRF, a: PathTable, b: PathTable) -> PathTable:
    k = len(a.names)
    t = _table_beside(a, b)
    names = t.names
    cross = {(a.outputs[o - 1], b.inputs[i - 1] + k) for o, i in p.pairs}
    best = dict(t.best)
    left = range(k)
    right = range(k, len(names))
    for s in left:
        for d in right:
            cand = None
            for u, v in cross:
                pl = t.best.get((s, u))
                pr = t.best.get((v, d))
                if pl is None or pr is None:
                    continue
                path = pl + pr
                if cand is None or _rank(names, path) < _rank(names, cand):
                    cand = path
            if cand is not None:
                best[(s, d)] = cand
    used_o = {o for o, _ in p.pairs}
    used_i = {i for _, i in p.pairs}
    ins = a.inputs + tuple(x + k for j, x in enumerate(b.inputs, 1) if j not in used_i)
    outs = tuple(x for j, x in enumerate(a.outputs, 1) if j not in used_o) + \
        tuple(x + k for x in b.outputs)
    return PathTable(names, ins, outs, best)


def _best_path(t: PathTable, src: str, dst: str):
    found = None
    for s, ns in enumerate(t.names):
        if ns != src:
            continue
        for d, nd in enumerate(t.names):
            if nd != dst:
                continue
            p = t.best.get((s, d))
            if p is not None and (found is None or _rank(t.names, p) < _rank(t.names, found)):
                found = p
    return found


def path_table_algebra(extract=_identity) -> DtmgAlgebra:
    return DtmgAlgebra(PathTable(), _edge_table, _table_beside, _table_connect, extract,
                       name="pathtable")


def shortestpathlength(src: str, dst: str) -> DtmgAlgebra:
    """Edges on a shortest metapath from ``src`` to ``dst``; 0 when they coincide, None if none."""
    def extract(t):
        if src == dst and src in t.names:
            return 0
        p = _best_path(t, src, dst)
        return None if p is None else len(p)
    return DtmgAlgebra(PathTable(), _edge_table, _table_beside, _table_connect, extract,
                       name="shortestpathlength")


def shortestpathlist(src: str, dst: str) -> DtmgAlgebra:
    """Edge names along the chosen shortest metapath; None if none."""
    def extract(t):
        if src == dst and src in t.names:
            return [src]
        p = _best_path(t, src, dst)
        return None if p is None else [t.names[i] for i in p]
    return DtmgAlgebra(PathTable(), _edge_table, _table_beside, _table_connect, extract,
                       name="shortestpathlist")


ALGEBRAS = {
    "numtargets": numtargets,
    "shortestpathlength": shortestpathlength,
    "shortestpathlist": shortestpathlist,
}


def chain_coalgebra(edge_type: str = ROOT, target_type: str = ROOT) -> DtmgCoalgebra:
    """Unfold a list of names into a metapath of binary edges, left to right."""
    def leaf(name):
        return EdgeC(edge_type, ((1, target_type), (2, target_type)), (), (1,), (2,), name)

    def classify(names):
        names = tuple(names)
        match len(names):
            case 0:
                return Atom()
            case 1:
                return Leaf(leaf(names[0]))
        return SplitConnect(CRF(((1, 1),)), names[:-1], (names[-1],))

    return DtmgCoalgebra(classify, len)


def chunked_path_coalgebra(chunk: int = 2, edge_type: str = ROOT,
                           target_type: str = ROOT) -> DtmgCoalgebra:
    """Re-chunk a list of names into consecutive short metapaths placed side by side.

    Seeds are ``("list", names)`` for the whole list or ``("path", names)``
    for one chunk, so each chunk is unfolded as a connected chain.
    """
    if chunk < 1:
        raise ValueError("chunk must be positive")
    chain = chain_coalgebra(edge_type, target_type)

    def classify(seed):
        if not isinstance(seed, tuple) or seed[:1] not in (("list",), ("path",)):
            seed = ("list", tuple(seed or ()))
        kind, names = seed
        if kind == "path":
            shape = chain.classify(names)
            if isinstance(shape, SplitConnect):
                return SplitConnect(shape.crf, ("path", shape.left), ("path", shape.right))
            return shape
        if len(names) <= chunk:
            return SplitBeside(("path", names), ("list", ())) if names else Atom()
        return SplitBeside(("path", names[:chunk]), ("list", names[chunk:]))

    def measure(seed):
        if not isinstance(seed, tuple) or seed[:1] not in (("list",), ("path",)):
            return 2 * len(tuple(seed or ())) + 2
        kind, names = seed
        return 2 * len(names) + (2 if kind == "list" else 1)

    return DtmgCoalgebra(classify, measure)


# ---------------------------------------------------------------------------
# connector-ordered folds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConAlgebra:
    """Handlers for con expressions; ``otimes(l, r)`` takes no crf."""

    empty: Any
    edge: Callable
    oplus: Callable
    otimes: Callable
    route: Callable
    extract: Callable = _identity


def con_cata(alg: ConAlgebra, x):
    def go(x):
        match x:
            case Route(p, body):
                return alg.route(p, go(body))
            case ConJoin(l, r):
                return alg.otimes(go(l), go(r))
            case Beside(l, r):
                return alg.oplus(go(l), go(r))
            case EmptyC():
                return alg.empty
            case EdgeC():
                return alg.edge(x)
            case SwapPrim():
                acc = alg.empty
                for i, leaf in enumerate(swap_wire_leaves(x)):
                    acc = alg.edge(leaf) if i == 0 else alg.oplus(acc, alg.edge(leaf))
                return acc
        raise TypeError(f"not a con expression: {x!r}")
    return alg.extract(go(x))


class Routed(NamedTuple):
    crf: CRF
    seed: Any


class ConSplit(NamedTuple):
    left: Any
    right: Any


def con_ana(coalg: DtmgCoalgebra, seed):
    """Unfold into a con expression; ``classify`` may also return Routed/ConSplit."""
    def go(s, depth):
        if depth > MAX_UNFOLD_DEPTH:
            raise DivergenceError("unfold exceeded the depth limit", s)
        match coalg.classify(s):
            case Atom():
                return EmptyC()
            case Leaf(e):
                return e
            case SplitBeside(l, r):
                _check_measure(coalg, s, (l, r))
                return Beside(go(l, depth + 1), go(r, depth + 1))
            case ConSplit(l, r):
                _check_measure(coalg, s, (l, r))
                return ConJoin(go(l, depth + 1), go(r, depth + 1))
            case Routed(p, inner):
                _check_measure(coalg, s, (inner,))
                return Route(p, go(inner, depth + 1))
            case other:
                raise TypeError(f"classify returned {other!r}")
    return go(seed, 0)


def con_from_algebra(alg: DtmgAlgebra) -> ConAlgebra:
    """Run an ordinary algebra over con expressions.

    The carrier is ``(value, routing, output count)``; a join uses the
    left operand's routing and passes the right operand's routing on,
    shifted past the left's unmatched outputs.
    """
    def edge(e):
        return (alg.edge(e), EMPTY_CRF, len(e.outputs))

    def oplus(a, b):
        return (alg.oplus(a[0], b[0]), crf_beside(a[1], b[1], a[2], a[1].max_input), a[2] + b[2])

    def otimes(a, b):
        p = a[1]
        shift = a[2] - p.size
        carried = CRF(tuple((o + shift, i) for o, i in b[1].pairs))
        return (alg.otimes(p, a[0], b[0]), carried, a[2] - p.size + b[2])

    def route(p, v):
        return (v[0], p, v[2])

    return ConAlgebra((alg.empty, EMPTY_CRF, 0), edge, oplus, otimes, route,
                      lambda v: alg.extract(v[0]))


# ---------------------------------------------------------------------------
# forests of DTMGs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FTMG:
    """DTMGs over one shared base TMG, optionally weighted."""

    base: TMG
    forest: tuple = ()
    weights: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "forest", tuple(self.forest))
        ids = set(self.base.edge_ids)
        for i, d in enumerate(self.forest):
            stray = [e for e in d.base.edge_ids if e not in ids]
            if stray:
                raise ValueError(f"forest member {i} uses edges outside the base: {stray}")
        if self.weights is not None:
            w = tuple(float(x) for x in self.weights)
            if len(w) != len(self.forest):
                raise WeightError(f"{len(w)} weights for {len(self.forest)} forest members")
            if any(x < 0 for x in w) or (w and abs(sum(w) - 1.0) > 1e-9):
                raise WeightError("weights must be nonnegative and sum to 1")
            object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class ListAlgebra:
    nil: Any
    cons: Callable  # (item, folded rest) -> value


SUM = ListAlgebra(0, lambda x, acc: x + acc)


def ftmg_fold(list_alg: ListAlgebra, dtmg_alg: DtmgAlgebra, f: FTMG):
    acc = list_alg.nil
    for d in reversed(f.forest):
        acc = list_alg.cons(cata(dtmg_alg, decompose(d)), acc)
    return acc


def weighted_fold(dtmg_alg: DtmgAlgebra, f: FTMG) -> float:
    if f.weights is None:
        raise WeightError("weighted_fold needs a weighted forest")
    return sum(w * cata(dtmg_alg, decompose(d)) for w, d in zip(f.weights, f.forest))


# ---------------------------------------------------------------------------
# DTMG-to-DTMG components
# ---------------------------------------------------------------------------

def rebuild_algebra(registry: TypeRegistry) -> DtmgAlgebra:
    """Carrier is the DTMG itself: folding an expression evaluates it."""
    return DtmgAlgebra(empty_dtmg(registry), lambda e: evaluate(e, registry), beside,
                       lambda p, a, b: connect(a, p, b),
                       name="rebuild", swap=lambda x: evaluate(x, registry))


def _shape_of(x):
    match x:
        case EmptyC():
            return Atom()
        case EdgeC():
            return Leaf(x)
        case Beside(l, r):
            return SplitBeside(l, r)
        case ConnectC(p, l, r):
            return SplitConnect(p, l, r)
        case SwapPrim():
            return Leaf(x)  # primitive; expanding it would lose the permutation
    raise TypeError(f"not a construction expression: {x!r}")


def expr_size_measure(x) -> int:
    match x:
        case Beside(l, r) | ConnectC(_, l, r):
            return 1 + expr_size_measure(l) + expr_size_measure(r)
        case SwapPrim(j, k, _):
            return 2 * (j + k) + 1
    return 1


def expr_coalgebra() -> DtmgCoalgebra:
    """Unfold an expression back into itself (the identity anamorphism)."""
    return DtmgCoalgebra(_shape_of, expr_size_measure)


def _rename(x, suffix):
    match x:
        case EdgeC():
            return EdgeC(x.type, x.targets, x.values, x.inputs, x.outputs,
                          (x.name or "x") + suffix, x.wire)
        case Beside(l, r):
            return Beside(_rename(l, suffix), _rename(r, suffix))
        case ConnectC(p, l, r):
            return ConnectC(p, _rename(l, suffix), _rename(r, suffix))
    return x


def duplicating_coalgebra(copies: int = 2) -> DtmgCoalgebra:
    """Unfold an expression into ``copies`` side-by-side copies named ``src#k``."""
    def classify(seed):
        if isinstance(seed, tuple) and seed[:1] == ("copies",):
            _, k, x = seed
            if k == 1:
                return _shape_of(_rename(x, "#1"))
            return SplitBeside(("copies", k - 1, x), _rename(x, f"#{k}"))
        if isinstance(seed, tuple) and seed[:1] == ("expr",):
            return _shape_of(seed[1])
        return classify(("copies", copies, seed))

    def measure(seed):
        if isinstance(seed, tuple) and seed[:1] == ("copies",):
            return seed[1] * (expr_size_measure(seed[2]) + 1)
        if isinstance(seed, tuple) and seed[:1] == ("expr",):
            return expr_size_measure(seed[1])
        return (copies + 1) * (expr_size_measure(seed) + 1)

    def wrap(shape):
        # children that are expressions unfold as themselves
        match shape:
            case SplitBeside(l, r):
                return SplitBeside(l if isinstance(l, tuple) and l[:1] == ("copies",) else ("expr", l),
                                   ("expr", r) if not (isinstance(r, tuple) and r[:1] == ("copies",)) else r)
            case SplitConnect(p, l, r):
                return SplitConnect(p, ("expr", l), ("expr", r))
        return shape

    return DtmgCoalgebra(lambda s: wrap(classify(s)), measure)
