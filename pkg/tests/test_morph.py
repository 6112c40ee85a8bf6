import random

import pytest
from hypothesis import given, settings, strategies as st

from metafold.canon import equivalent, isomorphic
from metafold.construct import (CRF, Beside, ConJoin, ConnectC, EdgeC, EmptyC, Route, SwapPrim,
                                con_to_expr, decompose, decompose_random, evaluate, evaluate_con)
from metafold.core import lateral_dtmg
from metafold.errors import ArityError, DivergenceError, FoldError, WeightError
from metafold.gen import Bounds, random_expr, random_registry
from metafold.morph import (FTMG, SUM, Atom, DtmgAlgebra, DtmgCoalgebra, FutuCoalgebra,
                            HistoAlgebra, Leaf, ListAlgebra, SplitBeside, SplitConnect, ana, cata,
                            chain_coalgebra, check_history, chrono, chunked_path_coalgebra,
                            con_cata, con_from_algebra, expr_coalgebra, forest_depth, forest_size,
                            ftmg_fold, futu, hist_connect, hist_leaf, histo, hylo, metachrono,
                            metamorph, nested, numtargets, oblivious_algebra, oblivious_coalgebra,
                            rebuild_algebra, shortestpathlength, shortestpathlist, weighted_fold)

from conftest import REG, chain
from oracles import bfs_edge_count, total_arity


def sample(seed, max_edges=8):
    rng = random.Random(seed)
    reg = random_registry(rng, 6)
    x, d = random_expr(rng, reg, Bounds(max_edges=max_edges))
    return rng, reg, x, d


def test_numtargets_fig1():
    leaf = EdgeC("A", ((1, "A"), (2, "B"), (3, "C"), (3, "D")), name="x")
    assert cata(numtargets(), leaf) == 4


def test_shortest_paths_on_chain():
    x = decompose(chain(4))
    assert cata(shortestpathlength("E0", "E3"), x) == 4
    assert cata(shortestpathlength("E3", "E0"), x) is None
    assert cata(shortestpathlength("E1", "E1"), x) == 0
    assert cata(shortestpathlist("E0", "E2"), x) == ["E0", "E1", "E2"]


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 100_000))
def test_folds_agree_across_decompositions(seed):
    rng, reg, _, d = sample(seed)
    x1, x2 = decompose(d), decompose_random(d, rng)
    assert cata(numtargets(), x1) == cata(numtargets(), x2) == total_arity(d.base)
    ids = d.base.edge_ids
    if ids:
        s, t = rng.choice(ids), rng.choice(ids)
        want = bfs_edge_count(d.base, s, t)
        assert cata(shortestpathlength(s, t), x1) == want
        assert cata(shortestpathlength(s, t), x2) == want


def test_fold_errors_carry_path():
    bad = DtmgAlgebra(0, lambda e: 1 // 0, lambda a, b: a, lambda p, a, b: a)
    with pytest.raises(FoldError) as info:
        cata(bad, Beside(EmptyC(), EdgeC("A", ((1, "A"),), name="x")))
    assert info.value.args


def test_ana_rebuilds_chain_and_rejects_divergence():
    x = ana(chain_coalgebra("A", "A"), ["a", "b", "c"])
    assert isomorphic(evaluate(x, REG), chain(3))
    loop = DtmgCoalgebra(lambda s: SplitBeside(s, s), lambda s: 3)
    with pytest.raises(DivergenceError):
        ana(loop, 1)


def test_chunked_unfold():
    x = ana(chunked_path_coalgebra(2, "A", "A"), ["a", "b", "c", "d", "e"])
    d = evaluate(x, REG)
    assert len(d.base.edges) == 5 and len(d.base.connections) == 2


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_hylo_is_cata_after_ana(seed):
    _, reg, x, _ = sample(seed)
    coalg = expr_coalgebra()
    for alg in (numtargets(), rebuild_algebra(reg)):
        assert hylo(alg, coalg, x) == cata(alg, ana(coalg, x))
    assert equivalent(evaluate(ana(coalg, x), reg), evaluate(x, reg))


def test_metamorph_round_trip():
    x = decompose(chain(3))
    assert metamorph(expr_coalgebra(), DtmgAlgebra(None, lambda e: e, Beside,
                                                    lambda p, a, b: ConnectC(p, a, b)), x) == x


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_histo_forest_invariant(seed):
    _, reg, x, d = sample(seed)
    v, forest = histo(oblivious_algebra(numtargets()), x, reg)
    assert v == cata(numtargets(), x)
    total, good = check_history(forest)
    assert total == good
    assert forest_size(forest) >= len(forest)


def test_history_shapes():
    a = evaluate(EdgeC("A", ((1, "A"), (2, "A")), (), (1,), (2,), "a"), REG)
    h = hist_connect(hist_leaf(a), CRF(((1, 1),)), hist_leaf(a))
    assert forest_depth(h) == 2 and forest_size(h) == 3
    assert forest_depth(()) == 0
    with pytest.raises(ArityError):
        hist_connect((), CRF(), hist_leaf(a))


def test_histo_sees_history():
    # count how many internal connect nodes sit below each connect
    alg = HistoAlgebra(0, lambda e: 0, lambda a, b: a.value + b.value,
                       lambda p, a, b: 1 + a.value + b.value + len(a.history) * 0)
    v, _ = histo(alg, decompose(chain(4)), REG)
    assert v == 3


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000))
def test_futu_and_chrono_oblivious(seed):
    _, reg, x, _ = sample(seed)
    coalg = expr_coalgebra()
    y, forest = futu(oblivious_coalgebra(coalg), x, reg)
    assert equivalent(evaluate(y, reg), evaluate(x, reg))
    t, g = check_history(forest)
    assert t == g
    alg = numtargets()
    assert chrono(oblivious_algebra(alg), oblivious_coalgebra(coalg), x, reg) == hylo(alg, coalg, x)


def test_futu_history_grows_left_to_right():
    seen = []

    def classify(s, h):
        seen.append(len(h))
        return chain_coalgebra("A", "A").classify(s)

    futu(FutuCoalgebra(classify, len), ("a", "b", "c"), REG)
    assert seen == [0, 0, 0, 1, 1]


def test_metachrono_and_nested():
    x = decompose(chain(3))
    names = DtmgAlgebra((), lambda e: (e.name,), lambda a, b: a + b, lambda p, a, b: a + b)
    y = metachrono(oblivious_coalgebra(chain_coalgebra("A", "A")), oblivious_algebra(names), x, REG)
    assert isomorphic(evaluate(y, REG), chain(3))
    n = nested(oblivious_algebra(numtargets()), oblivious_coalgebra(chain_coalgebra("A", "A")),
               oblivious_algebra(names), oblivious_coalgebra(chain_coalgebra("A", "A")),
               ["p", "q"], REG)
    assert n == 4


def test_con_fold_matches_plain_fold():
    leaf = lambda n: EdgeC("A", ((1, "A"), (2, "A")), (), (1,), (2,), n)
    x = ConJoin(Route(CRF(((1, 1),)), ConJoin(Route(CRF(((1, 1),)), leaf("a")), leaf("b"))), leaf("c"))
    for alg in (numtargets(), shortestpathlength("a", "c")):
        assert con_cata(con_from_algebra(alg), x) == cata(alg, con_to_expr(x, REG))
    assert cata(shortestpathlength("a", "c"), con_to_expr(x, REG)) == 3


def test_ftmg_folds():
    base = chain(3).base
    from metafold.core import restrict
    f = FTMG(base, [restrict(base, ["E0"]), restrict(base, ["E1", "E2"])], [0.25, 0.75])
    assert ftmg_fold(SUM, numtargets(), f) == 6
    assert ftmg_fold(ListAlgebra((), lambda x, acc: (x,) + acc), numtargets(), f) == (2, 4)
    assert weighted_fold(numtargets(), f) == pytest.approx(0.25 * 2 + 0.75 * 4)
    with pytest.raises(WeightError):
        FTMG(base, f.forest, [0.5, 0.6])
    with pytest.raises(WeightError):
        weighted_fold(numtargets(), FTMG(base, f.forest))
