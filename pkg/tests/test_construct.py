import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from metafold.canon import equivalent, isomorphic
from metafold.construct import (CRF, EMPTY_CRF, Beside, ConDTMG, ConJoin, ConnectC, EdgeC, EmptyC,
                                FreshEdge, QCRF, Route, SwapPrim, SwapStep, apply_swaps, beside,
                                con_connect, con_to_expr, connect, connect_q, crf_beside, crf_count,
                                crf_from_swaps, decompose, decompose_random, displayed_crf_bound,
                                edge_c, enumerate_crfs, evaluate, evaluate_con, expr_depth,
                                expr_size, mokhov_connect, swap_prim, times, to_prefix,
                                undirected_metapath, union)
from metafold.core import TMG, Connection, TargetRef, lateral_dtmg, validate
from metafold.errors import (CapacityError, CrfError, DecomposeError, RouteError, SizeError,
                             SlotRangeError, TypeMismatchError)
from metafold.gen import Bounds, random_expr, random_registry

from conftest import REG, binary, chain


def bin_leaf(name, a="A", b="A"):
    return EdgeC("A", ((1, a), (2, b)), (), (1,), (2,), name)


def brute_crfs(m, n):
    found = set()
    for k in range(1, min(m, n) + 1):
        for outs in itertools.product(range(1, m + 1), repeat=k):
            for ins in itertools.product(range(1, n + 1), repeat=k):
                if len(set(outs)) == k and len(set(ins)) == k:
                    found.add(tuple(sorted(zip(outs, ins))))
    return found


@pytest.mark.parametrize("m,n", [(m, n) for m in range(5) for n in range(5)])
def test_enumeration_matches_brute_force(m, n):
    got = enumerate_crfs(m, n)
    assert len(got) == len(set(got)) == crf_count(m, n)
    assert {p.pairs for p in got} == brute_crfs(m, n)


def test_displayed_bound_undercounts():
    assert crf_count(2, 2) == 6
    assert displayed_crf_bound(2, 2) == 4


def test_crf_validation_and_text():
    assert str(CRF(((2, 1), (1, 3)))) == "[1>3,2>1]"
    assert CRF.parse("[1>3, 2>1]") == CRF(((1, 3), (2, 1)))
    assert CRF.parse("[]") == EMPTY_CRF
    for bad in ([(1, 1), (1, 2)], [(0, 1)]):
        with pytest.raises(CrfError):
            CRF(tuple(bad))
    with pytest.raises(CrfError):
        CRF.parse("1>1")
    with pytest.raises(CapacityError):
        enumerate_crfs(9, 9)


def test_crf_beside_shifts():
    assert crf_beside(CRF(((1, 2),)), CRF(((1, 1),)), 2, 2) == CRF(((1, 2), (3, 3)))


@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_swaps_reach_any_same_size_crf(m, n, data):
    crfs = enumerate_crfs(m, n)
    p = data.draw(st.sampled_from(crfs))
    same = [q for q in crfs if q.size == p.size]
    q = data.draw(st.sampled_from(same))
    steps = crf_from_swaps(p, q, m, n)
    assert apply_swaps(p, steps) == q
    assert all(max(s.j, s.k) <= (m if s.side == "out" else n) for s in steps)


def test_swaps_need_equal_size():
    with pytest.raises(SizeError):
        crf_from_swaps(CRF(((1, 1),)), CRF(((1, 1), (2, 2))))


def test_edge_constructor_roles():
    d = edge_c(REG, ("A", ((1, "A"), (2, "B"), (3, "C"))), inputs=(1,), outputs=(3,), name="x")
    assert d.inputs == (TargetRef("x", 1),)
    assert d.outputs == (TargetRef("x", 3),)
    assert d.lateral == (TargetRef("x", 2),)
    with pytest.raises(SlotRangeError):
        edge_c(REG, ("A", ((1, "A"),)), inputs=(2,))


def test_connect_builds_fig3_metapath():
    a = evaluate(bin_leaf("a"), REG)
    b = evaluate(bin_leaf("b"), REG)
    d = connect(a, CRF(((1, 1),)), b)
    assert d.base.connections == (Connection("a", 2, "b", 1),)
    assert d.inputs == (TargetRef("a", 1),) and d.outputs == (TargetRef("b", 2),)
    assert validate(d.base) == []


def test_connect_rejects_bad_routes():
    a = evaluate(bin_leaf("a"), REG)
    d = evaluate(EdgeC("D", ((1, "D"), (2, "D")), (), (1,), (2,), "d"), REG)
    with pytest.raises(SlotRangeError):
        connect(a, CRF(((2, 1),)), a)
    with pytest.raises(TypeMismatchError):
        connect(a, CRF(((1, 1),)), d)


def test_beside_freshens_colliding_ids():
    a = evaluate(bin_leaf("a"), REG)
    two = beside(a, a)
    assert len(two.base.edges) == 2 and len(set(two.base.edge_ids)) == 2
    assert len(times(3, a).base.edges) == 3


def test_swap_primitive_boundary():
    s = swap_prim(REG, 1, 2)
    assert [r.edge for r in s.inputs] == ["w1", "w2", "w3"]
    assert [r.edge for r in s.outputs] == ["w2", "w3", "w1"]


def test_prefix_and_measures():
    x = ConnectC(CRF(((1, 1),)), Beside(bin_leaf("a"), EmptyC()), bin_leaf("b"))
    assert to_prefix(x) == "(connect [1>1] (beside (edge a) (empty)) (edge b))"
    assert expr_size(x) == 2 and expr_depth(x) == 2
    assert to_prefix(SwapPrim(1, 2)) == "(swap 1 2)"


def test_decompose_chain():
    d = chain(3)
    x = decompose(d)
    assert to_prefix(x) == "(connect [1>1] (connect [1>1] (edge E0) (edge E1)) (edge E2))"
    assert equivalent(evaluate(x, REG), d)


def test_decompose_rejects_shared_targets_and_cycles():
    g = TMG(REG, [binary("a"), binary("b"), binary("c")],
            [Connection("a", 2, "b", 1), Connection("a", 2, "c", 1)])
    with pytest.raises(DecomposeError):
        decompose(lateral_dtmg(g))
    cyc = TMG(REG, [binary("a"), binary("b")], [Connection("a", 2, "b", 1), Connection("b", 2, "a", 1)])
    with pytest.raises(DecomposeError):
        decompose(lateral_dtmg(cyc))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_decompositions_reassemble(seed):
    rng = random.Random(seed)
    reg = random_registry(rng, 6)
    _, d = random_expr(rng, reg, Bounds(max_edges=7))
    assert equivalent(evaluate(decompose(d), reg), d, ordered=False)
    assert equivalent(evaluate(decompose_random(d, rng), reg), d, ordered=False)


def test_connect_q_direct_and_fresh():
    x = binary("x")
    y = binary("y")
    q = QCRF(direct=((("x", 2), ("y", 1)),), fresh=(FreshEdge("A", ((1, ("x", 1)), (2, ("y", 2)))),))
    g = connect_q(x, q, y, REG)
    assert len(g.edges) == 3 and len(g.connections) == 3
    assert validate(g) == []
    assert undirected_metapath(g, "x", "y") == ["x", "y"]


def test_mokhov_connect_links_every_pair():
    q = mokhov_connect(binary("x"), binary("y"), REG)
    assert len(q.fresh) == 4
    g = connect_q(binary("x"), q, binary("y"), REG)
    assert len(g.edges) == 6


def test_union_and_paths():
    g = chain(3).base
    h = TMG(REG, [binary("E2"), binary("Z")], [Connection("E2", 2, "Z", 1)])
    u = union(g, h)
    assert undirected_metapath(u, "E0", "Z") == ["E0", "E1", "E2", "Z"]
    assert undirected_metapath(TMG(REG, [binary("p"), binary("q")]), "p", "q") is None
    with pytest.raises(ValueError):
        union(g, TMG(REG, [binary("E0", b="B")]))


def test_con_connect_matches_plain_connect():
    a = evaluate(bin_leaf("a"), REG)
    b = evaluate(bin_leaf("b"), REG)
    p = CRF(((1, 1),))
    assert con_connect(ConDTMG(a, p), b) == connect(a, p, b)
    with pytest.raises(RouteError):
        ConDTMG(a, CRF(((2, 1),)))
    c = con_connect(ConDTMG(a, p), ConDTMG(b, p))
    assert isinstance(c, ConDTMG) and c.routing == p


def test_con_expressions_translate():
    x = ConJoin(Route(CRF(((1, 1),)), ConJoin(Route(CRF(((1, 1),)), bin_leaf("a")), bin_leaf("b"))),
                bin_leaf("c"))
    got = evaluate_con(x, REG)
    plain = evaluate(con_to_expr(x, REG), REG)
    assert got == plain
    assert isomorphic(got, chain(3))
