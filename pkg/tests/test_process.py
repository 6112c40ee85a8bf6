import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from metafold.core import TMG, Connection, Edge, Target, TargetRef, validate
from metafold.errors import (MembershipError, PartitionError, SlotRangeError, StateError,
                             TraceError, TypeMismatchError)
from metafold.morph import SUM, ftmg_fold, numtargets
from metafold.process import (RealizedTMG, StateOp, Trace, TraversalEvent, VirtualTMG, compact,
                              edge_roles, empty_realized, forget, is_pruned_out, pruned, realize,
                              realized_from, reinsert, replay_ops, reverse_trace, stamp,
                              traces_to_ftmg, traversal_to_dtmg, value_update)

from conftest import REG, binary, chain


def ev(s, si, d, di, t=0):
    return TraversalEvent(s, tuple(si), d, tuple(di), t)


def pipeline():
    return chain(4).base


def test_traversal_roles():
    base = pipeline()
    d = traversal_to_dtmg(base, stamp([ev("E0", [2], "E1", [1]), ev("E1", [2], "E2", [1])]))
    assert d.base.edge_ids == ("E0", "E1", "E2")
    roles = edge_roles(d)
    assert roles["E0"] == (frozenset(), frozenset({2}), frozenset({1}))
    assert roles["E1"] == (frozenset({1}), frozenset({2}), frozenset())
    assert validate(d.base) == []


def test_traversal_errors():
    base = pipeline()
    with pytest.raises(TraceError):
        traversal_to_dtmg(base, [ev("E0", [2], "E1", [1], 2), ev("E1", [2], "E2", [1], 1)])
    with pytest.raises(TraceError):
        traversal_to_dtmg(base, stamp([ev("E0", [1, 2], "E1", [1])]))
    with pytest.raises(SlotRangeError):
        traversal_to_dtmg(base, stamp([ev("E0", [3], "E1", [1])]))
    with pytest.raises(PartitionError):
        traversal_to_dtmg(base, stamp([ev("E0", [2], "E1", [1]), ev("E1", [1], "E2", [1])]))
    typed = TMG(REG, [binary("a"), binary("d", "D", "D", "D")])
    with pytest.raises(TypeMismatchError):
        traversal_to_dtmg(typed, stamp([ev("a", [2], "d", [1])]))


def random_trace(rng, g, n):
    evs = []
    for _ in range(n):
        a, b = rng.sample(g.edge_ids, 2) if len(g.edges) > 1 else (g.edge_ids[0],) * 2
        ea, eb = g.edge(a), g.edge(b)
        k = rng.randint(1, min(ea.arity, eb.arity))
        evs.append(ev(a, rng.sample(range(1, ea.arity + 1), k), b, rng.sample(range(1, eb.arity + 1), k)))
    return stamp(evs)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_traversal_outputs_validate_and_reverse(seed):
    rng = random.Random(seed)
    g = TMG(REG, [Edge(f"x{i}", "A", tuple(Target(j, "A") for j in range(1, 4))) for i in range(4)])
    tr = random_trace(rng, g, rng.randint(1, 4))
    try:
        d = traversal_to_dtmg(g, tr)
    except PartitionError:
        with pytest.raises(PartitionError):
            traversal_to_dtmg(g, reverse_trace(tr))
        return
    assert validate(d.base) == []
    r = traversal_to_dtmg(g, reverse_trace(tr))
    assert set(r.inputs) == set(d.outputs) and set(r.outputs) == set(d.inputs)
    assert set(r.lateral) == set(d.lateral)


def test_ftmg_from_traces():
    base = pipeline()
    t1 = Trace("a", stamp([ev("E0", [2], "E1", [1])]))
    t2 = Trace("b", stamp([ev("E2", [2], "E3", [1])]))
    f = traces_to_ftmg(base, [t1, t2], [0.5, 0.5])
    assert ftmg_fold(SUM, numtargets(), f) == 8
    with pytest.raises(TraceError) as info:
        traces_to_ftmg(base, [t1, Trace("bad", stamp([ev("E0", [9], "E1", [1])]))])
    assert info.value.args and "trace 1" in str(info.value)


def test_event_connections_join_the_base():
    base = TMG(REG, [binary("p"), binary("q")])
    f = traces_to_ftmg(base, [stamp([ev("p", [2], "q", [1])])])
    assert f.base.connections == (Connection("p", 2, "q", 1),)


def test_virtual_membership():
    v = VirtualTMG(REG, max_arity=2, value_range=(0, 5), max_values=1)
    assert v.admits(binary("x"))
    assert "arity" in v.reason(Edge("x", "A", (Target(1, "A"),) * 3))
    assert "outside" in v.reason(Edge("x", "A", (), (9,)))
    assert "not registered" in v.reason(Edge("x", "Z"))
    r = empty_realized(v)
    with pytest.raises(MembershipError):
        realize(r, Edge("x", "A", (), (1, 2)))


def test_value_update_keeps_old_edge_until_compaction():
    r = realized_from(pipeline())
    r2 = value_update(r, "E1", (7,), "E1v")
    assert "E1" in r2.tmg and "E1v" in r2.tmg
    assert all("E1" not in (c.a, c.b) for c in r2.tmg.connections)
    assert "E1" not in compact(r2).tmg
    with pytest.raises(StateError):
        value_update(r2, "E2", (1,), "E1v")
    same = value_update(r, "E1", (), "E1w")
    assert same.tmg.edge("E1w").values == ()


def test_realize_checks():
    r = realized_from(pipeline())
    with pytest.raises(StateError):
        realize(r, binary("E0"))
    with pytest.raises(SlotRangeError):
        realize(r, binary("N"), [("N", 5, "E0", 1)])
    r2 = realize(r, binary("N"), [("E3", 2, "N", 1)])
    assert Connection("E3", 2, "N", 1) in r2.tmg.connections


def test_forget_and_reinsert_errors():
    r = realized_from(pipeline())
    with pytest.raises(StateError):
        reinsert(r, "E0")
    with pytest.raises(StateError):
        forget(r, "nope")


def parity_oracle(ops):
    count = {}
    for _, e in ops:
        count[e] = count.get(e, 0) + 1
    return {e for e, n in count.items() if n % 2}


def test_parity_exhaustive_small():
    g = TMG(REG, [binary("a"), Edge("b", "B", (Target(1, "A"),))])
    alphabet = [StateOp(k, e) for k in ("forget", "reinsert") for e in ("a", "b")]
    for n in range(5):
        for ops in itertools.product(alphabet, repeat=n):
            try:
                r = replay_ops(realized_from(g), ops)
            except StateError:
                continue
            out = parity_oracle([(o.kind, o.edge) for o in ops])
            assert {e.id for e in r.tmg.edges if is_pruned_out(r, e)} == out


def test_pruning_drops_dangling_connections():
    base = pipeline()
    base = base.replace(edges=[Edge(e.id, e.type, e.targets, (i,)) for i, e in enumerate(base.edges)])
    r = replay_ops(realized_from(base), [StateOp("forget", "E1")])
    p = pruned(r)
    assert p.edge_ids == ("E0", "E2", "E3")
    assert p.connections == (Connection("E2", 2, "E3", 1),)


def test_forget_counter_is_keyed_by_content():
    # identical edges share one counter, so forgetting one forgets its copies
    r = replay_ops(realized_from(pipeline()), [StateOp("forget", "E1")])
    assert pruned(r).edge_ids == ()
