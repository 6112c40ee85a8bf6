"""Executable law suite for the constructor algebra.

Every law is checked up to isomorphism after identity wires are
contracted (:func:`metafold.canon.equivalent`).  Input and output
positions must match exactly; lateral targets only by role, since the
constructors concatenate lateral lists in operand order and the laws
that permute operands cannot preserve that order.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from .canon import equivalent
from .construct import (CRF, EMPTY_CRF, beside, connect, crf_beside, identity_wiring, swap_prim,
                        to_prefix)
from .core import DTMG, empty_dtmg
from .errors import MetagraphError
from .gen import Bounds, random_arrow, random_crf, random_expr, random_registry

LAW_NAMES = (
    "beside_assoc",
    "empty_unit",
    "connect_empty_is_beside",
    "abiding",
    "swap_law",
    "smc_assoc",
    "smc_left_unit",
    "smc_right_unit",
    "smc_id_sum",
    "smc_interchange",
    "gamma_unit",
    "gamma_hexagon",
    "gamma_naturality",
)


@dataclass
class LawResult:
    name: str
    trials: int = 0
    failures: int = 0
    counterexample: str | None = None

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        out = f"{self.name:<26}{status}  {self.trials - self.failures}/{self.trials}"
        if self.counterexample:
            out += f"  counterexample: {self.counterexample}"
        return out


@dataclass
class LawReport:
    seed: int
    trials: int
    results: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results.values())

    def lines(self) -> list[str]:
        return [r.line() for r in self.results.values()]


def _same(a: DTMG, b: DTMG) -> bool:
    return equivalent(a, b, ordered="io")


def _reorder(d: DTMG, in_blocks, out_blocks) -> DTMG:
    """Permute boundary blocks: ``in_blocks`` lists (start, stop) slices in the new order."""
    ins = tuple(r for a, b in in_blocks for r in d.inputs[a:b])
    outs = tuple(r for a, b in out_blocks for r in d.outputs[a:b])
    return DTMG(d.base, ins, outs, d.lateral)


def _compose(x: DTMG, y: DTMG) -> DTMG:
    # diagrammatic composition of arrows: x first, then y
    return connect(x, CRF.identity(len(x.outputs)), y)


def _sum(*xs: DTMG) -> DTMG:
    out = xs[0]
    for x in xs[1:]:
        out = beside(out, x)
    return out


def _wires(reg, types) -> DTMG:
    return identity_wiring(reg, len(types), types)


def _gamma(reg, left_types, right_types) -> DTMG:
    return swap_prim(reg, len(left_types), len(right_types), tuple(left_types) + tuple(right_types))


class _Trial:
    def __init__(self, rng: random.Random, bounds: Bounds):
        self.rng = rng
        self.bounds = bounds
        self.reg = random_registry(rng, bounds.max_types)

    def expr(self):
        return random_expr(self.rng, self.reg, self.bounds)

    def arrow(self, in_types, depth=2):
        return random_arrow(self.rng, self.reg, in_types, depth, self.bounds.max_arity)

    def in_types(self, k=3):
        names = self.reg.names
        return tuple(self.rng.choice(names) for _ in range(self.rng.randint(0, k)))


def _law_beside_assoc(t: _Trial):
    (xe, x), (ye, y), (ze, z) = t.expr(), t.expr(), t.expr()
    ok = _same(beside(beside(x, y), z), beside(x, beside(y, z)))
    return ok, f"x={to_prefix(xe)} y={to_prefix(ye)} z={to_prefix(ze)}"


def _law_empty_unit(t: _Trial):
    xe, x = t.expr()
    e = empty_dtmg(t.reg)
    ok = (_same(beside(e, x), x) and _same(beside(x, e), x)
          and _same(connect(e, EMPTY_CRF, x), x) and _same(connect(x, EMPTY_CRF, e), x))
    return ok, f"x={to_prefix(xe)}"


def _law_connect_empty(t: _Trial):
    (xe, x), (ye, y) = t.expr(), t.expr()
    return _same(connect(x, EMPTY_CRF, y), beside(x, y)), f"x={to_prefix(xe)} y={to_prefix(ye)}"


def _law_abiding(t: _Trial):
    (ge, g), (he, h), (je, j), (ke, k) = t.expr(), t.expr(), t.expr(), t.expr()
    p = random_crf(t.rng, g, h)
    q = random_crf(t.rng, j, k)
    lhs = beside(connect(g, p, h), connect(j, q, k))
    rhs = connect(beside(g, j), crf_beside(p, q, len(g.outputs), len(h.inputs)), beside(h, k))
    a, b = len(g.inputs), len(h.inputs) - p.size
    c, d = len(j.inputs), len(k.inputs) - q.size
    a2, b2 = len(g.outputs) - p.size, len(h.outputs)
    c2, d2 = len(j.outputs) - q.size, len(k.outputs)
    lhs = _reorder(lhs,
                   [(0, a), (a + b, a + b + c), (a, a + b), (a + b + c, a + b + c + d)],
                   [(0, a2), (a2 + b2, a2 + b2 + c2), (a2, a2 + b2), (a2 + b2 + c2, a2 + b2 + c2 + d2)])
    return _same(lhs, rhs), (f"G={to_prefix(ge)} P={p} H={to_prefix(he)} "
                             f"J={to_prefix(je)} Q={q} K={to_prefix(ke)}")


def _law_swap(t: _Trial):
    (ge, g), (he, h) = t.expr(), t.expr()
    reg = t.reg
    pre = _gamma(reg, h.input_types(), g.input_types())
    post = _gamma(reg, g.output_types(), h.output_types())
    lhs = connect(pre, CRF.identity(len(pre.outputs)),
                  connect(beside(g, h), CRF.identity(len(g.outputs) + len(h.outputs)), post))
    return _same(lhs, beside(h, g)), f"G={to_prefix(ge)} H={to_prefix(he)}"


def _law_smc_assoc(t: _Trial):
    xe, x = t.arrow(t.in_types())
    ye, y = t.arrow(x.output_types())
    ze, z = t.arrow(y.output_types())
    ok = _same(_compose(_compose(x, y), z), _compose(x, _compose(y, z)))
    return ok, f"x={to_prefix(xe)} y={to_prefix(ye)} z={to_prefix(ze)}"


def _law_smc_left_unit(t: _Trial):
    xe, x = t.arrow(t.in_types())
    return _same(_compose(_wires(t.reg, x.input_types()), x), x), f"x={to_prefix(xe)}"


def _law_smc_right_unit(t: _Trial):
    xe, x = t.arrow(t.in_types())
    return _same(_compose(x, _wires(t.reg, x.output_types())), x), f"x={to_prefix(xe)}"


def _law_smc_id_sum(t: _Trial):
    a, b = t.in_types(), t.in_types()
    ok = _same(beside(_wires(t.reg, a), _wires(t.reg, b)), _wires(t.reg, a + b))
    return ok, f"m={len(a)} n={len(b)}"


def _law_smc_interchange(t: _Trial):
    x1e, x1 = t.arrow(t.in_types())
    y1e, y1 = t.arrow(x1.output_types())
    x2e, x2 = t.arrow(t.in_types())
    y2e, y2 = t.arrow(x2.output_types())
    ok = _same(beside(_compose(x1, y1), _compose(x2, y2)),
               _compose(beside(x1, x2), beside(y1, y2)))
    return ok, (f"x1={to_prefix(x1e)} y1={to_prefix(y1e)} "
                f"x2={to_prefix(x2e)} y2={to_prefix(y2e)}")


def _law_gamma_unit(t: _Trial):
    xe, x = t.arrow(t.in_types())
    g0 = _gamma(t.reg, x.output_types(), ())
    ok = _same(g0, _wires(t.reg, x.output_types())) and _same(_compose(x, g0), x)
    return ok, f"x={to_prefix(xe)}"


def _law_gamma_hexagon(t: _Trial):
    g, h, j = t.in_types(), t.in_types(), t.in_types()
    reg = t.reg
    lhs = _gamma(reg, g, h + j)
    rhs = _compose(beside(_gamma(reg, g, h), _wires(reg, j)),
                   beside(_wires(reg, h), _gamma(reg, g, j)))
    return _same(lhs, rhs), f"|G|={len(g)} |H|={len(h)} |J|={len(j)}"


def _law_gamma_naturality(t: _Trial):
    xe, x = t.arrow(t.in_types())
    ye, y = t.arrow(t.in_types())
    reg = t.reg
    lhs = _compose(_compose(_gamma(reg, y.input_types(), x.input_types()), beside(x, y)),
                   _gamma(reg, x.output_types(), y.output_types()))
    return _same(lhs, beside(y, x)), f"x={to_prefix(xe)} y={to_prefix(ye)}"


LAWS = {
    "beside_assoc": _law_beside_assoc,
    "empty_unit": _law_empty_unit,
    "connect_empty_is_beside": _law_connect_empty,
    "abiding": _law_abiding,
    "swap_law": _law_swap,
    "smc_assoc": _law_smc_assoc,
    "smc_left_unit": _law_smc_left_unit,
    "smc_right_unit": _law_smc_right_unit,
    "smc_id_sum": _law_smc_id_sum,
    "smc_interchange": _law_smc_interchange,
    "gamma_unit": _law_gamma_unit,
    "gamma_hexagon": _law_gamma_hexagon,
    "gamma_naturality": _law_gamma_naturality,
}


def laws_check(seed: int = 0, trials: int = 1000, bounds: Bounds = Bounds(),
               laws=LAW_NAMES) -> LawReport:
    """Run every law ``trials`` times from ``seed``; deterministic given the seed."""
    report = LawReport(seed, trials)
    start = time.perf_counter()
    for name in laws:
        report.results[name] = LawResult(name)
    for i in range(trials):
        for name in laws:
            rng = random.Random(f"{seed}:{i}:{name}")
            trial = _Trial(rng, bounds)
            res = report.results[name]
            res.trials += 1
            try:
                ok, witness = LAWS[name](trial)
            except MetagraphError as exc:
                ok, witness = False, f"raised {type(exc).__name__}: {exc}"
            if not ok:
                res.failures += 1
                if res.counterexample is None:
                    res.counterexample = f"trial {i}: {witness}"
    report.seconds = time.perf_counter() - start
    return report
