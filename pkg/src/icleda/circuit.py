"""Dual-rail (NOT-free) boolean circuits.

A circuit is a DAG of gates. Input rails carry one literal each (``+x`` for
x, ``-x`` for not-x); constant pseudo-rails ``ON`` (always present) and
``OFF`` (never present) stand in for the constants 1 and 0. Interior gates
are AND/OR, and two sinks ``out_true`` / ``out_false`` receive the result of
the formula half and of its complement half.

Every gate that emits something carries a signal name ``S<k>``. Rails are
numbered first (``x1``, ``not x1``, ``x2``, ...), then the interior gates,
and the two gates feeding the outputs get the last two numbers, so the
three-variable example ``(!x1 & x2) | (x1 & x2 & !x3)`` ends with
``S11``/``S12`` on its outputs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from .formula import (And, Const, Formula, Not, Or, Var, collect_variables,
                      negate_to_nnf, to_nnf)

log = logging.getLogger(__name__)

RAIL, CONST, AND, OR, OUT_TRUE, OUT_FALSE = "rail", "const", "and", "or", "out_true", "out_false"
ON, OFF = "ON", "OFF"


@dataclass(frozen=True)
class Gate:
    id: str
    kind: str
    inputs: Tuple[str, ...] = ()
    signal: Optional[str] = None
    var: Optional[str] = None
    polarity: Optional[bool] = None

    @property
    def number(self) -> Optional[int]:
        if self.kind in (AND, OR):
            return int(self.id.rsplit("_", 1)[1])
        return None


def rail_id(var: str, polarity: bool) -> str:
    return ("+" if polarity else "-") + var


@dataclass(frozen=True)
class DualRailCircuit:
    gates: Tuple[Gate, ...]
    out_true: str = OUT_TRUE
    out_false: str = OUT_FALSE

    def __post_init__(self):
        object.__setattr__(self, "_by_id", {g.id: g for g in self.gates})

    def gate(self, gid: str) -> Gate:
        return self._by_id[gid]

    def __contains__(self, gid: str) -> bool:
        return gid in self._by_id

    @property
    def variables(self) -> List[str]:
        out: List[str] = []
        for g in self.gates:
            if g.kind == RAIL and g.var not in out:
                out.append(g.var)
        return out

    @property
    def rails(self) -> List[Gate]:
        return [g for g in self.gates if g.kind in (RAIL, CONST)]

    @property
    def interior(self) -> List[Gate]:
        return [g for g in self.gates if g.kind in (AND, OR)]

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)

    def signals(self) -> Dict[str, str]:
        """Gate id -> emitted signal name, for every emitting gate."""
        return {g.id: g.signal for g in self.gates if g.signal is not None}

    def edges(self) -> List[Tuple[str, str, str]]:
        """(source, target, signal) triples; one signal per source gate."""
        return [(src, g.id, self.gate(src).signal) for g in self.gates for src in g.inputs]

    def to_dict(self) -> dict:
        gates = []
        for g in self.gates:
            d = {"id": g.id, "kind": g.kind, "inputs": list(g.inputs)}
            if g.signal is not None:
                d["signal"] = g.signal
            if g.var is not None:
                d["var"] = g.var
            if g.polarity is not None:
                d["polarity"] = g.polarity
            gates.append(d)
        return {"gates": gates, "out_true": self.out_true, "out_false": self.out_false}

    @classmethod
    def from_dict(cls, d: dict) -> "DualRailCircuit":
        gates = tuple(Gate(id=g["id"], kind=g["kind"], inputs=tuple(g.get("inputs", ())),
                           signal=g.get("signal"), var=g.get("var"), polarity=g.get("polarity"))
                      for g in d["gates"])
        return cls(gates, d.get("out_true", OUT_TRUE), d.get("out_false", OUT_FALSE))


# ---------------------------------------------------------------------------
# sum-of-products for the complement half


class _TooLarge(Exception):
    pass


def _absorb(terms):
    uniq = []
    seen = set()
    for t in terms:
        key = frozenset(t)
        if key not in seen:
            seen.add(key)
            uniq.append(t)
    sets = [frozenset(t) for t in uniq]
    return [t for t, s in zip(uniq, sets) if not any(o < s for o in sets)]


def _sop(ast: Formula, limit: int):
    if isinstance(ast, Var):
        return [((ast.name, True),)]
    if isinstance(ast, Not):
        return [((ast.child.name, False),)]
    if isinstance(ast, Const):
        return [()] if ast.value else []
    parts = [_sop(c, limit) for c in ast.children]
    if isinstance(ast, Or):
        return _absorb([t for p in parts for t in p])
    acc = parts[0]
    for p in parts[1:]:
        if len(acc) * len(p) > limit * limit:
            raise _TooLarge
        merged = []
        for t1 in acc:
            for t2 in p:
                t = t1 + tuple(l for l in t2 if l not in t1)
                if any((name, not pol) in t for name, pol in t):
                    continue
                merged.append(t)
        acc = _absorb(merged)
        if len(acc) > limit:
            raise _TooLarge
    return acc


def sum_of_products(nnf: Formula, limit: int = 256) -> Formula:
    """Disjunction of conjunctions equivalent to an NNF formula.

    Contradictory terms are dropped and terms subsumed by a shorter term are
    absorbed. Raises ``OverflowError`` past ``limit`` terms.
    """
    try:
        terms = _sop(nnf, limit)
    except _TooLarge:
        raise OverflowError(f"sum of products exceeds {limit} terms") from None
    if not terms:
        return Const(False)
    if terms == [()]:
        return Const(True)

    def lit(l):
        return Var(l[0]) if l[1] else Not(Var(l[0]))

    prods = [lit(t[0]) if len(t) == 1 else And(tuple(lit(l) for l in t)) for t in terms]
    return prods[0] if len(prods) == 1 else Or(tuple(prods))


# ---------------------------------------------------------------------------
# construction


class _Builder:
    def __init__(self, variables, binary_and):
        self.binary_and = binary_and
        self.rails: Dict[str, Gate] = {}
        for v in variables:
            for pol in (True, False):
                rid = rail_id(v, pol)
                self.rails[rid] = Gate(rid, RAIL, var=v, polarity=pol)
        self.consts: Dict[str, Gate] = {}
        self.interior: List[Gate] = []

    def new_gate(self, kind, inputs):
        n = len(self.interior) + 1
        gid = f"{'AND' if kind == AND else 'OR'}_{n}"
        self.interior.append(Gate(gid, kind, tuple(inputs)))
        return gid

    def half(self, ast: Formula) -> str:
        if isinstance(ast, Var):
            return rail_id(ast.name, True)
        if isinstance(ast, Not):
            if not isinstance(ast.child, Var):
                raise ValueError("formula half must be in negation normal form")
            return rail_id(ast.child.name, False)
        if isinstance(ast, Const):
            cid = ON if ast.value else OFF
            self.consts.setdefault(cid, Gate(cid, CONST, polarity=ast.value))
            return cid
        ids = []
        for child in ast.children:
            gid = self.half(child)
            # E is a set of pairs: a repeated input is the same edge
            if gid not in ids:
                ids.append(gid)
        if len(ids) == 1:
            return ids[0]
        kind = AND if isinstance(ast, And) else OR
        if kind == AND and self.binary_and:
            return cascade(ids, self.new_gate)
        return self.new_gate(kind, ids)


def cascade(ids: List[str], new_gate) -> str:
    """Right-deep chain of binary ANDs: a & (b & (c & d))."""
    top = ids[-1]
    for gid in reversed(ids[:-1]):
        top = new_gate(AND, (gid, top))
    return top


def _complement_half(ast: Formula, false_half: str, limit: int) -> Formula:
    neg = negate_to_nnf(ast)
    if false_half == "nnf":
        return neg
    if false_half != "dnf":
        raise ValueError(f"unknown false_half {false_half!r}")
    try:
        return sum_of_products(neg, limit)
    except OverflowError:
        log.warning("complement has more than %d product terms; using its NNF instead", limit)
        return neg


def build_dual_rail(ast: Formula, *, binary_and: bool = True, false_half: str = "dnf",
                    term_limit: int = 256) -> DualRailCircuit:
    """Superpose a circuit for ``ast`` and one for its negation.

    The true half is the NNF of ``ast``. The false half is the sum of
    products of the negation (``false_half="dnf"``) or its plain NNF
    (``"nnf"``). Both halves share the input rails and nothing else. With
    ``binary_and`` every AND is a two-input gate.
    """
    b = _Builder(collect_variables(ast), binary_and)
    top_true = b.half(to_nnf(ast))
    top_false = b.half(_complement_half(ast, false_half, term_limit))

    counter = 0

    def next_signal():
        nonlocal counter
        counter += 1
        return f"S{counter}"

    rails = [Gate(g.id, g.kind, signal=next_signal(), var=g.var, polarity=g.polarity)
             for g in b.rails.values()]
    consts = [Gate(g.id, g.kind, signal=next_signal(), polarity=g.polarity)
              for cid, g in sorted(b.consts.items(), key=lambda kv: kv[0] != ON)]
    feeders = [top_true, top_false]
    sig = {}
    for g in b.interior:
        if g.id not in feeders:
            sig[g.id] = next_signal()
    for gid in feeders:
        if gid.startswith(("AND_", "OR_")):
            sig[gid] = next_signal()
    interior = [Gate(g.id, g.kind, g.inputs, signal=sig[g.id]) for g in b.interior]
    outs = [Gate(OUT_TRUE, OUT_TRUE, (top_true,)), Gate(OUT_FALSE, OUT_FALSE, (top_false,))]
    return DualRailCircuit(tuple(rails + consts + interior + outs))


def lower_and_binary(c: DualRailCircuit) -> DualRailCircuit:
    """Replace every AND with more than two inputs by a chain of binary ANDs.

    The top of each chain keeps the original id and signal, so consumers are
    untouched; the new inner gates get fresh ids and signals.
    """
    if all(len(g.inputs) <= 2 for g in c.gates if g.kind == AND):
        return c
    numbers = [g.number for g in c.interior]
    next_num = max(numbers, default=0)
    next_sig = max((int(s[1:]) for s in c.signals().values()), default=0)
    out: List[Gate] = []
    for g in c.gates:
        if g.kind != AND or len(g.inputs) <= 2:
            out.append(g)
            continue
        top = g.inputs[-1]
        for src in reversed(g.inputs[1:-1]):
            next_num += 1
            next_sig += 1
            gid = f"AND_{next_num}"
            out.append(Gate(gid, AND, (src, top), signal=f"S{next_sig}"))
            top = gid
        out.append(Gate(g.id, AND, (g.inputs[0], top), signal=g.signal))
    return DualRailCircuit(tuple(out), c.out_true, c.out_false)


# ---------------------------------------------------------------------------
# checking and evaluation


def validate_dag(c: DualRailCircuit) -> List[str]:
    """Return the list of violated invariants (empty when the circuit is sound)."""
    errors = []
    ids = [g.id for g in c.gates]
    dup = sorted({i for i in ids if ids.count(i) > 1})
    if dup:
        errors.append(f"duplicate gate ids: {', '.join(dup)}")
    known = set(ids)
    for g in c.gates:
        for src in g.inputs:
            if src not in known:
                errors.append(f"{g.id}: unknown input {src}")
        n = len(g.inputs)
        if g.kind in (RAIL, CONST) and n:
            errors.append(f"{g.id}: input rail must have no inputs")
        elif g.kind in (AND, OR) and n < 2:
            errors.append(f"{g.id}: arity {n}, {g.kind} needs at least 2 inputs")
        elif g.kind in (OUT_TRUE, OUT_FALSE) and n != 1:
            errors.append(f"{g.id}: output needs exactly 1 input, has {n}")
        if g.kind in (OUT_TRUE, OUT_FALSE):
            if g.signal is not None:
                errors.append(f"{g.id}: output node must not emit a signal")
        elif g.signal is None:
            errors.append(f"{g.id}: missing signal name")
        if g.kind not in (RAIL, CONST, AND, OR, OUT_TRUE, OUT_FALSE):
            errors.append(f"{g.id}: unknown gate kind {g.kind!r}")
    names = [g.signal for g in c.gates if g.signal is not None]
    dup_sig = sorted({s for s in names if names.count(s) > 1})
    if dup_sig:
        errors.append(f"signal names not unique: {', '.join(dup_sig)}")

    # acyclicity by DFS colouring
    by_id = {g.id: g for g in c.gates}
    state: Dict[str, int] = {}
    cyclic = set()

    def visit(gid):
        state[gid] = 1
        for src in by_id[gid].inputs:
            if src not in by_id:
                continue
            s = state.get(src, 0)
            if s == 1:
                cyclic.add(gid)
            elif s == 0:
                visit(src)
        state[gid] = 2

    for gid in by_id:
        if state.get(gid, 0) == 0:
            visit(gid)
    if cyclic:
        errors.append(f"cycle through {', '.join(sorted(cyclic))}")
    else:
        grounded: Dict[str, bool] = {}

        def reach(gid):
            if gid not in grounded:
                g = by_id[gid]
                grounded[gid] = g.kind in (RAIL, CONST) or (
                    bool(g.inputs) and all(s in by_id and reach(s) for s in g.inputs))
            return grounded[gid]

        for gid in by_id:
            if not reach(gid):
                errors.append(f"{gid}: not reachable from the input rails")
    for out in (c.out_true, c.out_false):
        if out not in by_id:
            errors.append(f"missing output node {out}")
    return errors


def evaluate_circuit(c: DualRailCircuit, rails: Iterable[str]) -> FrozenSet[str]:
    """Least fixpoint of gate firing given the active input rails.

    ``ON`` fires unconditionally. Raises ``ValueError`` when both polarities
    of a variable are active.
    """
    active = set(rails)
    for rid in active:
        if rid not in c or c.gate(rid).kind not in (RAIL, CONST):
            raise ValueError(f"{rid!r} is not an input rail")
        if rid == OFF:
            raise ValueError("the OFF pseudo-rail cannot be activated")
    clash = sorted({r[1:] for r in active if r[0] == "+" and "-" + r[1:] in active})
    if clash:
        raise ValueError(f"contradictory rails for {', '.join(clash)}")
    fired = set(active)
    if ON in c:
        fired.add(ON)
    changed = True
    while changed:
        changed = False
        for g in c.gates:
            if g.id in fired or g.kind in (RAIL, CONST):
                continue
            if g.kind == OR:
                hit = any(s in fired for s in g.inputs)
            else:
                hit = all(s in fired for s in g.inputs)
            if hit:
                fired.add(g.id)
                changed = True
    return frozenset(fired)


def assignment_rails(a: Dict[str, bool]) -> List[str]:
    return [rail_id(v, bool(val)) for v, val in a.items()]
