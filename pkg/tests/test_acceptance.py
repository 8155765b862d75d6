"""Acceptance criteria 1-8. A PASS/FAIL line per criterion is printed at the end of the run.

Run alone with ``pytest tests/test_acceptance.py`` or ``python3 tests/test_acceptance.py``.
"""

import json
import random
import time
from itertools import combinations

import pytest

from icleda.circuit import AND, OR, Gate, build_dual_rail
from icleda.cli import main as cli_main
from icleda.compiler import (SINGLE_REGION, TWO_REGION, CompileOptions, DomainTable, check_crosstalk,
                             compile_and_gate_single_region, compile_and_gate_two_region, compile_circuit,
                             compile_or_gate, initial_soup)
from icleda.formula import (assignments, collect_variables, evaluate, is_nnf, negate_to_nnf, parse_formula,
                            random_formula, to_text)
from icleda.netlist import save
from icleda.rewrite import (BLOCK, INF, Soup, apply_instance, enumerate_rules, rule_unblock_two_region,
                            run_to_fixpoint)
from icleda.strand import Domain, apartness, joint_apartness, parse_species, realize_signal

from helpers import F_TEXT, NOT_F_TEXT, alias

VARIANTS = (TWO_REGION, SINGLE_REGION)


def outputs_fired(n, signals):
    return n.outputs[0] in signals, n.outputs[1] in signals


def compile_text(text, variant):
    ast = parse_formula(text)
    return ast, compile_circuit(build_dual_rail(ast), CompileOptions(variant), formula=to_text(ast))


# --- 1 ----------------------------------------------------------------------


@pytest.mark.criterion(1, "worked example fidelity")
@pytest.mark.parametrize("variant", VARIANTS)
def test_worked_example_fidelity(variant):
    start = time.perf_counter()
    ast = parse_formula(F_TEXT)
    c = build_dual_rail(ast)
    n = compile_circuit(c, CompileOptions(variant))
    rows = []
    for a in assignments(n.variables):
        fired = outputs_fired(n, run_to_fixpoint(initial_soup(n, a)).signals)
        rows.append((fired, evaluate(ast, a)))
    elapsed = time.perf_counter() - start

    assert (c.count(AND), c.count(OR)) == (4, 2)
    assert (n.count("and"), n.count("or")) == (4, 2)
    assert sorted(c.signals().values()) == sorted(f"S{k}" for k in range(1, 13))
    assert n.outputs == ("S11", "S12")
    assert len(rows) == 8
    for fired, expected in rows:
        assert fired == (expected, not expected)
    assert elapsed < 1.0


# --- 2 and 6 ----------------------------------------------------------------


def _monotone(history):
    return all(a <= b for a, b in zip(history, history[1:]))


@pytest.fixture(scope="module")
def sweep():
    """Criterion 2 runs: 200 seeded formulas, both variants, every assignment."""
    start = time.perf_counter()
    rows = []
    for k in range(200):
        rng = random.Random(1000 + k)
        ast = random_formula(rng, rng.randint(1, 6), 5, const_prob=0.05)
        c = build_dual_rail(ast)
        for variant in VARIANTS:
            n = compile_circuit(c, CompileOptions(variant))
            for a in assignments(collect_variables(ast)):
                res = run_to_fixpoint(initial_soup(n, a))
                rows.append((k, variant, outputs_fired(n, res.signals), evaluate(ast, a),
                             res.reason, res.steps, _monotone(res.signal_history)))
    return rows, time.perf_counter() - start


@pytest.mark.criterion(2, "randomized end-to-end equivalence")
def test_randomized_end_to_end(sweep):
    rows, elapsed = sweep
    formulas = {r[0] for r in rows}
    assert len(formulas) == 200
    wrong = [r for r in rows if r[2] != (r[3], not r[3])]
    assert wrong == []
    assert elapsed < 60.0


# --- 3 ----------------------------------------------------------------------


def _table(gid, inputs):
    return DomainTable(signals={**{a: a for a in inputs}, gid: "R"},
                       sites={(gid, k): f"F{k}" for k in range(1, len(inputs) + 1)})


def _fires(species, present):
    soup = Soup([(sp, 1) for sp in species] + [(realize_signal(a), INF) for a in present])
    return "R" in run_to_fixpoint(soup).signals


def _subsets(xs):
    return [set(c) for k in range(len(xs) + 1) for c in combinations(xs, k)]


@pytest.mark.criterion(3, "gate unit truth tables")
@pytest.mark.parametrize("ins", [("A", "B"), ("A", "B", "C")])
def test_or_gate_units(ins):
    made = compile_or_gate(Gate("OR_1", OR, ins), _table("OR_1", ins))
    table = {frozenset(s): _fires(made, s) for s in _subsets(ins)}
    assert len(table) == 2 ** len(ins)
    assert all(v == bool(s) for s, v in table.items())


@pytest.mark.criterion(3, "gate unit truth tables")
def test_two_region_and_unit():
    (cx,) = compile_and_gate_two_region(Gate("AND_1", AND, ("A", "B")), _table("AND_1", ("A", "B")))
    for s in _subsets(("A", "B")):
        assert _fires([cx], s) == (s == {"A", "B"})
    soup = Soup([(cx, 1), (realize_signal("A"), INF), (realize_signal("B"), INF)])
    finals = []
    for first in rule_unblock_two_region(soup):
        mid = apply_instance(soup, first)
        (second,) = rule_unblock_two_region(mid)
        finals.append(apply_instance(mid, second))
    assert len(finals) == 2 and finals[0] == finals[1]


@pytest.mark.criterion(3, "gate unit truth tables")
def test_single_region_and_unit():
    (cx,) = compile_and_gate_single_region(Gate("AND_1", AND, ("A", "B")), _table("AND_1", ("A", "B")))
    for s in _subsets(("A", "B")):
        assert _fires([cx], s) == (s == {"A", "B"})
    loop = parse_species("<F1* w_and1 R*>")
    only_b = run_to_fixpoint(Soup([(cx, 1), (realize_signal("B"), INF)])).soup
    assert parse_species("[<F1* w_and1 R*> | ^ A* F1 @0.0~1]") in only_b
    assert loop not in only_b
    only_a = run_to_fixpoint(Soup([(cx, 1), (realize_signal("A"), INF)]))
    assert only_a.steps == 0 and cx in only_a.soup


# --- 4 ----------------------------------------------------------------------


BLOCKED = parse_species("[<F* u R*> | ^ t A* F w @0.0~2]")
LOOP = parse_species("<F* u R*>")
TRIGGER = parse_species("^ t A* F w")


@pytest.mark.criterion(4, "apartness priority")
@pytest.mark.parametrize("flavor", ["short", "extended"])
def test_pinned_apartness_values(flavor):
    sigma = realize_signal("A", flavor)
    assert joint_apartness(Domain("A", True), BLOCKED, sigma) == 0
    assert apartness(Domain("F"), BLOCKED) == 1
    # the backward pairing: F of the released trigger against the free site F*
    res = run_to_fixpoint(Soup([(BLOCKED, 1), (sigma, INF)]))
    (waste,) = [sp for sp in res.soup.counts if sp.text.startswith("[^ t A* F w")]
    assert joint_apartness(Domain("F"), waste, LOOP) == 1
    assert BLOCK not in {r.tag for r in res.trace}


@pytest.mark.criterion(4, "apartness priority")
@pytest.mark.parametrize("flavor", ["short", "extended"])
@pytest.mark.parametrize("seed", [None] + list(range(30)))
def test_scheduler_never_prefers_reblocking(flavor, seed):
    soup = Soup([(BLOCKED, 1), (LOOP, 1), (TRIGGER, 1), (realize_signal("A", flavor), INF)])
    res = run_to_fixpoint(soup, seed=seed)
    assert res.reason == "fixpoint"
    contested = 0
    for inst in res.trace:
        live = enumerate_rules(soup)
        assert inst in live
        if any(r.apartness == 0 for r in live):
            contested += any(r.tag == BLOCK for r in live)
            assert inst.apartness == 0 and inst.tag != BLOCK
        soup = apply_instance(soup, inst)
    # the re-blocking instance was on offer at least once
    assert contested > 0


# --- 5 ----------------------------------------------------------------------


def _confluence_netlists():
    texts = [F_TEXT]
    rng = random.Random(77)
    while len(texts) < 10:
        ast = random_formula(rng, rng.randint(2, 4), 5)
        if len(collect_variables(ast)) >= 2:
            texts.append(to_text(ast))
    return [(t, v) for t in texts for v in VARIANTS]


@pytest.fixture(scope="module")
def confluence_runs():
    out = []
    for text, variant in _confluence_netlists():
        ast, n = compile_text(text, variant)
        for a in assignments(n.variables):
            soup = initial_soup(n, a)
            base = run_to_fixpoint(soup)
            runs = [run_to_fixpoint(soup, seed=s) for s in range(50)]
            out.append((text, variant, a, base, runs))
    return out


@pytest.mark.criterion(5, "confluence")
def test_confluence(confluence_runs):
    assert len({(t, v) for t, v, *_ in confluence_runs}) == 20
    for text, variant, a, base, runs in confluence_runs:
        assert len(runs) == 50
        assert {r.signals for r in runs} == {base.signals}, (text, variant, a)
    # the seeds really do explore different orders
    orders = {tuple(i.render() for i in r.trace) for *_, runs in confluence_runs for r in runs}
    assert len(orders) > len(confluence_runs)


# --- 6 ----------------------------------------------------------------------


@pytest.mark.criterion(6, "monotonicity and termination")
def test_monotone_and_terminating(sweep, confluence_runs):
    rows, _ = sweep
    assert all(r[4] == "fixpoint" for r in rows)
    assert all(r[6] for r in rows)
    assert max(r[5] for r in rows) < 10_000
    for *_, base, runs in confluence_runs:
        for res in [base] + runs:
            assert res.reason == "fixpoint"
            assert _monotone(res.signal_history)


# --- 7 ----------------------------------------------------------------------


@pytest.mark.criterion(7, "crosstalk detection")
@pytest.mark.parametrize("variant", VARIANTS)
def test_crosstalk_detection(variant, tmp_path, capsys):
    _, n = compile_text(F_TEXT, variant)
    clean, bad = tmp_path / "clean.json", tmp_path / "bad.json"
    save(n, clean)
    # AND_5 made to emit AND_1's signal
    save(alias(n, "S10", "S7"), bad)

    assert check_crosstalk(n) == []
    assert cli_main(["check", str(clean)]) == 0
    assert cli_main(["check", str(bad)]) == 1
    capsys.readouterr()
    assert cli_main(["truthtable", str(bad), "--format=json"]) == 1
    rows = json.loads(capsys.readouterr().out)["rows"]
    assert any(r["verdict"] == "both" or not r["ok"] for r in rows)


# --- 8 ----------------------------------------------------------------------


@pytest.mark.criterion(8, "NNF correctness")
def test_nnf_random():
    rng = random.Random(8)
    for _ in range(500):
        ast = random_formula(rng, rng.randint(1, 8), 6, const_prob=0.05)
        neg = negate_to_nnf(ast)
        assert is_nnf(neg)
        for a in assignments(collect_variables(ast)):
            assert evaluate(neg, a) == (not evaluate(ast, a))


@pytest.mark.criterion(8, "NNF correctness")
def test_nnf_worked_example():
    f = parse_formula(F_TEXT)
    neg = negate_to_nnf(f)
    assert is_nnf(neg)
    expected = parse_formula(NOT_F_TEXT)
    for a in assignments(["x1", "x2", "x3"]):
        assert evaluate(neg, a) == evaluate(expected, a) == (not evaluate(f, a))


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
