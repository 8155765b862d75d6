import random
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from icleda.circuit import AND, OR, Gate, build_dual_rail
from icleda.compiler import (SINGLE_REGION, TWO_REGION, CompileOptions, DomainTable, allocate_domains,
                             check_crosstalk, compile_and_gate_single_region, compile_and_gate_two_region,
                             compile_circuit, compile_or_gate, initial_soup, input_species)
from icleda.formula import assignments, collect_variables, evaluate, parse_formula, random_formula
from icleda.rewrite import INF, Soup, rule_amplify, run_to_fixpoint
from icleda.strand import Loop, components_of, realize_signal

from helpers import F_TEXT, alias


def table_for(gid, inputs, out="R"):
    return DomainTable(signals={**{a: a for a in inputs}, gid: out},
                       sites={(gid, k): f"F_{k}" for k in range(1, len(inputs) + 1)})


def fires(species, present, out="R"):
    soup = Soup([(sp, 1) for sp in species] + [(realize_signal(a), INF) for a in present])
    return out in run_to_fixpoint(soup).signals


def subsets(xs):
    return [set(c) for k in range(len(xs) + 1) for c in combinations(xs, k)]


def compiled(text, variant=TWO_REGION):
    ast = parse_formula(text)
    return ast, compile_circuit(build_dual_rail(ast), CompileOptions(variant), formula=text)


def test_allocate_worked_example():
    c = build_dual_rail(parse_formula(F_TEXT))
    t = allocate_domains(c)
    assert sorted(t.signals.values(), key=lambda s: int(s[1:])) == [f"S{k}" for k in range(1, 13)]
    assert len({t.signals[g.id] for g in c.interior}) == 6
    assert len(t.sites) == 12          # one site per gate input edge
    names = t.names()
    assert len(names) == len(set(names))


def test_single_variable_gets_buffer_loops():
    c = build_dual_rail(parse_formula("x1"))
    t = allocate_domains(c)
    assert set(t.buffers) == {"out_true", "out_false"}
    _, n = compiled("x1")
    loop_inputs = {g.inputs for g in n.gates}
    assert loop_inputs == {("S1",), ("S2",)}


def test_or_gate_shape():
    g = Gate("OR_1", OR, ("A", "B"))
    made = compile_or_gate(g, table_for("OR_1", ("A", "B")))
    assert [sp.text for sp in made] == [
        "[<F_1* u_or1_1 R*> | ^ t_or1_1 A* F_1 w_or1_1 @0.0~2]",
        "[<F_2* u_or1_2 R*> | ^ t_or1_2 B* F_2 w_or1_2 @0.0~2]"]


@pytest.mark.parametrize("n", [2, 3])
def test_or_gate_truth_table(n):
    ins = tuple("ABC"[:n])
    made = compile_or_gate(Gate("OR_1", OR, ins), table_for("OR_1", ins))
    assert len(made) == n
    for present in subsets(ins):
        assert fires(made, present) == bool(present)


@pytest.mark.parametrize("n", [2, 3])
def test_two_region_and_truth_table(n):
    ins = tuple("ABC"[:n])
    (cx,) = compile_and_gate_two_region(Gate("AND_1", AND, ins), table_for("AND_1", ins))
    (loop,) = [c for c in components_of(cx) if isinstance(c, Loop)]
    assert len(loop.site_positions()) == n
    for present in subsets(ins):
        assert fires([cx], present) == (present == set(ins))


def test_single_region_and_truth_table():
    (cx,) = compile_and_gate_single_region(Gate("AND_1", AND, ("A", "B")), table_for("AND_1", ("A", "B")))
    assert cx.text == "[<F_1* w_and1 R*> | ^ A* F_1 @0.0~1 | A B* ^ @1.0~0]"
    for present in subsets(("A", "B")):
        assert fires([cx], present) == (present == {"A", "B"})


def test_single_region_needs_two_inputs():
    with pytest.raises(ValueError, match="exactly 2"):
        compile_and_gate_single_region(Gate("AND_1", AND, ("A", "B", "C")), table_for("AND_1", "ABC"))


def test_worked_example_netlist():
    for variant in (TWO_REGION, SINGLE_REGION):
        _, n = compiled(F_TEXT, variant)
        assert (n.count("and"), n.count("or")) == (4, 2)
        assert n.outputs == ("S11", "S12")
        assert n.loops() == 8
        # every loop starts blocked
        assert rule_amplify(Soup(n.species)) == []


def test_single_region_lowers_n_ary_and():
    ast = parse_formula("a & b & c & d")
    c = build_dual_rail(ast, binary_and=False)
    n = compile_circuit(c, CompileOptions(SINGLE_REGION))
    assert all(len(g.inputs) == 2 for g in n.gates if g.kind == "and")
    for a in assignments(["a", "b", "c", "d"]):
        sig = run_to_fixpoint(initial_soup(n, a)).signals
        assert (n.outputs[0] in sig, n.outputs[1] in sig) == (evaluate(ast, a), not evaluate(ast, a))


def test_input_species_worked_example():
    _, n = compiled(F_TEXT)
    inj = input_species(n, {"x1": False, "x2": True, "x3": True})
    assert [s.signal() for s, _ in inj] == ["S2", "S3", "S5"]
    assert all(k == INF for _, k in inj)
    with pytest.raises(ValueError, match="x2, x3"):
        input_species(n, {"x1": True})
    with pytest.raises(ValueError, match="y"):
        input_species(n, {"x1": True, "x2": True, "x3": True, "y": False})


def test_input_count_option():
    c = build_dual_rail(parse_formula("a | b"))
    n = compile_circuit(c, CompileOptions(input_count=2))
    assert {k for _, k in input_species(n, {"a": True, "b": False})} == {2}
    with pytest.raises(ValueError):
        CompileOptions(input_count=0)
    with pytest.raises(ValueError):
        CompileOptions("three_region")


def test_constant_formula_injects_always_on():
    _, n = compiled("1")
    assert n.variables == []
    assert [s.signal() for s, _ in input_species(n, {})] == ["S1"]
    sig = run_to_fixpoint(initial_soup(n, {})).signals
    assert n.outputs[0] in sig and n.outputs[1] not in sig


def test_worked_example_is_clean():
    for variant in (TWO_REGION, SINGLE_REGION):
        assert check_crosstalk(compiled(F_TEXT, variant)[1]) == []


def test_aliased_output_is_flagged():
    _, n = compiled(F_TEXT)
    bad = alias(n, "S10", "S7")
    report = check_crosstalk(bad)
    assert any("S7 is emitted by several sources" in r for r in report)
    assert any("AND_5 emits S7" in r for r in report)
    assert any("OR_6 reads S7" in r for r in report)


def test_single_region_second_source_flagged():
    _, n = compiled(F_TEXT, SINGLE_REGION)
    report = check_crosstalk(alias(n, "S10", "S1"))
    assert any("AND_3: toehold signal S1 has more than one source" in r for r in report)
    assert any("AND_5: toehold signal S1" in r for r in report)


def test_unallocated_domain_flagged():
    _, n = compiled("a | b")
    bad = alias(n, "S3", "Q9")
    assert any("Q9" in r for r in check_crosstalk(bad))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_variants_agree_with_formula(seed):
    ast = random_formula(random.Random(seed), 4, 4, const_prob=0.05)
    c = build_dual_rail(ast)
    nets = [compile_circuit(c, CompileOptions(v)) for v in (TWO_REGION, SINGLE_REGION)]
    for n in nets:
        assert check_crosstalk(n) == []
    for a in assignments(collect_variables(ast)):
        e = evaluate(ast, a)
        for n in nets:
            sig = run_to_fixpoint(initial_soup(n, a)).signals
            assert (n.outputs[0] in sig, n.outputs[1] in sig) == (e, not e)
