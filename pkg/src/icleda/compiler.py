"""Lowering of dual-rail circuits to netlists of blocked loop complexes.

Each OR gate with n inputs becomes n loops that share one output domain,
each loop held shut by a trigger that the matching input signal strips
off. A two-site AND gate is one loop carrying one site per input, every site
blocked by its own trigger. The single-site AND gate is a loop blocked by a
short trigger ``^ A* F`` whose toehold is covered by a protector ``A B* ^``;
signal B must remove the protector before signal A can open the loop.

Domain naming: signals ``S<k>`` (from the circuit), sites ``F_<gate>_<k>``,
lower-case neutral spacers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Set, Tuple

from .circuit import (AND, CONST, OFF, ON, OR, RAIL, DualRailCircuit,
                      Gate, lower_and_binary, rail_id, validate_dag)
from .rewrite import INF, Count, Soup
from .strand import (LEFT, RIGHT, Complex, Domain, Loop, Species, Strand, can_hybridize,
                     components_of, make_complex, realize_signal)

TWO_REGION, SINGLE_REGION = "two_region", "single_region"
BUFFER = "buffer"


@dataclass(frozen=True)
class CompileOptions:
    and_variant: str = TWO_REGION
    input_count: Count = INF

    def __post_init__(self):
        if self.and_variant not in (TWO_REGION, SINGLE_REGION):
            raise ValueError(f"unknown AND variant {self.and_variant!r}")
        if self.input_count != INF and (int(self.input_count) != self.input_count or self.input_count < 1):
            raise ValueError("input_count must be a positive integer or INF")


@dataclass(frozen=True)
class GateSpec:
    """What one compiled gate is wired to: input signals, output signal, sites."""
    id: str
    kind: str                      # "and", "or" or "buffer"
    inputs: Tuple[str, ...]
    output: str
    sites: Tuple[str, ...]
    variant: Optional[str] = None  # AND gates only


@dataclass(frozen=True)
class Netlist:
    options: CompileOptions
    species: Tuple[Tuple[Species, Count], ...]
    inputs: Mapping[str, Tuple[Strand, Strand]]     # variable -> (true rail, false rail)
    outputs: Tuple[str, str]                         # (true signal, false signal)
    gates: Tuple[GateSpec, ...]
    always_on: Tuple[Strand, ...] = ()
    rails: Mapping[str, str] = field(default_factory=dict)   # rail id -> signal
    formula: Optional[str] = None
    circuit: Optional[DualRailCircuit] = None

    @property
    def variables(self) -> List[str]:
        return list(self.inputs)

    def domains(self) -> List[Domain]:
        seen = set()
        for sp, _ in self.species:
            for comp in components_of(sp):
                seen.update(comp.template if isinstance(comp, Loop) else comp.domains)
        for t, f in self.inputs.values():
            seen.update(t.domains)
            seen.update(f.domains)
        for s in self.always_on:
            seen.update(s.domains)
        return sorted(seen)

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)

    def loops(self) -> int:
        return sum(1 for sp, _ in self.species for c in components_of(sp) if isinstance(c, Loop))


@dataclass(frozen=True)
class DomainTable:
    signals: Dict[str, str]                  # gate or rail id -> output domain
    sites: Dict[Tuple[str, int], str]        # (gate id, input index from 1) -> site domain
    buffers: Dict[str, Tuple[str, str]] = field(default_factory=dict)  # out id -> (site, output)

    def names(self) -> List[str]:
        out = list(dict.fromkeys(self.signals.values()))
        out += [s for s in self.sites.values() if s not in out]
        for site, sig in self.buffers.values():
            out += [site, sig]
        return out


def _tag(gid: str) -> str:
    return re.sub(r"[^A-Za-z0-9]", "", gid).lower()


def allocate_domains(c: DualRailCircuit) -> DomainTable:
    """One output domain per emitting gate, one site domain per gate input.

    Every consumer of a gate reads that gate's single output domain. Outputs
    fed straight from a rail get a one-input buffer loop so that the output
    signal is something the chemistry produces rather than an injected one.
    """
    signals = c.signals()
    sites = {(g.id, k): f"F_{_tag(g.id)}_{k}"
             for g in c.interior for k in range(1, len(g.inputs) + 1)}
    buffers = {}
    next_sig = max((int(s[1:]) for s in signals.values() if s[1:].isdigit()), default=0)
    for out in (c.out_true, c.out_false):
        src = c.gate(out).inputs[0]
        if c.gate(src).kind in (RAIL, CONST):
            next_sig += 1
            buffers[out] = (f"F_{_tag(out)}_1", f"S{next_sig}")
    return DomainTable(signals, sites, buffers)


def _blocked_loop(tag: str, k: int, activator: str, site: str, output: str) -> Species:
    loop = Loop((Domain(site, True), Domain(f"u_{tag}_{k}"), Domain(output, True)))
    trigger = Strand((Domain(f"t_{tag}_{k}"), Domain(activator, True), Domain(site),
                      Domain(f"w_{tag}_{k}")), LEFT)
    return make_complex([loop, trigger], [(0, 0, 1, 2)])


def compile_or_gate(g: Gate, table: DomainTable) -> List[Species]:
    """One blocked loop per input, all emitting the gate's output signal."""
    if g.kind != OR or len(g.inputs) < 2:
        raise ValueError(f"{g.id}: expected an OR gate with fan-in >= 2")
    out = table.signals[g.id]
    return [_blocked_loop(_tag(g.id), k, table.signals[src], table.sites[(g.id, k)], out)
            for k, src in enumerate(g.inputs, start=1)]


def compile_and_gate_two_region(g: Gate, table: DomainTable) -> List[Species]:
    """A single loop with one site per input, each site blocked by its own trigger."""
    if g.kind != AND or len(g.inputs) < 2:
        raise ValueError(f"{g.id}: expected an AND gate with fan-in >= 2")
    tag = _tag(g.id)
    template: List[Domain] = []
    comps: List = []
    pairs = []
    for k, src in enumerate(g.inputs, start=1):
        site = table.sites[(g.id, k)]
        pairs.append((0, len(template), k, 2))
        template += [Domain(site, True), Domain(f"u_{tag}_{k}")]
        comps.append(Strand((Domain(f"t_{tag}_{k}"), Domain(table.signals[src], True), Domain(site),
                             Domain(f"w_{tag}_{k}")), LEFT))
    template.append(Domain(table.signals[g.id], True))
    return [make_complex([Loop(tuple(template))] + comps, pairs)]


def compile_and_gate_single_region(g: Gate, table: DomainTable) -> List[Species]:
    """Loop blocked at one site; the trigger's toehold is covered by a protector.

    The first input opens the loop, the second removes the protector.
    """
    if g.kind != AND or len(g.inputs) != 2:
        raise ValueError(f"{g.id}: single-site AND gates take exactly 2 inputs, got {len(g.inputs)}")
    a = table.signals[g.inputs[0]]
    b = table.signals[g.inputs[1]]
    site = table.sites[(g.id, 1)]
    loop = Loop((Domain(site, True), Domain(f"w_{_tag(g.id)}"), Domain(table.signals[g.id], True)))
    trigger = Strand((Domain(a, True), Domain(site)), LEFT)
    protector = Strand((Domain(a), Domain(b, True)), RIGHT)
    return [make_complex([loop, trigger, protector], [(0, 0, 1, 1), (1, 0, 2, 0)])]


def compile_circuit(c: DualRailCircuit, opts: CompileOptions = CompileOptions(),
                    formula: Optional[str] = None) -> Netlist:
    errors = validate_dag(c)
    if errors:
        raise ValueError("invalid circuit: " + "; ".join(errors))
    if opts.and_variant == SINGLE_REGION:
        c = lower_and_binary(c)
    table = allocate_domains(c)
    species: List[Tuple[Species, Count]] = []
    specs: List[GateSpec] = []
    for g in c.interior:
        ins = tuple(table.signals[s] for s in g.inputs)
        if g.kind == OR:
            made = compile_or_gate(g, table)
            sites = tuple(table.sites[(g.id, k)] for k in range(1, len(g.inputs) + 1))
            specs.append(GateSpec(g.id, OR, ins, table.signals[g.id], sites))
        elif opts.and_variant == TWO_REGION:
            made = compile_and_gate_two_region(g, table)
            sites = tuple(table.sites[(g.id, k)] for k in range(1, len(g.inputs) + 1))
            specs.append(GateSpec(g.id, AND, ins, table.signals[g.id], sites, TWO_REGION))
        else:
            made = compile_and_gate_single_region(g, table)
            specs.append(GateSpec(g.id, AND, ins, table.signals[g.id], (table.sites[(g.id, 1)],),
                                  SINGLE_REGION))
        species += [(sp, 1) for sp in made]
    for out, (site, sig) in table.buffers.items():
        src = c.gate(out).inputs[0]
        tag = _tag(out)
        species.append((_blocked_loop(tag, 1, table.signals[src], site, sig), 1))
        specs.append(GateSpec(f"BUF_{tag}", BUFFER, (table.signals[src],), sig, (site,)))

    def out_signal(out):
        return table.buffers[out][1] if out in table.buffers else table.signals[c.gate(out).inputs[0]]

    inputs = {v: (realize_signal(table.signals[rail_id(v, True)]),
                  realize_signal(table.signals[rail_id(v, False)]))
              for v in c.variables}
    always = tuple(realize_signal(table.signals[ON]) for g in c.rails if g.id == ON)
    rails = {g.id: table.signals[g.id] for g in c.rails}
    return Netlist(opts, tuple(species), inputs, (out_signal(c.out_true), out_signal(c.out_false)),
                   tuple(specs), always, rails, formula, c)


def input_species(n: Netlist, a: Mapping[str, bool]) -> List[Tuple[Strand, Count]]:
    """The signal strands to pour in for assignment ``a`` (one rail per variable)."""
    missing = [v for v in n.inputs if v not in a]
    if missing:
        raise ValueError(f"unassigned: {', '.join(missing)}")
    unknown = [v for v in a if v not in n.inputs]
    if unknown:
        raise ValueError(f"unknown variables: {', '.join(unknown)}")
    k = n.options.input_count
    out = [(n.inputs[v][0] if a[v] else n.inputs[v][1], k) for v in n.inputs]
    out += [(s, k) for s in n.always_on]
    return out


def initial_soup(n: Netlist, a: Mapping[str, bool]) -> Soup:
    return Soup(list(n.species) + input_species(n, a))


# ---------------------------------------------------------------------------
# crosstalk


def _strand_components(sp: Species):
    if isinstance(sp, Complex):
        return [(c, comp) for c, comp in enumerate(sp.components) if isinstance(comp, Strand)]
    return []


def check_crosstalk(n: Netlist) -> List[str]:
    """Flag domain aliasing and unintended hybridization; empty when clean."""
    report: List[str] = []
    by_id = {g.id: g for g in n.gates}
    site_owner: Dict[str, str] = {}
    roles: Dict[str, Set[str]] = {}

    def role(name, what):
        roles.setdefault(name, set()).add(what)

    for rid, sig in n.rails.items():
        role(sig, f"signal of rail {rid}")
    for g in n.gates:
        role(g.output, f"signal of {g.id}")
        for s in g.sites:
            role(s, f"site of {g.id}")
            site_owner[s] = g.id
    for name in sorted(roles):
        if len(roles[name]) > 1:
            report.append(f"domain {name} has several roles: {', '.join(sorted(roles[name]))}")

    known = {d.name for d in n.domains()}
    declared = set(roles)
    for name in sorted(known):
        if name[0].isupper() and name not in declared:
            report.append(f"sensitive domain {name} is not allocated to any gate or rail")

    # who actually emits what
    emitters: Dict[str, Set[str]] = {}
    for rid, sig in n.rails.items():
        if rid != OFF:
            emitters.setdefault(sig, set()).add(f"rail {rid}")
    products: List[Tuple[Strand, str]] = []
    for v, (t, f) in n.inputs.items():
        products += [(t, f"rail {rail_id(v, True)}"), (f, f"rail {rail_id(v, False)}")]
    products += [(s, f"rail {ON}") for s in n.always_on]
    exposed: List[Tuple[str, Domain, str]] = []    # (owner, free domain, species text)

    for sp, _ in n.species:
        comps = components_of(sp)
        loops = [c for c in comps if isinstance(c, Loop)]
        if len(loops) != 1:
            report.append(f"species {sp} does not hold exactly one loop")
            continue
        loop = loops[0]
        owners = {site_owner.get(loop.template[i].name) for i in loop.site_positions()}
        if None in owners or len(owners) != 1:
            report.append(f"loop {loop} has sites of unknown or mixed gates")
            continue
        owner = owners.pop()
        spec = by_id[owner]
        emitted = loop.output_signal()
        emitters.setdefault(emitted, set()).add(owner)
        products.append((loop.product(), owner))
        if emitted != spec.output:
            report.append(f"loop of {owner} emits {emitted} but the gate is declared to emit {spec.output}")
        occ = sp.occupied if isinstance(sp, Complex) else frozenset()
        for c, comp in _strand_components(sp):
            for i, d in enumerate(comp.domains):
                if d.sensitive and d.primed and d.name not in spec.inputs:
                    report.append(f"{owner} reads {d.name} but is wired to {', '.join(spec.inputs)}")
                if d.sensitive and (c, i) not in occ:
                    exposed.append((owner, d, sp.text))
        for i in loop.site_positions():
            li = comps.index(loop)
            if (li, i) not in occ:
                exposed.append((owner, loop.template[i], sp.text))

    for sig in sorted(emitters):
        if len(emitters[sig]) > 1:
            report.append(f"signal {sig} is emitted by several sources: {', '.join(sorted(emitters[sig]))}")

    for strand, src in products:
        sig = strand.signal()
        for owner, d, text in exposed:
            hit = [x for x in strand.domains if x.sensitive and x.complement() == d]
            if not hit or owner == src:
                continue
            if sig is not None and d.name == sig and sig in by_id[owner].inputs:
                continue
            report.append(f"strand {strand} from {src} can bind {d} of {owner} it is not wired to")
    for x in range(len(products)):
        for y in range(x + 1, len(products)):
            pair = can_hybridize(products[x][0], products[y][0])
            if pair is not None:
                report.append(f"free strands {products[x][0]} and {products[y][0]} hybridize via {pair[0]}")

    for g in n.gates:
        if g.variant != SINGLE_REGION:
            continue
        a, b = g.inputs
        if a == b:
            report.append(f"{g.id}: both inputs carry {a}; the protector would be self-complementary")
        if len(emitters.get(a, ())) > 1:
            report.append(f"{g.id}: toehold signal {a} has more than one source")
        site = g.sites[0]
        for strand, src in products:
            read = [d for d in strand.reading() if d.sensitive]
            for u, v in zip(read, read[1:]):
                if u == Domain(site) and v == Domain(a):
                    report.append(f"{g.id}: strand {strand} from {src} carries {site} next to {a}")
    return list(dict.fromkeys(report))
