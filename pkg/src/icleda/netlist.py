"""JSON form of a compiled netlist.

Layout (keys in this order)::

    {
      "format": "icleda-netlist/1",
      "formula": "...",                      # or null
      "options": {"and_variant": "two_region", "input_count": "inf"},
      "domains": [{"name": "S1", "polarity": "plain", "sensitivity": "sensitive"}, ...],
      "species": [{"text": "[<F* u R*> | ^ t A* F w @0.0~2]", "count": 1}, ...],
      "inputs": {"x1": {"true": "S1 s1_x ^", "false": "S2 s2_x ^"}, ...},
      "always_on": ["..."],
      "outputs": {"true": "S11", "false": "S12"},
      "rails": {"+x1": "S1", ...},
      "gates": [{"id": "OR_4", "kind": "or", "inputs": [...], "output": "S11", "sites": [...]}, ...],
      "circuit": {...}                       # or null
    }

``dumps(loads(text)) == text`` for any text produced by ``dumps``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Union

from .circuit import DualRailCircuit
from .compiler import CompileOptions, GateSpec, Netlist
from .rewrite import format_count, parse_count
from .strand import Strand, parse_species

FORMAT = "icleda-netlist/1"


class NetlistError(ValueError):
    pass


def to_dict(n: Netlist) -> dict:
    gates = []
    for g in n.gates:
        d = {"id": g.id, "kind": g.kind, "inputs": list(g.inputs), "output": g.output,
             "sites": list(g.sites)}
        if g.variant is not None:
            d["variant"] = g.variant
        gates.append(d)
    return {
        "format": FORMAT,
        "formula": n.formula,
        "options": {"and_variant": n.options.and_variant,
                    "input_count": format_count(n.options.input_count)},
        "domains": [{"name": d.name, "polarity": "primed" if d.primed else "plain",
                     "sensitivity": "sensitive" if d.sensitive else "neutral"} for d in n.domains()],
        "species": [{"text": sp.text, "count": _count_json(k)} for sp, k in n.species],
        "inputs": {v: {"true": t.text, "false": f.text} for v, (t, f) in n.inputs.items()},
        "always_on": [s.text for s in n.always_on],
        "outputs": {"true": n.outputs[0], "false": n.outputs[1]},
        "rails": dict(n.rails),
        "gates": gates,
        "circuit": n.circuit.to_dict() if n.circuit is not None else None,
    }


def _count_json(k):
    s = format_count(k)
    return s if s == "inf" else int(s)


def _strand(text: str) -> Strand:
    sp = parse_species(text)
    if not isinstance(sp, Strand):
        raise NetlistError(f"expected a strand, got {text!r}")
    return sp


def from_dict(d: dict) -> Netlist:
    """Rebuild a netlist; the ``domains`` section is derived and not trusted."""
    if d.get("format") != FORMAT:
        raise NetlistError(f"unsupported netlist format {d.get('format')!r}")
    try:
        opts = d["options"]
        options = CompileOptions(opts["and_variant"], parse_count(opts.get("input_count", "inf")))
        species = tuple((parse_species(s["text"]), parse_count(s["count"])) for s in d["species"])
        inputs = {v: (_strand(p["true"]), _strand(p["false"])) for v, p in d["inputs"].items()}
        gates = tuple(GateSpec(g["id"], g["kind"], tuple(g["inputs"]), g["output"],
                               tuple(g["sites"]), g.get("variant")) for g in d["gates"])
        circuit = DualRailCircuit.from_dict(d["circuit"]) if d.get("circuit") else None
        return Netlist(options, species, inputs, (d["outputs"]["true"], d["outputs"]["false"]),
                       gates, tuple(_strand(s) for s in d.get("always_on", [])),
                       dict(d.get("rails", {})), d.get("formula"), circuit)
    except (KeyError, TypeError) as e:
        raise NetlistError(f"malformed netlist: {e!r}") from None


def dumps(n: Netlist) -> str:
    return json.dumps(to_dict(n), indent=2) + "\n"


def loads(text: str) -> Netlist:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise NetlistError(f"not JSON: {e}") from None
    if not isinstance(d, dict):
        raise NetlistError("netlist must be a JSON object")
    return from_dict(d)


def save(n: Netlist, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps(n))


def load(path: Union[str, Path]) -> Netlist:
    return loads(Path(path).read_text())
