"""Boolean formulas compiled to loop-complex netlists and simulated by rewriting."""

from .circuit import DualRailCircuit, build_dual_rail
from .compiler import CompileOptions, Netlist, check_crosstalk, compile_circuit, initial_soup, input_species
from .formula import evaluate, negate_to_nnf, parse_formula
from .rewrite import INF, Soup, run_to_fixpoint, signal_set

__version__ = "0.1.0"

__all__ = [
    "DualRailCircuit", "build_dual_rail", "CompileOptions", "Netlist", "check_crosstalk",
    "compile_circuit", "initial_soup", "input_species", "evaluate", "negate_to_nnf",
    "parse_formula", "INF", "Soup", "run_to_fixpoint", "signal_set",
]
