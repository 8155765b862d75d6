"""Command line: ``icleda compile | simulate | truthtable | check``.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, TextIO

from .circuit import build_dual_rail
from .compiler import CompileOptions, Netlist, check_crosstalk, compile_circuit, initial_soup
from .formula import Formula, FormulaSyntaxError, assignments, evaluate, parse_formula, to_text
from .netlist import NetlistError, dumps, load
from .rewrite import DEFAULT_STEP_LIMIT, FixpointResult, run_to_fixpoint

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    assignment: Dict[str, bool]
    injected: List[str]
    signals: List[str]
    verdict: str                  # "true", "false", "none" or "both"
    steps: int
    reason: str
    expected: Optional[bool] = None

    @property
    def ok(self) -> bool:
        if self.verdict not in ("true", "false") or self.reason != "fixpoint":
            return False
        return self.expected is None or (self.verdict == "true") == self.expected

    def to_dict(self) -> dict:
        return {"assignment": {k: int(v) for k, v in self.assignment.items()},
                "injected": self.injected, "signals": self.signals, "verdict": self.verdict,
                "expected": self.expected, "steps": self.steps, "reason": self.reason, "ok": self.ok}


def verdict(n: Netlist, signals) -> str:
    t, f = n.outputs[0] in signals, n.outputs[1] in signals
    return "both" if t and f else "true" if t else "false" if f else "none"


def run_assignment(n: Netlist, a: Mapping[str, bool], *, oracle: Optional[Formula] = None,
                   seed: Optional[int] = None,
                   max_steps: int = DEFAULT_STEP_LIMIT) -> "tuple[RunReport, FixpointResult]":
    soup = initial_soup(n, a)
    res = run_to_fixpoint(soup, max_steps, seed)
    injected = [(n.inputs[v][0] if a[v] else n.inputs[v][1]).signal() for v in n.inputs]
    injected += [s.signal() for s in n.always_on]
    expected = evaluate(oracle, a) if oracle is not None else None
    report = RunReport(dict(a), injected, sorted(res.signals), verdict(n, res.signals),
                       res.steps, res.reason, expected)
    return report, res


def _oracle(n: Netlist) -> Optional[Formula]:
    return parse_formula(n.formula) if n.formula else None


def truth_table(n: Netlist, oracle: Optional[Formula] = None, *, seed: Optional[int] = None,
                max_steps: int = DEFAULT_STEP_LIMIT) -> List[RunReport]:
    """One report per assignment, first variable most significant."""
    return [run_assignment(n, a, oracle=oracle, seed=seed, max_steps=max_steps)[0]
            for a in assignments(n.variables)]


# ---------------------------------------------------------------------------


def _parse_assignment(items: Sequence[str]) -> Dict[str, bool]:
    out: Dict[str, bool] = {}
    for item in items:
        for part in filter(None, (p.strip() for p in item.split(","))):
            name, eq, value = part.partition("=")
            value = value.strip().lower()
            if not eq or value not in ("0", "1", "true", "false"):
                raise UsageError(f"bad assignment {part!r}; expected name=0 or name=1")
            out[name.strip()] = value in ("1", "true")
    return out


def _options(args) -> CompileOptions:
    return CompileOptions(args.and_variant.replace("-", "_"))


def _compile_text(text: str, args) -> Netlist:
    ast = parse_formula(text)
    c = build_dual_rail(ast, false_half=args.false_half)
    return compile_circuit(c, _options(args), formula=to_text(ast))


def _load_netlist(path: str) -> Netlist:
    try:
        return load(path)
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _summary(n: Netlist) -> str:
    kinds = {k: n.count(k) for k in ("and", "or", "buffer")}
    return (f"{kinds['and']} AND, {kinds['or']} OR, {kinds['buffer']} buffer gates; "
            f"{len(n.species)} species, {n.loops()} loops, {len(n.domains())} domains; "
            f"outputs true={n.outputs[0]} false={n.outputs[1]}")


def cmd_compile(args, out: TextIO) -> int:
    n = _compile_text(args.formula, args)
    if args.output:
        Path(args.output).write_text(dumps(n))
        print(_summary(n), file=out)
    else:
        out.write(dumps(n))
        print(_summary(n), file=sys.stderr)
    return EXIT_OK


def _emit_trace(res: FixpointResult, args, out: TextIO) -> None:
    lines = "".join(line + "\n" for line in res.trace_lines())
    if args.trace_file:
        Path(args.trace_file).write_text(lines)
    elif args.trace:
        out.write(lines)


def cmd_simulate(args, out: TextIO) -> int:
    n = _load_netlist(args.netlist)
    a = _parse_assignment(args.inputs)
    try:
        report, res = run_assignment(n, a, oracle=_oracle(n), seed=args.seed, max_steps=args.max_steps)
    except ValueError as e:
        raise UsageError(str(e)) from None
    _emit_trace(res, args, out)
    if args.format == "json":
        out.write(json.dumps(report.to_dict(), indent=2) + "\n")
    else:
        print(f"injected: {' '.join(report.injected) or '-'}", file=out)
        print(f"signals: {' '.join(report.signals) or '-'}", file=out)
        print(f"verdict: {report.verdict}", file=out)
        if report.expected is not None:
            print(f"expected: {str(report.expected).lower()}", file=out)
        print(f"steps: {report.steps} ({report.reason})", file=out)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_truthtable(args, out: TextIO) -> int:
    if Path(args.source).is_file():
        n = _load_netlist(args.source)
    else:
        n = _compile_text(args.source, args)
    if len(n.variables) > args.max_vars:
        raise UsageError(f"{len(n.variables)} variables exceed --max-vars {args.max_vars}")
    rows = truth_table(n, _oracle(n), seed=args.seed, max_steps=args.max_steps)
    passed = sum(r.ok for r in rows)
    if args.format == "json":
        out.write(json.dumps({"rows": [r.to_dict() for r in rows], "passed": passed,
                              "total": len(rows)}, indent=2) + "\n")
    else:
        names = n.variables
        print(" ".join(names + ["verdict", "expected", "match"]), file=out)
        for r in rows:
            exp = "-" if r.expected is None else str(r.expected).lower()
            bits = [str(int(r.assignment[v])).rjust(len(v)) for v in names]
            print(" ".join(bits + [r.verdict.ljust(7), exp.ljust(8), "ok" if r.ok else "FAIL"]), file=out)
        print(f"{passed}/{len(rows)} rows match", file=out)
    return EXIT_OK if passed == len(rows) else EXIT_FAIL


def cmd_check(args, out: TextIO) -> int:
    report = check_crosstalk(_load_netlist(args.netlist))
    if args.format == "json":
        out.write(json.dumps({"issues": report}, indent=2) + "\n")
    else:
        for line in report:
            print(line, file=out)
        print("clean" if not report else f"{len(report)} issue(s)", file=out)
    return EXIT_OK if not report else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="icleda", description="Compile boolean formulas to loop-complex netlists and simulate them.")
    sub = p.add_subparsers(dest="command", required=True)

    def compile_flags(sp):
        sp.add_argument("--and", dest="and_variant", choices=["two-region", "single-region"],
                        default="two-region", help="AND gate construction")
        sp.add_argument("--false-half", choices=["dnf", "nnf"], default="dnf",
                        help="how the complement half is built (default: simplified sum of products)")

    def run_flags(sp):
        sp.add_argument("--seed", type=int, default=None, help="random scheduler seed")
        sp.add_argument("--max-steps", type=int, default=DEFAULT_STEP_LIMIT)

    def fmt(sp):
        sp.add_argument("--format", choices=["text", "json"], default="text")

    c = sub.add_parser("compile", help="compile a formula to a netlist")
    c.add_argument("formula")
    c.add_argument("-o", "--output", help="netlist file (default: stdout)")
    compile_flags(c)
    c.set_defaults(func=cmd_compile)

    s = sub.add_parser("simulate", help="run one assignment to a fixpoint")
    s.add_argument("netlist")
    s.add_argument("-i", "--inputs", action="append", default=[], help="e.g. x1=0,x2=1")
    s.add_argument("--trace", action="store_true", help="print the rewrite trace")
    s.add_argument("--trace-file", help="write the trace to this file")
    run_flags(s)
    fmt(s)
    s.set_defaults(func=cmd_simulate)

    t = sub.add_parser("truthtable", help="simulate every assignment and compare with the formula")
    t.add_argument("source", help="netlist file or formula text")
    t.add_argument("--max-vars", type=int, default=16)
    compile_flags(t)
    run_flags(t)
    fmt(t)
    t.set_defaults(func=cmd_truthtable)

    k = sub.add_parser("check", help="report domain aliasing and crosstalk")
    k.add_argument("netlist")
    fmt(k)
    k.set_defaults(func=cmd_check)
    return p


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    if getattr(args, "max_steps", 1) < 1:
        print("error: --max-steps must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args, out)
    except FormulaSyntaxError as e:
        print(f"syntax error: {e}", file=sys.stderr)
    except (UsageError, NetlistError, ValueError, OverflowError) as e:
        print(f"error: {e}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
