"""Multiset rewriting of a soup of strands and complexes, run to a fixpoint.

Rules (tag and the rule number shown in traces):

* ``Hybridize(1)``: two free strands with a free complementary pair form an
  inert duplex.
* ``Amplify(3)``: a fully free loop emits its product with unbounded count;
  the loop stays.
* ``Block(4)``: a free trigger (a strand whose first sensitive domain is
  primed) binds a free site of a loop.
* ``Unblock(7)`` / ``UnblockAnd2(8)``: a signal strand binds the free toehold
  of a trigger, is extended over it, and strips it off the loop. The
  trigger leaves as an inert duplex with the extended signal.
* ``Displace(9)``: the same strand-displacement step when the stripped
  strand hangs on another strand rather than on the loop (the protector of
  the single-site AND gate).

Applicable instances are ranked by the joint apartness of the binding pair,
so a signal reading its toehold at the head always beats a domain buried
deeper in a strand. Unbounded counts absorb consumption; when every
consumed reactant is unbounded the products saturate to unbounded too.
"""

from __future__ import annotations

import math
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple, Union

from .strand import (LEFT, Complex, Domain, Loop, Species, Strand, components_of,
                     hybridization_sites, make_complex, position_apartness)

INF = math.inf
Count = Union[int, float]

HYBRIDIZE, AMPLIFY, BLOCK, UNBLOCK, UNBLOCK_AND2, DISPLACE = (
    "Hybridize", "Amplify", "Block", "Unblock", "UnblockAnd2", "Displace")
TAG_ORDER = {HYBRIDIZE: 0, AMPLIFY: 1, BLOCK: 2, UNBLOCK: 3, UNBLOCK_AND2: 4, DISPLACE: 5}
RULE_NUMBER = {HYBRIDIZE: 1, AMPLIFY: 3, BLOCK: 4, UNBLOCK: 7, UNBLOCK_AND2: 8, DISPLACE: 9}
DEFAULT_STEP_LIMIT = 10_000


def format_count(c: Count) -> str:
    return "inf" if c == INF else str(int(c))


def parse_count(v) -> Count:
    if v in ("inf", INF):
        return INF
    n = int(v)
    if n < 1:
        raise ValueError(f"count must be >= 1 or 'inf', got {v!r}")
    return n


class Soup:
    """Multiset of species; counts are positive integers or ``INF``."""

    def __init__(self, items: Union[Mapping[Species, Count], Iterable[Tuple[Species, Count]], None] = None):
        self.counts: Dict[Species, Count] = {}
        if items is None:
            return
        pairs = items.items() if isinstance(items, Mapping) else items
        for sp, n in pairs:
            self.add(sp, n)

    def add(self, sp: Species, n: Count = 1) -> None:
        if n == 0:
            return
        cur = self.counts.get(sp, 0)
        self.counts[sp] = INF if INF in (cur, n) else cur + n

    def count(self, sp: Species) -> Count:
        return self.counts.get(sp, 0)

    def __contains__(self, sp) -> bool:
        return sp in self.counts

    def __iter__(self):
        return iter(sorted(self.counts))

    def __len__(self):
        return len(self.counts)

    def __eq__(self, other):
        return isinstance(other, Soup) and self.counts == other.counts

    def __or__(self, other: "Soup") -> "Soup":
        out = self.copy()
        for sp, n in other.counts.items():
            out.add(sp, n)
        return out

    def copy(self) -> "Soup":
        s = Soup()
        s.counts = dict(self.counts)
        return s

    def render(self) -> str:
        return "\n".join(f"{format_count(self.counts[sp])} {sp}" for sp in self)


def signal_set(soup: Soup) -> FrozenSet[str]:
    """Names of the signals realized by some free strand in the soup."""
    return frozenset(sp.signal() for sp in soup.counts
                     if isinstance(sp, Strand) and sp.signal() is not None)


@dataclass(frozen=True)
class RuleInstance:
    tag: str
    consumed: Tuple[Species, ...]
    products: Tuple[Species, ...]
    apartness: int
    catalysts: Tuple[Species, ...] = ()
    key: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "key", (
            self.apartness, TAG_ORDER[self.tag],
            tuple(s.text for s in self.catalysts + self.consumed),
            tuple(s.text for s in self.products)))

    @property
    def reactants(self) -> Tuple[Species, ...]:
        return self.catalysts + self.consumed

    def render(self, step: Optional[int] = None) -> str:
        lhs = " + ".join(s.text for s in self.reactants)
        rhs = " + ".join(s.text for s in self.catalysts + self.products)
        body = f"{self.tag}({RULE_NUMBER[self.tag]}): {lhs} -> {rhs} [apartness={self.apartness}]"
        return body if step is None else f"step {step}: {body}"


# ---------------------------------------------------------------------------
# per-species features, cached since species are immutable


@dataclass(frozen=True)
class _Features:
    signal: Optional[str] = None
    trigger_domains: Tuple[Tuple[int, str], ...] = ()    # plain sensitive, trigger-shaped strands
    free_domains: Tuple[Tuple[int, Domain], ...] = ()    # free strands only
    toeholds: Tuple[Tuple[int, int, str], ...] = ()      # (component, position, X) exposing X*
    sites: Tuple[Tuple[int, int, str], ...] = ()         # (loop component, position, F) exposing F*
    free_loop: bool = False


@lru_cache(maxsize=1 << 16)
def _features(sp: Species) -> _Features:
    if isinstance(sp, Strand):
        lead = sp.leading()
        trig = ()
        if lead is not None and lead.primed:
            trig = tuple((i, d.name) for i, d in enumerate(sp.domains) if d.sensitive and not d.primed)
        return _Features(signal=sp.signal(), trigger_domains=trig,
                         free_domains=tuple((i, d) for i, d in enumerate(sp.domains) if d.sensitive))
    if isinstance(sp, Loop):
        return _Features(free_loop=True,
                         sites=tuple((0, i, sp.template[i].name) for i in sp.site_positions()))
    li = sp.loop_index()
    if li is None:
        return _Features()  # loop-free complexes are inert waste
    occ = sp.occupied
    loop = sp.components[li]
    sites = tuple((li, i, loop.template[i].name) for i in loop.site_positions() if (li, i) not in occ)
    toeholds = []
    for c, comp in enumerate(sp.components):
        if c == li or not isinstance(comp, Strand) or len(sp.neighbours(c)) != 1:
            continue
        for i, d in enumerate(comp.domains):
            if d.sensitive and d.primed and (c, i) not in occ:
                toeholds.append((c, i, d.name))
    return _Features(toeholds=tuple(toeholds), sites=sites)


def _leading_position(s: Strand) -> int:
    for i in s.reading_positions():
        if s.domains[i].sensitive:
            return i
    raise ValueError(f"{s} has no sensitive domain")


def _extend(signal: Strand, needed: List[Domain]) -> Tuple[Strand, int, List[int]]:
    """Extend ``signal`` past its leading domain with ``needed`` (reading order).

    Returns the extended strand, the leading position and the positions of
    the needed domains. Domains already present right after the leading one
    are reused, which is how the long realization of a signal behaves.
    """
    lp = _leading_position(signal)
    order = signal.reading_positions()
    after = [i for i in order[order.index(lp) + 1:] if signal.domains[i].sensitive]
    if [signal.domains[i] for i in after[:len(needed)]] == needed:
        return signal, lp, after[:len(needed)]
    doms = list(signal.domains)
    if signal.head == LEFT:
        doms[lp + 1:lp + 1] = needed
        return Strand(tuple(doms), LEFT), lp, [lp + 1 + k for k in range(len(needed))]
    doms[lp:lp] = list(reversed(needed))
    n = len(needed)
    return Strand(tuple(doms), signal.head), lp + n, [lp + n - 1 - k for k in range(n)]


@lru_cache(maxsize=1 << 16)
def _displacement(cx: Complex, comp: int, pos: int, signal: Strand) -> RuleInstance:
    stripped = cx.components[comp]
    (host, bonds), = cx.neighbours(comp).items()
    rank = {p: r for r, p in enumerate(stripped.reading_positions())}
    own = sorted((o for o, _ in bonds), key=rank.__getitem__)
    needed = [stripped.domains[o].complement() for o in own]
    ext, lp, npos = _extend(signal, needed)
    waste = make_complex([stripped, ext], [(0, pos, 1, lp)] + [(0, o, 1, q) for o, q in zip(own, npos)])
    rest = cx.without(comp)
    host_comp = cx.components[host]
    if isinstance(host_comp, Loop):
        tag = UNBLOCK_AND2 if len(host_comp.site_positions()) >= 2 else UNBLOCK
    else:
        tag = DISPLACE
    score = position_apartness(cx, comp, pos) + position_apartness(signal, 0, _leading_position(signal))
    return RuleInstance(tag, (cx, signal), (rest, waste), score)


@lru_cache(maxsize=1 << 16)
def _block(host: Species, comp: int, pos: int, trigger: Strand, tpos: int) -> RuleInstance:
    comps = components_of(host)
    pairs = list(host.pairs) if isinstance(host, Complex) else []
    k = len(comps)
    product = make_complex(list(comps) + [trigger], pairs + [(comp, pos, k, tpos)])
    score = position_apartness(host, comp, pos) + position_apartness(trigger, 0, tpos)
    return RuleInstance(BLOCK, (host, trigger), (product,), score)


@lru_cache(maxsize=1 << 16)
def _hybridize(m: Strand, n: Strand) -> Optional[RuleInstance]:
    sites = hybridization_sites(m, n)
    if not sites:
        return None
    score, (_, i), (_, j) = sites[0]
    return RuleInstance(HYBRIDIZE, (m, n), (make_complex([m, n], [(0, i, 1, j)]),), score)


@lru_cache(maxsize=1 << 16)
def _amplify(loop: Loop) -> RuleInstance:
    return RuleInstance(AMPLIFY, (), (loop.product(),), 0, catalysts=(loop,))


# ---------------------------------------------------------------------------
# incremental agenda


class _Agenda:
    """Soup plus indexes of what can react with what, kept up to date per step."""

    def __init__(self, soup: Soup):
        self.counts: Dict[Species, Count] = {}
        self.instances: set = set()
        self.by_signal: Dict[str, set] = defaultdict(set)
        self.toeholds: Dict[str, List] = defaultdict(list)
        self.sites: Dict[str, List] = defaultdict(list)
        self.triggers: Dict[str, List] = defaultdict(list)
        self.strand_domains: Dict[Domain, set] = defaultdict(set)
        self.signals: Counter = Counter()
        for sp in sorted(soup.counts):
            self._put(sp, soup.counts[sp])

    def soup(self) -> Soup:
        s = Soup()
        s.counts = dict(self.counts)
        return s

    def signal_set(self) -> FrozenSet[str]:
        return frozenset(self.signals)

    def _put(self, sp: Species, n: Count) -> None:
        cur = self.counts.get(sp, 0)
        self.counts[sp] = INF if INF in (cur, n) else cur + n
        if cur == 0:
            self._arrive(sp)

    def _arrive(self, sp: Species) -> None:
        f = _features(sp)
        new = self.instances
        if f.free_loop:
            new.add(_amplify(sp))
        for c, i, x in f.toeholds:
            for s in self.by_signal.get(x, ()):
                new.add(_displacement(sp, c, i, s))
            self.toeholds[x].append((sp, c, i))
        for c, i, name in f.sites:
            for t, tpos in self.triggers.get(name, ()):
                new.add(_block(sp, c, i, t, tpos))
            self.sites[name].append((sp, c, i))
        if isinstance(sp, Strand):
            if f.signal is not None:
                for cx, c, i in self.toeholds.get(f.signal, ()):
                    new.add(_displacement(cx, c, i, sp))
                self.by_signal[f.signal].add(sp)
                self.signals[f.signal] += 1
            for tpos, name in f.trigger_domains:
                for host, c, i in self.sites.get(name, ()):
                    new.add(_block(host, c, i, sp, tpos))
                self.triggers[name].append((sp, tpos))
            partners = set()
            for _, d in f.free_domains:
                partners |= self.strand_domains.get(d.complement(), set())
            for other in partners:
                if other != sp:
                    m, n = (sp, other) if sp.text < other.text else (other, sp)
                    inst = _hybridize(m, n)
                    if inst is not None:
                        new.add(inst)
            for _, d in f.free_domains:
                self.strand_domains[d].add(sp)

    def _depart(self, sp: Species) -> None:
        f = _features(sp)
        for c, i, x in f.toeholds:
            self.toeholds[x].remove((sp, c, i))
        for c, i, name in f.sites:
            self.sites[name].remove((sp, c, i))
        if isinstance(sp, Strand):
            if f.signal is not None:
                self.by_signal[f.signal].discard(sp)
                self.signals[f.signal] -= 1
                if not self.signals[f.signal]:
                    del self.signals[f.signal]
            for tpos, name in f.trigger_domains:
                self.triggers[name].remove((sp, tpos))
            for _, d in f.free_domains:
                self.strand_domains[d].discard(sp)

    def _status(self, inst: RuleInstance) -> int:
        """1 applicable, 0 not now, -1 never again."""
        need = Counter(inst.consumed)
        for sp in inst.catalysts:
            if sp not in self.counts:
                return 0
        for sp, k in need.items():
            if self.counts.get(sp, 0) < k:
                return 0
        if all(self.counts[sp] == INF for sp in inst.consumed):
            if all(self.counts.get(p, 0) == INF for p in inst.products):
                return -1
        return 1

    def applicable(self) -> List[RuleInstance]:
        live = []
        dead = []
        for inst in self.instances:
            st = self._status(inst)
            if st == 1:
                live.append(inst)
            else:
                dead.append(inst)
        # stale instances are regenerated when their reactants come back
        self.instances.difference_update(dead)
        live.sort(key=lambda r: r.key)
        return live

    def apply(self, inst: RuleInstance) -> None:
        saturate = all(self.counts[sp] == INF for sp in inst.consumed)
        for sp in inst.consumed:
            cur = self.counts[sp]
            if cur == INF:
                continue
            if cur == 1:
                del self.counts[sp]
                self._depart(sp)
            else:
                self.counts[sp] = cur - 1
        for p in inst.products:
            if saturate:
                cur = self.counts.get(p, 0)
                self.counts[p] = INF
                if cur == 0:
                    self._arrive(p)
            else:
                self._put(p, 1)


# ---------------------------------------------------------------------------
# public operations


def enumerate_rules(soup: Soup) -> List[RuleInstance]:
    """Every instance that would change the soup, highest priority first.

    Priority is ascending joint apartness, then rule tag, then the canonical
    text of reactants and products.
    """
    return _Agenda(soup).applicable()


def rule_hybridize(soup: Soup) -> List[RuleInstance]:
    return [r for r in enumerate_rules(soup) if r.tag == HYBRIDIZE]


def rule_amplify(soup: Soup) -> List[RuleInstance]:
    return [r for r in enumerate_rules(soup) if r.tag == AMPLIFY]


def rule_block(soup: Soup) -> List[RuleInstance]:
    return [r for r in enumerate_rules(soup) if r.tag == BLOCK]


def rule_unblock(soup: Soup) -> List[RuleInstance]:
    return [r for r in enumerate_rules(soup) if r.tag == UNBLOCK]


def rule_unblock_two_region(soup: Soup) -> List[RuleInstance]:
    return [r for r in enumerate_rules(soup) if r.tag == UNBLOCK_AND2]


def rule_displace_protector(soup: Soup) -> List[RuleInstance]:
    return [r for r in enumerate_rules(soup) if r.tag == DISPLACE]


def apply_instance(soup: Soup, inst: RuleInstance) -> Soup:
    ag = _Agenda(soup)
    if ag._status(inst) != 1:
        raise ValueError(f"instance not applicable: {inst.render()}")
    ag.apply(inst)
    return ag.soup()


def step(soup: Soup) -> Tuple[Soup, Optional[RuleInstance]]:
    """Apply the highest-priority instance; ``(soup, None)`` at a fixpoint."""
    ag = _Agenda(soup)
    live = ag.applicable()
    if not live:
        return soup, None
    ag.apply(live[0])
    return ag.soup(), live[0]


@dataclass
class FixpointResult:
    signals: FrozenSet[str]
    soup: Soup
    trace: List[RuleInstance]
    steps: int
    reason: str                                  # "fixpoint" or "step-limit"
    signal_history: List[FrozenSet[str]]         # before the first step, then after each

    def trace_lines(self) -> List[str]:
        return [inst.render(k) for k, inst in enumerate(self.trace, start=1)]


def run_to_fixpoint(soup: Soup, step_limit: int = DEFAULT_STEP_LIMIT,
                    seed: Optional[int] = None) -> FixpointResult:
    """Rewrite until nothing applies or ``step_limit`` steps were taken.

    With ``seed=None`` the best-ranked instance is always taken. With a seed
    the scheduler picks uniformly among the instances sharing the lowest
    joint apartness, so the priority rule is still honoured.
    """
    if step_limit < 1:
        raise ValueError("step_limit must be at least 1")
    rng = random.Random(seed) if seed is not None else None
    ag = _Agenda(soup)
    trace: List[RuleInstance] = []
    history = [ag.signal_set()]
    reason = "fixpoint"
    while True:
        live = ag.applicable()
        if not live:
            break
        if len(trace) >= step_limit:
            reason = "step-limit"
            break
        if rng is None:
            chosen = live[0]
        else:
            best = live[0].apartness
            chosen = rng.choice([r for r in live if r.apartness == best])
        ag.apply(chosen)
        trace.append(chosen)
        history.append(ag.signal_set())
    return FixpointResult(ag.signal_set(), ag.soup(), trace, len(trace), reason, history)
