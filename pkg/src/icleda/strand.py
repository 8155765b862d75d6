"""Domain-level words for strands, loop complexes and bound complexes.

Domains are atomic. Following the usual convention, a domain whose name
starts with a capital letter is *sensitive* (it can hybridize); any other
name is *neutral*. A primed domain is written with a ``*`` suffix.

Text forms (used in traces and netlist files)::

    ^ t A* F w          strand, head (3' end) on the left
    F u* R ^            strand, head on the right
    <F* u R*>           loop complex (circular template)
    [<F* u R*> | ^ t A* F w @0.0~2]
                        complex: component 1 pairs its domain 2 with
                        domain 0 of component 0

Positions are always indices in the written order of a component.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

LEFT, RIGHT = "left", "right"
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True, order=True)
class Domain:
    name: str
    primed: bool = False

    def __post_init__(self):
        if not _NAME.match(self.name):
            raise ValueError(f"bad domain name {self.name!r}")

    @property
    def sensitive(self) -> bool:
        return self.name[0].isupper()

    def complement(self) -> "Domain":
        return Domain(self.name, not self.primed)

    def __str__(self):
        return self.name + ("*" if self.primed else "")

    @classmethod
    def parse(cls, text: str) -> "Domain":
        if text.endswith("*"):
            return cls(text[:-1], True)
        return cls(text)


def complement(x):
    """Watson-Crick complement of a domain or a strand (an involution)."""
    return x.complement()


class _Species:
    """Shared identity: two species are equal iff their canonical text is."""

    text: str

    def __eq__(self, other):
        return isinstance(other, _Species) and self.text == other.text

    def __hash__(self):
        return hash(self.text)

    def __lt__(self, other):
        return self.text < other.text

    def __str__(self):
        return self.text

    def __repr__(self):
        return f"{type(self).__name__}({self.text!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Strand(_Species):
    domains: Tuple[Domain, ...]
    head: str = LEFT

    def __post_init__(self):
        if not self.domains:
            raise ValueError("a strand needs at least one domain")
        if self.head not in (LEFT, RIGHT):
            raise ValueError(f"head must be {LEFT!r} or {RIGHT!r}")
        body = " ".join(map(str, self.domains))
        object.__setattr__(self, "text", f"^ {body}" if self.head == LEFT else f"{body} ^")

    def domains_at(self, i: int) -> Domain:
        return self.domains[i]

    def reading_positions(self) -> List[int]:
        """Written-order indices, starting from the head."""
        n = len(self.domains)
        return list(range(n)) if self.head == LEFT else list(range(n - 1, -1, -1))

    def reading(self) -> Tuple[Domain, ...]:
        return tuple(self.domains[i] for i in self.reading_positions())

    def complement(self) -> "Strand":
        return Strand(tuple(d.complement() for d in reversed(self.domains)),
                      RIGHT if self.head == LEFT else LEFT)

    def leading(self) -> Optional[Domain]:
        """First sensitive domain from the head."""
        for d in self.reading():
            if d.sensitive:
                return d
        return None

    def signal(self) -> Optional[str]:
        """Name ``A`` when this strand realizes signal A, else None."""
        d = self.leading()
        return d.name if d is not None and not d.primed else None

    @classmethod
    def of(cls, text: str) -> "Strand":
        sp = parse_species(text)
        if not isinstance(sp, Strand):
            raise ValueError(f"not a strand: {text!r}")
        return sp


@dataclass(frozen=True, eq=False, repr=False)
class Loop(_Species):
    template: Tuple[Domain, ...]

    def __post_init__(self):
        if not any(d.sensitive for d in self.template):
            raise ValueError("a loop complex needs a sensitive domain")
        object.__setattr__(self, "text", "<" + " ".join(map(str, self.template)) + ">")

    def domains_at(self, i: int) -> Domain:
        return self.template[i]

    def output_position(self) -> int:
        """Position of the template for the emitted signal (last sensitive domain)."""
        return max(i for i, d in enumerate(self.template) if d.sensitive)

    def site_positions(self) -> List[int]:
        out = self.output_position()
        return [i for i, d in enumerate(self.template) if d.sensitive and d.primed and i != out]

    def output_signal(self) -> str:
        return self.template[self.output_position()].name

    def product(self) -> Strand:
        """Amplification product: complement of the template, head at the output end."""
        return Strand(tuple(d.complement() for d in self.template), RIGHT)


Component = Union[Strand, Loop]
# (component h, position i, component k, position j) with h < k
Pair = Tuple[int, int, int, int]


@dataclass(frozen=True, eq=False, repr=False)
class Complex(_Species):
    components: Tuple[Component, ...]
    pairs: Tuple[Pair, ...]

    def __post_init__(self):
        used = set()
        for h, i, k, j in self.pairs:
            if not h < k < len(self.components):
                raise ValueError(f"bad pair {(h, i, k, j)}")
            a, b = self.components[h].domains_at(i), self.components[k].domains_at(j)
            if not (a.sensitive and b == a.complement()):
                raise ValueError(f"{a} cannot pair with {b}")
            for site in ((h, i), (k, j)):
                if site in used:
                    raise ValueError(f"site {site} bound twice")
                used.add(site)
        parts = [self.components[0].text]
        for k in range(1, len(self.components)):
            bonds = ",".join(f"{h}.{i}~{j}" for h, i, kk, j in self.pairs if kk == k)
            parts.append(f"{self.components[k].text} @{bonds}")
        object.__setattr__(self, "text", "[" + " | ".join(parts) + "]")
        object.__setattr__(self, "occupied", frozenset(used))

    def loop_index(self) -> Optional[int]:
        for idx, c in enumerate(self.components):
            if isinstance(c, Loop):
                return idx
        return None

    def neighbours(self, idx: int) -> Dict[int, List[Tuple[int, int]]]:
        """Partner component -> list of (own position, partner position)."""
        out: Dict[int, List[Tuple[int, int]]] = {}
        for h, i, k, j in self.pairs:
            if h == idx:
                out.setdefault(k, []).append((i, j))
            elif k == idx:
                out.setdefault(h, []).append((j, i))
        return out

    def without(self, idx: int) -> "Species":
        keep = [c for n, c in enumerate(self.components) if n != idx]
        remap = {old: new for new, old in enumerate(n for n in range(len(self.components)) if n != idx)}
        pairs = [(remap[h], i, remap[k], j) for h, i, k, j in self.pairs if idx not in (h, k)]
        return make_complex(keep, pairs)


Species = Union[Strand, Loop, Complex]


def make_complex(components: Sequence[Component], pairs: Iterable[Tuple[int, int, int, int]]) -> Species:
    """Canonical complex from components and pairings (any index order).

    The root is the loop if there is one, otherwise the first component;
    the rest are ordered breadth-first by the position they attach to. A
    single unpaired component comes back as itself.
    """
    components = list(components)
    norm = []
    for h, i, k, j in pairs:
        norm.append((h, i, k, j) if h < k else (k, j, h, i))
    if len(components) == 1:
        if norm:
            raise ValueError("a component cannot pair with itself here")
        return components[0]
    root = next((n for n, c in enumerate(components) if isinstance(c, Loop)), 0)
    adj: Dict[int, List[Tuple[int, int]]] = {n: [] for n in range(len(components))}
    for h, i, k, j in norm:
        adj[h].append((i, k))
        adj[k].append((j, h))
    order = [root]
    seen = {root}
    queue = deque([root])
    while queue:
        cur = queue.popleft()
        nxt = sorted({(pos, components[o].text, o) for pos, o in adj[cur] if o not in seen})
        for _, _, o in nxt:
            if o not in seen:
                seen.add(o)
                order.append(o)
                queue.append(o)
    if len(order) != len(components):
        raise ValueError("complex components are not connected")
    new = {old: n for n, old in enumerate(order)}
    out = []
    for h, i, k, j in norm:
        a, b = (new[h], i), (new[k], j)
        if a[0] > b[0]:
            a, b = b, a
        out.append((a[0], a[1], b[0], b[1]))
    return Complex(tuple(components[o] for o in order), tuple(sorted(out, key=lambda p: (p[2], p[0], p[1], p[3]))))


# ---------------------------------------------------------------------------
# parsing


def _parse_component(text: str) -> Component:
    text = text.strip()
    if text.startswith("<"):
        if not text.endswith(">"):
            raise ValueError(f"unterminated loop: {text!r}")
        return Loop(tuple(Domain.parse(t) for t in text[1:-1].split()))
    toks = text.split()
    if not toks:
        raise ValueError("empty species")
    if toks[0] == "^" and toks[-1] != "^":
        return Strand(tuple(Domain.parse(t) for t in toks[1:]), LEFT)
    if toks[-1] == "^" and toks[0] != "^":
        return Strand(tuple(Domain.parse(t) for t in toks[:-1]), RIGHT)
    raise ValueError(f"strand needs exactly one head marker '^' at one end: {text!r}")


def parse_species(text: str) -> Species:
    """Inverse of the canonical rendering."""
    text = text.strip()
    if not text.startswith("["):
        return _parse_component(text)
    if not text.endswith("]"):
        raise ValueError(f"unterminated complex: {text!r}")
    parts = text[1:-1].split("|")
    comps = [_parse_component(parts[0])]
    pairs = []
    for k, part in enumerate(parts[1:], start=1):
        body, _, bonds = part.rpartition("@")
        if not body:
            raise ValueError(f"bound component without '@': {part!r}")
        comps.append(_parse_component(body))
        for bond in bonds.split(","):
            m = re.fullmatch(r"\s*(\d+)\.(\d+)~(\d+)\s*", bond)
            if not m:
                raise ValueError(f"bad binding {bond!r}")
            pairs.append((int(m.group(1)), int(m.group(2)), k, int(m.group(3))))
    return make_complex(comps, pairs)


# ---------------------------------------------------------------------------
# signals


def realize_signal(signal: str, flavor: str = "short", site: Optional[Domain] = None) -> Strand:
    """A strand whose first sensitive domain from the head is ``signal``.

    ``short`` gives ``A a_x ^``. ``extended`` also carries the complement of
    a loop site next to the signal domain, ``a_z F* A a_x ^``; the site
    defaults to ``F``.
    """
    a = Domain(signal)
    if not a.sensitive:
        raise ValueError(f"signal domain must be sensitive: {signal!r}")
    tail = Domain(f"{signal.lower()}_x")
    if flavor == "short":
        return Strand((a, tail), RIGHT)
    if flavor == "extended":
        f = site if site is not None else Domain("F")
        return Strand((Domain(f"{signal.lower()}_z"), Domain(f.name, True), a, tail), RIGHT)
    raise ValueError(f"unknown flavor {flavor!r}")


# ---------------------------------------------------------------------------
# hybridization and apartness


def components_of(sp: Species) -> Tuple[Component, ...]:
    return sp.components if isinstance(sp, Complex) else (sp,)


def occupied_of(sp: Species) -> FrozenSet[Tuple[int, int]]:
    return sp.occupied if isinstance(sp, Complex) else frozenset()


def _position_rank(comp: Component, pos: int) -> int:
    """Sensitive domains strictly between the head (or template start) and ``pos``."""
    if isinstance(comp, Loop):
        order = list(range(len(comp.template)))
        doms = comp.template
    else:
        order = comp.reading_positions()
        doms = comp.domains
    n = 0
    for i in order:
        if i == pos:
            return n
        if doms[i].sensitive:
            n += 1
    raise ValueError(f"position {pos} not in component")


def position_apartness(sp: Species, comp: int, pos: int) -> int:
    return _position_rank(components_of(sp)[comp], pos)


def _locate(x: Domain, sp: Species) -> List[Tuple[int, int]]:
    out = []
    for c, comp in enumerate(components_of(sp)):
        doms = comp.template if isinstance(comp, Loop) else comp.domains
        out.extend((c, i) for i, d in enumerate(doms) if d == x)
    return out


def apartness(x: Domain, m: Species) -> int:
    """Sensitive domains between the head of the strand holding ``x`` and ``x``.

    Within a complex each component is walked from its own head; a loop is
    walked from the start of its template. If ``x`` occurs several times the
    most exposed occurrence counts.
    """
    if not x.sensitive:
        raise ValueError(f"{x} is not a sensitive domain")
    where = _locate(x, m)
    if not where:
        raise ValueError(f"{x} does not occur in {m}")
    return min(position_apartness(m, c, i) for c, i in where)


def joint_apartness(x: Domain, m: Species, n: Species) -> int:
    return apartness(x, m) + apartness(x.complement(), n)


def free_sensitive(sp: Species) -> List[Tuple[int, int, Domain]]:
    occ = occupied_of(sp)
    out = []
    for c, comp in enumerate(components_of(sp)):
        doms = comp.template if isinstance(comp, Loop) else comp.domains
        out.extend((c, i, d) for i, d in enumerate(doms) if d.sensitive and (c, i) not in occ)
    return out


def hybridization_sites(m: Species, n: Species) -> List[Tuple[int, Tuple[int, int], Tuple[int, int]]]:
    """All free complementary pairs as (joint apartness, site in m, site in n), best first."""
    in_n: Dict[Domain, List[Tuple[int, int]]] = {}
    for c, i, d in free_sensitive(n):
        in_n.setdefault(d, []).append((c, i))
    out = []
    for c, i, d in free_sensitive(m):
        for cn, jn in in_n.get(d.complement(), ()):
            score = position_apartness(m, c, i) + position_apartness(n, cn, jn)
            out.append((score, (c, i), (cn, jn)))
    out.sort()
    return out


def can_hybridize(m: Species, n: Species) -> Optional[Tuple[Domain, Domain]]:
    """The (X, X') pair through which ``m`` and ``n`` can bind, or None.

    Only sensitive domains that are not already paired take part. When
    several pairs exist the most exposed one (lowest joint apartness) wins.
    """
    sites = hybridization_sites(m, n)
    if not sites:
        return None
    _, (c, i), _ = sites[0]
    comp = components_of(m)[c]
    d = comp.domains_at(i)
    return d, d.complement()
