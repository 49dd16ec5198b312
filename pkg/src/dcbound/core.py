"""Instance model: attribute sets, difference constraints, parsing, SCC structure.

Attribute sets are bitmasks over a universe {1..n}, n <= 64.  Most internal
code works on raw int masks; AttrSet is the immutable value type carried by
the public data model.
"""

from __future__ import annotations

import heapq
import io
import re
from dataclasses import dataclass, field

from .ratio import Rat, RAT0, format_rational, parse_rational

MAX_UNIVERSE = 64


class DcboundError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(DcboundError):
    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        loc = ""
        if line is not None:
            loc = f"line {line}" + (f", col {col}" if col is not None else "")
            loc = f" ({loc})"
        super().__init__(f"{message}{loc}")


class ValidationError(DcboundError):
    pass


class CapExceededError(DcboundError):
    pass


class NotSimpleError(DcboundError):
    pass


class GenerationError(DcboundError):
    pass


class LiftError(DcboundError):
    pass


# ---------------------------------------------------------------------------
# mask helpers (attributes are 1-based; attribute a <-> bit 1 << (a-1))


def mask_of(members) -> int:
    m = 0
    for a in members:
        m |= 1 << (a - 1)
    return m


def members_of(mask: int) -> tuple[int, ...]:
    out = []
    a = 1
    while mask:
        if mask & 1:
            out.append(a)
        mask >>= 1
        a += 1
    return tuple(out)


def set_str(mask: int) -> str:
    return "{" + ",".join(str(a) for a in members_of(mask)) + "}"


def full_mask(n: int) -> int:
    return (1 << n) - 1


def is_subset(a: int, b: int) -> bool:
    return a & ~b == 0


def incomparable(a: int, b: int) -> bool:
    return (a & ~b != 0) and (b & ~a != 0)


def lex_key(mask: int) -> tuple[int, ...]:
    """Sort key realizing the 'lexicographically smaller set first' order."""
    return members_of(mask)


def submasks(mask: int):
    """All submasks of mask, descending mask order, including mask and 0."""
    s = mask
    while True:
        yield s
        if s == 0:
            return
        s = (s - 1) & mask


@dataclass(frozen=True, order=True)
class AttrSet:
    """Immutable attribute set over {1..64} with exact set operations."""

    mask: int = 0

    @staticmethod
    def of(*members: int) -> "AttrSet":
        return AttrSet(mask_of(members))

    def members(self) -> tuple[int, ...]:
        return members_of(self.mask)

    def __contains__(self, a: int) -> bool:
        return bool(self.mask >> (a - 1) & 1)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __or__(self, other: "AttrSet") -> "AttrSet":
        return AttrSet(self.mask | other.mask)

    def __and__(self, other: "AttrSet") -> "AttrSet":
        return AttrSet(self.mask & other.mask)

    def __sub__(self, other: "AttrSet") -> "AttrSet":
        return AttrSet(self.mask & ~other.mask)

    def issubset(self, other: "AttrSet") -> bool:
        return is_subset(self.mask, other.mask)

    def ispropersubset(self, other: "AttrSet") -> bool:
        return self.mask != other.mask and is_subset(self.mask, other.mask)

    def isincomparable(self, other: "AttrSet") -> bool:
        return incomparable(self.mask, other.mask)

    def __str__(self) -> str:
        return set_str(self.mask)

    def __repr__(self) -> str:
        return f"AttrSet({set_str(self.mask)})"


@dataclass(frozen=True)
class DifferenceConstraint:
    """h(y) - h(x) <= cost with x a proper subset of y; cost in bits, >= 0."""

    x: AttrSet
    y: AttrSet
    cost: object  # Rat

    def __str__(self) -> str:
        return f"dc {self.x} -> {self.y} : {format_rational(self.cost)}"


def dc(x_members, y_members, cost) -> DifferenceConstraint:
    """Convenience constructor from member iterables and any cost literal."""
    c = cost if not isinstance(cost, str) else parse_rational(cost)
    return DifferenceConstraint(AttrSet(mask_of(x_members)), AttrSet(mask_of(y_members)), Rat(c))


@dataclass(frozen=True)
class Instance:
    """A universe size plus an ordered list of difference constraints.

    Duplicates are retained: each index i carries its own dual variable.
    """

    n: int
    constraints: tuple[DifferenceConstraint, ...] = ()

    def __post_init__(self):
        if not (1 <= self.n <= MAX_UNIVERSE):
            raise ValidationError(f"universe size must be in 1..{MAX_UNIVERSE}, got {self.n}")
        full = full_mask(self.n)
        for idx, c in enumerate(self.constraints, start=1):
            if c.y.mask & ~full:
                bad = members_of(c.y.mask & ~full)
                raise ValidationError(f"constraint {idx}: attribute {bad[0]} out of range 1..{self.n}")
            if not (c.x.mask != c.y.mask and is_subset(c.x.mask, c.y.mask)):
                raise ValidationError(f"constraint {idx}: X must be a proper subset of Y")
            if c.cost < RAT0:
                raise ValidationError(f"constraint {idx}: negative cost {format_rational(c.cost)}")

    @property
    def k(self) -> int:
        return len(self.constraints)

    @property
    def full(self) -> int:
        return full_mask(self.n)

    def xm(self, i: int) -> int:
        return self.constraints[i].x.mask

    def ym(self, i: int) -> int:
        return self.constraints[i].y.mask

    def cost(self, i: int):
        return self.constraints[i].cost


def instance(n, triples) -> Instance:
    """Build an Instance from (x_members, y_members, cost) triples."""
    return Instance(n, tuple(dc(x, y, c) for x, y, c in triples))


# ---------------------------------------------------------------------------
# parsing / rendering

_SET_RE = re.compile(r"\{\s*((?:\d+\s*(?:,\s*\d+\s*)*)?)\}")
_DC_RE = re.compile(
    r"^dc\s*(?P<x>\{[^}]*\})\s*->\s*(?P<y>\{[^}]*\})\s*:\s*(?P<cost>\S+)\s*$"
)
_UNIVERSE_RE = re.compile(r"^universe\s+(?P<n>-?\d+)\s*$")


def _parse_set(text: str, lineno: int, col: int) -> int:
    m = _SET_RE.fullmatch(text.strip())
    if not m:
        raise ParseError(f"malformed set {text!r}", lineno, col)
    body = m.group(1).strip()
    if not body:
        return 0
    mask = 0
    for part in body.split(","):
        a = int(part)
        if a < 1:
            raise ParseError(f"attribute {a} out of range", lineno, col)
        mask |= 1 << (a - 1)
    return mask


def parse_instance(source) -> Instance:
    """Parse the line-oriented instance format.

    Blank lines and '#'-to-end-of-line comments are ignored.  The first
    significant line is ``universe <n>``; each following line is
    ``dc <set> -> <set> : <cost>``.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = source
    n = None
    constraints = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            m = _UNIVERSE_RE.match(line)
            if not m:
                raise ParseError("expected 'universe <n>'", lineno, raw.find(line) + 1)
            n = int(m.group("n"))
            if not (1 <= n <= MAX_UNIVERSE):
                raise ParseError(f"universe size must be in 1..{MAX_UNIVERSE}, got {n}", lineno)
            continue
        m = _DC_RE.match(line)
        if not m:
            raise ParseError("expected 'dc <set> -> <set> : <cost>'", lineno, raw.find(line) + 1)
        col = raw.find(line) + 1
        xm = _parse_set(m.group("x"), lineno, col + m.start("x"))
        ym = _parse_set(m.group("y"), lineno, col + m.start("y"))
        try:
            cost = parse_rational(m.group("cost"))
        except ValueError as exc:
            raise ParseError(str(exc), lineno, col + m.start("cost")) from None
        if cost < RAT0:
            raise ParseError(f"negative cost {m.group('cost')}", lineno, col + m.start("cost"))
        if n is not None and ym & ~full_mask(n):
            bad = members_of(ym & ~full_mask(n))[0]
            raise ParseError(f"attribute {bad} out of range 1..{n}", lineno, col)
        if xm == ym or xm & ~ym:
            raise ParseError("X must be a proper subset of Y", lineno, col)
        constraints.append(DifferenceConstraint(AttrSet(xm), AttrSet(ym), cost))
    if n is None:
        raise ParseError("missing 'universe <n>' line", 1, 1)
    return Instance(n, tuple(constraints))


def render_instance(inst: Instance) -> str:
    """Canonical renderer: ascending members, reduced fraction costs."""
    lines = [f"universe {inst.n}"]
    lines.extend(str(c) for c in inst.constraints)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# classification / dependency structure


@dataclass(frozen=True)
class InstanceClass:
    is_simple: bool
    is_acyclic: bool
    tags: tuple[frozenset, ...]  # per-constraint tags


@dataclass(frozen=True)
class DependencyDigraph:
    n: int
    edges: tuple[tuple[int, int], ...]  # sorted, deduplicated


@dataclass(frozen=True)
class SccDecomposition:
    components: tuple[AttrSet, ...]  # topological order of the condensation

    def component_of(self, attr: int) -> int:
        for j, comp in enumerate(self.components):
            if attr in comp:
                return j
        raise ValueError(f"attribute {attr} not covered")


def dependency_digraph(inst: Instance) -> DependencyDigraph:
    """Edges (u, v) with u in X_i and v in Y_i - X_i for some i."""
    edges = set()
    for c in inst.constraints:
        xs = members_of(c.x.mask)
        vs = members_of(c.y.mask & ~c.x.mask)
        for u in xs:
            for v in vs:
                edges.add((u, v))
    return DependencyDigraph(inst.n, tuple(sorted(edges)))


def classify(inst: Instance) -> InstanceClass:
    tags = []
    simple = True
    for c in inst.constraints:
        t = set()
        if len(c.x) <= 1:
            t.add("simple")
        else:
            t.add("general")
            simple = False
        if len(c.x) == 0:
            t.add("cardinality")
        if c.cost == RAT0:
            t.add("functional_dependency")
        tags.append(frozenset(t))
    acyclic = all(len(comp) == 1 for comp in scc_decompose(inst).components)
    return InstanceClass(is_simple=simple, is_acyclic=acyclic, tags=tuple(tags))


def scc_decompose(inst: Instance) -> SccDecomposition:
    """Strongly connected components of the dependency digraph.

    Output is a topological sort of the condensation; ties are broken by the
    smallest attribute contained in the component, so the result is unique.
    """
    n = inst.n
    adj = {u: set() for u in range(1, n + 1)}
    for u, v in dependency_digraph(inst).edges:
        adj[u].add(v)
    adj = {u: sorted(vs) for u, vs in adj.items()}

    # iterative Tarjan
    index = {}
    low = {}
    on_stack = set()
    stack = []
    comp_of = {}
    comps = []
    counter = 0
    for root in range(1, n + 1):
        if root in index:
            continue
        work = [(root, iter(adj[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(adj[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.remove(w)
                    comp_of[w] = len(comps)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(comp)

    # condensation + deterministic topological order (heap keyed by min attr)
    h = len(comps)
    succ = [set() for _ in range(h)]
    indeg = [0] * h
    for u, vs in adj.items():
        for v in vs:
            cu, cv = comp_of[u], comp_of[v]
            if cu != cv and cv not in succ[cu]:
                succ[cu].add(cv)
                indeg[cv] += 1
    keys = [min(comp) for comp in comps]
    heap = [(keys[j], j) for j in range(h) if indeg[j] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        _, j = heapq.heappop(heap)
        order.append(j)
        for t in succ[j]:
            indeg[t] -= 1
            if indeg[t] == 0:
                heapq.heappush(heap, (keys[t], t))
    assert len(order) == h
    return SccDecomposition(tuple(AttrSet(mask_of(comps[j])) for j in order))


def attribute_closure(inst: Instance) -> int:
    """Mask of attributes derivable from the empty set.

    Fixpoint of: if X_i is contained in the reached set, add all of Y_i.
    The polymatroid bound is finite iff the closure covers the universe
    (the complement yields an explicit unbounded coverage-function ray).
    """
    reached = 0
    changed = True
    while changed:
        changed = False
        for c in inst.constraints:
            if is_subset(c.x.mask, reached) and not is_subset(c.y.mask, reached):
                reached |= c.y.mask
                changed = True
    return reached


def unbounded_attrs(inst: Instance) -> AttrSet:
    """Attributes outside the closure; nonempty iff the bound is infinite."""
    return AttrSet(inst.full & ~attribute_closure(inst))
