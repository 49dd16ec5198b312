"""Reference bound computations: modular, weighted-coverage and polymatroid.

The polymatroid primal P (one variable h(X) per subset, submodularity rows
for incomparable pairs, monotonicity rows for proper-subset pairs, one row
per difference constraint) and its hypergraph-flow dual D act as exact
ground-truth oracles for the specialized solvers.  Both can be materialized
verbatim for small universes; the bound itself is computed by lazy row
generation over an equivalent complete subfamily (single-element monotonicity
covers plus exchange submodularity), so the certified optimum is available
well beyond the sizes at which the verbatim LP is practical to solve densely.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .core import (
    AttrSet,
    CapExceededError,
    DcboundError,
    Instance,
    full_mask,
    incomparable,
    lex_key,
    members_of,
    set_str,
    unbounded_attrs,
)
from .lp import LinearProgram, solve
from .ratio import Rat, RAT0, RAT1, pow2_decimal
from .rowgen import solve_lazy
from .serialize import sigma_key

ORACLE_CAP_DEFAULT = 12
_ENV_CAP = "DCBOUND_ORACLE_CAP"


def oracle_cap(cap: int | None = None) -> int:
    if cap is not None:
        return cap
    env = os.environ.get(_ENV_CAP)
    return int(env) if env else ORACLE_CAP_DEFAULT


def _require_cap(inst: Instance, cap: int | None, what: str) -> None:
    limit = oracle_cap(cap)
    if inst.n > limit:
        raise CapExceededError(
            f"{what}: universe size {inst.n} exceeds the oracle cap {limit}; "
            "use the simple/scc solvers or raise the cap"
        )


@dataclass(frozen=True)
class BoundResult:
    """Outcome of a bound computation.

    witness payloads by method: polymatroid -> {mask: Rat} table;
    coverage -> sparse {mask: Rat}; modular -> {attr: Rat};
    simple -> {index0: Rat} deltas; scc -> SemimodularWitness.
    """

    status: str  # 'bounded' | 'unbounded'
    value: object = None
    witness: object = None
    unbounded_attrs: AttrSet | None = None

    @property
    def bounded(self) -> bool:
        return self.status == "bounded"


def _hname(mask: int) -> str:
    return f"h{set_str(mask)}"


def _hmask(name: str) -> int:
    body = name[2:-1]
    if not body:
        return 0
    m = 0
    for part in body.split(","):
        m |= 1 << (int(part) - 1)
    return m


def _delta_name(i: int) -> str:
    return f"delta{i + 1}"


# ---------------------------------------------------------------------------
# verbatim oracle LPs


def build_lp_P(inst: Instance, cap: int | None = None) -> LinearProgram:
    """The polymatroid primal, verbatim: exponentially many rows/variables."""
    _require_cap(inst, cap, "build_lp_P")
    n = inst.n
    full = full_mask(n)
    lp = LinearProgram("max")
    for mask in range(full + 1):
        lp.add_variable(_hname(mask))
    lp.set_objective_coeff(_hname(full), RAT1)
    if full:
        lp.set_objective_coeff(_hname(0), -RAT1)
    for x in range(full + 1):
        for y in range(x + 1, full + 1):
            if incomparable(x, y):
                a, b = sigma_key(x, y)
                lp.add_constraint(
                    f"sub:{set_str(a)}|{set_str(b)}",
                    {
                        _hname(x | y): RAT1,
                        _hname(x & y): RAT1,
                        _hname(x): -RAT1,
                        _hname(y): -RAT1,
                    },
                    "<=",
                    RAT0,
                )
    for y in range(1, full + 1):
        sub = (y - 1) & y
        while True:
            lp.add_constraint(
                f"mono:{set_str(sub)}<{set_str(y)}",
                {_hname(y): RAT1, _hname(sub): -RAT1},
                ">=",
                RAT0,
            )
            if sub == 0:
                break
            sub = (sub - 1) & y
    for i, c in enumerate(inst.constraints):
        lp.add_constraint(
            f"dc{i + 1}",
            {_hname(c.y.mask): RAT1, _hname(c.x.mask): -RAT1},
            "<=",
            c.cost,
        )
    return lp


def build_lp_D(inst: Instance, cap: int | None = None) -> LinearProgram:
    """The hypergraph-flow dual, verbatim: one excess row per lattice point.

    Variables: delta_i per constraint, sigma_{X,Y} per unordered incomparable
    pair, mu_{X,Y} per proper-subset pair (the uncapacitated edge Y -> X).
    Rows: excess([n]) >= 1, excess({}) >= -1, excess(Z) >= 0 otherwise.
    """
    _require_cap(inst, cap, "build_lp_D")
    n = inst.n
    full = full_mask(n)
    lp = LinearProgram("min")
    rows = {z: {} for z in range(full + 1)}

    def _scatter(z, var, coeff):
        d = rows[z]
        d[var] = d.get(var, RAT0) + coeff

    for i, c in enumerate(inst.constraints):
        name = _delta_name(i)
        lp.add_variable(name)
        lp.set_objective_coeff(name, c.cost)
        _scatter(c.y.mask, name, RAT1)
        _scatter(c.x.mask, name, -RAT1)
    for x in range(full + 1):
        for y in range(x + 1, full + 1):
            if incomparable(x, y):
                a, b = sigma_key(x, y)
                name = f"sigma{set_str(a)}|{set_str(b)}"
                lp.add_variable(name)
                _scatter(x & y, name, RAT1)
                _scatter(x | y, name, RAT1)
                _scatter(x, name, -RAT1)
                _scatter(y, name, -RAT1)
    for y in range(1, full + 1):
        x = (y - 1) & y
        while True:
            name = f"mu{set_str(y)}->{set_str(x)}"
            lp.add_variable(name)
            _scatter(x, name, RAT1)
            _scatter(y, name, -RAT1)
            if x == 0:
                break
            x = (x - 1) & y
    for z in range(full + 1):
        rhs = RAT1 if z == full else (-RAT1 if z == 0 else RAT0)
        lp.add_constraint(f"exc:{set_str(z)}", rows[z], ">=", rhs)
    return lp


# ---------------------------------------------------------------------------
# polymatroid bound via lazy row generation


_LATTICE_LIMIT = 1500


def union_intersection_closure(gens, limit: int = _LATTICE_LIMIT):
    """Close a set of masks under union and intersection.

    Returns the sorted closure, or None once it exceeds ``limit``.  The
    polymatroid LP restricted to this sublattice has the same optimum as the
    full LP: restriction preserves feasibility one way, and the extension
    h(Z) = min{ g(W) : W in L, W >= Z } is monotone, submodular, normalized,
    and agrees with g on L, which settles the other.
    """
    items = sorted(set(gens))
    seen = set(items)
    i = 0
    while i < len(items):
        a = items[i]
        for j in range(i):
            b = items[j]
            for c in (a | b, a & b):
                if c not in seen:
                    if len(seen) >= limit:
                        return None
                    seen.add(c)
                    items.append(c)
        i += 1
    return sorted(seen)


def _min_extension(lattice, g, full) -> dict:
    """h(Z) = min over lattice supersets of Z of g; full table over 2^n."""
    table = {}
    vals = [(w, g.get(w, RAT0)) for w in lattice]
    for z in range(full + 1):
        best = None
        for w, gw in vals:
            if w & z == z and (best is None or gw < best):
                best = gw
        table[z] = best
    return table


def polymatroid_bound(inst: Instance, cap: int | None = None) -> BoundResult:
    """Exact optimum of P with a normalized polymatroid witness table.

    Unboundedness is decided up front by the derivation closure: the bound is
    finite iff every attribute is derivable from the empty set, and the
    uncovered attributes name an explicit growable direction.  The LP itself
    is solved by lazy row generation restricted to the union/intersection
    closure of the constraint sets (which leaves the optimum unchanged), and
    the witness is extended back to the full lattice.
    """
    _require_cap(inst, cap, "polymatroid_bound")
    free = unbounded_attrs(inst)
    if free.mask:
        return BoundResult("unbounded", unbounded_attrs=free)
    n = inst.n
    full = full_mask(n)
    gens = {0, full}
    for c in inst.constraints:
        gens.add(c.x.mask)
        gens.add(c.y.mask)
    lattice = union_intersection_closure(gens)
    res = _solve_polymatroid_lattice(inst, full, lattice)
    if res.status != "optimal":  # pragma: no cover - excluded by closure check
        raise DcboundError("internal: master unbounded although closure covers the universe")
    g = {_hmask(name): val for name, val in res.point.items()}
    base = g.get(0, RAT0)
    if base != RAT0:
        g = {m: v - base for m, v in g.items()}
    if lattice is not None:
        table = _min_extension(lattice, g, full)
    else:
        table = {mask: g.get(mask, RAT0) for mask in range(full + 1)}
    return BoundResult("bounded", res.value, table)


def _solve_polymatroid_lattice(inst: Instance, full: int, lattice):
    """Row generation for P over a sublattice (or the full one if None)."""
    objective = {_hname(full): RAT1}
    if full:
        objective[_hname(0)] = -RAT1
    seed = [
        (f"dc{i + 1}", {_hname(c.y.mask): RAT1, _hname(c.x.mask): -RAT1}, c.cost)
        for i, c in enumerate(inst.constraints)
    ]
    n = inst.n
    bit_list = [1 << b for b in range(n)]

    def mono_cut(x, y):
        return (
            f"mono:{set_str(x)}<{set_str(y)}",
            {_hname(x): RAT1, _hname(y): -RAT1},
            RAT0,
        )

    def sub_cut(a, b):
        u, v = sigma_key(a, b)
        return (
            f"sub:{set_str(u)}|{set_str(v)}",
            {
                _hname(a | b): RAT1,
                _hname(a & b): RAT1,
                _hname(a): -RAT1,
                _hname(b): -RAT1,
            },
            RAT0,
        )

    def separate(assign, is_ray):
        h = {_hmask(name): val for name, val in assign.items()}
        get = h.get
        positives = [m for m, v in h.items() if v > RAT0]
        cuts = []
        if lattice is not None:
            for x in positives:
                hx = h[x]
                worst, worst_hy = None, None
                for y in lattice:
                    if y != x and y & x == x:
                        hy = get(y, RAT0)
                        if hy < hx and (worst is None or hy < worst_hy):
                            worst, worst_hy = y, hy
                if worst is not None:
                    cuts.append((hx - worst_hy, mono_cut(x, worst)))
            nl = len(lattice)
            for ia in range(nl):
                a = lattice[ia]
                ha = get(a, RAT0)
                for ib in range(ia + 1, nl):
                    b = lattice[ib]
                    if a & ~b and b & ~a:
                        gap = get(a | b, RAT0) + get(a & b, RAT0) - ha - get(b, RAT0)
                        if gap > RAT0:
                            cuts.append((gap, sub_cut(a, b)))
        else:
            # full-lattice fallback: superset scan + exchange family
            for x in positives:
                hx = h[x]
                rest = full & ~x
                worst, worst_hy = None, None
                sup = rest
                while True:
                    y = x | sup
                    if y != x:
                        hy = get(y, RAT0)
                        if hy < hx and (worst is None or hy < worst_hy):
                            worst, worst_hy = y, hy
                    if sup == 0:
                        break
                    sup = (sup - 1) & rest
                if worst is not None:
                    cuts.append((hx - worst_hy, mono_cut(x, worst)))
            checked = set()
            quads = []
            for w in positives:
                bits = [b for b in bit_list if w & b]
                for ai in range(len(bits)):
                    for bi in range(ai + 1, len(bits)):
                        quads.append((w & ~bits[ai] & ~bits[bi], bits[ai], bits[bi]))
            for x in positives:
                rest = [b for b in bit_list if not x & b]
                for ai in range(len(rest)):
                    for bi in range(ai + 1, len(rest)):
                        quads.append((x, rest[ai], rest[bi]))
            for x, a, b in quads:
                key = (x, a | b)
                if key in checked:
                    continue
                checked.add(key)
                gap = get(x | a | b, RAT0) + get(x, RAT0) - get(x | a, RAT0) - get(x | b, RAT0)
                if gap > RAT0:
                    cuts.append((gap, sub_cut(x | a, x | b)))
        cuts.sort(key=lambda c: (-c[0], c[1][0]))
        return [c[1] for c in cuts]

    return solve_lazy(objective, seed, separate)


# ---------------------------------------------------------------------------
# coverage and modular bounds


def coverage_bound(inst: Instance, cap: int | None = None) -> BoundResult:
    """Optimum over weighted coverage functions (one weight per nonempty V)."""
    _require_cap(inst, cap, "coverage_bound")
    free = unbounded_attrs(inst)
    if free.mask:
        return BoundResult("unbounded", unbounded_attrs=free)
    full = inst.full
    lp = LinearProgram("max")
    names = {}
    for v in range(1, full + 1):
        name = f"lam{set_str(v)}"
        names[v] = name
        lp.add_variable(name)
        lp.set_objective_coeff(name, RAT1)
    for i, c in enumerate(inst.constraints):
        xm, ym = c.x.mask, c.y.mask
        row = {names[v]: RAT1 for v in range(1, full + 1) if not v & xm and v & ym}
        lp.add_constraint(f"dc{i + 1}", row, "<=", c.cost)
    sol = solve(lp)
    assert sol.status == "optimal"  # closure check rules out unbounded
    witness = {v: val for v in range(1, full + 1) if (val := sol.primal[names[v]]) != RAT0}
    return BoundResult("bounded", sol.value, witness)


def modular_bound(inst: Instance) -> BoundResult:
    """Optimum over modular functions: n nonnegative weights, k rows."""
    uncovered = inst.full
    for c in inst.constraints:
        uncovered &= ~(c.y.mask & ~c.x.mask)
    if uncovered:
        return BoundResult("unbounded", unbounded_attrs=AttrSet(uncovered))
    lp = LinearProgram("max")
    for a in range(1, inst.n + 1):
        lp.add_variable(f"z{a}")
        lp.set_objective_coeff(f"z{a}", RAT1)
    for i, c in enumerate(inst.constraints):
        row = {f"z{a}": RAT1 for a in members_of(c.y.mask & ~c.x.mask)}
        lp.add_constraint(f"dc{i + 1}", row, "<=", c.cost)
    sol = solve(lp)
    assert sol.status == "optimal"
    witness = {a: sol.primal[f"z{a}"] for a in range(1, inst.n + 1)}
    return BoundResult("bounded", sol.value, witness)


def to_cardinality(bound, digits: int = 3) -> str:
    """2**bound as a decimal display string (exact for integer bounds)."""
    return pow2_decimal(bound, digits)


# ---------------------------------------------------------------------------
# witness verification


def verify_polymatroid(h: dict, n: int, exhaustive: bool = True):
    """Check that h (mask -> value) is a polymatroid function on {1..n}.

    ``exhaustive`` scans every subset pair; otherwise the complete local
    family (single-element covers + exchange submodularity) is used, which
    implies the full family.  Returns None, or (kind, X, Y) for the first
    violated relation.
    """
    full = full_mask(n)
    get = h.get
    if get(0, RAT0) != RAT0:
        return ("normalized", 0, 0)
    for mask in range(full + 1):
        if get(mask, RAT0) < RAT0:
            return ("nonnegative", mask, mask)
    if exhaustive:
        for x in range(full + 1):
            hx = get(x, RAT0)
            for y in range(x + 1, full + 1):
                hy = get(y, RAT0)
                if x & ~y == 0:  # x subset of y
                    if hx > hy:
                        return ("monotone", x, y)
                elif y & ~x == 0:
                    if hy > hx:
                        return ("monotone", y, x)
                elif get(x | y, RAT0) + get(x & y, RAT0) > hx + hy:
                    return ("submodular", x, y)
        return None
    bits = [1 << b for b in range(n)]
    for x in range(full + 1):
        hx = get(x, RAT0)
        rest = [b for b in bits if not x & b]
        for ai, a in enumerate(rest):
            if get(x | a, RAT0) < hx:
                return ("monotone", x, x | a)
            for b in rest[ai + 1 :]:
                if get(x | a | b, RAT0) + hx > get(x | a, RAT0) + get(x | b, RAT0):
                    return ("submodular", x | a, x | b)
    return None


def check_h_witness(inst: Instance, h: dict, value=None, exhaustive: bool = True):
    """Validate a polymatroid witness against P; returns None or a reason."""
    bad = verify_polymatroid(h, inst.n, exhaustive)
    if bad:
        return f"not a polymatroid: {bad[0]} fails at {set_str(bad[1])},{set_str(bad[2])}"
    for i, c in enumerate(inst.constraints):
        if h.get(c.y.mask, RAT0) - h.get(c.x.mask, RAT0) > c.cost:
            return f"difference row dc{i + 1} violated"
    if value is not None and h.get(inst.full, RAT0) != Rat(value):
        return "witness value differs from reported bound"
    return None


def coverage_eval(lam: dict, smask: int):
    """g(S) = sum of weights of the V's meeting S."""
    return sum((w for v, w in lam.items() if v & smask), RAT0)


def check_coverage_witness(inst: Instance, lam: dict, value=None):
    if any(w < RAT0 for w in lam.values()):
        return "negative coverage weight"
    for i, c in enumerate(inst.constraints):
        if coverage_eval(lam, c.y.mask) - coverage_eval(lam, c.x.mask) > c.cost:
            return f"difference row dc{i + 1} violated"
    if value is not None and coverage_eval(lam, inst.full) != Rat(value):
        return "witness value differs from reported bound"
    return None


def check_modular_witness(inst: Instance, z: dict, value=None):
    if any(w < RAT0 for w in z.values()):
        return "negative modular weight"
    for i, c in enumerate(inst.constraints):
        tot = sum((z.get(a, RAT0) for a in members_of(c.y.mask & ~c.x.mask)), RAT0)
        if tot > c.cost:
            return f"difference row dc{i + 1} violated"
    if value is not None and sum((z.get(a, RAT0) for a in range(1, inst.n + 1)), RAT0) != Rat(value):
        return "witness value differs from reported bound"
    return None
