"""Shared engine for block-decomposed polymatroid LPs.

Solves  max sum_j (h_j(B_j) - h_j({}))  over per-block polymatroid functions
h_j coupled only through the difference rows
sum_j (h_j(B_j & Y_i) - h_j(B_j & X_i)) <= c_i.  With a single block equal to
the universe this is the polymatroid primal P; with the strongly connected
components as blocks it is the semimodular program.

Each block is restricted to the union/intersection closure of its constraint
traces, which provably preserves the optimum (the minimal monotone extension
h_j(Z) = min{ g_j(W) : W in L_j, W >= Z } of a lattice-feasible g_j is a
polymatroid on the block agreeing with g_j on the lattice).  The LP is solved
by exact lazy row generation on a warm-started master; a floating-point
presolve of the full lattice family is used only to pick promising seed rows
(a pivot-order hint -- every returned number is recomputed exactly).
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import DcboundError, set_str
from .ratio import Rat, RAT0, RAT1
from .rowgen import solve_lazy

_LATTICE_LIMIT = 4096
_FLOAT_HINT_LIMIT = 600  # max lattice points per block for the float presolve


def union_intersection_closure(gens, limit: int = _LATTICE_LIMIT):
    """Close a set of masks under union and intersection (None if > limit)."""
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


def block_lattice(block: int, traces, limit: int = _LATTICE_LIMIT) -> list[int]:
    """Lattice for one block: closure of the constraint traces, or the whole
    powerset of the block when the closure grows past ``limit``."""
    gens = {0, block}
    gens.update(traces)
    closed = union_intersection_closure(gens, limit)
    if closed is not None:
        return closed
    out = []
    sub = block
    while True:
        out.append(sub)
        if sub == 0:
            break
        sub = (sub - 1) & block
    return sorted(out)


@dataclass
class BlockProblem:
    blocks: list  # disjoint masks
    lattices: list  # per block, sorted, containing 0 and the block mask
    constraints: list  # (xmask, ymask, cost) over the global universe


@dataclass
class BlockSolution:
    value: object
    tables: list  # per block: {lattice mask: Rat}, normalized at {}
    rounds: int


def _vname(j: int, mask: int) -> str:
    return f"h{j}|{set_str(mask)}"


def _vmask(name: str) -> tuple[int, int]:
    j, _, rest = name[1:].partition("|")
    body = rest[1:-1]
    m = 0
    if body:
        for part in body.split(","):
            m |= 1 << (int(part) - 1)
    return int(j), m


def solve_block_polymatroid(prob: BlockProblem, float_hint: bool = True) -> BlockSolution:
    """Exact optimum; caller must have ruled unboundedness out beforehand."""
    nb = len(prob.blocks)
    objective = {}
    for j, block in enumerate(prob.blocks):
        objective[_vname(j, block)] = RAT1
        if block:
            objective[_vname(j, 0)] = objective.get(_vname(j, 0), RAT0) - RAT1

    dc_rows = []
    for i, (xm, ym, cost) in enumerate(prob.constraints):
        coeffs = {}
        for j, block in enumerate(prob.blocks):
            yj, xj = block & ym, block & xm
            if yj != xj:
                coeffs[_vname(j, yj)] = coeffs.get(_vname(j, yj), RAT0) + RAT1
                coeffs[_vname(j, xj)] = coeffs.get(_vname(j, xj), RAT0) - RAT1
        coeffs = {v: c for v, c in coeffs.items() if c != RAT0}
        if coeffs:
            dc_rows.append((f"dc{i + 1}", coeffs, Rat(cost)))

    def mono_row(j, x, y):
        return (f"mono{j}:{set_str(x)}<{set_str(y)}", {_vname(j, x): RAT1, _vname(j, y): -RAT1}, RAT0)

    def sub_row(j, a, b):
        lo, hi = (a, b) if a < b else (b, a)
        return (
            f"sub{j}:{set_str(lo)}|{set_str(hi)}",
            {
                _vname(j, a | b): RAT1,
                _vname(j, a & b): RAT1,
                _vname(j, a): -RAT1,
                _vname(j, b): -RAT1,
            },
            RAT0,
        )

    seed = list(dc_rows)
    if float_hint:
        seed.extend(_float_seed(prob, mono_row, sub_row))

    def separate(assign, is_ray):
        hs = [dict() for _ in range(nb)]
        for name, val in assign.items():
            j, m = _vmask(name)
            hs[j][m] = val
        cuts = []
        for j in range(nb):
            h = hs[j]
            get = h.get
            lattice = prob.lattices[j]
            for x, hx in h.items():
                if hx <= RAT0:
                    continue
                worst, worst_hy = None, None
                for y in lattice:
                    if y != x and y & x == x:
                        hy = get(y, RAT0)
                        if hy < hx and (worst is None or hy < worst_hy):
                            worst, worst_hy = y, hy
                if worst is not None:
                    cuts.append((hx - worst_hy, mono_row(j, x, worst)))
            nl = len(lattice)
            for ia in range(nl):
                a = lattice[ia]
                ha = get(a, RAT0)
                for ib in range(ia + 1, nl):
                    b = lattice[ib]
                    if a & ~b and b & ~a:
                        gap = get(a | b, RAT0) + get(a & b, RAT0) - ha - get(b, RAT0)
                        if gap > RAT0:
                            cuts.append((gap, sub_row(j, a, b)))
        cuts.sort(key=lambda c: (-c[0], c[1][0]))
        return [c[1] for c in cuts]

    res = solve_lazy(objective, seed, separate)
    if res.status != "optimal":
        raise DcboundError("internal: block polymatroid master unbounded despite bounded instance")
    tables = [dict() for _ in range(nb)]
    for name, val in res.point.items():
        j, m = _vmask(name)
        tables[j][m] = val
    out = []
    for j, lattice in enumerate(prob.lattices):
        g = tables[j]
        base = g.get(0, RAT0)
        out.append({m: g.get(m, RAT0) - base for m in lattice})
    return BlockSolution(res.value, out, res.rounds)


def min_extension(lattice, g, block: int) -> dict:
    """h(Z) = min over lattice supersets of Z of g(W), for all Z <= block."""
    vals = [(w, g.get(w, RAT0)) for w in lattice]
    table = {}
    sub = block
    while True:
        best = None
        for w, gw in vals:
            if w & sub == sub and (best is None or gw < best):
                best = gw
        table[sub] = best
        if sub == 0:
            break
        sub = (sub - 1) & block
    return table


def _float_seed(prob: BlockProblem, mono_row, sub_row):
    """Floating-point presolve of the full lattice family; returns the rows
    with nonzero float duals as exact seed rows.  Purely a hint: failures or
    absence of scipy simply mean an empty seed."""
    if any(len(lat) > _FLOAT_HINT_LIMIT for lat in prob.lattices):
        return []
    try:
        import numpy as np
        from scipy import sparse
        from scipy.optimize import linprog
    except ImportError:  # pragma: no cover - scipy is a declared dependency
        return []

    col = {}
    for j, lattice in enumerate(prob.lattices):
        for m in lattice:
            col[(j, m)] = len(col)
    nvar = len(col)
    c = np.zeros(nvar)
    for j, block in enumerate(prob.blocks):
        c[col[(j, block)]] -= 1.0
        c[col[(j, 0)]] += 1.0  # minimize the negated objective

    data, rix, cix, rhs, meta = [], [], [], [], []

    def emit(entries, b, tag):
        r = len(rhs)
        for cidx, v in entries:
            rix.append(r)
            cix.append(cidx)
            data.append(v)
        rhs.append(b)
        meta.append(tag)

    for j, lattice in enumerate(prob.lattices):
        nl = len(lattice)
        for ia in range(nl):
            a = lattice[ia]
            for ib in range(ia + 1, nl):
                b = lattice[ib]
                if a & ~b:
                    if b & ~a:
                        emit(
                            [
                                (col[(j, a | b)], 1.0),
                                (col[(j, a & b)], 1.0),
                                (col[(j, a)], -1.0),
                                (col[(j, b)], -1.0),
                            ],
                            0.0,
                            ("s", j, a, b),
                        )
                    else:  # b < a
                        emit([(col[(j, b)], 1.0), (col[(j, a)], -1.0)], 0.0, ("m", j, b, a))
                elif b & ~a:  # a < b
                    emit([(col[(j, a)], 1.0), (col[(j, b)], -1.0)], 0.0, ("m", j, a, b))
    for i, (xm, ym, cost) in enumerate(prob.constraints):
        entries = {}
        for j, block in enumerate(prob.blocks):
            yj, xj = block & ym, block & xm
            if yj != xj:
                entries[col[(j, yj)]] = entries.get(col[(j, yj)], 0.0) + 1.0
                entries[col[(j, xj)]] = entries.get(col[(j, xj)], 0.0) - 1.0
        if entries:
            emit(list(entries.items()), float(cost), ("d", i))

    A = sparse.csr_matrix((data, (rix, cix)), shape=(len(rhs), nvar))
    try:
        res = linprog(c, A_ub=A, b_ub=np.array(rhs), bounds=(0, None), method="highs")
    except Exception:  # pragma: no cover - solver hiccup, hint is optional
        return []
    if not res.success:
        return []
    marg = res.ineqlin.marginals
    seed = []
    for r, tag in enumerate(meta):
        if abs(marg[r]) > 1e-9:
            if tag[0] == "m":
                seed.append(mono_row(tag[1], tag[2], tag[3]))
            elif tag[0] == "s":
                seed.append(sub_row(tag[1], tag[2], tag[3]))
    return seed
