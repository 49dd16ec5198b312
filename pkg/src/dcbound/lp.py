"""Exact rational linear programming.

A dense two-phase primal simplex over exact rationals.  Dantzig pricing with
a lexicographic ratio test, so termination is guaranteed on every rational
input (no cycling) and the pivot sequence is a pure function of the LP.
Optimal solutions are returned with primal and dual certificates and are
re-verified exactly (feasibility, complementary slackness, strong duality)
before being handed back; unbounded and infeasible outcomes carry an exactly
verified ray / Farkas vector.

All variables are implicitly nonnegative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import DcboundError, ValidationError
from .ratio import Rat, RAT0, RAT1

LE, GE, EQ = "<=", ">=", "=="
_RELS = (LE, GE, EQ)

_MAX_PIVOTS = 500_000


@dataclass(frozen=True)
class Row:
    name: str
    coeffs: dict
    rel: str
    rhs: object


class LinearProgram:
    """Sparse exact LP with named nonnegative variables."""

    def __init__(self, sense: str = "max"):
        if sense not in ("max", "min"):
            raise ValidationError(f"sense must be 'max' or 'min', got {sense!r}")
        self.sense = sense
        self.variables: list[str] = []
        self._vindex: dict[str, int] = {}
        self.objective: dict[str, object] = {}
        self.rows: list[Row] = []
        self._rnames: set[str] = set()

    def add_variable(self, name: str) -> None:
        if name in self._vindex:
            raise ValidationError(f"duplicate variable {name!r}")
        self._vindex[name] = len(self.variables)
        self.variables.append(name)

    def has_variable(self, name: str) -> bool:
        return name in self._vindex

    def set_objective_coeff(self, var: str, coeff) -> None:
        if var not in self._vindex:
            raise ValidationError(f"undeclared variable {var!r} in objective")
        c = Rat(coeff)
        if c == RAT0:
            self.objective.pop(var, None)
        else:
            self.objective[var] = c

    def add_constraint(self, name: str, coeffs: dict, rel: str, rhs) -> None:
        if rel not in _RELS:
            raise ValidationError(f"relation must be one of {_RELS}, got {rel!r}")
        if name in self._rnames:
            raise ValidationError(f"duplicate constraint name {name!r}")
        clean = {}
        for var, coeff in coeffs.items():
            if var not in self._vindex:
                raise ValidationError(f"undeclared variable {var!r} in constraint {name!r}")
            c = Rat(coeff)
            if c != RAT0:
                clean[var] = c
        self._rnames.add(name)
        self.rows.append(Row(name, clean, rel, Rat(rhs)))

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    @property
    def num_rows(self) -> int:
        return len(self.rows)


@dataclass
class LpSolution:
    status: str  # 'optimal' | 'unbounded' | 'infeasible'
    value: object = None
    primal: dict = field(default_factory=dict)
    dual: dict = field(default_factory=dict)
    ray: dict | None = None  # recession direction over variables (unbounded)
    farkas: dict | None = None  # row multipliers certifying infeasibility


@dataclass(frozen=True)
class CheckResult:
    feasible: bool
    constraint: str | None = None
    slack: object = None


def check_assignment(lp: LinearProgram, point: dict) -> CheckResult:
    """Exact feasibility verdict for a full variable assignment.

    Violated rows are reported in declaration order, then implicit
    nonnegativity in variable order; slack is the signed margin (negative
    when violated).
    """
    for var in lp.variables:
        if var not in point:
            raise ValidationError(f"missing variable in point: {var!r}")
    vals = {v: Rat(point[v]) for v in lp.variables}
    for row in lp.rows:
        lhs = sum((c * vals[v] for v, c in row.coeffs.items()), RAT0)
        if row.rel == LE:
            slack = row.rhs - lhs
        elif row.rel == GE:
            slack = lhs - row.rhs
        else:
            slack = -(abs(lhs - row.rhs))
        if slack < RAT0:
            return CheckResult(False, row.name, slack)
    for var in lp.variables:
        if vals[var] < RAT0:
            return CheckResult(False, f"nonneg:{var}", vals[var])
    return CheckResult(True)


# ---------------------------------------------------------------------------
# simplex core


class _Tableau:
    """Standard-form tableau: equations with slack/artificial columns."""

    def __init__(self, lp: LinearProgram):
        self.lp = lp
        n = lp.num_vars
        m = lp.num_rows
        vidx = lp._vindex

        # orient objective to maximization
        self.sign = 1 if lp.sense == "max" else -1
        self.c = [RAT0] * n
        for v, coeff in lp.objective.items():
            self.c[vidx[v]] = self.sign * coeff

        # per row: slack column id (or None), slack sign, artificial id, negated?
        self.slack_col = [None] * m
        self.slack_sign = [0] * m
        self.art_col = [None] * m
        self.negated = [False] * m

        ncols = n
        for i, row in enumerate(lp.rows):
            if row.rel != EQ:
                self.slack_col[i] = ncols
                self.slack_sign[i] = 1 if row.rel == LE else -1
                ncols += 1
        self.first_art = ncols
        for i, row in enumerate(lp.rows):
            neg = row.rhs < RAT0
            self.negated[i] = neg
            ssign = self.slack_sign[i] * (-1 if neg else 1)
            if ssign != 1:  # == rows and flipped-slack rows need an artificial
                self.art_col[i] = ncols
                ncols += 1
        self.ncols = ncols

        self.T = []
        self.basis = []
        for i, row in enumerate(lp.rows):
            arr = [RAT0] * (ncols + 1)
            f = -1 if self.negated[i] else 1
            for v, coeff in row.coeffs.items():
                arr[vidx[v]] = f * coeff
            if self.slack_col[i] is not None:
                arr[self.slack_col[i]] = Rat(f * self.slack_sign[i])
            if self.art_col[i] is not None:
                arr[self.art_col[i]] = RAT1
                self.basis.append(self.art_col[i])
            else:
                self.basis.append(self.slack_col[i])
            arr[ncols] = f * row.rhs
            self.T.append(arr)

        # phase-2 reduced-cost row (basis costs are all zero initially)
        self.zrow = list(self.c) + [RAT0] * (ncols - n) + [RAT0]
        self._lex_cols = list(self.basis)

    # -- pivoting ----------------------------------------------------------

    def _pivot(self, r: int, s: int, objrows) -> None:
        T = self.T
        prow = T[r]
        piv = prow[s]
        if piv != RAT1:
            inv = RAT1 / piv
            T[r] = prow = [a * inv if a else a for a in prow]
        for i, arr in enumerate(T):
            if i == r:
                continue
            f = arr[s]
            if f:
                T[i] = [a - f * b if b else a for a, b in zip(arr, prow)]
        for obj in objrows:
            f = obj[s]
            if f:
                obj[:] = [a - f * b if b else a for a, b in zip(obj, prow)]
        self.basis[r] = s

    def _entering(self, obj, limit: int) -> int | None:
        best = None
        best_val = RAT0
        for j in range(limit):
            v = obj[j]
            if v > RAT0 and (best is None or v > best_val):
                best, best_val = j, v
        return best

    def _leaving(self, s: int) -> int | None:
        """Minimum-ratio row; ties broken lexicographically.

        The lexicographic rule (compare candidate rows scaled by their pivot
        entry, column by column) guarantees termination without Bland's
        restriction on the entering rule, which matters on the massively
        degenerate polymatroid LPs solved here.
        """
        T = self.T
        cands: list[int] = []
        best_ratio = None
        for i, arr in enumerate(T):
            a = arr[s]
            if a > RAT0:
                ratio = arr[-1] / a
                if best_ratio is None or ratio < best_ratio:
                    best_ratio = ratio
                    cands = [i]
                elif ratio == best_ratio:
                    cands.append(i)
        if not cands:
            return None
        if len(cands) == 1:
            return cands[0]
        # tie-break over the initial-basis columns (identity at start, so the
        # scaled rows are lex-positive and pairwise distinct there)
        for j in self._lex_cols:
            if j == s:
                continue
            best_val = None
            keep = []
            for i in cands:
                v = T[i][j] / T[i][s]
                if best_val is None or v < best_val:
                    best_val = v
                    keep = [i]
                elif v == best_val:
                    keep.append(i)
            cands = keep
            if len(cands) == 1:
                return cands[0]
        return cands[0]  # pragma: no cover - B^-1 rows are always distinct

    def _optimize(self, obj, extra_obj, limit: int) -> str:
        """Pivot until obj has no positive reduced cost. Returns 'optimal'
        or 'unbounded' (entering column with no blocking row).

        Dantzig pricing; the lexicographic ratio test prevents cycling."""
        pivots = 0
        while True:
            s = self._entering(obj, limit)
            if s is None:
                return "optimal"
            r = self._leaving(s)
            if r is None:
                self._unbounded_col = s
                return "unbounded"
            self._pivot(r, s, (obj, *extra_obj))
            pivots += 1
            if pivots > _MAX_PIVOTS:  # pragma: no cover - safety net
                raise DcboundError("simplex pivot limit exceeded")


def solve(lp: LinearProgram, certify: bool = True) -> LpSolution:
    """Exact optimum with certificates, or a certified Unbounded/Infeasible."""
    tb = _Tableau(lp)
    n = lp.num_vars
    m = lp.num_rows

    # ---- phase 1 ----------------------------------------------------------
    has_art = any(c is not None for c in tb.art_col)
    if has_art:
        wrow = [RAT0] * (tb.ncols + 1)
        for i in range(m):
            if tb.art_col[i] is not None:
                arr = tb.T[i]
                for j in range(tb.ncols + 1):
                    if arr[j]:
                        wrow[j] += arr[j]
        for i in range(m):
            if tb.art_col[i] is not None:
                wrow[tb.art_col[i]] = RAT0
        # maximize -sum(artificials): reduced costs are +column sums
        status = tb._optimize(wrow, (tb.zrow,), tb.first_art)
        assert status == "optimal"  # phase 1 is always bounded
        if wrow[-1] > RAT0:  # residual artificial mass: infeasible
            return _extract_infeasible(lp, tb, wrow)
        _drive_out_artificials(tb)

    # ---- phase 2 ----------------------------------------------------------
    status = tb._optimize(tb.zrow, (), tb.first_art)
    if status == "unbounded":
        return _extract_unbounded(lp, tb)
    return _extract_optimal(lp, tb, certify)


def _drive_out_artificials(tb: _Tableau) -> None:
    """Pivot basic artificials (necessarily at value 0) out of the basis;
    rows that cannot be pivoted are redundant and are dropped."""
    keep = []
    for i in range(len(tb.T)):
        if tb.basis[i] < tb.first_art:
            keep.append(i)
            continue
        arr = tb.T[i]
        col = next((j for j in range(tb.first_art) if arr[j]), None)
        if col is None:
            continue  # 0 = 0 row
        tb._pivot(i, col, (tb.zrow,))
        keep.append(i)
    if len(keep) != len(tb.T):
        tb.T = [tb.T[i] for i in keep]
        tb.basis = [tb.basis[i] for i in keep]
        tb._kept_rows = keep
    else:
        tb._kept_rows = list(range(len(tb.T)))


def _row_duals(lp: LinearProgram, tb: _Tableau, obj, art_cost) -> list:
    """Equation duals (original row orientation) from a reduced-cost row."""
    kept = getattr(tb, "_kept_rows", list(range(len(lp.rows))))
    present = {orig: True for orig in kept}
    y = [RAT0] * len(lp.rows)
    for i in range(len(lp.rows)):
        if i not in present:
            continue  # redundant row dropped after phase 1: dual 0
        if tb.art_col[i] is not None:
            yi = art_cost - obj[tb.art_col[i]]
        else:
            ssign = tb.slack_sign[i] * (-1 if tb.negated[i] else 1)
            yi = -ssign * obj[tb.slack_col[i]]
        if tb.negated[i]:
            yi = -yi
        y[i] = yi
    return y


def _extract_infeasible(lp, tb, wrow) -> LpSolution:
    u = _row_duals(lp, tb, wrow, -RAT1)
    # verify the Farkas certificate exactly on the original rows
    agg = {}
    rhs_total = RAT0
    for i, row in enumerate(lp.rows):
        ui = u[i]
        if row.rel == LE and ui < RAT0:
            raise DcboundError("internal: Farkas sign violation on <= row")
        if row.rel == GE and ui > RAT0:
            raise DcboundError("internal: Farkas sign violation on >= row")
        if ui == RAT0:
            continue
        for v, c in row.coeffs.items():
            agg[v] = agg.get(v, RAT0) + ui * c
        rhs_total += ui * row.rhs
    if rhs_total >= RAT0 or any(val < RAT0 for val in agg.values()):
        raise DcboundError("internal: invalid Farkas certificate")
    farkas = {lp.rows[i].name: u[i] for i in range(len(lp.rows)) if u[i] != RAT0}
    return LpSolution(status="infeasible", farkas=farkas)


def _extract_unbounded(lp, tb) -> LpSolution:
    s = tb._unbounded_col
    d = [RAT0] * tb.ncols
    d[s] = RAT1
    for i, arr in enumerate(tb.T):
        if arr[s]:
            d[tb.basis[i]] = -arr[s]
    ray = {lp.variables[j]: d[j] for j in range(lp.num_vars) if d[j] != RAT0}
    # exact verification of the recession direction
    if any(val < RAT0 for val in d):
        raise DcboundError("internal: negative component in unbounded ray")
    obj_gain = sum((lp.objective.get(v, RAT0) * val for v, val in ray.items()), RAT0)
    if (lp.sense == "max" and obj_gain <= RAT0) or (lp.sense == "min" and obj_gain >= RAT0):
        raise DcboundError("internal: unbounded ray does not improve objective")
    for row in lp.rows:
        change = sum((c * ray.get(v, RAT0) for v, c in row.coeffs.items()), RAT0)
        ok = change <= RAT0 if row.rel == LE else change >= RAT0 if row.rel == GE else change == RAT0
        if not ok:
            raise DcboundError(f"internal: ray violates row {row.name}")
    return LpSolution(status="unbounded", ray=ray)


def _extract_optimal(lp, tb, certify) -> LpSolution:
    n = lp.num_vars
    x = [RAT0] * tb.ncols
    for i, b in enumerate(tb.basis):
        x[b] = tb.T[i][-1]
    primal = {lp.variables[j]: x[j] for j in range(n)}
    y = _row_duals(lp, tb, tb.zrow, RAT0)
    if lp.sense == "min":
        y = [-yi for yi in y]
    dual = {lp.rows[i].name: y[i] for i in range(len(lp.rows))}
    value = sum((lp.objective.get(v, RAT0) * primal[v] for v in lp.variables), RAT0)
    if certify:
        _certify_optimal(lp, primal, dual, value)
    return LpSolution(status="optimal", value=value, primal=primal, dual=dual)


def _certify_optimal(lp, primal, dual, value) -> None:
    chk = check_assignment(lp, primal)
    if not chk.feasible:
        raise DcboundError(f"internal: optimal point violates {chk.constraint}")
    # dual feasibility + complementary slackness + strong duality, exactly.
    # Textbook signs: max: y >= 0 on <=, y <= 0 on >=; min: mirrored.
    maxsense = lp.sense == "max"
    ybar = {}
    for row in lp.rows:
        yi = dual[row.name]
        if row.rel == LE and (yi < RAT0 if maxsense else yi > RAT0):
            raise DcboundError(f"internal: dual sign violation on {row.name}")
        if row.rel == GE and (yi > RAT0 if maxsense else yi < RAT0):
            raise DcboundError(f"internal: dual sign violation on {row.name}")
        lhs = sum((c * primal[v] for v, c in row.coeffs.items()), RAT0)
        if yi != RAT0 and lhs != row.rhs:
            raise DcboundError(f"internal: complementary slackness fails on {row.name}")
        if yi != RAT0:
            for v, c in row.coeffs.items():
                ybar[v] = ybar.get(v, RAT0) + yi * c
    for v in lp.variables:
        red = lp.objective.get(v, RAT0) - ybar.get(v, RAT0)
        bad = red > RAT0 if maxsense else red < RAT0
        if bad:
            raise DcboundError(f"internal: dual infeasible at column {v}")
        if red != RAT0 and primal[v] != RAT0:
            raise DcboundError(f"internal: complementary slackness fails at column {v}")
    ydotb = sum((dual[r.name] * r.rhs for r in lp.rows), RAT0)
    if ydotb != value:
        raise DcboundError("internal: strong duality mismatch")


# ---------------------------------------------------------------------------
# debug dump (stable, round-trippable)


def dump_lp(lp: LinearProgram) -> str:
    """Plain-text dump: sense, variables, objective, rows.

    Format (one item per line, names must not contain whitespace):
        lp <max|min>
        var <name>
        obj <name> <coeff>
        row <name> <rel> <rhs> : <var> <coeff> [<var> <coeff> ...]
    """
    out = [f"lp {lp.sense}"]
    out.extend(f"var {v}" for v in lp.variables)
    out.extend(f"obj {v} {lp.objective[v]}" for v in lp.variables if v in lp.objective)
    for row in lp.rows:
        body = " ".join(f"{v} {row.coeffs[v]}" for v in lp.variables if v in row.coeffs)
        out.append(f"row {row.name} {row.rel} {row.rhs} : {body}".rstrip())
    return "\n".join(out) + "\n"


def parse_lp_dump(text: str) -> LinearProgram:
    lp = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        kind, _, rest = line.partition(" ")
        if kind == "lp":
            lp = LinearProgram(rest.strip())
        elif kind == "var":
            lp.add_variable(rest.strip())
        elif kind == "obj":
            v, c = rest.split()
            lp.set_objective_coeff(v, Rat(c))
        elif kind == "row":
            head, _, body = rest.partition(" : ")
            name, rel, rhs = head.split()
            toks = body.split()
            coeffs = {toks[i]: Rat(toks[i + 1]) for i in range(0, len(toks), 2)}
            lp.add_constraint(name, coeffs, rel, Rat(rhs))
        else:
            raise ValidationError(f"bad lp dump line {lineno}: {raw!r}")
    if lp is None:
        raise ValidationError("empty lp dump")
    return lp
