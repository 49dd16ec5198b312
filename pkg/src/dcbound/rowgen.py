"""Lazy row generation with a warm-started incremental master.

Masters here are of the fixed shape  max c.x  s.t.  A x <= b,  x >= 0  with
b >= 0, so the all-slack basis is always primal feasible (no phase 1).  Rows
arrive in batches from an exact separator; each batch is priced into the
current basis and repaired with dual simplex pivots instead of re-solving
from scratch, which is what makes the exponential polymatroid LPs tractable
at oracle scale.

Because every returned row is violated by the current relaxation it is new,
the row family is finite, and the loop terminates with an assignment that is
feasible for the whole family and optimal for a relaxation of it -- hence
exactly optimal.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import DcboundError
from .ratio import Rat, RAT0, RAT1

_MAX_ROUNDS = 20_000
_MAX_PIVOTS = 2_000_000
_STALL_LIMIT = 400


@dataclass
class MasterResult:
    status: str  # 'optimal' | 'unbounded'
    value: object = None
    point: dict | None = None
    ray: dict | None = None
    rounds: int = 0


class IncrementalMaster:
    """max c.x, rows a.x <= rhs (rhs >= 0), x >= 0; supports warm row adds."""

    def __init__(self, objective: dict):
        self.objective = dict(objective)
        self.vcol: dict[str, int] = {}
        self.colvar: dict[int, str] = {}
        self.ncols = 0
        self.T: list[list] = []
        self.basis: list[int] = []
        self.zrow: list = [RAT0]
        self.row_names: set[str] = set()
        self.pivots = 0
        for v in objective:
            self._add_var(v)

    # -- construction -------------------------------------------------------

    def _add_col(self, reduced_cost) -> int:
        col = self.ncols
        self.ncols += 1
        for arr in self.T:
            arr.insert(-1, RAT0)
        self.zrow.insert(-1, reduced_cost)
        return col

    def _add_var(self, name: str) -> int:
        col = self._add_col(Rat(self.objective.get(name, RAT0)))
        self.vcol[name] = col
        self.colvar[col] = name
        return col

    def add_row(self, name: str, coeffs: dict, rhs) -> None:
        """Append a <= row, expressed in the current basis."""
        if name in self.row_names:
            raise DcboundError(f"duplicate master row {name!r}")
        self.row_names.add(name)
        for v in coeffs:
            if v not in self.vcol:
                self._add_var(v)
        arr = [RAT0] * (self.ncols + 1)
        for v, c in coeffs.items():
            arr[self.vcol[v]] = Rat(c)
        arr[-1] = Rat(rhs)
        row_of = {b: i for i, b in enumerate(self.basis)}
        for j in list(row_of):
            f = arr[j]
            if f:
                prow = self.T[row_of[j]]
                arr[:] = [a - f * b if b else a for a, b in zip(arr, prow)]
        slack = self._add_col(RAT0)
        arr.insert(-1, RAT1)
        self.T.append(arr)
        self.basis.append(slack)

    # -- pivoting ------------------------------------------------------------

    def _pivot(self, r: int, s: int) -> None:
        self.pivots += 1
        if self.pivots > _MAX_PIVOTS:  # pragma: no cover - safety net
            raise DcboundError("master pivot limit exceeded")
        T = self.T
        prow = T[r]
        piv = prow[s]
        if piv != RAT1:
            inv = RAT1 / piv
            T[r] = prow = [a * inv if a else a for a in prow]
        for i, arr in enumerate(T):
            if i != r:
                f = arr[s]
                if f:
                    T[i] = [a - f * b if b else a for a, b in zip(arr, prow)]
        f = self.zrow[s]
        if f:
            self.zrow[:] = [a - f * b if b else a for a, b in zip(self.zrow, prow)]
        self.basis[r] = s

    def _dual_step(self, bland: bool) -> bool:
        """One dual simplex pivot; returns False when rhs >= 0 everywhere."""
        T = self.T
        r = None
        worst = RAT0
        for i, arr in enumerate(T):
            v = arr[-1]
            if v < worst:
                r, worst = i, v
                if bland:  # first negative row suffices in anti-cycling mode
                    break
        if r is None:
            return False
        arr = T[r]
        s = None
        best = None
        zrow = self.zrow
        for j in range(self.ncols):
            a = arr[j]
            if a < RAT0:
                ratio = zrow[j] / a  # both <= 0: ratio >= 0
                if best is None or ratio < best or (ratio == best and j < s):
                    s, best = j, ratio
        if s is None:  # pragma: no cover - masters are always feasible here
            raise DcboundError("incremental master became infeasible")
        self._pivot(r, s)
        return True

    def _primal_step(self, bland: bool) -> str | None:
        obj = self.zrow
        s = None
        best = RAT0
        for j in range(self.ncols):
            v = obj[j]
            if v > RAT0:
                if bland:
                    s = j
                    break
                if v > best:
                    s, best = j, v
        if s is None:
            return "optimal"
        T = self.T
        r = None
        best_ratio = None
        for i, arr in enumerate(T):
            a = arr[s]
            if a > RAT0:
                ratio = arr[-1] / a
                if (
                    r is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and self.basis[i] < self.basis[r])
                ):
                    r, best_ratio = i, ratio
        if r is None:
            self._ray_col = s
            return "unbounded"
        self._pivot(r, s)
        return None

    def optimize(self) -> str:
        # restore primal feasibility after row additions, then re-optimize
        stall = 0
        bland = False
        while True:
            if not self._dual_step(bland):
                break
            stall += 1
            if stall >= _STALL_LIMIT:
                bland = True
        stall = 0
        bland = False
        last = self.zrow[-1]
        while True:
            outcome = self._primal_step(bland)
            if outcome:
                return outcome
            if self.zrow[-1] == last:
                stall += 1
                if stall >= _STALL_LIMIT:
                    bland = True
            else:
                stall, last = 0, self.zrow[-1]

    # -- extraction ----------------------------------------------------------

    def assignment(self) -> dict:
        out = {}
        for i, b in enumerate(self.basis):
            name = self.colvar.get(b)
            if name is not None:
                v = self.T[i][-1]
                if v != RAT0:
                    out[name] = v
        return out

    def value(self):
        return -self.zrow[-1]

    def ray(self) -> dict:
        s = self._ray_col
        d = {}
        name = self.colvar.get(s)
        if name is not None:
            d[name] = RAT1
        for i, arr in enumerate(self.T):
            if arr[s]:
                nm = self.colvar.get(self.basis[i])
                if nm is not None and -arr[s] != RAT0:
                    d[nm] = -arr[s]
        if any(v < RAT0 for v in d.values()):  # pragma: no cover
            raise DcboundError("internal: negative master ray component")
        return d


def solve_lazy(objective: dict, seed_rows, separate, batch: int = 48) -> MasterResult:
    """Maximize ``objective`` over a lazily separated family of <= rows.

    ``seed_rows``: iterable of (name, coeffs, rhs) in <= form with rhs >= 0.
    ``separate(assignment, is_ray)`` returns violated rows in the same form;
    an empty return certifies feasibility for the whole family.
    """
    master = IncrementalMaster(objective)
    for name, coeffs, rhs in seed_rows:
        master.add_row(name, coeffs, rhs)
    rounds = 0
    while True:
        rounds += 1
        if rounds > _MAX_ROUNDS:  # pragma: no cover - safety net
            raise DcboundError("row generation did not converge")
        status = master.optimize()
        if status == "optimal":
            point = master.assignment()
            cuts = separate(point, False)
            if not cuts:
                return MasterResult("optimal", master.value(), point, None, rounds)
        else:
            ray = master.ray()
            cuts = separate(ray, True)
            if not cuts:
                return MasterResult("unbounded", None, None, ray, rounds)
        added = 0
        for name, coeffs, rhs in cuts:
            if name in master.row_names:
                continue
            master.add_row(name, coeffs, rhs)
            added += 1
            if added >= batch:
                break
        if added == 0:  # pragma: no cover - separator must cut the incumbent
            raise DcboundError("row generation stalled: no new violated rows")
