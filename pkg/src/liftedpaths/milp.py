"""Binary-program backend: bounded-variable simplex plus branch-and-bound.

The LP core is a two-phase revised simplex over box-bounded variables
(structural variables live in [0, 1] unless a caller tightens them; slacks in
[0, inf)).  Pricing is Dantzig's rule, switching to Bland's rule after
3*(m+n) degenerate pivots so cycling cannot occur.  Infeasibility is reported
with the index of a constraint whose phase-1 artificial stays basic and
positive.

The integer layer is plain best-first branch-and-bound: nodes are ordered by
LP bound, branching picks the most fractional variable (ties: lowest column
index), and a node whose bound is within 1e-9 of the incumbent is pruned.
No cut generation happens here; callers add their own rows.  The only
presolve is dropping empty rows (after checking they are satisfiable).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp

#: Variable kinds, in canonical column order.
KIND_NODE = "node"
KIND_BASE = "base"
KIND_LIFT = "lift"

_SENSE_LE = 0
_SENSE_EQ = 1
_SENSE_GE = 2
_SENSES = {"<=": _SENSE_LE, "=": _SENSE_EQ, ">=": _SENSE_GE}

_AT_LOWER = 0
_AT_UPPER = 1
_BASIC = 2

_TOL_PRICE = 1e-9
_TOL_PIVOT = 1e-9
_TOL_FEAS = 1e-9
_INTEGRALITY_TOL = 1e-6
_GAP_TOL = 1e-9
_REFACTOR_EVERY = 256
#: Keep a dense mirror of the constraint matrix up to this many entries
#: (96 MB of float64); beyond that, stick to sparse column pulls.
_DENSE_MATRIX_LIMIT = 12_000_000
#: Tolerance for re-checking a rounded integral candidate against the rows.
#: Row data is integral, so a genuine violation is >= 1; this only needs to
#: absorb the <= 1e-6 per-variable rounding drift.
_ROUNDED_ROW_TOL = 1e-2


class MilpError(RuntimeError):
    """Numerical breakdown or malformed input to the backend."""


class _SingularBasis(MilpError):
    """Basis matrix went numerically singular; solve again from a cold crash."""


class VariableHandle(NamedTuple):
    """Identity of a decision variable: its kind and index in the instance."""

    kind: str
    index: int

    def label(self) -> str:
        return f"{self.kind}[{self.index}]"


@dataclass(frozen=True)
class LinearConstraint:
    """`sum(coef * var) sense rhs` with a family tag for bookkeeping."""

    terms: tuple[tuple[VariableHandle, float], ...]
    sense: str
    rhs: float
    tag: str

    def __post_init__(self):
        if self.sense not in _SENSES:
            raise MilpError(f"unknown sense {self.sense!r}")

    def canonicalized(self) -> "LinearConstraint":
        """Sort terms by handle, merge duplicates, drop zero coefficients."""
        acc: dict[VariableHandle, float] = {}
        for h, c in self.terms:
            acc[h] = acc.get(h, 0.0) + c
        terms = tuple(
            (h, acc[h])
            for h in sorted(acc, key=lambda h: (h.kind, h.index))
            if acc[h] != 0.0
        )
        return LinearConstraint(terms, self.sense, self.rhs, self.tag)

    def key(self) -> tuple:
        """Dedup key: content only, so equal rows from different families collide."""
        c = self.canonicalized()
        return (c.terms, c.sense, c.rhs)

    def format(self) -> str:
        lhs = " ".join(f"{c:+g}*{h.label()}" for h, c in self.terms) or "0"
        return f"{self.tag}: {lhs} {self.sense} {self.rhs:g}"


def check_violation(constraint: LinearConstraint, values) -> float:
    """How much `values` violates the constraint (0.0 if satisfied within 1e-9).

    `values` is any mapping from VariableHandle to float; a missing handle is
    an error, not a zero.
    """
    lhs = math.fsum(c * values[h] for h, c in constraint.terms)
    if constraint.sense == "<=":
        gap = lhs - constraint.rhs
    elif constraint.sense == ">=":
        gap = constraint.rhs - lhs
    else:
        gap = abs(lhs - constraint.rhs)
    return 0.0 if gap <= _TOL_FEAS else gap


@dataclass
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded" | "iteration_limit"
    objective: float | None
    values: np.ndarray | None  # aligned with the `variables` argument
    infeasible_constraint: int | None = None
    iterations: int = 0


@dataclass
class BinaryResult:
    status: str  # "optimal" | "infeasible" | "node_limit"
    objective: float | None
    values: np.ndarray | None  # 0/1 ints aligned with `variables`
    nodes_explored: int = 0
    bound: float | None = None  # best proven lower bound


# ---------------------------------------------------------------------------
# simplex core
# ---------------------------------------------------------------------------

_Row = tuple[dict[int, float], int, float]  # ({col: coef}, sense, rhs)


class _Simplex:
    """One LP: min c.x  s.t.  rows,  lo <= x <= up (all rows non-empty)."""

    def __init__(
        self,
        c: np.ndarray,
        rows: Sequence[_Row],
        lo: np.ndarray,
        up: np.ndarray,
        iteration_limit: int | None = None,
        start: np.ndarray | None = None,
    ):
        self.nstruct = len(c)
        m = len(rows)
        self.m = m
        b = np.array([rhs for _, _, rhs in rows], dtype=float)
        senses = np.array([sense for _, sense, _ in rows], dtype=np.int64)

        data: list[float] = []
        ridx: list[int] = []
        cidx: list[int] = []
        for i, (coefs, _, _) in enumerate(rows):
            for j, a in coefs.items():
                data.append(a)
                ridx.append(i)
                cidx.append(j)
        ncols = self.nstruct
        slack_of_row = np.full(m, -1, dtype=np.int64)
        for i in range(m):
            if senses[i] != _SENSE_EQ:
                slack_of_row[i] = ncols
                data.append(1.0 if senses[i] == _SENSE_LE else -1.0)
                ridx.append(i)
                cidx.append(ncols)
                ncols += 1
        nslack_end = ncols

        # Crash point: every structural sits on a bound.  With a start hint
        # (typically the vertex of a closely related LP) each coordinate snaps
        # to its nearer bound, which leaves few violated rows for phase 1 to
        # repair; otherwise start from the lower bounds.
        x0 = np.where(np.isfinite(lo), lo, 0.0)
        if start is not None:
            mid = np.where(
                np.isfinite(lo) & np.isfinite(up), (lo + up) / 2.0, np.inf
            )
            x0 = np.where(start >= mid, up, x0)
        resid = np.empty(m)
        for i, (coefs, _, rhs) in enumerate(rows):
            resid[i] = rhs - math.fsum(a * x0[j] for j, a in coefs.items())

        basis = np.empty(m, dtype=np.int64)
        binv_diag = np.ones(m)
        n_art = 0
        for i in range(m):
            r = resid[i]
            if senses[i] == _SENSE_LE and r >= 0:
                basis[i] = slack_of_row[i]
            elif senses[i] == _SENSE_GE and r <= 0:
                basis[i] = slack_of_row[i]
                binv_diag[i] = -1.0
            else:
                sign = 1.0 if r >= 0 else -1.0
                data.append(sign)
                ridx.append(i)
                cidx.append(ncols + n_art)
                basis[i] = ncols + n_art
                binv_diag[i] = sign
                n_art += 1
        self.art_start = nslack_end
        ncols += n_art

        self.lo = np.concatenate([lo, np.zeros(ncols - self.nstruct)])
        self.up = np.concatenate(
            [up, np.full(nslack_end - self.nstruct, np.inf), np.full(n_art, np.inf)]
        )
        self.A = sp.coo_matrix((data, (ridx, cidx)), shape=(m, ncols)).tocsc()
        self.At = sp.csr_matrix(self.A.T)
        # Dense mirror of A for small problems: per-iteration column pulls and
        # pricing dominate runtime there, and sparse indexing overhead swamps
        # the arithmetic.
        self.Ad = self.A.toarray() if m * ncols <= _DENSE_MATRIX_LIMIT else None
        self.b = b
        self.ncols = ncols
        self.basis = basis
        self.vstat = np.full(ncols, _AT_LOWER, dtype=np.int64)
        self.vstat[: self.nstruct][x0 == up] = _AT_UPPER
        self.vstat[basis] = _BASIC
        self.x = np.concatenate([x0, np.zeros(ncols - self.nstruct)])
        self.Binv = np.diag(binv_diag)
        self.xB = binv_diag * resid
        self.c_struct = c
        self.iterations = 0
        self.degenerate = 0
        self.bland = False
        self.bland_threshold = 3 * (m + self.nstruct)
        self.iteration_limit = (
            iteration_limit
            if iteration_limit is not None
            else 5000 + 60 * (m + ncols)
        )

    def _column(self, j: int) -> np.ndarray:
        if self.Ad is not None:
            return self.Ad[:, j]
        return self.A[:, [j]].toarray().ravel()

    def _reduced_costs(self, c: np.ndarray, pi: np.ndarray) -> np.ndarray:
        if self.Ad is not None:
            return c - pi @ self.Ad
        return c - self.At @ pi

    def _refactor(self) -> None:
        B = self.Ad[:, self.basis] if self.Ad is not None else self.A[:, self.basis].toarray()
        try:
            self.Binv = np.linalg.solve(B, np.eye(self.m))
        except np.linalg.LinAlgError as exc:
            raise _SingularBasis(f"singular basis during refactorization: {exc}") from None
        xfull = self.x.copy()
        xfull[self.basis] = 0.0
        self.xB = self.Binv @ (self.b - self.A @ xfull)

    def _phase(self, c: np.ndarray, phase1: bool) -> str:
        movable = (self.up - self.lo) > 0
        if phase1:
            movable = movable.copy()
            movable[self.art_start :] = False  # artificials never re-enter
        while True:
            if self.iterations >= self.iteration_limit:
                return "iteration_limit"
            self.iterations += 1
            if self.iterations % _REFACTOR_EVERY == 0:
                self._refactor()

            pi = c[self.basis] @ self.Binv
            d = self._reduced_costs(c, pi)
            eligible = movable & (
                ((self.vstat == _AT_LOWER) & (d < -_TOL_PRICE))
                | ((self.vstat == _AT_UPPER) & (d > _TOL_PRICE))
            )
            idx = np.flatnonzero(eligible)
            if idx.size == 0:
                return "optimal"
            if self.bland:
                j = int(idx[0])
            else:
                j = int(idx[np.argmax(np.abs(d[idx]))])
            s_dir = 1.0 if self.vstat[j] == _AT_LOWER else -1.0
            col = self.Binv @ self._column(j)
            delta = s_dir * col

            # Ratio test: how far can x_j move before a basic variable hits
            # a bound (or x_j flips to its own opposite bound)?
            with np.errstate(divide="ignore", invalid="ignore"):
                t_lo = np.where(
                    delta > _TOL_PIVOT,
                    (self.xB - self.lo[self.basis]) / delta,
                    np.inf,
                )
                t_up = np.where(
                    delta < -_TOL_PIVOT,
                    (self.up[self.basis] - self.xB) / (-delta),
                    np.inf,
                )
            t_rows = np.maximum(np.minimum(t_lo, t_up), 0.0)
            t_flip = self.up[j] - self.lo[j]
            t_min_rows = float(t_rows.min()) if self.m else np.inf

            if t_min_rows <= t_flip:
                ties = np.flatnonzero(t_rows <= t_min_rows + 1e-12)
                leave_row = int(ties[np.argmin(self.basis[ties])])
                t = t_min_rows
            else:
                leave_row = -1
                t = t_flip
            if not np.isfinite(t):
                return "unbounded"
            if t <= 1e-12:
                self.degenerate += 1
                if self.degenerate > self.bland_threshold:
                    self.bland = True

            self.xB -= t * delta
            if leave_row < 0:
                self.x[j] = self.up[j] if self.vstat[j] == _AT_LOWER else self.lo[j]
                self.vstat[j] = _AT_UPPER if self.vstat[j] == _AT_LOWER else _AT_LOWER
                continue
            old = self.basis[leave_row]
            leaves_at_lower = delta[leave_row] > 0
            self.x[old] = self.lo[old] if leaves_at_lower else self.up[old]
            self.vstat[old] = _AT_LOWER if leaves_at_lower else _AT_UPPER
            entering_val = self.x[j] + s_dir * t
            self.basis[leave_row] = j
            self.vstat[j] = _BASIC
            pivot = col[leave_row]
            if abs(pivot) <= _TOL_PIVOT:  # defensive; ratio test filters these
                self._refactor()
                continue
            row_r = self.Binv[leave_row, :] / pivot
            self.Binv -= np.outer(col, row_r)
            self.Binv[leave_row, :] = row_r
            self.xB[leave_row] = entering_val

    def solve(self) -> tuple[str, int | None]:
        """Run both phases; returns (status, infeasible_row_or_None)."""
        if self.ncols > self.art_start:
            c1 = np.zeros(self.ncols)
            c1[self.art_start :] = 1.0
            status = self._phase(c1, phase1=True)
            if status != "optimal":
                return status, None
            art_rows = [i for i in range(self.m) if self.basis[i] >= self.art_start]
            art_sum = float(sum(self.xB[i] for i in art_rows))
            tol = _TOL_FEAS * max(1.0, float(np.abs(self.b).sum()))
            if art_sum > tol:
                row = max(art_rows, key=lambda i: self.xB[i])
                return "infeasible", row
            self.up[self.art_start :] = 0.0  # freeze artificials for phase 2
        c2 = np.zeros(self.ncols)
        c2[: self.nstruct] = self.c_struct
        return self._phase(c2, phase1=False), None

    def structural_values(self) -> np.ndarray:
        xfull = self.x.copy()
        xfull[self.basis] = self.xB
        return np.clip(
            xfull[: self.nstruct], self.lo[: self.nstruct], self.up[: self.nstruct]
        )


# ---------------------------------------------------------------------------
# public LP interface
# ---------------------------------------------------------------------------


def _index_rows(
    variables: Sequence[VariableHandle],
    constraints: Sequence[LinearConstraint],
) -> list[_Row]:
    col = {h: i for i, h in enumerate(variables)}
    if len(col) != len(variables):
        raise MilpError("duplicate variable handles")
    rows: list[_Row] = []
    for con in constraints:
        coefs: dict[int, float] = {}
        for h, c in con.terms:
            if h not in col:
                raise MilpError(f"constraint references unknown handle {h.label()}")
            coefs[col[h]] = coefs.get(col[h], 0.0) + c
        rows.append((coefs, _SENSES[con.sense], con.rhs))
    return rows


def _bad_empty_row(rows: Sequence[_Row]) -> int | None:
    """Index of an unsatisfiable empty row, if any."""
    for i, (coefs, sense, rhs) in enumerate(rows):
        if coefs:
            continue
        ok = (
            (sense == _SENSE_LE and 0.0 <= rhs + _TOL_FEAS)
            or (sense == _SENSE_GE and 0.0 >= rhs - _TOL_FEAS)
            or (sense == _SENSE_EQ and abs(rhs) <= _TOL_FEAS)
        )
        if not ok:
            return i
    return None


def _solve_rows(
    objective: np.ndarray,
    rows: list[_Row],
    lo: np.ndarray,
    up: np.ndarray,
    iteration_limit: int | None = None,
    start: np.ndarray | None = None,
) -> LpResult:
    n = len(objective)
    bad = _bad_empty_row(rows)
    if bad is not None:
        return LpResult("infeasible", None, None, infeasible_constraint=bad)
    nonempty = [(i, r) for i, r in enumerate(rows) if r[0]]
    if not nonempty or n == 0:
        vals = np.where(objective < 0, up, lo) if n else np.zeros(0)
        return LpResult("optimal", float(objective @ vals) if n else 0.0, vals)
    simplex = _Simplex(
        objective, [r for _, r in nonempty], lo, up, iteration_limit, start
    )
    try:
        status, row = simplex.solve()
    except _SingularBasis:
        if start is None:
            raise
        # The warm crash point led pivoting into a numerically singular
        # basis; it is only a hint, so retry from the default cold crash.
        simplex = _Simplex(objective, [r for _, r in nonempty], lo, up, iteration_limit)
        status, row = simplex.solve()
    if status == "infeasible":
        orig = nonempty[row][0] if row is not None else None
        return LpResult("infeasible", None, None, orig, simplex.iterations)
    if status != "optimal":
        return LpResult(status, None, None, iterations=simplex.iterations)
    vals = simplex.structural_values()
    return LpResult(
        "optimal", float(objective @ vals), vals, iterations=simplex.iterations
    )


def _violated_rows(rows: Sequence[_Row], vals: np.ndarray, tol: float = _TOL_FEAS) -> list[int]:
    out = []
    for i, (coefs, sense, rhs) in enumerate(rows):
        lhs = math.fsum(a * vals[j] for j, a in coefs.items())
        if sense == _SENSE_LE and lhs > rhs + tol:
            out.append(i)
        elif sense == _SENSE_GE and lhs < rhs - tol:
            out.append(i)
        elif sense == _SENSE_EQ and abs(lhs - rhs) > tol:
            out.append(i)
    return out


#: Above this many rows, inequality rows are activated lazily on violation.
_LAZY_ROW_THRESHOLD = 400


def _solve_rows_lazy(
    objective: np.ndarray,
    rows: list[_Row],
    lo: np.ndarray,
    up: np.ndarray,
    iteration_limit: int | None = None,
    start: np.ndarray | None = None,
) -> LpResult:
    if len(rows) <= _LAZY_ROW_THRESHOLD:
        return _solve_rows(objective, rows, lo, up, iteration_limit, start)
    active = [i for i, r in enumerate(rows) if r[1] == _SENSE_EQ or not r[0]]
    active_set = set(active)
    for _ in range(len(rows) + 1):
        res = _solve_rows(
            objective, [rows[i] for i in active], lo, up, iteration_limit, start
        )
        if res.status != "optimal":
            if res.infeasible_constraint is not None:
                res.infeasible_constraint = active[res.infeasible_constraint]
            return res
        violated = [
            i for i in _violated_rows(rows, res.values) if i not in active_set
        ]
        if not violated:
            return res
        active.extend(violated)
        active_set.update(violated)
        start = res.values
    raise MilpError("lazy row activation failed to converge")


def solve_lp(
    variables: Sequence[VariableHandle],
    objective: Sequence[float],
    constraints: Sequence[LinearConstraint],
    *,
    lower: Sequence[float] | None = None,
    upper: Sequence[float] | None = None,
    iteration_limit: int | None = None,
) -> LpResult:
    """Minimize over the box [0,1]^n (or the given bounds) under `constraints`.

    The returned vertex satisfies every given constraint to within 1e-9
    (large sets are handled by activating inequality rows on violation, which
    does not change the optimum or vertex status of the result).
    """
    n = len(variables)
    c = np.asarray(list(objective), dtype=float)
    if c.shape != (n,):
        raise MilpError("objective length does not match variables")
    lo = np.zeros(n) if lower is None else np.asarray(list(lower), dtype=float)
    up = np.ones(n) if upper is None else np.asarray(list(upper), dtype=float)
    if np.any(lo > up + 1e-12):
        return LpResult("infeasible", None, None)
    rows = _index_rows(variables, constraints)
    return _solve_rows_lazy(c, rows, lo, up, iteration_limit)


# ---------------------------------------------------------------------------
# branch and bound
# ---------------------------------------------------------------------------


def solve_binary(
    variables: Sequence[VariableHandle],
    objective: Sequence[float],
    constraints: Sequence[LinearConstraint],
    *,
    node_limit: int | None = None,
    warm_start: Sequence[float] | None = None,
) -> BinaryResult:
    """Minimize over {0,1}^n subject to `constraints` (exact, best-first).

    `warm_start` seeds the root LP's crash point (a hint, not a bound); any
    vector of per-variable values in [0, 1] is accepted.
    """
    n = len(variables)
    c = np.asarray(list(objective), dtype=float)
    rows = _index_rows(variables, constraints)
    root_start = (
        None if warm_start is None else np.asarray(list(warm_start), dtype=float)
    )

    inc_obj = math.inf
    inc_vals: np.ndarray | None = None
    nodes = 0
    counter = 0
    heap: list[tuple[float, int, np.ndarray, np.ndarray, np.ndarray]] = []
    hit_node_limit = False

    def push(lo: np.ndarray, up: np.ndarray, start: np.ndarray | None = None) -> None:
        nonlocal nodes, counter, hit_node_limit
        if node_limit is not None and nodes >= node_limit:
            hit_node_limit = True
            return
        nodes += 1
        res = _solve_rows_lazy(c, rows, lo, up, start=start)
        if res.status == "infeasible":
            return
        if res.status != "optimal":
            raise MilpError(f"LP subproblem ended with status {res.status}")
        if res.objective >= inc_obj - _GAP_TOL:
            return
        counter += 1
        heapq.heappush(heap, (res.objective, counter, res.values, lo, up))

    push(np.zeros(n), np.ones(n), start=root_start)
    while heap and not hit_node_limit:
        bound, _, vals, lo, up = heapq.heappop(heap)
        if bound >= inc_obj - _GAP_TOL:
            break
        frac = np.abs(vals - np.round(vals))
        if n == 0 or float(frac.max(initial=0.0)) <= _INTEGRALITY_TOL:
            cand = np.clip(np.round(vals), lo, up)
            if _violated_rows(rows, cand, _ROUNDED_ROW_TOL):
                raise MilpError("integral LP vertex failed row re-check")
            obj = math.fsum(float(ci) for ci, vi in zip(c, cand) if vi)
            if obj < inc_obj:
                inc_obj = obj
                inc_vals = cand.astype(np.int64)
            continue
        # Branch on the fractional variable with the largest objective stake,
        # breaking ties toward the most fractional value: fixing high-cost
        # variables first moves the child bounds furthest apart.
        fractional = frac > _INTEGRALITY_TOL
        scores = np.where(
            fractional,
            (np.abs(c) + 1.0) * (0.5 - np.abs(vals - 0.5) + 1e-6),
            -np.inf,
        )
        j = int(np.argmax(scores))
        up0 = up.copy()
        up0[j] = 0.0
        push(lo, up0, start=vals)
        lo1 = lo.copy()
        lo1[j] = 1.0
        push(lo1, up, start=vals)

    if hit_node_limit:
        open_bound = min((entry[0] for entry in heap), default=inc_obj)
        return BinaryResult(
            "node_limit",
            inc_obj if inc_vals is not None else None,
            inc_vals,
            nodes,
            min(open_bound, inc_obj) if inc_vals is not None or heap else None,
        )
    if inc_vals is None:
        return BinaryResult("infeasible", None, None, nodes, None)
    return BinaryResult("optimal", inc_obj, inc_vals, nodes, inc_obj)
