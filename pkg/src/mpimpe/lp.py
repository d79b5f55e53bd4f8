"""Linear programs and a bundled bounded-variable revised simplex solver.

Problems are stated as::

    minimize    c @ x
    subject to  A[i] @ x  (<=, ==, >=)  rhs[i]
                lower <= x <= upper

Every row gets a logical variable ``r_i = A[i] @ x`` whose bounds encode the
relation, so the working system is ``[A | -I] @ (x, r) = 0`` with bounds on
all columns. The starting basis is the logical one; phase 1 minimizes the
sum of bound violations of the basic variables, phase 2 the real objective.
Pricing is Dantzig's rule with a switch to Bland's rule after a run of
degenerate pivots, which makes the pivot sequence (and the returned vertex)
a deterministic function of the input.
"""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import DimensionMismatch, InvalidSpec

_SENSES = {"<=": "<=", "<": "<=", "L": "<=", "==": "==", "=": "==", "E": "==", ">=": ">=", ">": ">=", "G": ">="}


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITERATION_LIMIT = "IterationLimit"


@dataclass(frozen=True, eq=False)
class LinearProgram:
    objective: np.ndarray
    A: sp.csr_matrix
    senses: tuple
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).ravel()
        n = c.size
        A = sp.csr_matrix(self.A, dtype=float) if self.A is not None else sp.csr_matrix((0, n))
        if A.shape[1] != n:
            if A.shape[0] == 0:
                A = sp.csr_matrix((0, n))
            else:
                raise DimensionMismatch(f"A has {A.shape[1]} columns, objective has {n}")
        m = A.shape[0]
        try:
            senses = tuple(_SENSES[s] for s in self.senses)
        except KeyError as exc:
            raise InvalidSpec(f"unknown relation {exc.args[0]!r}") from None
        rhs = np.asarray(self.rhs, dtype=float).ravel()
        lo = np.broadcast_to(np.asarray(self.lower, dtype=float), (n,)).copy()
        hi = np.broadcast_to(np.asarray(self.upper, dtype=float), (n,)).copy()
        if len(senses) != m or rhs.size != m:
            raise DimensionMismatch(f"{m} rows but {len(senses)} relations and {rhs.size} rhs")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A.data)) and np.all(np.isfinite(rhs))):
            raise InvalidSpec("objective, coefficients and rhs must be finite")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo > hi):
            raise InvalidSpec("every variable needs lower <= upper")
        if np.any(lo == np.inf) or np.any(hi == -np.inf):
            raise InvalidSpec("bounds cannot exclude every finite value")
        A.sum_duplicates()
        for name, val in (("objective", c), ("A", A), ("senses", senses), ("rhs", rhs), ("lower", lo), ("upper", hi)):
            object.__setattr__(self, name, val)

    @classmethod
    def from_constraints(cls, objective, constraints=(), bounds=None) -> LinearProgram:
        """Build from ``[(row, relation, rhs), ...]``; default bounds are ``[0, inf)``."""
        c = np.asarray(objective, dtype=float)
        n = c.size
        rows = [np.asarray(r, dtype=float) for r, _, _ in constraints]
        for i, r in enumerate(rows):
            if r.size != n:
                raise DimensionMismatch(f"constraint {i} has {r.size} coefficients, expected {n}")
        A = np.vstack(rows) if rows else np.zeros((0, n))
        if bounds is None:
            lo, hi = np.zeros(n), np.full(n, np.inf)
        else:
            bounds = list(bounds)
            if len(bounds) != n:
                raise DimensionMismatch(f"{len(bounds)} bounds for {n} variables")
            lo = np.array([-np.inf if b[0] is None else b[0] for b in bounds], dtype=float)
            hi = np.array([np.inf if b[1] is None else b[1] for b in bounds], dtype=float)
        return cls(c, A, [s for _, s, _ in constraints], [b for _, _, b in constraints], lo, hi)

    @property
    def num_vars(self) -> int:
        return self.objective.size

    @property
    def num_constraints(self) -> int:
        return self.A.shape[0]

    @property
    def constraints(self) -> list[tuple[np.ndarray, str, float]]:
        dense = self.A.toarray()
        return [(dense[i], self.senses[i], float(self.rhs[i])) for i in range(self.num_constraints)]

    def scaled_objective(self, factor: float) -> LinearProgram:
        return LinearProgram(self.objective * factor, self.A, self.senses, self.rhs, self.lower, self.upper)


@dataclass(frozen=True)
class SolverOptions:
    primal_tol: float = 1e-9
    dual_tol: float = 1e-9  # relative to max |c|
    pivot_tol: float = 1e-9
    max_iter: int = 200_000
    refactor_every: int = 64
    stall_limit: int = 50
    method: str = "simplex"  # or "highs" (scipy) behind the same interface


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: Status
    x: np.ndarray
    objective_value: float
    iterations: int = 0
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status is Status.OPTIMAL


@dataclass(frozen=True, eq=False)
class FeasibilityReport:
    row_violations: np.ndarray
    bound_violations: np.ndarray
    rhs: np.ndarray = field(repr=False)

    @property
    def max_row_violation(self) -> float:
        return float(self.row_violations.max(initial=0.0))

    @property
    def worst_row(self) -> int | None:
        return int(np.argmax(self.row_violations)) if self.max_row_violation > 0 else None

    @property
    def max_bound_violation(self) -> float:
        return float(self.bound_violations.max(initial=0.0))

    @property
    def worst_var(self) -> int | None:
        return int(np.argmax(self.bound_violations)) if self.max_bound_violation > 0 else None

    @property
    def max_relative_row_violation(self) -> float:
        if self.row_violations.size == 0:
            return 0.0
        return float((self.row_violations / (1.0 + np.abs(self.rhs))).max())

    def feasible(self, row_tol: float = 1e-7, bound_tol: float = 1e-9) -> bool:
        return self.max_relative_row_violation <= row_tol and self.max_bound_violation <= bound_tol


def verify(lp: LinearProgram, x) -> FeasibilityReport:
    """Constraint and bound violations of ``x`` (all non-negative)."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size != lp.num_vars:
        raise DimensionMismatch(f"x has {x.size} entries, LP has {lp.num_vars} variables")
    act = lp.A @ x
    senses = np.array(lp.senses, dtype=object)
    viol = np.zeros(lp.num_constraints)
    le, ge, eq = senses == "<=", senses == ">=", senses == "=="
    viol[le] = np.maximum(act[le] - lp.rhs[le], 0.0)
    viol[ge] = np.maximum(lp.rhs[ge] - act[ge], 0.0)
    viol[eq] = np.abs(act[eq] - lp.rhs[eq])
    bviol = np.maximum(np.maximum(lp.lower - x, x - lp.upper), 0.0)
    return FeasibilityReport(viol, bviol, lp.rhs)


# -- factorized basis --------------------------------------------------------


class _Basis:
    """LU factors of the basis matrix plus product-form updates."""

    def __init__(self, Afull: sp.csc_matrix, basis: np.ndarray):
        self.m = Afull.shape[0]
        B = Afull[:, basis].tocsc()
        self.lu = splu(B, permc_spec="COLAMD")
        self.etas: list[tuple[int, np.ndarray]] = []

    def ftran(self, v: np.ndarray) -> np.ndarray:
        x = self.lu.solve(v)
        for r, col in self.etas:
            xr = x[r] / col[r]
            x -= col * xr
            x[r] = xr
        return x

    def btran(self, c: np.ndarray) -> np.ndarray:
        w = np.array(c, dtype=float)
        for r, col in reversed(self.etas):
            wr = w[r]
            w[r] = 0.0
            w[r] = (wr - col @ w) / col[r]
        return self.lu.solve(w, trans="T")

    def update(self, r: int, alpha: np.ndarray) -> None:
        self.etas.append((r, alpha.copy()))


# -- solver ------------------------------------------------------------------


class _Simplex:
    def __init__(self, lp: LinearProgram, opts: SolverOptions):
        self.opts = opts
        n, m = lp.num_vars, lp.num_constraints
        self.n, self.m = n, m
        self.N = n + m
        A = lp.A.tocsc()
        self.Afull = sp.hstack([A, -sp.identity(m, format="csc")], format="csc")
        self.At = self.Afull.T.tocsr()
        self.c = np.concatenate([lp.objective, np.zeros(m)])
        lo = np.full(m, -np.inf)
        hi = np.full(m, np.inf)
        for i, s in enumerate(lp.senses):
            if s in ("<=", "=="):
                hi[i] = lp.rhs[i]
            if s in (">=", "=="):
                lo[i] = lp.rhs[i]
        self.lo = np.concatenate([lp.lower, lo])
        self.hi = np.concatenate([lp.upper, hi])
        self.cscale = max(1.0, float(np.abs(lp.objective).max(initial=0.0)))

        x = np.zeros(self.N)
        xs = np.where(np.isfinite(lp.lower), lp.lower, np.where(np.isfinite(lp.upper), lp.upper, 0.0))
        x[:n] = xs
        self.x = x
        self.basis = np.arange(n, n + m)
        self.is_basic = np.zeros(self.N, dtype=bool)
        self.is_basic[self.basis] = True
        self.iterations = 0
        self._refactor()

    # basis bookkeeping

    def _refactor(self) -> None:
        self.B = _Basis(self.Afull, self.basis)
        xn = np.where(self.is_basic, 0.0, self.x)
        rhs = -(self.Afull @ xn)
        self.x[self.basis] = self.B.ftran(rhs) if self.m else rhs

    def _column(self, j: int) -> np.ndarray:
        A = self.Afull
        col = np.zeros(self.m)
        p0, p1 = A.indptr[j], A.indptr[j + 1]
        col[A.indices[p0:p1]] = A.data[p0:p1]
        return col

    def _tol(self, bound: np.ndarray) -> np.ndarray:
        return self.opts.primal_tol * np.maximum(1.0, np.abs(np.where(np.isfinite(bound), bound, 0.0)))

    def _infeasibility(self):
        xb = self.x[self.basis]
        lo, hi = self.lo[self.basis], self.hi[self.basis]
        below = xb < lo - self._tol(lo)
        above = xb > hi + self._tol(hi)
        return below, above

    # pricing

    def _reduced_costs(self, cost_b: np.ndarray, cost_full: np.ndarray) -> np.ndarray:
        y = self.B.btran(cost_b) if self.m else np.zeros(0)
        d = cost_full - self.At @ y if self.m else cost_full.copy()
        d[self.is_basic] = 0.0
        return d

    def _entering(self, d: np.ndarray, bland: bool, tol: float) -> int | None:
        x, lo, hi = self.x, self.lo, self.hi
        can_up = (~self.is_basic) & (x < hi)
        can_down = (~self.is_basic) & (x > lo)
        eligible = (can_up & (d < -tol)) | (can_down & (d > tol))
        idx = np.flatnonzero(eligible)
        if idx.size == 0:
            return None
        if bland:
            return int(idx[0])
        return int(idx[np.argmax(np.abs(d[idx]))])

    # ratio tests

    def _ratio_phase2(self, q: int, rates: np.ndarray, bland: bool):
        """Harris two-pass ratio test. Returns (theta, row or -1 for flip, bound value)."""
        xb = self.x[self.basis]
        lo, hi = self.lo[self.basis], self.hi[self.basis]
        piv = self.opts.pivot_tol
        up = (rates > piv) & np.isfinite(hi)
        dn = (rates < -piv) & np.isfinite(lo)
        dist = np.full(self.m, np.inf)
        dist[up] = hi[up] - xb[up]
        dist[dn] = xb[dn] - lo[dn]
        absr = np.abs(rates)
        cand = up | dn
        flip = self.hi[q] - self.lo[q]
        if not cand.any():
            if np.isfinite(flip):
                return flip, -1, None
            return np.inf, None, None
        tol = self._tol(np.where(up, hi, lo))
        relaxed = np.where(cand, (np.maximum(dist, 0.0) + tol) / np.where(cand, absr, 1.0), np.inf)
        tmax = relaxed.min()
        exact = np.where(cand, np.maximum(dist, 0.0) / np.where(cand, absr, 1.0), np.inf)
        if np.isfinite(flip) and flip <= exact.min():
            return flip, -1, None
        pool = np.flatnonzero(cand & (exact <= tmax))
        if bland:
            r = int(pool[np.argmin(self.basis[pool])])
        else:
            best = absr[pool].max()
            pool = pool[absr[pool] >= best * (1 - 1e-12)]
            r = int(pool[np.argmin(self.basis[pool])])
        bound = hi[r] if up[r] else lo[r]
        return float(exact[r]), r, bound

    def _ratio_phase1(self, q: int, rates: np.ndarray, slope0: float, below, above):
        """Long-step ratio test over the piecewise-linear infeasibility sum."""
        xb = self.x[self.basis]
        lo, hi = self.lo[self.basis], self.hi[self.basis]
        piv = self.opts.pivot_tol
        feas = ~(below | above)
        pos, neg = rates > piv, rates < -piv
        absr = np.abs(rates)
        ts, rows, kinds, bounds = [], [], [], []

        def add(mask, t, kind, bound):
            idx = np.flatnonzero(mask)
            if idx.size:
                ts.append(np.maximum(t[idx], 0.0))
                rows.append(idx)
                kinds.append(np.full(idx.size, kind))
                bounds.append(bound[idx])

        with np.errstate(invalid="ignore", divide="ignore"):
            add(feas & pos & np.isfinite(hi), (hi - xb) / rates, 0, hi)
            add(feas & neg & np.isfinite(lo), (xb - lo) / -rates, 0, lo)
            add(below & pos & np.isfinite(hi), (hi - xb) / rates, 0, hi)
            add(above & neg & np.isfinite(lo), (xb - lo) / -rates, 0, lo)
            add(below & pos, (lo - xb) / rates, 1, lo)
            add(above & neg, (xb - hi) / -rates, 1, hi)
        flip = self.hi[q] - self.lo[q]
        if not ts:
            return (flip, -1, None) if np.isfinite(flip) else (np.inf, None, None)
        t = np.concatenate(ts)
        r = np.concatenate(rows)
        kind = np.concatenate(kinds)
        bnd = np.concatenate(bounds)
        order = np.lexsort((self.basis[r], -absr[r], kind, t))
        slope = slope0
        tol = self.opts.dual_tol * self.cscale
        chosen = None
        for k in order:
            if np.isfinite(flip) and flip <= t[k]:
                return flip, -1, None
            if kind[k] == 0:
                chosen = k
                break
            slope += absr[r[k]]
            chosen = k
            if slope >= -tol:
                break
        return float(t[chosen]), int(r[chosen]), float(bnd[chosen])

    # main loop

    def solve(self) -> tuple[Status, str]:
        opts = self.opts
        dtol = opts.dual_tol * self.cscale
        bland = False
        stall = 0
        since_refactor = 0
        phase = 0
        while True:
            below, above = self._infeasibility()
            new_phase = 1 if (below.any() or above.any()) else 2
            if new_phase != phase:
                phase = new_phase
                bland, stall = False, 0
            if self.iterations >= opts.max_iter:
                return Status.ITERATION_LIMIT, f"stopped after {self.iterations} iterations"
            if phase == 1:
                cost_b = np.where(below, -1.0, np.where(above, 1.0, 0.0))
                d = self._reduced_costs(cost_b, np.zeros(self.N))
                tol = opts.dual_tol
            else:
                d = self._reduced_costs(self.c[self.basis], self.c)
                tol = dtol
            q = self._entering(d, bland, tol)
            if q is None:
                if phase == 1:
                    return Status.INFEASIBLE, "no feasible point"
                return Status.OPTIMAL, ""
            direction = 1.0 if d[q] < 0 else -1.0
            alpha = self.B.ftran(self._column(q)) if self.m else np.zeros(0)
            rates = -direction * alpha
            if phase == 1:
                theta, r, bound = self._ratio_phase1(q, rates, -abs(d[q]), below, above)
            else:
                theta, r, bound = self._ratio_phase2(q, rates, bland)
            if r is None:
                if phase == 1:
                    return Status.INFEASIBLE, "phase 1 ratio test failed"
                return Status.UNBOUNDED, f"variable {q} can improve without limit"
            self.iterations += 1
            gain = theta * abs(d[q])
            if gain <= 1e-12 * max(1.0, abs(d[q])):
                stall += 1
                if stall > opts.stall_limit:
                    bland = True
            else:
                stall, bland = 0, False

            self.x[self.basis] += theta * rates
            if r == -1:
                self.x[q] = self.hi[q] if direction > 0 else self.lo[q]
                continue
            self.x[q] += direction * theta
            leaving = self.basis[r]
            self.x[leaving] = bound
            self.is_basic[leaving] = False
            self.is_basic[q] = True
            self.basis[r] = q
            since_refactor += 1
            if since_refactor >= opts.refactor_every:
                self._refactor()
                since_refactor = 0
            else:
                self.B.update(r, alpha)

    def finish(self) -> np.ndarray:
        if self.m:
            self._refactor()
        x = self.x[: self.n].copy()
        lo, hi = self.lo[: self.n], self.hi[: self.n]
        snap = 1e-12 * np.maximum(1.0, np.abs(x))
        x = np.where(np.abs(x - lo) <= snap, lo, x)
        x = np.where(np.abs(x - hi) <= snap, hi, x)
        return x


def _solve_highs(lp: LinearProgram) -> LpSolution:
    from scipy.optimize import linprog

    senses = np.array(lp.senses, dtype=object)
    A = lp.A
    le, ge, eq = senses == "<=", senses == ">=", senses == "=="
    A_ub = sp.vstack([A[le], -A[ge]]) if (le.any() or ge.any()) else None
    b_ub = np.concatenate([lp.rhs[le], -lp.rhs[ge]]) if A_ub is not None else None
    A_eq = A[eq] if eq.any() else None
    b_eq = lp.rhs[eq] if eq.any() else None
    bounds = list(zip(np.where(np.isfinite(lp.lower), lp.lower, None), np.where(np.isfinite(lp.upper), lp.upper, None)))
    res = linprog(lp.objective, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    status = {0: Status.OPTIMAL, 1: Status.ITERATION_LIMIT, 2: Status.INFEASIBLE, 3: Status.UNBOUNDED}.get(
        res.status, Status.INFEASIBLE
    )
    x = res.x if res.x is not None else np.full(lp.num_vars, np.nan)
    obj = float(lp.objective @ x) if status is Status.OPTIMAL else np.nan
    return LpSolution(status, x, obj, int(getattr(res, "nit", 0)), res.message)


def solve(lp: LinearProgram, opts: SolverOptions = SolverOptions()) -> LpSolution:
    """Solve ``lp``; never raises for infeasible, unbounded or degenerate input."""
    if opts.method == "highs":
        return _solve_highs(lp)
    if opts.method != "simplex":
        raise InvalidSpec(f"unknown LP method {opts.method!r}")
    s = _Simplex(lp, opts)
    status, msg = s.solve()
    if status is not Status.OPTIMAL:
        return LpSolution(status, s.x[: lp.num_vars].copy(), np.nan, s.iterations, msg)
    x = s.finish()
    return LpSolution(status, x, float(lp.objective @ x), s.iterations, msg)


# -- export ------------------------------------------------------------------


def _num(v: float) -> str:
    return np.format_float_positional(v, precision=12, unique=False, fractional=False, trim="-")


def _terms(coeffs: np.ndarray, idx: np.ndarray) -> str:
    parts = []
    for k, (j, a) in enumerate(zip(idx, coeffs)):
        sign = "-" if a < 0 else "+"
        if k == 0:
            parts.append(f"{'- ' if a < 0 else ''}{_num(abs(a))} x{j}")
        else:
            parts.append(f"{sign} {_num(abs(a))} x{j}")
    return " ".join(parts) if parts else "0 x0"


def to_lp_format(lp: LinearProgram) -> str:
    """CPLEX LP text for debugging; numbers in positional notation, 12 significant digits."""
    out = io.StringIO()
    out.write("Minimize\n")
    nz = np.flatnonzero(lp.objective)
    out.write(f" obj: {_terms(lp.objective[nz], nz)}\n")
    out.write("Subject To\n")
    A = lp.A.tocsr()
    for i in range(lp.num_constraints):
        p0, p1 = A.indptr[i], A.indptr[i + 1]
        order = np.argsort(A.indices[p0:p1])
        idx, vals = A.indices[p0:p1][order], A.data[p0:p1][order]
        sense = "=" if lp.senses[i] == "==" else lp.senses[i]
        out.write(f" c{i}: {_terms(vals, idx)} {sense} {_num(lp.rhs[i])}\n")
    out.write("Bounds\n")
    for j in range(lp.num_vars):
        lo, hi = lp.lower[j], lp.upper[j]
        if np.isinf(lo) and np.isinf(hi):
            out.write(f" x{j} free\n")
        elif lo == hi:
            out.write(f" x{j} = {_num(lo)}\n")
        else:
            lo_s = "-inf" if np.isinf(lo) else _num(lo)
            hi_s = "+inf" if np.isinf(hi) else _num(hi)
            out.write(f" {lo_s} <= x{j} <= {hi_s}\n")
    out.write("End\n")
    return out.getvalue()
