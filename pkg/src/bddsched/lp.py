"""Linear programs ``min c x  s.t.  A x (= | <=) b,  0 <= x <= u``.

Two interchangeable backends share the :func:`solve_lp` contract:

* ``"highs"`` (default) calls HiGHS through :func:`scipy.optimize.linprog`;
* ``"simplex"`` is a dense two-phase revised simplex with Dantzig pricing
  that falls back to Bland's rule after a run of degenerate pivots.

Duals follow the sensitivity convention ``y_i = d(objective)/d(b_i)``, so
rows with sense ``<=`` carry non-positive duals.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"

FEAS_TOL = 1e-7
RC_TOL = 1e-6


@dataclass
class LpProblem:
    c: np.ndarray
    A: sp.csr_matrix
    b: np.ndarray
    senses: tuple[str, ...]
    upper: np.ndarray | None = None
    var_names: list[str] | None = None
    row_names: list[str] | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        self.A = sp.csr_matrix(self.A, shape=(len(self.b), len(self.c)))
        if len(self.senses) != len(self.b):
            raise ValueError("one sense per row required")
        if any(s not in ("=", "<") for s in self.senses):
            raise ValueError("row sense must be '=' or '<'")
        if self.upper is not None:
            self.upper = np.asarray(self.upper, dtype=float)
            if self.upper.shape != self.c.shape:
                raise ValueError("upper bounds must match variable count")
        if not (np.all(np.isfinite(self.c)) and np.all(np.isfinite(self.b))
                and np.all(np.isfinite(self.A.data))):
            raise ValueError("non-finite coefficient")

    @property
    def num_vars(self) -> int:
        return len(self.c)

    @property
    def num_rows(self) -> int:
        return len(self.b)

    def to_lp_text(self) -> str:
        """CPLEX-LP style text for debugging."""
        vn = self.var_names or [f"x{i}" for i in range(self.num_vars)]
        rn = self.row_names or [f"r{i}" for i in range(self.num_rows)]

        def expr(pairs):
            parts = []
            for k, v in pairs:
                if v == 0:
                    continue
                sign = "-" if v < 0 else "+"
                parts.append(f"{sign} {abs(v):g} {vn[k]}")
            return " ".join(parts) if parts else "0"

        out = ["Minimize", " obj: " + expr(enumerate(self.c)), "Subject To"]
        A = self.A.tocsr()
        for i in range(self.num_rows):
            row = A.getrow(i)
            op = "=" if self.senses[i] == "=" else "<="
            out.append(f" {rn[i]}: {expr(zip(row.indices, row.data))} {op} {self.b[i]:g}")
        out.append("Bounds")
        for k in range(self.num_vars):
            ub = "+inf" if self.upper is None or not np.isfinite(self.upper[k]) else f"{self.upper[k]:g}"
            out.append(f" 0 <= {vn[k]} <= {ub}")
        out.append("End")
        return "\n".join(out) + "\n"


@dataclass
class LpSolution:
    status: str
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    objective: float = float("nan")

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class LpBuilder:
    """Incremental row/column assembly for :class:`LpProblem`."""

    def __init__(self):
        self.costs: list[float] = []
        self.uppers: list[float] = []
        self.names: list[str] = []
        self.rows: list[int] = []
        self.cols: list[int] = []
        self.vals: list[float] = []
        self.rhs: list[float] = []
        self.senses: list[str] = []
        self.row_names: list[str] = []

    def add_var(self, cost: float, upper: float = np.inf, name: str | None = None) -> int:
        self.costs.append(cost)
        self.uppers.append(upper)
        self.names.append(name or f"x{len(self.costs) - 1}")
        return len(self.costs) - 1

    def add_row(self, terms, rhs: float, sense: str = "=", name: str | None = None) -> int:
        i = len(self.rhs)
        for k, v in terms:
            self.rows.append(i)
            self.cols.append(k)
            self.vals.append(v)
        self.rhs.append(rhs)
        self.senses.append(sense)
        self.row_names.append(name or f"r{i}")
        return i

    def build(self) -> LpProblem:
        A = sp.coo_matrix((self.vals, (self.rows, self.cols)),
                          shape=(len(self.rhs), len(self.costs))).tocsr()
        upper = np.array(self.uppers, dtype=float)
        return LpProblem(np.array(self.costs, dtype=float), A, np.array(self.rhs, dtype=float),
                         tuple(self.senses), None if np.all(np.isinf(upper)) else upper,
                         list(self.names), list(self.row_names))


def solve_lp(problem: LpProblem, backend: str = "highs") -> LpSolution:
    if backend == "highs":
        return _solve_highs(problem)
    if backend == "simplex":
        return RevisedSimplex(problem).solve()
    raise ValueError(f"unknown LP backend {backend!r}")


def _solve_highs(problem: LpProblem) -> LpSolution:
    senses = np.array(problem.senses)
    eq = np.flatnonzero(senses == "=")
    ub = np.flatnonzero(senses == "<")
    A = problem.A
    upper = problem.upper if problem.upper is not None else np.full(problem.num_vars, np.inf)
    bounds = [(0.0, None if np.isinf(u) else float(u)) for u in upper]
    res = linprog(problem.c,
                  A_ub=A[ub] if len(ub) else None, b_ub=problem.b[ub] if len(ub) else None,
                  A_eq=A[eq] if len(eq) else None, b_eq=problem.b[eq] if len(eq) else None,
                  bounds=bounds, method="highs")
    if res.status == 2:
        return LpSolution(INFEASIBLE)
    if res.status == 3:
        return LpSolution(UNBOUNDED)
    if res.status != 0:
        raise RuntimeError(f"HiGHS failed: {res.message}")
    duals = np.zeros(problem.num_rows)
    if len(eq):
        duals[eq] = res.eqlin.marginals
    if len(ub):
        duals[ub] = res.ineqlin.marginals
    return LpSolution(OPTIMAL, np.asarray(res.x, dtype=float), duals, float(res.fun))


class RevisedSimplex:
    """Dense two-phase revised simplex on the standard-form expansion.

    Upper bounds become explicit rows, ``<=`` rows get slacks and every row
    receives a phase-one artificial. Pricing is Dantzig's rule until
    ``stall_limit`` consecutive degenerate pivots occur, then Bland's rule.
    """

    def __init__(self, problem: LpProblem, stall_limit: int = 50, pivot_tol: float = 1e-9):
        self.problem = problem
        self.stall_limit = stall_limit
        self.pivot_tol = pivot_tol
        A = problem.A.toarray()
        b = problem.b.copy()
        senses = list(problem.senses)
        n = problem.num_vars
        if problem.upper is not None:
            for k in np.flatnonzero(np.isfinite(problem.upper)):
                row = np.zeros(n)
                row[k] = 1.0
                A = np.vstack([A, row])
                b = np.append(b, problem.upper[k])
                senses.append("<")
        m = len(b)
        slack_rows = [i for i, s in enumerate(senses) if s == "<"]
        S = np.zeros((m, len(slack_rows)))
        for col, i in enumerate(slack_rows):
            S[i, col] = 1.0
        full = np.hstack([A, S])
        self.sign = np.where(b < 0, -1.0, 1.0)
        full *= self.sign[:, None]
        b = b * self.sign
        self.n_struct = n
        self.n_real = full.shape[1]
        self.A = np.hstack([full, np.eye(m)])
        self.b = b
        self.m = m
        self.c = np.concatenate([problem.c, np.zeros(self.n_real - n + m)])

    def _iterate(self, cost: np.ndarray, basis: list[int], allowed: np.ndarray) -> str:
        A, b, m = self.A, self.b, self.m
        degenerate = 0
        max_iter = 50 * (m + A.shape[1]) + 100
        for _ in range(max_iter):
            B = A[:, basis]
            xb = np.linalg.solve(B, b)
            y = np.linalg.solve(B.T, cost[basis])
            d = cost - A.T @ y
            d[basis] = 0.0
            cand = np.flatnonzero(allowed & (d < -1e-9))
            if len(cand) == 0:
                return OPTIMAL
            if degenerate >= self.stall_limit:
                q = int(cand[0])
            else:
                q = int(cand[np.argmin(d[cand])])
            u = np.linalg.solve(B, A[:, q])
            pos = np.flatnonzero(u > self.pivot_tol)
            if len(pos) == 0:
                return UNBOUNDED
            ratios = np.maximum(xb[pos], 0.0) / u[pos]
            best = ratios.min()
            ties = pos[ratios <= best + 1e-12]
            # Bland: leave with the smallest basic variable index among ties
            leave = int(min(ties, key=lambda i: basis[i]))
            degenerate = degenerate + 1 if best <= 1e-12 else 0
            basis[leave] = q
        raise RuntimeError("simplex iteration limit reached")

    def solve(self) -> LpSolution:
        m, n_real = self.m, self.n_real
        n_total = n_real + m
        basis = list(range(n_real, n_total))
        phase1_cost = np.concatenate([np.zeros(n_real), np.ones(m)])
        allowed = np.zeros(n_total, dtype=bool)
        allowed[:n_real] = True
        self._iterate(phase1_cost, basis, allowed)
        B = self.A[:, basis]
        xb = np.linalg.solve(B, self.b)
        infeas = sum(xb[i] for i, v in enumerate(basis) if v >= n_real)
        if infeas > FEAS_TOL * max(1.0, np.abs(self.b).max(initial=0.0)):
            return LpSolution(INFEASIBLE)
        # drive zero-level artificials out of the basis where possible
        for i, v in enumerate(list(basis)):
            if v < n_real:
                continue
            row = np.linalg.solve(self.A[:, basis].T, np.eye(m)[i])
            alpha = row @ self.A[:, :n_real]
            for k in np.flatnonzero(np.abs(alpha) > 1e-7):
                if k not in basis:
                    basis[i] = int(k)
                    break
        status = self._iterate(self.c, basis, allowed)
        if status == UNBOUNDED:
            return LpSolution(UNBOUNDED)
        B = self.A[:, basis]
        xb = np.linalg.solve(B, self.b)
        y = np.linalg.solve(B.T, self.c[basis])
        x = np.zeros(n_total)
        x[basis] = xb
        x = np.maximum(x, 0.0)
        primal = x[:self.n_struct]
        duals = (y * self.sign)[:self.problem.num_rows]
        return LpSolution(OPTIMAL, primal, duals, float(self.problem.c @ primal))
