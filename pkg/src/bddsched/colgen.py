"""Column generation over the decision diagram.

The restricted master has one row per job and one convexity row
(``sum lambda_p = m``). Pricing is a shortest path on the diagram with high
edge length ``c_e - pi_j`` and low edge length 0. In ``no_consecutive`` mode
every node keeps a bucket of two labels with different adjacent jobs, which is
enough to forbid the same job twice in a row along a path.

Duals are stored as one array ``pi`` of length ``n + 1``: ``pi[0]`` belongs
to the convexity row and ``pi[j]`` to job ``j``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .diagram import ONE, ZERO, Diagram
from .instance import Instance
from .lp import RC_TOL, LpProblem, solve_lp

REPEATS = "repeats"
NO_CONSECUTIVE = "no_consecutive"
MODES = (REPEATS, NO_CONSECUTIVE)

INF = math.inf


@dataclass(frozen=True)
class Column:
    nodes: tuple[int, ...]
    jobs: tuple[int, ...]
    cost: int

    def counts(self, n: int) -> np.ndarray:
        a = np.zeros(n + 1)
        for j in self.jobs:
            a[j] += 1
        return a

    def reduced_cost(self, pi: np.ndarray) -> float:
        return self.cost - sum(pi[j] for j in self.jobs) - pi[0]

    def has_consecutive_repeat(self) -> bool:
        return any(a == b for a, b in zip(self.jobs, self.jobs[1:]))


def column_from_nodes(diagram: Diagram, nodes) -> Column:
    nodes = tuple(nodes)
    return Column(nodes, tuple(diagram.node_job[v] for v in nodes),
                  sum(diagram.cost[v] for v in nodes))


@dataclass(frozen=True)
class DualVector:
    pi: np.ndarray

    @property
    def pi0(self) -> float:
        return float(self.pi[0])

    def objective(self, m: int) -> float:
        """Dual objective ``sum_j pi_j + m pi_0``."""
        return float(self.pi[1:].sum() + m * self.pi[0])


class Labels:
    """Two-label buckets; index ``len(diagram)`` is the 1-terminal.

    ``v1/j1`` hold the best label and ``v2/j2`` the best label whose adjacent
    job differs from ``j1``. ``ptr`` records the choice taken (backward only):
    0/1 follow the low child's label 1/2, 2/3 the high child's label 1/2.
    """

    def __init__(self, size: int):
        self.v1 = [INF] * size
        self.j1 = [-1] * size
        self.v2 = [INF] * size
        self.j2 = [-1] * size
        self.p1 = [0] * size
        self.p2 = [0] * size

    def best_excluding(self, u: int, job: int, two: bool) -> tuple[float, int]:
        """Best value at ``u`` whose adjacent job differs from ``job``, and its slot."""
        if not two or self.j1[u] != job:
            return self.v1[u], 0
        return self.v2[u], 1

    def insert(self, u: int, val: float, job: int, ptr: int, two: bool) -> None:
        if val < self.v1[u]:
            if two and job != self.j1[u]:
                self.v2[u], self.j2[u], self.p2[u] = self.v1[u], self.j1[u], self.p1[u]
            self.v1[u], self.j1[u], self.p1[u] = val, job, ptr
        elif two and job != self.j1[u] and val < self.v2[u]:
            self.v2[u], self.j2[u], self.p2[u] = val, job, ptr


def _index(diagram: Diagram, child: int) -> int:
    if child == ONE:
        return len(diagram)
    return -1 if child == ZERO else child


def edge_reduced_costs(diagram: Diagram, pi: np.ndarray) -> list[float]:
    return [c - pi[j] for c, j in zip(diagram.cost, diagram.node_job)]


def price_backward(diagram: Diagram, duals: DualVector, mode: str = NO_CONSECUTIVE):
    """Backward labeling from the 1-terminal.

    Returns ``(column or None, min_reduced_cost, labels)``; the minimum
    includes the ``-pi_0`` term and is ``inf`` if no path is alive.
    """
    if mode not in MODES:
        raise ValueError(f"unknown pricing mode {mode!r}")
    two = mode == NO_CONSECUTIVE
    N = len(diagram)
    rc = edge_reduced_costs(diagram, duals.pi)
    L = Labels(N + 1)
    L.v1[N], L.j1[N] = 0.0, 0
    hi, lo, job, alive = diagram.hi, diagram.lo, diagram.node_job, diagram.alive
    for v in range(N - 1, -1, -1):
        lc = _index(diagram, lo[v])
        if lc >= 0:
            L.insert(v, L.v1[lc], L.j1[lc], 0, two)
            if two:
                L.insert(v, L.v2[lc], L.j2[lc], 1, two)
        if alive[v]:
            hc = _index(diagram, hi[v])
            if hc >= 0:
                val, slot = L.best_excluding(hc, job[v], two)
                if val < INF:
                    L.insert(v, rc[v] + val, job[v], 2 + slot, two)
    if N == 0 or L.v1[0] == INF:
        return None, INF, L
    nodes = []
    v, slot = 0, 0
    while v != N:
        ptr = L.p1[v] if slot == 0 else L.p2[v]
        if ptr >= 2:
            nodes.append(v)
            v, slot = _index(diagram, hi[v]), ptr - 2
        else:
            v, slot = _index(diagram, lo[v]), ptr
    return column_from_nodes(diagram, nodes), L.v1[0] - duals.pi0, L


def price_forward(diagram: Diagram, duals: DualVector, mode: str = NO_CONSECUTIVE) -> Labels:
    """Forward labeling from the root (root label value 0, no previous job).

    The 1-terminal bucket at index ``len(diagram)`` holds path values
    without the ``-pi_0`` term.
    """
    if mode not in MODES:
        raise ValueError(f"unknown pricing mode {mode!r}")
    two = mode == NO_CONSECUTIVE
    N = len(diagram)
    rc = edge_reduced_costs(diagram, duals.pi)
    L = Labels(N + 1)
    if N:
        L.v1[0], L.j1[0] = 0.0, 0
    hi, lo, job, alive = diagram.hi, diagram.lo, diagram.node_job, diagram.alive
    for v in range(N):
        if L.v1[v] == INF:
            continue
        lc = _index(diagram, lo[v])
        if lc >= 0:
            L.insert(lc, L.v1[v], L.j1[v], 0, two)
            if two:
                L.insert(lc, L.v2[v], L.j2[v], 1, two)
        if alive[v]:
            hc = _index(diagram, hi[v])
            if hc >= 0:
                val, _ = L.best_excluding(v, job[v], two)
                if val < INF:
                    L.insert(hc, val + rc[v], job[v], 2, two)
    return L


def through_edge_values(diagram: Diagram, duals: DualVector, fwd: Labels, bwd: Labels,
                        mode: str = NO_CONSECUTIVE) -> list[float]:
    """Best reduced cost of a path using the high edge of each node (``inf`` if none)."""
    two = mode == NO_CONSECUTIVE
    rc = edge_reduced_costs(diagram, duals.pi)
    out = [INF] * len(diagram)
    for v in range(len(diagram)):
        if not diagram.alive[v]:
            continue
        hc = _index(diagram, diagram.hi[v])
        if hc < 0:
            continue
        j = diagram.node_job[v]
        f, _ = fwd.best_excluding(v, j, two)
        b, _ = bwd.best_excluding(hc, j, two)
        if f < INF and b < INF:
            out[v] = f + rc[v] + b - duals.pi0
    return out


def smooth_duals(best: DualVector | None, rmp: DualVector, alpha: float) -> DualVector:
    if not 0 <= alpha < 1:
        raise ValueError("alpha must lie in [0, 1)")
    if best is None or alpha == 0:
        return rmp
    return DualVector(alpha * best.pi + (1 - alpha) * rmp.pi)


def lagrangian_lb(dual_objective: float, min_reduced_cost: float, m: int) -> float:
    """``dual_objective + m * min(0, min_rc)``; pass the RMP value when duals are RMP-optimal."""
    return dual_objective + m * min(0.0, min_reduced_cost)


def integer_bound(lb: float):
    """Round a bound up for integer objectives; infinite bounds pass through."""
    return math.ceil(lb - 1e-6) if math.isfinite(lb) else lb


def fix_edges(diagram: Diagram, duals: DualVector, ub: float, mode: str = NO_CONSECUTIVE,
              fwd: Labels | None = None, bwd: Labels | None = None,
              min_rc: float | None = None) -> int:
    """Reduced-cost fixing; clears ``alive`` in place and returns the number removed.

    Any schedule through edge ``e`` costs at least
    ``DualObj + (m - 1) * min_rc + rc_through(e)`` since each of its m paths
    has reduced cost at least ``min_rc``. Edges where this reaches ``ub``
    cannot lead to a strictly better schedule.
    """
    if not math.isfinite(ub):
        return 0
    if bwd is None or min_rc is None:
        _, min_rc, bwd = price_backward(diagram, duals, mode)
    if fwd is None:
        fwd = price_forward(diagram, duals, mode)
    if min_rc == INF:
        return 0
    base = duals.objective(diagram.m) + (diagram.m - 1) * min(min_rc, 0.0)
    through = through_edge_values(diagram, duals, fwd, bwd, mode)
    removed = 0
    for v, val in enumerate(through):
        if diagram.alive[v] and base + val >= ub - 1e-6:
            diagram.alive[v] = 0
            removed += 1
    return removed


@dataclass
class CgConfig:
    mode: str = NO_CONSECUTIVE
    alpha: float = 0.8
    iter_cap: int = 1000
    fix_every: int = 100
    fixing: bool = True
    prune: bool = True
    backend: str = "highs"
    verbose: bool = False


@dataclass
class CgState:
    """Column-generation state of one search node."""

    instance: Instance
    diagram: Diagram
    columns: list[Column] = field(default_factory=list)
    big_m: float = 0.0
    lam: np.ndarray = field(default_factory=lambda: np.zeros(0))
    artificial: np.ndarray = field(default_factory=lambda: np.zeros(0))
    rmp_value: float = INF
    duals: DualVector | None = None
    best_duals: DualVector | None = None
    lb: float = -INF
    ub: float = INF
    iterations: int = 0
    min_rc: float = -INF
    status: str = "new"
    removed_edges: int = 0
    trace: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.big_m:
            inst = self.instance
            self.big_m = 10.0 * sum(j.w for j in inst.jobs) * inst.T + 1.0

    @property
    def integer_lb(self) -> int:
        return integer_bound(self.lb)

    def add_column(self, col: Column) -> bool:
        if col in self._column_set():
            return False
        self.columns.append(col)
        return True

    def _column_set(self):
        return set(self.columns)

    def purge_dead_columns(self) -> int:
        alive = self.diagram.alive
        keep = [c for c in self.columns if all(alive[v] for v in c.nodes)]
        dropped = len(self.columns) - len(keep)
        self.columns = keep
        return dropped

    def edge_flow(self) -> dict:
        """High-edge flow ``x_e = sum_p lambda_p z_e^p`` over positive entries."""
        x: dict = {}
        for lam, col in zip(self.lam, self.columns):
            if lam <= 1e-9:
                continue
            for v in col.nodes:
                x[v] = x.get(v, 0.0) + lam
        return x

    def copy_for_child(self, diagram: Diagram) -> "CgState":
        child = CgState(self.instance, diagram, list(self.columns), self.big_m,
                        ub=self.ub, lb=self.lb, best_duals=self.best_duals)
        child.purge_dead_columns()
        return child


def solve_master(state: CgState, backend: str = "highs"):
    """Solve the RMP over ``state.columns`` plus one artificial per row."""
    inst = state.instance
    n, k = inst.n, len(state.columns)
    rows, cols, vals = [], [], []
    for c, col in enumerate(state.columns):
        counts: dict = {}
        for j in col.jobs:
            counts[j] = counts.get(j, 0) + 1
        for j, a in counts.items():
            rows.append(j - 1)
            cols.append(c)
            vals.append(float(a))
        rows.append(n)
        cols.append(c)
        vals.append(1.0)
    for i in range(n + 1):
        rows.append(i)
        cols.append(k + i)
        vals.append(1.0)
    A = sp.csr_matrix((vals, (rows, cols)), shape=(n + 1, k + n + 1))
    c = np.array([col.cost for col in state.columns] + [state.big_m] * (n + 1), dtype=float)
    b = np.ones(n + 1)
    b[n] = inst.m
    sol = solve_lp(LpProblem(c, A, b, ("=",) * (n + 1)), backend)
    if not sol.optimal:
        raise RuntimeError(f"restricted master not optimal: {sol.status}")
    pi = np.empty(n + 1)
    pi[0] = sol.duals[n]
    pi[1:] = sol.duals[:n]
    state.lam = sol.x[:k]
    state.artificial = sol.x[k:]
    state.rmp_value = sol.objective
    state.duals = DualVector(pi)
    return sol.objective, state.duals, state.lam


def _log(state: CgState, config: CgConfig) -> None:
    line = (f"it={state.iterations} rmp={state.rmp_value:.6f} lb={state.lb:.6f} "
            f"min_rc={state.min_rc:.6f} pool={len(state.columns)} "
            f"alive={sum(state.diagram.alive)}")
    state.trace.append(line)
    if config.verbose:
        print(line)


def run_colgen(state: CgState, config: CgConfig | None = None) -> CgState:
    """Iterate master and pricing until convergence, pruning or the iteration cap.

    Final ``status``: ``optimal`` (LP solved), ``pruned`` (bound reached the
    incumbent), ``infeasible`` (no path or artificials stay positive) or
    ``iter_cap``.
    """
    config = config or CgConfig()
    diagram, m = state.diagram, state.instance.m
    state.purge_dead_columns()
    since_fix = 0
    start_iter = state.iterations
    state.status = "iter_cap"
    state.best_duals = None
    state.lb = -INF
    while state.iterations - start_iter < config.iter_cap:
        solve_master(state, config.backend)
        state.iterations += 1
        since_fix += 1
        rmp_duals = state.duals
        added = False
        no_path = False
        alphas = (config.alpha, 0.0) if state.best_duals is not None and config.alpha > 0 else (0.0,)
        for alpha in alphas:
            duals = smooth_duals(state.best_duals, rmp_duals, alpha)
            col, min_rc, _ = price_backward(diagram, duals, config.mode)
            if col is None:
                no_path = True
                break
            lb = lagrangian_lb(duals.objective(m), min_rc, m)
            if alpha == 0:
                state.min_rc = min_rc
            if lb > state.lb:
                state.lb, state.best_duals = lb, duals
            if col.reduced_cost(rmp_duals.pi) < -RC_TOL and state.add_column(col):
                added = True
                break
        _log(state, config)
        if no_path:
            state.status = "infeasible"
            state.lb = INF
            return state
        if config.prune and integer_bound(state.lb) >= state.ub:
            state.status = "pruned"
            return state
        if not added or state.lb >= state.rmp_value - 1e-9:
            break
        if config.fixing and config.fix_every and since_fix >= config.fix_every:
            since_fix = 0
            _fix(state, state.best_duals or rmp_duals, config)
    else:
        return state
    if state.artificial.sum() > 1e-6:
        state.status = "infeasible"
        state.lb = INF
        return state
    state.status = "optimal"
    if config.fixing:
        # keep the pool so lam stays aligned with the final master solution
        _fix(state, state.duals, config, purge=False)
    return state


def _fix(state: CgState, duals: DualVector, config: CgConfig, purge: bool = True) -> None:
    removed = fix_edges(state.diagram, duals, state.ub, config.mode)
    if removed:
        state.removed_edges += removed
        if purge:
            state.purge_dead_columns()
