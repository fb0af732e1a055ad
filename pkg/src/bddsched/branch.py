"""Branch-and-price over the diagram flow formulation.

Branching splits the high edges ``A_j`` of one job by start time. With the
reference row ``q(e)`` (start time) and the current edge flow ``x``, the set
``V' = {e in A_j : q(e) <= sum_e q(e) x_e}`` is removed in the left child and
``A_j minus V'`` in the right child. Restrictions act on the alive mask only,
so pricing needs no changes.
"""
from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field

from .colgen import (INF, NO_CONSECUTIVE, CgConfig, CgState, Column, column_from_nodes,
                     integer_bound, run_colgen)
from .diagram import Diagram, build_diagram
from .heuristic import initial_solution, local_search, schedule_to_columns
from .horizon import refine_partition
from .instance import Instance, Schedule, evaluate_schedule

LEFT, RIGHT = "left", "right"


@dataclass
class SolverConfig:
    time_limit_s: float = 60.0
    node_limit: int = 100_000
    cg_iter_cap: int = 1000
    fix_every: int = 100
    fixing: bool = True
    alpha: float = 0.8
    mode: str = NO_CONSECUTIVE
    candidates: int = 6
    heuristic_iters: int = 40
    stall: int = 3
    heuristic_budget: int = 10_000
    seed: int = 0
    backend: str = "highs"
    verbose: bool = False

    def cg(self, iter_cap: int | None = None, prune: bool = True) -> CgConfig:
        return CgConfig(mode=self.mode, alpha=self.alpha,
                        iter_cap=self.cg_iter_cap if iter_cap is None else iter_cap,
                        fix_every=self.fix_every, fixing=self.fixing, prune=prune,
                        backend=self.backend, verbose=self.verbose)


@dataclass(frozen=True)
class BranchDecision:
    job: int
    threshold: float
    left_edges: tuple[int, ...]   # V', removed in the left child
    right_edges: tuple[int, ...]  # A_j minus V', removed in the right child
    score: float = 0.0

    def removed(self, side: str) -> tuple[int, ...]:
        return self.left_edges if side == LEFT else self.right_edges


@dataclass
class SearchNode:
    id: int
    depth: int
    decisions: tuple
    state: CgState
    parent_lb: float = -INF
    evaluated: bool = False

    @property
    def lb(self) -> float:
        return self.state.lb

    @property
    def alive(self) -> bytearray:
        return self.state.diagram.alive


@dataclass
class SolveResult:
    ub: float
    schedule: Schedule | None
    stats: dict
    optimal: bool

    def __iter__(self):
        return iter((self.ub, self.schedule, self.stats))


def select_branch_candidates(instance: Instance, diagram: Diagram, x: dict,
                             limit: int | None = None) -> list[BranchDecision]:
    """Jobs whose flow is spread over several start times, most balanced first."""
    out = []
    for j in range(1, instance.n + 1):
        edges = [v for v in diagram.job_edges[j] if diagram.alive[v]]
        support = [v for v in edges if x.get(v, 0.0) > 1e-6]
        if len(support) < 2:
            continue
        theta = sum(diagram.node_start[v] * x[v] for v in support)
        left = tuple(v for v in edges if diagram.node_start[v] <= theta + 1e-9)
        right = tuple(v for v in edges if diagram.node_start[v] > theta + 1e-9)
        if not left or not right:
            continue
        s = sum(x.get(v, 0.0) for v in left)
        score = min(s, 1.0 - s)
        if score > 1e-6:
            out.append(BranchDecision(j, theta, left, right, score))
    out.sort(key=lambda d: (-d.score, d.job))
    return out[:limit] if limit else out


def apply_branch(alive: bytearray, decision: BranchDecision, side: str,
                 diagram: Diagram) -> tuple[bytearray, bool]:
    """Child mask and whether the child can still be feasible."""
    child = bytearray(alive)
    for v in decision.removed(side):
        child[v] = 0
    feasible = any(child[v] for v in diagram.job_edges[decision.job])
    return child, feasible


def _child_state(parent: CgState, decision: BranchDecision, side: str) -> CgState | None:
    mask, feasible = apply_branch(parent.diagram.alive, decision, side, parent.diagram)
    if not feasible:
        return None
    return parent.copy_for_child(parent.diagram.restricted(mask))


def _gain(child: CgState | None, parent_lb: float) -> float:
    if child is None or child.status in ("infeasible", "pruned"):
        return INF
    return max(child.lb - parent_lb, 0.0)


def _product(g_left: float, g_right: float) -> float:
    return max(g_left, 1e-6) * max(g_right, 1e-6)


def _evaluate(parent: CgState, decision: BranchDecision, cfg: CgConfig):
    children = []
    for side in (LEFT, RIGHT):
        st = _child_state(parent, decision, side)
        if st is not None:
            run_colgen(st, cfg)
        children.append(st)
    score = _product(_gain(children[0], parent.lb), _gain(children[1], parent.lb))
    return score, children


def strong_branch(node: SearchNode, candidates: list[BranchDecision], config: SolverConfig):
    """Pick a decision; returns ``(decision, [left_state, right_state])``.

    Phase one runs at most ``heuristic_iters`` CG iterations per child; phase
    two evaluates children fully in phase-one order and stops after ``stall``
    consecutive evaluations without a better product score.
    """
    if not candidates:
        raise ValueError("no branching candidates")
    full = config.cg()
    if len(candidates) == 1:
        return candidates[0], _evaluate(node.state, candidates[0], full)[1]
    quick = config.cg(iter_cap=config.heuristic_iters)
    ranked = []
    for rank, cand in enumerate(candidates):
        score, _ = _evaluate(node.state, cand, quick)
        ranked.append((-score, rank, cand))
    ranked.sort(key=lambda r: (r[0], r[1]))
    best = None
    stall = 0
    for _, _, cand in ranked:
        score, children = _evaluate(node.state, cand, full)
        if best is None or score > best[0]:
            best = (score, cand, children)
            stall = 0
        else:
            stall += 1
        if stall >= config.stall or score == INF:
            break
    return best[1], best[2]


def schedule_from_flow(instance: Instance, diagram: Diagram, x: dict) -> Schedule | None:
    """Decode an integral high-edge flow into a schedule (None if not integral)."""
    chosen = []
    for v, val in x.items():
        if abs(val - round(val)) > 1e-6:
            return None
        if round(val) >= 1:
            chosen.append((diagram.node_start[v], diagram.node_job[v]))
    chosen.sort()
    if sorted(j for _, j in chosen) != list(range(1, instance.n + 1)):
        return None
    loads = [0] * instance.m
    machines: list[list[int]] = [[] for _ in range(instance.m)]
    for start, j in chosen:
        k = next((i for i, load in enumerate(loads) if load == start), None)
        if k is None:
            return None
        machines[k].append(j)
        loads[k] += instance.job(j).p
    return evaluate_schedule(instance, machines)


def round_columns(instance: Instance, state: CgState, budget: int, seed: int) -> Schedule | None:
    """Greedy disjoint columns by decreasing lambda, then local search."""
    order = sorted(range(len(state.columns)), key=lambda k: (-state.lam[k], k))
    taken: set = set()
    machines: list[list[int]] = []
    for k in order:
        if state.lam[k] <= 1e-9 or len(machines) == instance.m:
            break
        jobs = state.columns[k].jobs
        if len(set(jobs)) != len(jobs) or taken & set(jobs):
            continue
        machines.append(list(jobs))
        taken |= set(jobs)
    while len(machines) < instance.m:
        machines.append([])
    rest = [j.id for j in sorted(instance.jobs, key=lambda j: (j.d, j.id)) if j.id not in taken]
    for j in rest:
        k = min(range(instance.m), key=lambda i: (sum(instance.job(a).p for a in machines[i]), i))
        machines[k].append(j)
    if any(not s for s in machines):
        return None
    return local_search(instance, machines, budget, seed)


class BranchAndPrice:
    def __init__(self, instance: Instance, config: SolverConfig | None = None):
        self.instance = instance
        self.config = config or SolverConfig()
        self.counter = itertools.count()
        self.incumbent: Schedule | None = None
        self.ub = INF
        self.stats = {"nodes": 0, "cg_iters": 0, "iters_root": 0, "lb_root": -INF,
                      "time_lp": 0.0, "time_total": 0.0, "edges_fixed": 0}

    def _offer(self, schedule: Schedule | None, ties: bool = False) -> None:
        if schedule is None:
            return
        cost = evaluate_schedule(self.instance, schedule.machine_sequences).cost
        if cost < self.ub or (ties and cost == self.ub):
            self.ub, self.incumbent = cost, schedule

    def _process(self, node: SearchNode) -> list[BranchDecision]:
        """Run CG if needed, harvest incumbents, return candidates (empty = leaf)."""
        st = node.state
        st.ub = self.ub
        if not node.evaluated:
            run_colgen(st, self.config.cg())
            node.evaluated = True
        self.stats["cg_iters"] += st.iterations
        if st.status == "infeasible" or len(st.lam) == 0:
            return []
        x = st.edge_flow()
        if st.artificial.sum() <= 1e-6:
            self._offer(schedule_from_flow(self.instance, st.diagram, x), ties=node.depth == 0)
        if node.depth == 0 or node.id % 10 == 0:
            self._offer(round_columns(self.instance, st, 500, self.config.seed + node.id))
        st.ub = self.ub
        if integer_bound(st.lb) >= self.ub:
            return []
        return select_branch_candidates(self.instance, st.diagram, x, self.config.candidates)

    def solve(self) -> SolveResult:
        cfg, inst = self.config, self.instance
        t0 = time.perf_counter()
        partition = refine_partition(inst)
        diagram = build_diagram(inst, partition)
        heur = initial_solution(inst, cfg.heuristic_budget, cfg.seed)
        self._offer(heur)
        root_state = CgState(inst, diagram.restricted(), ub=self.ub)
        for col in schedule_to_columns(inst, partition, diagram, heur) or []:
            root_state.add_column(col)
        # the root LP is always solved to optimality so that lb_root is the LP bound
        root_state.ub = self.ub
        run_colgen(root_state, cfg.cg(prune=False))
        self.stats["time_lp"] = time.perf_counter() - t0
        self.stats["iters_root"] = root_state.iterations
        self.stats["lb_root"] = root_state.lb
        root = SearchNode(next(self.counter), 0, (), root_state, evaluated=True)
        heap = [(root.lb, 0, root.id, root)]
        optimal = True
        global_lb = root.lb
        while heap:
            if (self.stats["nodes"] >= cfg.node_limit
                    or time.perf_counter() - t0 > cfg.time_limit_s):
                optimal = False
                global_lb = min(item[0] for item in heap)
                break
            lb, depth, _, node = heapq.heappop(heap)
            if node.depth > 0 and integer_bound(lb) >= self.ub:
                continue
            self.stats["nodes"] += 1
            candidates = self._process(node)
            self.stats["edges_fixed"] += node.state.removed_edges
            if not candidates:
                continue
            decision, children = strong_branch(node, candidates, cfg)
            for side, st in zip((LEFT, RIGHT), children):
                if st is None or st.status in ("infeasible", "pruned"):
                    continue
                self.stats["cg_iters"] += st.iterations
                st.iterations = 0
                child = SearchNode(next(self.counter), depth + 1,
                                   node.decisions + ((decision, side),), st,
                                   parent_lb=node.lb, evaluated=True)
                heapq.heappush(heap, (max(child.lb, node.lb), depth + 1, child.id, child))
        if optimal:
            global_lb = self.ub
        self.stats["time_total"] = time.perf_counter() - t0
        self.stats["lb"] = global_lb
        self.stats["optimal"] = optimal and self.incumbent is not None
        return SolveResult(self.ub, self.incumbent, dict(self.stats), self.stats["optimal"])


def solve(instance: Instance, config: SolverConfig | None = None) -> SolveResult:
    return BranchAndPrice(instance, config).solve()
