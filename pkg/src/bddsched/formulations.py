"""Compact LP formulations: time-indexed, arc-time-indexed and diagram flow.

These are solved directly and are meant for small instances (oracle duty and
bound comparisons); column generation over the diagram lives in
:mod:`bddsched.colgen`.

Indexing conventions:

* TIF variable ``y[j, t]`` with 1-based start *period* ``t`` (job starts at
  time ``t - 1``), ``t in 1..T-p_j+1``.
* ATIF variable ``x[i, j, t]``: i completes and j starts at time ``t``; job
  0 is the dummy. Entering the dummy at ``t`` (``x[i, 0, t]``) occupies the
  idle unit ``[t, t + 1]``, so leaving it happens at ``t + 1``; entering it
  at ``T`` ends the path. ``x[0, j, 0]`` leaves the source.
* BDDF variables: one per alive high edge and one per low edge that does not
  lead to the 0-terminal.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagram import ONE, ZERO, Diagram
from .instance import Instance
from .lp import LpBuilder, LpProblem


def start_cost(instance: Instance, j: int, start: int) -> int:
    """Cost of starting job ``j`` at time ``start`` (the arc-time-indexed cost)."""
    job = instance.job(j)
    return job.w * max(0, start + job.p - job.d)


@dataclass(frozen=True)
class CostTable:
    instance: Instance

    def tif(self, j: int, t: int) -> int:
        """Cost of starting job j in period t (time t - 1)."""
        return start_cost(self.instance, j, t - 1)

    def atif(self, j: int, t: int) -> int:
        return start_cost(self.instance, j, t)


@dataclass
class TifModel:
    lp: LpProblem
    index: dict  # (j, t) -> column

    def point(self, values: dict) -> np.ndarray:
        x = np.zeros(self.lp.num_vars)
        for key, v in values.items():
            x[self.index[key]] = v
        return x


@dataclass
class AtifModel:
    lp: LpProblem
    index: dict  # (i, j, t) -> column

    def point(self, values: dict) -> np.ndarray:
        x = np.zeros(self.lp.num_vars)
        for key, v in values.items():
            x[self.index[key]] = v
        return x

    def project_to_tif(self, instance: Instance, x: np.ndarray) -> dict:
        """``y[j, t] = sum_i x[i, j, t-1]``."""
        y: dict = {}
        for (i, j, t), col in self.index.items():
            if j == 0 or x[col] == 0:
                continue
            y[(j, t + 1)] = y.get((j, t + 1), 0.0) + x[col]
        return y


@dataclass
class BddfModel:
    lp: LpProblem
    hi_col: dict  # node -> column of its high edge
    lo_col: dict  # node -> column of its low edge


def build_tif(instance: Instance) -> TifModel:
    T, m = instance.T, instance.m
    costs = CostTable(instance)
    lb = LpBuilder()
    index = {}
    for job in instance.jobs:
        for t in range(1, T - job.p + 2):
            index[(job.id, t)] = lb.add_var(costs.tif(job.id, t), name=f"y_{job.id}_{t}")
    for job in instance.jobs:
        lb.add_row([(index[(job.id, t)], 1.0) for t in range(1, T - job.p + 2)], 1.0, "=",
                   f"assign_{job.id}")
    for t in range(1, T + 1):
        terms = [(index[(job.id, s)], 1.0)
                 for job in instance.jobs
                 for s in range(max(1, t - job.p + 1), min(t, T - job.p + 1) + 1)]
        lb.add_row(terms, float(m), "<", f"cap_{t}")
    return TifModel(lb.build(), index)


def build_atif(instance: Instance) -> AtifModel:
    T, m, n = instance.T, instance.m, instance.n
    p = (0,) + instance.p
    lb = LpBuilder()
    index = {}
    for i in range(n + 1):
        for j in range(n + 1):
            if i == j and i:
                continue
            for t in range(p[i], T - p[j] + 1):
                cost = start_cost(instance, j, t) if j else 0
                index[(i, j, t)] = lb.add_var(cost, name=f"x_{i}_{j}_{t}")

    for j in range(1, n + 1):
        terms = [(col, 1.0) for (_i, b, _t), col in index.items() if b == j]
        lb.add_row(terms, 1.0, "=", f"assign_{j}")
    # node keys: ("job", i, start), ("idle", t) for the idle unit [t, t+1], ("source",)
    balance: dict = {}
    for (i, j, t), col in index.items():
        if i == 0:
            tail = ("source",) if t == 0 else ("idle", t - 1)
        else:
            tail = ("job", i, t - p[i])
        head = ("idle", t) if j == 0 else ("job", j, t)
        balance.setdefault(tail, []).append((col, -1.0))
        balance.setdefault(head, []).append((col, 1.0))
    for i in range(1, n + 1):
        for t in range(0, T - p[i] + 1):
            if ("job", i, t) in balance:
                lb.add_row(balance[("job", i, t)], 0.0, "=", f"flow_{i}_{t}")
    for t in range(T):
        if ("idle", t) in balance:
            lb.add_row(balance[("idle", t)], 0.0, "=", f"idle_{t}")
    lb.add_row([(c, 1.0) for c, _ in balance[("source",)]], float(m), "=", "source")
    return AtifModel(lb.build(), index)


def build_bddf(instance: Instance, diagram: Diagram) -> BddfModel:
    lb = LpBuilder()
    hi_col, lo_col = {}, {}
    for v in range(len(diagram)):
        if diagram.alive[v]:
            hi_col[v] = lb.add_var(float(diagram.cost[v]), name=f"h{v}")
        if diagram.lo[v] != ZERO:
            lo_col[v] = lb.add_var(0.0, name=f"l{v}")
    for j in range(1, instance.n + 1):
        terms = [(hi_col[v], 1.0) for v in diagram.job_edges[j] if v in hi_col]
        lb.add_row(terms, 1.0, "=", f"assign_{j}")
    inflow: dict = {}
    for v, col in hi_col.items():
        inflow.setdefault(diagram.hi[v], []).append(col)
    for v, col in lo_col.items():
        inflow.setdefault(diagram.lo[v], []).append(col)
    for v in range(1, len(diagram)):
        terms = [(c, -1.0) for c in inflow.get(v, [])]
        if v in hi_col:
            terms.append((hi_col[v], 1.0))
        if v in lo_col:
            terms.append((lo_col[v], 1.0))
        lb.add_row(terms, 0.0, "=", f"node_{v}")
    lb.add_row([(c, 1.0) for c in inflow.get(ONE, [])], float(instance.m), "=", "terminal")
    return BddfModel(lb.build(), hi_col, lo_col)


def project_bddf_to_tif(diagram: Diagram, model: BddfModel, x: np.ndarray) -> dict:
    """Map high-edge flow onto TIF start periods: ``y[j, s + 1] += x_e``."""
    y: dict = {}
    for v, col in model.hi_col.items():
        if x[col] == 0:
            continue
        key = (diagram.node_job[v], diagram.node_start[v] + 1)
        y[key] = y.get(key, 0.0) + x[col]
    return y
