"""Decision diagram of canonical pseudo-schedules.

A node is a configuration ``(k, t)``: global representation index ``k``
(interval-major position in the concatenation of the sigma_r orders) and the
start time ``t`` of that representation. The high edge schedules the job and
moves to ``t + p``; the low edge skips it. Every successor is the least later
representation, of a different job, that can complete inside its own
interval. Nodes are stored in topological order (sorted by ``(k, t)``), so
``hi[v] > v`` and ``lo[v] > v`` for every non-terminal child.

The 0-terminal is implicit: a child equal to :data:`ZERO` means "no path".
"""
from __future__ import annotations

import bisect
import copy
from dataclasses import dataclass
from typing import Iterator

from .horizon import Partition
from .instance import Instance

ONE = -1
ZERO = -2


class InfeasibleDiagramError(RuntimeError):
    pass


@dataclass(frozen=True)
class Step:
    job: int
    start: int
    completion: int
    interval: int


@dataclass(frozen=True)
class PseudoSchedule:
    high_edges: tuple[Step, ...]
    cost: int
    nodes: tuple[int, ...] = ()

    @property
    def jobs(self) -> tuple[int, ...]:
        return tuple(s.job for s in self.high_edges)


class Diagram:
    """Reduced diagram plus a per-copy ``alive`` mask over high edges.

    High edge ids coincide with node ids (every node has exactly one high
    edge). ``restricted`` hands out copies that share the structure but own
    their mask.
    """

    def __init__(self, instance: Instance, partition: Partition):
        if not partition.permutations:
            raise ValueError("partition has no permutations")
        self.instance = instance
        self.partition = partition
        n, q = instance.n, partition.q
        self.n, self.q, self.m = n, q, instance.m
        p = instance.p
        self.rep_job = [job for sigma in partition.permutations for job in sigma]
        self.rep_interval = [r + 1 for r in range(q) for _ in range(n)]
        pos = [[0] * (n + 1) for _ in range(q)]
        for r, sigma in enumerate(partition.permutations):
            for i, job in enumerate(sigma):
                pos[r][job] = i

        feasible_cache: dict[int, tuple[list, list]] = {}

        def feasible(t):
            # representations whose completion t + p_j lands in their interval
            hit = feasible_cache.get(t)
            if hit is None:
                ks = []
                for j in range(1, n + 1):
                    r = partition.interval_of(t + p[j - 1])
                    if r:
                        ks.append((r - 1) * n + pos[r - 1][j])
                ks.sort()
                hit = (ks, [self.rep_job[k] for k in ks])
                feasible_cache[t] = hit
            return hit

        def minjob(k, t, skip_job):
            ks, jobs = feasible(t)
            a = bisect.bisect_right(ks, k)
            while a < len(ks):
                if jobs[a] != skip_job:
                    return ks[a]
                a += 1
            return None

        k0 = minjob(-1, 0, None)
        if k0 is None:
            raise InfeasibleDiagramError("no job fits the horizon")
        index = {(k0, 0): 0}
        configs = [(k0, 0)]
        raw_hi, raw_lo = [], []
        head = 0
        while head < len(configs):
            k, t = configs[head]
            head += 1
            j = self.rep_job[k]
            children = []
            for t2 in (t + p[j - 1], t):
                k2 = minjob(k, t2, j)
                if k2 is None:
                    children.append(ONE if t2 > 0 else ZERO)
                    continue
                key = (k2, t2)
                c = index.get(key)
                if c is None:
                    c = index[key] = len(configs)
                    configs.append(key)
                children.append(c)
            raw_hi.append(children[0])
            raw_lo.append(children[1])

        order = sorted(range(len(configs)), key=lambda v: configs[v])
        relabel = {old: new for new, old in enumerate(order)}
        relabel[ONE] = ONE
        relabel[ZERO] = ZERO
        self.node_rep = [configs[v][0] for v in order]
        self.node_start = [configs[v][1] for v in order]
        self.node_job = [self.rep_job[k] for k in self.node_rep]
        self.node_interval = [self.rep_interval[k] for k in self.node_rep]
        self.hi = [relabel[raw_hi[v]] for v in order]
        self.lo = [relabel[raw_lo[v]] for v in order]
        self.cost = [instance.job(j).cost(t + p[j - 1])
                     for j, t in zip(self.node_job, self.node_start)]
        self.alive = bytearray(b"\x01") * len(order)
        # high edges per job sorted by start time
        self.job_edges: list[list[int]] = [[] for _ in range(n + 1)]
        for v in sorted(range(len(order)), key=lambda v: (self.node_start[v], v)):
            self.job_edges[self.node_job[v]].append(v)

    @property
    def root(self) -> int:
        return 0

    def __len__(self) -> int:
        return len(self.hi)

    def restricted(self, alive=None) -> "Diagram":
        clone = copy.copy(self)
        clone.alive = bytearray(self.alive if alive is None else alive)
        return clone

    def completion(self, v: int) -> int:
        return self.node_start[v] + self.instance.p[self.node_job[v] - 1]

    def decode(self, hi_nodes) -> PseudoSchedule:
        steps = tuple(Step(self.node_job[v], self.node_start[v], self.completion(v),
                           self.node_interval[v]) for v in hi_nodes)
        return PseudoSchedule(steps, sum(self.cost[v] for v in hi_nodes), tuple(hi_nodes))

    def paths(self, limit: int | None = None) -> Iterator[tuple[int, ...]]:
        """Depth-first root-to-ONE paths over alive high edges, as high-node tuples."""
        count = 0
        stack = [(self.root, ())]
        while stack:
            v, chosen = stack.pop()
            if v == ONE:
                yield chosen
                count += 1
                if limit is not None and count >= limit:
                    return
                continue
            if v == ZERO:
                continue
            stack.append((self.lo[v], chosen))
            if self.alive[v]:
                stack.append((self.hi[v], chosen + (v,)))

    def path_of_sequence(self, sequence) -> tuple[int, ...] | None:
        """High nodes of the path encoding a machine sequence, or None if unrepresentable."""
        p = self.instance.p
        v, t = self.root, 0
        chosen = []
        for j in sequence:
            while v >= 0 and not (self.node_job[v] == j and self.node_start[v] == t):
                if self.node_start[v] != t:
                    return None
                v = self.lo[v]
            if v < 0 or not self.alive[v]:
                return None
            chosen.append(v)
            t += p[j - 1]
            v = self.hi[v]
        while v >= 0:
            v = self.lo[v]
        if v != ONE or not chosen:
            return None
        return tuple(chosen)

    def to_dot(self) -> str:
        lines = ["digraph bdd {", '  one [shape=box,label="1"];']
        for v in range(len(self)):
            r = self.node_interval[v]
            rank = self.node_rep[v] - (r - 1) * self.n + 1
            lines.append(f'  n{v} [label="j{r}^{rank}={self.node_job[v]}, t={self.node_start[v]}"];')
        for v in range(len(self)):
            for child, style in ((self.hi[v], "solid"), (self.lo[v], "dotted")):
                if child == ZERO or (style == "solid" and not self.alive[v]):
                    continue
                target = "one" if child == ONE else f"n{child}"
                lines.append(f"  n{v} -> {target} [style={style}];")
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_diagram(instance: Instance, partition: Partition) -> Diagram:
    return Diagram(instance, partition)


def enumerate_paths(diagram: Diagram, limit: int) -> list[PseudoSchedule]:
    if limit < 1:
        raise ValueError("limit must be >= 1")
    return [diagram.decode(path) for path in diagram.paths(limit)]


def diagram_stats(diagram: Diagram) -> tuple[int, int, int, int]:
    """``(node_count, hi_edge_count, lo_edge_count, alive_hi_count)``."""
    nodes = len(diagram)
    lo_edges = sum(1 for c in diagram.lo if c != ZERO)
    return nodes, nodes, lo_edges, sum(diagram.alive)
