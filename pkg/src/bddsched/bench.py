"""Brute-force oracle and performance profiles."""
from __future__ import annotations

import itertools
import math
from typing import Mapping, Sequence

from .instance import Instance, Schedule, evaluate_schedule

MAX_ORACLE_JOBS = 10
MAX_PERMUTED_BLOCK = 8


def _sequence_cost(instance: Instance, seq) -> int:
    t = cost = 0
    for j in seq:
        job = instance.jobs[j - 1]
        t += job.p
        cost += job.w * max(0, t - job.d)
    return cost


def _best_sequence_dp(instance: Instance, block: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """Single-machine subset DP: the last job of S completes at p(S)."""
    k = len(block)
    ps = [instance.job(j).p for j in block]
    best = {0: (0, ())}
    for mask in range(1, 1 << k):
        total = sum(ps[i] for i in range(k) if mask >> i & 1)
        cand = None
        for i in range(k):
            if mask >> i & 1:
                prev_cost, prev_seq = best[mask ^ (1 << i)]
                job = instance.job(block[i])
                c = prev_cost + job.w * max(0, total - job.d)
                if cand is None or c < cand[0]:
                    cand = (c, prev_seq + (block[i],))
        best[mask] = cand
    return best[(1 << k) - 1]


def best_sequence(instance: Instance, block: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    if len(block) > MAX_PERMUTED_BLOCK:
        return _best_sequence_dp(instance, block)
    best = None
    for perm in itertools.permutations(block):
        c = _sequence_cost(instance, perm)
        if best is None or c < best[0]:
            best = (c, perm)
    return best


def _partitions(items: list[int], blocks: int):
    """Set partitions into at most ``blocks`` unlabeled blocks (restricted growth)."""
    n = len(items)
    labels = [0] * n

    def rec(i, used):
        if i == n:
            yield [tuple(items[k] for k in range(n) if labels[k] == b) for b in range(used)]
            return
        for b in range(min(used + 1, blocks)):
            labels[i] = b
            yield from rec(i + 1, max(used, b + 1))

    yield from rec(0, 0)


def brute_force_opt(instance: Instance) -> tuple[int, Schedule]:
    """Exact optimum by enumerating machine assignments and sequences."""
    if instance.n > MAX_ORACLE_JOBS:
        raise ValueError(f"oracle limited to n <= {MAX_ORACLE_JOBS}")
    memo: dict = {}
    best = None
    for blocks in _partitions([j.id for j in instance.jobs], instance.m):
        total, seqs = 0, []
        for block in blocks:
            if block not in memo:
                memo[block] = best_sequence(instance, block)
            c, s = memo[block]
            total += c
            seqs.append(s)
            if best is not None and total >= best[0]:
                break
        else:
            if best is None or total < best[0]:
                best = (total, seqs)
    cost, seqs = best
    return cost, evaluate_schedule(instance, seqs)


def performance_profile(times: Mapping[str, Sequence[float]],
                        taus: Sequence[float]) -> dict[str, list[float]]:
    """Fraction of instances each method solves within ``tau`` times the best time.

    Unsolved runs are ``inf`` and never count.
    """
    if not times:
        raise ValueError("need at least one method")
    methods = list(times)
    count = len(times[methods[0]])
    if count == 0:
        raise ValueError("empty instance set")
    if any(len(times[s]) != count for s in methods):
        raise ValueError("every method needs one time per instance")
    ratios = {s: [] for s in methods}
    for p in range(count):
        best = min(times[s][p] for s in methods)
        for s in methods:
            t = times[s][p]
            ratios[s].append(t / best if math.isfinite(t) and best > 0 else
                             (1.0 if math.isfinite(t) and t == best else math.inf))
    return {s: [sum(1 for r in ratios[s] if r <= tau) / count for tau in taus]
            for s in methods}
