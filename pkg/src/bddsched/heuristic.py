"""Iterated local search for an initial incumbent and starting columns."""
from __future__ import annotations

from .colgen import Column, column_from_nodes
from .diagram import Diagram
from .horizon import Partition
from .instance import Instance, Schedule, SplitMix64, evaluate_schedule

STAGNATION = 200


def _machine_cost(instance: Instance, seq) -> int:
    t = cost = 0
    jobs = instance.jobs
    for j in seq:
        job = jobs[j - 1]
        t += job.p
        if t > job.d:
            cost += job.w * (t - job.d)
    return cost


def edd_list_schedule(instance: Instance) -> list[list[int]]:
    """Earliest due date first, each job onto the least-loaded machine."""
    machines: list[list[int]] = [[] for _ in range(instance.m)]
    loads = [0] * instance.m
    for job in sorted(instance.jobs, key=lambda j: (j.d, j.id)):
        k = min(range(instance.m), key=lambda i: (loads[i], i))
        machines[k].append(job.id)
        loads[k] += job.p
    return machines


def _best_insertion(instance, machines, costs, j):
    best = None
    for k, seq in enumerate(machines):
        for pos in range(len(seq) + 1):
            c = _machine_cost(instance, seq[:pos] + [j] + seq[pos:]) - costs[k]
            if best is None or c < best[0]:
                best = (c, k, pos)
    _, k, pos = best
    machines[k].insert(pos, j)
    costs[k] = _machine_cost(instance, machines[k])


def _random_move(instance, machines, rng):
    """Return ``{machine: new_sequence}`` for one random neighbour, or None."""
    m = len(machines)
    kind = rng.randint(0, 4)
    a = rng.randint(0, m - 1)
    sa = machines[a]
    if kind == 0 and len(sa) >= 2:  # swap inside a machine
        i, k = rng.randint(0, len(sa) - 1), rng.randint(0, len(sa) - 1)
        if i == k:
            return None
        s = list(sa)
        s[i], s[k] = s[k], s[i]
        return {a: s}
    if kind == 1 and len(sa) >= 2:  # reinsertion inside a machine
        s = list(sa)
        j = s.pop(rng.randint(0, len(s) - 1))
        s.insert(rng.randint(0, len(s)), j)
        return {a: s} if s != sa else None
    if m < 2:
        return None
    b = rng.randint(0, m - 2)
    b += b >= a
    sb = machines[b]
    if kind == 2 and len(sa) >= 2:  # move a job to another machine
        s = list(sa)
        j = s.pop(rng.randint(0, len(s) - 1))
        t = list(sb)
        t.insert(rng.randint(0, len(t)), j)
        return {a: s, b: t}
    if kind == 3 and sa and sb:  # swap jobs across machines
        i, k = rng.randint(0, len(sa) - 1), rng.randint(0, len(sb) - 1)
        s, t = list(sa), list(sb)
        s[i], t[k] = t[k], s[i]
        return {a: s, b: t}
    if kind == 4 and len(sa) >= 3:  # block of 2-3 jobs to another machine
        size = rng.randint(2, min(3, len(sa) - 1))
        i = rng.randint(0, len(sa) - size)
        block = sa[i:i + size]
        s = sa[:i] + sa[i + size:]
        pos = rng.randint(0, len(sb))
        return {a: s, b: sb[:pos] + block + sb[pos:]}
    return None


def _descent(instance, machines, costs):
    """First-improvement descent over reinsertion and swap moves (deterministic)."""
    improved = True
    while improved:
        improved = False
        for a in range(len(machines)):
            for i in range(len(machines[a])):
                if len(machines[a]) < 2:
                    break
                if i >= len(machines[a]):
                    break
                j = machines[a][i]
                rest = machines[a][:i] + machines[a][i + 1:]
                for b in range(len(machines)):
                    base = rest if b == a else machines[b]
                    old = costs[a] + (0 if b == a else costs[b])
                    for pos in range(len(base) + 1):
                        cand = base[:pos] + [j] + base[pos:]
                        ca = _machine_cost(instance, rest) if b != a else 0
                        cb = _machine_cost(instance, cand)
                        if ca + cb < old:
                            if b == a:
                                machines[a] = cand
                                costs[a] = cb
                            else:
                                machines[a], machines[b] = rest, cand
                                costs[a], costs[b] = ca, cb
                            improved = True
                            break
                    if improved:
                        break
                if improved:
                    break
            if improved:
                break
        if improved:
            continue
        for a in range(len(machines)):
            for b in range(a, len(machines)):
                for i in range(len(machines[a])):
                    for k in range(i + 1 if a == b else 0, len(machines[b])):
                        s, t = list(machines[a]), list(machines[b])
                        if a == b:
                            s[i], s[k] = s[k], s[i]
                            c = _machine_cost(instance, s)
                            if c < costs[a]:
                                machines[a], costs[a] = s, c
                                improved = True
                        else:
                            s[i], t[k] = t[k], s[i]
                            cs, ct = _machine_cost(instance, s), _machine_cost(instance, t)
                            if cs + ct < costs[a] + costs[b]:
                                machines[a], machines[b] = s, t
                                costs[a], costs[b] = cs, ct
                                improved = True
                        if improved:
                            break
                    if improved:
                        break
                if improved:
                    break
            if improved:
                break


def local_search(instance: Instance, machines, budget: int, seed: int) -> Schedule:
    """Iterated local search from ``machines``; machines are never left empty."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    rng = SplitMix64(seed)
    cur = [list(s) for s in machines]
    costs = [_machine_cost(instance, s) for s in cur]
    # descend at every new best so a longer budget only extends the same trajectory
    _descent(instance, cur, costs)
    best, best_cost = [list(s) for s in cur], sum(costs)
    stall = 0
    for _ in range(budget):
        move = _random_move(instance, cur, rng)
        if move is None or any(not s for s in move.values()):
            stall += 1
        else:
            delta = sum(_machine_cost(instance, s) - costs[k] for k, s in move.items())
            if delta < 0:
                for k, s in move.items():
                    cur[k] = s
                    costs[k] = _machine_cost(instance, s)
                stall = 0
                if sum(costs) < best_cost:
                    _descent(instance, cur, costs)
                    best, best_cost = [list(s) for s in cur], sum(costs)
            else:
                stall += 1
        if stall >= STAGNATION:
            stall = 0
            cur = [list(s) for s in best]
            removable = [j for s in cur if len(s) > 1 for j in s]
            rng.shuffle(removable)
            for j in removable[:3]:
                for s in cur:
                    if j in s and len(s) > 1:
                        s.remove(j)
                        break
                else:
                    continue
                costs = [_machine_cost(instance, s) for s in cur]
                _best_insertion(instance, cur, costs, j)
            costs = [_machine_cost(instance, s) for s in cur]
            if sum(costs) < best_cost:
                _descent(instance, cur, costs)
                best, best_cost = [list(s) for s in cur], sum(costs)
    return evaluate_schedule(instance, best)


def initial_solution(instance: Instance, budget: int = 10_000, seed: int = 0) -> Schedule:
    return local_search(instance, edd_list_schedule(instance), budget, seed)


def canonical_sequence(instance: Instance, partition: Partition, seq) -> list[int]:
    """Reorder runs of jobs completing in the same interval by that interval's sigma."""
    seq = list(seq)
    rank = [{j: i for i, j in enumerate(s)} for s in partition.permutations]
    for _ in range(len(seq) + 1):
        t, intervals = 0, []
        for j in seq:
            t += instance.job(j).p
            intervals.append(partition.interval_of(t))
        out, a = [], 0
        while a < len(seq):
            b = a
            while b + 1 < len(seq) and intervals[b + 1] == intervals[a]:
                b += 1
            run = seq[a:b + 1]
            r = intervals[a]
            out += sorted(run, key=lambda j: rank[r - 1][j]) if r else run
            a = b + 1
        if out == seq:
            break
        seq = out
    return seq


def schedule_to_columns(instance: Instance, partition: Partition, diagram: Diagram,
                        schedule: Schedule) -> list[Column] | None:
    """One column per machine, or None when some sequence has no diagram path."""
    columns = []
    for seq in schedule.machine_sequences:
        if not seq:
            continue
        path = diagram.path_of_sequence(seq)
        if path is None:
            path = diagram.path_of_sequence(canonical_sequence(instance, partition, seq))
        if path is None:
            return None
        columns.append(column_from_nodes(diagram, path))
    return columns
