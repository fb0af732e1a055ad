"""Due-date based partition of the horizon and per-interval job orders.

Intervals are half-open on the left, ``I_r = (e_{r-1}, e_r]``. Inside one
interval the jobs that complete there on a common machine can be assumed to
follow a fixed order ``sigma_r``: long jobs first (LPT), then late jobs by
WSPT (ties by LPT) and finally on-time jobs by LPT. Remaining ties go to the
smaller job id.
"""
from __future__ import annotations

import bisect
import functools
from dataclasses import dataclass

from .instance import Instance


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class Partition:
    endpoints: tuple[int, ...]
    permutations: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        e = self.endpoints
        if len(e) < 2 or e[0] != 0:
            raise PartitionError("endpoints must start at 0 and hold at least one interval")
        if any(b <= a for a, b in zip(e, e[1:])):
            raise PartitionError("endpoints must be strictly increasing")
        if self.permutations and len(self.permutations) != len(e) - 1:
            raise PartitionError("one permutation per interval required")

    @property
    def q(self) -> int:
        return len(self.endpoints) - 1

    @property
    def T(self) -> int:
        return self.endpoints[-1]

    def interval(self, r: int) -> tuple[int, int]:
        """Bounds ``(e_{r-1}, e_r)`` of the 1-based interval ``r``."""
        return self.endpoints[r - 1], self.endpoints[r]

    def interval_of(self, t: int) -> int:
        """1-based index r with ``e_{r-1} < t <= e_r``; 0 if t is outside (0, T]."""
        if t <= 0 or t > self.T:
            return 0
        return bisect.bisect_left(self.endpoints, t)

    def dump(self) -> str:
        lines = []
        for r in range(1, self.q + 1):
            lo, hi = self.interval(r)
            sigma = ",".join(map(str, self.permutations[r - 1])) if self.permutations else ""
            lines.append(f"{r}: ({lo},{hi}] σ_{r}=({sigma})")
        return "\n".join(lines)


def base_partition(instance: Instance) -> Partition:
    """Coarsest partition whose endpoints contain every due date inside (0, T)."""
    T = instance.T
    inner = sorted({j.d for j in instance.jobs if 0 < j.d < T})
    return Partition(tuple([0] + inner + [T]))


def interval_permutation(instance: Instance, e_lo: int, e_hi: int) -> tuple[int, ...]:
    if not 0 <= e_lo < e_hi:
        raise PartitionError(f"bad interval ({e_lo},{e_hi}]")
    for j in instance.jobs:
        if e_lo < j.d < e_hi:
            raise PartitionError(f"due date of job {j.id} falls strictly inside ({e_lo},{e_hi}]")
    length = e_hi - e_lo

    def cls(job):
        if job.p >= length:
            return 0
        return 1 if job.d <= e_lo else 2

    def cmp(a, b):
        ca, cb = cls(a), cls(b)
        if ca != cb:
            return ca - cb
        if ca == 1:
            # WSPT: p_a/w_a < p_b/w_b, exact in integers
            lhs, rhs = a.p * b.w, b.p * a.w
            if lhs != rhs:
                return -1 if lhs < rhs else 1
            if a.p != b.p:
                return b.p - a.p
        elif a.p != b.p:
            # on-time shorts and long jobs: LPT
            return b.p - a.p
        return a.id - b.id

    ordered = sorted(instance.jobs, key=functools.cmp_to_key(cmp))
    return tuple(j.id for j in ordered)


def with_permutations(instance: Instance, endpoints) -> Partition:
    endpoints = tuple(endpoints)
    perms = tuple(interval_permutation(instance, endpoints[r - 1], endpoints[r])
                  for r in range(1, len(endpoints)))
    return Partition(endpoints, perms)


def _interval_violations(instance: Instance, r: int, lo: int, hi: int, sigma) -> list:
    out = []
    for a, i in enumerate(sigma):
        ji = instance.job(i)
        if ji.p >= hi - lo:
            continue
        for j in sigma[a + 1:]:
            jj = instance.job(j)
            if hi <= lo + jj.p:
                continue
            if lo >= ji.d + -(-(jj.w * ji.p) // ji.w) - ji.p:
                continue
            out.append((r, i, j))
    return out


def check_appropriate(instance: Instance, partition: Partition) -> list[tuple[int, int, int]]:
    """Pairs ``(r, i, j)`` with i before j in sigma_r violating both sufficient conditions.

    A pair is fine when ``e_r <= e_{r-1} + p_j`` or
    ``e_{r-1} >= d_i + ceil(w_j p_i / w_i) - p_i``. Pairs whose leading job is
    long in the interval are skipped: a long job completing in I_r cannot
    follow another job completing in I_r on the same machine, so its position
    is forced.
    """
    if not partition.permutations:
        raise PartitionError("partition has no permutations")
    violations = []
    for r in range(1, partition.q + 1):
        lo, hi = partition.interval(r)
        violations += _interval_violations(instance, r, lo, hi, partition.permutations[r - 1])
    return violations


def refine_partition(instance: Instance) -> Partition:
    """Split intervals of the base partition until no violating pair remains.

    For the first violating pair (i, j) of an interval the new endpoint
    ``e_{r-1} + p_j`` makes the left piece satisfy the length condition for
    that pair. Intervals are refined independently; unit intervals never
    violate.
    """
    base = base_partition(instance).endpoints
    stack = [(base[r - 1], base[r]) for r in range(len(base) - 1, 0, -1)]
    endpoints = [0]
    while stack:
        lo, hi = stack.pop()
        sigma = interval_permutation(instance, lo, hi)
        violations = _interval_violations(instance, 0, lo, hi, sigma)
        if not violations:
            endpoints.append(hi)
            continue
        cut = lo + instance.job(violations[0][2]).p
        if not lo < cut < hi:
            cut = (lo + hi + 1) // 2
        stack.append((cut, hi))
        stack.append((lo, cut))
    return with_permutations(instance, endpoints)
