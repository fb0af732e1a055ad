"""Instance data model for Pm||sum w_j T_j.

Jobs carry an integer processing time, due date and weight. Instances are
immutable; the horizon ``T`` is fixed at construction and defaults to
:func:`horizon_length`.

Instance file format (ASCII, LF terminated)::

    n m
    p_1 d_1 w_1
    ...
    p_n d_n w_n
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

PARAM_LEVELS = (0.2, 0.4, 0.6, 0.8, 1.0)

RESULT_COLUMNS = (
    "instance_id", "n", "m", "ub", "lb", "nodes", "cg_iters",
    "time_lp_s", "time_total_s",
)


class InvalidInstanceError(ValueError):
    pass


class InstanceParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class InvalidScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class Job:
    id: int
    p: int
    d: int
    w: int

    def __post_init__(self):
        if self.p < 1:
            raise InvalidInstanceError(f"job {self.id}: processing time must be >= 1")
        if self.d < 0:
            raise InvalidInstanceError(f"job {self.id}: due date must be >= 0")
        if self.w < 1:
            raise InvalidInstanceError(f"job {self.id}: weight must be >= 1")

    def cost(self, completion: int) -> int:
        return self.w * max(0, completion - self.d)


def horizon_length(jobs: Iterable, m: int) -> int:
    """Safe horizon ``ceil((sum p - p_max) / m) + p_max``.

    ``jobs`` may hold :class:`Job` objects or bare processing times.
    """
    ps = [getattr(j, "p", j) for j in jobs]
    if not ps:
        raise InvalidInstanceError("empty job list")
    if m < 1:
        raise InvalidInstanceError("machine count must be >= 1")
    pmax = max(ps)
    return -(-(sum(ps) - pmax) // m) + pmax


@dataclass(frozen=True)
class Instance:
    jobs: tuple[Job, ...]
    m: int
    T: int = 0

    def __post_init__(self):
        jobs = tuple(self.jobs)
        object.__setattr__(self, "jobs", jobs)
        if not jobs:
            raise InvalidInstanceError("instance needs at least one job")
        if self.m < 1:
            raise InvalidInstanceError("machine count must be >= 1")
        if len(jobs) < self.m:
            raise InvalidInstanceError("need n >= m")
        for k, job in enumerate(jobs, start=1):
            if job.id != k:
                raise InvalidInstanceError("job ids must be 1..n in order")
        if self.T == 0:
            object.__setattr__(self, "T", horizon_length(jobs, self.m))
        if self.T < max(j.p for j in jobs):
            raise InvalidInstanceError("horizon shorter than the longest job")

    @classmethod
    def from_arrays(cls, p: Sequence[int], d: Sequence[int], w: Sequence[int],
                    m: int, T: int = 0) -> "Instance":
        if not (len(p) == len(d) == len(w)):
            raise InvalidInstanceError("p, d, w differ in length")
        jobs = tuple(Job(k + 1, int(p[k]), int(d[k]), int(w[k])) for k in range(len(p)))
        return cls(jobs, m, T)

    @property
    def n(self) -> int:
        return len(self.jobs)

    @property
    def p(self) -> tuple[int, ...]:
        return tuple(j.p for j in self.jobs)

    @property
    def d(self) -> tuple[int, ...]:
        return tuple(j.d for j in self.jobs)

    @property
    def w(self) -> tuple[int, ...]:
        return tuple(j.w for j in self.jobs)

    def job(self, job_id: int) -> Job:
        return self.jobs[job_id - 1]


@dataclass(frozen=True)
class Schedule:
    machine_sequences: tuple[tuple[int, ...], ...]
    completion_times: dict = field(compare=False)
    cost: int

    @property
    def loads(self) -> tuple[int, ...]:
        return tuple(self.completion_times[s[-1]] if s else 0 for s in self.machine_sequences)


def evaluate_schedule(instance: Instance, machine_sequences: Sequence[Sequence[int]]) -> Schedule:
    """Stack each machine's jobs without idle time and sum weighted tardiness."""
    if len(machine_sequences) > instance.m:
        raise InvalidScheduleError(f"{len(machine_sequences)} sequences for {instance.m} machines")
    seqs = [tuple(int(j) for j in s) for s in machine_sequences]
    seqs += [()] * (instance.m - len(seqs))
    seen = [j for s in seqs for j in s]
    if sorted(seen) != list(range(1, instance.n + 1)):
        raise InvalidScheduleError("sequences must contain every job exactly once")
    completion = {}
    cost = 0
    for s in seqs:
        t = 0
        for j in s:
            job = instance.jobs[j - 1]
            t += job.p
            completion[j] = t
            cost += job.cost(t)
    return Schedule(tuple(seqs), completion, cost)


class SplitMix64:
    """Portable 64-bit generator; identical streams on every platform."""

    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self.MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return z ^ (z >> 31)

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi], rejection sampled (no modulo bias)."""
        if hi < lo:
            raise ValueError("empty range")
        span = hi - lo + 1
        limit = (1 << 64) - ((1 << 64) % span)
        while True:
            x = self.next_u64()
            if x < limit:
                return lo + x % span

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def choice(self, seq):
        return seq[self.randint(0, len(seq) - 1)]

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            k = self.randint(0, i)
            items[i], items[k] = items[k], items[i]


def _level(x: float, name: str) -> Fraction:
    for lv in PARAM_LEVELS:
        if abs(x - lv) < 1e-9:
            return Fraction(round(lv * 10), 10)
    raise ValueError(f"{name} must be one of {PARAM_LEVELS}, got {x}")


def due_date_range(P: int, rdd: float, tf: float) -> tuple[int, int]:
    """Integer range of raw due dates for total processing time ``P``."""
    r, t = _level(rdd, "rdd"), _level(tf, "tf")
    lo = Fraction(P) * (1 - t - r) / 2
    hi = Fraction(P) * (1 - t + r) / 2
    return -((-lo.numerator) // lo.denominator), hi.numerator // hi.denominator


def generate_instance(n: int, m: int, rdd: float, tf: float, seed: int,
                      p_max: int = 100, w_max: int = 10) -> Instance:
    """Potts-style random instance with due dates divided by ``m``.

    The random stream does not depend on ``m``, so the same seed yields the
    same processing times, weights and raw due dates for every machine count.
    """
    if n < 1 or m < 1:
        raise InvalidInstanceError("need n >= 1 and m >= 1")
    if n < m:
        raise InvalidInstanceError("need n >= m")
    _level(rdd, "rdd")
    _level(tf, "tf")
    rng = SplitMix64(seed)
    p = [rng.randint(1, p_max) for _ in range(n)]
    w = [rng.randint(1, w_max) for _ in range(n)]
    lo, hi = due_date_range(sum(p), rdd, tf)
    raw = [rng.randint(lo, hi) if hi >= lo else lo for _ in range(n)]
    d = [max(0, r) // m for r in raw]
    return Instance.from_arrays(p, d, w, m)


def parse_instance(text: str) -> Instance:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise InstanceParseError("empty input", 1)

    def ints(lineno: int, expected: int) -> list[int]:
        toks = lines[lineno - 1].split()
        if len(toks) != expected:
            raise InstanceParseError(f"expected {expected} integers, got {len(toks)}", lineno)
        try:
            return [int(t) for t in toks]
        except ValueError:
            raise InstanceParseError("non-integer token", lineno) from None

    n, m = ints(1, 2)
    if n < 1 or m < 1:
        raise InstanceParseError("header needs n >= 1 and m >= 1", 1)
    if len(lines) - 1 != n:
        bad_line = len(lines) + 1 if len(lines) - 1 < n else n + 2
        raise InstanceParseError(f"header announces {n} jobs, found {len(lines) - 1} rows",
                                 bad_line)
    p, d, w = [], [], []
    for k in range(n):
        pk, dk, wk = ints(k + 2, 3)
        p.append(pk)
        d.append(dk)
        w.append(wk)
    try:
        return Instance.from_arrays(p, d, w, m)
    except InvalidInstanceError as exc:
        raise InstanceParseError(str(exc), 1) from None


def write_instance(instance: Instance) -> str:
    rows = [f"{instance.n} {instance.m}"]
    rows += [f"{j.p} {j.d} {j.w}" for j in instance.jobs]
    return "\n".join(rows) + "\n"


def read_instance(path) -> Instance:
    with open(path) as fh:
        return parse_instance(fh.read())
