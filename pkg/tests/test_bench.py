import itertools
import math

import pytest

from bddsched.bench import (MAX_ORACLE_JOBS, _best_sequence_dp, best_sequence, brute_force_opt,
                            performance_profile)
from bddsched.instance import Instance, evaluate_schedule, generate_instance

from _support import all_optimal_schedules, example_instance, random_instances


def test_example_optimum():
    cost, sched = brute_force_opt(example_instance())
    assert cost == 4 == sched.cost


def test_single_machine_matches_permutation_scan():
    for inst in random_instances(30, 61, 1, 6, 20, (1,)):
        scan = min(evaluate_schedule(inst, [perm]).cost
                   for perm in itertools.permutations(range(1, inst.n + 1)))
        assert brute_force_opt(inst)[0] == scan


def test_matches_full_assignment_scan():
    for inst in random_instances(15, 62, 2, 5, 10, (2, 3)):
        cost, _ = brute_force_opt(inst)
        assert all_optimal_schedules(inst, cost)
        assert not all_optimal_schedules(inst, cost - 1) if cost > 0 else True


def test_dp_matches_permutations():
    inst = generate_instance(7, 1, 0.4, 0.4, 9, p_max=20)
    block = tuple(range(1, 8))
    assert _best_sequence_dp(inst, block)[0] == best_sequence(inst, block)[0]


def test_oracle_size_limit():
    inst = generate_instance(MAX_ORACLE_JOBS + 1, 2, 0.6, 0.6, 1)
    with pytest.raises(ValueError):
        brute_force_opt(inst)


def test_profile_by_hand():
    times = {"a": [1.0, 2.0, math.inf], "b": [2.0, 2.0, 4.0]}
    rho = performance_profile(times, [1.0, 2.0])
    assert rho["a"] == pytest.approx([2 / 3, 2 / 3])
    assert rho["b"] == pytest.approx([2 / 3, 1.0])


def test_profile_validation():
    with pytest.raises(ValueError):
        performance_profile({}, [1.0])
    with pytest.raises(ValueError):
        performance_profile({"a": [1.0], "b": [1.0, 2.0]}, [1.0])


def test_zero_late_instance():
    inst = Instance.from_arrays([2, 2, 2], [10, 10, 10], [1, 1, 1], 2)
    assert brute_force_opt(inst)[0] == 0
