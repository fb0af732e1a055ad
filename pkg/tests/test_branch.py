import pytest

from bddsched.bench import brute_force_opt
from bddsched.branch import (LEFT, RIGHT, BranchDecision, SolverConfig, apply_branch,
                             schedule_from_flow, select_branch_candidates, solve)
from bddsched.colgen import REPEATS, CgState, run_colgen
from bddsched.diagram import build_diagram
from bddsched.horizon import refine_partition
from bddsched.instance import Instance

from _support import example_instance, oracle_suite, random_instances


def test_example_solution():
    res = solve(example_instance())
    assert res.optimal
    assert res.ub == 4
    assert set(res.schedule.machine_sequences) == {(1, 4, 3), (2,)}
    assert res.stats["lb_root"] == pytest.approx(4.0)
    assert res.stats["time_total"] < 1.0


def test_result_unpacks():
    ub, schedule, stats = solve(example_instance())
    assert ub == schedule.cost == 4
    for key in ("nodes", "cg_iters", "iters_root", "lb_root", "time_lp", "time_total",
                "edges_fixed", "lb", "optimal"):
        assert key in stats


def test_single_job():
    inst = Instance.from_arrays([4], [1], [2], 1)
    res = solve(inst)
    assert res.ub == 6 and res.optimal


@pytest.mark.parametrize("mode", ["no_consecutive", REPEATS])
def test_matches_oracle(mode):
    for inst in oracle_suite(20, 51):
        opt, _ = brute_force_opt(inst)
        res = solve(inst, SolverConfig(mode=mode))
        assert res.optimal and res.ub == opt
        assert res.schedule.cost == opt
        assert res.stats["lb_root"] <= opt + 1e-6


def test_weak_heuristic_still_optimal():
    for inst in oracle_suite(15, 52):
        opt, _ = brute_force_opt(inst)
        res = solve(inst, SolverConfig(heuristic_budget=1, fix_every=10))
        assert res.ub == opt


def test_branching_on_harder_instances():
    # n = 9, wide processing times: exercises the tree with repeats allowed
    for inst in random_instances(6, 53, 9, 9, 20, (2, 3)):
        opt, _ = brute_force_opt(inst)
        res = solve(inst, SolverConfig(mode=REPEATS))
        assert res.optimal and res.ub == opt


def test_node_limit_reports_gap():
    inst = next(random_instances(1, 54, 9, 9, 20, (3,)))
    res = solve(inst, SolverConfig(node_limit=0))
    assert not res.optimal
    assert res.stats["lb"] <= res.ub + 1e-9


def test_branch_candidates_and_children():
    inst = example_instance()
    d = build_diagram(inst, refine_partition(inst))
    starts = sorted(d.job_edges[3], key=lambda v: d.node_start[v])
    x = {starts[0]: 0.5, starts[-1]: 0.5}
    assert d.node_start[starts[0]] < d.node_start[starts[-1]]
    cands = select_branch_candidates(inst, d, x)
    assert cands and cands[0].job == 3
    dec = cands[0]
    assert set(dec.left_edges).isdisjoint(dec.right_edges)
    assert set(dec.left_edges) | set(dec.right_edges) == set(d.job_edges[3])
    for side in (LEFT, RIGHT):
        mask, feasible = apply_branch(d.alive, dec, side, d)
        assert feasible
        assert not any(mask[v] for v in dec.removed(side))
    assert all(d.alive)


def test_branch_that_empties_a_job_is_infeasible():
    inst = example_instance()
    d = build_diagram(inst, refine_partition(inst))
    dec = BranchDecision(1, 100.0, tuple(d.job_edges[1]), ())
    assert apply_branch(d.alive, dec, LEFT, d)[1] is False


def test_integral_flow_decodes():
    inst = example_instance()
    d = build_diagram(inst, refine_partition(inst))
    paths = [d.path_of_sequence((1, 4, 3)), d.path_of_sequence((2,))]
    x = {v: 1.0 for p in paths for v in p}
    sched = schedule_from_flow(inst, d, x)
    assert sched.cost == 4
    x[paths[1][0]] = 0.5
    assert schedule_from_flow(inst, d, x) is None


def test_root_bound_equals_colgen():
    inst = next(random_instances(1, 55, 6, 6, 10, (2,)))
    d = build_diagram(inst, refine_partition(inst))
    state = run_colgen(CgState(inst, d.restricted()))
    res = solve(inst)
    assert res.stats["lb_root"] == pytest.approx(state.lb, abs=1e-5)
