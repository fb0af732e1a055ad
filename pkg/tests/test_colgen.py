import numpy as np
import pytest

from bddsched.bench import brute_force_opt
from bddsched.colgen import (INF, NO_CONSECUTIVE, REPEATS, CgConfig, CgState, Column, DualVector,
                             column_from_nodes, fix_edges, integer_bound, lagrangian_lb,
                             price_backward, price_forward, run_colgen, smooth_duals,
                             through_edge_values)
from bddsched.diagram import build_diagram
from bddsched.formulations import build_bddf
from bddsched.heuristic import canonical_sequence
from bddsched.horizon import refine_partition
from bddsched.instance import Instance
from bddsched.lp import solve_lp

from _support import all_optimal_schedules, example_instance, random_instances


def _diagram(inst):
    return build_diagram(inst, refine_partition(inst))


def _random_duals(rng, n):
    # half-integers keep every path sum exact in floating point
    return DualVector(rng.integers(-20, 60, n + 1) / 2.0)


def _enumerated_min(d, duals, mode):
    best = INF
    for nodes in d.paths():
        col = column_from_nodes(d, nodes)
        if mode == NO_CONSECUTIVE and col.has_consecutive_repeat():
            continue
        best = min(best, col.reduced_cost(duals.pi))
    return best


@pytest.mark.parametrize("mode", [REPEATS, NO_CONSECUTIVE])
def test_pricing_matches_enumeration(mode):
    rng = np.random.default_rng(1)
    for inst in random_instances(40, 31, 2, 6, 8, (1, 2, 3)):
        d = _diagram(inst)
        for _ in range(3):
            duals = _random_duals(rng, inst.n)
            col, value, _ = price_backward(d, duals, mode)
            assert value == _enumerated_min(d, duals, mode)
            assert col.reduced_cost(duals.pi) == value
            if mode == NO_CONSECUTIVE:
                assert not col.has_consecutive_repeat()


@pytest.mark.parametrize("mode", [REPEATS, NO_CONSECUTIVE])
def test_forward_and_backward_agree(mode):
    rng = np.random.default_rng(2)
    for inst in random_instances(30, 32, 2, 7, 10, (1, 2, 3)):
        d = _diagram(inst)
        duals = DualVector(rng.normal(0, 10, inst.n + 1))
        _, value, _ = price_backward(d, duals, mode)
        fwd = price_forward(d, duals, mode)
        assert fwd.v1[len(d)] - duals.pi0 == pytest.approx(value, abs=1e-9)


def test_repeat_path_found_only_with_repeats():
    # job 3 twice in a row is the cheapest path once its dual is large
    inst = example_instance()
    d = _diagram(inst)
    duals = DualVector(np.array([0.0, 0.0, 0.0, 50.0, 0.0]))
    col, _, _ = price_backward(d, duals, REPEATS)
    assert col.has_consecutive_repeat()
    col, _, _ = price_backward(d, duals, NO_CONSECUTIVE)
    assert not col.has_consecutive_repeat()


@pytest.mark.parametrize("mode", [REPEATS, NO_CONSECUTIVE])
def test_through_edge_values_match_enumeration(mode):
    rng = np.random.default_rng(4)
    for inst in random_instances(20, 33, 2, 6, 8, (1, 2)):
        d = _diagram(inst)
        duals = _random_duals(rng, inst.n)
        _, _, bwd = price_backward(d, duals, mode)
        fwd = price_forward(d, duals, mode)
        through = through_edge_values(d, duals, fwd, bwd, mode)
        expected = [INF] * len(d)
        for nodes in d.paths():
            col = column_from_nodes(d, nodes)
            if mode == NO_CONSECUTIVE and col.has_consecutive_repeat():
                continue
            for v in nodes:
                expected[v] = min(expected[v], col.reduced_cost(duals.pi))
        assert through == expected


def test_dead_edges_are_skipped():
    inst = example_instance()
    d = _diagram(inst).restricted()
    for v in d.job_edges[1]:
        d.alive[v] = 0
    duals = DualVector(np.array([0.0, 100.0, 1.0, 1.0, 1.0]))
    col, _, _ = price_backward(d, duals)
    assert 1 not in col.jobs


def test_invalid_mode():
    with pytest.raises(ValueError):
        price_backward(_diagram(example_instance()), DualVector(np.zeros(5)), "cycles")


def test_small_helpers():
    assert lagrangian_lb(10.0, -1.5, 2) == 7.0
    assert lagrangian_lb(10.0, 3.0, 2) == 10.0
    assert integer_bound(3.0000001) == 3 and integer_bound(3.2) == 4
    assert integer_bound(INF) == INF
    a, b = DualVector(np.array([1.0, 2.0])), DualVector(np.array([3.0, 4.0]))
    assert np.allclose(smooth_duals(a, b, 0.5).pi, [2.0, 3.0])
    assert smooth_duals(None, b, 0.5) is b
    with pytest.raises(ValueError):
        smooth_duals(a, b, 1.0)
    col = Column((0, 1), (3, 3), 5)
    assert col.has_consecutive_repeat()
    assert col.reduced_cost(np.array([1.0, 0, 0, 2.0, 0])) == 0.0


def test_colgen_matches_compact_bddf_in_repeats_mode():
    for inst in random_instances(40, 34, 2, 6, 8, (1, 2, 3)):
        d = _diagram(inst)
        compact = solve_lp(build_bddf(inst, d).lp).objective
        state = run_colgen(CgState(inst, d.restricted()), CgConfig(mode=REPEATS, fixing=False))
        assert state.status == "optimal"
        assert state.rmp_value == pytest.approx(compact, abs=1e-6)
        assert state.lb == pytest.approx(compact, abs=1e-5)
        nc = run_colgen(CgState(inst, d.restricted()), CgConfig(fixing=False))
        assert nc.rmp_value >= compact - 1e-6


def test_smoothing_keeps_the_bound():
    for inst in random_instances(20, 35, 3, 7, 10, (2, 3)):
        d = _diagram(inst)
        plain = run_colgen(CgState(inst, d.restricted()), CgConfig(alpha=0.0, fixing=False))
        smooth = run_colgen(CgState(inst, d.restricted()), CgConfig(alpha=0.8, fixing=False))
        assert plain.rmp_value == pytest.approx(smooth.rmp_value, abs=1e-6)


def test_simplex_backend_colgen():
    inst = example_instance()
    d = _diagram(inst)
    state = run_colgen(CgState(inst, d.restricted()), CgConfig(backend="simplex", fixing=False))
    assert state.rmp_value == pytest.approx(4.0)


def test_single_job_converges_quickly():
    inst = Instance.from_arrays([4], [2], [3], 1)
    state = run_colgen(CgState(inst, _diagram(inst).restricted()), CgConfig(fixing=False))
    assert state.status == "optimal" and state.iterations <= 2
    assert state.rmp_value == pytest.approx(6.0)


def test_trace_lines():
    state = run_colgen(CgState(example_instance(), _diagram(example_instance()).restricted()))
    assert state.trace and state.trace[0].startswith("it=1 rmp=")


def test_pruning_with_incumbent():
    inst = example_instance()
    state = CgState(inst, _diagram(inst).restricted(), ub=4)
    run_colgen(state, CgConfig())
    assert state.status in ("pruned", "optimal")
    assert integer_bound(state.lb) <= 4


def test_fixing_without_incumbent_removes_nothing():
    inst = example_instance()
    d = _diagram(inst).restricted()
    assert fix_edges(d, DualVector(np.ones(5)), INF) == 0
    assert sum(d.alive) == len(d)


def test_fixing_keeps_optimal_schedules():
    removed_any = False
    for inst in random_instances(30, 36, 3, 6, 8, (1, 2)):
        part = refine_partition(inst)
        d = build_diagram(inst, part)
        opt, _ = brute_force_opt(inst)
        state = run_colgen(CgState(inst, d.restricted(), ub=opt + 1), CgConfig(fixing=False))
        fixed = state.diagram.restricted()
        removed = fix_edges(fixed, state.duals, opt + 1)
        removed_any |= removed > 0
        for sched in all_optimal_schedules(inst, opt):
            seqs = [canonical_sequence(inst, part, s) for s in sched]
            full = [d.path_of_sequence(s) for s in seqs]
            if None in full or sum(d.cost[v] for p in full for v in p) != opt:
                continue
            assert all(fixed.path_of_sequence(s) is not None for s in seqs)
    assert removed_any


def test_column_pool_stays_aligned_after_fixing():
    for inst in random_instances(20, 37, 4, 7, 10, (2, 3)):
        opt, _ = brute_force_opt(inst)
        state = run_colgen(CgState(inst, _diagram(inst).restricted(), ub=opt + 1),
                           CgConfig(fix_every=2))
        assert len(state.lam) == len(state.columns)
