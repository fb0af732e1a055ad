import numpy as np
import pytest

from bddsched.bench import brute_force_opt
from bddsched.diagram import build_diagram
from bddsched.formulations import (CostTable, build_atif, build_bddf, build_tif,
                                   project_bddf_to_tif, start_cost)
from bddsched.horizon import refine_partition
from bddsched.instance import Instance
from bddsched.lp import solve_lp

from _support import example_instance, random_instances

TOL = 1e-6


def _feasible(lp, x):
    r = lp.A @ x - lp.b
    eq = np.array([s == "=" for s in lp.senses])
    return np.all(np.abs(r[eq]) <= 1e-9) and np.all(r[~eq] <= 1e-9) and np.all(x >= 0)


def test_cost_tables_agree():
    inst = example_instance()
    costs = CostTable(inst)
    for j in range(1, inst.n + 1):
        for t in range(0, inst.T):
            assert costs.tif(j, t + 1) == costs.atif(j, t) == start_cost(inst, j, t)
    assert start_cost(inst, 3, 6) == 4


def test_stated_tif_point_is_feasible():
    inst = example_instance()
    model = build_tif(inst)
    y = {(1, 1): .5, (1, 3): .5, (3, 1): .5, (3, 7): .5, (2, 1): 1.0, (4, 5): 1.0}
    x = model.point(y)
    assert _feasible(model.lp, x)
    assert model.lp.c @ x == pytest.approx(2.0)


def test_example_tif_bound():
    inst = example_instance()
    model = build_tif(inst)
    assert model.lp.num_vars == 32
    assert solve_lp(model.lp).objective == pytest.approx(2.0)


def test_stated_atif_point_is_feasible():
    inst = example_instance()
    model = build_atif(inst)
    vals = {(0, 2, 0): 1, (0, 4, 0): 1, (4, 3, 4): 1, (2, 1, 6): 1, (1, 0, 8): 1, (3, 0, 8): 1,
            (0, 0, 9): 2, (0, 0, 10): 2, (0, 0, 11): 2}
    x = model.point(vals)
    assert _feasible(model.lp, x)
    # schedules (2,1) and (4,3): job 1 completes at 8, four units late
    assert model.lp.c @ x == pytest.approx(8.0)
    y = model.project_to_tif(inst, x)
    assert _feasible(build_tif(inst).lp, build_tif(inst).point(y))


def test_example_bddf_and_atif_bounds():
    inst = example_instance()
    d = build_diagram(inst, refine_partition(inst))
    assert solve_lp(build_bddf(inst, d).lp).objective == pytest.approx(4.0)
    assert solve_lp(build_atif(inst).lp).objective == pytest.approx(4.0)


def test_atif_has_no_self_arcs():
    model = build_atif(example_instance())
    assert all(i != j or i == 0 for (i, j, _t) in model.index)


def test_bddf_projection_is_tif_feasible():
    for inst in random_instances(30, 21, 2, 6, 8, (1, 2, 3)):
        d = build_diagram(inst, refine_partition(inst))
        model = build_bddf(inst, d)
        sol = solve_lp(model.lp)
        tif = build_tif(inst)
        y = tif.point(project_bddf_to_tif(d, model, sol.x))
        r = tif.lp.A @ y - tif.lp.b
        eq = np.array([s == "=" for s in tif.lp.senses])
        assert np.all(np.abs(r[eq]) <= 1e-6) and np.all(r[~eq] <= 1e-6)
        assert tif.lp.c @ y == pytest.approx(sol.objective, abs=1e-6)


def test_bounds_sandwich():
    for inst in random_instances(40, 22, 2, 6, 8, (1, 2, 3)):
        opt, _ = brute_force_opt(inst)
        d = build_diagram(inst, refine_partition(inst))
        tif = solve_lp(build_tif(inst).lp).objective
        atif = solve_lp(build_atif(inst).lp).objective
        bddf = solve_lp(build_bddf(inst, d).lp).objective
        assert tif <= bddf + TOL and bddf <= opt + TOL
        assert tif <= atif + TOL and atif <= opt + TOL


def test_one_job_per_machine_is_exact():
    inst = Instance.from_arrays([3, 5, 2], [1, 4, 2], [2, 1, 3], 3)
    d = build_diagram(inst, refine_partition(inst))
    opt, _ = brute_force_opt(inst)
    assert opt == 2 * 2 + 1
    for lp in (build_tif(inst).lp, build_atif(inst).lp, build_bddf(inst, d).lp):
        assert solve_lp(lp).objective == pytest.approx(opt)


def test_simplex_backend_matches_on_example():
    inst = example_instance()
    d = build_diagram(inst, refine_partition(inst))
    for lp in (build_tif(inst).lp, build_bddf(inst, d).lp):
        assert solve_lp(lp, "simplex").objective == pytest.approx(solve_lp(lp).objective)
