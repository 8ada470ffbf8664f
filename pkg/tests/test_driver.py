"""The solving loop: exactness, certification, limits, cut pools."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from generators import (
    DEMO_OBJECTIVE,
    DEMO_PATH,
    TWO_ROUND_OBJECTIVE,
    demo_instance,
    framed_instance,
    random_instance,
    tightening_instance,
    two_round_instance,
)
from liftedpaths.constraints import SolutionValues, base_var, lift_var, node_var
from liftedpaths.driver import (
    SolverConfig,
    certify,
    master_variables,
    solve,
)
from liftedpaths.instance import FlowSolution, active_st_paths
from liftedpaths.milp import check_violation
from liftedpaths.oracle import brute_force_optimum

SEEDS = st.integers(0, 10_000)


def test_demo_solves_in_one_round():
    res = solve(demo_instance())
    assert res.status == "optimal"
    assert res.certified
    assert res.objective == pytest.approx(DEMO_OBJECTIVE, abs=1e-9)
    assert res.rounds == 1
    assert active_st_paths(demo_instance(), res.solution) == [DEMO_PATH]
    assert len(res.trace) == 1
    stats = res.trace[0]
    assert stats.round == 1
    assert stats.master_objective == pytest.approx(DEMO_OBJECTIVE)
    assert res.cuts


def test_two_round_instance_needs_one_connectivity_cut():
    inst = two_round_instance()
    res = solve(inst)
    assert res.status == "optimal"
    assert res.certified
    assert res.rounds == 2
    assert res.objective == pytest.approx(TWO_ROUND_OBJECTIVE, abs=1e-9)
    assert [s.master_objective for s in res.trace] == [
        pytest.approx(TWO_ROUND_OBJECTIVE)
    ] * 2
    assert res.trace[0].cuts_added == {"lifted-path": 1}
    assert res.trace[1].cuts_added == {}


def test_round_limit_returns_the_uncertified_master():
    inst = two_round_instance()
    res = solve(inst, SolverConfig(max_rounds=1))
    assert res.status == "round_limit"
    assert not res.certified
    assert res.solution is not None
    assert res.objective == pytest.approx(TWO_ROUND_OBJECTIVE)


def test_round_limit_zero_yields_no_solution():
    res = solve(demo_instance(), SolverConfig(max_rounds=0))
    assert res.status == "round_limit"
    assert res.solution is None
    assert res.objective is None


def test_time_limit_zero_stops_immediately():
    res = solve(demo_instance(), SolverConfig(time_limit=0.0))
    assert res.status == "time_limit"


def test_master_node_limit_surfaces_as_a_round_limit():
    res = solve(tightening_instance(), SolverConfig(node_limit=1))
    assert res.status == "round_limit"
    assert res.objective == pytest.approx(-2.4)


def test_the_returned_cut_pool_certifies_in_one_round():
    inst = two_round_instance()
    first = solve(inst)
    assert first.rounds == 2
    again = solve(inst, initial_cuts=first.cuts)
    assert again.rounds == 1
    assert again.certified
    assert again.objective == pytest.approx(first.objective, abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(SEEDS)
def test_solver_is_exact_without_symmetric_rows(seed):
    rng = random.Random(seed)
    inst = random_instance(rng, max_inner=9, max_base=18, max_lift=6)
    res = solve(inst, SolverConfig(include_symmetric=False))
    assert res.status == "optimal"
    assert res.objective == pytest.approx(
        brute_force_optimum(inst).objective, abs=1e-9
    )


def test_framed_instances_solve_with_lifted_flow_rows():
    inst = framed_instance()
    plain = solve(inst)
    framed = solve(inst, SolverConfig(lifted_flow=True))
    assert framed.status == plain.status == "optimal"
    assert framed.objective == pytest.approx(plain.objective, abs=1e-9)
    assert framed.objective == pytest.approx(
        brute_force_optimum(inst).objective, abs=1e-9
    )


def test_certification_is_empty_only_for_honest_labels():
    inst = demo_instance()
    sol = solve(inst).solution
    assert certify(inst, sol) == []
    values_honest = SolutionValues(inst, sol)
    for index in range(len(sol.y_lifted)):
        labels = tuple(
            1 - b if i == index else b for i, b in enumerate(sol.y_lifted)
        )
        lying = FlowSolution(sol.x, sol.y, labels, sol.objective)
        rows = certify(inst, lying)
        assert rows
        values = SolutionValues(inst, lying)
        for row in rows:
            assert check_violation(row, values) > 0.0
            assert check_violation(row, values_honest) == 0.0


def test_master_variables_align_with_the_cost_vector():
    inst = demo_instance()
    variables, costs = master_variables(inst)
    assert len(variables) == inst.n + len(inst.base_index) + len(inst.lifted_index)
    assert len(costs) == len(variables)
    expected = {base_var(i): inst.base_cost(i) for i in range(len(inst.base_index))}
    expected |= {lift_var(i): inst.lifted_cost(i) for i in range(len(inst.lifted_index))}
    expected |= {node_var(v): inst.node_costs[v] for v in inst.inner_nodes()}
    assert dict(zip(variables, costs)) == expected
