import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from idvd_dock.model import DomainError, NedVector, SolverOptions, end_state, with_solver, wrap_angle
from idvd_dock.penalty import evaluate_cost, zone_clearance
from idvd_dock.planner import (
    SENTINEL_COST, DecisionVector, InfeasibleDecision, assemble, fold_into_domain,
    initial_guess, objective, optimize, planning_scenario, simplex_steps,
)

ZERO = NedVector(0, 0, 0)


def test_decision_vector_round_trip():
    d = DecisionVector(10.0, NedVector(1, 2, 3), NedVector(4, 5, 6), 0.5)
    assert DecisionVector.from_array(d.as_array()) == d
    assert d.as_array().shape == (8,)
    with pytest.raises(ValueError):
        DecisionVector.from_array([1, 2, 3])


@pytest.mark.parametrize("tau, lam", [(0.0, 0.0), (-1.0, 0.0), (1.0, -1.0), (math.nan, 0.0)])
def test_decision_vector_domain(tau, lam):
    with pytest.raises(DomainError):
        DecisionVector(tau, ZERO, ZERO, lam)


@given(st.lists(st.floats(-1e3, 1e3), min_size=8, max_size=8))
def test_fold_lands_in_domain(x):
    y = fold_into_domain(np.array(x))
    assert y[0] > 0 and y[7] > -1
    DecisionVector.from_array(y)
    if x[0] > 0 and x[7] > -1:
        np.testing.assert_array_equal(y, x)


def test_initial_guess(nominal):
    g = initial_guess(nominal)
    assert g.tau_f == pytest.approx(math.sqrt(10650) / 1.25, rel=1e-12)
    assert g.tau_f == pytest.approx(82.559, abs=1e-3)
    assert g.jerk0 == ZERO and g.jerkf == ZERO and g.lambda_m == 0.0
    same = replace(nominal.boundary, initial=end_state(nominal.dock.position, 0.0, 0.0, 1.0))
    with pytest.raises(DomainError):
        initial_guess(replace(nominal, boundary=same))


def test_initial_guess_without_forward_cruise(nominal):
    from idvd_dock.model import VehicleLimits
    sc = replace(nominal, limits=VehicleLimits(surge=(-1.0, 0.0)))
    g = initial_guess(sc)
    assert g.tau_f == pytest.approx(math.sqrt(10650) / 1.125)


def test_simplex_steps(nominal):
    g = initial_guess(nominal)
    steps = simplex_steps(g, SolverOptions())
    np.testing.assert_allclose(steps, [0.1 * g.tau_f] + [0.05] * 6 + [0.2])


def test_assemble_is_pure(nominal):
    d = DecisionVector(80.0, NedVector(0.01, 0, 0), NedVector(0, -0.01, 0), 0.3)
    t1, r1 = assemble(d, nominal)
    t2, r2 = assemble(d, nominal)
    assert r1 == r2
    for name in ("t", "position", "body", "course", "pitch_rate"):
        assert np.array_equal(getattr(t1, name), getattr(t2, name))
    assert evaluate_cost(t1, nominal) == r1


def test_sentinel_on_degenerate_geometry():
    from idvd_dock.model import scenario_from_dict
    sc = scenario_from_dict({
        "boundary": {"initial": {"position": [0, 0, 50], "yaw": 0.0, "velocity": [0, 0, -1]},
                     "final": {"velocity": [0, 0, -1]}},
        "dock": {"position": [0, 0, 10], "yaw": 0.0, "cone_length": 1.0, "outer_radius": 0.6, "inner_radius": 0.1},
    })
    d = DecisionVector(40.0, ZERO, ZERO, 0.0)
    with pytest.raises(InfeasibleDecision) as info:
        assemble(d, sc)
    assert info.value.cost == SENTINEL_COST + 40.0
    assert objective(sc)(d.as_array()) == SENTINEL_COST + 40.0


def test_planning_scenario_backs_off(nominal):
    p = planning_scenario(nominal)
    m = nominal.solver.margin
    assert p.limits == nominal.limits.tightened(m)
    assert p.zones[0].radius == pytest.approx(nominal.zones[0].radius * (1 + m))
    assert p.dock.entry_cone_angle < nominal.dock.entry_cone_angle
    plain = with_solver(nominal, margin=0.0)
    assert planning_scenario(plain) is plain


def test_nominal_plan(nominal, nominal_plan):
    res = nominal_plan
    traj = res.trajectory
    assert res.feasible
    assert res.wall_time < 60
    assert all(c.peak < 1e-3 for c in res.report.channels.values())
    np.testing.assert_allclose(traj.position[0], nominal.start.as_array(), atol=1e-6)
    np.testing.assert_allclose(traj.position[-1], nominal.dock.position.as_array(), atol=1e-6)
    assert abs(wrap_angle(traj.yaw_unwrapped[0] - nominal.boundary.initial.yaw)) < 1e-6
    assert abs(wrap_angle(traj.yaw_unwrapped[-1] - nominal.dock.yaw)) < 1e-6
    assert abs(traj.pitch[-1] - nominal.dock.pitch) < 1e-6
    assert np.all(zone_clearance(traj.position, nominal.zones) >= 0)
    assert traj.path_length() >= nominal.straight_line_distance()
    assert np.all(np.diff(res.trace) <= 0)
    assert res.report == evaluate_cost(traj, nominal)
    assert res.report.total_cost == pytest.approx(res.report.flight_time, abs=1e-9)


def test_optimize_deterministic(nominal, nominal_plan):
    again = optimize(nominal)
    assert again.decision == nominal_plan.decision
    assert again.trace == nominal_plan.trace


def test_budget_exhaustion_still_returns(nominal):
    res = optimize(nominal, replace(nominal.solver, max_evaluations=30))
    assert not res.converged and res.evaluations <= 30 + 9
    assert res.report == evaluate_cost(res.trajectory, nominal)


def test_custom_start(nominal, nominal_plan):
    res = optimize(nominal, start=nominal_plan.decision)
    assert res.report.total_cost <= nominal_plan.report.total_cost + 1e-9
