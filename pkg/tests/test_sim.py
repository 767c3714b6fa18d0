from __future__ import annotations

import math
from dataclasses import replace

import pytest

from mwfapf.apf import ApfParams, ForceVector
from mwfapf.scenarios import builtin_scenario
from mwfapf.sensing import SensorConfig
from mwfapf.sim import Outcome, Params, SimParams, StepRecord, clearance, run
from mwfapf.supervisor import Mode, Policy
from mwfapf.world import Bounds, ConfigError, World

OPEN = SensorConfig.ring(8, max_range=2.0)

# first run of the bundled H scenario under the full policy, frozen as a regression value
H_SHAPE_CLEARANCE = 0.23180569862946176


def empty_world(start, goal):
    return World(obstacles=(), goal=goal, start=start, bounds=Bounds(0, 0, 20, 20))


def test_straight_run_matches_tick_recursion():
    params = Params()
    res = run(empty_world((5.0, 10.0), (7.0, 10.0)), OPEN, params, Policy.FULL)
    assert res.outcome.outcome is Outcome.GOAL_REACHED
    # far from the bounds only attraction acts: gap shrinks by (1 - k) per tick
    k = params.apf.v_max * params.apf.zeta / params.apf.saturation * params.sim.dt
    ticks = math.ceil(math.log(params.sim.goal_tol / 2.0) / math.log(1 - k))
    assert res.outcome.final_tick == ticks
    assert res.outcome.path_length == pytest.approx(2.0 - 2.0 * (1 - k) ** ticks, rel=1e-9)
    assert res.switches == 0


def test_start_at_goal_finishes_immediately():
    res = run(empty_world((5.0, 5.0), (5.0, 5.0)), OPEN)
    assert res.outcome.outcome is Outcome.GOAL_REACHED
    assert res.outcome.final_tick == 0
    assert res.outcome.path_length == 0.0


def sealed_box_world():
    # four walls with 5 cm seams; the robot disc cannot fit through
    walls = (
        ((3.0, 3.0), (7.0, 3.0), (7.0, 3.3), (3.0, 3.3)),
        ((3.0, 6.7), (7.0, 6.7), (7.0, 7.0), (3.0, 7.0)),
        ((3.0, 3.35), (3.3, 3.35), (3.3, 6.65), (3.0, 6.65)),
        ((6.7, 3.35), (7.0, 3.35), (7.0, 6.65), (6.7, 6.65)),
    )
    return World(obstacles=walls, goal=(9.0, 5.0), start=(4.5, 5.0), bounds=Bounds(0, 0, 10, 10))


@pytest.mark.parametrize("policy", list(Policy))
def test_sealed_box_never_collides(policy):
    params = Params(sim=SimParams(max_steps=1500))
    w = sealed_box_world()
    res = run(w, OPEN, params, policy)
    assert res.outcome.outcome is Outcome.MAX_STEPS_EXCEEDED
    assert clearance(w, res.records, params.sim.radius) > 0


def test_clearance_of_parallel_run():
    w = World(
        obstacles=(((2.0, 4.0), (18.0, 4.0), (18.0, 5.0), (2.0, 5.0)),),
        goal=(15.0, 15.0),
        start=(5.0, 10.0),
        bounds=Bounds(0, 0, 20, 20),
    )
    records = [
        StepRecord(k, 0.05 * k, (5.0 + 0.1 * k, 6.0), (2.0, 0.0), Mode.APF, ForceVector(0.0, 0.0), 1.0, False)
        for k in range(50)
    ]
    assert clearance(w, records, 0.2) == pytest.approx(0.8)


def test_collision_run_has_no_clearance():
    sc = builtin_scenario("local-min-wall")
    params = replace(sc.params, apf=replace(sc.params.apf, eta=1e-9))
    res = run(sc.world, sc.sensors, params, Policy.APF_ONLY)
    assert res.outcome.outcome is Outcome.COLLISION
    assert clearance(sc.world, res.records, params.sim.radius) <= 0


def test_h_shape_clearance_regression():
    sc = builtin_scenario("h-shape")
    res = run(sc.world, sc.sensors, sc.params, Policy.FULL)
    c = clearance(sc.world, res.records, sc.params.sim.radius)
    assert c > 0.1
    assert c == pytest.approx(H_SHAPE_CLEARANCE, abs=1e-9)


def test_start_overlapping_obstacle_is_rejected():
    w = World(obstacles=(((2.0, 2.0), (4.0, 2.0), (4.0, 4.0), (2.0, 4.0)),), goal=(8, 8), start=(4.1, 3.0), bounds=Bounds(0, 0, 10, 10))
    with pytest.raises(ConfigError) as info:
        run(w, OPEN)
    assert info.value.invariant == "start_clearance"


def test_cutoff_beyond_sensor_range_is_rejected():
    params = Params(apf=ApfParams(d_c=3.0))
    with pytest.raises(ConfigError):
        run(empty_world((5.0, 5.0), (8.0, 5.0)), OPEN, params)


@pytest.mark.parametrize("bad", [{"dt": 0.0}, {"max_steps": 0}, {"goal_tol": -1.0}, {"radius": 0.0}])
def test_sim_params_validated(bad):
    with pytest.raises(ConfigError):
        SimParams(**bad)


def test_records_are_contiguous_and_sum_to_path_length():
    sc = builtin_scenario("h-shape")
    res = run(sc.world, sc.sensors, sc.params, Policy.FULL)
    assert [r.tick for r in res.records] == list(range(len(res.records)))
    steps = sum(math.dist(a.position, b.position) for a, b in zip(res.records, res.records[1:]))
    assert steps == pytest.approx(res.outcome.path_length, rel=1e-9)


def test_noisy_runs_are_reproducible_per_seed():
    sc = builtin_scenario("open-corridor")
    noisy = replace(sc.sensors, noise_sigma=0.02)
    a = run(sc.world, noisy, sc.params, Policy.FULL, seed=3)
    b = run(sc.world, noisy, sc.params, Policy.FULL, seed=3)
    c = run(sc.world, noisy, sc.params, Policy.FULL, seed=4)
    assert a.records == b.records
    assert a.records != c.records


@pytest.mark.parametrize("name", ["comparison-arena", "closed-room-small-exit"])
@pytest.mark.parametrize("policy", [Policy.FULL, Policy.MEMORYLESS])
def test_speed_never_exceeds_cap(name, policy):
    sc = builtin_scenario(name)
    res = run(sc.world, sc.sensors, sc.params, policy)
    v_max = sc.params.apf.v_max
    assert all(math.hypot(*r.velocity) <= v_max + 1e-12 for r in res.records)
    if res.outcome.outcome is not Outcome.COLLISION:
        assert clearance(sc.world, res.records, sc.params.sim.radius) > 0
