"""Fixed-timestep kinematic simulation: sense, arbitrate, command, integrate, record."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .apf import ApfParams, ForceVector, apf_velocity, clamp_obstacle_point, total_force
from .memory import MemoryParams, TrajectoryMemory
from .sensing import SensorConfig, obstacle_points, scan
from .supervisor import (
    Mode,
    Policy,
    SupervisorInputs,
    SupervisorParams,
    SupervisorState,
    Transition,
    step_supervisor,
)
from .wfm import PidState, WfmParams, estimate_wall, wfm_velocity
from .world import ConfigError, Point2, World


@dataclass(frozen=True)
class SimParams:
    dt: float = 0.05
    max_steps: int = 20_000
    goal_tol: float = 0.2
    radius: float = 0.2

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("sim.dt_positive", f"dt={self.dt}")
        if not self.max_steps > 0:
            raise ConfigError("sim.max_steps_positive", f"max_steps={self.max_steps}")
        if not self.goal_tol > 0:
            raise ConfigError("sim.goal_tol_positive", f"goal_tol={self.goal_tol}")
        if not self.radius > 0:
            raise ConfigError("sim.radius_positive", f"radius={self.radius}")


@dataclass(frozen=True)
class Params:
    apf: ApfParams = field(default_factory=ApfParams)
    wfm: WfmParams = field(default_factory=WfmParams)
    memory: MemoryParams = field(default_factory=MemoryParams)
    supervisor: SupervisorParams = field(default_factory=SupervisorParams)
    sim: SimParams = field(default_factory=SimParams)


class Outcome(enum.Enum):
    GOAL_REACHED = "GoalReached"
    MAX_STEPS_EXCEEDED = "MaxStepsExceeded"
    COLLISION = "Collision"


@dataclass(frozen=True)
class RunOutcome:
    outcome: Outcome
    final_tick: int
    path_length: float


@dataclass(frozen=True)
class StepRecord:
    tick: int
    t: float
    position: Point2
    velocity: tuple[float, float]
    mode: Mode
    force: ForceVector
    min_reading: float
    keyframe_recorded: bool
    event: str = ""


@dataclass
class RunResult:
    outcome: RunOutcome
    records: list[StepRecord]
    memory: TrajectoryMemory
    transitions: list[tuple[int, Transition]]

    @property
    def switches(self) -> int:
        return len(self.transitions)

    @property
    def wall_follow_fraction(self) -> float:
        if not self.records:
            return 0.0
        return sum(r.mode is Mode.WFM for r in self.records) / len(self.records)


def _unit(v, fallback):
    n = math.hypot(v[0], v[1])
    if n < 1e-12:
        return fallback
    return (v[0] / n, v[1] / n)


def run(
    world: World,
    sensors: SensorConfig,
    params: Params = Params(),
    policy: Policy | str = Policy.FULL,
    seed: int = 0,
) -> RunResult:
    policy = Policy(policy)
    sp = params.sim
    dt = sp.dt
    if world.nearest_edge_distance(world.start) <= sp.radius:
        raise ConfigError("start_clearance", "robot disc at start overlaps an obstacle or the bounds")
    if params.apf.d_c > sensors.max_range:
        raise ConfigError("apf.d_c_within_range", f"d_c={params.apf.d_c} exceeds max_range={sensors.max_range}")

    rng = np.random.default_rng(seed)
    goal = world.goal
    memory = TrajectoryMemory(params.memory)
    pid = PidState()
    sup = SupervisorState(policy=policy, f_th=params.memory.f_th, ticks_since_switch=params.supervisor.hysteresis)
    v_max = params.apf.v_max

    px, py = world.start
    heading = math.atan2(goal[1] - py, goal[0] - px)
    path = 0.0
    records: list[StepRecord] = []
    transitions: list[tuple[int, Transition]] = []
    outcome = None

    for tick in range(sp.max_steps + 1):
        t = tick * dt
        pos = Point2(px, py)
        s = scan(world, pos, heading, sensors, rng, t)
        pts = [clamp_obstacle_point(pos, q, params.apf.min_distance) for q in obstacle_points(s, pos, heading, sensors)]
        force = total_force(pos, goal, pts, params.apf)
        min_reading = min(s.readings)
        dist_goal = math.hypot(goal[0] - px, goal[1] - py)

        if world.nearest_edge_distance(pos) <= sp.radius:
            outcome = Outcome.COLLISION
        elif dist_goal <= sp.goal_tol:
            outcome = Outcome.GOAL_REACHED
        elif tick == sp.max_steps:
            outcome = Outcome.MAX_STEPS_EXCEEDED
        if outcome is not None:
            records.append(StepRecord(tick, t, pos, (0.0, 0.0), sup.mode, force, min_reading, False))
            break

        wall = estimate_wall(s, pos, heading, sensors)
        heading_vec = (math.cos(heading), math.sin(heading))
        v_apf = apf_velocity(force, params.apf)
        prev_mode = sup.mode
        mode, sup, trans = step_supervisor(
            sup,
            SupervisorInputs(pos, goal, force, wall, _unit(v_apf, heading_vec), memory, t, sp.goal_tol),
            params.supervisor,
            params.memory.d_th,
        )
        event = ""
        if trans is not None:
            transitions.append((tick, trans))
            event = str(trans)
            if trans.to_mode is Mode.WFM:
                pid.reset()

        if mode is Mode.APF:
            vx, vy = v_apf
        elif wall is not None:
            vx, vy = wfm_velocity(wall, sup.direction, params.wfm, pid, dt)
        else:
            tx, ty = sup.last_tangent
            vx, vy = params.wfm.v_tangent_mag * tx, params.wfm.v_tangent_mag * ty
        speed = math.hypot(vx, vy)
        if speed > v_max:
            vx, vy = vx * v_max / speed, vy * v_max / speed
            speed = v_max

        move_dir = _unit((vx, vy), heading_vec)
        f_norm = force.norm if prev_mode is Mode.APF else math.inf
        recorded = memory.maybe_record(
            t, pos, move_dir, f_norm, mode.value, sup.direction if mode is Mode.WFM else None
        )
        records.append(StepRecord(tick, t, pos, (vx, vy), mode, force, min_reading, recorded, event))

        px += vx * dt
        py += vy * dt
        path += speed * dt
        if speed > 0.01:
            heading = math.atan2(vy, vx)

    return RunResult(RunOutcome(outcome, records[-1].tick, path), records, memory, transitions)


def clearance(world: World, records: list[StepRecord], radius: float) -> float:
    """Smallest gap between the robot disc and any obstacle or bounds edge over the run."""
    if not records:
        raise ValueError("clearance of an empty run")
    p = np.array([r.position for r in records], dtype=float)
    a, b = world.edges
    e = b - a
    w = p[:, None, :] - a[None, :, :]
    t = np.clip((w * e[None]).sum(-1) / (e * e).sum(-1)[None], 0.0, 1.0)
    d = w - t[..., None] * e[None]
    return float(np.sqrt((d * d).sum(-1)).min() - radius)
