"""Mode arbitration between the potential-field and wall-following controllers.

Three switching policies are provided:

* ``full``: history is consulted in both modes. Leaving wall following needs the
  goal to lie behind the followed tangent *and* a clear straight line to the goal
  with respect to the key-frame polyline. Potential-field mode hands over to wall
  following on a local minimum or when the robot retraces a pose recorded before
  the latest local minimum.
* ``wfm-memory``: history is consulted only while wall following (line-of-sight
  check and direction flip on revisit); potential-field mode only checks for a
  local minimum.
* ``memoryless``: force-threshold and goal-angle tests only.

``apf-only`` disables switching altogether.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from .apf import ForceVector
from .memory import TrajectoryMemory
from .wfm import FollowDirection, WallEstimate, choose_direction
from .world import ConfigError, Point2


class Mode(enum.Enum):
    APF = "APF"
    WFM = "WFM"


class Policy(enum.Enum):
    FULL = "full"
    MEMORYLESS = "memoryless"
    WFM_MEMORY = "wfm-memory"
    APF_ONLY = "apf-only"


def wrap_angle(a: float) -> float:
    return (a + math.pi) % (2.0 * math.pi) - math.pi


@dataclass(frozen=True)
class SupervisorParams:
    hysteresis: int = 10
    n_coast: int = 20
    min_wfm_time: float = 0.0  # seconds in WFM before a goal-based exit is allowed

    def __post_init__(self):
        if self.hysteresis < 0:
            raise ConfigError("supervisor.hysteresis_nonnegative", f"hysteresis={self.hysteresis}")
        if self.n_coast < 1:
            raise ConfigError("supervisor.n_coast_positive", f"n_coast={self.n_coast}")
        if self.min_wfm_time < 0:
            raise ConfigError("supervisor.min_wfm_time_nonnegative", f"min_wfm_time={self.min_wfm_time}")


@dataclass(frozen=True)
class SupervisorState:
    mode: Mode = Mode.APF
    policy: Policy = Policy.FULL
    theta_goal: float = 0.0
    theta_0: float | None = None
    f_th: float = 0.05
    ticks_since_switch: int = 1 << 30
    direction: FollowDirection | None = None
    ticks_without_wall: int = 0
    last_tangent: tuple[float, float] | None = None
    wfm_since: float = 0.0


@dataclass(frozen=True)
class SupervisorInputs:
    position: Point2
    goal: Point2
    f_total: ForceVector
    wall: WallEstimate | None
    velocity_direction: tuple[float, float]
    memory: TrajectoryMemory
    t_now: float
    goal_tol: float


@dataclass(frozen=True)
class Transition:
    from_mode: Mode
    to_mode: Mode
    condition: str

    def __str__(self) -> str:
        return f"{self.from_mode.value}->{self.to_mode.value}:{self.condition}"


def goal_behind_tangent(theta_goal: float, theta_0: float) -> bool:
    return abs(wrap_angle(theta_goal - theta_0)) > math.pi / 2


def _wfm_exit_condition(
    state: SupervisorState,
    position: Point2,
    goal: Point2,
    wall: WallEstimate | None,
    memory: TrajectoryMemory | None,
    params: SupervisorParams,
) -> str | None:
    if wall is None:
        return "wall_lost" if state.ticks_without_wall >= params.n_coast else None
    direction = state.direction or FollowDirection.LEFT
    tx, ty = wall.oriented_tangent(direction)
    theta_0 = math.atan2(ty, tx)
    theta_goal = math.atan2(goal[1] - position[1], goal[0] - position[0])
    if not goal_behind_tangent(theta_goal, theta_0):
        return None
    if state.policy is Policy.MEMORYLESS:
        return "goal_behind"
    if memory is not None and memory.crosses_history(position, goal):
        return None
    return "goal_behind_clear"


def should_switch_to_apf(
    state: SupervisorState,
    position: Point2,
    goal: Point2,
    wall: WallEstimate | None,
    memory: TrajectoryMemory | None,
    params: SupervisorParams = SupervisorParams(),
) -> bool:
    """Leave wall following? Hysteresis is applied separately by ``step_supervisor``."""
    if state.policy is Policy.APF_ONLY:
        return False
    return _wfm_exit_condition(state, position, goal, wall, memory, params) is not None


def _apf_exit_condition(
    state: SupervisorState,
    f_total: ForceVector,
    position: Point2,
    velocity_direction: tuple[float, float],
    memory: TrajectoryMemory | None,
    t_now: float,
    dist_to_goal: float,
    goal_tol: float,
) -> str | None:
    if state.policy is Policy.APF_ONLY:
        return None
    if math.hypot(f_total[0], f_total[1]) < state.f_th and dist_to_goal > goal_tol:
        return "local_min"
    if state.policy is Policy.FULL and memory is not None:
        if memory.revisited_frame(position, velocity_direction, t_now) is not None:
            return "revisit"
    return None


def should_switch_to_wfm(
    state: SupervisorState,
    f_total: ForceVector,
    position: Point2,
    velocity_direction: tuple[float, float],
    memory: TrajectoryMemory | None,
    t_now: float,
    dist_to_goal: float,
    goal_tol: float = 0.2,
) -> bool:
    return (
        _apf_exit_condition(
            state, f_total, position, velocity_direction, memory, t_now, dist_to_goal, goal_tol
        )
        is not None
    )


def step_supervisor(
    state: SupervisorState,
    inputs: SupervisorInputs,
    params: SupervisorParams,
    d_th: float,
) -> tuple[Mode, SupervisorState, Transition | None]:
    """Advance the arbitration state by one tick.

    Returns the mode to use for this tick, the new state, and the transition
    taken (if any). Entering wall following picks the follow direction; the
    caller resets its PID accumulator when the returned transition enters WFM.
    """
    pos, goal, wall = inputs.position, inputs.goal, inputs.wall
    elapsed = state.ticks_since_switch + 1
    theta_goal = math.atan2(goal[1] - pos[1], goal[0] - pos[0])
    state = replace(state, ticks_since_switch=elapsed, theta_goal=theta_goal)

    if state.mode is Mode.WFM:
        if wall is None:
            state = replace(state, ticks_without_wall=state.ticks_without_wall + 1, theta_0=None)
        else:
            tangent = wall.oriented_tangent(state.direction or FollowDirection.LEFT)
            state = replace(
                state, ticks_without_wall=0, last_tangent=tangent, theta_0=math.atan2(tangent[1], tangent[0])
            )
        memory = None if state.policy is Policy.MEMORYLESS else inputs.memory
        cond = _wfm_exit_condition(state, pos, goal, wall, memory, params)
        forced = cond == "wall_lost"
        dwelt = inputs.t_now - state.wfm_since >= params.min_wfm_time - 1e-9
        if cond is not None and (forced or (elapsed >= params.hysteresis and dwelt)):
            new = replace(
                state,
                mode=Mode.APF,
                ticks_since_switch=0,
                direction=None,
                theta_0=None,
                ticks_without_wall=0,
                last_tangent=None,
            )
            return Mode.APF, new, Transition(Mode.WFM, Mode.APF, cond)
        return Mode.WFM, state, None

    dist_to_goal = math.hypot(goal[0] - pos[0], goal[1] - pos[1])
    cond = _apf_exit_condition(
        state,
        inputs.f_total,
        pos,
        inputs.velocity_direction,
        inputs.memory,
        inputs.t_now,
        dist_to_goal,
        inputs.goal_tol,
    )
    if cond is None or elapsed < params.hysteresis or wall is None:
        return Mode.APF, state, None
    flip_memory = None if state.policy is Policy.MEMORYLESS else inputs.memory
    avoid = None
    if cond == "revisit":
        avoid = inputs.memory.revisited_frame(pos, inputs.velocity_direction, inputs.t_now).v
    direction = choose_direction(pos, flip_memory, goal, wall, d_th, avoid)
    tangent = wall.oriented_tangent(direction)
    new = replace(
        state,
        mode=Mode.WFM,
        ticks_since_switch=0,
        direction=direction,
        theta_0=math.atan2(tangent[1], tangent[0]),
        ticks_without_wall=0,
        last_tangent=tangent,
        wfm_since=inputs.t_now,
    )
    return Mode.WFM, new, Transition(Mode.APF, Mode.WFM, cond)
