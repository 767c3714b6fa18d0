"""Wall following: nearest-wall estimation from sensor pairs, PID standoff and direction choice."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .sensing import SensorConfig, SensorScan
from .world import ConfigError, Point2

if TYPE_CHECKING:
    from .memory import TrajectoryMemory


class FollowDirection(enum.Enum):
    LEFT = "left"  # wall on the robot's left
    RIGHT = "right"

    def opposite(self) -> FollowDirection:
        return FollowDirection.RIGHT if self is FollowDirection.LEFT else FollowDirection.LEFT


@dataclass(frozen=True)
class WfmParams:
    d_wall: float = 0.5
    v_tangent_mag: float = 0.5
    kp: float = 2.0
    ki: float = 0.1
    kd: float = 0.5
    integral_limit: float = 1.0

    def __post_init__(self):
        if not self.d_wall > 0:
            raise ConfigError("wfm.d_wall_positive", f"d_wall={self.d_wall}")
        if not self.v_tangent_mag > 0:
            raise ConfigError("wfm.v_tangent_mag_positive", f"v_tangent_mag={self.v_tangent_mag}")
        for name in ("kp", "ki", "kd", "integral_limit"):
            if getattr(self, name) < 0:
                raise ConfigError(f"wfm.{name}_nonnegative", f"{name}={getattr(self, name)}")


@dataclass
class PidState:
    integral: float = 0.0
    prev_error: float | None = None

    def reset(self) -> None:
        self.integral = 0.0
        self.prev_error = None


@dataclass(frozen=True)
class WallEstimate:
    tangent: tuple[float, float]
    normal: tuple[float, float]  # from the wall toward the robot
    distance: float
    source_pair: tuple[int, int]

    def oriented_tangent(self, direction: FollowDirection) -> tuple[float, float]:
        nx, ny = self.normal
        # LEFT keeps the wall on the left: the normal is the tangent rotated by -90 degrees
        if direction is FollowDirection.LEFT:
            return (-ny, nx)
        return (ny, -nx)


def pair_distance(d_i: float, d_j: float, theta_ij: float) -> float:
    """Wall distance estimate from two readings separated by ``theta_ij``.

    Half the triangle area over the base length, i.e. half the true
    perpendicular distance from the robot to the line through both hits.
    """
    base = math.sqrt(d_i * d_i + d_j * d_j - 2.0 * d_i * d_j * math.cos(theta_ij))
    return 0.5 * d_i * d_j * math.sin(theta_ij) / base


def estimate_wall(
    scan: SensorScan, position: Point2, heading: float, config: SensorConfig
) -> WallEstimate | None:
    best = None
    best_d = math.inf
    readings = scan.readings
    for i, j, sep in config.wall_pairs:
        di, dj = readings[i], readings[j]
        if di >= config.max_range or dj >= config.max_range:
            continue
        dij = pair_distance(di, dj, sep)
        if dij < best_d:
            best_d = dij
            best = (i, j)
    if best is None:
        return None

    i, j = best
    ai = heading + config.mount_angles[i]
    aj = heading + config.mount_angles[j]
    px, py = position
    xi, yi = px + readings[i] * math.cos(ai), py + readings[i] * math.sin(ai)
    xj, yj = px + readings[j] * math.cos(aj), py + readings[j] * math.sin(aj)
    tx, ty = xj - xi, yj - yi
    tn = math.hypot(tx, ty)
    if tn == 0.0:
        return None
    tx, ty = tx / tn, ty / tn
    nx, ny = -ty, tx
    dist = (px - xi) * nx + (py - yi) * ny
    if dist < 0:
        nx, ny, dist = -nx, -ny, -dist
    if dist == 0.0:
        return None
    return WallEstimate((tx, ty), (nx, ny), dist, (i, j))


def pid_output(error: float, state: PidState, params: WfmParams, dt: float) -> float:
    state.integral = max(-params.integral_limit, min(params.integral_limit, state.integral + error * dt))
    deriv = 0.0 if state.prev_error is None else (error - state.prev_error) / dt
    state.prev_error = error
    u = params.kp * error + params.ki * state.integral + params.kd * deriv
    return max(-params.v_tangent_mag, min(params.v_tangent_mag, u))


def wfm_velocity(
    wall: WallEstimate, direction: FollowDirection, params: WfmParams, pid_state: PidState, dt: float
) -> tuple[float, float]:
    """Tangent speed along the wall plus a PID normal correction toward the standoff distance.

    A positive error (too far from the wall) drives the robot along -normal.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    tx, ty = wall.oriented_tangent(direction)
    u = pid_output(wall.distance - params.d_wall, pid_state, params, dt)
    nx, ny = wall.normal
    return (params.v_tangent_mag * tx - u * nx, params.v_tangent_mag * ty - u * ny)


def choose_direction(
    position: Point2,
    memory: TrajectoryMemory | None,
    goal: Point2,
    wall: WallEstimate,
    d_th: float,
    avoid: tuple[float, float] | None = None,
) -> FollowDirection:
    """Pick the side to keep the wall on.

    With ``avoid`` set (the recorded heading of a revisited pose), take the
    tangent pointing against it. Otherwise flip the most recent direction used
    near here, and failing that head the way that makes goal progress.
    """
    lx, ly = wall.oriented_tangent(FollowDirection.LEFT)
    if avoid is not None:
        return FollowDirection.RIGHT if lx * avoid[0] + ly * avoid[1] > 0 else FollowDirection.LEFT
    if memory is not None:
        tag = memory.nearby_direction_tag(position, d_th)
        if tag is not None:
            return tag.opposite()
    gx, gy = goal[0] - position[0], goal[1] - position[1]
    rx, ry = wall.oriented_tangent(FollowDirection.RIGHT)
    if rx * gx + ry * gy > lx * gx + ly * gy:
        return FollowDirection.RIGHT
    return FollowDirection.LEFT
