"""Artificial potential field: attractive/repulsive potentials, forces and the velocity command.

The repulsive force is the exact negative gradient of the repulsive potential,
pointing away from the obstacle. ``repulsive_form="printed"`` selects the
variant without the 1/|d|^2 factor (still pointing away) for comparison runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .world import ConfigError, Point2


class SingularityError(ArithmeticError):
    """Repulsive force evaluated at the obstacle point itself."""


class ForceVector(NamedTuple):
    fx: float
    fy: float

    @property
    def norm(self) -> float:
        return math.hypot(self.fx, self.fy)


ZERO = ForceVector(0.0, 0.0)


@dataclass(frozen=True)
class ApfParams:
    zeta: float = 1.0
    rho: float = 3.0
    eta: float = 1.0
    d_c: float = 1.5
    v_max: float = 0.5
    f_sat: float | None = None  # None -> zeta * rho
    repulsive_form: str = "gradient"
    min_distance: float = 0.01

    def __post_init__(self):
        for name in ("zeta", "rho", "eta", "d_c", "v_max", "min_distance"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"apf.{name}_positive", f"{name}={getattr(self, name)}")
        if self.f_sat is not None and not self.f_sat > 0:
            raise ConfigError("apf.f_sat_positive", f"f_sat={self.f_sat}")
        if self.repulsive_form not in ("gradient", "printed"):
            raise ConfigError("apf.repulsive_form", f"unknown form {self.repulsive_form!r}")

    @property
    def saturation(self) -> float:
        return self.zeta * self.rho if self.f_sat is None else self.f_sat


def attractive_potential(p: Point2, goal: Point2, params: ApfParams) -> float:
    dist = math.hypot(p[0] - goal[0], p[1] - goal[1])
    if dist <= params.rho:
        return 0.5 * params.zeta * dist * dist
    return params.zeta * params.rho * dist


def attractive_force(p: Point2, goal: Point2, params: ApfParams) -> ForceVector:
    dx, dy = p[0] - goal[0], p[1] - goal[1]
    dist = math.hypot(dx, dy)
    if dist == 0.0:
        return ZERO
    if dist <= params.rho:
        return ForceVector(-params.zeta * dx, -params.zeta * dy)
    k = params.zeta * params.rho / dist
    return ForceVector(-k * dx, -k * dy)


def repulsive_potential(p: Point2, obstacle_point: Point2, params: ApfParams) -> float:
    dist = math.hypot(p[0] - obstacle_point[0], p[1] - obstacle_point[1])
    if dist > params.d_c:
        return 0.0
    if dist == 0.0:
        raise SingularityError("robot coincides with obstacle point")
    return 0.5 * params.eta * (1.0 / dist - 1.0 / params.d_c) ** 2


def repulsive_force(p: Point2, obstacle_point: Point2, params: ApfParams) -> ForceVector:
    """Push away from ``obstacle_point``; zero beyond the cutoff distance d_c."""
    dx, dy = p[0] - obstacle_point[0], p[1] - obstacle_point[1]
    dist = math.hypot(dx, dy)
    if dist == 0.0:
        raise SingularityError("robot coincides with obstacle point")
    if dist > params.d_c:
        return ZERO
    mag = params.eta * (1.0 / dist - 1.0 / params.d_c)
    if params.repulsive_form == "gradient":
        mag /= dist * dist
    return ForceVector(mag * dx / dist, mag * dy / dist)


def clamp_obstacle_point(p: Point2, q: Point2, min_distance: float) -> Point2:
    """Move ``q`` radially away from ``p`` so that |p - q| >= min_distance."""
    dx, dy = q[0] - p[0], q[1] - p[1]
    dist = math.hypot(dx, dy)
    if dist >= min_distance or dist == 0.0:
        return Point2(q[0], q[1])
    s = min_distance / dist
    return Point2(p[0] + dx * s, p[1] + dy * s)


def total_force(
    p: Point2, goal: Point2, obstacle_points: Sequence[Point2], params: ApfParams
) -> ForceVector:
    fx, fy = attractive_force(p, goal, params)
    for q in obstacle_points:
        rx, ry = repulsive_force(p, q, params)
        fx += rx
        fy += ry
    return ForceVector(fx, fy)


def apf_velocity(f: Sequence[float], params: ApfParams) -> tuple[float, float]:
    """Map a force to a velocity command: full speed at or above the saturation force, linear below."""
    n = math.hypot(f[0], f[1])
    if n == 0.0:
        return (0.0, 0.0)
    scale = params.v_max / n if n >= params.saturation else params.v_max / params.saturation
    return (f[0] * scale, f[1] * scale)
