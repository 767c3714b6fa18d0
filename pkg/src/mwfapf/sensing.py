"""Body-mounted rangefinder array simulated by ray casting."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .world import ConfigError, Point2, World, ray_cast_many

MIN_READING = 0.01


def _wrap(a: float) -> float:
    """Wrap an angle to [-pi, pi)."""
    return (a + math.pi) % (2.0 * math.pi) - math.pi


@dataclass(frozen=True)
class SensorConfig:
    """Mount angles are radians in the robot frame, 0 = vehicle front, counter-clockwise positive."""

    mount_angles: tuple[float, ...]
    max_range: float = 4.0
    noise_sigma: float = 0.0

    def __post_init__(self):
        angles = tuple(_wrap(float(a)) for a in self.mount_angles)
        object.__setattr__(self, "mount_angles", angles)
        if not angles:
            raise ConfigError("sensor_count", "at least one sensor is required")
        for i in range(len(angles)):
            for j in range(i + 1, len(angles)):
                if abs(_wrap(angles[i] - angles[j])) < 1e-12:
                    raise ConfigError("mount_angles_distinct", f"sensors {i} and {j} share angle {angles[i]}")
        if not self.max_range > 0:
            raise ConfigError("max_range_positive", f"max_range={self.max_range}")
        if not self.noise_sigma >= 0:
            raise ConfigError("noise_sigma_nonnegative", f"noise_sigma={self.noise_sigma}")

    @classmethod
    def ring(cls, n: int = 8, max_range: float = 4.0, noise_sigma: float = 0.0) -> SensorConfig:
        return cls(tuple(2.0 * math.pi * k / n for k in range(n)), max_range, noise_sigma)

    @classmethod
    def uav5(cls, max_range: float = 4.0, noise_sigma: float = 0.0) -> SensorConfig:
        """Five forward-facing sensors at -90, -45, 0, 45 and 90 degrees."""
        return cls(tuple(math.radians(a) for a in (-90, -45, 0, 45, 90)), max_range, noise_sigma)

    @cached_property
    def wall_pairs(self) -> tuple[tuple[int, int, float], ...]:
        """(i, j, separation) for every sensor pair separated by strictly less than pi/2."""
        out = []
        n = len(self.mount_angles)
        for i in range(n):
            for j in range(i + 1, n):
                sep = abs(_wrap(self.mount_angles[j] - self.mount_angles[i]))
                if 0.0 < sep < math.pi / 2 - 1e-12:
                    out.append((i, j, sep))
        return tuple(out)


PRESETS = {
    "ring8": lambda max_range, noise: SensorConfig.ring(8, max_range, noise),
    "ring12": lambda max_range, noise: SensorConfig.ring(12, max_range, noise),
    "ring16": lambda max_range, noise: SensorConfig.ring(16, max_range, noise),
    "uav5": SensorConfig.uav5,
}


@dataclass(frozen=True)
class SensorScan:
    readings: tuple[float, ...]
    t: float = 0.0


def world_angles(heading: float, config: SensorConfig) -> np.ndarray:
    return heading + np.asarray(config.mount_angles)


def scan(
    world: World,
    position: Point2,
    heading: float,
    config: SensorConfig,
    rng: np.random.Generator | None = None,
    t: float = 0.0,
) -> SensorScan:
    """Take one reading per sensor along heading + mount angle.

    Noise is drawn from ``rng`` only when ``noise_sigma > 0``, so noiseless runs
    never consume random numbers.
    """
    ang = world_angles(heading, config)
    dirs = np.column_stack((np.cos(ang), np.sin(ang)))
    d = ray_cast_many(world, position, dirs, config.max_range)
    if config.noise_sigma > 0:
        if rng is None:
            raise ValueError("a random generator is required when noise_sigma > 0")
        d = d + rng.normal(0.0, config.noise_sigma, size=d.shape)
    d = np.clip(d, MIN_READING, config.max_range)
    return SensorScan(tuple(float(x) for x in d), t)


def obstacle_points(scan: SensorScan, position: Point2, heading: float, config: SensorConfig) -> list[Point2]:
    """Estimated obstacle positions for every unsaturated reading."""
    pts = []
    for d, a in zip(scan.readings, config.mount_angles):
        if d >= config.max_range:
            continue
        w = heading + a
        pts.append(Point2(position[0] + d * math.cos(w), position[1] + d * math.sin(w)))
    return pts
