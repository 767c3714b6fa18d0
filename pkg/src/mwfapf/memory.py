"""Key-frame trajectory memory and the history queries used for switching decisions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .wfm import FollowDirection
from .world import ConfigError, Point2, Segment2, segments_intersect_many


@dataclass(frozen=True)
class MemoryParams:
    d_th: float = 0.3
    theta_th: float = math.pi / 4
    f_th: float = 0.05
    t_refractory: float = 2.0

    def __post_init__(self):
        for name in ("d_th", "theta_th", "f_th"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"memory.{name}_positive", f"{name}={getattr(self, name)}")
        if self.t_refractory < 0:
            raise ConfigError("memory.t_refractory_nonnegative", f"t_refractory={self.t_refractory}")


@dataclass(frozen=True)
class KeyFrame:
    t: float
    p: Point2
    v: tuple[float, float]
    is_local_min: bool = False
    wfm_direction: FollowDirection | None = None
    mode: str = "APF"


def angle_between(u, v) -> float:
    """Unsigned angle in [0, pi] between two vectors."""
    return abs(math.atan2(u[0] * v[1] - u[1] * v[0], u[0] * v[0] + u[1] * v[1]))


@dataclass
class TrajectoryMemory:
    """Append-only key-frame store.

    Positions and directions are mirrored in growable arrays so the per-tick
    queries stay vectorised.
    """

    params: MemoryParams = field(default_factory=MemoryParams)
    frames: list[KeyFrame] = field(default_factory=list)
    t_m: float | None = None

    def __post_init__(self):
        self._pos = np.empty((64, 2))
        self._dir = np.empty((64, 2))
        self._t = np.empty(64)
        frames, self.frames, self.t_m = self.frames, [], None
        for f in frames:
            self._append(f)

    def __len__(self) -> int:
        return len(self.frames)

    def _append(self, frame: KeyFrame) -> None:
        n = len(self.frames)
        if n == len(self._t):
            self._pos = np.concatenate([self._pos, np.empty_like(self._pos)])
            self._dir = np.concatenate([self._dir, np.empty_like(self._dir)])
            self._t = np.concatenate([self._t, np.empty_like(self._t)])
        self._pos[n] = frame.p
        self._dir[n] = frame.v
        self._t[n] = frame.t
        self.frames.append(frame)
        if frame.is_local_min:
            self.t_m = frame.t

    @property
    def positions(self) -> np.ndarray:
        return self._pos[: len(self.frames)]

    @property
    def directions(self) -> np.ndarray:
        return self._dir[: len(self.frames)]

    @property
    def times(self) -> np.ndarray:
        return self._t[: len(self.frames)]

    def _angles_to(self, v) -> np.ndarray:
        d = self.directions
        cross = d[:, 0] * v[1] - d[:, 1] * v[0]
        dot = d[:, 0] * v[0] + d[:, 1] * v[1]
        return np.abs(np.arctan2(cross, dot))

    def _distances_to(self, p) -> np.ndarray:
        diff = self.positions - np.asarray(p, dtype=float)
        return np.hypot(diff[:, 0], diff[:, 1])

    def maybe_record(
        self,
        t: float,
        p: Point2,
        v: tuple[float, float],
        f_total_norm: float,
        mode: str = "APF",
        wfm_direction: FollowDirection | None = None,
    ) -> bool:
        """Append a key frame if the robot is somewhere new, moving a new way here, or at a local minimum."""
        if self.frames and not t > self.frames[-1].t:
            raise ValueError(f"key frame time must increase: {t} after {self.frames[-1].t}")
        local_min = f_total_norm <= self.params.f_th
        if local_min and self.frames:
            last = self.frames[-1]
            # still parked at the minimum already on record
            if last.is_local_min and math.dist(last.p, p) <= self.params.d_th:
                local_min = False
        record = local_min
        if not record:
            near = self._distances_to(p) <= self.params.d_th
            if not near.any():
                record = True
            else:
                record = bool(np.all(self._angles_to(v)[near] > self.params.theta_th))
        if record:
            self._append(KeyFrame(t, Point2(p[0], p[1]), (float(v[0]), float(v[1])), local_min, wfm_direction, mode))
        return record

    def history_polyline(self) -> list[Segment2]:
        segs = []
        for f0, f1 in zip(self.frames, self.frames[1:]):
            if f0.p != f1.p:
                segs.append(Segment2(f0.p, f1.p))
        return segs

    def crosses_history(self, start: Point2, end: Point2) -> bool:
        """Does segment start-end touch the key-frame polyline (ignoring its newest segment)?"""
        n = len(self.frames)
        if n < 3:
            return False
        pos = self.positions
        a, b = pos[: n - 2], pos[1 : n - 1]
        keep = np.any(a != b, axis=1)
        return bool(segments_intersect_many(a[keep], b[keep], start, end).any())

    def find_revisit(self, p: Point2, v: tuple[float, float], t_now: float) -> float | None:
        """Time of the earliest frame recorded before the last local minimum matching this position and direction."""
        frame = self.revisited_frame(p, v, t_now)
        return None if frame is None else frame.t

    def revisited_frame(self, p: Point2, v: tuple[float, float], t_now: float) -> KeyFrame | None:
        if self.t_m is None or not self.frames:
            return None
        t = self.times
        ok = (t < self.t_m) & (t_now - t > self.params.t_refractory)
        if not ok.any():
            return None
        ok &= self._distances_to(p) <= self.params.d_th
        if not ok.any():
            return None
        ok &= self._angles_to(v) <= self.params.theta_th
        idx = np.flatnonzero(ok)
        return self.frames[idx[0]] if len(idx) else None

    def nearby_direction_tag(self, p: Point2, radius: float) -> FollowDirection | None:
        """Direction tag of the most recent tagged frame within ``radius`` of ``p``."""
        if not self.frames:
            return None
        near = np.flatnonzero(self._distances_to(p) <= radius)
        for k in near[::-1]:
            tag = self.frames[k].wfm_direction
            if tag is not None:
                return tag
        return None
