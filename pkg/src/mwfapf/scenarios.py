"""Scenario files: parsing, validation, overrides, the bundled set, and loop detection."""

from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .apf import ApfParams
from .memory import MemoryParams
from .sensing import PRESETS, SensorConfig
from .sim import Outcome, Params, SimParams, StepRecord
from .supervisor import Policy, SupervisorParams
from .wfm import WfmParams
from .world import Bounds, ConfigError, World

SCENARIO_DIR_ENV = "NAV_SCENARIO_DIR"

_SECTIONS = {
    "apf": ApfParams,
    "wfm": WfmParams,
    "memory": MemoryParams,
    "supervisor": SupervisorParams,
    "sim": SimParams,
}


class ScenarioParseError(ValueError):
    def __init__(self, path: str, line: int | None, message: str):
        where = f"{path}:{line}" if line is not None else path
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line


@dataclass(frozen=True)
class Expectation:
    outcome: Outcome
    cycle: bool | None = None
    local_min: bool | None = None
    path_ratio_to: Policy | None = None
    path_ratio_max: float | None = None


@dataclass(frozen=True)
class Scenario:
    name: str
    world: World
    sensors: SensorConfig
    params: Params
    expected: dict[Policy, Expectation] = field(default_factory=dict)
    notes: str = ""
    raw: dict = field(default_factory=dict, repr=False, compare=False)


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError("missing_key", f"{where}.{key} is required")
    return d[key]


def _section(raw: dict, name: str):
    cls = _SECTIONS[name]
    body = dict(_require(raw, name, "scenario"))
    names = set(cls.__dataclass_fields__)
    unknown = set(body) - names
    if unknown:
        raise ConfigError("unknown_key", f"{name} has unknown keys {sorted(unknown)}")
    missing = names - set(body)
    if missing:
        raise ConfigError("missing_key", f"{name} is missing {sorted(missing)}")
    try:
        return cls(**body)
    except TypeError as exc:
        raise ConfigError("bad_value", f"{name}: {exc}") from exc


def _sensors(raw: dict) -> SensorConfig:
    body = _require(raw, "sensors", "scenario")
    max_range = float(_require(body, "max_range", "sensors"))
    noise = float(_require(body, "noise_sigma", "sensors"))
    if "preset" in body:
        preset = body["preset"]
        if preset not in PRESETS:
            raise ConfigError("sensors.preset", f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        return PRESETS[preset](max_range, noise)
    angles = _require(body, "angles", "sensors")
    return SensorConfig(tuple(float(a) for a in angles), max_range, noise)


def _world(raw: dict) -> World:
    body = _require(raw, "world", "scenario")
    b = _require(body, "bounds", "world")
    if len(b) != 4:
        raise ConfigError("bounds_shape", "world.bounds must be [xmin, ymin, xmax, ymax]")
    obstacles = []
    for k, poly in enumerate(_require(body, "obstacles", "world")):
        obstacles.append(tuple(tuple(float(c) for c in v) for v in poly))
    return World(
        obstacles=tuple(obstacles),
        goal=tuple(_require(body, "goal", "world")),
        start=tuple(_require(body, "start", "world")),
        bounds=Bounds(*(float(x) for x in b)),
    )


def _expected(raw: dict) -> dict[Policy, Expectation]:
    out = {}
    for key, entry in raw.get("expected", {}).items():
        try:
            policy = Policy(key)
            outcome = Outcome(entry["outcome"])
            ratio = entry.get("path_ratio")
            out[policy] = Expectation(
                outcome=outcome,
                cycle=entry.get("cycle"),
                local_min=entry.get("local_min"),
                path_ratio_to=Policy(ratio["to"]) if ratio else None,
                path_ratio_max=float(ratio["max"]) if ratio else None,
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError("expected", f"bad expectation for {key!r}: {exc}") from exc
    return out


def scenario_from_dict(raw: dict) -> Scenario:
    params = Params(**{name: _section(raw, name) for name in _SECTIONS})
    sensors = _sensors(raw)
    if params.apf.d_c > sensors.max_range:
        raise ConfigError("apf.d_c_within_range", f"d_c={params.apf.d_c} exceeds sensor max_range={sensors.max_range}")
    world = _world(raw)
    if world.nearest_edge_distance(world.start) <= params.sim.radius:
        raise ConfigError("start_clearance", "robot disc at start overlaps an obstacle or the bounds")
    return Scenario(
        name=str(_require(raw, "name", "scenario")),
        world=world,
        sensors=sensors,
        params=params,
        expected=_expected(raw),
        notes=str(raw.get("notes", "")),
        raw=copy.deepcopy(raw),
    )


def scenario_to_dict(sc: Scenario) -> dict:
    w = sc.world
    b = w.bounds
    out: dict[str, Any] = {"name": sc.name}
    if sc.notes:
        out["notes"] = sc.notes
    out["world"] = {
        "bounds": [b.xmin, b.ymin, b.xmax, b.ymax],
        "start": list(w.start),
        "goal": list(w.goal),
        "obstacles": [[list(v) for v in poly] for poly in w.obstacles],
    }
    out["sensors"] = {
        "angles": list(sc.sensors.mount_angles),
        "max_range": sc.sensors.max_range,
        "noise_sigma": sc.sensors.noise_sigma,
    }
    for name in _SECTIONS:
        section = getattr(sc.params, name)
        out[name] = {k: getattr(section, k) for k in section.__dataclass_fields__}
    exp = {}
    for policy, e in sc.expected.items():
        d: dict[str, Any] = {"outcome": e.outcome.value}
        if e.cycle is not None:
            d["cycle"] = e.cycle
        if e.local_min is not None:
            d["local_min"] = e.local_min
        if e.path_ratio_to is not None:
            d["path_ratio"] = {"to": e.path_ratio_to.value, "max": e.path_ratio_max}
        exp[policy.value] = d
    out["expected"] = exp
    return out


def dumps(sc: Scenario) -> str:
    return json.dumps(scenario_to_dict(sc), indent=2) + "\n"


def parse_overrides(items: list[str]) -> list[tuple[list[str], Any]]:
    out = []
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigError("override_syntax", f"expected KEY=VALUE, got {item!r}")
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            parsed = value
        out.append((key.split("."), parsed))
    return out


def apply_overrides(raw: dict, items: list[str]) -> dict:
    """Return a copy of ``raw`` with dotted-key overrides applied; keys must already exist."""
    raw = copy.deepcopy(raw)
    for path, value in parse_overrides(items):
        node = raw
        for part in path[:-1]:
            if not isinstance(node, dict) or part not in node:
                raise ConfigError("override_key", f"unknown parameter {'.'.join(path)}")
            node = node[part]
        if not isinstance(node, dict) or path[-1] not in node:
            raise ConfigError("override_key", f"unknown parameter {'.'.join(path)}")
        node[path[-1]] = value
    return raw


def read_raw(path: str | os.PathLike) -> dict:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ScenarioParseError(str(p), None, "scenario file not found") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(str(p), exc.lineno, exc.msg) from exc
    if not isinstance(raw, dict):
        raise ScenarioParseError(str(p), 1, "top level must be an object")
    return raw


def load_scenario(path: str | os.PathLike, overrides: list[str] | None = None) -> Scenario:
    raw = read_raw(path)
    if overrides:
        raw = apply_overrides(raw, overrides)
    return scenario_from_dict(raw)


def _bundled_dir():
    return resources.files("mwfapf") / "scenarios"


def scenario_search_path() -> list[Path]:
    dirs = []
    env = os.environ.get(SCENARIO_DIR_ENV)
    if env:
        dirs.extend(Path(d) for d in env.split(os.pathsep) if d)
    dirs.append(Path(str(_bundled_dir())))
    return dirs


def resolve_scenario(name_or_path: str) -> Path:
    """A literal path if it exists, else ``<name>.json`` on the scenario search path."""
    p = Path(name_or_path)
    if p.exists():
        return p
    fname = name_or_path if name_or_path.endswith(".json") else name_or_path + ".json"
    for d in scenario_search_path():
        cand = d / fname
        if cand.exists():
            return cand
    return p


def builtin_scenario_paths() -> list[Path]:
    return sorted(Path(str(f)) for f in _bundled_dir().iterdir() if f.name.endswith(".json"))


def builtin_scenarios() -> list[Scenario]:
    return [load_scenario(p) for p in builtin_scenario_paths()]


def builtin_scenario(name: str) -> Scenario:
    return load_scenario(Path(str(_bundled_dir())) / f"{name}.json")


def _directions(records: list[StepRecord]) -> np.ndarray:
    v = np.array([r.velocity for r in records], dtype=float)
    n = np.hypot(v[:, 0], v[:, 1])
    out = np.zeros_like(v)
    last = np.array([1.0, 0.0])
    for k in range(len(v)):
        if n[k] > 1e-9:
            last = v[k] / n[k]
        out[k] = last
    return out


def detect_cycle(
    records: list[StepRecord],
    d_th: float,
    theta_th: float,
    min_records: int = 2000,
    max_period_cv: float = 0.1,
    anchors: int = 60,
) -> bool:
    """Is the robot stuck in a periodic loop?

    Poses in the last quarter of the run are used as anchors. A loop is reported
    when an anchor pose (position within ``d_th``, direction within ``theta_th``)
    was passed through on at least three earlier, separate occasions at
    near-constant period (coefficient of variation below ``max_period_cv``).
    A visit ends only once the robot is more than ``2 * d_th`` away, so a robot
    parked at one spot is not a loop. Runs shorter than ``min_records`` are never
    reported as loops.
    """
    n = len(records)
    if n < min_records:
        return False
    pos = np.array([r.position for r in records], dtype=float)
    dirs = _directions(records)
    tail = int(0.75 * n)
    for k in np.linspace(tail, n - 1, anchors).astype(int):
        diff = pos[: k + 1] - pos[k]
        dist = np.hypot(diff[:, 0], diff[:, 1])
        cos = np.clip(dirs[: k + 1] @ dirs[k], -1.0, 1.0)
        inside = np.flatnonzero((dist <= d_th) & (np.arccos(cos) <= theta_th))
        far = np.flatnonzero(dist > 2.0 * d_th)
        if len(inside) < 4 or len(far) == 0:
            continue
        left_between = np.searchsorted(far, inside[1:]) - np.searchsorted(far, inside[:-1]) > 0
        starts = np.concatenate(([inside[0]], inside[1:][left_between]))
        if len(starts) < 4:
            continue
        periods = np.diff(starts[-4:]).astype(float)
        if periods.std() < max_period_cv * periods.mean():
            return True
    return False

