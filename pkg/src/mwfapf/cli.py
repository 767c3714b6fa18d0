"""Command-line entry point: simulate, compare, validate and list scenarios."""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path
from xml.sax.saxutils import escape

from .memory import TrajectoryMemory
from .scenarios import (
    Scenario,
    ScenarioParseError,
    load_scenario,
    resolve_scenario,
    scenario_search_path,
)
from .sim import Outcome, RunResult, StepRecord, clearance, run
from .supervisor import Mode, Policy
from .world import ConfigError, GeometryError, World

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_MAX_STEPS = 2
EXIT_COLLISION = 3

_EXIT_FOR_OUTCOME = {
    Outcome.GOAL_REACHED: EXIT_OK,
    Outcome.MAX_STEPS_EXCEEDED: EXIT_MAX_STEPS,
    Outcome.COLLISION: EXIT_COLLISION,
}

CSV_COLUMNS = ["tick", "t", "x", "y", "vx", "vy", "mode", "fx", "fy", "min_reading", "keyframe", "event"]
COMPARE_COLUMNS = ["policy", "outcome", "ticks", "path_length", "switches", "wall_follow_fraction", "min_clearance"]

_PATH_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def trajectory_csv(records: list[StepRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(
            [
                r.tick,
                _fmt(r.t),
                _fmt(r.position[0]),
                _fmt(r.position[1]),
                _fmt(r.velocity[0]),
                _fmt(r.velocity[1]),
                r.mode.value,
                _fmt(r.force[0]),
                _fmt(r.force[1]),
                _fmt(r.min_reading),
                int(r.keyframe_recorded),
                r.event,
            ]
        )
    return buf.getvalue()


def _mode_runs(records: list[StepRecord]) -> list[tuple[Mode, list[StepRecord]]]:
    """Split a trajectory into maximal same-mode runs that share their joining point."""
    runs: list[tuple[Mode, list[StepRecord]]] = []
    for r in records:
        if runs and runs[-1][0] is r.mode:
            runs[-1][1].append(r)
        else:
            if runs:
                runs[-1][1].append(r)
            runs.append((r.mode, [r]))
    return runs


class _Canvas:
    """World-to-pixel mapping with y pointing up."""

    def __init__(self, world: World, width: int = 800, margin: int = 20):
        b = world.bounds
        self.scale = (width - 2 * margin) / (b.xmax - b.xmin)
        self.margin = margin
        self.b = b
        self.width = width
        self.height = int(round((b.ymax - b.ymin) * self.scale)) + 2 * margin

    def xy(self, p) -> tuple[float, float]:
        x = self.margin + (p[0] - self.b.xmin) * self.scale
        y = self.margin + (self.b.ymax - p[1]) * self.scale
        return x, y

    def points(self, pts) -> str:
        return " ".join("{:.2f},{:.2f}".format(*self.xy(p)) for p in pts)


def _svg_world(c: _Canvas, world: World) -> list[str]:
    b = world.bounds
    out = [
        f'<rect x="0" y="0" width="{c.width}" height="{c.height}" fill="white"/>',
        f'<polygon points="{c.points(b.corners())}" fill="none" stroke="black" stroke-width="2"/>',
    ]
    for poly in world.obstacles:
        out.append(f'<polygon points="{c.points(poly)}" fill="#999999" stroke="#555555"/>')
    sx, sy = c.xy(world.start)
    gx, gy = c.xy(world.goal)
    out.append(f'<circle cx="{sx:.2f}" cy="{sy:.2f}" r="6" fill="#2ca02c"><title>start</title></circle>')
    out.append(
        f'<rect x="{gx - 6:.2f}" y="{gy - 6:.2f}" width="12" height="12" fill="#ff7f0e"><title>goal</title></rect>'
    )
    return out


def _svg_path(c: _Canvas, records: list[StepRecord], color: str, label: str = "") -> list[str]:
    out = []
    title = f"<title>{escape(label)}</title>" if label else ""
    for mode, seg in _mode_runs(records):
        if len(seg) < 2:
            continue
        dash = ' stroke-dasharray="6,4"' if mode is Mode.WFM else ""
        out.append(
            f'<polyline points="{c.points(r.position for r in seg)}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"{dash} class="{mode.value}">{title}</polyline>'
        )
    return out


def _svg_keyframes(c: _Canvas, memory: TrajectoryMemory) -> list[str]:
    out = []
    for f in memory.frames:
        x, y = c.xy(f.p)
        if f.is_local_min:
            out.append(
                f'<path d="M{x - 5:.2f},{y - 5:.2f} L{x + 5:.2f},{y + 5:.2f} M{x - 5:.2f},{y + 5:.2f} '
                f'L{x + 5:.2f},{y - 5:.2f}" stroke="black" stroke-width="2" class="local-min"/>'
            )
        else:
            out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2" fill="black" class="keyframe"/>')
    return out


def _svg_document(c: _Canvas, body: list[str]) -> str:
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{c.width}" height="{c.height}" '
        f'viewBox="0 0 {c.width} {c.height}">'
    )
    return "\n".join([head, *body, "</svg>"]) + "\n"


def render_svg(world: World, records: list[StepRecord], memory: TrajectoryMemory, out_path) -> None:
    """Write the world, the trajectory (APF solid, WFM dashed) and the key frames to an SVG file."""
    if not records:
        raise ValueError("nothing to render: empty trajectory")
    c = _Canvas(world)
    body = _svg_world(c, world) + _svg_path(c, records, _PATH_COLORS[0]) + _svg_keyframes(c, memory)
    Path(out_path).write_text(_svg_document(c, body), encoding="utf-8")


def render_compare_svg(world: World, results: list[tuple[str, RunResult]], out_path) -> None:
    c = _Canvas(world)
    body = _svg_world(c, world)
    for k, (name, res) in enumerate(results):
        color = _PATH_COLORS[k % len(_PATH_COLORS)]
        body += _svg_path(c, res.records, color, name)
        y = 20 + 16 * k
        body.append(f'<text x="{c.margin + 10}" y="{y + c.margin}" fill="{color}" font-size="13">{escape(name)}</text>')
    Path(out_path).write_text(_svg_document(c, body), encoding="utf-8")


def _load(args) -> Scenario:
    path = resolve_scenario(args.scenario)
    return load_scenario(path, args.set)


def _summary(sc: Scenario, res: RunResult) -> str:
    o = res.outcome
    clr = clearance(sc.world, res.records, sc.params.sim.radius)
    return (
        f"{sc.name}: outcome={o.outcome.value} ticks={o.final_tick} path_length={o.path_length:.3f} "
        f"switches={res.switches} min_clearance={clr:.3f}"
    )


def cmd_simulate(args) -> int:
    sc = _load(args)
    res = run(sc.world, sc.sensors, sc.params, args.policy, args.seed)
    if args.csv:
        Path(args.csv).write_text(trajectory_csv(res.records), encoding="utf-8")
    if args.svg:
        render_svg(sc.world, res.records, res.memory, args.svg)
    print(_summary(sc, res))
    return _EXIT_FOR_OUTCOME[res.outcome.outcome]


def _parse_policies(text: str) -> list[Policy]:
    out = []
    for name in text.split(","):
        name = name.strip()
        try:
            out.append(Policy(name))
        except ValueError:
            raise ConfigError("policy", f"unknown policy {name!r}; choose from {[p.value for p in Policy]}") from None
    return out


def cmd_compare(args) -> int:
    policies = _parse_policies(args.policies)
    if len(policies) < 2:
        raise ConfigError("compare.policies", "compare needs at least two policies")
    sc = _load(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    results = []
    rows = []
    for p in policies:
        res = run(sc.world, sc.sensors, sc.params, p, args.seed)
        results.append((p.value, res))
        rows.append(
            [
                p.value,
                res.outcome.outcome.value,
                res.outcome.final_tick,
                f"{res.outcome.path_length:.3f}",
                res.switches,
                f"{res.wall_follow_fraction:.3f}",
                f"{clearance(sc.world, res.records, sc.params.sim.radius):.3f}",
            ]
        )

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COMPARE_COLUMNS)
    w.writerows(rows)
    (out_dir / f"{sc.name}_compare.csv").write_text(buf.getvalue(), encoding="utf-8")
    render_compare_svg(sc.world, results, out_dir / f"{sc.name}_compare.svg")

    widths = [max(len(str(x)) for x in col) for col in zip(COMPARE_COLUMNS, *rows)]
    for row in [COMPARE_COLUMNS, *rows]:
        print("  ".join(str(x).ljust(n) for x, n in zip(row, widths)).rstrip())
    return EXIT_OK


def cmd_validate(args) -> int:
    sc = load_scenario(resolve_scenario(args.scenario))
    print(f"{sc.name}: ok")
    return EXIT_OK


def cmd_list(args) -> int:
    seen = set()
    for d in scenario_search_path():
        if not d.is_dir():
            continue
        for p in sorted(d.glob("*.json")):
            if p.stem in seen:
                continue
            seen.add(p.stem)
            print(f"{p.stem}\t{p}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mwfapf", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_args(p):
        p.add_argument("scenario", help="scenario file, or the name of one on the search path")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a parameter, e.g. --set supervisor.hysteresis=20 (repeatable)",
        )

    p = sub.add_parser("simulate", help="run one policy on a scenario")
    scenario_args(p)
    p.add_argument("--policy", choices=[x.value for x in Policy], default=Policy.FULL.value)
    p.add_argument("--csv", help="write the per-tick trajectory here")
    p.add_argument("--svg", help="write a plot of the run here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="run several policies on the same scenario")
    scenario_args(p)
    p.add_argument("--policies", default="full,memoryless,wfm-memory", help="comma-separated policy names")
    p.add_argument("--out-dir", default=".", help="directory for the comparison CSV and SVG")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("validate", help="parse and check a scenario without running it")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("list-scenarios", help="list scenarios on the search path")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except ConfigError as exc:
        print(f"error: invariant {exc.invariant} violated: {exc}", file=sys.stderr)
    except (GeometryError, ValueError, TypeError, KeyError) as exc:
        print(f"error: invalid scenario: {exc}", file=sys.stderr)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
