"""Command-line interface: layout solving, tools, composites, metrics, scripts."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .driver import run_script, validate_script
from .errors import RoomforgeError, ScriptError
from .geometry import Pose2, derive_rng
from .layout import RoomSpec, ScoreWeights, plan_into_scene, solve_layout, validate_connectivity
from .metrics import metrics_report
from .feasibility import ProjectionConfig, enforce_feasibility, project_nonpenetration, remove_fallen
from .scene.model import Scene
from .scene.serialize import deserialize_scene, serialize_scene
from .scene.surfaces import get_surface
from .sim.composites import create_arrangement, create_pile, create_stack, fill_container
from .sim.engine import SimConfig
from .tools.facing import check_facing
from .tools.physics_check import check_physics
from .tools.reach import check_reachability
from .tools.snap import snap_to_object


def _load_scene(path: str) -> Scene:
    return deserialize_scene(Path(path).read_bytes())


def _save_scene(scene: Scene, path: str) -> None:
    Path(path).write_bytes(serialize_scene(scene))


def _emit(payload) -> None:
    click.echo(json.dumps(payload, indent=1))


@click.group()
def main():
    """Deterministic indoor-scene construction engine."""


# --- layout ----------------------------------------------------------------


@main.group()
def layout():
    """Floor-plan search and validation."""


@layout.command("solve")
@click.option("--specs", "specs_path", required=True, type=click.Path(exists=True))
@click.option("--seed", type=int, default=0)
@click.option("--node-budget", type=int, default=None)
@click.option("--timeout", type=float, default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
def layout_solve(specs_path, seed, node_budget, timeout, out_path):
    """Solve a floor plan from a room-spec JSON file."""
    data = json.loads(Path(specs_path).read_text(encoding="utf-8"))
    specs = [
        RoomSpec(
            name=s["name"],
            room_type=s.get("room_type", "room"),
            width=float(s["width"]),
            length=float(s["length"]),
            required_adjacent=frozenset(s.get("required_adjacent", [])),
            prompt=s.get("prompt", ""),
        )
        for s in data["rooms"]
    ]
    plan = solve_layout(specs, ScoreWeights(), timeout=timeout, node_budget=node_budget)
    scene = Scene(seed=seed)
    plan_into_scene(scene, plan)
    _emit(
        {
            "rooms": [
                {"name": p.spec.name, "origin": list(p.origin), "rotated90": p.rotated90}
                for p in plan.rooms
            ]
        }
    )
    if out_path:
        _save_scene(scene, out_path)


@layout.command("validate")
@click.option("--scene", "scene_path", required=True, type=click.Path(exists=True))
def layout_validate(scene_path):
    """Check connectivity of a scene's rooms."""
    report = validate_connectivity(_load_scene(scene_path))
    _emit({"ok": report.ok, "errors": report.errors, "unreachable": report.unreachable})
    sys.exit(0 if report.ok else 1)


# --- tools -----------------------------------------------------------------


@main.group()
def tool():
    """Placement verification tools; reports on standard output."""


@tool.command("facing")
@click.option("--scene", "scene_path", required=True, type=click.Path(exists=True))
@click.option("--source", required=True)
@click.option("--target", required=True)
def tool_facing(scene_path, source, target):
    report = check_facing(_load_scene(scene_path), source, target)
    _emit(
        {
            "faces_toward": report.faces_toward,
            "faces_away": report.faces_away,
            "optimal_theta": report.optimal_theta,
            "target_is_circular": report.target_is_circular,
        }
    )


@tool.command("snap")
@click.option("--scene", "scene_path", required=True, type=click.Path(exists=True))
@click.option("--source", required=True)
@click.option("--target", required=True)
@click.option("--mode", type=click.Choice(["toward", "away", "none"]), default="none")
@click.option("--out", "out_path", type=click.Path(), default=None)
def tool_snap(scene_path, source, target, mode, out_path):
    result = snap_to_object(_load_scene(scene_path), source, target, mode)
    _emit({"moved_by": result.moved_by, "final_xyz": result.final_pose.translation.tolist()})
    if out_path:
        _save_scene(result.scene, out_path)


@tool.command("reach")
@click.option("--scene", "scene_path", required=True, type=click.Path(exists=True))
@click.option("--hr", type=float, default=0.35)
@click.option("--room", default=None)
def tool_reach(scene_path, hr, room):
    report = check_reachability(_load_scene(scene_path), hr, room)
    _emit(
        {
            "fully_reachable": report.fully_reachable,
            "region_count": report.region_count,
            "reachability_ratio": report.reachability_ratio,
            "blocking_object_ids": list(report.blocking_object_ids),
        }
    )


@tool.command("physics")
@click.option("--scene", "scene_path", required=True, type=click.Path(exists=True))
@click.option("--stage", type=click.Choice(["furniture", "wall", "ceiling", "manipuland"]), default="furniture")
@click.option("--entity", default=None)
def tool_physics(scene_path, stage, entity):
    report = check_physics(_load_scene(scene_path), stage, entity)
    _emit(report.to_dict())


# --- composites ------------------------------------------------------------


@main.group()
def compose():
    """Composite placement tools; emit result JSON and the updated scene."""


def _composite_common(scene_path, surface_id):
    scene = _load_scene(scene_path)
    surface = get_surface(scene, surface_id)
    return scene, surface


@compose.command("stack")
@click.option("--scene", "scene_path", required=True, type=click.Path(exists=True))
@click.option("--surface", "surface_id", required=True)
@click.option("--assets", required=True, help="Comma-separated asset ids, bottom first.")
@click.option("--x", type=float, default=0.0)
@click.option("--y", type=float, default=0.0)
@click.option("--theta", type=float, default=0.0)
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_path", type=click.Path(), default=None)
def compose_stack(scene_path, surface_id, assets, x, y, theta, seed, out_path):
    scene, surface = _composite_common(scene_path, surface_id)
    items = [scene.assets[a] for a in assets.split(",")]
    result = create_stack(items, surface, Pose2(x, y, theta), SimConfig(seed=seed))
    added = []
    if result.success:
        for i, asset_id in enumerate(assets.split(",")):
            obj = scene.add_object(asset_id, result.poses[f"item_{i}"], name="stack_item")
            added.append(obj.id)
    _emit({"success": result.success, "objects": added, "stable_prefix": result.stable_prefix})
    if out_path:
        _save_scene(scene, out_path)


@compose.command("fill")
@click.option("--scene", "scene_path", required=True, type=click.Path(exists=True))
@click.option("--surface", "surface_id", required=True)
@click.option("--container", required=True)
@click.option("--assets", required=True)
@click.option("--x", type=float, default=0.0)
@click.option("--y", type=float, default=0.0)
@click.option("--theta", type=float, default=0.0)
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_path", type=click.Path(), default=None)
def compose_fill(scene_path, surface_id, container, assets, x, y, theta, seed, out_path):
    scene, surface = _composite_common(scene_path, surface_id)
    fill_ids = assets.split(",")
    result = fill_container(
        scene.assets[container],
        [scene.assets[a] for a in fill_ids],
        surface,
        Pose2(x, y, theta),
        SimConfig(seed=seed),
        rng=derive_rng(seed, "compose.fill"),
    )
    added = [scene.add_object(container, result.poses["container"], name="container").id]
    for fid in result.inside_ids:
        index = int(fid.split("_")[1])
        added.append(scene.add_object(fill_ids[index], result.poses[fid], name="fill_item").id)
    _emit({"success": True, "objects": added, "removed": list(result.removed_ids)})
    if out_path:
        _save_scene(scene, out_path)


@compose.command("arrange")
@click.option("--scene", "scene_path", required=True, type=click.Path(exists=True))
@click.option("--surface", "surface_id", required=True)
@click.option("--container", required=True)
@click.option("--items", "items_json", required=True, help='JSON: [{"asset":..,"x":..,"y":..,"theta":..}]')
@click.option("--x", type=float, default=0.0)
@click.option("--y", type=float, default=0.0)
@click.option("--theta", type=float, default=0.0)
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_path", type=click.Path(), default=None)
def compose_arrange(scene_path, surface_id, container, items_json, x, y, theta, seed, out_path):
    scene, surface = _composite_common(scene_path, surface_id)
    spec = json.loads(items_json)
    items = [
        (scene.assets[i["asset"]], Pose2(float(i["x"]), float(i["y"]), float(i.get("theta", 0.0))))
        for i in spec
    ]
    result = create_arrangement(
        scene.assets[container], items, surface, Pose2(x, y, theta), SimConfig(seed=seed)
    )
    added = [scene.add_object(container, result.poses["container"], name="container").id]
    for i, entry in enumerate(spec):
        added.append(scene.add_object(entry["asset"], result.poses[f"item_{i}"], name="arrangement_item").id)
    _emit({"success": True, "objects": added})
    if out_path:
        _save_scene(scene, out_path)


@compose.command("pile")
@click.option("--scene", "scene_path", required=True, type=click.Path(exists=True))
@click.option("--surface", "surface_id", required=True)
@click.option("--assets", required=True)
@click.option("--x", type=float, default=0.0)
@click.option("--y", type=float, default=0.0)
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_path", type=click.Path(), default=None)
def compose_pile(scene_path, surface_id, assets, x, y, seed, out_path):
    scene, surface = _composite_common(scene_path, surface_id)
    asset_ids = assets.split(",")
    result = create_pile(
        [scene.assets[a] for a in asset_ids],
        surface,
        Pose2(x, y, 0.0),
        SimConfig(seed=seed),
        rng=derive_rng(seed, "compose.pile"),
    )
    added = []
    for iid in result.inside_ids:
        index = int(iid.split("_")[1])
        added.append(scene.add_object(asset_ids[index], result.poses[iid], name="pile_item").id)
    _emit({"success": True, "objects": added, "fallen": list(result.removed_ids)})
    if out_path:
        _save_scene(scene, out_path)


# --- feasibility -----------------------------------------------------------


@main.group()
def feasibility():
    """Non-penetration projection, settling, and fallen-object cleanup."""


@feasibility.command("project")
@click.option("--scene", "scene_path", required=True, type=click.Path(exists=True))
@click.option("--epsilon", type=float, default=1e-5)
@click.option("--out", "out_path", type=click.Path(), default=None)
def feasibility_project(scene_path, epsilon, out_path):
    result = project_nonpenetration(_load_scene(scene_path), cfg=ProjectionConfig(epsilon=epsilon))
    _emit({"total_displacement": result.total_displacement, "iterations": result.iterations})
    if out_path:
        _save_scene(result.scene, out_path)


@feasibility.command("settle")
@click.option("--scene", "scene_path", required=True, type=click.Path(exists=True))
@click.option("--stage", type=click.Choice(["post_furniture", "per_entity", "post_manipulands"]), required=True)
@click.option("--entity", default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
def feasibility_settle(scene_path, stage, entity, out_path):
    scene, report = enforce_feasibility(_load_scene(scene_path), stage, entity)
    _emit(
        {
            "stage": report.stage,
            "projection_displacement": report.projection.total_displacement,
            "settled_steps": report.settle.steps,
        }
    )
    if out_path:
        _save_scene(scene, out_path)


@feasibility.command("clean")
@click.option("--scene", "scene_path", required=True, type=click.Path(exists=True))
@click.option("--stage", type=click.Choice(["post_furniture", "per_entity", "post_manipulands"]), default="post_manipulands")
@click.option("--entity", default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
def feasibility_clean(scene_path, stage, entity, out_path):
    """Enforce feasibility, then remove objects that fell."""
    scene, report = enforce_feasibility(_load_scene(scene_path), stage, entity)
    scene, removed = remove_fallen(scene, report.settle)
    _emit({"removed": removed})
    if out_path:
        _save_scene(scene, out_path)


# --- metrics ---------------------------------------------------------------


@main.group()
def metrics():
    """Per-scene simulation-readiness metrics."""


@metrics.command("report")
@click.option("--scene", "scene_path", required=True, type=click.Path(exists=True))
@click.option("--hr", type=float, default=0.35)
@click.option("--seed", type=int, default=0)
@click.option("--room", default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
def metrics_report_cmd(scene_path, hr, seed, room, out_path):
    report = metrics_report(
        _load_scene(scene_path),
        robot_half_width=hr,
        rng=derive_rng(seed, "metrics"),
        room_id=room,
    )
    payload = report.to_dict()
    _emit(payload)
    if out_path:
        Path(out_path).write_text(json.dumps(payload, indent=1), encoding="utf-8")


# --- script ----------------------------------------------------------------


@main.group()
def script():
    """Declarative build-script execution."""


@script.command("run")
@click.argument("build_path", type=click.Path(exists=True))
@click.option("--scene", "scene_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
@click.option("--log", "log_path", type=click.Path(), default=None)
def script_run(build_path, scene_path, out_path, log_path):
    """Run BUILD_PATH; exit 0 on success, 2 on schema error, 1 on abort."""
    try:
        script_doc = json.loads(Path(build_path).read_text(encoding="utf-8"))
        validate_script(script_doc)
    except (ScriptError, json.JSONDecodeError) as exc:
        click.echo(f"script schema error: {exc}", err=True)
        sys.exit(2)
    initial = _load_scene(scene_path) if scene_path else None
    result = run_script(script_doc, initial, out_path=out_path, log_path=log_path)
    _emit({"status": result.status, "steps": len(result.log)})
    sys.exit(0 if result.ok else 1)


if __name__ == "__main__":
    main()
