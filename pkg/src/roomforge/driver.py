"""Declarative build-script execution with checkpoints and rollback.

A build script is a JSON document of sequential tool invocations against a
scene. Each step derives its random stream from (scene seed, step index,
op name), so replays are byte-identical and inserting a step never
perturbs the randomness of steps that keep their indices. Checkpoints
snapshot the full scene; id counters and random streams are derived state,
so restoring a snapshot reproduces identical downstream behavior.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .errors import RoomforgeError, ScriptError
from .geometry import ConvexPiece, Pose2, derive_rng
from .layout import (
    FloorPlan,
    RoomSpec,
    ScoreWeights,
    add_opening,
    mirror_opening_to_neighbor,
    plan_into_scene,
    solve_layout,
    validate_connectivity,
)
from .metrics import metrics_report
from .noise import apply_noise, select_style
from .feasibility import (
    FallenThresholds,
    ProjectionConfig,
    enforce_feasibility,
    project_nonpenetration,
    remove_fallen,
)
from .scene.builders import box_asset, cylinder_asset, thin_covering_asset, tub_asset
from .scene.model import AssetCategory, Scene
from .scene.query import list_support_surfaces, query_scene_state
from .scene.serialize import deserialize_scene, serialize_scene
from .scene.surfaces import (
    ceiling_object_pose,
    ceiling_surface,
    get_surface,
    place_on_surface,
    scene_surfaces,
    wall_mount_surface,
    wall_object_pose,
)
from .sim.composites import (
    CompositeConfig,
    create_arrangement,
    create_pile,
    create_stack,
    fill_container,
)
from .sim.engine import SettleReport, SimConfig
from .scene.architecture import scene_static_pieces
from .tools.facing import check_facing
from .tools.physics_check import check_physics
from .tools.reach import check_reachability
from .tools.snap import snap_to_object

SCRIPT_VERSION = "1"
ON_ERROR_POLICIES = ("abort", "skip", "rollback")


@dataclass
class Checkpoint:
    label: str
    scene: Scene
    step_index: int


@dataclass
class RunContext:
    scene: Scene
    style: str = "natural"
    checkpoints: list[Checkpoint] = field(default_factory=list)
    last_settle: SettleReport | None = None
    log: list[dict] = field(default_factory=list)


@dataclass
class RunResult:
    scene: Scene
    log: list[dict]
    status: str  # "ok" or "aborted".

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def _pose2_from(args: dict) -> Pose2:
    return Pose2(float(args.get("x", 0.0)), float(args.get("y", 0.0)), float(args.get("theta", 0.0)))


def _styled(ctx: RunContext, args: dict, category: str, pose: Pose2, rng) -> Pose2:
    style = args.get("style", ctx.style)
    if style in (None, "none"):
        return pose
    if style == "auto":
        style = ctx.style
    return apply_noise(pose, category, style, rng)


def _composite_static_env(ctx: RunContext, surface) -> list[ConvexPiece]:
    """Architecture plus the surface owner and everything already on it."""
    env = list(scene_static_pieces(ctx.scene))
    scene = ctx.scene
    owner_id = surface.owner_id
    if owner_id in scene.objects:
        owner = scene.objects[owner_id]
        for piece in scene.asset_of(owner).collision_pieces:
            env.append(ConvexPiece(piece.world_vertices(owner.pose)))
    for oid in sorted(scene.objects):
        obj = scene.objects[oid]
        if obj.support is not None and obj.support.surface_id == surface.id:
            for piece in scene.asset_of(obj).collision_pieces:
                env.append(ConvexPiece(piece.world_vertices(obj.pose)))
    return env


def _sim_cfg(args: dict, seed: int) -> SimConfig:
    return SimConfig(
        time_step=float(args.get("time_step", 0.001)),
        duration=float(args.get("duration", 5.0)),
        seed=seed,
    )


def _add_composite_objects(ctx: RunContext, result, asset_ids: dict[str, str], name: str) -> list[str]:
    added = []
    for body_id in sorted(result.poses):
        if body_id not in asset_ids:
            continue
        obj = ctx.scene.add_object(asset_ids[body_id], result.poses[body_id], name=name)
        added.append(obj.id)
    return added


# --- Step implementations -------------------------------------------------


def _op_layout_solve(ctx: RunContext, args: dict, rng) -> dict:
    specs = [
        RoomSpec(
            name=s["name"],
            room_type=s.get("room_type", "room"),
            width=float(s["width"]),
            length=float(s["length"]),
            required_adjacent=frozenset(s.get("required_adjacent", [])),
            prompt=s.get("prompt", ""),
        )
        for s in args["specs"]
    ]
    weights = ScoreWeights(**args.get("weights", {}))
    plan = solve_layout(
        specs,
        weights,
        timeout=args.get("timeout"),
        node_budget=args.get("node_budget"),
        rng=rng,
    )
    plan_into_scene(
        ctx.scene,
        plan,
        wall_height=float(args.get("wall_height", 2.5)),
        wall_thickness=float(args.get("wall_thickness", 0.1)),
    )
    return {
        "rooms": [
            {"name": p.spec.name, "origin": list(p.origin), "rotated90": p.rotated90}
            for p in plan.rooms
        ]
    }


def _op_layout_opening(kind: str):
    def run(ctx: RunContext, args: dict, rng) -> dict:
        room = ctx.scene.get_room(args["room"])
        dims = {"width": float(args["width"]), "height": float(args["height"])}
        if kind == "window":
            dims["sill"] = float(args["sill"])
        add_opening(room, kind, args["segment"], args.get("coarse", "center"), dims, rng)
        opening = room.doors[-1] if kind == "door" else room.windows[-1]
        if args.get("mirror", True):
            mirror_opening_to_neighbor(ctx.scene, room.id, kind, opening)
        return {"segment": args["segment"], "offset": float(opening.offset)}

    return run


def _op_layout_open_connection(ctx: RunContext, args: dict, rng) -> dict:
    room = ctx.scene.get_room(args["room"])
    seg = room.segment(args["segment"])
    if seg.shared_with is None:
        raise ScriptError(f"segment {seg.id!r} is exterior; open connections need a neighbor")
    if seg.id not in room.open_connections:
        room.open_connections.append(seg.id)
    neighbor = ctx.scene.get_room(seg.shared_with)
    for other in neighbor.walls:
        if other.shared_with == room.id and other.id not in neighbor.open_connections:
            neighbor.open_connections.append(other.id)
    return {"room": room.id, "segment": seg.id}


def _op_layout_validate(ctx: RunContext, args: dict, rng) -> dict:
    report = validate_connectivity(ctx.scene)
    return {"ok": report.ok, "errors": report.errors, "unreachable": report.unreachable}


def _op_asset_box(ctx: RunContext, args: dict, rng) -> dict:
    asset = box_asset(
        args["id"],
        args["size"],
        float(args["mass"]),
        category=AssetCategory(args.get("category", "furniture")),
        friction=float(args.get("friction", 0.5)),
    )
    ctx.scene.add_asset(asset)
    return {"asset": asset.id}


def _op_asset_cylinder(ctx: RunContext, args: dict, rng) -> dict:
    asset = cylinder_asset(
        args["id"],
        float(args["radius"]),
        float(args["height"]),
        float(args["mass"]),
        category=AssetCategory(args.get("category", "furniture")),
        friction=float(args.get("friction", 0.5)),
    )
    ctx.scene.add_asset(asset)
    return {"asset": asset.id}


def _op_asset_tub(ctx: RunContext, args: dict, rng) -> dict:
    asset = tub_asset(
        args["id"],
        args["inner_size"],
        float(args.get("wall", 0.01)),
        float(args["mass"]),
        category=AssetCategory(args.get("category", "manipuland")),
    )
    ctx.scene.add_asset(asset)
    return {"asset": asset.id}


def _op_asset_covering(ctx: RunContext, args: dict, rng) -> dict:
    asset = thin_covering_asset(args["id"], args["size"])
    ctx.scene.add_asset(asset)
    return {"asset": asset.id}


def _op_place_furniture(ctx: RunContext, args: dict, rng) -> dict:
    room = ctx.scene.get_room(args["room"])
    surface = get_surface(ctx.scene, f"{room.id}/floor")
    pose = _styled(ctx, args, "furniture", _pose2_from(args), rng)
    obj = place_on_surface(
        ctx.scene,
        args["asset"],
        surface,
        pose,
        name=args.get("name"),
        welded=bool(args.get("welded", False)),
    )
    return {"object": obj.id}


def _op_place_manipuland(ctx: RunContext, args: dict, rng) -> dict:
    surface = get_surface(ctx.scene, args["surface"])
    pose = _styled(ctx, args, "manipuland", _pose2_from(args), rng)
    obj = place_on_surface(ctx.scene, args["asset"], surface, pose, name=args.get("name"))
    return {"object": obj.id}


def _op_place_wall(ctx: RunContext, args: dict, rng) -> dict:
    room = ctx.scene.get_room(args["room"])
    surface = wall_mount_surface(room, args["segment"])
    local = Pose2(float(args.get("x", 0.0)), float(args.get("z", 0.0)), float(args.get("theta", 0.0)))
    local = _styled(ctx, args, "wall", local, rng)
    pose = wall_object_pose(surface, local.x, local.y, local.theta)
    obj = ctx.scene.add_object(args["asset"], pose, name=args.get("name"), welded=True)
    return {"object": obj.id}


def _op_place_ceiling(ctx: RunContext, args: dict, rng) -> dict:
    room = ctx.scene.get_room(args["room"])
    surface = ceiling_surface(room)
    local = _styled(ctx, args, "ceiling", _pose2_from(args), rng)
    pose = ceiling_object_pose(surface, local.x, local.y, local.theta)
    obj = ctx.scene.add_object(args["asset"], pose, name=args.get("name"), welded=True)
    return {"object": obj.id}


def _op_remove_object(ctx: RunContext, args: dict, rng) -> dict:
    ctx.scene.remove_object(args["object"])
    return {"removed": args["object"]}


def _op_tool_snap(ctx: RunContext, args: dict, rng) -> dict:
    result = snap_to_object(ctx.scene, args["source"], args["target"], args.get("mode", "none"))
    ctx.scene = result.scene
    return {"moved_by": result.moved_by}


def _op_tool_facing(ctx: RunContext, args: dict, rng) -> dict:
    report = check_facing(ctx.scene, args["source"], args["target"])
    return {
        "faces_toward": report.faces_toward,
        "faces_away": report.faces_away,
        "optimal_theta": report.optimal_theta,
        "target_is_circular": report.target_is_circular,
    }


def _op_tool_reach(ctx: RunContext, args: dict, rng) -> dict:
    report = check_reachability(ctx.scene, float(args.get("hr", 0.35)), args.get("room"))
    return {
        "fully_reachable": report.fully_reachable,
        "region_count": report.region_count,
        "reachability_ratio": report.reachability_ratio,
        "blocking_object_ids": list(report.blocking_object_ids),
    }


def _op_tool_physics(ctx: RunContext, args: dict, rng) -> dict:
    report = check_physics(ctx.scene, args.get("stage", "furniture"), args.get("entity"))
    return report.to_dict()


def _op_compose_stack(ctx: RunContext, args: dict, rng) -> dict:
    surface = get_surface(ctx.scene, args["surface"])
    assets = [ctx.scene.assets[a] for a in args["assets"]]
    result = create_stack(
        assets,
        surface,
        _pose2_from(args),
        _sim_cfg(args, ctx.scene.seed),
        static_env=_composite_static_env(ctx, surface),
    )
    ctx.last_settle = result.report
    if not result.success:
        return {
            "success": False,
            "stable_prefix": result.stable_prefix,
            "fallen": list(result.fallen_ids),
        }
    asset_ids = {f"item_{i}": args["assets"][i] for i in range(len(assets))}
    added = _add_composite_objects(ctx, result, asset_ids, args.get("name", "stack_item"))
    return {"success": True, "objects": added}


def _op_compose_fill(ctx: RunContext, args: dict, rng) -> dict:
    surface = get_surface(ctx.scene, args["surface"])
    container = ctx.scene.assets[args["container"]]
    fills = [ctx.scene.assets[a] for a in args["assets"]]
    result = fill_container(
        container,
        fills,
        surface,
        _pose2_from(args),
        _sim_cfg(args, ctx.scene.seed),
        static_env=_composite_static_env(ctx, surface),
        rng=rng,
    )
    ctx.last_settle = result.report
    asset_ids = {f"fill_{i}": args["assets"][i] for i in range(len(fills))}
    asset_ids["container"] = args["container"]
    kept = {"container", *result.inside_ids}
    filtered = {bid: pose for bid, pose in result.poses.items() if bid in kept}
    result_for_add = type(result)(
        success=True, poses=filtered, report=result.report
    )
    added = _add_composite_objects(ctx, result_for_add, asset_ids, args.get("name", "fill_item"))
    return {"success": True, "objects": added, "removed": list(result.removed_ids)}


def _op_compose_arrange(ctx: RunContext, args: dict, rng) -> dict:
    surface = get_surface(ctx.scene, args["surface"])
    container = ctx.scene.assets[args["container"]]
    items = [
        (ctx.scene.assets[item["asset"]], Pose2(float(item["x"]), float(item["y"]), float(item.get("theta", 0.0))))
        for item in args["items"]
    ]
    result = create_arrangement(
        container,
        items,
        surface,
        _pose2_from(args),
        _sim_cfg(args, ctx.scene.seed),
        static_env=_composite_static_env(ctx, surface),
    )
    ctx.last_settle = result.report
    asset_ids = {f"item_{i}": args["items"][i]["asset"] for i in range(len(items))}
    asset_ids["container"] = args["container"]
    added = _add_composite_objects(ctx, result, asset_ids, args.get("name", "arrangement_item"))
    return {"success": True, "objects": added}


def _op_compose_pile(ctx: RunContext, args: dict, rng) -> dict:
    surface = get_surface(ctx.scene, args["surface"])
    assets = [ctx.scene.assets[a] for a in args["assets"]]
    result = create_pile(
        assets,
        surface,
        _pose2_from(args),
        _sim_cfg(args, ctx.scene.seed),
        static_env=_composite_static_env(ctx, surface),
        rng=rng,
    )
    ctx.last_settle = result.report
    asset_ids = {f"item_{i}": args["assets"][i] for i in range(len(assets))}
    added = _add_composite_objects(ctx, result, asset_ids, args.get("name", "pile_item"))
    return {"success": True, "objects": added, "fallen": list(result.removed_ids)}


def _op_feasibility_project(ctx: RunContext, args: dict, rng) -> dict:
    cfg = ProjectionConfig(epsilon=float(args.get("epsilon", 1e-5)))
    result = project_nonpenetration(ctx.scene, args.get("movable"), cfg)
    ctx.scene = result.scene
    return {
        "total_displacement": result.total_displacement,
        "iterations": result.iterations,
    }


def _op_feasibility_enforce(ctx: RunContext, args: dict, rng) -> dict:
    scene, report = enforce_feasibility(
        ctx.scene,
        args.get("stage", "post_furniture"),
        args.get("entity"),
        sim_cfg=_sim_cfg(args, ctx.scene.seed),
    )
    ctx.scene = scene
    ctx.last_settle = report.settle
    return {
        "stage": report.stage,
        "projection_displacement": report.projection.total_displacement,
        "settled_steps": report.settle.steps,
    }


def _op_feasibility_clean(ctx: RunContext, args: dict, rng) -> dict:
    if ctx.last_settle is None:
        return {"removed": []}
    scene, removed = remove_fallen(ctx.scene, ctx.last_settle, FallenThresholds())
    ctx.scene = scene
    return {"removed": removed}


def _op_metrics_report(ctx: RunContext, args: dict, rng) -> dict:
    report = metrics_report(
        ctx.scene,
        robot_half_width=float(args.get("hr", 0.35)),
        sim_cfg=_sim_cfg(args, ctx.scene.seed),
        rng=rng,
        room_id=args.get("room"),
    )
    return report.to_dict()


def _op_query_state(ctx: RunContext, args: dict, rng) -> dict:
    return {
        "objects": query_scene_state(
            ctx.scene,
            category=args.get("category"),
            room=args.get("room"),
            surface=args.get("surface"),
        )
    }


def _op_query_surfaces(ctx: RunContext, args: dict, rng) -> dict:
    return {"surfaces": list_support_surfaces(ctx.scene)}


def _op_scene_set_style(ctx: RunContext, args: dict, rng) -> dict:
    if "style" in args:
        style = args["style"]
        if style not in ("natural", "perfect"):
            raise ScriptError(f"unknown style {style!r}")
    else:
        style = select_style(args.get("prompt", ""))
    ctx.style = style
    return {"style": style}


def _op_checkpoint(ctx: RunContext, args: dict, rng) -> dict:
    label = args.get("label", f"checkpoint_{len(ctx.checkpoints)}")
    ctx.checkpoints.append(Checkpoint(label=label, scene=ctx.scene.copy(), step_index=len(ctx.log)))
    return {"label": label}


def _op_rollback(ctx: RunContext, args: dict, rng) -> dict:
    if not ctx.checkpoints:
        raise ScriptError("rollback requested with no checkpoint")
    label = args.get("label")
    if label is None:
        checkpoint = ctx.checkpoints[-1]
    else:
        matches = [c for c in ctx.checkpoints if c.label == label]
        if not matches:
            raise ScriptError(f"no checkpoint labeled {label!r}")
        checkpoint = matches[-1]
    ctx.scene = checkpoint.scene.copy()
    return {"restored": checkpoint.label}


OPS: dict[str, Callable[[RunContext, dict, Any], dict]] = {
    "layout.solve": _op_layout_solve,
    "layout.add_door": _op_layout_opening("door"),
    "layout.add_window": _op_layout_opening("window"),
    "layout.add_open_connection": _op_layout_open_connection,
    "layout.validate": _op_layout_validate,
    "asset.box": _op_asset_box,
    "asset.cylinder": _op_asset_cylinder,
    "asset.tub": _op_asset_tub,
    "asset.covering": _op_asset_covering,
    "place.furniture": _op_place_furniture,
    "place.manipuland": _op_place_manipuland,
    "place.wall": _op_place_wall,
    "place.ceiling": _op_place_ceiling,
    "scene.remove_object": _op_remove_object,
    "scene.set_style": _op_scene_set_style,
    "tool.snap": _op_tool_snap,
    "tool.facing": _op_tool_facing,
    "tool.reach": _op_tool_reach,
    "tool.physics": _op_tool_physics,
    "compose.stack": _op_compose_stack,
    "compose.fill": _op_compose_fill,
    "compose.arrange": _op_compose_arrange,
    "compose.pile": _op_compose_pile,
    "feasibility.project": _op_feasibility_project,
    "feasibility.enforce": _op_feasibility_enforce,
    "feasibility.clean": _op_feasibility_clean,
    "metrics.report": _op_metrics_report,
    "query.state": _op_query_state,
    "query.surfaces": _op_query_surfaces,
    "checkpoint": _op_checkpoint,
    "rollback": _op_rollback,
}


def validate_script(script: dict) -> None:
    """Schema-check a script; raises ScriptError before any execution."""
    if not isinstance(script, dict):
        raise ScriptError("script must be a JSON object")
    if script.get("format_version", SCRIPT_VERSION) != SCRIPT_VERSION:
        raise ScriptError(f"unsupported script version {script.get('format_version')!r}")
    if "seed" in script and not isinstance(script["seed"], int):
        raise ScriptError("seed must be an integer")
    steps = script.get("steps")
    if not isinstance(steps, list):
        raise ScriptError("script needs a steps array")
    for i, step in enumerate(steps):
        if not isinstance(step, dict):
            raise ScriptError(f"step {i} must be an object")
        op = step.get("op")
        if op not in OPS:
            raise ScriptError(f"step {i}: unknown op {op!r}")
        if not isinstance(step.get("args", {}), dict):
            raise ScriptError(f"step {i}: args must be an object")
        if step.get("on_error", "abort") not in ON_ERROR_POLICIES:
            raise ScriptError(f"step {i}: on_error must be one of {ON_ERROR_POLICIES}")


def run_script(
    script: dict | str | Path,
    initial_scene: Scene | None = None,
    out_path: str | Path | None = None,
    log_path: str | Path | None = None,
) -> RunResult:
    """Execute a build script and return the final scene and step log.

    Steps run in order; a failing step follows its on_error policy: abort
    stops execution with status "aborted", skip records the error and
    continues, rollback restores the most recent checkpoint and continues.
    """
    if isinstance(script, (str, Path)):
        script = json.loads(Path(script).read_text(encoding="utf-8"))
    validate_script(script)

    scene = initial_scene.copy() if initial_scene is not None else Scene()
    if "seed" in script:
        scene.seed = int(script["seed"])
    ctx = RunContext(scene=scene)

    status = "ok"
    for index, step in enumerate(script["steps"]):
        op = step["op"]
        args = step.get("args", {})
        policy = step.get("on_error", "abort")
        rng = derive_rng(ctx.scene.seed, index, op)
        entry: dict[str, Any] = {"index": index, "op": op}
        try:
            payload = OPS[op](ctx, args, rng)
            entry["status"] = "ok"
            if payload:
                entry["report"] = payload
        except RoomforgeError as exc:
            entry["error"] = f"{type(exc).__name__}: {exc}"
            if policy == "abort":
                entry["status"] = "error"
                ctx.log.append(entry)
                status = "aborted"
                break
            if policy == "skip":
                entry["status"] = "skipped"
            else:
                if ctx.checkpoints:
                    checkpoint = ctx.checkpoints[-1]
                    ctx.scene = checkpoint.scene.copy()
                    entry["status"] = "rolled_back"
                    entry["restored"] = checkpoint.label
                else:
                    entry["status"] = "skipped"
                    entry["note"] = "no checkpoint to roll back to"
        ctx.log.append(entry)

    if out_path is not None:
        Path(out_path).write_bytes(serialize_scene(ctx.scene))
    if log_path is not None:
        Path(log_path).write_text(json.dumps(ctx.log, indent=1), encoding="utf-8")
    return RunResult(scene=ctx.scene, log=ctx.log, status=status)
