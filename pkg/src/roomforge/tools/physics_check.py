"""Stage-aware geometric and functional feasibility checks.

Each construction stage reports only the violations its placements can
address: furniture checks cover collisions, covering overlap, and blocked
passages; wall and ceiling stages check their fixtures; the manipuland
stage filters to one supporting entity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from shapely.geometry import box as shapely_box

from ..errors import NotFoundError
from ..geometry import ConvexPiece, Polygon2, signed_distance_info
from ..geometry.poses import Pose3
from ..scene.architecture import room_wall_pieces
from ..scene.model import AssetCategory, ObjectInstance, RoomGeometry, Scene
from ..scene.surfaces import scene_surfaces
from .common import aabbs_disjoint, object_aabb, object_obb2


@dataclass(frozen=True)
class PhysicsCheckConfig:
    threshold: float = 0.001  # Report penetrations deeper than this.
    door_zone_depth: float = 0.75  # Clearance rectangle in front of doors.
    window_zone_depth: float = 0.75
    robot_half_width: float = 0.35
    zone_overlap_area: float = 1e-3
    nearby_inflate: float = 0.5  # Manipuland-stage furniture neighborhood.


@dataclass
class PhysicsReport:
    collisions: list[dict] = field(default_factory=list)
    covering_overlaps: list[dict] = field(default_factory=list)
    boundary_violations: list[dict] = field(default_factory=list)
    door_blockages: list[dict] = field(default_factory=list)
    open_connection_blockages: list[dict] = field(default_factory=list)
    window_warnings: list[dict] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not (
            self.collisions
            or self.covering_overlaps
            or self.boundary_violations
            or self.door_blockages
            or self.open_connection_blockages
        )

    def to_dict(self) -> dict:
        return {
            "collisions": self.collisions,
            "covering_overlaps": self.covering_overlaps,
            "boundary_violations": self.boundary_violations,
            "door_blockages": self.door_blockages,
            "open_connection_blockages": self.open_connection_blockages,
            "window_warnings": self.window_warnings,
            "clean": self.clean,
        }


def _pair_collisions(
    scene: Scene, ids_a: list[str], ids_b: list[str], threshold: float
) -> list[dict]:
    """Deep penetrations between two id sets (unordered-unique pairs)."""
    out = []
    seen: set[tuple[str, str]] = set()
    boxes = {}

    def box_of(oid: str):
        if oid not in boxes:
            boxes[oid] = object_aabb(scene, scene.objects[oid])
        return boxes[oid]

    for a_id in ids_a:
        a = scene.objects[a_id]
        asset_a = scene.asset_of(a)
        if not asset_a.has_collision:
            continue
        for b_id in ids_b:
            if a_id == b_id:
                continue
            key = (min(a_id, b_id), max(a_id, b_id))
            if key in seen:
                continue
            seen.add(key)
            b = scene.objects[b_id]
            asset_b = scene.asset_of(b)
            if not asset_b.has_collision:
                continue
            if aabbs_disjoint(box_of(a_id), box_of(b_id)):
                continue
            dist = signed_distance_info(
                asset_a.collision_pieces, a.pose, asset_b.collision_pieces, b.pose
            ).distance
            if dist < -threshold:
                out.append({"pair": key, "depth": float(-dist)})
    out.sort(key=lambda item: item["pair"])
    return out


def _architecture_collisions(
    scene: Scene, ids: list[str], threshold: float
) -> list[dict]:
    """Penetrations of objects into wall solids."""
    out = []
    identity = Pose3.identity()
    walls_by_room: dict[str, list[ConvexPiece]] = {
        room_id: room_wall_pieces(scene.rooms[room_id]) for room_id in sorted(scene.rooms)
    }
    for oid in ids:
        obj = scene.objects[oid]
        asset = scene.asset_of(obj)
        if not asset.has_collision:
            continue
        obj_box = object_aabb(scene, obj)
        worst = 0.0
        worst_room = None
        for room_id, pieces in walls_by_room.items():
            for piece in pieces:
                if aabbs_disjoint(obj_box, (piece.aabb_min, piece.aabb_max)):
                    continue
                dist = signed_distance_info(
                    asset.collision_pieces, obj.pose, [piece], identity
                ).distance
                if dist < -threshold and -dist > worst:
                    worst = -dist
                    worst_room = room_id
        if worst_room is not None:
            out.append({"pair": (oid, f"wall:{worst_room}"), "depth": float(worst)})
    out.sort(key=lambda item: item["pair"])
    return out


def _door_zones(room: RoomGeometry, depth: float) -> list[tuple[str, Polygon2]]:
    """World clearance rectangles spanning both sides of each door."""
    zones = []
    for i, door in enumerate(room.doors):
        seg = room.segment(door.segment_id)
        start = room.to_world_xy(seg.start)
        direction = seg.direction
        normal = np.array([-direction[1], direction[0]])
        center = start + direction * door.offset
        half_w = door.width / 2.0
        corners = [
            center - direction * half_w - normal * depth,
            center + direction * half_w - normal * depth,
            center + direction * half_w + normal * depth,
            center - direction * half_w + normal * depth,
        ]
        zones.append((f"{room.id}/door_{i}", Polygon2(corners)))
    return zones


def _footprint(scene: Scene, obj: ObjectInstance) -> Polygon2:
    return object_obb2(scene, obj).to_polygon()


def _objects_in_room(scene: Scene, room: RoomGeometry, category: AssetCategory) -> list[str]:
    floor = room.floor_world()
    out = []
    for oid in sorted(scene.objects):
        obj = scene.objects[oid]
        if scene.asset_of(obj).category is not category:
            continue
        if floor.contains_point(obj.pose.translation[0], obj.pose.translation[1]):
            out.append(oid)
    return out


def _check_furniture_stage(scene: Scene, cfg: PhysicsCheckConfig, report: PhysicsReport) -> None:
    furniture = [
        oid
        for oid in sorted(scene.objects)
        if scene.asset_of(scene.objects[oid]).category is AssetCategory.FURNITURE
    ]
    report.collisions.extend(_pair_collisions(scene, furniture, furniture, cfg.threshold))
    report.collisions.extend(_architecture_collisions(scene, furniture, cfg.threshold))

    coverings = [
        oid
        for oid in sorted(scene.objects)
        if scene.asset_of(scene.objects[oid]).category is AssetCategory.THIN_COVERING
    ]
    for i, a_id in enumerate(coverings):
        obb_a = object_obb2(scene, scene.objects[a_id])
        for b_id in coverings[i + 1 :]:
            area = obb_a.intersection_area(object_obb2(scene, scene.objects[b_id]))
            if area > cfg.zone_overlap_area:
                report.covering_overlaps.append({"pair": (a_id, b_id), "area": float(area)})
        inside_any = False
        for room in scene.rooms.values():
            if room.floor_world().contains_polygon(obb_a.to_polygon(), tol=1e-6):
                inside_any = True
                break
        if not inside_any:
            report.boundary_violations.append({"object": a_id, "kind": "covering_outside_walls"})

    for room_id in sorted(scene.rooms):
        room = scene.rooms[room_id]
        room_furniture = _objects_in_room(scene, room, AssetCategory.FURNITURE)
        for zone_id, zone in _door_zones(room, cfg.door_zone_depth):
            for oid in room_furniture:
                area = _footprint(scene, scene.objects[oid]).intersection_area(zone)
                if area > cfg.zone_overlap_area:
                    report.door_blockages.append(
                        {"door": zone_id, "object": oid, "area": float(area)}
                    )
        _check_open_connections(scene, room, room_furniture, cfg, report)
        _check_windows(scene, room, room_furniture, cfg, report)


def _check_open_connections(
    scene: Scene,
    room: RoomGeometry,
    room_furniture: list[str],
    cfg: PhysicsCheckConfig,
    report: PhysicsReport,
) -> None:
    """A robot-wide sub-corridor must survive along each open connection."""
    robot_width = 2.0 * cfg.robot_half_width
    for seg_id in room.open_connections:
        seg = room.segment(seg_id)
        start = room.to_world_xy(seg.start)
        direction = seg.direction
        normal = np.array([-direction[1], direction[0]])
        depth = cfg.door_zone_depth
        corridor = Polygon2(
            [
                start - normal * depth,
                start + direction * seg.length - normal * depth,
                start + direction * seg.length + normal * depth,
                start + normal * depth,
            ]
        )
        blocked: list[tuple[float, float]] = []
        blockers: list[str] = []
        for oid in room_furniture:
            foot = _footprint(scene, scene.objects[oid])
            if foot.intersection_area(corridor) <= cfg.zone_overlap_area:
                continue
            ts = [float(np.dot(c - start, direction)) for c in foot.exterior]
            blocked.append((max(0.0, min(ts)), min(seg.length, max(ts))))
            blockers.append(oid)
        blocked.sort()
        clear, cursor = 0.0, 0.0
        for lo, hi in blocked:
            clear = max(clear, lo - cursor)
            cursor = max(cursor, hi)
        clear = max(clear, seg.length - cursor)
        if clear < robot_width:
            report.open_connection_blockages.append(
                {
                    "connection": f"{room.id}/{seg_id}",
                    "max_clear_width": float(clear),
                    "objects": sorted(set(blockers)),
                }
            )


def _check_windows(
    scene: Scene,
    room: RoomGeometry,
    room_furniture: list[str],
    cfg: PhysicsCheckConfig,
    report: PhysicsReport,
) -> None:
    for i, win in enumerate(room.windows):
        seg = room.segment(win.segment_id)
        start = room.to_world_xy(seg.start)
        direction = seg.direction
        normal_in = _inward(room, seg)
        center = start + direction * win.offset
        half_w = win.width / 2.0
        prism = Polygon2(
            [
                center - direction * half_w,
                center + direction * half_w,
                center + direction * half_w + normal_in * cfg.window_zone_depth,
                center - direction * half_w + normal_in * cfg.window_zone_depth,
            ]
        )
        z_lo, z_hi = win.sill, win.sill + win.height
        for oid in room_furniture:
            obj = scene.objects[oid]
            box = object_aabb(scene, obj)
            if box[1][2] <= z_lo or box[0][2] >= z_hi:
                continue
            area = _footprint(scene, obj).intersection_area(prism)
            if area > cfg.zone_overlap_area:
                report.window_warnings.append(
                    {"window": f"{room.id}/window_{i}", "object": oid, "area": float(area)}
                )


def _inward(room: RoomGeometry, seg) -> np.ndarray:
    direction = seg.direction
    normal = np.array([-direction[1], direction[0]])
    mid = (seg.start + seg.end) / 2.0
    if room.floor.contains_point(*(mid + normal * 1e-3)):
        return normal
    return -normal


def _check_wall_stage(scene: Scene, cfg: PhysicsCheckConfig, report: PhysicsReport) -> None:
    wall_objects = [
        oid
        for oid in sorted(scene.objects)
        if scene.asset_of(scene.objects[oid]).category is AssetCategory.WALL
    ]
    everything = [
        oid
        for oid in sorted(scene.objects)
        if scene.asset_of(scene.objects[oid]).has_collision
    ]
    report.collisions.extend(_pair_collisions(scene, wall_objects, everything, cfg.threshold))

    surfaces = scene_surfaces(scene)
    for oid in wall_objects:
        obj = scene.objects[oid]
        box = object_aabb(scene, obj)
        center = (box[0] + box[1]) / 2.0
        best = None
        for surface_id, surface in sorted(surfaces.items()):
            if "/wall_" not in surface_id:
                continue
            local = surface.frame.inverse().transform_point(center)
            room = scene.get_room(surface.owner_id)
            seg_id = surface_id.split("/wall_", 1)[1]
            seg = room.segment(seg_id)
            # Close to the wall plane and within the segment span.
            if abs(local[2]) < 0.5 and -0.5 <= local[0] <= seg.length + 0.5:
                score = abs(local[2])
                if best is None or score < best[0]:
                    best = (score, surface, seg, room)
        if best is None:
            report.boundary_violations.append({"object": oid, "kind": "not_on_any_wall"})
            continue
        _, surface, seg, room = best
        inv = surface.frame.inverse()
        corners = [
            inv.transform_point(np.array([x, y, z]))
            for x in (box[0][0], box[1][0])
            for y in (box[0][1], box[1][1])
            for z in (box[0][2], box[1][2])
        ]
        xs = [c[0] for c in corners]
        ys = [c[1] for c in corners]
        if min(xs) < -1e-6 or max(xs) > seg.length + 1e-6:
            report.boundary_violations.append({"object": oid, "kind": "beyond_wall_edge"})
        if max(ys) > room.wall_height + 1e-6:
            report.boundary_violations.append({"object": oid, "kind": "above_ceiling"})
        if min(ys) < -1e-6:
            report.boundary_violations.append({"object": oid, "kind": "below_floor"})

        span = shapely_box(min(xs), min(ys), max(xs), max(ys))
        for door in room.doors:
            if door.segment_id != seg.id:
                continue
            zone = shapely_box(door.offset - door.width / 2.0, 0.0, door.offset + door.width / 2.0, door.height)
            if span.intersection(zone).area > cfg.zone_overlap_area:
                report.boundary_violations.append({"object": oid, "kind": "overlaps_door"})
        for win in room.windows:
            if win.segment_id != seg.id:
                continue
            zone = shapely_box(
                win.offset - win.width / 2.0, win.sill, win.offset + win.width / 2.0, win.sill + win.height
            )
            if span.intersection(zone).area > cfg.zone_overlap_area:
                report.boundary_violations.append({"object": oid, "kind": "overlaps_window"})
        if seg.id in room.open_connections:
            report.boundary_violations.append({"object": oid, "kind": "on_open_connection"})


def _check_ceiling_stage(scene: Scene, cfg: PhysicsCheckConfig, report: PhysicsReport) -> None:
    ceiling_objects = [
        oid
        for oid in sorted(scene.objects)
        if scene.asset_of(scene.objects[oid]).category is AssetCategory.CEILING
    ]
    everything = [
        oid
        for oid in sorted(scene.objects)
        if scene.asset_of(scene.objects[oid]).has_collision
    ]
    report.collisions.extend(_pair_collisions(scene, ceiling_objects, everything, cfg.threshold))


def _check_manipuland_stage(
    scene: Scene, context: str | None, cfg: PhysicsCheckConfig, report: PhysicsReport
) -> None:
    surfaces = scene_surfaces(scene)
    manipulands = []
    for oid in sorted(scene.objects):
        obj = scene.objects[oid]
        if scene.asset_of(obj).category is not AssetCategory.MANIPULAND:
            continue
        if context is not None:
            if obj.support is None:
                continue
            surface = surfaces.get(obj.support.surface_id)
            if surface is None or surface.owner_id != context:
                continue
        manipulands.append(oid)
    report.collisions.extend(_pair_collisions(scene, manipulands, manipulands, cfg.threshold))

    furniture = [
        oid
        for oid in sorted(scene.objects)
        if scene.asset_of(scene.objects[oid]).category in (AssetCategory.FURNITURE, AssetCategory.WALL)
    ]
    nearby_pairs = []
    for m_id in manipulands:
        m_box = object_aabb(scene, scene.objects[m_id])
        inflated = (m_box[0] - cfg.nearby_inflate, m_box[1] + cfg.nearby_inflate)
        for f_id in furniture:
            if scene.objects[m_id].support is not None:
                surface = surfaces.get(scene.objects[m_id].support.surface_id)
                if surface is not None and surface.owner_id == f_id:
                    continue  # Resting contact with its own support is expected.
            f_box = object_aabb(scene, scene.objects[f_id])
            if not aabbs_disjoint(inflated, f_box):
                nearby_pairs.append((m_id, f_id))
    for m_id, f_id in nearby_pairs:
        found = _pair_collisions(scene, [m_id], [f_id], cfg.threshold)
        report.collisions.extend(found)
    report.collisions.sort(key=lambda item: item["pair"])


def check_physics(
    scene: Scene,
    stage: str,
    context: str | None = None,
    config: PhysicsCheckConfig | None = None,
) -> PhysicsReport:
    """Feasibility report for one construction stage.

    Args:
        scene: Scene to inspect.
        stage: One of furniture, wall, ceiling, manipuland.
        context: Supporting entity id for the manipuland stage; collisions
            involving other entities' manipulands are filtered out.
        config: Thresholds and zone dimensions.

    Returns:
        PhysicsReport; reports are deterministic and enumeration-order free.
    """
    cfg = config or PhysicsCheckConfig()
    report = PhysicsReport()
    if stage == "furniture":
        _check_furniture_stage(scene, cfg, report)
    elif stage == "wall":
        _check_wall_stage(scene, cfg, report)
    elif stage == "ceiling":
        _check_ceiling_stage(scene, cfg, report)
    elif stage == "manipuland":
        _check_manipuland_stage(scene, context, cfg, report)
    else:
        raise ValueError(f"unknown physics stage {stage!r}")
    report.collisions.sort(key=lambda item: item["pair"])
    return report
