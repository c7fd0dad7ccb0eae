"""Robot traversability analysis of a furnished room."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NotFoundError
from ..geometry import OBB2, FreeSpaceResult, free_space
from ..scene.model import AssetCategory, Scene
from .common import object_obb2


@dataclass(frozen=True)
class ReachabilityReport:
    fully_reachable: bool
    region_count: int
    reachability_ratio: float
    blocking_object_ids: tuple[str, ...] = ()
    areas: tuple[float, ...] = ()


def _room_furniture(scene: Scene, room_id: str) -> list[str]:
    room = scene.get_room(room_id)
    floor = room.floor_world()
    out = []
    for object_id in sorted(scene.objects):
        obj = scene.objects[object_id]
        if scene.asset_of(obj).category is not AssetCategory.FURNITURE:
            continue
        if floor.contains_point(obj.pose.translation[0], obj.pose.translation[1]):
            out.append(object_id)
    return out


def check_reachability(
    scene: Scene, robot_half_width: float, room_id: str | None = None
) -> ReachabilityReport:
    """Free-space connectivity for a disk robot in one room.

    Thin coverings and manipulands are not obstacles; a furniture piece is
    blocking when removing it alone strictly reduces the number of
    disconnected regions. An empty walkable region reports ratio 1.0.
    """
    if robot_half_width <= 0.0:
        raise ValueError("robot half width must be positive")
    if room_id is None:
        if len(scene.rooms) != 1:
            raise NotFoundError("room_id is required for multi-room scenes")
        room_id = next(iter(scene.rooms))
    room = scene.get_room(room_id)
    floor = room.floor_world()
    furniture_ids = _room_furniture(scene, room_id)
    obstacles = {oid: object_obb2(scene, scene.objects[oid]) for oid in furniture_ids}

    result = free_space(floor, list(obstacles.values()), robot_half_width)
    count = result.count
    total = result.total_area
    ratio = 1.0 if total <= 0.0 else max(result.areas) / total

    blocking = []
    if count > 1:
        for oid in furniture_ids:
            others = [obb for key, obb in obstacles.items() if key != oid]
            if free_space(floor, others, robot_half_width).count < count:
                blocking.append(oid)

    return ReachabilityReport(
        fully_reachable=count <= 1,
        region_count=count,
        reachability_ratio=float(ratio),
        blocking_object_ids=tuple(blocking),
        areas=tuple(result.areas),
    )
