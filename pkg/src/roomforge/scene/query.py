"""Structured scene-state listings for tools, drivers, and the CLI."""

from __future__ import annotations

from typing import Any

import numpy as np

from ..errors import NotFoundError
from .model import AssetCategory, Scene
from .surfaces import find_room_of_point, scene_surfaces


def query_scene_state(
    scene: Scene,
    *,
    category: str | AssetCategory | None = None,
    room: str | None = None,
    surface: str | None = None,
) -> list[dict[str, Any]]:
    """Objects matching the selectors, ordered lexicographically by id.

    Each entry carries the world pose, the surface-local pose when the
    object is supported, the asset bounding box, and the welded flag.

    Raises:
        NotFoundError: Unknown room or surface selector ids.
    """
    if isinstance(category, str):
        category = AssetCategory(category)
    if room is not None and room not in scene.rooms:
        raise NotFoundError(f"room {room!r} not in scene")
    if surface is not None and surface not in scene_surfaces(scene):
        raise NotFoundError(f"support surface {surface!r} not found")

    entries = []
    for object_id in sorted(scene.objects):
        obj = scene.objects[object_id]
        asset = scene.asset_of(obj)
        if category is not None and asset.category is not category:
            continue
        if surface is not None and (obj.support is None or obj.support.surface_id != surface):
            continue
        if room is not None:
            obj_room = find_room_of_point(scene, obj.pose.translation)
            if obj_room is None or obj_room.id != room:
                continue
        support = None
        if obj.support is not None:
            support = {
                "surface_id": obj.support.surface_id,
                "x": obj.support.local.x,
                "y": obj.support.local.y,
                "theta_deg": obj.support.local.theta,
            }
        entries.append(
            {
                "id": obj.id,
                "asset_id": obj.asset_id,
                "category": asset.category.value,
                "pose": {
                    "xyz": np.asarray(obj.pose.translation).tolist(),
                    "quaternion_wxyz": np.asarray(obj.pose.quaternion).tolist(),
                },
                "support": support,
                "bbox": {
                    "min": np.asarray(asset.bbox_min).tolist(),
                    "max": np.asarray(asset.bbox_max).tolist(),
                },
                "dimensions": np.asarray(asset.extents).tolist(),
                "welded": obj.welded,
            }
        )
    return entries


def list_support_surfaces(scene: Scene) -> list[dict[str, Any]]:
    """All surfaces with owner, height, area, and clearance, ordered by id."""
    out = []
    for surface_id, surface in sorted(scene_surfaces(scene).items()):
        out.append(
            {
                "id": surface_id,
                "owner_id": surface.owner_id,
                "height": surface.height,
                "area": surface.bounds.area,
                "clearance": surface.clearance,
            }
        )
    return out
