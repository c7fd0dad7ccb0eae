"""Shared helpers for scene-level geometric tools."""

from __future__ import annotations

import numpy as np

from ..geometry import OBB2, DistanceResult, pieces_aabb, signed_distance_info
from ..geometry.poses import Pose3
from ..scene.model import AssetCategory, ObjectInstance, Scene


def object_aabb(scene: Scene, obj: ObjectInstance) -> tuple[np.ndarray, np.ndarray]:
    """World axis-aligned bounds from collision pieces (bbox for coverings)."""
    asset = scene.asset_of(obj)
    if asset.collision_pieces:
        return pieces_aabb(asset.collision_pieces, obj.pose)
    corners = np.array(
        [
            [x, y, z]
            for x in (asset.bbox_min[0], asset.bbox_max[0])
            for y in (asset.bbox_min[1], asset.bbox_max[1])
            for z in (asset.bbox_min[2], asset.bbox_max[2])
        ]
    )
    world = obj.pose.transform_points(corners)
    return world.min(axis=0), world.max(axis=0)


def object_obb2(scene: Scene, obj: ObjectInstance) -> OBB2:
    """Planar oriented box: canonical xy extents under the object's yaw."""
    asset = scene.asset_of(obj)
    yaw = obj.pose.yaw_deg()
    ext = asset.extents
    center_local = (asset.bbox_min[:2] + asset.bbox_max[:2]) / 2.0
    rad = np.radians(yaw)
    rot = np.array([[np.cos(rad), -np.sin(rad)], [np.sin(rad), np.cos(rad)]])
    center = obj.pose.translation[:2] + rot @ center_local
    return OBB2(
        center=(float(center[0]), float(center[1])),
        half_extents=(float(ext[0] / 2.0), float(ext[1] / 2.0)),
        angle_deg=yaw,
    )


def objects_distance(scene: Scene, a: ObjectInstance, b: ObjectInstance) -> DistanceResult:
    asset_a, asset_b = scene.asset_of(a), scene.asset_of(b)
    return signed_distance_info(asset_a.collision_pieces, a.pose, asset_b.collision_pieces, b.pose)


def aabbs_disjoint(a: tuple, b: tuple, margin: float = 0.0) -> bool:
    return bool(np.any(a[0] - margin > b[1]) or np.any(b[0] - margin > a[1]))


def collision_bearing(scene: Scene, obj: ObjectInstance) -> bool:
    return scene.asset_of(obj).has_collision


def mesh_volume_of(scene: Scene, obj: ObjectInstance) -> float:
    return float(sum(p.volume for p in scene.asset_of(obj).collision_pieces))


def is_circular(scene: Scene, obj: ObjectInstance, threshold: float = 0.80) -> bool:
    """Volume-ratio circularity: mesh much smaller than its box suggests a round body."""
    asset = scene.asset_of(obj)
    if not asset.collision_pieces:
        return False
    lo, hi = object_aabb(scene, obj)
    box = float(np.prod(hi - lo))
    if box <= 0.0:
        return False
    return mesh_volume_of(scene, obj) / box < threshold


def set_object_pose(scene: Scene, object_id: str, pose: Pose3) -> None:
    scene.get_object(object_id).pose = pose
