"""Snap a source object against a target: de-overlap, orient, close the gap."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SnapFailedError
from ..geometry import signed_distance
from ..geometry.poses import Pose3, quat_about_z, quat_multiply
from ..scene.model import AssetCategory, Scene
from .common import aabbs_disjoint, object_aabb, objects_distance
from .facing import check_facing

SNAP_STEP = 0.010
SNAP_MARGIN = 0.005
SNAP_MAX_TRAVEL = 10.0


@dataclass(frozen=True)
class SnapResult:
    scene: Scene
    final_pose: Pose3
    moved_by: float


def _translated(pose: Pose3, delta_xy: np.ndarray) -> Pose3:
    translation = pose.translation.copy()
    translation[0] += delta_xy[0]
    translation[1] += delta_xy[1]
    return Pose3(translation, pose.quaternion)


def _with_yaw(pose: Pose3, yaw_deg: float) -> Pose3:
    current = pose.yaw_deg()
    return Pose3(pose.translation, quat_multiply(quat_about_z(yaw_deg - current), pose.quaternion))


def _third_party_depths(scene: Scene, source_id: str, target_id: str) -> dict[str, float]:
    """Penetration depth of the source against every other collision body."""
    source = scene.get_object(source_id)
    src_box = object_aabb(scene, source)
    depths: dict[str, float] = {}
    for other_id in sorted(scene.objects):
        if other_id in (source_id, target_id):
            continue
        other = scene.get_object(other_id)
        if not scene.asset_of(other).has_collision or not scene.asset_of(source).has_collision:
            continue
        if aabbs_disjoint(src_box, object_aabb(scene, other)):
            depths[other_id] = 0.0
            continue
        dist = objects_distance(scene, source, other).distance
        depths[other_id] = max(0.0, -dist)
    return depths


def snap_to_object(
    scene: Scene,
    source_id: str,
    target_id: str,
    mode: str = "none",
    *,
    step: float = SNAP_STEP,
    margin: float = SNAP_MARGIN,
    max_travel: float = SNAP_MAX_TRAVEL,
) -> SnapResult:
    """Move the source against the target, optionally facing it.

    Phase 1 resolves planar overlap by pushing the source out along the
    axis of minimum overlap, treating its footprint as a square of side
    max(width, depth) so the later rotation cannot reintroduce contact.
    Phase 2 applies the facing rotation for toward/away modes. Phase 3
    steps the source along the approach axis until a spatial collision
    query reports less than the margin, then backs off one step.

    Returns a new scene; the input scene is never modified.

    Raises:
        SnapFailedError: No admissible collision-free position exists.
    """
    if mode not in ("toward", "away", "none"):
        raise ValueError(f"unknown snap mode {mode!r}")
    source_check = scene.get_object(source_id)
    scene.get_object(target_id)
    if source_check.welded:
        raise SnapFailedError(f"object {source_id!r} is welded")

    work = scene.copy()
    source = work.get_object(source_id)
    target = work.get_object(target_id)
    src_asset = work.asset_of(source)
    tgt_asset = work.asset_of(target)
    if not src_asset.has_collision or not tgt_asset.has_collision:
        raise SnapFailedError("both objects need collision geometry to snap")

    before_depths = _third_party_depths(work, source_id, target_id)

    # Phase 1: planar de-overlap with a square source footprint.
    side = float(max(src_asset.extents[0], src_asset.extents[1]))
    src_box = object_aabb(work, source)
    src_center = (src_box[0][:2] + src_box[1][:2]) / 2.0
    s_lo, s_hi = src_center - side / 2.0, src_center + side / 2.0
    t_box = object_aabb(work, target)
    t_lo, t_hi = t_box[0][:2], t_box[1][:2]
    overlap = np.minimum(s_hi, t_hi) - np.maximum(s_lo, t_lo)
    if overlap[0] > 0.0 and overlap[1] > 0.0:
        pushes = []
        for axis in range(2):
            for sign in (1.0, -1.0):
                t_center = (t_lo + t_hi) / 2.0
                preferred = np.sign(src_center[axis] - t_center[axis]) or 1.0
                delta = np.zeros(2)
                delta[axis] = sign * (overlap[axis] + margin)
                # Prefer the shorter push that moves away from the target.
                rank = (overlap[axis], 0.0 if sign == preferred else 1.0)
                pushes.append((rank, delta))
        pushes.sort(key=lambda item: item[0])
        applied = False
        for _, delta in pushes:
            candidate = _translated(source.pose, delta)
            source.pose = candidate
            after = _third_party_depths(work, source_id, target_id)
            if all(after[k] <= before_depths.get(k, 0.0) + 1e-3 for k in after):
                applied = True
                break
        if not applied:
            raise SnapFailedError("no collision-free push-out position along either axis")

    # Phase 2: orientation alignment.
    if mode != "none":
        report = check_facing(work, source_id, target_id)
        yaw = report.optimal_theta if mode == "toward" else report.optimal_theta + 180.0
        source.pose = _with_yaw(source.pose, yaw)

    # Phase 3: gap elimination along the approach axis.
    src_box = object_aabb(work, source)
    src_center = (src_box[0][:2] + src_box[1][:2]) / 2.0
    t_box = object_aabb(work, target)
    aim = np.clip(src_center, t_box[0][:2], t_box[1][:2])
    direction = aim - src_center
    norm = float(np.linalg.norm(direction))
    if norm < 1e-9:
        direction = np.array([1.0, 0.0])
    else:
        direction = direction / norm

    def gap() -> float:
        return signed_distance(src_asset.collision_pieces, source.pose, tgt_asset.collision_pieces, target.pose)

    def clears_third_parties() -> bool:
        after = _third_party_depths(work, source_id, target_id)
        return all(after[k] <= before_depths.get(k, 0.0) + 1e-3 for k in after)

    if gap() < margin:
        # Already tighter than the margin: retreat until the margin opens.
        traveled = 0.0
        while gap() < margin:
            source.pose = _translated(source.pose, -direction * step)
            traveled += step
            if traveled > max_travel or not clears_third_parties():
                raise SnapFailedError("could not open the snap margin within max travel")
    else:
        traveled = 0.0
        contact = False
        last_clear = source.pose
        while traveled <= max_travel:
            source.pose = _translated(source.pose, direction * step)
            traveled += step
            if gap() < margin or not clears_third_parties():
                source.pose = last_clear
                contact = True
                break
            last_clear = source.pose
        if not contact:
            raise SnapFailedError("no contact found along the approach axis within max travel")

    moved = float(np.linalg.norm(source.pose.translation - scene.get_object(source_id).pose.translation))
    return SnapResult(scene=work, final_pose=source.pose, moved_by=moved)
