"""Orientation verification between a source object and a target."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry.poses import normalize_angle_deg
from ..scene.model import Scene
from .common import is_circular, object_aabb

CIRCULARITY_RATIO = 0.80


@dataclass(frozen=True)
class FacingReport:
    faces_toward: bool
    faces_away: bool
    optimal_theta: float  # Absolute yaw (degrees) that faces the target.
    target_is_circular: bool


def _forward_2d(yaw_deg: float) -> np.ndarray:
    rad = np.radians(yaw_deg)
    # Forward is the +Y axis of the object frame under its yaw.
    return np.array([-np.sin(rad), np.cos(rad)])


def _ray_hits_aabb_2d(origin: np.ndarray, direction: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> bool:
    t_min, t_max = 0.0, np.inf
    for axis in range(2):
        d = direction[axis]
        if abs(d) < 1e-12:
            if origin[axis] < lo[axis] - 1e-12 or origin[axis] > hi[axis] + 1e-12:
                return False
            continue
        t0 = (lo[axis] - origin[axis]) / d
        t1 = (hi[axis] - origin[axis]) / d
        if t0 > t1:
            t0, t1 = t1, t0
        t_min = max(t_min, t0)
        t_max = min(t_max, t1)
    return t_max >= t_min


def check_facing(scene: Scene, source_id: str, target_id: str) -> FacingReport:
    """Whether the source's forward axis points at the target.

    The target point is the body center for circular targets and the
    closest point of the target's planar bounds otherwise; the optimal yaw
    aims the forward axis at that point, so re-posing the source with it
    always yields faces_toward.
    """
    if source_id == target_id:
        raise ValueError("source and target must differ")
    source = scene.get_object(source_id)
    target = scene.get_object(target_id)

    src_center = np.asarray(object_aabb(scene, source)).mean(axis=0)[:2]
    t_lo, t_hi = object_aabb(scene, target)
    t_lo2, t_hi2 = t_lo[:2], t_hi[:2]
    circular = is_circular(scene, target, CIRCULARITY_RATIO)
    if circular:
        target_point = (t_lo2 + t_hi2) / 2.0
    else:
        target_point = np.clip(src_center, t_lo2, t_hi2)

    yaw = source.pose.yaw_deg()
    forward = _forward_2d(yaw)
    faces_toward = _ray_hits_aabb_2d(src_center, forward, t_lo2, t_hi2)
    faces_away = _ray_hits_aabb_2d(src_center, -forward, t_lo2, t_hi2)

    delta = target_point - src_center
    if float(np.linalg.norm(delta)) < 1e-9:
        optimal = yaw
        faces_toward = True
    else:
        # Forward(theta) = (-sin, cos); solve for the yaw that aims at delta.
        optimal = normalize_angle_deg(float(np.degrees(np.arctan2(-delta[0], delta[1]))))
    return FacingReport(
        faces_toward=bool(faces_toward),
        faces_away=bool(faces_away),
        optimal_theta=optimal,
        target_is_circular=circular,
    )
