"""Placement tools: facing, snapping, reachability, physics checks."""

from .common import object_aabb, object_obb2, objects_distance
from .facing import FacingReport, check_facing
from .physics_check import PhysicsCheckConfig, PhysicsReport, check_physics
from .reach import ReachabilityReport, check_reachability
from .snap import SnapResult, snap_to_object

__all__ = [
    "FacingReport",
    "PhysicsCheckConfig",
    "PhysicsReport",
    "ReachabilityReport",
    "SnapResult",
    "check_facing",
    "check_physics",
    "check_reachability",
    "object_aabb",
    "object_obb2",
    "objects_distance",
    "snap_to_object",
]
