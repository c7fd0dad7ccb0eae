"""Geometric kernel: poses, convex queries, polygons, mass properties."""

from .convex import ConvexPiece, DistanceResult, pair_distance, pieces_aabb, signed_distance, signed_distance_info
from .mass import MassProperties, TriMesh, mesh_mass_properties
from .polygons import OBB2, FreeSpaceResult, Polygon2, free_space, offset_polygon, ray_hits_floor
from .poses import (
    Pose2,
    Pose3,
    derive_rng,
    normalize_angle_deg,
    pose_from_xyz_yaw,
    rotation_between,
    sample_rotation_uniform,
)
from .primitives import box_mesh, cylinder_mesh, icosphere_mesh

__all__ = [
    "ConvexPiece",
    "DistanceResult",
    "FreeSpaceResult",
    "MassProperties",
    "OBB2",
    "Polygon2",
    "Pose2",
    "Pose3",
    "TriMesh",
    "box_mesh",
    "cylinder_mesh",
    "derive_rng",
    "free_space",
    "icosphere_mesh",
    "mesh_mass_properties",
    "normalize_angle_deg",
    "offset_polygon",
    "pair_distance",
    "pieces_aabb",
    "pose_from_xyz_yaw",
    "ray_hits_floor",
    "rotation_between",
    "sample_rotation_uniform",
    "signed_distance",
    "signed_distance_info",
]
