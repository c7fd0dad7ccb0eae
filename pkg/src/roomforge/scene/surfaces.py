"""Support surfaces: planar frames placements live on, and their extraction.

Horizontal surfaces are detected from collision geometry as clusters of
up-facing faces at a common height. Room architecture additionally exposes
a floor surface per room, one mount surface per wall segment, and one
downward ceiling surface, so every placement goes through a surface frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from ..errors import InvalidGeometryError, NotFoundError
from ..geometry import ConvexPiece, Polygon2, Pose2, Pose3, TriMesh
from ..geometry.poses import quat_about_x, quat_about_z, quat_multiply
from .model import Asset, AssetCategory, RoomGeometry, Scene, SupportRef

NORMAL_TOL_DEG = 5.0
HEIGHT_CLUSTER_TOL = 0.005
MIN_SURFACE_AREA = 0.01
DEFAULT_CLEARANCE_CAP = 3.0


@dataclass
class SupportSurface:
    """Planar frame with polygonal bounds and free height above it."""

    id: str
    owner_id: str  # Object id or room id that carries the surface.
    frame: Pose3  # World frame; +Z is the surface normal.
    bounds: Polygon2  # In-frame xy bounds.
    clearance: float

    @property
    def height(self) -> float:
        return float(self.frame.translation[2])

    def contains_local(self, x: float, y: float) -> bool:
        return self.bounds.contains_point(x, y)


def lift_pose(local: Pose2, surface: SupportSurface) -> Pose3:
    """Lift a planar surface pose to a world pose through the surface frame.

    Translation is the frame applied to (x, y, 0); rotation composes the
    frame rotation with a yaw about the surface normal.
    """
    planar = Pose3(np.array([local.x, local.y, 0.0]), quat_about_z(local.theta))
    return surface.frame.compose(planar)


def unlift_pose(pose: Pose3, surface: SupportSurface, tol: float = 1e-6) -> Pose2 | None:
    """Invert lift_pose, or None when the pose left the surface plane.

    The inverse exists only when the pose sits on the plane and its rotation
    is a pure yaw about the surface normal (within tol).
    """
    rel = surface.frame.inverse().compose(pose)
    if abs(float(rel.translation[2])) > tol:
        return None
    rot = rel.rotation
    if abs(rot[2, 2] - 1.0) > tol or abs(rot[0, 2]) > tol or abs(rot[1, 2]) > tol:
        return None
    theta = float(np.degrees(np.arctan2(rot[1, 0], rot[0, 0])))
    return Pose2(float(rel.translation[0]), float(rel.translation[1]), theta)


def _chunks_from_asset(asset: Asset) -> list[np.ndarray]:
    return [piece.vertices for piece in asset.collision_pieces]


def _mesh_from_pieces(pieces: list[ConvexPiece]) -> TriMesh:
    verts: list[np.ndarray] = []
    tris: list[np.ndarray] = []
    offset = 0
    for piece in pieces:
        verts.append(piece.vertices)
        tris.append(piece.triangles + offset)
        offset += len(piece.vertices)
    return TriMesh(np.vstack(verts), np.vstack(tris))


def extract_support_surfaces(
    geometry: Asset | TriMesh,
    owner_pose: Pose3,
    *,
    owner_id: str = "",
    clearance_cap: float = DEFAULT_CLEARANCE_CAP,
    normal_tol_deg: float = NORMAL_TOL_DEG,
    height_tol: float = HEIGHT_CLUSTER_TOL,
    min_area: float = MIN_SURFACE_AREA,
) -> list[SupportSurface]:
    """Horizontal placement surfaces of a posed asset or mesh.

    Up-facing triangles (normal within the angle tolerance of +Z in world)
    are clustered by height; each cluster becomes a surface whose bounds are
    the projected hull and whose clearance is the vertical distance to the
    next geometry above, capped at clearance_cap.

    Surfaces are ordered bottom-up and labeled S_0, S_1, ... so ids are
    stable for identical geometry.
    """
    if isinstance(geometry, Asset):
        if not geometry.collision_pieces:
            return []
        mesh = _mesh_from_pieces(geometry.collision_pieces)
        blockers = [owner_pose.transform_points(v) for v in _chunks_from_asset(geometry)]
    else:
        mesh = geometry
        blockers = [
            owner_pose.transform_points(mesh.vertices[tri]) for tri in mesh.triangles
        ]

    world = owner_pose.transform_points(mesh.vertices)
    tris = mesh.triangles
    if len(tris) == 0:
        return []
    a, b, c = world[tris[:, 0]], world[tris[:, 1]], world[tris[:, 2]]
    normals = np.cross(b - a, c - a)
    lengths = np.linalg.norm(normals, axis=1)
    valid = lengths > 1e-12
    cos_tol = np.cos(np.radians(normal_tol_deg))
    up = np.zeros(len(tris), dtype=bool)
    up[valid] = (normals[valid, 2] / lengths[valid]) >= cos_tol
    if not np.any(up):
        return []

    heights = (a[:, 2] + b[:, 2] + c[:, 2]) / 3.0
    candidates = sorted(np.nonzero(up)[0], key=lambda i: heights[i])
    clusters: list[list[int]] = []
    for idx in candidates:
        if clusters and heights[idx] - heights[clusters[-1][0]] <= height_tol:
            clusters[-1].append(idx)
        else:
            clusters.append([idx])

    owner_yaw = owner_pose.yaw_deg()
    surfaces: list[SupportSurface] = []
    for cluster in clusters:
        verts_idx = np.unique(tris[cluster].ravel())
        pts = world[verts_idx]
        surface_z = float(pts[:, 2].max())
        xy = pts[:, :2]
        try:
            hull = ConvexHull(xy)
        except QhullError:
            continue
        hull_pts = xy[hull.vertices]
        bounds_world = Polygon2(hull_pts)
        if bounds_world.area < min_area:
            continue
        center = bounds_world.centroid()
        frame = Pose3(np.array([center[0], center[1], surface_z]), quat_about_z(owner_yaw))
        inv = frame.inverse()
        local_pts = inv.transform_points(np.column_stack([hull_pts, np.zeros(len(hull_pts))]))
        bounds = Polygon2(local_pts[:, :2])

        clearance = clearance_cap
        shp = bounds_world.to_shapely()
        for chunk in blockers:
            chunk_min_z = float(chunk[:, 2].min())
            if chunk_min_z <= surface_z + 1e-4:
                continue
            chunk_xy = chunk[:, :2]
            try:
                chull = ConvexHull(chunk_xy)
                chunk_poly = Polygon2(chunk_xy[chull.vertices]).to_shapely()
            except (QhullError, InvalidGeometryError):
                continue
            if shp.intersection(chunk_poly).area > 1e-8:
                clearance = min(clearance, chunk_min_z - surface_z)
        surfaces.append(
            SupportSurface(id="", owner_id=owner_id, frame=frame, bounds=bounds, clearance=clearance)
        )

    surfaces.sort(key=lambda s: (s.height, tuple(np.round(s.frame.translation[:2], 9))))
    from .model import int_to_base36

    for i, surface in enumerate(surfaces):
        surface.id = f"{owner_id}/S_{int_to_base36(i)}" if owner_id else f"S_{int_to_base36(i)}"
    return surfaces


def _segment_world(room: RoomGeometry, segment_id: str):
    seg = room.segment(segment_id)
    start = room.to_world_xy(seg.start)
    end = room.to_world_xy(seg.end)
    direction = (end - start) / np.linalg.norm(end - start)
    inward = _inward_normal(room, seg)
    return seg, start, end, direction, inward


def _inward_normal(room: RoomGeometry, seg) -> np.ndarray:
    direction = seg.direction
    normal = np.array([-direction[1], direction[0]])
    mid = (seg.start + seg.end) / 2.0
    probe = mid + normal * 1e-3
    if room.floor.contains_point(probe[0], probe[1]):
        return normal
    return -normal


def room_floor_surface(room: RoomGeometry) -> SupportSurface:
    frame = Pose3(np.array([room.origin[0], room.origin[1], 0.0]))
    return SupportSurface(
        id=f"{room.id}/floor",
        owner_id=room.id,
        frame=frame,
        bounds=room.floor,
        clearance=room.wall_height,
    )


def wall_mount_surface(room: RoomGeometry, segment_id: str) -> SupportSurface:
    """Mount frame of a wall segment's inner face.

    Frame axes: local x along the wall, local y up the wall, +Z the outward
    normal (away from the room), origin at the segment start on the inner
    face at floor level. Bounds are the wall rectangle in (x, y).
    """
    seg, start, end, direction, inward = _segment_world(room, segment_id)
    inner = start + inward * (seg.thickness / 2.0)
    x_axis = np.array([direction[0], direction[1], 0.0])
    y_axis = np.array([0.0, 0.0, 1.0])
    z_axis = np.cross(x_axis, y_axis)
    rot = np.column_stack([x_axis, y_axis, z_axis])
    frame = Pose3.from_matrix(rot, np.array([inner[0], inner[1], 0.0]))
    bounds = Polygon2([(0.0, 0.0), (seg.length, 0.0), (seg.length, room.wall_height), (0.0, room.wall_height)])
    return SupportSurface(
        id=f"{room.id}/wall_{segment_id}",
        owner_id=room.id,
        frame=frame,
        bounds=bounds,
        clearance=room.wall_height,
    )


def ceiling_surface(room: RoomGeometry) -> SupportSurface:
    """Downward-facing ceiling surface centered in the room."""
    rot = np.column_stack([
        np.array([1.0, 0.0, 0.0]),
        np.array([0.0, -1.0, 0.0]),
        np.array([0.0, 0.0, -1.0]),
    ])
    frame = Pose3.from_matrix(rot, np.array([room.origin[0], room.origin[1], room.wall_height]))
    ring = room.floor.exterior.copy()
    ring[:, 1] = -ring[:, 1]
    bounds = Polygon2(ring[::-1])
    return SupportSurface(
        id=f"{room.id}/ceiling",
        owner_id=room.id,
        frame=frame,
        bounds=bounds,
        clearance=room.wall_height,
    )


# Fixed canonical mount rotations. Wall assets are Z-up with their back at
# y=0; rotating -90 deg about the surface x-axis lays the back on the wall
# plane with the asset upright. Ceiling assets hang by their top, flipped
# about x so canonical up stays world up.
_WALL_MOUNT_QUAT = quat_about_x(-90.0)
_CEILING_MOUNT_QUAT = quat_about_x(180.0)


def wall_object_pose(surface: SupportSurface, x_along: float, z_height: float, theta_deg: float) -> Pose3:
    """World pose of a wall asset at wall-local coordinates.

    x runs along the wall from the segment start, z vertically from the
    floor; theta spins the object about the wall normal.
    """
    planar = Pose3(np.array([x_along, z_height, 0.0]), quat_about_z(theta_deg))
    lifted = surface.frame.compose(planar)
    return Pose3(lifted.translation, quat_multiply(lifted.quaternion, _WALL_MOUNT_QUAT))


def ceiling_object_pose(surface: SupportSurface, x: float, y: float, theta_deg: float) -> Pose3:
    """World pose of a ceiling asset at room-local coordinates (world yaw theta)."""
    planar = Pose3(np.array([x, -y, 0.0]), quat_about_z(-theta_deg))
    lifted = surface.frame.compose(planar)
    return Pose3(lifted.translation, quat_multiply(lifted.quaternion, _CEILING_MOUNT_QUAT))


def scene_surfaces(scene: Scene, *, clearance_cap: float | None = None) -> dict[str, SupportSurface]:
    """All support surfaces of a scene, keyed by id.

    Includes per-room floor, wall, and ceiling surfaces plus extracted
    surfaces of furniture and wall-mounted objects. Object surface
    clearances are additionally capped by the room above them.
    """
    surfaces: dict[str, SupportSurface] = {}
    for room_id in sorted(scene.rooms):
        room = scene.rooms[room_id]
        floor = room_floor_surface(room)
        surfaces[floor.id] = floor
        for seg in room.walls:
            wall = wall_mount_surface(room, seg.id)
            surfaces[wall.id] = wall
        ceil = ceiling_surface(room)
        surfaces[ceil.id] = ceil

    for obj_id in sorted(scene.objects):
        obj = scene.objects[obj_id]
        asset = scene.asset_of(obj)
        if asset.category not in (AssetCategory.FURNITURE, AssetCategory.WALL):
            continue
        cap = clearance_cap
        if cap is None:
            cap = DEFAULT_CLEARANCE_CAP
            room = find_room_of_point(scene, obj.pose.translation)
            if room is not None:
                cap = room.wall_height
        for surface in extract_support_surfaces(asset, obj.pose, owner_id=obj.id, clearance_cap=cap):
            if surface.height > 1e-4:  # Skip ground-level clusters; the floor owns those.
                surfaces[surface.id] = surface
    return surfaces


def get_surface(scene: Scene, surface_id: str) -> SupportSurface:
    surfaces = scene_surfaces(scene)
    if surface_id not in surfaces:
        raise NotFoundError(f"support surface {surface_id!r} not found")
    return surfaces[surface_id]


def find_room_of_point(scene: Scene, point: np.ndarray) -> RoomGeometry | None:
    for room_id in sorted(scene.rooms):
        room = scene.rooms[room_id]
        if room.floor_world().contains_point(point[0], point[1]):
            return room
    return None


def place_on_surface(
    scene: Scene,
    asset_id: str,
    surface: SupportSurface,
    local: Pose2,
    *,
    name: str | None = None,
    welded: bool = False,
):
    """Place an asset on a horizontal surface through the mechanical lift."""
    pose = lift_pose(local, surface)
    return scene.add_object(
        asset_id,
        pose,
        name=name,
        support=SupportRef(surface_id=surface.id, local=local),
        welded=welded,
    )


def refresh_support(scene: Scene, object_id: str, tol: float = 1e-6) -> None:
    """Re-derive the surface-local pose after a pose change, or detach.

    Settling and projection move world poses; when the new pose still lies
    on the recorded surface the local reference is updated, otherwise the
    support reference is cleared.
    """
    obj = scene.get_object(object_id)
    if obj.support is None:
        return
    try:
        surface = get_surface(scene, obj.support.surface_id)
    except NotFoundError:
        obj.support = None
        return
    local = unlift_pose(obj.pose, surface, tol=tol)
    if local is None:
        obj.support = None
    else:
        obj.support = SupportRef(surface_id=surface.id, local=local)
