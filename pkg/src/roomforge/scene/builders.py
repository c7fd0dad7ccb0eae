"""Primitive asset constructors for scripts and tests."""

from __future__ import annotations

import numpy as np

from ..geometry import ConvexPiece, box_mesh, cylinder_mesh, mesh_mass_properties
from .model import Asset, AssetCategory


def box_asset(
    asset_id: str,
    size,
    mass: float,
    *,
    category: AssetCategory = AssetCategory.FURNITURE,
    friction: float = 0.5,
) -> Asset:
    """Solid box in canonical pose: bottom at z=0, centered in x and y."""
    sx, sy, sz = (float(s) for s in size)
    if category is AssetCategory.WALL:
        # Wall assets keep their back at y=0 instead of being y-centered.
        center = (0.0, sy / 2.0, sz / 2.0)
    elif category is AssetCategory.CEILING:
        center = (0.0, 0.0, -sz / 2.0)
    else:
        center = (0.0, 0.0, sz / 2.0)
    mesh = box_mesh((sx, sy, sz), center)
    props = mesh_mass_properties(mesh, mass)
    piece = ConvexPiece(mesh.vertices)
    return Asset(
        id=asset_id,
        category=category,
        collision_pieces=[piece],
        bbox_min=mesh.vertices.min(axis=0),
        bbox_max=mesh.vertices.max(axis=0),
        mass=mass,
        com=props.com,
        inertia=props.inertia,
        friction=friction,
    )


def cylinder_asset(
    asset_id: str,
    radius: float,
    height: float,
    mass: float,
    *,
    category: AssetCategory = AssetCategory.FURNITURE,
    friction: float = 0.5,
    segments: int = 24,
) -> Asset:
    """Solid upright cylinder, bottom at z=0."""
    if category is AssetCategory.CEILING:
        center = (0.0, 0.0, -height / 2.0)
    else:
        center = (0.0, 0.0, height / 2.0)
    mesh = cylinder_mesh(radius, height, segments, center)
    props = mesh_mass_properties(mesh, mass)
    piece = ConvexPiece(mesh.vertices)
    return Asset(
        id=asset_id,
        category=category,
        collision_pieces=[piece],
        bbox_min=mesh.vertices.min(axis=0),
        bbox_max=mesh.vertices.max(axis=0),
        mass=mass,
        com=props.com,
        inertia=props.inertia,
        friction=friction,
    )


def tub_asset(
    asset_id: str,
    inner_size,
    wall: float,
    mass: float,
    *,
    category: AssetCategory = AssetCategory.MANIPULAND,
    friction: float = 0.5,
) -> Asset:
    """Open-topped rectangular container built from five box pieces.

    inner_size is the cavity (x, y, z); walls and base have the given
    thickness. Canonical pose: outer bottom at z=0, centered in x and y.
    """
    ix, iy, iz = (float(s) for s in inner_size)
    t = float(wall)
    ox, oy = ix + 2 * t, iy + 2 * t
    meshes = [
        box_mesh((ox, oy, t), (0.0, 0.0, t / 2.0)),  # base
        box_mesh((t, oy, iz), (-(ix + t) / 2.0, 0.0, t + iz / 2.0)),
        box_mesh((t, oy, iz), ((ix + t) / 2.0, 0.0, t + iz / 2.0)),
        box_mesh((ix, t, iz), (0.0, -(iy + t) / 2.0, t + iz / 2.0)),
        box_mesh((ix, t, iz), (0.0, (iy + t) / 2.0, t + iz / 2.0)),
    ]
    pieces = [ConvexPiece(m.vertices) for m in meshes]
    verts = np.vstack([m.vertices for m in meshes])
    tris = []
    offset = 0
    for m in meshes:
        tris.append(m.triangles + offset)
        offset += len(m.vertices)
    from ..geometry import TriMesh

    props = mesh_mass_properties(TriMesh(verts, np.vstack(tris)), mass)
    return Asset(
        id=asset_id,
        category=category,
        collision_pieces=pieces,
        bbox_min=verts.min(axis=0),
        bbox_max=verts.max(axis=0),
        mass=mass,
        com=props.com,
        inertia=props.inertia,
        friction=friction,
    )


def rectangular_room(
    room_id: str,
    width: float,
    length: float,
    *,
    origin=(0.0, 0.0),
    wall_height: float = 2.5,
    wall_thickness: float = 0.1,
    shared: dict[str, str] | None = None,
) -> "RoomGeometry":
    """Axis-aligned room centered on its frame with four wall segments.

    Segment ids are the compass sides S, E, N, W; `shared` maps a side to
    the neighboring room id for interior walls.
    """
    from ..geometry import Polygon2
    from .model import RoomGeometry, WallSegment

    hw, hl = width / 2.0, length / 2.0
    shared = shared or {}
    corners = {
        "sw": np.array([-hw, -hl]),
        "se": np.array([hw, -hl]),
        "ne": np.array([hw, hl]),
        "nw": np.array([-hw, hl]),
    }
    walls = [
        WallSegment("S", corners["sw"], corners["se"], wall_thickness, shared.get("S")),
        WallSegment("E", corners["se"], corners["ne"], wall_thickness, shared.get("E")),
        WallSegment("N", corners["ne"], corners["nw"], wall_thickness, shared.get("N")),
        WallSegment("W", corners["nw"], corners["sw"], wall_thickness, shared.get("W")),
    ]
    return RoomGeometry(
        id=room_id,
        origin=np.asarray(origin, dtype=float),
        floor=Polygon2([corners["sw"], corners["se"], corners["ne"], corners["nw"]]),
        wall_height=wall_height,
        walls=walls,
    )


def thin_covering_asset(asset_id: str, size_xy, *, visual_ref: str = "") -> Asset:
    """Flat covering (rug, poster): no collision pieces, excluded from physics."""
    sx, sy = (float(s) for s in size_xy)
    return Asset(
        id=asset_id,
        category=AssetCategory.THIN_COVERING,
        collision_pieces=[],
        bbox_min=np.array([-sx / 2.0, -sy / 2.0, 0.0]),
        bbox_max=np.array([sx / 2.0, sy / 2.0, 0.005]),
        mass=0.0,
        com=np.zeros(3),
        inertia=np.zeros((3, 3)),
        friction=0.5,
        visual_ref=visual_ref,
    )
