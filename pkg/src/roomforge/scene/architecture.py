"""Volumetric architecture: wall solids with openings cut out, floor slabs.

Walls are boxes centered on the room boundary line; door, window, and open
connection spans are removed by axis-aligned partitioning so simulation and
collision checks see real doorways. Shared walls are generated once.
"""

from __future__ import annotations

import numpy as np

from ..geometry import ConvexPiece
from .model import RoomGeometry, Scene

FLOOR_SLAB_THICKNESS = 0.2


def _segment_frame(room: RoomGeometry, seg):
    start = room.to_world_xy(seg.start)
    end = room.to_world_xy(seg.end)
    direction = (end - start) / np.linalg.norm(end - start)
    normal = np.array([-direction[1], direction[0]])
    return start, direction, normal


def _wall_box(start, direction, normal, u0, u1, z0, z1, thickness) -> ConvexPiece:
    corners = []
    for u in (u0, u1):
        for v in (-thickness / 2.0, thickness / 2.0):
            xy = start + direction * u + normal * v
            for z in (z0, z1):
                corners.append([xy[0], xy[1], z])
    return ConvexPiece(np.array(corners))


def wall_pieces(room: RoomGeometry, segment_id: str) -> list[ConvexPiece]:
    """Solid boxes of one wall segment with its openings removed."""
    seg = room.segment(segment_id)
    if segment_id in room.open_connections:
        return []
    start, direction, normal = _segment_frame(room, seg)
    height = room.wall_height

    # Openings as (u_lo, u_hi, z_lo, z_hi) spans along the segment.
    spans: list[tuple[float, float, float, float]] = []
    for door in room.doors:
        if door.segment_id == segment_id:
            spans.append((door.offset - door.width / 2.0, door.offset + door.width / 2.0, 0.0, door.height))
    for win in room.windows:
        if win.segment_id == segment_id:
            spans.append(
                (win.offset - win.width / 2.0, win.offset + win.width / 2.0, win.sill, win.sill + win.height)
            )
    spans.sort()

    pieces: list[ConvexPiece] = []
    cursor = 0.0
    for u_lo, u_hi, z_lo, z_hi in spans:
        u_lo, u_hi = max(0.0, u_lo), min(seg.length, u_hi)
        if u_lo > cursor + 1e-9:
            pieces.append(_wall_box(start, direction, normal, cursor, u_lo, 0.0, height, seg.thickness))
        if z_lo > 1e-9:
            pieces.append(_wall_box(start, direction, normal, u_lo, u_hi, 0.0, z_lo, seg.thickness))
        if z_hi < height - 1e-9:
            pieces.append(_wall_box(start, direction, normal, u_lo, u_hi, z_hi, height, seg.thickness))
        cursor = max(cursor, u_hi)
    if cursor < seg.length - 1e-9:
        pieces.append(_wall_box(start, direction, normal, cursor, seg.length, 0.0, height, seg.thickness))
    return pieces


def floor_slab(room: RoomGeometry) -> ConvexPiece:
    """Box under the floor polygon bounding box, top face at z=0."""
    ring = room.floor_world().exterior
    mn, mx = ring.min(axis=0), ring.max(axis=0)
    corners = []
    for x in (mn[0], mx[0]):
        for y in (mn[1], mx[1]):
            for z in (-FLOOR_SLAB_THICKNESS, 0.0):
                corners.append([x, y, z])
    return ConvexPiece(np.array(corners))


def _dedupe_key(piece: ConvexPiece) -> tuple:
    verts = np.round(np.sort(piece.vertices.view(float).reshape(-1, 3), axis=0), 6)
    return tuple(verts.ravel().tolist())


def scene_static_pieces(scene: Scene, *, include_floor: bool = True) -> list[ConvexPiece]:
    """All architectural collision pieces of a scene, shared walls deduped."""
    pieces: list[ConvexPiece] = []
    seen: set[tuple] = set()
    for room_id in sorted(scene.rooms):
        room = scene.rooms[room_id]
        if include_floor:
            slab = floor_slab(room)
            key = _dedupe_key(slab)
            if key not in seen:
                seen.add(key)
                pieces.append(slab)
        for seg in room.walls:
            for piece in wall_pieces(room, seg.id):
                key = _dedupe_key(piece)
                if key not in seen:
                    seen.add(key)
                    pieces.append(piece)
    return pieces


def room_wall_pieces(room: RoomGeometry) -> list[ConvexPiece]:
    """All wall solids of one room (no floor)."""
    out: list[ConvexPiece] = []
    for seg in room.walls:
        out.extend(wall_pieces(room, seg.id))
    return out
