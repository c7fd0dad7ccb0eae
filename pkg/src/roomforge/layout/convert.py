"""FloorPlan to scene rooms: volumetric walls with per-neighbor segmentation."""

from __future__ import annotations

import numpy as np

from ..geometry import Polygon2
from ..scene.model import RoomGeometry, Scene, WallSegment
from .solver import FloorPlan

DEFAULT_WALL_HEIGHT = 2.5
DEFAULT_WALL_THICKNESS = 0.1
_SIDE_ORDER = ("S", "E", "N", "W")


def _side_span(rect, side: str):
    """(start, end) world endpoints of a rectangle side, CCW perimeter."""
    x0, y0, x1, y1 = rect
    return {
        "S": (np.array([x0, y0]), np.array([x1, y0])),
        "E": (np.array([x1, y0]), np.array([x1, y1])),
        "N": (np.array([x1, y1]), np.array([x0, y1])),
        "W": (np.array([x0, y1]), np.array([x0, y0])),
    }[side]


_OPPOSITE = {"S": "N", "N": "S", "E": "W", "W": "E"}


def _cross2(a, b) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


def _neighbor_intervals(plan: FloorPlan, name: str, side: str) -> list[tuple[float, float, str]]:
    """Shared spans (t0, t1, neighbor) along one side, in side parameter."""
    room = plan.room(name)
    start, end = _side_span(room.rect, side)
    length = float(np.linalg.norm(end - start))
    direction = (end - start) / length
    out = []
    for other in plan.rooms:
        if other.spec.name == name:
            continue
        o_start, o_end = _side_span(other.rect, _OPPOSITE[side])
        # Same boundary line?
        if abs(_cross2(direction, o_start - start)) > 1e-6:
            continue
        if abs(_cross2(direction, o_end - start)) > 1e-6:
            continue
        t_a = float(np.dot(o_start - start, direction))
        t_b = float(np.dot(o_end - start, direction))
        t0, t1 = max(0.0, min(t_a, t_b)), min(length, max(t_a, t_b))
        if t1 - t0 > 1e-4:
            out.append((t0, t1, other.spec.name))
    out.sort()
    return out


def plan_to_rooms(
    plan: FloorPlan,
    *,
    wall_height: float = DEFAULT_WALL_HEIGHT,
    wall_thickness: float = DEFAULT_WALL_THICKNESS,
) -> list[RoomGeometry]:
    """Room geometries of a floor plan.

    Each rectangle side is split where neighboring rooms start and stop, so
    every wall segment is either fully exterior or shared with exactly one
    neighbor. Segment ids are the side letter plus a running index when the
    side is split (E0, E1, ...).
    """
    rooms = []
    for placed in plan.rooms:
        name = placed.spec.name
        rect = placed.rect
        center = placed.center
        origin = np.array(center)
        walls: list[WallSegment] = []
        for side in _SIDE_ORDER:
            start_w, end_w = _side_span(rect, side)
            length = float(np.linalg.norm(end_w - start_w))
            direction = (end_w - start_w) / length
            intervals = _neighbor_intervals(plan, name, side)
            cuts = sorted({0.0, length, *[t for iv in intervals for t in iv[:2]]})
            pieces = []
            for t0, t1 in zip(cuts, cuts[1:]):
                if t1 - t0 < 1e-6:
                    continue
                mid = (t0 + t1) / 2.0
                shared = None
                for a, b, neighbor in intervals:
                    if a - 1e-9 <= mid <= b + 1e-9:
                        shared = neighbor
                        break
                pieces.append((t0, t1, shared))
            for k, (t0, t1, shared) in enumerate(pieces):
                seg_id = side if len(pieces) == 1 else f"{side}{k}"
                walls.append(
                    WallSegment(
                        id=seg_id,
                        start=start_w + direction * t0 - origin,
                        end=start_w + direction * t1 - origin,
                        thickness=wall_thickness,
                        shared_with=shared,
                    )
                )
        hw = (rect[2] - rect[0]) / 2.0
        hl = (rect[3] - rect[1]) / 2.0
        rooms.append(
            RoomGeometry(
                id=name,
                origin=origin,
                floor=Polygon2([(-hw, -hl), (hw, -hl), (hw, hl), (-hw, hl)]),
                wall_height=wall_height,
                walls=walls,
                prompt=placed.spec.prompt,
            )
        )
    return rooms


def plan_into_scene(
    scene: Scene,
    plan: FloorPlan,
    *,
    wall_height: float = DEFAULT_WALL_HEIGHT,
    wall_thickness: float = DEFAULT_WALL_THICKNESS,
) -> Scene:
    for room in plan_to_rooms(plan, wall_height=wall_height, wall_thickness=wall_thickness):
        scene.add_room(room)
    return scene
