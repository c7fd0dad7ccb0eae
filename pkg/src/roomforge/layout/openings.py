"""Door and window placement with coarse thirds and uniform exact sampling."""

from __future__ import annotations

import numpy as np

from ..errors import OpeningDimensionError, OpeningPlacementError
from ..scene.model import Door, RoomGeometry, Scene, Window

COARSE_POSITIONS = ("left", "center", "right")


def _segment_third(length: float, coarse: str) -> tuple[float, float]:
    third = length / 3.0
    index = {"left": 0, "center": 1, "right": 2}[coarse]
    return index * third, (index + 1) * third


def _occupied_spans(room: RoomGeometry, segment_id: str) -> list[tuple[float, float]]:
    spans = []
    for door in room.doors:
        if door.segment_id == segment_id:
            spans.append((door.offset - door.width / 2.0, door.offset + door.width / 2.0))
    for win in room.windows:
        if win.segment_id == segment_id:
            spans.append((win.offset - win.width / 2.0, win.offset + win.width / 2.0))
    return spans


def _feasible_intervals(
    lo: float, hi: float, half_width: float, occupied: list[tuple[float, float]]
) -> list[tuple[float, float]]:
    """Sub-intervals of [lo, hi] where an opening center can legally sit."""
    intervals = [(lo + half_width, hi - half_width)]
    for span_lo, span_hi in sorted(occupied):
        blocked = (span_lo - half_width, span_hi + half_width)
        next_intervals = []
        for a, b in intervals:
            if blocked[1] <= a or blocked[0] >= b:
                next_intervals.append((a, b))
                continue
            if blocked[0] > a:
                next_intervals.append((a, blocked[0]))
            if blocked[1] < b:
                next_intervals.append((blocked[1], b))
        intervals = next_intervals
    return [(a, b) for a, b in intervals if b - a > 1e-12]


def _sample_uniform(intervals: list[tuple[float, float]], rng: np.random.Generator) -> float:
    lengths = np.array([b - a for a, b in intervals])
    pick = int(rng.choice(len(intervals), p=lengths / lengths.sum()))
    a, b = intervals[pick]
    return float(rng.uniform(a, b))


def add_opening(
    room: RoomGeometry,
    kind: str,
    segment_id: str,
    coarse: str,
    dims: dict,
    rng: np.random.Generator,
) -> RoomGeometry:
    """Add a door or window at a uniformly sampled offset in a segment third.

    The opening center is drawn uniformly over the part of the chosen third
    where the opening fits entirely inside the segment and clears existing
    openings on it.

    Args:
        room: Room to modify in place (also returned).
        kind: "door" or "window".
        segment_id: Wall segment carrying the opening.
        coarse: One of left, center, right (segment thirds).
        dims: {"width", "height"} plus {"sill"} for windows.
        rng: Seeded stream for the exact position.

    Raises:
        OpeningDimensionError: Opening is wider than the segment third or
            taller than the wall allows.
        OpeningPlacementError: No overlap-free position remains.
    """
    if kind not in ("door", "window"):
        raise ValueError(f"unknown opening kind {kind!r}")
    if coarse not in COARSE_POSITIONS:
        raise ValueError(f"coarse position must be one of {COARSE_POSITIONS}")
    seg = room.segment(segment_id)
    width = float(dims["width"])
    height = float(dims["height"])
    if width <= 0.0 or height <= 0.0:
        raise OpeningDimensionError("opening dimensions must be positive")
    third_lo, third_hi = _segment_third(seg.length, coarse)
    if width > (third_hi - third_lo) + 1e-9:
        raise OpeningDimensionError(
            f"{kind} width {width} m exceeds the {coarse} third of segment {segment_id!r}"
        )
    if kind == "window":
        sill = float(dims["sill"])
        if sill < 0.0:
            raise OpeningDimensionError("window sill must be non-negative")
        if sill + height > room.wall_height + 1e-9:
            raise OpeningDimensionError("window rises above the wall")
    elif height > room.wall_height + 1e-9:
        raise OpeningDimensionError("door is taller than the wall")

    intervals = _feasible_intervals(third_lo, third_hi, width / 2.0, _occupied_spans(room, segment_id))
    if not intervals:
        raise OpeningPlacementError(
            f"no overlap-free position for {kind} on segment {segment_id!r} ({coarse})"
        )
    offset = _sample_uniform(intervals, rng)
    if kind == "door":
        room.doors.append(Door(segment_id=segment_id, offset=offset, width=width, height=height))
    else:
        room.windows.append(
            Window(segment_id=segment_id, offset=offset, width=width, height=height, sill=float(dims["sill"]))
        )
    room.validate_openings()
    return room


def mirror_opening_to_neighbor(scene: Scene, room_id: str, kind: str, opening) -> None:
    """Copy an interior opening onto the neighbor room's matching segment.

    Interior doors must exist in both rooms' geometries so both wall solids
    are cut; the neighbor-local offset is recomputed from world coordinates.
    """
    room = scene.get_room(room_id)
    seg = room.segment(opening.segment_id)
    if seg.shared_with is None:
        return
    neighbor = scene.get_room(seg.shared_with)
    world_center = room.to_world_xy(seg.start + seg.direction * opening.offset)
    best = None
    for other_seg in neighbor.walls:
        if other_seg.shared_with != room_id:
            continue
        start = neighbor.to_world_xy(other_seg.start)
        rel = world_center - start
        offset = float(np.dot(rel, other_seg.direction))
        direction = other_seg.direction
        lateral = abs(float(direction[0] * rel[1] - direction[1] * rel[0]))
        if -1e-6 <= offset <= other_seg.length + 1e-6 and lateral < seg.thickness + 1e-6:
            best = (other_seg, min(max(offset, opening.width / 2.0), other_seg.length - opening.width / 2.0))
            break
    if best is None:
        return
    other_seg, offset = best
    for existing in neighbor.doors + neighbor.windows:
        if existing.segment_id == other_seg.id and abs(existing.offset - offset) < 1e-6:
            return
    if kind == "door":
        neighbor.doors.append(
            Door(segment_id=other_seg.id, offset=offset, width=opening.width, height=opening.height)
        )
    else:
        neighbor.windows.append(
            Window(
                segment_id=other_seg.id,
                offset=offset,
                width=opening.width,
                height=opening.height,
                sill=opening.sill,
            )
        )
    neighbor.validate_openings()
