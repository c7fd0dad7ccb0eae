"""Room connectivity validation by traversal of doors and open connections."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from ..scene.model import Scene


@dataclass
class ConnectivityReport:
    ok: bool
    errors: list[str] = field(default_factory=list)
    unreachable: list[str] = field(default_factory=list)


def connectivity_edges(scene: Scene) -> set[frozenset[str]]:
    """Room pairs connected by an interior door or open connection."""
    edges: set[frozenset[str]] = set()
    for room in scene.rooms.values():
        for door in room.doors:
            neighbor = room.segment(door.segment_id).shared_with
            if neighbor is not None and neighbor in scene.rooms:
                edges.add(frozenset((room.id, neighbor)))
        for seg_id in room.open_connections:
            neighbor = room.segment(seg_id).shared_with
            if neighbor is not None and neighbor in scene.rooms:
                edges.add(frozenset((room.id, neighbor)))
    return edges


def exterior_door_rooms(scene: Scene) -> list[str]:
    out = []
    for room_id in sorted(scene.rooms):
        room = scene.rooms[room_id]
        if any(room.door_is_exterior(d) for d in room.doors):
            out.append(room_id)
    return out


def validate_connectivity(scene: Scene) -> ConnectivityReport:
    """Check every room is reachable from the exterior.

    Breadth-first search starts from all rooms with exterior doors and
    walks interior doors and open connections. Missing exterior doors or
    unreachable rooms are reported, not raised.
    """
    if not scene.rooms:
        return ConnectivityReport(ok=False, errors=["no rooms in scene"])
    starts = exterior_door_rooms(scene)
    if not starts:
        return ConnectivityReport(
            ok=False, errors=["no exterior door"], unreachable=sorted(scene.rooms)
        )
    edges = connectivity_edges(scene)
    neighbors: dict[str, set[str]] = {room_id: set() for room_id in scene.rooms}
    for edge in edges:
        a, b = tuple(edge)
        neighbors[a].add(b)
        neighbors[b].add(a)

    seen = set(starts)
    queue = deque(starts)
    while queue:
        current = queue.popleft()
        for nxt in sorted(neighbors[current]):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)

    unreachable = sorted(set(scene.rooms) - seen)
    if unreachable:
        return ConnectivityReport(
            ok=False,
            errors=[f"room {room_id!r} is not reachable from the exterior" for room_id in unreachable],
            unreachable=unreachable,
        )
    return ConnectivityReport(ok=True)
