"""Scene data model: assets, rooms, object instances.

A scene is a set of axis-aligned rooms with volumetric architecture plus a
catalog of simulation-ready assets and posed object instances. Mutating
helpers return nothing but keep all invariants checked at the boundaries.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import InvalidGeometryError, NotFoundError
from ..geometry import ConvexPiece, Polygon2, Pose2, Pose3

_BASE36 = "0123456789abcdefghijklmnopqrstuvwxyz"


def int_to_base36(num: int) -> str:
    if num == 0:
        return "0"
    digits = ""
    while num:
        digits = _BASE36[num % 36] + digits
        num //= 36
    return digits


class AssetCategory(Enum):
    FURNITURE = "furniture"
    WALL = "wall"
    CEILING = "ceiling"
    MANIPULAND = "manipuland"
    THIN_COVERING = "thin_covering"


@dataclass
class Asset:
    """Simulation-ready asset in its canonical frame.

    Canonical frames are Z-up with a category-specific origin: furniture and
    manipulands rest their bottom at z=0, ceiling assets hang their top at
    z=0, and wall assets sit their back at y=0 (bottom at z=0).
    """

    id: str
    category: AssetCategory
    collision_pieces: list[ConvexPiece]
    bbox_min: np.ndarray
    bbox_max: np.ndarray
    mass: float
    com: np.ndarray
    inertia: np.ndarray
    friction: float = 0.5
    visual_ref: str = ""

    def __post_init__(self):
        self.bbox_min = np.asarray(self.bbox_min, dtype=float).reshape(3)
        self.bbox_max = np.asarray(self.bbox_max, dtype=float).reshape(3)
        self.com = np.asarray(self.com, dtype=float).reshape(3)
        self.inertia = np.asarray(self.inertia, dtype=float).reshape(3, 3)
        if self.category is AssetCategory.THIN_COVERING:
            if self.mass < 0.0:
                raise InvalidGeometryError("thin covering mass must be non-negative")
        elif self.mass <= 0.0:
            raise InvalidGeometryError(f"asset {self.id!r} must have positive mass")
        for piece in self.collision_pieces:
            if np.any(piece.aabb_min < self.bbox_min - 1e-9) or np.any(
                piece.aabb_max > self.bbox_max + 1e-9
            ):
                raise InvalidGeometryError(f"asset {self.id!r} bbox does not enclose pieces")
        eigvals = np.linalg.eigvalsh((self.inertia + self.inertia.T) / 2.0)
        if np.any(eigvals < -1e-9):
            raise InvalidGeometryError(f"asset {self.id!r} inertia is not PSD")

    @property
    def extents(self) -> np.ndarray:
        return self.bbox_max - self.bbox_min

    @property
    def has_collision(self) -> bool:
        return len(self.collision_pieces) > 0

    def footprint_polygon(self) -> Polygon2:
        """Convex hull of the canonical collision vertices projected to xy."""
        from scipy.spatial import ConvexHull

        if not self.collision_pieces:
            mn, mx = self.bbox_min, self.bbox_max
            return Polygon2([(mn[0], mn[1]), (mx[0], mn[1]), (mx[0], mx[1]), (mn[0], mx[1])])
        points = np.vstack([p.vertices[:, :2] for p in self.collision_pieces])
        hull = ConvexHull(points)
        return Polygon2(points[hull.vertices])


@dataclass
class SupportRef:
    """Reference of an object to the surface it is placed on."""

    surface_id: str
    local: Pose2


@dataclass
class ObjectInstance:
    id: str
    asset_id: str
    pose: Pose3
    support: SupportRef | None = None
    welded: bool = False


@dataclass
class WallSegment:
    """One straight wall run in the room frame, with finite thickness."""

    id: str
    start: np.ndarray
    end: np.ndarray
    thickness: float
    shared_with: str | None = None  # Neighbor room id when the wall is interior.

    def __post_init__(self):
        self.start = np.asarray(self.start, dtype=float).reshape(2)
        self.end = np.asarray(self.end, dtype=float).reshape(2)
        if self.thickness <= 0.0:
            raise InvalidGeometryError(f"wall segment {self.id!r} needs positive thickness")
        if float(np.linalg.norm(self.end - self.start)) <= 0.0:
            raise InvalidGeometryError(f"wall segment {self.id!r} has zero length")

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.end - self.start))

    @property
    def direction(self) -> np.ndarray:
        return (self.end - self.start) / self.length


@dataclass
class Door:
    segment_id: str
    offset: float  # Center position along the segment, meters from its start.
    width: float
    height: float


@dataclass
class Window:
    segment_id: str
    offset: float
    width: float
    height: float
    sill: float


@dataclass
class RoomGeometry:
    """Architectural geometry of one room in its own centered frame."""

    id: str
    origin: np.ndarray  # World position of the room frame.
    floor: Polygon2
    wall_height: float
    walls: list[WallSegment] = field(default_factory=list)
    doors: list[Door] = field(default_factory=list)
    windows: list[Window] = field(default_factory=list)
    open_connections: list[str] = field(default_factory=list)
    prompt: str = ""  # Opaque room prompt metadata; never interpreted.

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=float).reshape(2)
        if self.wall_height <= 0.0:
            raise InvalidGeometryError(f"room {self.id!r} needs positive wall height")
        self.validate_openings()

    def segment(self, segment_id: str) -> WallSegment:
        for seg in self.walls:
            if seg.id == segment_id:
                return seg
        raise NotFoundError(f"room {self.id!r} has no wall segment {segment_id!r}")

    def validate_openings(self) -> None:
        for door in self.doors:
            seg = self.segment(door.segment_id)
            if door.offset - door.width / 2.0 < -1e-9 or door.offset + door.width / 2.0 > seg.length + 1e-9:
                raise InvalidGeometryError(f"door on {seg.id!r} extends past the segment")
            if door.height > self.wall_height + 1e-9:
                raise InvalidGeometryError(f"door on {seg.id!r} is taller than the wall")
        for win in self.windows:
            seg = self.segment(win.segment_id)
            if win.offset - win.width / 2.0 < -1e-9 or win.offset + win.width / 2.0 > seg.length + 1e-9:
                raise InvalidGeometryError(f"window on {seg.id!r} extends past the segment")
            if win.sill + win.height > self.wall_height + 1e-9:
                raise InvalidGeometryError(f"window on {seg.id!r} rises above the wall")
        for seg_id in self.open_connections:
            self.segment(seg_id)

    def door_is_exterior(self, door: Door) -> bool:
        return self.segment(door.segment_id).shared_with is None

    def to_world_xy(self, point) -> np.ndarray:
        return np.asarray(point, dtype=float) + self.origin

    def floor_world(self) -> Polygon2:
        return Polygon2(self.floor.exterior + self.origin, [h + self.origin for h in self.floor.holes])


@dataclass
class Scene:
    """Rooms, asset catalog, posed objects, and the base random seed."""

    seed: int = 0
    rooms: dict[str, RoomGeometry] = field(default_factory=dict)
    assets: dict[str, Asset] = field(default_factory=dict)
    objects: dict[str, ObjectInstance] = field(default_factory=dict)

    def add_room(self, room: RoomGeometry) -> None:
        if room.id in self.rooms:
            raise InvalidGeometryError(f"duplicate room id {room.id!r}")
        new_floor = room.floor_world().to_shapely()
        for other in self.rooms.values():
            overlap = new_floor.intersection(other.floor_world().to_shapely()).area
            if overlap > 1e-9:
                raise InvalidGeometryError(
                    f"room {room.id!r} overlaps room {other.id!r} by {overlap:.4g} m^2"
                )
        self.rooms[room.id] = room

    def add_asset(self, asset: Asset) -> None:
        if asset.id in self.assets:
            raise InvalidGeometryError(f"duplicate asset id {asset.id!r}")
        self.assets[asset.id] = asset

    def asset_of(self, obj: ObjectInstance) -> Asset:
        try:
            return self.assets[obj.asset_id]
        except KeyError:
            raise NotFoundError(f"asset {obj.asset_id!r} not in catalog") from None

    def get_object(self, object_id: str) -> ObjectInstance:
        try:
            return self.objects[object_id]
        except KeyError:
            raise NotFoundError(f"object {object_id!r} not in scene") from None

    def get_room(self, room_id: str) -> RoomGeometry:
        try:
            return self.rooms[room_id]
        except KeyError:
            raise NotFoundError(f"room {room_id!r} not in scene") from None

    def next_object_id(self, name: str) -> str:
        """Name plus the first free base-36 suffix (chair_0, chair_a, chair_10)."""
        base = name.lower().replace(" ", "_")
        index = 0
        while f"{base}_{int_to_base36(index)}" in self.objects:
            index += 1
        return f"{base}_{int_to_base36(index)}"

    def add_object(
        self,
        asset_id: str,
        pose: Pose3,
        *,
        name: str | None = None,
        support: SupportRef | None = None,
        welded: bool = False,
        object_id: str | None = None,
    ) -> ObjectInstance:
        if asset_id not in self.assets:
            raise NotFoundError(f"asset {asset_id!r} not in catalog")
        if object_id is None:
            object_id = self.next_object_id(name or asset_id)
        elif object_id in self.objects:
            raise InvalidGeometryError(f"duplicate object id {object_id!r}")
        obj = ObjectInstance(id=object_id, asset_id=asset_id, pose=pose, support=support, welded=welded)
        self.objects[object_id] = obj
        return obj

    def remove_object(self, object_id: str) -> ObjectInstance:
        return self.objects.pop(object_id)

    def objects_by_category(self, category: AssetCategory) -> list[ObjectInstance]:
        return [o for o in self.objects.values() if self.asset_of(o).category is category]

    def copy(self) -> "Scene":
        """Deep snapshot; assets are immutable and shared."""
        return Scene(
            seed=self.seed,
            rooms=copy.deepcopy(self.rooms),
            assets=dict(self.assets),
            objects=copy.deepcopy(self.objects),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scene):
            return NotImplemented
        from .serialize import scene_to_dict

        return scene_to_dict(self) == scene_to_dict(other)
