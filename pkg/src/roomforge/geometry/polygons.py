"""Planar polygons, disk offsetting, and free-space decomposition.

Polygon2 wraps a validated shapely polygon; offsetting follows the
disk-erosion/dilation semantics used for robot footprint analysis: inward
offsets keep convex corners sharp, outward offsets round them with at
least 16 segments per quarter turn.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import shapely
from shapely.geometry import MultiPolygon, Point, Polygon as ShapelyPolygon

from ..errors import InvalidGeometryError

OFFSET_QUAD_SEGS = 16


class Polygon2:
    """Simple polygon with optional holes, CCW exterior and CW holes."""

    __slots__ = ("_shapely",)

    def __init__(self, exterior: Sequence, holes: Sequence[Sequence] | None = None):
        poly = ShapelyPolygon(exterior, holes)
        if not poly.is_valid or poly.area <= 0.0:
            raise InvalidGeometryError("polygon must be simple with positive area")
        # Canonical winding: CCW exterior, CW holes.
        self._shapely = shapely.geometry.polygon.orient(poly, sign=1.0)

    @classmethod
    def _wrap(cls, poly: ShapelyPolygon) -> "Polygon2":
        out = object.__new__(cls)
        out._shapely = shapely.geometry.polygon.orient(poly, sign=1.0)
        return out

    @classmethod
    def rectangle(cls, width: float, height: float, center: Sequence = (0.0, 0.0)) -> "Polygon2":
        cx, cy = float(center[0]), float(center[1])
        hw, hh = width / 2.0, height / 2.0
        return cls([(cx - hw, cy - hh), (cx + hw, cy - hh), (cx + hw, cy + hh), (cx - hw, cy + hh)])

    @property
    def area(self) -> float:
        return float(self._shapely.area)

    @property
    def exterior(self) -> np.ndarray:
        """Exterior ring vertices, CCW, without the closing repeat."""
        return np.asarray(self._shapely.exterior.coords)[:-1]

    @property
    def holes(self) -> list[np.ndarray]:
        return [np.asarray(ring.coords)[:-1] for ring in self._shapely.interiors]

    def centroid(self) -> np.ndarray:
        c = self._shapely.centroid
        return np.array([c.x, c.y])

    def contains_point(self, x: float, y: float) -> bool:
        """Point membership; boundary points count as inside."""
        return bool(self._shapely.covers(Point(float(x), float(y))))

    def distance_to_boundary(self, x: float, y: float) -> float:
        return float(self._shapely.exterior.distance(Point(float(x), float(y))))

    def intersection_area(self, other: "Polygon2") -> float:
        return float(self._shapely.intersection(other._shapely).area)

    def contains_polygon(self, other: "Polygon2", tol: float = 1e-9) -> bool:
        return float(other._shapely.difference(self._shapely.buffer(tol)).area) <= tol

    def to_shapely(self) -> ShapelyPolygon:
        return self._shapely

    def __repr__(self) -> str:  # pragma: no cover
        return f"Polygon2(area={self.area:.4g}, verts={len(self.exterior)})"


@dataclass(frozen=True)
class OBB2:
    """Oriented planar box: center, half extents, rotation in degrees."""

    center: tuple[float, float]
    half_extents: tuple[float, float]
    angle_deg: float = 0.0

    def corners(self) -> np.ndarray:
        hx, hy = self.half_extents
        local = np.array([[-hx, -hy], [hx, -hy], [hx, hy], [-hx, hy]])
        rad = np.radians(self.angle_deg)
        rot = np.array([[np.cos(rad), -np.sin(rad)], [np.sin(rad), np.cos(rad)]])
        return local @ rot.T + np.asarray(self.center)

    def to_polygon(self) -> Polygon2:
        return Polygon2(self.corners())

    def intersects(self, other: "OBB2") -> bool:
        return bool(self.to_polygon().to_shapely().intersects(other.to_polygon().to_shapely()))

    def intersection_area(self, other: "OBB2") -> float:
        return float(
            self.to_polygon().to_shapely().intersection(other.to_polygon().to_shapely()).area
        )


def _as_polygon_list(geom) -> list[Polygon2]:
    if geom.is_empty:
        return []
    if isinstance(geom, ShapelyPolygon):
        polys = [geom]
    elif isinstance(geom, MultiPolygon):
        polys = list(geom.geoms)
    else:
        polys = [g for g in getattr(geom, "geoms", []) if isinstance(g, ShapelyPolygon)]
    out = [Polygon2._wrap(p) for p in polys if p.area > 1e-12]
    # Deterministic ordering: by area descending, then centroid.
    out.sort(key=lambda p: (-p.area, tuple(np.round(p.centroid(), 9))))
    return out


def offset_polygon(polygon: Polygon2, radius: float) -> list[Polygon2]:
    """Disk offset of a polygon: erosion for radius < 0, dilation for > 0.

    Over-erosion legitimately returns an empty list. Dilation approximates
    corner arcs with OFFSET_QUAD_SEGS segments per quarter turn; erosion of
    a convex polygon is the exact inward offset.
    """
    if radius == 0.0:
        return [polygon]
    shp = polygon.to_shapely()
    result = shp.buffer(radius, quad_segs=OFFSET_QUAD_SEGS)
    return _as_polygon_list(result)


@dataclass(frozen=True)
class FreeSpaceResult:
    """Connected components of the robot-traversable region."""

    components: tuple[Polygon2, ...]

    @property
    def areas(self) -> list[float]:
        return [c.area for c in self.components]

    @property
    def total_area(self) -> float:
        return float(sum(self.areas))

    @property
    def count(self) -> int:
        return len(self.components)


def free_space(
    floor: Polygon2, obstacles: Sequence[OBB2 | Polygon2], radius: float
) -> FreeSpaceResult:
    """Region a disk robot of the given radius can occupy.

    Erodes the floor by the radius, dilates every obstacle by it, and
    subtracts; the result is split into connected components.
    """
    if radius < 0.0:
        raise InvalidGeometryError("robot radius must be non-negative")
    eroded = floor.to_shapely().buffer(-radius, quad_segs=OFFSET_QUAD_SEGS) if radius > 0.0 else floor.to_shapely()
    if eroded.is_empty:
        return FreeSpaceResult(())
    blocked = []
    for obs in obstacles:
        poly = obs.to_polygon() if isinstance(obs, OBB2) else obs
        grown = poly.to_shapely().buffer(radius, quad_segs=OFFSET_QUAD_SEGS) if radius > 0.0 else poly.to_shapely()
        blocked.append(grown)
    if blocked:
        walkable = eroded.difference(shapely.union_all(blocked))
    else:
        walkable = eroded
    return FreeSpaceResult(tuple(_as_polygon_list(walkable)))


def ray_hits_floor(point: np.ndarray, floor: Polygon2) -> bool:
    """Whether a vertical ray from the point meets the floor polygon.

    Equivalent to planar membership of the xy projection; boundary points
    count as hits so wall-flush objects are not flagged.
    """
    p = np.asarray(point, dtype=float)
    return floor.contains_point(p[0], p[1])
