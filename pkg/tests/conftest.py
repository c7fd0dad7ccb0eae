"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

import numpy as np
import pytest
from shapely.geometry import Point

from roomforge.geometry import ConvexPiece, Polygon2, Pose2, box_mesh
from roomforge.scene import (
    AssetCategory,
    Scene,
    box_asset,
    place_on_surface,
    rectangular_room,
    scene_surfaces,
)

GRID_STEP = 0.02


def grid_flood_fill(floor: Polygon2, obstacles, radius: float, step: float = GRID_STEP):
    """Independent free-space oracle: distance tests plus 4-connected fill.

    A cell center is free when it lies in the floor, at least `radius` from
    the floor boundary, and more than `radius` from every obstacle polygon.
    Distances come from exact point-polygon queries, not from any offsetting
    machinery. Returns (component_count, areas list, total_area).
    """
    import shapely
    from scipy import ndimage

    shp_floor = floor.to_shapely()
    obstacle_shps = [
        o.to_polygon().to_shapely() if hasattr(o, "to_polygon") else o.to_shapely()
        for o in obstacles
    ]
    minx, miny, maxx, maxy = shp_floor.bounds
    nx = int(np.ceil((maxx - minx) / step))
    ny = int(np.ceil((maxy - miny) / step))
    xs = minx + (np.arange(nx) + 0.5) * step
    ys = miny + (np.arange(ny) + 0.5) * step
    grid_x, grid_y = np.meshgrid(xs, ys, indexing="ij")
    points = shapely.points(grid_x.ravel(), grid_y.ravel())

    free = shapely.covers(shp_floor, points)
    free &= shapely.distance(shapely.get_exterior_ring(shp_floor), points) >= radius
    for obs in obstacle_shps:
        free &= shapely.distance(obs, points) > radius
    free = free.reshape(nx, ny)

    structure = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])
    labels, count = ndimage.label(free, structure=structure)
    areas = sorted(
        (float(np.sum(labels == k)) * step * step for k in range(1, count + 1)), reverse=True
    )
    return count, areas, float(sum(areas))


def union_find_connectivity(room_ids, edges, exterior_rooms):
    """Independent connectivity oracle over rooms.

    Returns (ok, unreachable) using union-find over door/open edges, with
    reachability judged against the set of rooms holding exterior doors.
    """
    parent = {r: r for r in room_ids}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        parent[find(x)] = find(y)

    for a, b in edges:
        union(a, b)
    if not exterior_rooms:
        return False, sorted(room_ids)
    roots = {find(r) for r in exterior_rooms}
    unreachable = sorted(r for r in room_ids if find(r) not in roots)
    return not unreachable, unreachable


@pytest.fixture
def simple_room_scene():
    """10x10 room with a table and its support surfaces resolved."""
    scene = Scene(seed=11)
    scene.add_room(rectangular_room("room", 10.0, 10.0))
    scene.add_asset(box_asset("table", (1.2, 0.8, 0.75), 25.0))
    scene.add_asset(box_asset("chair", (0.45, 0.45, 0.9), 6.0))
    scene.add_asset(box_asset("mug", (0.08, 0.08, 0.1), 0.3, category=AssetCategory.MANIPULAND))
    floor = scene_surfaces(scene)["room/floor"]
    place_on_surface(scene, "table", floor, Pose2(0.0, 0.0, 0.0))
    return scene


def floor_slab_piece(size=20.0) -> ConvexPiece:
    return ConvexPiece(box_mesh((size, size, 0.2), (0, 0, -0.1)).vertices)
