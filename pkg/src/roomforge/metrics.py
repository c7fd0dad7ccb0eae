"""Simulation-readiness metrics and geometric state queries.

Collision rate and penetration depth, stability under settling, room
navigability, out-of-bounds sampling, and the pairwise support query used
by evaluation tooling. Thin coverings never count: they carry no
collision geometry.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotFoundError
from .geometry import free_space, ray_hits_floor, signed_distance_info
from .scene.model import AssetCategory, Scene
from .scene.surfaces import scene_surfaces
from .scene.architecture import scene_static_pieces
from .sim.engine import SettleReport, SimBody, SimConfig, settle
from .tools.common import aabbs_disjoint, object_aabb, object_obb2

COLLISION_THRESHOLD = 0.001
STABLE_DISPLACEMENT = 0.01
STABLE_ROTATION = 0.1
OOB_SAMPLES = 256
OOB_HIT_FRACTION = 0.99
SUPPORT_CONTACT_THRESHOLD = 0.002


@dataclass
class CollisionMetrics:
    col_percent: float
    mean_penetration_depth: float  # Meters, over colliding objects; 0 when none.
    pairs: list[dict] = field(default_factory=list)
    colliding_ids: tuple[str, ...] = ()
    object_count: int = 0


def _countable_objects(scene: Scene) -> list[str]:
    """Collision-bearing objects; zero-piece assets are excluded entirely."""
    return [
        oid
        for oid in sorted(scene.objects)
        if scene.asset_of(scene.objects[oid]).has_collision
    ]


def collision_metrics(scene: Scene, threshold: float = COLLISION_THRESHOLD) -> CollisionMetrics:
    """Fraction of objects in pairwise collision deeper than the threshold.

    The mean penetration depth averages each colliding object's deepest
    violation; separated scenes report zero.
    """
    ids = _countable_objects(scene)
    boxes = {oid: object_aabb(scene, scene.objects[oid]) for oid in ids}
    deepest: dict[str, float] = {}
    pairs = []
    for i, a_id in enumerate(ids):
        a = scene.objects[a_id]
        asset_a = scene.asset_of(a)
        for b_id in ids[i + 1 :]:
            if aabbs_disjoint(boxes[a_id], boxes[b_id]):
                continue
            b = scene.objects[b_id]
            asset_b = scene.asset_of(b)
            dist = signed_distance_info(
                asset_a.collision_pieces, a.pose, asset_b.collision_pieces, b.pose
            ).distance
            if dist < -threshold:
                depth = -dist
                pairs.append({"pair": (a_id, b_id), "depth": float(depth)})
                deepest[a_id] = max(deepest.get(a_id, 0.0), depth)
                deepest[b_id] = max(deepest.get(b_id, 0.0), depth)
    colliding = sorted(deepest)
    col = 100.0 * len(colliding) / len(ids) if ids else 0.0
    mpd = float(np.mean([deepest[oid] for oid in colliding])) if colliding else 0.0
    return CollisionMetrics(
        col_percent=col,
        mean_penetration_depth=mpd,
        pairs=pairs,
        colliding_ids=tuple(colliding),
        object_count=len(ids),
    )


@dataclass
class StabilityMetrics:
    stb_percent: float
    mean_displacement: float  # Over non-welded objects, meters.
    max_displacement: float
    mean_rotation: float  # Radians.
    stable_flags: dict[str, bool] = field(default_factory=dict)
    report: SettleReport | None = None


def stability_metrics(scene: Scene, cfg: SimConfig = SimConfig()) -> StabilityMetrics:
    """Settle the scene and classify objects as statically stable.

    Wall and ceiling objects are welded to the world; an object is stable
    when its displacement and geodesic rotation stay under the protocol
    thresholds. Welded objects count as stable.
    """
    ids = _countable_objects(scene)
    bodies = []
    welded_ids = set()
    for oid in ids:
        obj = scene.objects[oid]
        category = scene.asset_of(obj).category
        welded = obj.welded or category in (AssetCategory.WALL, AssetCategory.CEILING)
        if welded:
            welded_ids.add(oid)
        bodies.append(SimBody(id=oid, asset=scene.asset_of(obj), pose=obj.pose, welded=welded))
    if not bodies:
        return StabilityMetrics(100.0, 0.0, 0.0, 0.0)
    report = settle(bodies, scene_static_pieces(scene), cfg)

    flags: dict[str, bool] = {}
    disp, rots = [], []
    for oid in ids:
        outcome = report.outcomes[oid]
        if oid in welded_ids:
            flags[oid] = True
            continue
        flags[oid] = (
            outcome.displacement < STABLE_DISPLACEMENT and outcome.rotation < STABLE_ROTATION
        )
        disp.append(outcome.displacement)
        rots.append(outcome.rotation)
    stb = 100.0 * sum(flags.values()) / len(flags) if flags else 100.0
    return StabilityMetrics(
        stb_percent=stb,
        mean_displacement=float(np.mean(disp)) if disp else 0.0,
        max_displacement=float(np.max(disp)) if disp else 0.0,
        mean_rotation=float(np.mean(rots)) if rots else 0.0,
        stable_flags=flags,
        report=report,
    )


def navigability(scene: Scene, robot_half_width: float, room_id: str | None = None) -> float:
    """Largest connected walkable area over total walkable area (1.0 if none).

    Multi-room scenes aggregate per-room results: the sum of each room's
    largest component over the summed walkable area.
    """
    if room_id is None:
        room_ids = sorted(scene.rooms)
        if not room_ids:
            return 1.0
    else:
        scene.get_room(room_id)
        room_ids = [room_id]
    largest_sum = 0.0
    total_sum = 0.0
    for rid in room_ids:
        room = scene.rooms[rid]
        floor = room.floor_world()
        obstacles = []
        for oid in sorted(scene.objects):
            obj = scene.objects[oid]
            if scene.asset_of(obj).category is not AssetCategory.FURNITURE:
                continue
            if floor.contains_point(obj.pose.translation[0], obj.pose.translation[1]):
                obstacles.append(object_obb2(scene, obj))
        result = free_space(floor, obstacles, robot_half_width)
        if result.count:
            largest_sum += max(result.areas)
            total_sum += result.total_area
    if total_sum <= 0.0:
        return 1.0
    return float(largest_sum / total_sum)


@dataclass
class OutOfBoundsMetrics:
    oob_fraction: float
    flagged: tuple[str, ...] = ()
    hit_fractions: dict[str, float] = field(default_factory=dict)


def _sample_surface_points(scene: Scene, oid: str, samples: int, rng: np.random.Generator) -> np.ndarray:
    """Area-weighted uniform samples over an object's hull faces, in world."""
    obj = scene.objects[oid]
    asset = scene.asset_of(obj)
    tris = []
    for piece in asset.collision_pieces:
        for tri in piece.triangles:
            tris.append(piece.vertices[tri])
    tri_arr = np.array(tris)
    a, b, c = tri_arr[:, 0], tri_arr[:, 1], tri_arr[:, 2]
    areas = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
    total = areas.sum()
    if total <= 0.0:
        return obj.pose.transform_points(np.tile(asset.com, (samples, 1)))
    chosen = rng.choice(len(tri_arr), size=samples, p=areas / total)
    u = rng.uniform(size=samples)
    v = rng.uniform(size=samples)
    flip = u + v > 1.0
    u[flip] = 1.0 - u[flip]
    v[flip] = 1.0 - v[flip]
    points = a[chosen] + u[:, None] * (b[chosen] - a[chosen]) + v[:, None] * (c[chosen] - a[chosen])
    return obj.pose.transform_points(points)


def out_of_bounds(
    scene: Scene,
    samples: int = OOB_SAMPLES,
    rng: np.random.Generator | None = None,
) -> OutOfBoundsMetrics:
    """Fraction of objects whose surface points miss the floor plan.

    Each object is sampled uniformly over its collision surfaces; it is
    flagged when fewer than 99% of downward rays land inside any room
    floor polygon.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    floors = [room.floor_world() for room in scene.rooms.values()]
    ids = _countable_objects(scene)
    flagged = []
    fractions: dict[str, float] = {}
    for oid in ids:
        points = _sample_surface_points(scene, oid, samples, rng)
        hits = 0
        for point in points:
            if any(ray_hits_floor(point, floor) for floor in floors):
                hits += 1
        fraction = hits / len(points)
        fractions[oid] = fraction
        if fraction < OOB_HIT_FRACTION:
            flagged.append(oid)
    oob = len(flagged) / len(ids) if ids else 0.0
    return OutOfBoundsMetrics(oob_fraction=float(oob), flagged=tuple(flagged), hit_fractions=fractions)


@dataclass
class SupportQueryResult:
    in_contact: bool
    signed_distance: float
    vertical_gap: float
    horizontal_offset: float
    overlap_percent: float


def support_query(scene: Scene, a_id: str, b_id: str) -> SupportQueryResult:
    """Spatial relation of object a against potential supporter b."""
    a = scene.get_object(a_id)
    b = scene.get_object(b_id)
    dist = signed_distance_info(
        scene.asset_of(a).collision_pieces, a.pose, scene.asset_of(b).collision_pieces, b.pose
    ).distance
    box_a = object_aabb(scene, a)
    box_b = object_aabb(scene, b)
    vertical_gap = float(box_a[0][2] - box_b[1][2])
    horizontal_offset = float(
        np.linalg.norm(
            ((box_a[0][:2] + box_a[1][:2]) / 2.0) - ((box_b[0][:2] + box_b[1][:2]) / 2.0)
        )
    )

    footprint = object_obb2(scene, a).to_polygon()
    overlap = 0.0
    surfaces = [
        s
        for s in scene_surfaces(scene).values()
        if s.owner_id == b_id
    ]
    if surfaces:
        # Judge against the support level closest below the object's bottom.
        bottom = box_a[0][2]
        surfaces.sort(key=lambda s: abs(s.height - bottom))
        surface = surfaces[0]
        ring = surface.bounds.exterior
        world = surface.frame.transform_points(np.column_stack([ring, np.zeros(len(ring))]))
        from .geometry import Polygon2

        bounds_world = Polygon2(world[:, :2])
        overlap = footprint.intersection_area(bounds_world) / max(footprint.area, 1e-12)
    else:
        from .geometry import Polygon2

        lo, hi = box_b[0][:2], box_b[1][:2]
        bounds_world = Polygon2([(lo[0], lo[1]), (hi[0], lo[1]), (hi[0], hi[1]), (lo[0], hi[1])])
        overlap = footprint.intersection_area(bounds_world) / max(footprint.area, 1e-12)

    return SupportQueryResult(
        in_contact=dist < SUPPORT_CONTACT_THRESHOLD,
        signed_distance=float(dist),
        vertical_gap=vertical_gap,
        horizontal_offset=horizontal_offset,
        overlap_percent=float(100.0 * overlap),
    )


@dataclass
class MetricsReport:
    col_percent: float
    mean_penetration_depth_mm: float
    stb_percent: float
    mean_displacement_mm: float
    max_displacement_m: float
    mean_rotation_rad: float
    navigability: float
    oob_fraction: float
    object_count: int

    def to_dict(self) -> dict:
        return {
            "COL_percent": self.col_percent,
            "MPD_mm": self.mean_penetration_depth_mm,
            "STB_percent": self.stb_percent,
            "MD_mm": self.mean_displacement_mm,
            "XD_m": self.max_displacement_m,
            "MR_rad": self.mean_rotation_rad,
            "NAV": self.navigability,
            "OOB": self.oob_fraction,
            "object_count": self.object_count,
        }


def metrics_report(
    scene: Scene,
    robot_half_width: float = 0.35,
    sim_cfg: SimConfig = SimConfig(),
    rng: np.random.Generator | None = None,
    room_id: str | None = None,
) -> MetricsReport:
    """Full per-scene readiness report."""
    col = collision_metrics(scene)
    stb = stability_metrics(scene, sim_cfg)
    nav = navigability(scene, robot_half_width, room_id)
    oob = out_of_bounds(scene, rng=rng)
    return MetricsReport(
        col_percent=col.col_percent,
        mean_penetration_depth_mm=col.mean_penetration_depth * 1000.0,
        stb_percent=stb.stb_percent,
        mean_displacement_mm=stb.mean_displacement * 1000.0,
        max_displacement_m=stb.max_displacement,
        mean_rotation_rad=stb.mean_rotation,
        navigability=nav,
        oob_fraction=oob.oob_fraction,
        object_count=col.object_count,
    )
