"""Composite placement tools: stacks, filled containers, arrangements, piles.

Each tool assembles several assets into one settled configuration on a
support surface and reports world poses for the scene to adopt. All
simulation happens in the world frame, so lifting results into a scene is
the identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from ..errors import (
    ArrangementBoundsError,
    ArrangementCollisionError,
    ArrangementFailedError,
    ClearanceError,
    FillFailedError,
    PileFailedError,
)
from ..geometry import ConvexPiece, Polygon2, Pose2, Pose3, box_mesh, signed_distance_info
from ..geometry.poses import quat_about_x, quat_about_z, quat_multiply, sample_rotation_uniform
from ..scene.model import Asset
from ..scene.surfaces import SupportSurface, lift_pose
from .engine import SimBody, SimConfig, SettleReport, settle


@dataclass(frozen=True)
class CompositeConfig:
    """Tunables shared by the composite tools."""

    top_fraction: float = 0.2  # Container height fraction defining the rim band.
    hull_scale: float = 0.85  # Inward safety scaling of the interior hull.
    aspect_threshold: float = 2.5  # Beyond this, items stand upright.
    thick_end_ratio: float = 1.2  # Flip when the bottom footprint is this much larger.
    max_iterations: int = 10
    inside_base_fraction: float = 0.1  # Inside threshold over the container base.
    spawn_gap: float = 0.002
    stack_lateral_threshold: float = 0.03
    pile_radius_factor: float = 0.75
    fall_below_surface: float = 0.02
    arrangement_fall_below: float = 0.02


@dataclass(frozen=True)
class CompositeResult:
    success: bool
    poses: dict[str, Pose3]
    report: SettleReport
    inside_ids: tuple[str, ...] = ()
    removed_ids: tuple[str, ...] = ()
    stable_flags: dict[str, bool] = field(default_factory=dict)
    stable_prefix: int = 0
    fallen_ids: tuple[str, ...] = ()


def surface_slab(surface: SupportSurface, thickness: float = 0.2) -> ConvexPiece:
    """Static block whose top face coincides with the surface plane."""
    ring = surface.bounds.exterior
    world = surface.frame.transform_points(np.column_stack([ring, np.zeros(len(ring))]))
    mn, mx = world.min(axis=0), world.max(axis=0)
    size = (mx[0] - mn[0], mx[1] - mn[1], thickness)
    center = ((mn[0] + mx[0]) / 2.0, (mn[1] + mx[1]) / 2.0, surface.height - thickness / 2.0)
    return ConvexPiece(box_mesh(size, center).vertices)


def _piece_height(asset: Asset) -> float:
    return float(asset.bbox_max[2] - asset.bbox_min[2])


def create_stack(
    items: list[Asset],
    surface: SupportSurface,
    base_local: Pose2,
    cfg: SimConfig = SimConfig(),
    composite_cfg: CompositeConfig = CompositeConfig(),
    static_env: list[ConvexPiece] | None = None,
) -> CompositeResult:
    """Stack items bottom-to-top in input order and settle them.

    Items are named item_0 ... item_{n-1} in the result. The whole stack is
    rejected (success=False) when any item falls; items that shifted more
    than the lateral threshold are flagged unstable.

    Raises:
        ClearanceError: The stack is taller than the clearance above the
            surface, before or after settling.
    """
    if not items:
        raise ValueError("create_stack needs at least one item")
    if static_env is None:
        static_env = [surface_slab(surface)]

    total_height = sum(_piece_height(a) for a in items) + composite_cfg.spawn_gap * len(items)
    if total_height > surface.clearance:
        raise ClearanceError(
            f"stack height {total_height:.3f} m exceeds clearance {surface.clearance:.3f} m",
            required=total_height,
            available=surface.clearance,
        )

    base = lift_pose(base_local, surface)
    bodies = []
    z = 0.0
    for idx, asset in enumerate(items):
        z += composite_cfg.spawn_gap
        pose = Pose3(base.translation + np.array([0.0, 0.0, z]), base.quaternion)
        bodies.append(SimBody(id=f"item_{idx}", asset=asset, pose=pose))
        z += _piece_height(asset)

    report = settle(bodies, static_env, cfg)

    poses: dict[str, Pose3] = {}
    stable: dict[str, bool] = {}
    fallen: list[str] = []
    for idx in range(len(items)):
        bid = f"item_{idx}"
        outcome = report.outcomes[bid]
        poses[bid] = outcome.final_pose
        lateral = float(
            np.linalg.norm(outcome.final_pose.translation[:2] - bodies[idx].pose.translation[:2])
        )
        stable[bid] = lateral <= composite_cfg.stack_lateral_threshold and not outcome.fell_off
        if outcome.fell_off:
            fallen.append(bid)

    stable_prefix = 0
    for idx in range(len(items)):
        if stable[f"item_{idx}"]:
            stable_prefix += 1
        else:
            break

    if not fallen:
        top = max(
            float(poses[f"item_{i}"].translation[2] + items[i].bbox_max[2]) for i in range(len(items))
        )
        final_height = top - surface.height
        if final_height > surface.clearance:
            raise ClearanceError(
                f"settled stack height {final_height:.3f} m exceeds clearance",
                required=final_height,
                available=surface.clearance,
            )

    return CompositeResult(
        success=not fallen,
        poses=poses,
        report=report,
        stable_flags=stable,
        stable_prefix=stable_prefix,
        fallen_ids=tuple(fallen),
    )


def container_interior_hull(container: Asset, cfg: CompositeConfig = CompositeConfig()) -> Polygon2:
    """Opening polygon of a container: hull of its rim vertices, shrunk inward.

    Vertices in the top fraction of the container height are projected to
    the xy plane; their convex hull scaled toward its centroid is the safe
    spawn region.
    """
    verts = np.vstack([p.vertices for p in container.collision_pieces])
    z_min, z_max = verts[:, 2].min(), verts[:, 2].max()
    band = verts[:, 2] >= z_max - cfg.top_fraction * (z_max - z_min)
    rim = verts[band][:, :2]
    try:
        hull = ConvexHull(rim)
    except QhullError as exc:
        raise FillFailedError(f"container rim is degenerate: {exc}") from exc
    ring = rim[hull.vertices]
    centroid = ring.mean(axis=0)
    return Polygon2(centroid + (ring - centroid) * cfg.hull_scale)


def _upright_item_quat(asset: Asset, container: Asset, cfg: CompositeConfig) -> np.ndarray:
    """Initial orientation: elongated items upright, thick end up."""
    ext = asset.extents
    order = np.argsort(ext)[::-1]
    longest, middle, shortest = ext[order[0]], ext[order[1]], ext[order[2]]
    quat = np.array([1.0, 0.0, 0.0, 0.0])
    if shortest > 0 and longest / max(middle, 1e-9) >= cfg.aspect_threshold:
        # Rotate the longest canonical axis onto +Z.
        axis = int(order[0])
        if axis == 0:
            quat = quat_multiply(quat_about_z(0.0), np.array([np.cos(np.pi / 4), 0.0, np.sin(np.pi / 4), 0.0]))  # y-rot 90
        elif axis == 1:
            quat = quat_about_x(90.0)
        # Azimuth: align the remaining long axis with the container's long side.
        if container.extents[1] > container.extents[0]:
            quat = quat_multiply(quat_about_z(90.0), quat)

        from ..geometry.poses import quat_to_matrix

        rot = quat_to_matrix(quat)
        verts = np.vstack([p.vertices for p in asset.collision_pieces]) @ rot.T
        z_mid = (verts[:, 2].min() + verts[:, 2].max()) / 2.0
        bottom = verts[verts[:, 2] <= z_mid][:, :2]
        top = verts[verts[:, 2] > z_mid][:, :2]
        if len(bottom) >= 3 and len(top) >= 3:
            try:
                bottom_area = ConvexHull(bottom).volume  # 2D hull "volume" is area.
                top_area = ConvexHull(top).volume
                if bottom_area > cfg.thick_end_ratio * top_area:
                    quat = quat_multiply(quat_about_x(180.0), quat)
            except QhullError:
                pass
    return quat


def fill_container(
    container: Asset,
    fills: list[Asset],
    surface: SupportSurface,
    local: Pose2,
    cfg: SimConfig = SimConfig(),
    composite_cfg: CompositeConfig = CompositeConfig(),
    static_env: list[ConvexPiece] | None = None,
    rng: np.random.Generator | None = None,
) -> CompositeResult:
    """Drop fill items into a container and keep the ones that stay inside.

    The container is placed at the surface-local pose and held fixed; fill
    items spawn at staggered heights over the interior hull, settle, and
    are classified inside when they end above the base threshold and within
    the interior hull. Outsiders are respawned for up to max_iterations,
    then removed.

    Result ids: the container is "container", fills are fill_0, fill_1, ...

    Raises:
        FillFailedError: No item remained inside after the final iteration.
    """
    if not fills:
        raise ValueError("fill_container needs at least one fill item")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    if static_env is None:
        static_env = [surface_slab(surface)]

    container_pose = lift_pose(local, surface)
    hull_local = container_interior_hull(container, composite_cfg)
    container_height = _piece_height(container)
    container_top = surface.height + container_height
    inside_z = surface.height + composite_cfg.inside_base_fraction * container_height

    def hull_world_point(x: float, y: float) -> np.ndarray:
        return container_pose.transform_point(np.array([x, y, 0.0]))

    def sample_xy() -> tuple[float, float]:
        lo = hull_local.exterior.min(axis=0)
        hi = hull_local.exterior.max(axis=0)
        for _ in range(256):
            x = float(rng.uniform(lo[0], hi[0]))
            y = float(rng.uniform(lo[1], hi[1]))
            if hull_local.contains_point(x, y):
                return x, y
        return float(hull_local.centroid()[0]), float(hull_local.centroid()[1])

    orientations = {f"fill_{i}": _upright_item_quat(asset, container, composite_cfg) for i, asset in enumerate(fills)}
    current_pose: dict[str, Pose3] = {}
    pending = [f"fill_{i}" for i in range(len(fills))]
    asset_of = {f"fill_{i}": asset for i, asset in enumerate(fills)}

    report = None
    inside: list[str] = []
    for _ in range(composite_cfg.max_iterations):
        spawn_z = container_top + composite_cfg.spawn_gap
        for fid in pending:
            asset = asset_of[fid]
            x, y = sample_xy()
            world_xy = hull_world_point(x, y)
            from ..geometry.poses import quat_to_matrix

            rot = quat_to_matrix(orientations[fid])
            verts = np.vstack([p.vertices for p in asset.collision_pieces]) @ rot.T
            height = float(verts[:, 2].max() - verts[:, 2].min())
            lift = spawn_z - float(verts[:, 2].min())
            current_pose[fid] = Pose3(np.array([world_xy[0], world_xy[1], lift]), orientations[fid])
            spawn_z += height + composite_cfg.spawn_gap

        bodies = [SimBody(id="container", asset=container, pose=container_pose, welded=True)]
        for i in range(len(fills)):
            fid = f"fill_{i}"
            bodies.append(SimBody(id=fid, asset=asset_of[fid], pose=current_pose[fid]))
        report = settle(bodies, static_env, cfg)

        inside, outside = [], []
        hull_world = Polygon2(
            np.array([hull_world_point(x, y)[:2] for x, y in hull_local.exterior])
        )
        for i in range(len(fills)):
            fid = f"fill_{i}"
            outcome = report.outcomes[fid]
            current_pose[fid] = outcome.final_pose
            asset = asset_of[fid]
            center = outcome.final_pose.transform_point(asset.com)
            rot = outcome.final_pose.rotation
            verts = np.vstack([p.vertices for p in asset.collision_pieces]) @ rot.T
            bottom = outcome.final_pose.translation[2] + float(verts[:, 2].min())
            sunk_in = bottom < container_top - composite_cfg.spawn_gap
            if center[2] >= inside_z and sunk_in and hull_world.contains_point(center[0], center[1]):
                inside.append(fid)
            else:
                outside.append(fid)
        if not outside:
            break
        pending = outside

    removed = [fid for fid in sorted(current_pose) if fid not in inside]
    if not inside:
        raise FillFailedError("no fill item settled inside the container")

    poses = {"container": container_pose}
    for fid in inside:
        poses[fid] = current_pose[fid]
    assert report is not None
    return CompositeResult(
        success=True,
        poses=poses,
        report=report,
        inside_ids=tuple(sorted(inside)),
        removed_ids=tuple(removed),
    )


def create_arrangement(
    container: Asset,
    items: list[tuple[Asset, Pose2]],
    surface: SupportSurface,
    local: Pose2,
    cfg: SimConfig = SimConfig(),
    composite_cfg: CompositeConfig = CompositeConfig(),
    static_env: list[ConvexPiece] | None = None,
    circularity_threshold: float = 0.80,
) -> CompositeResult:
    """Place items at given container-local poses, then settle vertically.

    The container is classified circular or rectangular by mesh-to-box
    volume ratio; item centers are validated against the radius or the
    half-extents (only the center, so long items may overhang edges).

    Raises:
        ArrangementBoundsError: An item center lies outside the container.
        ArrangementCollisionError: Two items overlap before simulation.
        ArrangementFailedError: An item fell off after settling; the whole
            arrangement is rejected.
    """
    if not items:
        raise ValueError("create_arrangement needs at least one item")
    if static_env is None:
        static_env = [surface_slab(surface)]

    ext = container.extents
    volume = sum(p.volume for p in container.collision_pieces)
    box_volume = float(np.prod(ext)) if float(np.prod(ext)) > 0 else 1.0
    circular = volume / box_volume < circularity_threshold
    half_x, half_y = float(ext[0] / 2.0), float(ext[1] / 2.0)
    radius = min(half_x, half_y)

    for idx, (asset, pose2) in enumerate(items):
        if circular:
            if float(np.hypot(pose2.x, pose2.y)) > radius + 1e-9:
                raise ArrangementBoundsError(
                    f"item_{idx} center ({pose2.x:.3f}, {pose2.y:.3f}) is outside the "
                    f"circular container radius {radius:.3f}"
                )
        else:
            if abs(pose2.x) > half_x + 1e-9 or abs(pose2.y) > half_y + 1e-9:
                raise ArrangementBoundsError(
                    f"item_{idx} center ({pose2.x:.3f}, {pose2.y:.3f}) is outside the "
                    f"container half-extents ({half_x:.3f}, {half_y:.3f})"
                )

    container_pose = lift_pose(local, surface)
    container_top = surface.height + _piece_height(container)
    item_poses: dict[str, Pose3] = {}
    for idx, (asset, pose2) in enumerate(items):
        planar = Pose3(
            np.array([pose2.x, pose2.y, 0.0]), quat_about_z(pose2.theta)
        )
        lifted = container_pose.compose(planar)
        translation = lifted.translation.copy()
        translation[2] = container_top + composite_cfg.spawn_gap
        item_poses[f"item_{idx}"] = Pose3(translation, lifted.quaternion)

    # Pre-simulation collision check at the requested poses.
    ids = sorted(item_poses)
    for i, id_a in enumerate(ids):
        asset_a = items[int(id_a.split("_")[1])][0]
        for id_b in ids[i + 1 :]:
            asset_b = items[int(id_b.split("_")[1])][0]
            result = signed_distance_info(
                asset_a.collision_pieces, item_poses[id_a], asset_b.collision_pieces, item_poses[id_b]
            )
            if result.distance < 0.0:
                raise ArrangementCollisionError(
                    f"{id_a} and {id_b} collide before simulation "
                    f"(depth {-result.distance * 1000:.1f} mm)",
                    pair=(id_a, id_b),
                    depth=-result.distance,
                )

    bodies = [SimBody(id="container", asset=container, pose=container_pose, welded=True)]
    for idx, (asset, _) in enumerate(items):
        bodies.append(SimBody(id=f"item_{idx}", asset=asset, pose=item_poses[f"item_{idx}"]))
    report = settle(bodies, static_env, cfg)

    fall_z = container_top - composite_cfg.arrangement_fall_below
    fallen = []
    poses = {"container": container_pose}
    for idx in range(len(items)):
        iid = f"item_{idx}"
        outcome = report.outcomes[iid]
        poses[iid] = outcome.final_pose
        bottom = outcome.final_pose.translation[2] + float(items[idx][0].bbox_min[2])
        if bottom < fall_z or outcome.fell_off:
            fallen.append(iid)
    if fallen:
        bounds = {
            "circular": circular,
            "radius": radius,
            "half_extents": [half_x, half_y],
        }
        raise ArrangementFailedError(
            f"items fell off the container: {', '.join(fallen)}",
            fallen_ids=fallen,
            container_bounds=bounds,
        )
    return CompositeResult(success=True, poses=poses, report=report)


def create_pile(
    items: list[Asset],
    surface: SupportSurface,
    local: Pose2,
    cfg: SimConfig = SimConfig(),
    composite_cfg: CompositeConfig = CompositeConfig(),
    static_env: list[ConvexPiece] | None = None,
    rng: np.random.Generator | None = None,
) -> CompositeResult:
    """Scatter items over a spot and settle them into a pile.

    Spawn positions are uniform over a disk (square-root radial transform
    for uniform areal density) whose radius is the mean bounding-box
    diagonal times the pile radius factor; orientations are uniform random
    rotations; spawn heights are staggered by item diagonals.

    Raises:
        ValueError: Fewer than two items requested.
        PileFailedError: Fewer than two items remained on the surface.
    """
    if len(items) < 2:
        raise ValueError("create_pile needs at least 2 items")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    if static_env is None:
        static_env = [surface_slab(surface)]

    diagonals = [float(np.linalg.norm(asset.extents)) for asset in items]
    spawn_radius = float(np.mean(diagonals)) * composite_cfg.pile_radius_factor
    center = lift_pose(local, surface)

    bodies = []
    z = surface.height + composite_cfg.spawn_gap
    for idx, asset in enumerate(items):
        radius = spawn_radius * float(np.sqrt(rng.uniform()))
        angle = float(rng.uniform(0.0, 2.0 * np.pi))
        offset = np.array([radius * np.cos(angle), radius * np.sin(angle), 0.0])
        rotation = sample_rotation_uniform(rng).quaternion
        from ..geometry.poses import quat_to_matrix

        rot = quat_to_matrix(rotation)
        verts = np.vstack([p.vertices for p in asset.collision_pieces]) @ rot.T
        lift = z - float(verts[:, 2].min())
        translation = center.translation + offset
        bodies.append(
            SimBody(
                id=f"item_{idx}",
                asset=asset,
                pose=Pose3(np.array([translation[0], translation[1], lift]), rotation),
            )
        )
        z += diagonals[idx] + composite_cfg.spawn_gap

    report = settle(bodies, static_env, cfg)

    on_ids, off_ids = [], []
    poses: dict[str, Pose3] = {}
    threshold = surface.height - composite_cfg.fall_below_surface
    for idx in range(len(items)):
        iid = f"item_{idx}"
        outcome = report.outcomes[iid]
        poses[iid] = outcome.final_pose
        center = outcome.final_pose.transform_point(items[idx].com)
        if center[2] >= threshold:
            on_ids.append(iid)
        else:
            off_ids.append(iid)
    if len(on_ids) < 2:
        raise PileFailedError(
            f"only {len(on_ids)} item(s) remained on the surface",
            remaining_ids=on_ids,
            suggestion="place the pile further from surface edges or use fewer items",
        )
    return CompositeResult(
        success=True,
        poses={iid: poses[iid] for iid in on_ids},
        report=report,
        inside_ids=tuple(on_ids),
        removed_ids=tuple(off_ids),
    )
