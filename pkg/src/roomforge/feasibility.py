"""Physical-feasibility post-processing.

Three operations: projection of object translations to the nearest
collision-free configuration, staged projection-plus-settling matching the
construction pipeline, and removal of objects that fell during settling.

The projection solves min sum ||p - p0||^2 subject to pairwise separation
via outer linearization: each round queries signed distances and witness
normals, then projects the displacement vector onto the linearized
constraint polyhedron with dual coordinate descent. Orientations never
change.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ProjectionFailedError
from .geometry import ConvexPiece, signed_distance_info
from .geometry.poses import Pose3
from .scene.architecture import scene_static_pieces
from .scene.model import AssetCategory, Scene
from .scene.surfaces import refresh_support, scene_surfaces
from .sim.engine import SettleReport, SimBody, SimConfig, settle
from .tools.common import aabbs_disjoint, object_aabb

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProjectionConfig:
    epsilon: float = 1e-5  # Required separation after projection.
    max_outer_iterations: int = 40
    max_inner_iterations: int = 400
    convergence_tol: float = 1e-7  # On the displacement update norm.
    activation_margin: float = 0.02  # Pairs closer than eps+margin enter the QP.

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")


@dataclass
class ProjectionResult:
    scene: Scene
    displacements: dict[str, np.ndarray]
    total_displacement: float
    iterations: int

    @property
    def sum_squared(self) -> float:
        return float(sum(np.dot(d, d) for d in self.displacements.values()))


def _collision_objects(scene: Scene) -> list[str]:
    return [
        oid
        for oid in sorted(scene.objects)
        if scene.asset_of(scene.objects[oid]).has_collision
    ]


def project_nonpenetration(
    scene: Scene,
    movable_ids: list[str] | None = None,
    cfg: ProjectionConfig = ProjectionConfig(),
    *,
    include_architecture: bool = True,
    participant_ids: list[str] | None = None,
) -> ProjectionResult:
    """Translate movable objects to the nearest separated configuration.

    Only translations change; every orientation is returned bit-identical.
    Welded objects and architecture act as immovable constraints.

    Args:
        scene: Input scene (never modified).
        movable_ids: Objects allowed to move; defaults to all non-welded
            collision-bearing objects.
        cfg: Tolerances and iteration limits.
        include_architecture: Whether walls and floors constrain motion.
        participant_ids: Restrict the constraint set to these objects
            (plus architecture); used by the per-entity pipeline stage.

    Raises:
        ProjectionFailedError: Separation not reached within the iteration
            budget; carries the worst remaining pair and its residual.
    """
    work = scene.copy()
    all_ids = _collision_objects(work)
    if participant_ids is not None:
        all_ids = [oid for oid in all_ids if oid in set(participant_ids)]
    if movable_ids is None:
        movable_ids = [oid for oid in all_ids if not work.objects[oid].welded]
    movable = [oid for oid in movable_ids if oid in all_ids]
    for oid in movable:
        if work.objects[oid].welded:
            raise ValueError(f"movable object {oid!r} is welded")
    index_of = {oid: i for i, oid in enumerate(movable)}

    statics: list[ConvexPiece] = scene_static_pieces(work) if include_architecture else []
    original = {oid: work.objects[oid].pose.translation.copy() for oid in all_ids}
    displacement = np.zeros((len(movable), 3))

    def pose_of(oid: str) -> Pose3:
        base = work.objects[oid].pose
        if oid in index_of:
            return Pose3(original[oid] + displacement[index_of[oid]], base.quaternion)
        return base

    def current_pairs():
        """Constraint rows from the current configuration."""
        rows = []
        boxes = {}
        for oid in all_ids:
            asset = work.assets[work.objects[oid].asset_id]
            from .geometry import pieces_aabb

            boxes[oid] = pieces_aabb(asset.collision_pieces, pose_of(oid))
        margin = cfg.epsilon + cfg.activation_margin
        for i, a_id in enumerate(all_ids):
            asset_a = work.assets[work.objects[a_id].asset_id]
            for b_id in all_ids[i + 1 :]:
                if a_id not in index_of and b_id not in index_of:
                    continue
                if aabbs_disjoint(boxes[a_id], boxes[b_id], margin):
                    continue
                asset_b = work.assets[work.objects[b_id].asset_id]
                info = signed_distance_info(
                    asset_a.collision_pieces, pose_of(a_id), asset_b.collision_pieces, pose_of(b_id)
                )
                if info.distance < margin:
                    rows.append((a_id, b_id, info.normal, info.distance))
            if a_id in index_of:
                for s_idx, piece in enumerate(statics):
                    if aabbs_disjoint(boxes[a_id], (piece.aabb_min, piece.aabb_max), margin):
                        continue
                    info = signed_distance_info(
                        asset_a.collision_pieces, pose_of(a_id), [piece], Pose3.identity()
                    )
                    if info.distance < margin:
                        rows.append((a_id, f"__static_{s_idx}__", info.normal, info.distance))
        return rows

    iterations = 0
    for outer in range(cfg.max_outer_iterations):
        iterations = outer + 1
        rows = current_pairs()
        violations = [r for r in rows if r[3] < cfg.epsilon - 1e-9]
        if not violations and outer > 0:
            break
        if not rows:
            break

        # Build the linearized QP: a_c . x >= b_c over stacked displacements.
        grads = []
        bounds = []
        for a_id, b_id, normal, dist in rows:
            grad = np.zeros((len(movable), 3))
            if a_id in index_of:
                grad[index_of[a_id]] = normal
            if b_id in index_of:
                grad[index_of[b_id]] = -normal
            norm_sq = float((grad * grad).sum())
            if norm_sq < 1e-12:
                continue
            offset = float(
                np.dot(grad.ravel(), displacement.ravel())
            )  # Current constraint value relative to x.
            bounds.append(cfg.epsilon - dist + offset)
            grads.append(grad)
        if not grads:
            break

        # Dual coordinate descent (projection onto the constraint polyhedron).
        lambdas = np.zeros(len(grads))
        norms = np.array([float((g * g).sum()) for g in grads])
        x = displacement.copy()
        for _ in range(cfg.max_inner_iterations):
            max_change = 0.0
            for c, grad in enumerate(grads):
                value = float(np.dot(grad.ravel(), x.ravel()))
                residual = bounds[c] - value
                new_lambda = max(0.0, lambdas[c] + residual / norms[c])
                delta = new_lambda - lambdas[c]
                if delta != 0.0:
                    x = x + delta * grad
                    lambdas[c] = new_lambda
                    max_change = max(max_change, abs(delta) * np.sqrt(norms[c]))
            if max_change < cfg.convergence_tol:
                break
        step_norm = float(np.linalg.norm(x - displacement))
        displacement = x
        if step_norm < cfg.convergence_tol and not violations:
            break

    # Verify separation on the final configuration.
    rows = current_pairs()
    worst = None
    for a_id, b_id, _, dist in rows:
        if dist < cfg.epsilon - 1e-6:
            if worst is None or dist < worst[2]:
                worst = (a_id, b_id, dist)
    if worst is not None:
        raise ProjectionFailedError(
            f"projection left pair ({worst[0]}, {worst[1]}) at distance {worst[2]:.3e}",
            worst_pair=(worst[0], worst[1]),
            residual=cfg.epsilon - worst[2],
        )

    displacements = {}
    for oid in movable:
        delta = displacement[index_of[oid]]
        obj = work.objects[oid]
        obj.pose = Pose3(original[oid] + delta, obj.pose.quaternion)
        displacements[oid] = delta
    for oid in movable:
        refresh_support(work, oid)
    total = float(sum(np.linalg.norm(d) for d in displacements.values()))
    return ProjectionResult(
        scene=work, displacements=displacements, total_displacement=total, iterations=iterations
    )


@dataclass
class FeasibilityReport:
    projection: ProjectionResult
    settle: SettleReport
    stage: str
    removed: list[dict] = field(default_factory=list)


def _stage_sets(scene: Scene, stage: str, entity_id: str | None):
    """(movable ids, welded ids, participant ids) for a pipeline stage."""
    furniture, manipulands, fixtures = [], [], []
    for oid in sorted(scene.objects):
        obj = scene.objects[oid]
        category = scene.asset_of(obj).category
        if category is AssetCategory.THIN_COVERING:
            continue
        if category is AssetCategory.FURNITURE:
            furniture.append(oid)
        elif category is AssetCategory.MANIPULAND:
            manipulands.append(oid)
        else:
            fixtures.append(oid)

    explicitly_welded = {oid for oid in sorted(scene.objects) if scene.objects[oid].welded}
    if stage == "post_furniture":
        # Manipulands do not exist yet at this pipeline point; if present
        # they are left untouched and resolved by the later stages.
        movable = [oid for oid in furniture if oid not in explicitly_welded]
        participants = furniture + fixtures
    elif stage == "per_entity":
        if entity_id is None:
            raise ValueError("per_entity stage needs an entity id")
        scene.get_object(entity_id)
        surfaces = scene_surfaces(scene)
        mine = []
        for oid in manipulands:
            support = scene.objects[oid].support
            if support is not None:
                surface = surfaces.get(support.surface_id)
                if surface is not None and surface.owner_id == entity_id:
                    mine.append(oid)
        movable = [oid for oid in mine if oid not in explicitly_welded]
        participants = [entity_id] + mine
    elif stage == "post_manipulands":
        movable = [oid for oid in manipulands if oid not in explicitly_welded]
        participants = furniture + manipulands + fixtures
    else:
        raise ValueError(f"unknown feasibility stage {stage!r}")
    welded = [oid for oid in participants if oid not in movable]
    return movable, welded, participants


def enforce_feasibility(
    scene: Scene,
    stage: str,
    entity_id: str | None = None,
    projection_cfg: ProjectionConfig = ProjectionConfig(),
    sim_cfg: SimConfig = SimConfig(),
) -> tuple[Scene, FeasibilityReport]:
    """Projection followed by gravity settling with stage-specific welding.

    Stages mirror the construction pipeline: post_furniture frees all
    furniture, per_entity frees one entity's manipulands with the entity
    welded, post_manipulands welds all furniture and frees manipulands.
    """
    movable, welded, participants = _stage_sets(scene, stage, entity_id)
    projection = project_nonpenetration(
        scene, movable, projection_cfg, participant_ids=participants
    )
    work = projection.scene

    bodies = []
    for oid in participants:
        obj = work.objects[oid]
        bodies.append(
            SimBody(
                id=oid,
                asset=work.asset_of(obj),
                pose=obj.pose,
                welded=oid not in movable,
            )
        )
    statics = scene_static_pieces(work)
    report = settle(bodies, statics, sim_cfg)

    for oid in movable:
        work.objects[oid].pose = report.outcomes[oid].final_pose
    for oid in movable:
        refresh_support(work, oid)
    return work, FeasibilityReport(projection=projection, settle=report, stage=stage)


@dataclass(frozen=True)
class FallenThresholds:
    tilt_deg: float = 45.0
    floor_penetration: float = 0.005
    near_floor: float = 0.1
    down_displacement: float = 0.3


def remove_fallen(
    scene: Scene,
    report: SettleReport,
    thresholds: FallenThresholds = FallenThresholds(),
) -> tuple[Scene, list[dict]]:
    """Drop objects the settle knocked over or off their supports.

    Furniture is removed when its up-axis tilts past the threshold.
    Manipulands are removed when they clipped below the floor, or when they
    started elevated (object-supported) and ended near floor level after a
    large downward displacement.
    """
    work = scene.copy()
    removed: list[dict] = []
    for oid in sorted(report.outcomes):
        if oid not in work.objects:
            continue
        obj = work.objects[oid]
        category = work.asset_of(obj).category
        outcome = report.outcomes[oid]
        reason = None
        if category is AssetCategory.FURNITURE:
            up = outcome.final_pose.rotation @ np.array([0.0, 0.0, 1.0])
            tilt = float(np.degrees(np.arccos(np.clip(up[2], -1.0, 1.0))))
            if tilt > thresholds.tilt_deg:
                reason = "tilt"
        elif category is AssetCategory.MANIPULAND:
            asset = work.asset_of(obj)
            bottom = float(outcome.final_pose.translation[2] + asset.bbox_min[2])
            final_com = outcome.final_pose.transform_point(asset.com)
            if bottom < -thresholds.floor_penetration:
                reason = "floor_penetration"
            elif outcome.start_pose is not None:
                start_com = outcome.start_pose.transform_point(asset.com)
                started_elevated = float(start_com[2]) > thresholds.near_floor
                dropped = float(start_com[2] - final_com[2])
                if (
                    started_elevated
                    and float(final_com[2]) < thresholds.near_floor
                    and dropped > thresholds.down_displacement
                ):
                    reason = "fell_off_support"
        if reason is not None:
            work.remove_object(oid)
            removed.append({"id": oid, "reason": reason})
    return work, removed
