"""Deterministic quasi-static gravity settling over convex collision pieces.

The contact model is penalty-based: spring-damper normal forces with
regularized Coulomb friction, integrated with semi-implicit Euler at a
fixed step. Impulse clamps keep the stiff regime stable at the default
millisecond step. Identical inputs and seed produce bit-identical reports;
there is no wall-clock dependence anywhere.

Contact manifolds come from vertex-in-hull tests in both directions, which
gives flat resting faces 4+ support points; pairs that overlap without any
vertex containment (rare edge-edge cases) fall back to a single
deepest-point contact from the convex distance query.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidGeometryError, SimulationDivergedError
from ..geometry import ConvexPiece, pair_distance
from ..geometry.poses import Pose3, quat_multiply, quat_normalize, quat_rotation_angle, quat_to_matrix
from ..scene.model import Asset


@dataclass(frozen=True)
class SimConfig:
    """Settling parameters; defaults follow the 5 s / 1 ms protocol."""

    time_step: float = 0.001
    duration: float = 5.0
    gravity: float = 9.81
    penetration_target: float = 1e-4  # Resting penetration the stiffness aims for.
    damping_ratio: float = 1.0
    push_factor: float = 0.2  # Fraction of the depth recovered per step, caps impulses.
    max_push_velocity: float = 0.5  # Deep overlaps separate at most this fast (m/s).
    friction_vel_eps: float = 1e-4
    linear_drag: float = 0.3
    angular_drag: float = 1.5
    early_stop: bool = True
    sleep_lin_vel: float = 5e-4
    sleep_ang_vel: float = 5e-3
    sleep_steps: int = 150
    hold_window: int = 250  # Declare rest when positions stall this long.
    hold_pos_tol: float = 2e-5
    hold_ang_tol: float = 2e-4
    fall_drop_threshold: float = 0.1
    max_coordinate: float = 1e3
    seed: int = 0
    record_energy: bool = False

    def __post_init__(self):
        if self.time_step <= 0.0:
            raise ValueError("time step must be positive")
        if self.duration < self.time_step:
            raise ValueError("duration must cover at least one step")


@dataclass(frozen=True)
class SimBody:
    """One rigid body entering the settle: asset geometry at a world pose."""

    id: str
    asset: Asset
    pose: Pose3
    welded: bool = False


@dataclass(frozen=True)
class BodyOutcome:
    displacement: float
    rotation: float  # Geodesic angle in [0, pi].
    final_pose: Pose3
    fell_off: bool
    start_pose: Pose3 | None = None


@dataclass(frozen=True)
class SettleReport:
    outcomes: dict[str, BodyOutcome]
    steps: int
    sim_time: float
    asleep: bool
    energy_trace: tuple[float, ...] = ()

    def displacement(self, body_id: str) -> float:
        return self.outcomes[body_id].displacement

    def rotation(self, body_id: str) -> float:
        return self.outcomes[body_id].rotation


class _Body:
    __slots__ = (
        "id", "welded", "mass", "inv_mass", "inertia_body", "inv_inertia_body",
        "friction", "pieces", "com_local", "pos", "q", "v", "w",
        "rot", "world_verts", "world_normals", "piece_boxes", "box", "inv_iw",
        "start_pos", "start_q", "start_bottom",
    )

    def __init__(self, body: SimBody):
        asset = body.asset
        self.id = body.id
        self.welded = body.welded
        self.mass = max(asset.mass, 1e-9)
        self.inv_mass = 0.0 if body.welded else 1.0 / self.mass
        inertia = np.asarray(asset.inertia, dtype=float)
        if not body.welded:
            eigvals = np.linalg.eigvalsh((inertia + inertia.T) / 2.0)
            if eigvals.min() <= 1e-12:
                # Guard against degenerate tensors; fall back to a solid box.
                ext = asset.extents
                diag = asset.mass / 12.0 * np.array(
                    [ext[1] ** 2 + ext[2] ** 2, ext[0] ** 2 + ext[2] ** 2, ext[0] ** 2 + ext[1] ** 2]
                )
                inertia = np.diag(np.maximum(diag, 1e-8))
        self.inertia_body = inertia
        self.inv_inertia_body = np.linalg.inv(inertia) if not body.welded else np.zeros((3, 3))
        self.friction = asset.friction
        self.pieces = asset.collision_pieces
        self.com_local = np.asarray(asset.com, dtype=float)
        rot0 = body.pose.rotation
        self.pos = body.pose.translation + rot0 @ self.com_local  # Center of mass.
        self.q = body.pose.quaternion.copy()
        self.v = np.zeros(3)
        self.w = np.zeros(3)
        self.start_pos = self.pos.copy()
        self.start_q = self.q.copy()
        self.rot = rot0
        self.update_world()
        self.start_bottom = min(box[0][2] for box in self.piece_boxes)

    def update_world(self) -> None:
        self.rot = quat_to_matrix(self.q)
        origin = self.pos - self.rot @ self.com_local
        self.world_verts = [piece.vertices @ self.rot.T + origin for piece in self.pieces]
        self.world_normals = [piece.face_normals @ self.rot.T for piece in self.pieces]
        self.piece_boxes = [(wv.min(axis=0), wv.max(axis=0)) for wv in self.world_verts]
        self.box = (
            np.min([b[0] for b in self.piece_boxes], axis=0),
            np.max([b[1] for b in self.piece_boxes], axis=0),
        )
        self.inv_iw = self.rot @ self.inv_inertia_body @ self.rot.T

    def frame_pose(self) -> Pose3:
        return Pose3(self.pos - self.rot @ self.com_local, self.q)

    def inv_inertia_world(self) -> np.ndarray:
        return self.inv_iw


def _static_body(pieces: list[ConvexPiece]) -> SimBody:
    from ..scene.model import Asset, AssetCategory

    mins = np.min([p.aabb_min for p in pieces], axis=0)
    maxs = np.max([p.aabb_max for p in pieces], axis=0)
    asset = Asset(
        id="__static__",
        category=AssetCategory.FURNITURE,
        collision_pieces=pieces,
        bbox_min=mins,
        bbox_max=maxs,
        mass=1.0,
        com=np.zeros(3),
        inertia=np.eye(3),
        friction=0.6,
    )
    return SimBody(id="__static__", asset=asset, pose=Pose3.identity(), welded=True)


def _contained_mask(verts_world: np.ndarray, other: "_Body", piece_index: int, eps: float = 1e-7) -> np.ndarray:
    """Which world vertices lie inside (or on) the other body's hull piece."""
    piece = other.pieces[piece_index]
    origin = other.pos - other.rot @ other.com_local
    local = (verts_world - origin) @ other.rot
    evals = local @ piece.face_normals.T - piece.face_offsets
    return evals.max(axis=1) <= eps


def _pair_contacts(a: _Body, b: _Body):
    """Contact manifold between two bodies over all piece pairs.

    The contact normal per piece pair comes from a face-normal separating
    axis test (the axis of minimum overlap), which keeps aligned stacks
    from picking lateral normals when vertices graze side faces. Contact
    points are the vertices of either piece contained in the other, with
    depths measured along the shared normal; pairs that overlap with no
    vertex containment fall back to a single deepest-point contact.
    """
    points, normals, depths = [], [], []
    for i, (va, box_a) in enumerate(zip(a.world_verts, a.piece_boxes)):
        na = a.world_normals[i]
        for j, (vb, box_b) in enumerate(zip(b.world_verts, b.piece_boxes)):
            if np.any(box_a[0] > box_b[1]) or np.any(box_b[0] > box_a[1]):
                continue
            nb = b.world_normals[j]
            dirs = np.vstack([na, nb])
            proj_a = dirs @ va.T
            proj_b = dirs @ vb.T
            min_a, max_a = proj_a.min(axis=1), proj_a.max(axis=1)
            min_b, max_b = proj_b.min(axis=1), proj_b.max(axis=1)
            overlap = np.minimum(max_a - min_b, max_b - min_a)
            k = int(np.argmin(overlap))
            if overlap[k] <= 0.0:
                continue
            normal = dirs[k].copy()
            if float((va.mean(axis=0) - vb.mean(axis=0)) @ normal) < 0.0:
                normal = -normal
            top_b = float((vb @ normal).max())
            bottom_a = float((va @ normal).min())
            found = False
            mask_a = _contained_mask(va, b, j)
            if np.any(mask_a):
                pts = va[mask_a]
                dep = np.maximum(top_b - pts @ normal, 1e-12)
                points.append(pts)
                normals.append(np.tile(normal, (len(pts), 1)))
                depths.append(dep)
                found = True
            mask_b = _contained_mask(vb, a, i)
            if np.any(mask_b):
                pts = vb[mask_b]
                dep = np.maximum(pts @ normal - bottom_a, 1e-12)
                points.append(pts)
                normals.append(np.tile(normal, (len(pts), 1)))
                depths.append(dep)
                found = True
            if not found:
                # Edge-edge overlap with no vertex containment.
                result = pair_distance(va, vb)
                if result.distance < 0.0:
                    points.append(result.point_a.reshape(1, 3))
                    normals.append(result.normal.reshape(1, 3))
                    depths.append(np.array([-result.distance]))
    if not points:
        return None
    return np.vstack(points), np.vstack(normals), np.concatenate(depths)


def settle(
    bodies: list[SimBody],
    static_env: list[ConvexPiece] | None = None,
    cfg: SimConfig = SimConfig(),
) -> SettleReport:
    """Simulate gravity settling and report per-body motion.

    Args:
        bodies: Rigid bodies with initial world poses; welded bodies never
            move but still block others.
        static_env: World-frame collision pieces of the architecture.
        cfg: Integration and contact parameters.

    Returns:
        SettleReport with displacement, geodesic rotation, final pose, and
        a fell-off flag per body.

    Raises:
        InvalidGeometryError: A non-welded body without collision pieces or
            positive mass.
        SimulationDivergedError: Non-finite or runaway state, reporting the
            first offending body in input order.
    """
    for body in bodies:
        if not body.welded:
            if not body.asset.collision_pieces:
                raise InvalidGeometryError(f"body {body.id!r} has no collision pieces")
            if body.asset.mass <= 0.0:
                raise InvalidGeometryError(f"body {body.id!r} needs positive mass")

    sim_bodies = [_Body(b) for b in bodies]
    if static_env:
        sim_bodies.append(_Body(_static_body(list(static_env))))

    n = len(sim_bodies)
    dt = cfg.time_step
    steps = int(round(cfg.duration / dt))
    gravity = np.array([0.0, 0.0, -cfg.gravity])
    energy_trace: list[float] = []

    movable = [body for body in sim_bodies if not body.welded]
    asleep = False
    quiet_steps = 0
    hold_pos = {body.id: body.pos.copy() for body in movable}
    hold_q = {body.id: body.q.copy() for body in movable}
    step = 0
    for step in range(steps):
        # Gravity first so resting contacts can cancel it exactly.
        for body in movable:
            body.v = body.v + dt * gravity

        # Broad phase over body AABBs, then one sequential pass of contact
        # impulses per pair (applied immediately, which keeps stacks calm).
        boxes = [body.box for body in sim_bodies]
        for i in range(n):
            a = sim_bodies[i]
            for j in range(i + 1, n):
                b = sim_bodies[j]
                if a.welded and b.welded:
                    continue
                if np.any(boxes[i][0] > boxes[j][1] + 1e-4) or np.any(boxes[j][0] > boxes[i][1] + 1e-4):
                    continue
                manifold = _pair_contacts(a, b)
                if manifold is None:
                    continue
                points, normals, depths = manifold
                n_contacts = len(depths)
                mu = float(np.sqrt(a.friction * b.friction))

                r_a = points - a.pos
                r_b = points - b.pos
                v_rel = (a.v + np.cross(a.w, r_a)) - (b.v + np.cross(b.w, r_b))
                v_n = np.einsum("ij,ij->i", normals, v_rel)

                # Per-contact mass: the rotational effective mass keeps corner
                # impulses from over-reversing rocking modes of heavy bodies;
                # the linear share keeps a simultaneous manifold from
                # over-reversing the shared translational mode. The minimum of
                # the two is stable in both regimes and still holds weight
                # exactly against static supports.
                rn_a = np.cross(r_a, normals)
                rn_b = np.cross(r_b, normals)
                denom = (
                    a.inv_mass
                    + b.inv_mass
                    + np.einsum("ij,ij->i", rn_a @ a.inv_iw, rn_a)
                    + np.einsum("ij,ij->i", rn_b @ b.inv_iw, rn_b)
                )
                m_rot = 1.0 / np.maximum(denom, 1e-12)
                m_lin = 1.0 / (a.inv_mass + b.inv_mass)
                m_c = np.minimum(m_rot, m_lin / n_contacts)

                # Implicit critically-damped penalty response: cancel the
                # approach velocity, push out the depth beyond the resting
                # target at a bounded bias rate. (The explicit force form of
                # the same spring-damper is unstable at millisecond steps.)
                excess = np.maximum(0.0, depths - cfg.penetration_target)
                push_vel = np.minimum(cfg.push_factor * excess / dt, cfg.max_push_velocity)
                j_n = m_c * np.maximum(0.0, push_vel - v_n)

                # Regularized Coulomb friction: full tangential cancellation
                # below the regularization velocity, cone-capped above it.
                # Friction is applied without torque: its tipping couple at
                # contacts below the center of mass pumps a rock-and-slide
                # instability at this step size, and settling quality only
                # needs its translational damping. Toppling of unsupported
                # bodies still emerges from the normal impulses.
                v_t = v_rel - v_n[:, None] * normals
                t_norm = np.linalg.norm(v_t, axis=1)
                j_t = np.where(
                    t_norm > cfg.friction_vel_eps,
                    np.minimum(mu * j_n, m_c * t_norm),
                    m_c * t_norm,
                )
                friction_vec = -(j_t / np.maximum(t_norm, 1e-12))[:, None] * v_t
                normal_vec = j_n[:, None] * normals

                total = (normal_vec + friction_vec).sum(axis=0)
                if not a.welded:
                    a.v = a.v + a.inv_mass * total
                    a.w = a.w + a.inv_iw @ np.cross(r_a, normal_vec).sum(axis=0)
                if not b.welded:
                    b.v = b.v - b.inv_mass * total
                    b.w = b.w - b.inv_iw @ np.cross(r_b, normal_vec).sum(axis=0)

        # Integrate positions (semi-implicit Euler).
        all_quiet = True
        for body in movable:
            body.v = body.v * max(0.0, 1.0 - dt * cfg.linear_drag)
            body.w = body.w * max(0.0, 1.0 - dt * cfg.angular_drag)
            body.pos = body.pos + dt * body.v
            dq = quat_multiply(np.array([0.0, *(0.5 * dt * body.w)]), body.q)
            body.q = quat_normalize(body.q + dq)
            body.update_world()
            if not np.all(np.isfinite(body.pos)) or np.abs(body.pos).max() > cfg.max_coordinate:
                raise SimulationDivergedError(
                    f"body {body.id!r} diverged at t={step * dt:.3f}s", body_id=body.id
                )
            if float(np.linalg.norm(body.v)) > cfg.sleep_lin_vel or float(
                np.linalg.norm(body.w)
            ) > cfg.sleep_ang_vel:
                all_quiet = False

        if cfg.record_energy:
            kinetic = sum(
                0.5 * body.mass * float(body.v @ body.v)
                + 0.5 * float(body.w @ (body.rot @ body.inertia_body @ body.rot.T) @ body.w)
                for body in movable
            )
            potential = sum(body.mass * cfg.gravity * float(body.pos[2]) for body in movable)
            energy_trace.append(kinetic + potential)

        if all_quiet:
            quiet_steps += 1
            if cfg.early_stop and quiet_steps >= cfg.sleep_steps:
                asleep = True
                break
        else:
            quiet_steps = 0

        # Limit-cycle jitter can keep velocities above the sleep gates while
        # positions stand still; a stalled window also counts as rest.
        if cfg.early_stop and step > 0 and step % cfg.hold_window == 0:
            stalled = all(
                float(np.linalg.norm(body.pos - hold_pos[body.id])) < cfg.hold_pos_tol
                and float(np.abs(body.q - hold_q[body.id]).max()) < cfg.hold_ang_tol
                for body in movable
            )
            if stalled:
                asleep = True
                break
            for body in movable:
                hold_pos[body.id] = body.pos.copy()
                hold_q[body.id] = body.q.copy()

    outcomes: dict[str, BodyOutcome] = {}
    for body in sim_bodies:
        if body.id == "__static__":
            continue
        displacement = float(np.linalg.norm(body.pos - body.start_pos))
        rel = quat_multiply(body.start_q * np.array([1.0, -1.0, -1.0, -1.0]), body.q)
        rotation = quat_rotation_angle(quat_normalize(rel))
        bottom = min(box[0][2] for box in body.piece_boxes)
        fell = (body.start_bottom - bottom) > cfg.fall_drop_threshold
        start_rot = quat_to_matrix(body.start_q)
        outcomes[body.id] = BodyOutcome(
            displacement=displacement,
            rotation=rotation,
            final_pose=body.frame_pose(),
            fell_off=bool(fell),
            start_pose=Pose3(body.start_pos - start_rot @ body.com_local, body.start_q),
        )
    return SettleReport(
        outcomes=outcomes,
        steps=step + 1,
        sim_time=(step + 1) * dt,
        asleep=asleep,
        energy_trace=tuple(energy_trace),
    )
