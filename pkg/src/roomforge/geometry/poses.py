"""Planar and spatial rigid poses plus seeded rotation sampling.

Rotations are stored as unit quaternions (wxyz) so that serialization
round-trips bit-exactly; rotation matrices are derived views.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

ORTHONORMALITY_TOL = 1e-9


def normalize_angle_deg(theta: float) -> float:
    """Wrap an angle in degrees into (-180, 180]."""
    wrapped = float(theta) % 360.0
    if wrapped > 180.0:
        wrapped -= 360.0
    # 0.0 % 360.0 can yield -0.0; keep the canonical representative.
    if wrapped == -180.0:
        wrapped = 180.0
    return wrapped + 0.0


@dataclass(frozen=True)
class Pose2:
    """SE(2) pose on a support surface: meters and degrees of yaw."""

    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", normalize_angle_deg(self.theta))


def quat_normalize(q: np.ndarray) -> np.ndarray:
    """Normalize a wxyz quaternion and pin the sign so w >= 0."""
    q = np.asarray(q, dtype=float)
    norm = float(np.linalg.norm(q))
    if norm == 0.0 or not np.isfinite(norm):
        raise ValueError("quaternion has zero or non-finite norm")
    q = q / norm
    # Canonical double-cover representative: w >= 0, ties broken on x, y, z.
    for component in q:
        if component > 0.0:
            break
        if component < 0.0:
            q = -q
            break
    return q


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product of two wxyz quaternions."""
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    """Rotation matrix of a unit wxyz quaternion."""
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def matrix_to_quat(rot: np.ndarray) -> np.ndarray:
    """Unit wxyz quaternion of a proper rotation matrix (Shepperd's method)."""
    m = np.asarray(rot, dtype=float)
    trace = m[0, 0] + m[1, 1] + m[2, 2]
    if trace > 0.0:
        s = np.sqrt(trace + 1.0) * 2.0
        q = np.array(
            [0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s]
        )
    elif m[0, 0] >= m[1, 1] and m[0, 0] >= m[2, 2]:
        s = np.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
        q = np.array(
            [(m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s]
        )
    elif m[1, 1] >= m[2, 2]:
        s = np.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
        q = np.array(
            [(m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s]
        )
    else:
        s = np.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
        q = np.array(
            [(m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s]
        )
    return quat_normalize(q)


def quat_about_z(theta_deg: float) -> np.ndarray:
    half = np.radians(theta_deg) / 2.0
    return quat_normalize(np.array([np.cos(half), 0.0, 0.0, np.sin(half)]))


def quat_about_x(theta_deg: float) -> np.ndarray:
    half = np.radians(theta_deg) / 2.0
    return quat_normalize(np.array([np.cos(half), np.sin(half), 0.0, 0.0]))


def quat_rotation_angle(q: np.ndarray) -> float:
    """Geodesic rotation angle of a unit quaternion, in [0, pi]."""
    w = min(1.0, abs(float(q[0])))
    return 2.0 * float(np.arccos(w))


@dataclass(frozen=True)
class Pose3:
    """SE(3) pose: translation in meters plus a unit quaternion rotation."""

    translation: np.ndarray
    quaternion: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))

    def __post_init__(self):
        t = np.asarray(self.translation, dtype=float).reshape(3).copy()
        q = quat_normalize(np.asarray(self.quaternion, dtype=float).reshape(4))
        t.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "quaternion", q)
        if not np.all(np.isfinite(t)):
            raise ValueError("non-finite translation")

    @classmethod
    def identity(cls) -> "Pose3":
        return cls(np.zeros(3))

    @classmethod
    def from_matrix(cls, rot: np.ndarray, translation: np.ndarray) -> "Pose3":
        rot = np.asarray(rot, dtype=float)
        if rot.shape != (3, 3):
            raise ValueError("rotation must be 3x3")
        if np.abs(rot @ rot.T - np.eye(3)).max() > 1e-6:
            raise ValueError("rotation is not orthonormal")
        if np.linalg.det(rot) < 0.0:
            raise ValueError("rotation is not proper (det must be +1)")
        return cls(translation, matrix_to_quat(rot))

    @property
    def rotation(self) -> np.ndarray:
        """3x3 rotation matrix (derived from the stored quaternion)."""
        return quat_to_matrix(self.quaternion)

    def is_valid(self, tol: float = ORTHONORMALITY_TOL) -> bool:
        rot = self.rotation
        return (
            float(np.abs(rot @ rot.T - np.eye(3)).max()) <= tol
            and abs(float(np.linalg.det(rot)) - 1.0) <= tol
        )

    def compose(self, other: "Pose3") -> "Pose3":
        """This pose applied after `other` in this frame: self * other."""
        return Pose3(
            self.translation + self.rotation @ other.translation,
            quat_multiply(self.quaternion, other.quaternion),
        )

    def inverse(self) -> "Pose3":
        inv_q = quat_normalize(self.quaternion * np.array([1.0, -1.0, -1.0, -1.0]))
        inv_rot = quat_to_matrix(inv_q)
        return Pose3(-(inv_rot @ self.translation), inv_q)

    def transform_point(self, point: np.ndarray) -> np.ndarray:
        return self.rotation @ np.asarray(point, dtype=float) + self.translation

    def transform_points(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=float) @ self.rotation.T + self.translation

    def matrix(self) -> np.ndarray:
        """Homogeneous 4x4 transform."""
        out = np.eye(4)
        out[:3, :3] = self.rotation
        out[:3, 3] = self.translation
        return out

    def yaw_deg(self) -> float:
        """Yaw about world +Z, assuming the pose is upright enough to define one."""
        rot = self.rotation
        return normalize_angle_deg(np.degrees(np.arctan2(rot[1, 0], rot[0, 0])))


def pose_from_xyz_yaw(x: float, y: float, z: float, yaw_deg: float = 0.0) -> Pose3:
    return Pose3(np.array([x, y, z]), quat_about_z(yaw_deg))


def rotation_between(a: Pose3, b: Pose3) -> float:
    """Geodesic angle in radians between the rotations of two poses."""
    rel = quat_multiply(a.quaternion * np.array([1.0, -1.0, -1.0, -1.0]), b.quaternion)
    return quat_rotation_angle(quat_normalize(rel))


def sample_rotation_uniform(rng: np.random.Generator) -> Pose3:
    """Rotation drawn uniformly over the rotation group.

    Uses the 4D-Gaussian-normalization construction: a normalized vector of
    four independent normals is uniform on the quaternion 3-sphere.

    Args:
        rng: Seeded generator; identical streams give identical rotations.

    Returns:
        Pose3 at the origin carrying the sampled rotation.
    """
    q = rng.normal(size=4)
    while float(np.linalg.norm(q)) < 1e-12:
        q = rng.normal(size=4)
    return Pose3(np.zeros(3), quat_normalize(q))


def derive_rng(seed: int, *keys: object) -> np.random.Generator:
    """Named-stream generator derived from a base seed and a key path.

    The stream depends only on (seed, keys), never on call order, so steps
    that keep their keys keep their randomness when other steps change.
    """
    digest = hashlib.sha256()
    digest.update(str(int(seed)).encode("utf-8"))
    for key in keys:
        digest.update(b"\x1f")
        digest.update(str(key).encode("utf-8"))
    entropy = int.from_bytes(digest.digest()[:16], "big")
    return np.random.default_rng(np.random.SeedSequence(entropy))
