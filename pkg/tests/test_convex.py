import numpy as np
import pytest

from roomforge.errors import InvalidGeometryError
from roomforge.geometry import (
    ConvexPiece,
    Pose3,
    box_mesh,
    pair_distance,
    pose_from_xyz_yaw,
    sample_rotation_uniform,
    signed_distance,
    signed_distance_info,
)

UNIT_CUBE = ConvexPiece(box_mesh((1, 1, 1)).vertices)
IDENTITY = Pose3.identity()


def test_face_gap():
    d = signed_distance([UNIT_CUBE], IDENTITY, [UNIT_CUBE], pose_from_xyz_yaw(3, 0, 0))
    assert abs(d - 2.0) < 1e-9


def test_coincident_cubes():
    d = signed_distance([UNIT_CUBE], IDENTITY, [UNIT_CUBE], IDENTITY)
    assert abs(d - (-1.0)) < 1e-9


def test_partial_overlap():
    d = signed_distance([UNIT_CUBE], IDENTITY, [UNIT_CUBE], pose_from_xyz_yaw(0.75, 0, 0))
    assert abs(d - (-0.25)) < 1e-9


def test_degenerate_piece_rejected():
    with pytest.raises(InvalidGeometryError):
        ConvexPiece(np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]]))
    with pytest.raises(InvalidGeometryError):
        ConvexPiece(np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]]))  # Coplanar.


def test_symmetry_on_random_pairs():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        a = ConvexPiece(rng.normal(size=(8, 3)))
        b = ConvexPiece(rng.normal(size=(8, 3)) + rng.normal(size=3) * 2.0)
        d_ab = signed_distance([a], IDENTITY, [b], IDENTITY)
        d_ba = signed_distance([b], IDENTITY, [a], IDENTITY)
        assert abs(d_ab - d_ba) < 1e-9


def test_constructed_gap_accuracy():
    # Axis-aligned boxes with a known face gap stay exact under a shared
    # rigid transform, giving an independent ground-truth distance.
    rng = np.random.default_rng(1)
    for _ in range(300):
        gap = rng.uniform(0.01, 1.0)
        size_a = rng.uniform(0.2, 1.5, 3)
        size_b = rng.uniform(0.2, 1.5, 3)
        a = ConvexPiece(box_mesh(size_a).vertices)
        b = ConvexPiece(box_mesh(size_b).vertices)
        shared = sample_rotation_uniform(rng)
        pose_a = shared
        pose_b = shared.compose(pose_from_xyz_yaw(size_a[0] / 2 + size_b[0] / 2 + gap, 0, 0))
        d = signed_distance([a], pose_a, [b], pose_b)
        assert abs(d - gap) < 1e-6


def test_witness_points_consistent():
    info = signed_distance_info([UNIT_CUBE], IDENTITY, [UNIT_CUBE], pose_from_xyz_yaw(2, 0, 0))
    assert abs(info.distance - 1.0) < 1e-9
    assert np.allclose(info.point_a, [0.5, info.point_a[1], info.point_a[2]])
    assert np.allclose(info.point_b, [1.5, info.point_b[1], info.point_b[2]])
    assert np.allclose(info.normal, [-1, 0, 0], atol=1e-9)
    # Witness separation equals the reported distance.
    assert abs(np.linalg.norm(info.point_a - info.point_b) - info.distance) < 1e-9


def test_penetration_direction_resolves_overlap():
    rng = np.random.default_rng(2)
    for _ in range(100):
        a = ConvexPiece(rng.normal(size=(10, 3)))
        b = ConvexPiece(rng.normal(size=(10, 3)) * 0.8 + rng.normal(size=3) * 0.3)
        info = pair_distance(a.vertices, b.vertices)
        if info.distance >= 0:
            continue
        # Translating A along the separating direction by the depth plus a
        # hair must produce a non-penetrating configuration.
        shift = info.normal * (-info.distance + 1e-6)
        d_after = signed_distance([a], pose_from_xyz_yaw(*shift[:3]) if shift[2] == 0 else Pose3(shift), [b], IDENTITY)
        assert d_after > -1e-6


def test_min_over_piece_pairs():
    far = pose_from_xyz_yaw(5, 0, 0)
    near = pose_from_xyz_yaw(0.75, 0, 0)
    # Set A holds one piece; set B holds one far piece and one overlapping one.
    d = signed_distance([UNIT_CUBE], IDENTITY, [UNIT_CUBE, UNIT_CUBE], IDENTITY)
    assert d <= -1.0 + 1e-9
    shifted_b = [ConvexPiece(UNIT_CUBE.world_vertices(far)), ConvexPiece(UNIT_CUBE.world_vertices(near))]
    d2 = signed_distance([UNIT_CUBE], IDENTITY, shifted_b, IDENTITY)
    assert abs(d2 - (-0.25)) < 1e-9


def test_empty_sets_rejected():
    with pytest.raises(InvalidGeometryError):
        signed_distance([], IDENTITY, [UNIT_CUBE], IDENTITY)
