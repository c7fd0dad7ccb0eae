import json

import numpy as np
import pytest

from roomforge.errors import InvalidGeometryError, NotFoundError, SchemaError, VersionError
from roomforge.geometry import Polygon2, Pose2, Pose3, TriMesh, box_mesh, pose_from_xyz_yaw
from roomforge.geometry.poses import quat_about_z
from roomforge.scene import (
    AssetCategory,
    Scene,
    SupportSurface,
    box_asset,
    deserialize_scene,
    extract_support_surfaces,
    lift_pose,
    place_on_surface,
    query_scene_state,
    rectangular_room,
    scene_surfaces,
    serialize_scene,
    thin_covering_asset,
    unlift_pose,
)


def _flat_surface(height: float) -> SupportSurface:
    return SupportSurface(
        id="S",
        owner_id="owner",
        frame=Pose3(np.array([0.0, 0.0, height])),
        bounds=Polygon2.rectangle(2, 2),
        clearance=1.0,
    )


def test_lift_identity_surface():
    surface = _flat_surface(0.75)
    pose = lift_pose(Pose2(0.1, 0.2, 90.0), surface)
    assert np.allclose(pose.translation, [0.1, 0.2, 0.75])
    assert abs(pose.yaw_deg() - 90.0) < 1e-9


def test_lift_zero_pose_equals_frame():
    frame = Pose3(np.array([1.0, -2.0, 0.4]), quat_about_z(33.0))
    surface = SupportSurface("S", "o", frame, Polygon2.rectangle(1, 1), 1.0)
    pose = lift_pose(Pose2(0, 0, 0), surface)
    assert np.allclose(pose.translation, frame.translation)
    assert np.allclose(pose.rotation, frame.rotation)


def test_lift_matches_matrix_product_oracle():
    # Independent oracle: explicit homogeneous 4x4 matrix multiplication.
    frame = Pose3(np.array([2.0, 0.0, 1.0]), quat_about_z(90.0))
    surface = SupportSurface("S", "o", frame, Polygon2.rectangle(4, 4), 1.0)
    local = Pose2(0.5, 0.3, 0.0)
    lifted = lift_pose(local, surface)

    theta = np.radians(local.theta)
    local_mat = np.eye(4)
    local_mat[:3, :3] = np.array(
        [[np.cos(theta), -np.sin(theta), 0], [np.sin(theta), np.cos(theta), 0], [0, 0, 1]]
    )
    local_mat[:3, 3] = [local.x, local.y, 0.0]
    expected = frame.matrix() @ local_mat
    assert np.allclose(lifted.matrix(), expected, atol=1e-12)


def test_lift_unlift_round_trip():
    rng = np.random.default_rng(12)
    for _ in range(100):
        frame = Pose3(rng.normal(size=3), quat_about_z(float(rng.uniform(-180, 180))))
        surface = SupportSurface("S", "o", frame, Polygon2.rectangle(2, 2), 1.0)
        local = Pose2(float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)), float(rng.uniform(-180, 180)))
        recovered = unlift_pose(lift_pose(local, surface), surface)
        assert recovered is not None
        assert abs(recovered.x - local.x) < 1e-9
        assert abs(recovered.y - local.y) < 1e-9
        assert abs((recovered.theta - local.theta + 180) % 360 - 180) < 1e-9


def test_extract_unit_cube_surface():
    asset = box_asset("cube", (1, 1, 1), 1.0)
    surfaces = extract_support_surfaces(asset, Pose3.identity(), owner_id="cube")
    assert len(surfaces) == 1
    top = surfaces[0]
    assert abs(top.height - 1.0) < 1e-9
    assert abs(top.bounds.area - 1.0) < 1e-9


def test_extract_two_shelf_clearances():
    # Open shelf unit with boards at z=0.4 and z=0.8 plus a base at 0.
    boards = []
    for z in (0.0, 0.4, 0.8):
        boards.append(box_mesh((0.8, 0.3, 0.02), (0, 0, z + 0.01)))
    verts = np.vstack([m.vertices for m in boards])
    tris = np.vstack([m.triangles + 8 * i for i, m in enumerate(boards)])
    mesh = TriMesh(verts, tris)
    surfaces = extract_support_surfaces(mesh, Pose3.identity(), owner_id="shelf", clearance_cap=2.0)
    assert len(surfaces) >= 2
    lower = min(surfaces, key=lambda s: s.height)
    assert abs(lower.clearance - 0.38) < 1e-3  # Gap to the next board above.


def test_extract_sphere_has_no_surfaces():
    from roomforge.geometry import icosphere_mesh

    mesh = icosphere_mesh(0.5, 2, center=(0, 0, 0.5))
    surfaces = extract_support_surfaces(mesh, Pose3.identity())
    assert surfaces == []


def test_extraction_invariant_to_triangle_order():
    asset_mesh = box_mesh((1.2, 0.6, 0.4))
    shuffled = TriMesh(asset_mesh.vertices, asset_mesh.triangles[::-1])
    a = extract_support_surfaces(asset_mesh, pose_from_xyz_yaw(0.3, -0.2, 0.0, 20))
    b = extract_support_surfaces(shuffled, pose_from_xyz_yaw(0.3, -0.2, 0.0, 20))
    assert len(a) == len(b)
    for sa, sb in zip(a, b):
        assert np.allclose(sa.frame.translation, sb.frame.translation, atol=1e-9)


def test_extraction_invariant_to_joint_rigid_transform():
    mesh = box_mesh((1.2, 0.6, 0.4), (0, 0, 0.2))
    pose = pose_from_xyz_yaw(0.5, 1.0, 0.0, 30.0)
    move = pose_from_xyz_yaw(-2.0, 0.7, 0.0, 45.0)
    # Transform the mesh by `move` and compensate in the owner pose.
    moved_mesh = TriMesh(move.transform_points(mesh.vertices), mesh.triangles)
    a = extract_support_surfaces(mesh, pose)
    b = extract_support_surfaces(moved_mesh, pose.compose(move.inverse()))
    assert len(a) == len(b)
    for sa, sb in zip(a, b):
        assert np.allclose(sa.frame.translation, sb.frame.translation, atol=1e-6)
        assert abs(sa.clearance - sb.clearance) < 1e-6


def _small_scene() -> Scene:
    scene = Scene(seed=3)
    scene.add_room(rectangular_room("room", 6, 6))
    scene.add_asset(box_asset("table", (1.2, 0.8, 0.75), 20.0))
    scene.add_asset(box_asset("mug", (0.08, 0.08, 0.1), 0.3, category=AssetCategory.MANIPULAND))
    scene.add_asset(thin_covering_asset("rug", (2.0, 1.5)))
    floor = scene_surfaces(scene)["room/floor"]
    place_on_surface(scene, "table", floor, Pose2(0.5, -0.5, 15.0))
    top = scene_surfaces(scene)["table_0/S_0"]
    place_on_surface(scene, "mug", top, Pose2(0.1, 0.0, 0.0))
    scene.add_object("rug", pose_from_xyz_yaw(-1.0, 1.0, 0.001), welded=True)
    return scene


def test_serialize_round_trip_exact():
    scene = _small_scene()
    blob = serialize_scene(scene)
    restored = deserialize_scene(blob)
    assert restored == scene
    assert serialize_scene(restored) == blob


def test_round_trip_preserves_downstream_behavior():
    from roomforge.metrics import collision_metrics

    scene = _small_scene()
    before = collision_metrics(scene)
    restored = deserialize_scene(serialize_scene(scene))
    after = collision_metrics(restored)
    assert before.col_percent == after.col_percent
    assert before.pairs == after.pairs


def test_truncated_document_names_field():
    scene = _small_scene()
    data = json.loads(serialize_scene(scene))
    del data["objects"][0]["pose"]
    with pytest.raises(SchemaError) as excinfo:
        deserialize_scene(json.dumps(data))
    assert "pose" in str(excinfo.value)


def test_unknown_version_rejected():
    data = json.loads(serialize_scene(_small_scene()))
    data["format_version"] = "99"
    with pytest.raises(VersionError):
        deserialize_scene(json.dumps(data))


def test_query_ordering_and_filters():
    scene = Scene(seed=0)
    scene.add_room(rectangular_room("room", 8, 8))
    scene.add_asset(box_asset("chair", (0.4, 0.4, 0.8), 5.0))
    floor = scene_surfaces(scene)["room/floor"]
    # Force ids chair_0 .. chair_a (11 instances) to check lexicographic order.
    for i in range(11):
        place_on_surface(scene, "chair", floor, Pose2(-3 + 0.6 * i, 0, 0))
    listing = query_scene_state(scene)
    ids = [e["id"] for e in listing]
    assert ids == sorted(ids)
    assert "chair_0" in ids and "chair_a" in ids
    assert ids.index("chair_0") < ids.index("chair_a")

    by_surface = query_scene_state(scene, surface="room/floor")
    assert len(by_surface) == 11
    with pytest.raises(NotFoundError):
        query_scene_state(scene, room="nope")
    with pytest.raises(NotFoundError):
        query_scene_state(scene, surface="nope")


def test_empty_scene_query():
    scene = Scene()
    assert query_scene_state(scene) == []


def test_room_overlap_rejected():
    scene = Scene()
    scene.add_room(rectangular_room("a", 4, 4, origin=(0, 0)))
    with pytest.raises(InvalidGeometryError):
        scene.add_room(rectangular_room("b", 4, 4, origin=(2, 0)))


def test_supported_pose_matches_lift():
    scene = _small_scene()
    surfaces = scene_surfaces(scene)
    for obj in scene.objects.values():
        if obj.support is None:
            continue
        surface = surfaces[obj.support.surface_id]
        lifted = lift_pose(obj.support.local, surface)
        assert np.allclose(lifted.translation, obj.pose.translation, atol=1e-6)
