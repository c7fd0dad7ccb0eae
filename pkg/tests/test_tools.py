import numpy as np
import pytest

from conftest import grid_flood_fill
from roomforge.errors import SnapFailedError
from roomforge.geometry import Pose2, pose_from_xyz_yaw
from roomforge.geometry.poses import quat_about_z, quat_multiply
from roomforge.scene import (
    AssetCategory,
    Scene,
    box_asset,
    cylinder_asset,
    place_on_surface,
    rectangular_room,
    scene_surfaces,
    thin_covering_asset,
)
from roomforge.tools import (
    check_facing,
    check_physics,
    check_reachability,
    objects_distance,
    snap_to_object,
)


def _with_yaw(pose, yaw):
    return type(pose)(pose.translation, quat_multiply(quat_about_z(yaw - pose.yaw_deg()), pose.quaternion))


def _scene_with(*assets):
    scene = Scene(seed=1)
    scene.add_room(rectangular_room("room", 12, 12))
    for asset in assets:
        scene.add_asset(asset)
    return scene, scene_surfaces(scene)["room/floor"]


# --- facing ------------------------------------------------------------------


def test_facing_examples():
    scene, floor = _scene_with(
        box_asset("src", (0.5, 0.5, 0.5), 1.0),
        box_asset("tgt", (1.0, 1.0, 1.0), 1.0),
    )
    src = place_on_surface(scene, "src", floor, Pose2(0, 0, 0))
    place_on_surface(scene, "tgt", floor, Pose2(0, 2, 0))
    report = check_facing(scene, src.id, "tgt_0")
    assert report.faces_toward and not report.faces_away

    scene.objects[src.id].pose = _with_yaw(src.pose, 180.0)
    report = check_facing(scene, src.id, "tgt_0")
    assert not report.faces_toward and report.faces_away


def test_cylinder_target_is_circular():
    scene, floor = _scene_with(
        box_asset("src", (0.5, 0.5, 0.5), 1.0),
        cylinder_asset("drum", 0.5, 1.0, 5.0, segments=48),
    )
    place_on_surface(scene, "src", floor, Pose2(0, 0, 0))
    place_on_surface(scene, "drum", floor, Pose2(2, 2, 0))
    report = check_facing(scene, "src_0", "drum_0")
    # Inscribed cylinder fills pi/4 of its box, under the 0.80 gate.
    assert report.target_is_circular


def test_optimal_theta_self_consistency_sweep():
    # Independent check: the optimal yaw must agree with a brute sweep over
    # candidate yaw angles for hit/no-hit, and re-posing with it must face.
    rng = np.random.default_rng(17)
    scene, floor = _scene_with(
        box_asset("src", (0.4, 0.6, 0.5), 1.0),
        box_asset("tgt", (0.8, 1.4, 1.0), 1.0),
    )
    src = place_on_surface(scene, "src", floor, Pose2(0, 0, 0))
    tgt = place_on_surface(scene, "tgt", floor, Pose2(2, 2, 0))
    hits = 0
    for _ in range(100):
        scene.objects[src.id].pose = pose_from_xyz_yaw(
            float(rng.uniform(-4, 4)), float(rng.uniform(-4, 4)), 0, float(rng.uniform(-180, 180))
        )
        scene.objects[tgt.id].pose = pose_from_xyz_yaw(
            float(rng.uniform(-4, 4)), float(rng.uniform(-4, 4)), 0, float(rng.uniform(-180, 180))
        )
        report = check_facing(scene, src.id, tgt.id)
        scene.objects[src.id].pose = _with_yaw(scene.objects[src.id].pose, report.optimal_theta)
        after = check_facing(scene, src.id, tgt.id)
        hits += after.faces_toward
        # Sweep oracle: some yaw in a fine sweep must also report toward,
        # and the optimal yaw must be among the sweep's toward-set.
        toward_yaws = []
        for yaw in np.linspace(-180, 180, 721):
            scene.objects[src.id].pose = _with_yaw(scene.objects[src.id].pose, float(yaw))
            if check_facing(scene, src.id, tgt.id).faces_toward:
                toward_yaws.append(yaw)
        assert toward_yaws
        deltas = np.abs((np.array(toward_yaws) - report.optimal_theta + 180) % 360 - 180)
        assert deltas.min() <= 0.5
    assert hits == 100


def test_mutual_exclusivity():
    scene, floor = _scene_with(
        box_asset("src", (0.4, 0.4, 0.5), 1.0),
        box_asset("tgt", (0.8, 0.8, 1.0), 1.0),
    )
    src = place_on_surface(scene, "src", floor, Pose2(0, 0, 0))
    place_on_surface(scene, "tgt", floor, Pose2(0, 3, 0))
    for yaw in (0.0, 45.0, 90.0, 180.0, -120.0):
        scene.objects[src.id].pose = _with_yaw(scene.objects[src.id].pose, yaw)
        report = check_facing(scene, src.id, "tgt_0")
        assert not (report.faces_toward and report.faces_away)


# --- snap ---------------------------------------------------------------------


def test_snap_toward_contract():
    scene, floor = _scene_with(
        box_asset("table", (1.2, 0.8, 0.75), 25.0),
        box_asset("chair", (0.45, 0.45, 0.9), 6.0),
    )
    place_on_surface(scene, "table", floor, Pose2(0, 0, 0))
    chair = place_on_surface(scene, "chair", floor, Pose2(0, -1.4, 0))
    result = snap_to_object(scene, chair.id, "table_0", "toward")
    gap = objects_distance(result.scene, result.scene.objects[chair.id], result.scene.objects["table_0"]).distance
    assert 0.0025 - 1e-9 <= gap <= 0.015 + 1e-9
    assert check_facing(result.scene, chair.id, "table_0").faces_toward
    # Original scene untouched.
    assert np.allclose(scene.objects[chair.id].pose.translation, chair.pose.translation)


def test_snap_pushes_out_along_min_overlap_axis():
    scene, floor = _scene_with(box_asset("cube", (1, 1, 1), 1.0))
    a = place_on_surface(scene, "cube", floor, Pose2(0, 0, 0))
    b = place_on_surface(scene, "cube", floor, Pose2(0.8, 0.4, 0))  # 0.2 x-overlap, 0.6 y-overlap.
    result = snap_to_object(scene, b.id, a.id, "none")
    moved = result.scene.objects[b.id].pose.translation - b.pose.translation
    assert abs(moved[0]) > abs(moved[1])  # Pushed along x, the minimum overlap.
    gap = objects_distance(result.scene, result.scene.objects[a.id], result.scene.objects[b.id]).distance
    assert gap >= 0.0


def test_snap_slides_under_desk():
    # Desk: top slab on two side panels with 0.7 m knee clearance.
    scene = Scene(seed=2)
    scene.add_room(rectangular_room("room", 12, 12))
    from roomforge.geometry import ConvexPiece, box_mesh
    from roomforge.scene.model import Asset

    pieces = [
        ConvexPiece(box_mesh((1.4, 0.7, 0.05), (0, 0, 0.725)).vertices),  # top
        ConvexPiece(box_mesh((0.05, 0.7, 0.7), (-0.675, 0, 0.35)).vertices),
        ConvexPiece(box_mesh((0.05, 0.7, 0.7), (0.675, 0, 0.35)).vertices),
    ]
    verts = np.vstack([p.vertices for p in pieces])
    desk = Asset(
        id="desk",
        category=AssetCategory.FURNITURE,
        collision_pieces=pieces,
        bbox_min=verts.min(axis=0),
        bbox_max=verts.max(axis=0),
        mass=30.0,
        com=np.array([0, 0, 0.5]),
        inertia=np.eye(3),
    )
    scene.add_asset(desk)
    # Chair with a low seat and a tall backrest at its rear (-y side).
    chair_pieces = [
        ConvexPiece(box_mesh((0.4, 0.4, 0.45), (0, 0, 0.225)).vertices),
        ConvexPiece(box_mesh((0.4, 0.06, 0.5), (0, -0.17, 0.7)).vertices),
    ]
    chair_verts = np.vstack([p.vertices for p in chair_pieces])
    chair = Asset(
        id="chair",
        category=AssetCategory.FURNITURE,
        collision_pieces=chair_pieces,
        bbox_min=chair_verts.min(axis=0),
        bbox_max=chair_verts.max(axis=0),
        mass=6.0,
        com=np.array([0, 0, 0.4]),
        inertia=np.eye(3) * 0.1,
    )
    scene.add_asset(chair)
    floor = scene_surfaces(scene)["room/floor"]
    place_on_surface(scene, "desk", floor, Pose2(0, 0, 0))
    stool = place_on_surface(scene, "chair", floor, Pose2(0, -1.0, 0))
    result = snap_to_object(scene, stool.id, "desk_0", "toward")
    out = result.scene
    from roomforge.tools import object_aabb

    stool_box = object_aabb(out, out.objects[stool.id])
    desk_box = object_aabb(out, out.objects["desk_0"])
    # Planar footprints overlap (the stool is under the desk top) while the
    # spatial distance stays non-negative.
    assert stool_box[1][1] > desk_box[0][1]
    dist = objects_distance(out, out.objects[stool.id], out.objects["desk_0"]).distance
    assert dist >= 0.0


def test_snap_never_worsens_third_party_penetration():
    rng = np.random.default_rng(23)
    for trial in range(20):
        scene, floor = _scene_with(
            box_asset("mover", (0.5, 0.5, 0.5), 2.0),
            box_asset("target", (1.0, 1.0, 0.8), 10.0),
            box_asset("bystander", (0.6, 0.6, 0.6), 3.0),
        )
        place_on_surface(scene, "mover", floor, Pose2(float(rng.uniform(-2, 2)), float(rng.uniform(-3, -1.5)), 0))
        place_on_surface(scene, "target", floor, Pose2(0, 0, 0))
        place_on_surface(scene, "bystander", floor, Pose2(float(rng.uniform(-1.5, 1.5)), float(rng.uniform(-1.5, -0.8)), 0))
        before = objects_distance(scene, scene.objects["mover_0"], scene.objects["bystander_0"]).distance
        try:
            result = snap_to_object(scene, "mover_0", "target_0", "none")
        except SnapFailedError:
            continue
        after = objects_distance(result.scene, result.scene.objects["mover_0"], result.scene.objects["bystander_0"]).distance
        before_pen = max(0.0, -before)
        after_pen = max(0.0, -after)
        assert after_pen <= before_pen + 1e-3


def test_snap_welded_source_fails():
    scene, floor = _scene_with(box_asset("cube", (1, 1, 1), 1.0))
    a = place_on_surface(scene, "cube", floor, Pose2(0, 0, 0), welded=True)
    place_on_surface(scene, "cube", floor, Pose2(3, 0, 0))
    with pytest.raises(SnapFailedError):
        snap_to_object(scene, a.id, "cube_1", "none")


# --- reachability --------------------------------------------------------------


def test_reachability_empty_room():
    scene = Scene(seed=1)
    scene.add_room(rectangular_room("room", 10, 10))
    report = check_reachability(scene, 0.35)
    assert report.fully_reachable
    assert report.region_count == 1
    assert report.reachability_ratio == 1.0


def test_reachability_strip_blocks():
    scene, floor = _scene_with(box_asset("bookshelf", (12.0, 0.4, 2.0), 80.0))
    place_on_surface(scene, "bookshelf", floor, Pose2(0, 2.0, 0))
    report = check_reachability(scene, 0.35)
    assert report.region_count == 2
    assert report.blocking_object_ids == ("bookshelf_0",)


def test_reachability_excludes_coverings_and_manipulands():
    scene, floor = _scene_with(
        thin_covering_asset("rug", (10.0, 0.5)),
        box_asset("ball", (0.2, 0.2, 0.2), 0.2, category=AssetCategory.MANIPULAND),
    )
    scene.add_object("rug", pose_from_xyz_yaw(0, 2, 0.001), welded=True)
    place_on_surface(scene, "ball", floor, Pose2(0, -2, 0))
    report = check_reachability(scene, 0.35)
    assert report.fully_reachable


def test_reachability_against_grid_oracle():
    rng = np.random.default_rng(31)
    for trial in range(5):
        scene = Scene(seed=trial)
        scene.add_room(rectangular_room("room", 8, 8))
        scene.add_asset(box_asset("unit", (1.2, 0.7, 1.0), 20.0))
        floor = scene_surfaces(scene)["room/floor"]
        obstacles = []
        for k in range(4):
            obj = place_on_surface(
                scene, "unit", floor,
                Pose2(float(rng.uniform(-3, 3)), float(rng.uniform(-3, 3)), float(rng.uniform(0, 180))),
            )
        report = check_reachability(scene, 0.3)
        from roomforge.tools import object_obb2

        obbs = [object_obb2(scene, o) for o in scene.objects.values()]
        count, areas, total = grid_flood_fill(scene.rooms["room"].floor_world(), obbs, 0.3)
        # Components under the quantization floor are grid artifacts of the
        # polygonal arc approximation; filter both sides alike.
        floor_area = 0.05
        impl_count = sum(1 for a in report.areas if a >= floor_area)
        oracle_count = sum(1 for a in areas if a >= floor_area)
        assert impl_count == oracle_count
        oracle_ratio = areas[0] / total if total else 1.0
        assert abs(report.reachability_ratio - oracle_ratio) < 0.02


def test_reachability_monotone_in_radius():
    scene, floor = _scene_with(box_asset("unit", (1.5, 0.8, 1.0), 20.0))
    place_on_surface(scene, "unit", floor, Pose2(0, 0, 30))
    place_on_surface(scene, "unit", floor, Pose2(2, 2, -40))
    last_total = np.inf
    for hr in (0.2, 0.35, 0.5, 0.8):
        report = check_reachability(scene, hr)
        total = sum(report.areas)
        assert total <= last_total + 1e-9
        last_total = total


# --- physics check --------------------------------------------------------------


def test_physics_overlapping_cabinets():
    scene, floor = _scene_with(box_asset("cab", (1.0, 0.5, 1.8), 40.0))
    place_on_surface(scene, "cab", floor, Pose2(0, 0, 0))
    place_on_surface(scene, "cab", floor, Pose2(0.97, 0, 0))
    report = check_physics(scene, "furniture")
    assert len(report.collisions) == 1
    assert report.collisions[0]["pair"] == ("cab_0", "cab_1")
    assert abs(report.collisions[0]["depth"] - 0.03) < 1e-6


def test_physics_door_blockage():
    scene = Scene(seed=1)
    room = rectangular_room("room", 8, 8)
    scene.add_room(room)
    from roomforge.layout import add_opening
    from roomforge.geometry import derive_rng

    add_opening(room, "door", "S", "center", {"width": 1.0, "height": 2.0}, derive_rng(0))
    scene.add_asset(box_asset("sofa", (2.0, 0.9, 0.8), 45.0))
    floor = scene_surfaces(scene)["room/floor"]
    door = room.doors[0]
    # Center the sofa right in the doorway clearance zone.
    x_center = -4.0 + door.offset
    place_on_surface(scene, "sofa", floor, Pose2(x_center, -3.6, 0))
    report = check_physics(scene, "furniture")
    assert report.door_blockages
    assert report.door_blockages[0]["object"] == "sofa_0"


def test_physics_manipuland_context_filtering():
    scene, floor = _scene_with(
        box_asset("table", (1.2, 0.8, 0.75), 25.0),
        box_asset("mug", (0.08, 0.08, 0.1), 0.3, category=AssetCategory.MANIPULAND),
    )
    t1 = place_on_surface(scene, "table", floor, Pose2(-2, 0, 0))
    t2 = place_on_surface(scene, "table", floor, Pose2(2, 0, 0))
    surfaces = scene_surfaces(scene)
    top1 = surfaces[f"{t1.id}/S_0"]
    top2 = surfaces[f"{t2.id}/S_0"]
    # Two overlapping mugs on each table.
    place_on_surface(scene, "mug", top1, Pose2(0, 0, 0))
    place_on_surface(scene, "mug", top1, Pose2(0.04, 0, 0))
    place_on_surface(scene, "mug", top2, Pose2(0, 0, 0))
    place_on_surface(scene, "mug", top2, Pose2(0.04, 0, 0))
    report = check_physics(scene, "manipuland", context=t1.id)
    pairs = [c["pair"] for c in report.collisions]
    assert ("mug_0", "mug_1") in pairs
    assert all("mug_2" not in p and "mug_3" not in p for p in pairs)


def test_physics_window_warning():
    scene = Scene(seed=1)
    room = rectangular_room("room", 8, 8)
    scene.add_room(room)
    from roomforge.layout import add_opening
    from roomforge.geometry import derive_rng

    add_opening(room, "window", "S", "center", {"width": 1.2, "height": 1.1, "sill": 0.9}, derive_rng(0))
    scene.add_asset(box_asset("wardrobe", (1.2, 0.6, 2.0), 60.0))
    scene.add_asset(box_asset("bench", (1.2, 0.4, 0.45), 15.0))
    floor = scene_surfaces(scene)["room/floor"]
    window = room.windows[0]
    x_center = -4.0 + window.offset
    place_on_surface(scene, "wardrobe", floor, Pose2(x_center, -3.6, 0))
    place_on_surface(scene, "bench", floor, Pose2(x_center, -3.7, 0))
    report = check_physics(scene, "furniture")
    warned = {w["object"] for w in report.window_warnings}
    assert "wardrobe_0" in warned  # Rises above the sill.
    assert "bench_0" not in warned  # Entirely below the sill.


def test_physics_covering_checks():
    scene, floor = _scene_with(
        thin_covering_asset("rug", (2.0, 1.5)),
        thin_covering_asset("mat", (1.0, 1.0)),
    )
    scene.add_object("rug", pose_from_xyz_yaw(0, 0, 0.001), welded=True)
    scene.add_object("mat", pose_from_xyz_yaw(0.5, 0.2, 0.001), welded=True)
    scene.add_object("mat", pose_from_xyz_yaw(5.8, 0, 0.001), welded=True)  # Past the wall.
    report = check_physics(scene, "furniture")
    assert any(set(e["pair"]) == {"rug_0", "mat_0"} for e in report.covering_overlaps)
    assert any(e["object"] == "mat_1" for e in report.boundary_violations)


def test_physics_determinism_and_order_independence():
    scene, floor = _scene_with(box_asset("cab", (1.0, 0.5, 1.8), 40.0))
    place_on_surface(scene, "cab", floor, Pose2(0, 0, 0))
    place_on_surface(scene, "cab", floor, Pose2(0.97, 0, 0))
    place_on_surface(scene, "cab", floor, Pose2(-0.97, 0.02, 0))
    report_a = check_physics(scene, "furniture").to_dict()
    # Rebuild with reversed insertion order.
    scene_b = Scene(seed=1)
    scene_b.add_room(rectangular_room("room", 12, 12))
    scene_b.add_asset(box_asset("cab", (1.0, 0.5, 1.8), 40.0))
    fl = scene_surfaces(scene_b)["room/floor"]
    from roomforge.scene.model import SupportRef

    for oid in reversed(list(scene.objects)):
        src = scene.objects[oid]
        scene_b.add_object("cab", src.pose, object_id=oid, support=src.support)
    report_b = check_physics(scene_b, "furniture").to_dict()
    assert report_a == report_b
