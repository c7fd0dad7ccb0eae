import numpy as np
import pytest
from scipy import stats

from conftest import union_find_connectivity
from roomforge.errors import (
    InfeasibleLayoutError,
    LayoutSpecError,
    OpeningDimensionError,
    OpeningPlacementError,
)
from roomforge.geometry import derive_rng
from roomforge.layout import (
    CANDIDATES_PER_EDGE,
    FloorPlan,
    PlacedRoom,
    RoomSpec,
    ScoreWeights,
    add_opening,
    adjacency_edges,
    candidate_positions,
    connectivity_edges,
    exterior_door_rooms,
    mirror_opening_to_neighbor,
    order_rooms,
    plan_into_scene,
    rects_overlap,
    score_candidate,
    score_layout,
    shared_edge_length,
    solve_layout,
    validate_connectivity,
)
from roomforge.scene import Scene

WEIGHTS = ScoreWeights()


def brute_force_best_total(specs, weights=WEIGHTS, previous=None):
    """Exhaustive enumeration over the same ordering and candidate grid."""
    ordering = order_rooms(specs)
    edges = adjacency_edges(specs)
    best = [-np.inf]

    def recurse(depth, plan):
        if depth == len(ordering):
            total = score_layout(plan, previous, weights).total
            best[0] = max(best[0], total)
            return
        spec = ordering[depth]
        if depth == 0:
            recurse(1, plan.with_room(PlacedRoom(spec, (0.0, 0.0), False)))
            return
        for cand in candidate_positions(spec, plan):
            rect = PlacedRoom(spec, cand.origin, cand.rotated90).rect
            if any(rects_overlap(rect, other.rect) for other in plan.rooms):
                continue
            if score_candidate(cand, spec, plan, weights, edges) is None:
                continue
            recurse(depth + 1, plan.with_room(PlacedRoom(spec, cand.origin, cand.rotated90)))

    recurse(0, FloorPlan())
    return best[0]


def test_order_anchors_then_connectors():
    a = RoomSpec("A", "x", 5, 4)
    b = RoomSpec("B", "x", 6, 5)
    c = RoomSpec("C", "x", 3, 3, required_adjacent=frozenset({"A"}))
    assert [s.name for s in order_rooms([a, b, c])] == ["B", "A", "C"]


def test_order_single_room():
    solo = RoomSpec("solo", "x", 4, 4)
    assert order_rooms([solo]) == [solo]


def test_order_chain():
    a = RoomSpec("A", "x", 4, 4)
    b = RoomSpec("B", "x", 4, 4, required_adjacent=frozenset({"A"}))
    c = RoomSpec("C", "x", 4, 4, required_adjacent=frozenset({"B"}))
    assert [s.name for s in order_rooms([a, b, c])] == ["A", "B", "C"]


def test_order_pure_cycle_still_orderable():
    a = RoomSpec("A", "x", 5, 5, required_adjacent=frozenset({"B"}))
    b = RoomSpec("B", "x", 4, 4, required_adjacent=frozenset({"A"}))
    order = order_rooms([a, b])
    assert [s.name for s in order] == ["A", "B"]  # Largest cycle member first.


def test_unresolvable_reference():
    with pytest.raises(LayoutSpecError):
        order_rooms([RoomSpec("A", "x", 4, 4, required_adjacent=frozenset({"ghost"}))])


def test_candidate_counts():
    plan = FloorPlan((PlacedRoom(RoomSpec("P", "x", 4, 4), (0, 0)),))
    assert len(candidate_positions(RoomSpec("Q", "x", 3, 3), plan)) == 4 * CANDIDATES_PER_EDGE
    assert len(candidate_positions(RoomSpec("R", "x", 2, 4), plan)) == 8 * CANDIDATES_PER_EDGE
    assert candidate_positions(RoomSpec("Q", "x", 3, 3), FloorPlan()) == []


def test_score_candidate_formula():
    plan = FloorPlan((PlacedRoom(RoomSpec("A", "x", 4, 4), (0, 0)),))
    new = RoomSpec("B", "x", 4, 4, required_adjacent=frozenset({"A"}))
    edges = adjacency_edges([plan.rooms[0].spec, new])
    # Attached flush to the east edge, centered: adjacent, centroid offset 4m.
    from roomforge.layout import Candidate

    cand = Candidate(origin=(4.0, 0.0), rotated90=False, index=0)
    score = score_candidate(cand, new, plan, WEIGHTS, edges)
    assert score is not None
    assert abs(score - (WEIGHTS.s_base + WEIGHTS.w_adj - WEIGHTS.w_dist * 4.0)) < 1e-9

    # Distance-only candidate with no requirements.
    lone = RoomSpec("C", "x", 4, 4)
    cand2 = Candidate(origin=(4.0, 0.0), rotated90=False, index=0)
    score2 = score_candidate(cand2, lone, plan, WEIGHTS, adjacency_edges([plan.rooms[0].spec, lone]))
    assert abs(score2 - (WEIGHTS.s_base - WEIGHTS.w_dist * 4.0)) < 1e-9

    # Violating a required adjacency to a placed neighbor: rejected.
    far = Candidate(origin=(10.0, 10.0), rotated90=False, index=0)
    assert score_candidate(far, new, plan, WEIGHTS, edges) is None


def test_layout_scores():
    r1 = PlacedRoom(RoomSpec("a", "x", 4, 4), (0, 0))
    r2 = PlacedRoom(RoomSpec("b", "x", 4, 4), (4, 0))
    r3 = PlacedRoom(RoomSpec("c", "x", 4, 4), (0, 4))
    assert abs(score_layout(FloorPlan((r1, r2)), None, WEIGHTS).compactness - 1.0) < 1e-12
    assert abs(score_layout(FloorPlan((r1, r2, r3)), None, WEIGHTS).compactness - 0.75) < 1e-12
    same = FloorPlan((r1, r2, r3))
    assert abs(score_layout(same, same, WEIGHTS).stability - 3.0) < 1e-12


def test_single_room_at_origin():
    plan = solve_layout([RoomSpec("solo", "x", 4, 4)])
    assert plan.rooms[0].origin == (0.0, 0.0)


def test_two_room_adjacency_realized():
    a = RoomSpec("A", "x", 5, 4)
    b = RoomSpec("B", "x", 3, 3, required_adjacent=frozenset({"A"}))
    plan = solve_layout([a, b])
    assert shared_edge_length(plan.rooms[0].rect, plan.rooms[1].rect) >= 0.5


def test_exhaustive_matches_brute_force():
    rng = np.random.default_rng(100)
    for trial in range(6):
        names = ["A", "B", "C"][: int(rng.integers(2, 4))]
        specs = []
        for i, name in enumerate(names):
            adj = frozenset({names[0]}) if (i > 0 and rng.uniform() < 0.7) else frozenset()
            specs.append(
                RoomSpec(
                    name,
                    "x",
                    float(np.round(rng.uniform(2.5, 6.0), 1)),
                    float(np.round(rng.uniform(2.5, 6.0), 1)),
                    required_adjacent=adj,
                )
            )
        plan = solve_layout(specs, WEIGHTS)
        total = score_layout(plan, None, WEIGHTS).total
        expected = brute_force_best_total(specs)
        assert total == expected


def test_anytime_monotonicity():
    specs = [
        RoomSpec("A", "x", 5, 4),
        RoomSpec("B", "x", 4, 3, required_adjacent=frozenset({"A"})),
        RoomSpec("C", "x", 3, 3, required_adjacent=frozenset({"A"})),
    ]
    totals = []
    for budget in (30, 120, 600, 4000):
        plan = solve_layout(specs, WEIGHTS, node_budget=budget)
        totals.append(score_layout(plan, None, WEIGHTS).total)
    assert all(b >= a - 1e-12 for a, b in zip(totals, totals[1:]))


def test_no_overlaps_on_random_instances():
    rng = np.random.default_rng(7)
    for trial in range(60):
        count = int(rng.integers(2, 5))
        names = [f"r{i}" for i in range(count)]
        specs = []
        for i, name in enumerate(names):
            adj = frozenset({names[rng.integers(0, i)]}) if i and rng.uniform() < 0.6 else frozenset()
            specs.append(
                RoomSpec(name, "x", float(rng.uniform(2, 6)), float(rng.uniform(2, 6)), required_adjacent=adj)
            )
        plan = solve_layout(specs, WEIGHTS, node_budget=400)
        rects = [p.rect for p in plan.rooms]
        for i in range(len(rects)):
            for j in range(i + 1, len(rects)):
                assert not rects_overlap(rects[i], rects[j])
        for edge in adjacency_edges(specs):
            a, b = tuple(edge)
            assert shared_edge_length(plan.room(a).rect, plan.room(b).rect) >= 0.5 - 1e-9


def test_stability_keeps_room_in_place():
    specs = [
        RoomSpec("A", "x", 5, 4),
        RoomSpec("B", "x", 4, 3, required_adjacent=frozenset({"A"})),
    ]
    first = solve_layout(specs, WEIGHTS)
    again = solve_layout(specs, WEIGHTS, previous=first)
    for room in first.rooms:
        other = again.room(room.spec.name)
        assert np.allclose(room.center, other.center, atol=1e-9)


def test_infeasible_adjacency_reports_room():
    # B requires adjacency to A but is too large to attach with the minimum
    # shared edge: an impossible instance raises with the room name.
    specs = [
        RoomSpec("A", "x", 0.6, 0.6),
        RoomSpec("B", "x", 0.1, 0.1, required_adjacent=frozenset({"A"})),
    ]
    with pytest.raises(InfeasibleLayoutError) as excinfo:
        solve_layout(specs, WEIGHTS, node_budget=500)
    assert excinfo.value.unplaceable_room == "B"


# --- openings ---------------------------------------------------------------


def _room():
    from roomforge.scene import rectangular_room

    return rectangular_room("room", 6.0, 4.0)


def test_door_center_range():
    rng = derive_rng(0, "door")
    for _ in range(50):
        room = _room()
        add_opening(room, "door", "S", "center", {"width": 0.9, "height": 2.0}, rng)
        offset = room.doors[0].offset
        assert 2.0 + 0.45 - 1e-9 <= offset <= 4.0 - 0.45 + 1e-9


def test_window_taller_than_wall():
    room = _room()
    with pytest.raises(OpeningDimensionError):
        add_opening(room, "window", "S", "center", {"width": 1.0, "height": 2.0, "sill": 1.0}, derive_rng(0))


def test_opening_wider_than_third():
    room = _room()
    with pytest.raises(OpeningDimensionError):
        add_opening(room, "door", "S", "left", {"width": 2.5, "height": 2.0}, derive_rng(0))


def test_overlap_unavoidable():
    room = _room()
    rng = derive_rng(1, "doors")
    add_opening(room, "door", "S", "left", {"width": 1.9, "height": 2.0}, rng)
    with pytest.raises(OpeningPlacementError):
        add_opening(room, "door", "S", "left", {"width": 1.9, "height": 2.0}, rng)


def test_left_placement_uniform():
    rng = derive_rng(2, "ks")
    offsets = []
    for _ in range(10_000):
        room = _room()
        add_opening(room, "door", "S", "left", {"width": 0.9, "height": 2.0}, rng)
        offsets.append(room.doors[0].offset)
    lo, hi = 0.45, 2.0 - 0.45
    result = stats.kstest(offsets, stats.uniform(loc=lo, scale=hi - lo).cdf)
    assert result.pvalue > 0.01


# --- connectivity -----------------------------------------------------------


def _two_room_scene():
    specs = [
        RoomSpec("A", "x", 5, 4),
        RoomSpec("B", "x", 4, 3, required_adjacent=frozenset({"A"})),
    ]
    plan = solve_layout(specs, WEIGHTS)
    scene = Scene(seed=0)
    plan_into_scene(scene, plan)
    return scene


def test_connected_two_rooms():
    scene = _two_room_scene()
    room_a = scene.rooms["A"]
    shared = [w for w in room_a.walls if w.shared_with == "B"][0]
    add_opening(room_a, "door", shared.id, "center", {"width": 0.9, "height": 2.0}, derive_rng(0))
    mirror_opening_to_neighbor(scene, "A", "door", room_a.doors[-1])
    exterior = [w for w in room_a.walls if w.shared_with is None][0]
    add_opening(room_a, "door", exterior.id, "center", {"width": 0.9, "height": 2.0}, derive_rng(1))
    report = validate_connectivity(scene)
    assert report.ok


def test_no_exterior_door():
    scene = _two_room_scene()
    report = validate_connectivity(scene)
    assert not report.ok
    assert any("no exterior door" in e for e in report.errors)


def test_isolated_room_named():
    scene = _two_room_scene()
    room_a = scene.rooms["A"]
    exterior = [w for w in room_a.walls if w.shared_with is None][0]
    add_opening(room_a, "door", exterior.id, "center", {"width": 0.9, "height": 2.0}, derive_rng(2))
    report = validate_connectivity(scene)
    assert not report.ok
    assert report.unreachable == ["B"]


def test_connectivity_matches_union_find_oracle():
    rng = np.random.default_rng(21)
    for trial in range(50):
        count = int(rng.integers(2, 5))
        specs = []
        names = [f"r{i}" for i in range(count)]
        for i, name in enumerate(names):
            adj = frozenset({names[rng.integers(0, i)]}) if i else frozenset()
            specs.append(RoomSpec(name, "x", float(rng.uniform(3, 6)), float(rng.uniform(3, 6)), required_adjacent=adj))
        plan = solve_layout(specs, WEIGHTS, node_budget=400)
        scene = Scene(seed=trial)
        plan_into_scene(scene, plan)
        opener = derive_rng(trial, "doors")
        for room_id in sorted(scene.rooms):
            room = scene.rooms[room_id]
            for seg in room.walls:
                if seg.shared_with and rng.uniform() < 0.5 and seg.length > 2.8:
                    try:
                        add_opening(room, "door", seg.id, "center", {"width": 0.9, "height": 2.0}, opener)
                        mirror_opening_to_neighbor(scene, room_id, "door", room.doors[-1])
                    except Exception:
                        pass
            if rng.uniform() < 0.5:
                candidates = [w for w in room.walls if w.shared_with is None and w.length > 2.8]
                if candidates:
                    add_opening(room, "door", candidates[0].id, "center", {"width": 0.9, "height": 2.0}, opener)
        report = validate_connectivity(scene)
        edges = [tuple(e) for e in connectivity_edges(scene)]
        ok, unreachable = union_find_connectivity(
            sorted(scene.rooms), edges, exterior_door_rooms(scene)
        )
        assert report.ok == ok
        assert report.unreachable == unreachable
