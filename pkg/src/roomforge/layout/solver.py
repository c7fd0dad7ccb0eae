"""Floor-plan search: room ordering, edge attachment, scoring, backtracking.

Rooms are axis-aligned rectangles. The search is best-first backtracking
over a fixed room ordering and a discrete attachment grid (11 positions per
exposed edge per orientation); it is anytime under a wall-clock timeout and
exactly reproducible under a node budget.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from ..errors import InfeasibleLayoutError, LayoutSpecError

CANDIDATES_PER_EDGE = 11
MIN_SHARED_EDGE = 0.5  # Adjacency needs room for a door.
_EPS = 1e-9


@dataclass(frozen=True)
class RoomSpec:
    name: str
    room_type: str
    width: float
    length: float
    required_adjacent: frozenset[str] = frozenset()
    prompt: str = ""

    def __post_init__(self):
        if self.width <= 0.0 or self.length <= 0.0:
            raise LayoutSpecError(f"room {self.name!r} needs positive dimensions")
        object.__setattr__(self, "required_adjacent", frozenset(self.required_adjacent))

    @property
    def area(self) -> float:
        return self.width * self.length

    @property
    def is_square(self) -> bool:
        return abs(self.width - self.length) < _EPS


@dataclass(frozen=True)
class ScoreWeights:
    s_base: float = 1.0
    w_adj: float = 10.0
    w_dist: float = 0.5  # Per meter from the placed-room centroid.
    w_compact: float = 10.0
    w_stable: float = 1.0

    def __post_init__(self):
        if self.w_adj <= 0.0:
            raise LayoutSpecError("adjacency weight must be positive")


@dataclass(frozen=True)
class PlacedRoom:
    spec: RoomSpec
    origin: tuple[float, float]  # Min corner.
    rotated90: bool = False

    @property
    def size(self) -> tuple[float, float]:
        if self.rotated90:
            return (self.spec.length, self.spec.width)
        return (self.spec.width, self.spec.length)

    @property
    def rect(self) -> tuple[float, float, float, float]:
        w, l = self.size
        return (self.origin[0], self.origin[1], self.origin[0] + w, self.origin[1] + l)

    @property
    def center(self) -> tuple[float, float]:
        x0, y0, x1, y1 = self.rect
        return ((x0 + x1) / 2.0, (y0 + y1) / 2.0)


@dataclass(frozen=True)
class FloorPlan:
    rooms: tuple[PlacedRoom, ...] = ()

    def with_room(self, placed: PlacedRoom) -> "FloorPlan":
        return FloorPlan(self.rooms + (placed,))

    def room(self, name: str) -> PlacedRoom:
        for placed in self.rooms:
            if placed.spec.name == name:
                return placed
        raise KeyError(name)

    @property
    def achieved_adjacencies(self) -> set[frozenset[str]]:
        out = set()
        for i, a in enumerate(self.rooms):
            for b in self.rooms[i + 1 :]:
                if shared_edge_length(a.rect, b.rect) >= MIN_SHARED_EDGE - _EPS:
                    out.add(frozenset((a.spec.name, b.spec.name)))
        return out


@dataclass(frozen=True)
class Candidate:
    origin: tuple[float, float]
    rotated90: bool
    index: int  # Position in the deterministic enumeration order.


@dataclass(frozen=True)
class LayoutScore:
    compactness: float
    stability: float
    total: float


def adjacency_edges(specs: list[RoomSpec]) -> set[frozenset[str]]:
    """Symmetric required-adjacency pairs, with reference validation."""
    names = {s.name for s in specs}
    if len(names) != len(specs):
        raise LayoutSpecError("duplicate room names")
    edges = set()
    for spec in specs:
        for other in spec.required_adjacent:
            if other not in names:
                raise LayoutSpecError(f"room {spec.name!r} requires unknown room {other!r}")
            if other == spec.name:
                raise LayoutSpecError(f"room {spec.name!r} cannot be adjacent to itself")
            edges.add(frozenset((spec.name, other)))
    return edges


def order_rooms(specs: list[RoomSpec]) -> list[RoomSpec]:
    """Placement order: anchors first, then connectors as neighbors appear.

    Anchors (no adjacency requirements of their own) come first, by
    descending area. Connectors follow once at least one required neighbor
    is already ordered; within the eligible set, largest area first. A
    requirement cycle with no placed neighbor falls back to the largest
    remaining connector.
    """
    edges = adjacency_edges(specs)

    def neighbors(spec: RoomSpec) -> set[str]:
        return {
            other
            for edge in edges
            if spec.name in edge
            for other in edge
            if other != spec.name
        }

    anchors = [s for s in specs if not s.required_adjacent]
    connectors = [s for s in specs if s.required_adjacent]
    order = sorted(anchors, key=lambda s: (-s.area, s.name))
    placed = {s.name for s in order}
    remaining = sorted(connectors, key=lambda s: (-s.area, s.name))
    while remaining:
        eligible = [s for s in remaining if neighbors(s) & placed]
        pick = eligible[0] if eligible else remaining[0]
        order.append(pick)
        placed.add(pick.name)
        remaining.remove(pick)
    return order


def rects_overlap(a: tuple, b: tuple) -> bool:
    """Interior overlap of two axis-aligned rectangles."""
    return (
        a[0] < b[2] - _EPS
        and b[0] < a[2] - _EPS
        and a[1] < b[3] - _EPS
        and b[1] < a[3] - _EPS
    )


def shared_edge_length(a: tuple, b: tuple) -> float:
    """Length of the common boundary segment of two touching rectangles."""
    if abs(a[2] - b[0]) < 1e-6 or abs(b[2] - a[0]) < 1e-6:
        return max(0.0, min(a[3], b[3]) - max(a[1], b[1]))
    if abs(a[3] - b[1]) < 1e-6 or abs(b[3] - a[1]) < 1e-6:
        return max(0.0, min(a[2], b[2]) - max(a[0], b[0]))
    return 0.0


def _orientations(spec: RoomSpec) -> list[bool]:
    return [False] if spec.is_square else [False, True]


def candidate_positions(new: RoomSpec, plan: FloorPlan) -> list[Candidate]:
    """Attachment candidates along every edge of every placed room.

    Each edge emits exactly CANDIDATES_PER_EDGE evenly spaced positions per
    orientation, aligned so at least MIN_SHARED_EDGE of boundary is shared.
    The caller places the first room directly, so an empty plan yields no
    candidates.
    """
    candidates: list[Candidate] = []
    index = 0
    for placed in plan.rooms:
        x0, y0, x1, y1 = placed.rect
        for rotated in _orientations(new):
            nw, nl = (new.length, new.width) if rotated else (new.width, new.length)
            edges = [
                ("E", x1, (y0 - nl + MIN_SHARED_EDGE, y1 - MIN_SHARED_EDGE)),
                ("N", y1, (x0 - nw + MIN_SHARED_EDGE, x1 - MIN_SHARED_EDGE)),
                ("W", x0 - nw, (y0 - nl + MIN_SHARED_EDGE, y1 - MIN_SHARED_EDGE)),
                ("S", y0 - nl, (x0 - nw + MIN_SHARED_EDGE, x1 - MIN_SHARED_EDGE)),
            ]
            for side, fixed, (lo, hi) in edges:
                hi = max(hi, lo)
                for t in np.linspace(lo, hi, CANDIDATES_PER_EDGE):
                    if side in ("E", "W"):
                        origin = (fixed, float(t))
                    else:
                        origin = (float(t), fixed)
                    candidates.append(Candidate(origin=origin, rotated90=rotated, index=index))
                    index += 1
    return candidates


def score_candidate(
    cand: Candidate, new: RoomSpec, plan: FloorPlan, weights: ScoreWeights,
    edges: set[frozenset[str]] | None = None,
    centroid: tuple[float, float] | None = None,
) -> float | None:
    """Local score of a non-overlapping candidate, or None when rejected.

    Rejection happens when a required neighbor is already placed but the
    candidate does not touch it with enough shared edge.
    """
    if edges is None:
        edges = adjacency_edges([new] + [p.spec for p in plan.rooms])
    placed_room = PlacedRoom(new, cand.origin, cand.rotated90)
    rect = placed_room.rect
    bonus = 0.0
    for other in plan.rooms:
        if frozenset((new.name, other.spec.name)) in edges:
            if shared_edge_length(rect, other.rect) >= MIN_SHARED_EDGE - _EPS:
                bonus += weights.w_adj
            else:
                return None
    if centroid is None:
        centers = [p.center for p in plan.rooms]
        centroid = (
            sum(c[0] for c in centers) / len(centers),
            sum(c[1] for c in centers) / len(centers),
        )
    cx, cy = placed_room.center
    distance = math.hypot(cx - centroid[0], cy - centroid[1])
    return weights.s_base + bonus - weights.w_dist * distance


def score_layout(
    plan: FloorPlan, previous: FloorPlan | None, weights: ScoreWeights
) -> LayoutScore:
    """Global layout score: compactness plus stability against a previous plan."""
    rects = [p.rect for p in plan.rooms]
    total_area = sum(p.spec.area for p in plan.rooms)
    x0 = min(r[0] for r in rects)
    y0 = min(r[1] for r in rects)
    x1 = max(r[2] for r in rects)
    y1 = max(r[3] for r in rects)
    bbox_area = (x1 - x0) * (y1 - y0)
    compactness = total_area / bbox_area if bbox_area > 0.0 else 0.0

    stability = 0.0
    if previous is not None:
        prev_centers = {p.spec.name: p.center for p in previous.rooms}
        for placed in plan.rooms:
            prev = prev_centers.get(placed.spec.name)
            if prev is not None:
                gap = math.hypot(placed.center[0] - prev[0], placed.center[1] - prev[1])
                stability += math.exp(-gap / 2.0)
    total = weights.w_compact * compactness + weights.w_stable * stability
    return LayoutScore(compactness=compactness, stability=stability, total=total)


class _SearchStop(Exception):
    pass


def solve_layout(
    specs: list[RoomSpec],
    weights: ScoreWeights = ScoreWeights(),
    *,
    timeout: float | None = None,
    node_budget: int | None = None,
    previous: FloorPlan | None = None,
    rng: np.random.Generator | None = None,
) -> FloorPlan:
    """Best layout found by best-first backtracking over the candidate grid.

    With a node budget the search is exactly reproducible; the wall-clock
    timeout keeps the anytime behavior but not cross-run determinism. With
    neither bound the search is exhaustive and optimal within the room
    ordering and candidate grid.

    Args:
        specs: Room specifications; adjacency references must resolve.
        weights: Scoring weights for local and global terms.
        timeout: Wall-clock budget in seconds, or None.
        node_budget: Maximum placements to expand, or None.
        previous: Earlier plan rewarded by the stability term.
        rng: Accepted for interface symmetry; the search itself is
            deterministic via fixed tie-breaking.

    Raises:
        InfeasibleLayoutError: No complete layout exists (or was found
            within the budget), naming the first unplaceable room.
    """
    del rng
    if not specs:
        raise LayoutSpecError("no rooms to place")
    ordering = order_rooms(specs)
    edges = adjacency_edges(specs)
    deadline = time.monotonic() + timeout if timeout is not None else None

    best_plan: FloorPlan | None = None
    best_total = -np.inf
    nodes = 0
    max_depth = 0

    def tick() -> None:
        nonlocal nodes
        nodes += 1
        if node_budget is not None and nodes > node_budget:
            raise _SearchStop
        if deadline is not None and time.monotonic() > deadline:
            raise _SearchStop

    def dfs(depth: int, plan: FloorPlan) -> None:
        nonlocal best_plan, best_total, max_depth
        max_depth = max(max_depth, depth)
        if depth == len(ordering):
            total = score_layout(plan, previous, weights).total
            if total > best_total:
                best_total = total
                best_plan = plan
            return
        spec = ordering[depth]
        if depth == 0:
            tick()
            dfs(1, plan.with_room(PlacedRoom(spec, (0.0, 0.0), False)))
            return
        centers = [p.center for p in plan.rooms]
        centroid = (
            sum(c[0] for c in centers) / len(centers),
            sum(c[1] for c in centers) / len(centers),
        )
        scored: list[tuple[float, Candidate]] = []
        for cand in candidate_positions(spec, plan):
            rect = PlacedRoom(spec, cand.origin, cand.rotated90).rect
            if any(rects_overlap(rect, other.rect) for other in plan.rooms):
                continue
            score = score_candidate(cand, spec, plan, weights, edges, centroid)
            if score is None:
                continue
            scored.append((score, cand))
        scored.sort(key=lambda item: (-item[0], item[1].index))
        for _, cand in scored:
            tick()
            dfs(depth + 1, plan.with_room(PlacedRoom(spec, cand.origin, cand.rotated90)))

    try:
        dfs(0, FloorPlan())
    except _SearchStop:
        pass

    if best_plan is None:
        failed = ordering[min(max_depth, len(ordering) - 1)]
        raise InfeasibleLayoutError(
            f"no complete layout found; first unplaceable room is {failed.name!r}",
            unplaceable_room=failed.name,
        )
    return best_plan
