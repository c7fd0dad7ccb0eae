"""Floor-plan solving: ordering, attachment search, openings, connectivity."""

from .connectivity import ConnectivityReport, connectivity_edges, exterior_door_rooms, validate_connectivity
from .convert import plan_into_scene, plan_to_rooms
from .openings import add_opening, mirror_opening_to_neighbor
from .solver import (
    CANDIDATES_PER_EDGE,
    MIN_SHARED_EDGE,
    Candidate,
    FloorPlan,
    LayoutScore,
    PlacedRoom,
    RoomSpec,
    ScoreWeights,
    adjacency_edges,
    candidate_positions,
    order_rooms,
    rects_overlap,
    score_candidate,
    score_layout,
    shared_edge_length,
    solve_layout,
)

__all__ = [
    "CANDIDATES_PER_EDGE",
    "MIN_SHARED_EDGE",
    "Candidate",
    "ConnectivityReport",
    "FloorPlan",
    "LayoutScore",
    "PlacedRoom",
    "RoomSpec",
    "ScoreWeights",
    "add_opening",
    "adjacency_edges",
    "candidate_positions",
    "connectivity_edges",
    "exterior_door_rooms",
    "mirror_opening_to_neighbor",
    "order_rooms",
    "plan_into_scene",
    "plan_to_rooms",
    "rects_overlap",
    "score_candidate",
    "score_layout",
    "shared_edge_length",
    "solve_layout",
    "validate_connectivity",
]
