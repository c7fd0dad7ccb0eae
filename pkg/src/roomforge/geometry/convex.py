"""Convex collision pieces and signed-distance queries.

Distance between two convex hulls is computed with a support-function
simplex descent; penetration depth uses a boundary-expansion phase over the
Minkowski difference. Both phases track support provenance so witness
points on the two bodies come out of the same run.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from ..errors import InvalidGeometryError
from .poses import Pose3

_EPS_IMPROVE = 1e-12
_EPS_CONTACT = 1e-10
_MAX_GJK_ITERS = 128
_MAX_EPA_ITERS = 256


class ConvexPiece:
    """One convex collision piece, defined by the hull of its vertices.

    Hull faces, triangles, and volume are precomputed once; world-frame
    queries transform vertices through a pose on demand.
    """

    __slots__ = ("vertices", "face_normals", "face_offsets", "triangles", "volume", "aabb_min", "aabb_max")

    def __init__(self, vertices: np.ndarray):
        verts = np.asarray(vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 3 or verts.shape[0] < 4:
            raise InvalidGeometryError("convex piece needs at least 4 points of dimension 3")
        if not np.all(np.isfinite(verts)):
            raise InvalidGeometryError("convex piece has non-finite coordinates")
        try:
            hull = ConvexHull(verts)
        except QhullError as exc:
            raise InvalidGeometryError(f"degenerate convex piece: {exc}") from exc
        # Keep only hull vertices; interior points never matter for support queries.
        self.vertices = np.ascontiguousarray(verts[hull.vertices])
        self.vertices.setflags(write=False)
        # scipy equations are [n | c] with n.x + c <= 0 inside.
        normals = hull.equations[:, :3].copy()
        offsets = -hull.equations[:, 3].copy()
        self.face_normals = np.ascontiguousarray(normals)
        self.face_offsets = np.ascontiguousarray(offsets)
        index_of = {int(v): i for i, v in enumerate(hull.vertices)}
        tris = np.array([[index_of[int(i)] for i in simplex] for simplex in hull.simplices])
        # Orient each hull triangle outward (positive volume against the centroid).
        centroid = self.vertices.mean(axis=0)
        for t in tris:
            a, b, c = self.vertices[t]
            if np.dot(np.cross(b - a, c - a), a - centroid) < 0.0:
                t[1], t[2] = t[2], t[1]
        self.triangles = tris
        self.volume = float(hull.volume)
        self.aabb_min = self.vertices.min(axis=0)
        self.aabb_max = self.vertices.max(axis=0)

    def world_vertices(self, pose: Pose3) -> np.ndarray:
        return pose.transform_points(self.vertices)

    def __repr__(self) -> str:  # pragma: no cover
        return f"ConvexPiece({len(self.vertices)} verts, volume={self.volume:.4g})"


@dataclass(frozen=True)
class DistanceResult:
    """Signed distance plus witness data for one convex pair.

    `normal` is the unit direction along which translating body A increases
    separation; `point_a`/`point_b` are the witness points in world frame.
    """

    distance: float
    normal: np.ndarray
    point_a: np.ndarray
    point_b: np.ndarray


def _support(verts: np.ndarray, direction: np.ndarray) -> int:
    return int(np.argmax(verts @ direction))


def _closest_on_simplex(points: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Closest point to the origin on the convex hull of up to 4 points.

    Enumerates the faces of the simplex, projecting the origin onto each
    affine hull and keeping the best projection with non-negative
    barycentric weights. Exhaustive but exact for such small inputs.

    Returns:
        Tuple of (closest point, barycentric weights, indices kept).
    """
    best: tuple[float, np.ndarray, np.ndarray, list[int]] | None = None
    n = len(points)
    pts = np.array(points)
    for mask in range(1, 1 << n):
        idx = [i for i in range(n) if mask & (1 << i)]
        sub = pts[idx]
        k = len(idx)
        if k == 1:
            lam = np.array([1.0])
            proj = sub[0]
        else:
            # Minimize |sub^T lam| subject to sum(lam) = 1 (KKT system).
            gram = sub @ sub.T
            kkt = np.zeros((k + 1, k + 1))
            kkt[:k, :k] = 2.0 * gram
            kkt[:k, k] = 1.0
            kkt[k, :k] = 1.0
            rhs = np.zeros(k + 1)
            rhs[k] = 1.0
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                continue
            lam = sol[:k]
            if not np.all(np.isfinite(lam)):
                continue
            if np.any(lam < -1e-9):
                continue
            lam = np.clip(lam, 0.0, None)
            total = lam.sum()
            if total <= 0.0:
                continue
            lam = lam / total
            proj = lam @ sub
        dist2 = float(proj @ proj)
        if best is None or dist2 < best[0] - 1e-18:
            best = (dist2, proj, lam, idx)
    assert best is not None
    return best[1], best[2], best[3]


def _gjk(verts_a: np.ndarray, verts_b: np.ndarray) -> tuple[float, np.ndarray, np.ndarray, list]:
    """Distance phase. Returns (distance, point_a, point_b, simplex).

    The simplex entries are (minkowski point, index in A, index in B);
    distance 0.0 signals an intersection for the expansion phase.
    """
    direction = verts_a.mean(axis=0) - verts_b.mean(axis=0)
    if float(direction @ direction) < 1e-18:
        direction = np.array([1.0, 0.0, 0.0])
    simplex: list[tuple[np.ndarray, int, int]] = []
    ia = _support(verts_a, -direction)
    ib = _support(verts_b, direction)
    simplex.append((verts_a[ia] - verts_b[ib], ia, ib))
    v = simplex[0][0]

    for _ in range(_MAX_GJK_ITERS):
        vnorm2 = float(v @ v)
        if vnorm2 < _EPS_CONTACT:
            return 0.0, np.zeros(3), np.zeros(3), simplex
        ia = _support(verts_a, -v)
        ib = _support(verts_b, v)
        w = verts_a[ia] - verts_b[ib]
        # No improvement possible: v is the closest point.
        if vnorm2 - float(v @ w) <= _EPS_IMPROVE * max(1.0, vnorm2):
            break
        if any(np.array_equal(w, entry[0]) for entry in simplex):
            break
        simplex.append((w, ia, ib))
        points = [entry[0] for entry in simplex]
        v, lam, kept = _closest_on_simplex(points)
        simplex = [simplex[i] for i in kept]
        if len(simplex) == 4:
            return 0.0, np.zeros(3), np.zeros(3), simplex

    points = [entry[0] for entry in simplex]
    v, lam, kept = _closest_on_simplex(points)
    simplex = [simplex[i] for i in kept]
    lam = lam[: len(simplex)]
    point_a = sum(l * verts_a[entry[1]] for l, entry in zip(lam, simplex))
    point_b = sum(l * verts_b[entry[2]] for l, entry in zip(lam, simplex))
    return float(np.linalg.norm(v)), np.asarray(point_a), np.asarray(point_b), simplex


def _complete_tetrahedron(
    simplex: list, verts_a: np.ndarray, verts_b: np.ndarray
) -> list | None:
    """Grow a terminal simplex into a non-degenerate tetrahedron for expansion."""
    probes = [
        np.array([1.0, 0.0, 0.0]),
        np.array([-1.0, 0.0, 0.0]),
        np.array([0.0, 1.0, 0.0]),
        np.array([0.0, -1.0, 0.0]),
        np.array([0.0, 0.0, 1.0]),
        np.array([0.0, 0.0, -1.0]),
        np.array([1.0, 1.0, 1.0]) / np.sqrt(3.0),
        np.array([-1.0, 1.0, 1.0]) / np.sqrt(3.0),
        np.array([1.0, -1.0, 1.0]) / np.sqrt(3.0),
        np.array([1.0, 1.0, -1.0]) / np.sqrt(3.0),
    ]
    simplex = list(simplex)
    for d in probes:
        if len(simplex) == 4:
            break
        ia = _support(verts_a, d)
        ib = _support(verts_b, -d)
        w = verts_a[ia] - verts_b[ib]
        if any(np.linalg.norm(w - entry[0]) < 1e-12 for entry in simplex):
            continue
        trial = simplex + [(w, ia, ib)]
        if _simplex_rank([e[0] for e in trial]) == len(trial) - 1:
            simplex = trial
    if len(simplex) != 4:
        return None
    return simplex


def _simplex_rank(points: list[np.ndarray]) -> int:
    if len(points) <= 1:
        return 0
    mat = np.array(points[1:]) - points[0]
    return int(np.linalg.matrix_rank(mat, tol=1e-12))


def _epa(
    simplex: list, verts_a: np.ndarray, verts_b: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Expansion phase: penetration depth and witness data for overlap.

    Returns (depth, outward_normal, point_a, point_b) where depth >= 0 and
    translating A by -outward_normal * depth resolves the overlap.
    """
    tetra = _complete_tetrahedron(simplex, verts_a, verts_b)
    if tetra is None:
        # Flat difference set (touching contact): depth is zero.
        return 0.0, np.array([0.0, 0.0, 1.0]), verts_a.mean(axis=0), verts_a.mean(axis=0)

    vertices: list[tuple[np.ndarray, int, int]] = list(tetra)
    interior = np.mean([v[0] for v in vertices], axis=0)

    def make_face(i: int, j: int, k: int):
        a, b, c = vertices[i][0], vertices[j][0], vertices[k][0]
        n = np.cross(b - a, c - a)
        norm = float(np.linalg.norm(n))
        if norm < 1e-16:
            return None
        n = n / norm
        if float(n @ (a - interior)) < 0.0:
            n = -n
            i, j, k = i, k, j
        return (float(n @ a), n, (i, j, k))

    faces = []
    for tri in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]:
        face = make_face(*tri)
        if face is not None:
            faces.append(face)
    if not faces:
        return 0.0, np.array([0.0, 0.0, 1.0]), verts_a.mean(axis=0), verts_a.mean(axis=0)

    for _ in range(_MAX_EPA_ITERS):
        faces.sort(key=lambda f: f[0])
        dist, normal, tri = faces[0]
        ia = _support(verts_a, normal)
        ib = _support(verts_b, -normal)
        w = verts_a[ia] - verts_b[ib]
        reach = float(normal @ w)
        if reach - dist <= 1e-10 * max(1.0, abs(reach)) + 1e-12:
            break
        vertices.append((w, ia, ib))
        new_idx = len(vertices) - 1
        # Remove faces visible from w and stitch the horizon.
        visible_mask = [float(f[1] @ (w - vertices[f[2][0]][0])) > 1e-12 for f in faces]
        if not any(visible_mask):
            break
        visible = [f for f, vis in zip(faces, visible_mask) if vis]
        faces = [f for f, vis in zip(faces, visible_mask) if not vis]
        edge_count: dict[tuple[int, int], int] = {}
        for _, _, (i, j, k) in visible:
            for e in ((i, j), (j, k), (k, i)):
                key = (min(e), max(e))
                edge_count[key] = edge_count.get(key, 0) + 1
        horizon = [e for e, c in edge_count.items() if c == 1]
        for i, j in horizon:
            face = make_face(i, j, new_idx)
            if face is not None:
                faces.append(face)
        if not faces:
            break

    faces.sort(key=lambda f: f[0])
    dist, normal, tri = faces[0]
    # Witness points from the barycentric projection of the origin onto the face.
    tri_pts = [vertices[i][0] for i in tri]
    proj, lam, kept = _closest_on_simplex(tri_pts)
    kept_entries = [vertices[tri[i]] for i in kept]
    point_a = sum(l * verts_a[e[1]] for l, e in zip(lam, kept_entries))
    point_b = sum(l * verts_b[e[2]] for l, e in zip(lam, kept_entries))
    return max(0.0, dist), normal, np.asarray(point_a), np.asarray(point_b)


def pair_distance(verts_a: np.ndarray, verts_b: np.ndarray) -> DistanceResult:
    """Signed distance between two convex vertex clouds in a common frame."""
    dist, pa, pb, simplex = _gjk(verts_a, verts_b)
    if dist > 0.0:
        normal = (pa - pb) / dist
        return DistanceResult(dist, normal, pa, pb)
    depth, outward, pa, pb = _epa(simplex, verts_a, verts_b)
    # Separating direction for A is opposite the outward boundary normal.
    return DistanceResult(-depth, -outward, pa, pb)


def _world_pieces(pieces: Sequence[ConvexPiece], pose: Pose3) -> list[np.ndarray]:
    return [piece.world_vertices(pose) for piece in pieces]


def signed_distance_info(
    pieces_a: Sequence[ConvexPiece],
    pose_a: Pose3,
    pieces_b: Sequence[ConvexPiece],
    pose_b: Pose3,
) -> DistanceResult:
    """Minimum signed distance over all piece pairs, with witness data.

    Negative values are the minimum translation needed to separate the
    deepest overlapping pair.
    """
    if not pieces_a or not pieces_b:
        raise InvalidGeometryError("signed distance requires non-empty piece sets")
    worlds_a = _world_pieces(pieces_a, pose_a)
    worlds_b = _world_pieces(pieces_b, pose_b)
    boxes_a = [(w.min(axis=0), w.max(axis=0)) for w in worlds_a]
    boxes_b = [(w.min(axis=0), w.max(axis=0)) for w in worlds_b]

    best: DistanceResult | None = None
    for wa, (amin, amax) in zip(worlds_a, boxes_a):
        for wb, (bmin, bmax) in zip(worlds_b, boxes_b):
            # AABB lower bound lets us skip pairs that cannot beat the best.
            gap = np.maximum(0.0, np.maximum(bmin - amax, amin - bmax))
            lower = float(np.linalg.norm(gap))
            if best is not None and lower >= best.distance and best.distance <= 0.0:
                continue
            if best is not None and lower >= best.distance:
                continue
            result = pair_distance(wa, wb)
            if best is None or result.distance < best.distance:
                best = result
    assert best is not None
    return best


def signed_distance(
    pieces_a: Sequence[ConvexPiece],
    pose_a: Pose3,
    pieces_b: Sequence[ConvexPiece],
    pose_b: Pose3,
) -> float:
    """Signed distance between two posed piece sets (negative = penetration)."""
    return signed_distance_info(pieces_a, pose_a, pieces_b, pose_b).distance


def pieces_aabb(pieces: Iterable[ConvexPiece], pose: Pose3) -> tuple[np.ndarray, np.ndarray]:
    """World axis-aligned bounds of a posed piece set."""
    mins, maxs = [], []
    for piece in pieces:
        world = piece.world_vertices(pose)
        mins.append(world.min(axis=0))
        maxs.append(world.max(axis=0))
    if not mins:
        raise InvalidGeometryError("empty piece set has no bounds")
    return np.min(mins, axis=0), np.max(maxs, axis=0)
