"""Primitive mesh generators used for built-in assets and tests."""

from __future__ import annotations

import numpy as np

from .mass import TriMesh

_BOX_TRIS = np.array(
    [
        [0, 2, 1], [0, 3, 2],  # bottom (z = min)
        [4, 5, 6], [4, 6, 7],  # top
        [0, 1, 5], [0, 5, 4],  # y = min
        [2, 3, 7], [2, 7, 6],  # y = max
        [1, 2, 6], [1, 6, 5],  # x = max
        [3, 0, 4], [3, 4, 7],  # x = min
    ]
)


def box_mesh(size, center=(0.0, 0.0, 0.0)) -> TriMesh:
    """Axis-aligned box mesh with outward-facing triangles."""
    sx, sy, sz = (float(s) / 2.0 for s in size)
    cx, cy, cz = (float(c) for c in center)
    verts = np.array(
        [
            [cx - sx, cy - sy, cz - sz],
            [cx + sx, cy - sy, cz - sz],
            [cx + sx, cy + sy, cz - sz],
            [cx - sx, cy + sy, cz - sz],
            [cx - sx, cy - sy, cz + sz],
            [cx + sx, cy - sy, cz + sz],
            [cx + sx, cy + sy, cz + sz],
            [cx - sx, cy + sy, cz + sz],
        ]
    )
    return TriMesh(verts, _BOX_TRIS)


def cylinder_mesh(radius: float, height: float, segments: int = 24, center=(0.0, 0.0, 0.0)) -> TriMesh:
    """Z-aligned closed cylinder approximated by a regular prism."""
    cx, cy, cz = (float(c) for c in center)
    half = height / 2.0
    angles = np.linspace(0.0, 2.0 * np.pi, segments, endpoint=False)
    ring = np.stack([radius * np.cos(angles), radius * np.sin(angles)], axis=1)
    bottom = np.column_stack([ring[:, 0] + cx, ring[:, 1] + cy, np.full(segments, cz - half)])
    top = np.column_stack([ring[:, 0] + cx, ring[:, 1] + cy, np.full(segments, cz + half)])
    verts = np.vstack([bottom, top, [[cx, cy, cz - half]], [[cx, cy, cz + half]]])
    bc, tc = 2 * segments, 2 * segments + 1

    tris = []
    for i in range(segments):
        j = (i + 1) % segments
        tris.append([i, j, segments + j])
        tris.append([i, segments + j, segments + i])
        tris.append([bc, j, i])
        tris.append([tc, segments + i, segments + j])
    return TriMesh(verts, np.array(tris))


def icosphere_mesh(radius: float, subdivisions: int = 2, center=(0.0, 0.0, 0.0)) -> TriMesh:
    """Sphere mesh from a subdivided icosahedron."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
            [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
            [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
        ],
        dtype=float,
    )
    verts /= np.linalg.norm(verts[0])
    tris = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ]
    )

    for _ in range(subdivisions):
        verts_list = [tuple(v) for v in verts]
        index = {v: i for i, v in enumerate(verts_list)}

        def midpoint(i, j):
            mid = (verts[i] + verts[j]) / 2.0
            mid = tuple(mid / np.linalg.norm(mid))
            if mid not in index:
                index[mid] = len(verts_list)
                verts_list.append(mid)
            return index[mid]

        new_tris = []
        for a, b, c in tris:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_tris.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]])
        verts = np.array(verts_list)
        tris = np.array(new_tris)

    verts = verts * radius + np.asarray(center, dtype=float)
    return TriMesh(verts, tris)
