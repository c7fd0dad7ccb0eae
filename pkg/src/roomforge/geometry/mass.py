"""Triangle meshes and uniform-density mass properties.

Inertia follows the uniform-density convention: density is the given mass
over the mesh volume, and the inertia tensor is the unit-density tensor of
the mesh scaled by that density.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidGeometryError

_DEGENERATE_FRACTION_TOL = 0.01


class TriMesh:
    """Indexed triangle mesh."""

    __slots__ = ("vertices", "triangles")

    def __init__(self, vertices: np.ndarray, triangles: np.ndarray):
        verts = np.asarray(vertices, dtype=float)
        tris = np.asarray(triangles, dtype=int)
        if verts.ndim != 2 or verts.shape[1] != 3:
            raise InvalidGeometryError("mesh vertices must be Nx3")
        if tris.ndim != 2 or tris.shape[1] != 3:
            raise InvalidGeometryError("mesh triangles must be Mx3 index triples")
        if not np.all(np.isfinite(verts)):
            raise InvalidGeometryError("mesh has non-finite vertices")
        if tris.size and (tris.min() < 0 or tris.max() >= len(verts)):
            raise InvalidGeometryError("triangle index out of range")
        a, b, c = verts[tris[:, 0]], verts[tris[:, 1]], verts[tris[:, 2]]
        areas = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
        if len(tris) and float(np.mean(areas < 1e-12)) > _DEGENERATE_FRACTION_TOL:
            raise InvalidGeometryError("too many zero-area triangles")
        self.vertices = verts
        self.triangles = tris

    def transformed(self, rotation: np.ndarray, translation: np.ndarray) -> "TriMesh":
        return TriMesh(self.vertices @ np.asarray(rotation).T + translation, self.triangles)


@dataclass(frozen=True)
class MassProperties:
    volume: float
    density: float
    com: np.ndarray
    inertia: np.ndarray  # About the center of mass, world-aligned axes.


def _face_integrals(verts: np.ndarray, tris: np.ndarray) -> np.ndarray:
    """Volume integrals of 1, x, y, z, x^2, y^2, z^2, xy, yz, zx over the solid."""

    def subexpr(w0, w1, w2):
        temp0 = w0 + w1
        f1 = temp0 + w2
        temp1 = w0 * w0
        temp2 = temp1 + w1 * temp0
        f2 = temp2 + w2 * f1
        f3 = w0 * temp1 + w1 * temp2 + w2 * f2
        g0 = f2 + w0 * (f1 + w0)
        g1 = f2 + w1 * (f1 + w1)
        g2 = f2 + w2 * (f1 + w2)
        return f1, f2, f3, g0, g1, g2

    p0 = verts[tris[:, 0]]
    p1 = verts[tris[:, 1]]
    p2 = verts[tris[:, 2]]
    d = np.cross(p1 - p0, p2 - p0)

    intg = np.zeros(10)
    fx = subexpr(p0[:, 0], p1[:, 0], p2[:, 0])
    fy = subexpr(p0[:, 1], p1[:, 1], p2[:, 1])
    fz = subexpr(p0[:, 2], p1[:, 2], p2[:, 2])
    intg[0] = np.sum(d[:, 0] * fx[0])
    intg[1] = np.sum(d[:, 0] * fx[1])
    intg[2] = np.sum(d[:, 1] * fy[1])
    intg[3] = np.sum(d[:, 2] * fz[1])
    intg[4] = np.sum(d[:, 0] * fx[2])
    intg[5] = np.sum(d[:, 1] * fy[2])
    intg[6] = np.sum(d[:, 2] * fz[2])
    intg[7] = np.sum(d[:, 0] * (p0[:, 1] * fx[3] + p1[:, 1] * fx[4] + p2[:, 1] * fx[5]))
    intg[8] = np.sum(d[:, 1] * (p0[:, 2] * fy[3] + p1[:, 2] * fy[4] + p2[:, 2] * fy[5]))
    intg[9] = np.sum(d[:, 2] * (p0[:, 0] * fz[3] + p1[:, 0] * fz[4] + p2[:, 0] * fz[5]))
    intg *= np.array([1 / 6, 1 / 24, 1 / 24, 1 / 24, 1 / 60, 1 / 60, 1 / 60, 1 / 120, 1 / 120, 1 / 120])
    return intg


def mesh_mass_properties(mesh: TriMesh, mass: float) -> MassProperties:
    """Volume, density, center of mass, and inertia of a watertight mesh.

    Args:
        mesh: Closed, outward-oriented triangle mesh.
        mass: Total mass in kilograms; must be positive.

    Returns:
        MassProperties with the inertia tensor taken about the center of
        mass in mesh axes.

    Raises:
        InvalidGeometryError: If the signed volume is not positive.
    """
    if mass <= 0.0:
        raise InvalidGeometryError("mass must be positive")
    intg = _face_integrals(mesh.vertices, mesh.triangles)
    volume = float(intg[0])
    if volume <= 0.0:
        raise InvalidGeometryError("mesh signed volume must be positive (check winding)")
    com = intg[1:4] / volume
    density = mass / volume

    # Unit-density inertia about the origin, then parallel-axis to the com.
    ixx = intg[5] + intg[6] - volume * (com[1] ** 2 + com[2] ** 2)
    iyy = intg[4] + intg[6] - volume * (com[0] ** 2 + com[2] ** 2)
    izz = intg[4] + intg[5] - volume * (com[0] ** 2 + com[1] ** 2)
    ixy = -(intg[7] - volume * com[0] * com[1])
    iyz = -(intg[8] - volume * com[1] * com[2])
    ixz = -(intg[9] - volume * com[2] * com[0])
    inertia = density * np.array([[ixx, ixy, ixz], [ixy, iyy, iyz], [ixz, iyz, izz]])
    return MassProperties(volume=volume, density=density, com=com, inertia=inertia)
