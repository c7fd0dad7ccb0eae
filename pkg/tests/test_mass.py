import numpy as np
import pytest

from roomforge.errors import InvalidGeometryError
from roomforge.geometry import TriMesh, box_mesh, cylinder_mesh, icosphere_mesh, mesh_mass_properties


def test_unit_cube_analytic():
    props = mesh_mass_properties(box_mesh((1, 1, 1)), 2.0)
    assert abs(props.volume - 1.0) < 1e-12
    assert abs(props.density - 2.0) < 1e-12
    assert np.allclose(props.com, 0.0, atol=1e-12)
    assert np.allclose(np.diag(props.inertia), 2.0 * 2.0 / 12.0, atol=1e-12)
    off_diagonal = props.inertia - np.diag(np.diag(props.inertia))
    assert np.abs(off_diagonal).max() < 1e-12


def test_inertia_linear_in_mass():
    base = mesh_mass_properties(box_mesh((0.4, 0.7, 0.2)), 1.0)
    scaled = mesh_mass_properties(box_mesh((0.4, 0.7, 0.2)), 3.5)
    assert np.allclose(scaled.inertia, 3.5 * base.inertia, rtol=1e-12)


def test_icosphere_matches_solid_sphere():
    props = mesh_mass_properties(icosphere_mesh(0.5, 3), 1.0)
    expected = 0.4 * 1.0 * 0.5**2
    moments = np.linalg.eigvalsh(props.inertia)
    assert np.all(np.abs(moments - expected) / expected < 0.02)


def test_offset_box_com():
    props = mesh_mass_properties(box_mesh((1, 1, 1), center=(0.5, -0.25, 2.0)), 1.0)
    assert np.allclose(props.com, [0.5, -0.25, 2.0], atol=1e-12)
    # Parallel-axis back to the canonical inertia about the com.
    assert np.allclose(np.diag(props.inertia), 1.0 / 6.0, atol=1e-12)


def test_principal_moment_triangle_inequality():
    rng = np.random.default_rng(8)
    meshes = [
        box_mesh(rng.uniform(0.1, 2.0, 3)),
        cylinder_mesh(0.3, 1.4),
        icosphere_mesh(0.7, 2),
    ]
    for mesh in meshes:
        props = mesh_mass_properties(mesh, float(rng.uniform(0.5, 5.0)))
        eigenvalues = np.sort(np.linalg.eigvalsh(props.inertia))
        assert eigenvalues[2] <= eigenvalues[0] + eigenvalues[1] + 1e-12
        assert eigenvalues[0] > -1e-12


def test_inverted_mesh_rejected():
    mesh = box_mesh((1, 1, 1))
    flipped = TriMesh(mesh.vertices, mesh.triangles[:, ::-1])
    with pytest.raises(InvalidGeometryError):
        mesh_mass_properties(flipped, 1.0)


def test_non_positive_mass_rejected():
    with pytest.raises(InvalidGeometryError):
        mesh_mass_properties(box_mesh((1, 1, 1)), 0.0)
