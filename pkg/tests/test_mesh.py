import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thinmax.mesh import (
    MeshError,
    Sphere,
    SurfaceMesh,
    dumbbell_chain,
    flat_torus,
    generate_builtin,
    icosahedron,
    icosphere,
    load_off,
    rectangle,
    refine,
    save_off,
    square_with_hole,
    topology,
    vertex_normals,
)


def write(tmp_path, text, name="m.off"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_single_triangle_off(tmp_path):
    p = write(tmp_path, "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n")
    m = load_off(p)
    assert m.n_vertices == 3 and m.n_faces == 1
    assert len(m.boundary_loops) == 1
    assert len(m.boundary_loops[0]) == 3


def test_icosahedron_off_roundtrip(tmp_path):
    ico = icosahedron()
    p = tmp_path / "ico.off"
    save_off(ico, p)
    m = load_off(p)
    t = topology(m)
    assert (m.n_vertices, m.n_edges, m.n_faces) == (12, 30, 20)
    assert t.euler_characteristic == 2 and t.boundary_component_count == 0
    np.testing.assert_allclose(m.vertices, ico.vertices, rtol=0, atol=0)


def test_non_manifold_edge(tmp_path):
    text = "OFF\n5 3 0\n0 0 0\n1 0 0\n0 1 0\n0 -1 0\n0 0 1\n3 0 1 2\n3 1 0 3\n3 0 1 4\n"
    with pytest.raises(MeshError, match="non-manifold"):
        load_off(write(tmp_path, text))


def test_off_rejects_quads(tmp_path):
    text = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n"
    with pytest.raises(MeshError, match="triangular"):
        load_off(write(tmp_path, text))


def test_off_reorients_inconsistent_faces(tmp_path):
    ico = icosahedron()
    tris = ico.triangles.copy()
    tris[3] = tris[3][[0, 2, 1]]
    lines = ["OFF", "12 20 0"] + [" ".join(map(repr, v)) for v in ico.vertices.tolist()]
    lines += ["3 " + " ".join(map(str, t)) for t in tris.tolist()]
    m = load_off(write(tmp_path, "\n".join(lines)))
    assert topology(m).genus == 0


def test_inconsistent_orientation_rejected_without_reorient():
    ico = icosahedron()
    tris = ico.triangles.copy()
    tris[0] = tris[0][[0, 2, 1]]
    with pytest.raises(MeshError):
        SurfaceMesh(tris, ico.vertices)


def test_triangle_inequality_intrinsic():
    with pytest.raises(MeshError, match="triangle inequality"):
        SurfaceMesh([[0, 1, 2]], None, [[1.0, 1.0, 3.0]])


@pytest.mark.parametrize("subdiv", [0, 1, 2])
def test_icosphere_topology(subdiv):
    m = icosphere(subdiv)
    t = topology(m)
    assert t.genus == 0 and t.is_closed
    assert np.all(m.edge_lengths > 0)
    np.testing.assert_allclose(np.linalg.norm(m.vertices, axis=1), 1.0, rtol=1e-12)


def test_flat_torus():
    m = flat_torus(8)
    t = topology(m)
    assert m.n_vertices == 64
    assert t.euler_characteristic == 0 and t.genus == 1 and t.b == 0
    assert not m.is_embedded
    assert m.area() == pytest.approx(1.0, rel=1e-12)


def test_square_with_hole_is_annulus():
    m = square_with_hole(1.0, 0.2, 3)
    t = topology(m)
    assert t.genus == 0 and t.boundary_component_count == 2 and t.b == 1
    assert m.area() == pytest.approx(1 - math.pi * 0.04, rel=0.03)


def test_rectangle_topology():
    t = topology(rectangle(2.0, 1.0, 4))
    assert (t.euler_characteristic, t.genus, t.boundary_component_count) == (1, 0, 1)
    assert t.harmonic_count == 0


@pytest.mark.parametrize("r", [0.3, 0.05])
def test_dumbbell_closed_genus0(r):
    m = dumbbell_chain(2, 1.0, r, 0.5, 8)
    t = topology(m)
    assert t.is_closed and t.genus == 0
    # outward orientation: enclosed volume by the divergence theorem is positive
    p = m.vertices[m.triangles]
    vol = np.einsum("ij,ij->i", p[:, 0], np.cross(p[:, 1], p[:, 2])).sum() / 6
    assert vol > 0


def test_dumbbell_parameter_errors():
    with pytest.raises(MeshError):
        dumbbell_chain(2, 1.0, 1.5, 0.5, 8)
    with pytest.raises(MeshError):
        dumbbell_chain(0, 1.0, 0.2, 0.5, 8)


def test_generate_builtin_dispatch():
    m = generate_builtin("flat-torus", n=4)
    assert m.n_vertices == 16
    with pytest.raises(MeshError):
        generate_builtin("klein_bottle")
    with pytest.raises(MeshError):
        generate_builtin("icosphere", bogus=1)


def test_refine_counts_and_identity():
    ico = icosahedron()
    assert refine(ico, 0) is ico
    m = refine(ico, 1, Sphere(1.0))
    assert m.n_vertices == 42
    assert topology(m).euler_characteristic == 2


@pytest.mark.parametrize("make", [
    lambda: square_with_hole(1.0, 0.2, 2),
    lambda: rectangle(1.0, 1.0, 3),
    lambda: flat_torus(4),
    lambda: icosphere(0),
    lambda: dumbbell_chain(2, 1.0, 0.3, 0.5, 8),
])
@pytest.mark.parametrize("rounds", [1, 2])
def test_refine_preserves_topology(make, rounds):
    m = make()
    assert topology(refine(m, rounds)) == topology(m)


def test_intrinsic_refine_matches_finer_grid():
    a = refine(flat_torus(4), 1)
    b = flat_torus(8)
    assert np.allclose(np.sort(a.edge_lengths), np.sort(b.edge_lengths))
    assert a.area() == pytest.approx(b.area(), rel=1e-12)


def test_vertex_normals_sphere():
    m = icosphere(2)
    nu = vertex_normals(m)
    ang = np.degrees(np.arccos(np.clip(np.einsum("ij,ij->i", nu, m.vertices), -1, 1)))
    assert ang.max() <= 2.0


def test_vertex_normals_flat_and_flip():
    m = rectangle(1.0, 1.0, 3)
    nu = vertex_normals(m)
    assert np.allclose(np.abs(nu[:, 2]), 1.0)
    assert np.allclose(vertex_normals(m.flipped()), -nu)


def test_vertex_normals_intrinsic_error():
    with pytest.raises(MeshError):
        vertex_normals(flat_torus(4))


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 10.0))
def test_scaled_lengths(t):
    m = icosphere(1)
    s = m.scaled(t)
    np.testing.assert_allclose(s.edge_lengths, t * m.edge_lengths, rtol=1e-12)
    assert topology(s) == topology(m)


@settings(max_examples=15, deadline=None)
@given(st.permutations(list(range(12))))
def test_relabel_vertices_keeps_topology(perm):
    ico = icosahedron()
    perm = np.asarray(perm)
    inv = np.argsort(perm)
    m = SurfaceMesh(inv[ico.triangles], ico.vertices[perm])
    assert topology(m) == topology(ico)
    assert m.area() == pytest.approx(ico.area(), rel=1e-12)
