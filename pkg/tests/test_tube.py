import math

import numpy as np
import pytest

from thinmax.mesh import MeshError, icosphere, rectangle, flat_torus, square_with_hole
from thinmax.tube import (
    LOCAL_EDGES,
    TetMesh,
    TubeParams,
    box_mesh,
    extrude,
    load_tetmesh,
    save_tetmesh,
    volume,
)


def test_params_validation():
    with pytest.raises(MeshError):
        TubeParams(0.0)
    with pytest.raises(MeshError):
        TubeParams(0.1, layers=0)


@pytest.mark.parametrize("layers", [1, 3])
def test_flat_tube_volume(layers):
    tube = extrude(rectangle(1.0, 1.0, 4), TubeParams(0.1, layers))
    assert volume(tube) == pytest.approx(0.1, rel=1e-12)
    assert tube.n_vertices == 25 * (layers + 1)
    assert tube.n_tets == 2 * 16 * 3 * layers


def test_sphere_shell_volume():
    # shell volume 4/3 pi ((1+h)^3 - 1); the inscribed polyhedron loses a little
    h = 0.1
    tube = extrude(icosphere(3), TubeParams(h, 1))
    exact = 4 / 3 * math.pi * ((1 + h) ** 3 - 1)
    assert volume(tube) == pytest.approx(exact, rel=0.02)


def test_conforming_faces():
    tube = extrude(square_with_hole(1.0, 0.2, 2), TubeParams(0.2, 2))
    # every interior face shared by exactly two tets: 4T = 2 F_int + F_bnd
    assert 4 * tube.n_tets == 2 * tube.n_interior_faces + tube.boundary_face_count


def test_inverted_tube_rejected():
    with pytest.raises(MeshError, match="inverted"):
        extrude(icosphere(2).flipped(), TubeParams(5.0))
    extrude(icosphere(2), TubeParams(5.0))  # outward offset is always admissible


def test_intrinsic_surface_rejected():
    with pytest.raises(MeshError):
        extrude(flat_torus(4), TubeParams(0.1))


def test_edge_orientation_signs():
    tube = extrude(rectangle(1.0, 1.0, 2), TubeParams(0.3))
    a = tube.tets[:, LOCAL_EDGES[:, 0]]
    b = tube.tets[:, LOCAL_EDGES[:, 1]]
    e = tube.edges[tube.tet_edges]
    assert np.all(np.minimum(a, b) == e[..., 0])
    assert np.all(np.maximum(a, b) == e[..., 1])
    assert np.all((tube.tet_edge_signs > 0) == (a < b))


def test_closed_surface_tube_boundary():
    tube = extrude(icosphere(1), TubeParams(0.1))
    # inner and outer sphere: each base face appears twice on the boundary
    assert tube.boundary_face_count == 2 * icosphere(1).n_faces
    assert len(tube.interior_vertices) == 0
    tube2 = extrude(icosphere(1), TubeParams(0.1, 2))
    assert len(tube2.interior_vertices) == icosphere(1).n_vertices


def test_box_counts():
    n = 4
    box = box_mesh(n)
    assert box.n_vertices == (n + 1) ** 3
    assert box.n_tets == 6 * n**3
    assert volume(box) == pytest.approx(1.0, rel=1e-12)
    assert len(box.interior_vertices) == (n - 1) ** 3
    assert box.boundary_face_count == 6 * 2 * n * n


def test_box_symmetry_even_n():
    # x <-> y reflection maps the mesh onto itself
    box = box_mesh(4)
    key = lambda v: np.round(v * 1000).astype(int).tolist()
    verts = {tuple(k): i for i, k in enumerate(key(box.vertices))}
    swapped = box.vertices[:, [1, 0, 2]]
    perm = np.array([verts[tuple(k)] for k in key(swapped)])
    tets = {tuple(sorted(t)) for t in box.tets.tolist()}
    mapped = {tuple(sorted(perm[t])) for t in box.tets.tolist()}
    assert tets == mapped


def test_degenerate_tet_rejected():
    with pytest.raises(MeshError):
        TetMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]], [[0, 1, 2, 3]])


def test_tetmesh_roundtrip(tmp_path):
    tube = extrude(square_with_hole(1.0, 0.2, 2), TubeParams(0.1, 2))
    p = tmp_path / "t.tetmesh"
    save_tetmesh(tube, p)
    back = load_tetmesh(p)
    np.testing.assert_array_equal(back.tets, tube.tets)
    np.testing.assert_array_equal(back.vertices, tube.vertices)
    assert back.n_edges == tube.n_edges


def test_tetmesh_malformed(tmp_path):
    p = tmp_path / "bad.tetmesh"
    p.write_text("vertices 4\n0 0 0\n")
    with pytest.raises(MeshError):
        load_tetmesh(p)
