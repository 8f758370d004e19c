import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from thinmax.eigen import SolveOptions
from thinmax.maxwell import (
    assemble_nedelec,
    eigenmode_interpolate_reference,
    gradient_matrix,
    local_matrices,
    maxwell_csv,
    solve_maxwell,
    weak_divergence_residual,
)
from thinmax.mesh import MeshError, icosphere, rectangle, square_with_hole
from thinmax.surface import assemble_p1
from thinmax.surface import solve as surface_solve
from thinmax.tube import LOCAL_EDGES, TetMesh, TubeParams, box_mesh, extrude

PI2 = math.pi**2
TET = [[0, 0, 0], [2, 0, 0], [sympy.Rational(1, 2), 1, 0], [sympy.Rational(1, 3), sympy.Rational(1, 4), 3]]


def _symbolic_whitney(pts):
    """Exact Whitney mass and curl-curl matrices on one tet via the affine map."""
    xi = sympy.symbols("x1:4")
    P = sympy.Matrix(pts)
    J = (P[1:, :] - sympy.ones(3, 1) * P[0, :]).T  # columns p_i - p_0
    detJ = J.det()
    lam = [1 - sum(xi)] + list(xi)
    # gradients are constant: rows of (J^{-1}) give d(xi)/dx
    Jinv = J.inv()
    grad = [-(Jinv[0, :] + Jinv[1, :] + Jinv[2, :])] + [Jinv[k, :] for k in range(3)]
    phis, curls = [], []
    for i, j in LOCAL_EDGES.tolist():
        phis.append(lam[i] * grad[j] - lam[j] * grad[i])
        curls.append(2 * grad[i].cross(grad[j]))

    def integrate(f):
        f = sympy.integrate(f, (xi[2], 0, 1 - xi[0] - xi[1]))
        f = sympy.integrate(f, (xi[1], 0, 1 - xi[0]))
        return sympy.integrate(f, (xi[0], 0, 1)) * abs(detJ)

    vol = abs(detJ) / 6
    M = sympy.Matrix(6, 6, lambda a, b: integrate(phis[a].dot(phis[b])))
    K = sympy.Matrix(6, 6, lambda a, b: curls[a].dot(curls[b]) * vol)
    return np.array(K.evalf(), dtype=float), np.array(M.evalf(), dtype=float)


@pytest.fixture(scope="module")
def symbolic_tet():
    return _symbolic_whitney(TET)


def test_local_matrices_against_sympy(symbolic_tet):
    Ks, Ms = symbolic_tet
    pts = np.array([[float(c) for c in p] for p in TET])
    mesh = TetMesh(pts, [[0, 1, 2, 3]])
    K, M = local_matrices(mesh)
    np.testing.assert_allclose(K[0], Ks, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(M[0], Ms, rtol=1e-12, atol=1e-12)


def test_local_mass_spd():
    _, M = local_matrices(box_mesh(2))
    assert np.all(np.linalg.eigvalsh(M) > 0)


def test_single_tet_all_boundary():
    mesh = TetMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], [[0, 1, 2, 3]])
    K, M, dofmap = assemble_nedelec(mesh)
    assert dofmap.n_dofs == 0 and K.shape == (0, 0)


def test_dof_count():
    mesh = box_mesh(3)
    _, _, dofmap = assemble_nedelec(mesh)
    assert dofmap.n_dofs == mesh.n_edges - int(mesh.boundary_edge_flags.sum())


@pytest.mark.parametrize("make", [lambda: box_mesh(3), lambda: extrude(icosphere(1), TubeParams(0.2, 2))])
def test_gradients_in_kernel(make):
    mesh = make()
    K, M, dofmap = assemble_nedelec(mesh)
    G = gradient_matrix(mesh, dofmap)
    KG = K @ G
    assert abs(KG).max() <= 1e-10 * abs(K).max()


def test_cube_lowest_triplet():
    mesh = box_mesh(6, (math.pi, math.pi, math.pi))
    res = solve_maxwell(mesh, 6)
    np.testing.assert_allclose(res.eigenvalues[:3], 2.0, rtol=0.05)
    assert res.eigenvalues[3] > 2.5  # exactly three in the first cluster
    assert res.kernel_dim == len(mesh.interior_vertices)
    assert np.all(res.div_residuals <= 1e-5)
    assert np.all(res.residuals <= 1e-8)


def test_spurious_free_box():
    # a box of side 1 has no non-zero eigenvalue below 2 pi^2
    res = solve_maxwell(box_mesh(4), 1)
    assert res.eigenvalues[0] > 1.5 * PI2


def test_divergence_residual():
    mesh = box_mesh(3)
    K, M, dofmap = assemble_nedelec(mesh)
    G = gradient_matrix(mesh, dofmap)
    # a pure gradient is as far from divergence free as possible
    g = G[:, 0].toarray().ravel()
    assert weak_divergence_residual(mesh, M, dofmap, g) == pytest.approx(1.0, rel=1e-12)
    res = solve_maxwell(mesh, 3)
    for k in range(3):
        assert weak_divergence_residual(mesh, M, dofmap, res.eigenvectors[:, k]) <= 1e-8
    with pytest.raises(ValueError):
        weak_divergence_residual(mesh, M, dofmap, np.zeros(dofmap.n_dofs))


def test_tet_orientation_invariance():
    mesh = box_mesh(3)
    a = solve_maxwell(mesh, 6).eigenvalues
    flipped = mesh.tets[:, [1, 0, 3, 2]]  # even permutation keeps positive volume
    b = solve_maxwell(TetMesh(mesh.vertices, flipped), 6).eigenvalues
    np.testing.assert_allclose(a, b, rtol=1e-10)


@settings(max_examples=5, deadline=None)
@given(st.randoms(use_true_random=False))
def test_vertex_relabel_invariance(rnd):
    mesh = box_mesh(2)
    perm = list(range(mesh.n_vertices))
    rnd.shuffle(perm)
    perm = np.array(perm)
    inv = np.argsort(perm)
    relabeled = TetMesh(mesh.vertices[perm], inv[mesh.tets])
    a = solve_maxwell(mesh, 4).eigenvalues
    b = solve_maxwell(relabeled, 4).eigenvalues
    np.testing.assert_allclose(a, b, rtol=1e-10)


def test_reference_flat_constant():
    h = 0.1
    tube = extrude(rectangle(1, 1, 3), TubeParams(h, 2))
    K, M, dofmap = assemble_nedelec(tube)
    w = np.ones(tube.base.n_vertices)
    u = eigenmode_interpolate_reference(tube, w, dofmap=dofmap)
    e = tube.edges[dofmap.free_edges]
    V = tube.base.n_vertices
    dz = tube.vertices[e[:, 1], 2] - tube.vertices[e[:, 0], 2]
    layer_step = e[:, 1] // V - e[:, 0] // V
    np.testing.assert_allclose(u[layer_step == 0], 0.0, atol=0)
    np.testing.assert_allclose(u, dz / math.sqrt(h), rtol=1e-12, atol=1e-15)


def test_reference_constant_is_curl_free_on_sphere():
    tube = extrude(icosphere(2), TubeParams(0.1, 2))
    K, M, dofmap = assemble_nedelec(tube)
    u = eigenmode_interpolate_reference(tube, np.ones(tube.base.n_vertices), dofmap=dofmap)
    e = tube.edges[dofmap.free_edges]
    V = tube.base.n_vertices
    assert np.all(u[(e[:, 1] // V) == (e[:, 0] // V)] == 0)
    # dt is exact, so the curl vanishes identically
    assert abs(u @ (K @ u)) < 1e-12 * (u @ (M @ u))


def test_reference_normalised():
    # h^{-1/2} w dt with ||w||_{L2(S)} = 1 has unit norm on the tube
    m = rectangle(1, 1, 24)
    sp = surface_solve(m, "dirichlet", count=1)
    w = sp.eigenfunctions[:, 0]
    _, Ms = assemble_p1(m)
    w = w / math.sqrt(w @ (Ms @ w))
    tube = extrude(m, TubeParams(0.1, 1))
    K, M, dofmap = assemble_nedelec(tube)
    u = eigenmode_interpolate_reference(tube, w, dofmap=dofmap)
    assert u @ (M @ u) == pytest.approx(1.0, rel=0.05)


def test_reference_errors():
    with pytest.raises(MeshError):
        eigenmode_interpolate_reference(box_mesh(2), np.ones(27))
    tube = extrude(rectangle(1, 1, 2), TubeParams(0.1))
    with pytest.raises(ValueError):
        eigenmode_interpolate_reference(tube, np.ones(3))


def test_closed_tube_kernel_counts_cohomology():
    # a shell around a sphere has one harmonic field besides the gradients
    tube = extrude(icosphere(1), TubeParams(0.2, 2))
    res = solve_maxwell(tube, 1)
    assert res.kernel_dim == len(tube.interior_vertices) + 1


def test_annulus_tube_has_small_tem_mode():
    tube = extrude(square_with_hole(1, 0.2, 2), TubeParams(1.0, 4))
    res = solve_maxwell(tube, 1)
    assert res.eigenvalues[0] < 0.98 * PI2 * 1.0  # below the square-tube floor 2 pi^2
    assert res.eigenvalues[0] > 0.8 * PI2


def test_shift_invert_matches_dense():
    mesh = box_mesh(4)
    dense = solve_maxwell(mesh, 4).eigenvalues
    sparse = solve_maxwell(mesh, 4, SolveOptions(mode="shift_invert", sigma=18.0)).eigenvalues
    np.testing.assert_allclose(dense, sparse, rtol=1e-8)


def test_maxwell_csv():
    res = solve_maxwell(box_mesh(3), 2)
    lines = maxwell_csv(res).splitlines()
    assert lines[0] == "index,lambda,residual,div_residual" and len(lines) == 3
