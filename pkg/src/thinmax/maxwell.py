"""Lowest-order Nedelec (Whitney edge) elements for curl curl E = lambda E, n x E = 0.

Basis on the edge (a, b): ``W_ab = phi_a grad phi_b - phi_b grad phi_a`` with
``curl W_ab = 2 grad phi_a x grad phi_b``.  Perfect-conductor conditions are
imposed by dropping every edge that lies in a boundary face.  The gradient
kernel is not deflated: it is computed with the dense solver and counted.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .eigen import EigenError, SolveOptions, solve_lowest
from .mesh import MeshError
from .tube import LOCAL_EDGES, TetMesh

__all__ = [
    "EdgeDofMap",
    "MaxwellResult",
    "barycentric_gradients",
    "local_matrices",
    "assemble_nedelec",
    "gradient_matrix",
    "solve_maxwell",
    "weak_divergence_residual",
    "eigenmode_interpolate_reference",
    "maxwell_csv",
]


@dataclass
class EdgeDofMap:
    free_edges: np.ndarray
    dof_of_edge: np.ndarray  # -1 for eliminated (boundary) edges
    signs: np.ndarray  # (T, 6) orientation of local vs global edge

    @property
    def n_dofs(self) -> int:
        return len(self.free_edges)


@dataclass
class MaxwellResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # free-DOF coefficients, M-orthonormal columns
    kernel_dim: int
    residuals: np.ndarray
    div_residuals: np.ndarray
    n_dofs: int
    zero_cutoff: float
    extra: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.eigenvalues)


def barycentric_gradients(mesh: TetMesh) -> np.ndarray:
    """Gradients of the four barycentric coordinates on each tet, shape (T, 4, 3)."""
    p = mesh.vertices[mesh.tets]
    J = p[:, 1:] - p[:, :1]  # rows p_i - p_0
    Jinv = np.linalg.inv(J)
    g = np.empty((len(p), 4, 3))
    g[:, 1:] = np.transpose(Jinv, (0, 2, 1))
    g[:, 0] = -g[:, 1:].sum(axis=1)
    return g


def local_matrices(mesh: TetMesh):
    """Element curl-curl and mass matrices, shape (T, 6, 6), in local edge orientation."""
    G = barycentric_gradients(mesh)
    vol = mesh.tet_volumes
    gg = np.einsum("tai,tbi->tab", G, G)
    # integral of phi_a phi_b over a tet, divided by its volume
    I = (np.ones((4, 4)) + np.eye(4)) / 20.0
    i, j = LOCAL_EDGES[:, 0], LOCAL_EDGES[:, 1]
    ii, jj = i[:, None], j[:, None]
    mm, nn = i[None, :], j[None, :]
    M = (
        I[ii, mm] * gg[:, jj, nn]
        - I[ii, nn] * gg[:, jj, mm]
        - I[jj, mm] * gg[:, ii, nn]
        + I[jj, nn] * gg[:, ii, mm]
    ) * vol[:, None, None]
    curls = 2.0 * np.cross(G[:, i], G[:, j])  # (T, 6, 3)
    K = np.einsum("tki,tli->tkl", curls, curls) * vol[:, None, None]
    return K, M


def _assemble(mesh, local, dofmap):
    s = dofmap.signs
    vals = local * s[:, :, None] * s[:, None, :]
    dof = dofmap.dof_of_edge[mesh.tet_edges]
    r = np.broadcast_to(dof[:, :, None], vals.shape)
    c = np.broadcast_to(dof[:, None, :], vals.shape)
    keep = (r >= 0) & (c >= 0)
    n = dofmap.n_dofs
    return sp.coo_matrix((vals[keep], (r[keep], c[keep])), shape=(n, n)).tocsr()


def assemble_nedelec(mesh: TetMesh, eliminate_boundary: bool = True):
    """Global stiffness, mass and DOF map on the free (non-boundary) edges."""
    if eliminate_boundary:
        free = np.nonzero(~mesh.boundary_edge_flags)[0]
    else:
        free = np.arange(mesh.n_edges)
    dof_of_edge = -np.ones(mesh.n_edges, dtype=np.int64)
    dof_of_edge[free] = np.arange(len(free))
    dofmap = EdgeDofMap(free, dof_of_edge, mesh.tet_edge_signs)
    Kloc, Mloc = local_matrices(mesh)
    K = _assemble(mesh, Kloc, dofmap)
    M = _assemble(mesh, Mloc, dofmap)
    # remove rounding asymmetry from the COO sum
    K = (K + K.T) * 0.5
    M = (M + M.T) * 0.5
    return K.tocsr(), M.tocsr(), dofmap


def gradient_matrix(mesh: TetMesh, dofmap: EdgeDofMap, vertices=None) -> sp.csr_matrix:
    """Edge interpolants of hat-function gradients, one column per vertex.

    Defaults to the interior vertices, whose gradients satisfy the
    boundary condition and span the discrete kernel on simply connected
    meshes.
    """
    if vertices is None:
        vertices = mesh.interior_vertices
    vertices = np.asarray(vertices)
    col_of = -np.ones(mesh.n_vertices, dtype=np.int64)
    col_of[vertices] = np.arange(len(vertices))
    e = mesh.edges[dofmap.free_edges]
    rows = np.concatenate([np.arange(len(e)), np.arange(len(e))])
    cols = np.concatenate([col_of[e[:, 1]], col_of[e[:, 0]]])
    vals = np.concatenate([np.ones(len(e)), -np.ones(len(e))])
    keep = cols >= 0
    return sp.coo_matrix(
        (vals[keep], (rows[keep], cols[keep])), shape=(dofmap.n_dofs, len(vertices))
    ).tocsr()


def weak_divergence_residual(mesh: TetMesh, M, dofmap: EdgeDofMap, u) -> float:
    """``max_v |u^T M g_v| / (||u||_M ||g_v||_M)`` over interior vertices ``v``."""
    G = gradient_matrix(mesh, dofmap)
    if G.shape[1] == 0:
        return 0.0
    u = np.asarray(u, dtype=float)
    Mu = M @ u
    unorm = np.sqrt(u @ Mu)
    if unorm == 0:
        raise ValueError("zero vector has no divergence residual")
    gnorm = np.sqrt(np.asarray((G.multiply(M @ G)).sum(axis=0)).ravel())
    return float(np.max(np.abs(G.T @ Mu) / (unorm * gnorm)))


def solve_maxwell(mesh: TetMesh, count: int, opts: SolveOptions | None = None) -> MaxwellResult:
    """The ``count`` smallest non-zero Maxwell eigenpairs and the kernel dimension."""
    opts = opts or SolveOptions()
    K, M, dofmap = assemble_nedelec(mesh)
    n = dofmap.n_dofs
    if opts.mode == "dense":
        res = solve_lowest(K, M, n, opts)
    else:
        res = solve_lowest(K, M, min(count + 1, n - 1), opts)
    nonzero = np.nonzero(res.eigenvalues >= res.zero_cutoff)[0]
    if len(nonzero) < count:
        raise EigenError(f"only {len(nonzero)} non-zero eigenvalues available, {count} requested")
    pick = nonzero[:count]
    lam = res.eigenvalues[pick]
    U = res.eigenvectors[:, pick]
    G = gradient_matrix(mesh, dofmap)
    if G.shape[1]:
        MU = M @ U
        unorm = np.sqrt(np.einsum("ij,ij->j", U, MU))
        gnorm = np.sqrt(np.asarray(G.multiply(M @ G).sum(axis=0)).ravel())
        div = np.max(np.abs(G.T @ MU) / gnorm[:, None], axis=0) / unorm
    else:
        div = np.zeros(count)
    return MaxwellResult(
        lam, U, res.kernel_dim, res.residuals[pick], div, n, res.zero_cutoff,
        extra={"K": K, "M": M, "dofmap": dofmap},
    )


def eigenmode_interpolate_reference(mesh: TetMesh, w, h: float | None = None,
                                    dofmap: EdgeDofMap | None = None) -> np.ndarray:
    """Edge interpolant of the 1-form ``h^{-1/2} w dt`` on an extruded tube.

    ``t`` is the layer coordinate of the extrusion (``i h / layers`` on layer
    ``i``, linear inside each tet), i.e. the discrete Fermi height, so the
    1-form is exactly ``h^{-1/2} w(x) nu(x) . dx`` in the continuum limit.
    ``w`` holds values at the base vertices and is constant along the
    layers.  Line integrals use 2-point Gauss quadrature along each edge.
    Returns free-DOF coefficients.
    """
    if not mesh.is_extrusion:
        raise MeshError("reference modes need a mesh produced by extrude()")
    if h is None:
        h = mesh.params.h
    w = np.asarray(w, dtype=float)
    V = mesh.base.n_vertices
    if w.shape != (V,):
        raise ValueError(f"w must have one value per base vertex ({V})")
    if dofmap is None:
        free = np.nonzero(~mesh.boundary_edge_flags)[0]
    else:
        free = dofmap.free_edges
    e = mesh.edges[free]
    vp, vq = e[:, 0] % V, e[:, 1] % V
    layer_h = mesh.params.h / mesh.params.layers
    dt = (e[:, 1] // V - e[:, 0] // V) * layer_h
    total = np.zeros(len(e))
    for s in (0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)):
        total += 0.5 * ((1 - s) * w[vp] + s * w[vq]) * dt
    return total / np.sqrt(h)


def maxwell_csv(result: MaxwellResult) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["index", "lambda", "residual", "div_residual"])
    for i, (lam, r, dv) in enumerate(zip(result.eigenvalues, result.residuals, result.div_residuals), 1):
        wr.writerow([i, f"{lam:.12g}", f"{r:.3e}", f"{dv:.3e}"])
    return buf.getvalue()
