"""P1 Laplace-Beltrami eigenpairs on triangle meshes.

Cotangent weights come from intrinsic edge lengths only, so embedded and
intrinsic meshes share one code path.  Obtuse triangles give negative
weights; they are kept as they are.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .eigen import SolveOptions, solve_lowest
from .mesh import MeshError, SurfaceMesh

__all__ = ["SurfaceSpectrum", "assemble_p1", "solve", "spectrum_csv", "BOUNDARY_CONDITIONS"]

BOUNDARY_CONDITIONS = ("closed", "dirichlet", "neumann")


def assemble_p1(mesh: SurfaceMesh, consistent_mass: bool = False):
    """Cotangent stiffness ``K`` and mass ``M`` (lumped barycentric by default).

    Returns
    -------
    K, M : scipy.sparse.csr_matrix
    """
    cl = mesh.corner_lengths
    area = mesh.face_areas()
    scale = mesh.edge_lengths.max()
    if np.any(area < 1e-14 * scale**2):
        raise MeshError(f"{int(np.sum(area < 1e-14 * scale**2))} degenerate triangles")
    t = mesh.triangles
    n = mesh.n_vertices
    sq = cl**2
    rows, cols, vals = [], [], []
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        # half the cotangent of the angle at corner i weights the opposite edge (j, k)
        w = (sq[:, j] + sq[:, k] - sq[:, i]) / (8.0 * area)
        a, b = t[:, j], t[:, k]
        rows += [a, b, a, b]
        cols += [b, a, a, b]
        vals += [-w, -w, w, w]
    K = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    if consistent_mass:
        mr, mc, mv = [], [], []
        for i in range(3):
            for j in range(3):
                mr.append(t[:, i])
                mc.append(t[:, j])
                mv.append(area / 12.0 * (2.0 if i == j else 1.0))
        M = sp.coo_matrix(
            (np.concatenate(mv), (np.concatenate(mr), np.concatenate(mc))), shape=(n, n)
        ).tocsr()
    else:
        lumped = np.zeros(n)
        np.add.at(lumped, t.ravel(), np.repeat(area / 3.0, 3))
        M = sp.diags(lumped).tocsr()
    return K, M


@dataclass
class SurfaceSpectrum:
    bc: str
    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray  # (V, N) per-vertex values, M-orthonormal
    mesh: SurfaceMesh
    cutoff: float | None = None
    consistent_mass: bool = False

    def __len__(self):
        return len(self.eigenvalues)


def solve(mesh: SurfaceMesh, bc: str, count: int | None = None, cutoff: float | None = None,
          consistent_mass: bool = False, opts: SolveOptions | None = None) -> SurfaceSpectrum:
    """Lowest Laplace-Beltrami eigenpairs with closed, Dirichlet or Neumann conditions.

    Give ``count`` (number of eigenpairs), ``cutoff`` (all eigenvalues up
    to the cutoff), or both; with both, the last computed eigenvalue must
    exceed the cutoff, otherwise the request is rejected.
    """
    if bc not in BOUNDARY_CONDITIONS:
        raise ValueError(f"unknown boundary condition {bc!r}")
    if count is None and cutoff is None:
        raise ValueError("give a count, a cutoff, or both")
    if bc == "closed" and not mesh.is_closed:
        raise MeshError("bc='closed' needs a surface without boundary")
    if bc != "closed" and mesh.is_closed:
        raise MeshError(f"bc={bc!r} needs a surface with boundary")

    K, M = assemble_p1(mesh, consistent_mass)
    n = mesh.n_vertices
    if bc == "dirichlet":
        free = np.setdiff1d(np.arange(n), mesh.boundary_vertices)
        K, M = K[free][:, free], M[free][:, free]
    else:
        free = np.arange(n)
    dim = len(free)
    if dim == 0:
        raise MeshError("no interior vertices for a Dirichlet problem")
    want = dim if count is None else min(count, dim)
    res = solve_lowest(K, M, want, opts)
    lam = res.eigenvalues
    if cutoff is not None:
        if lam[-1] <= cutoff:
            raise ValueError(
                f"cutoff {cutoff} not reached: largest computed eigenvalue is {lam[-1]:.6g}; increase N"
            )
        keep = lam <= cutoff
        lam = lam[keep]
        vecs = res.eigenvectors[:, keep]
    else:
        vecs = res.eigenvectors
    full = np.zeros((n, vecs.shape[1]))
    full[free] = vecs
    return SurfaceSpectrum(bc, lam.copy(), full, mesh, cutoff, consistent_mass)


def spectrum_csv(spec: SurfaceSpectrum) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "mu", "bc"])
    for i, mu in enumerate(spec.eigenvalues, start=1):
        w.writerow([i, f"{mu:.12g}", spec.bc])
    return buf.getvalue()
