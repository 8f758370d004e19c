"""Tetrahedral meshes of tubes {x + t nu(x) : t in (0, h)} and of boxes."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .mesh import MeshError, SurfaceMesh, vertex_normals

__all__ = [
    "LOCAL_EDGES",
    "TetMesh",
    "TubeParams",
    "extrude",
    "volume",
    "box_mesh",
    "save_tetmesh",
    "load_tetmesh",
]

# local edge k of a tet joins local vertices LOCAL_EDGES[k]
LOCAL_EDGES = np.array([(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])


def _signed_volumes(vertices, tets):
    p = vertices[tets]
    return np.einsum(
        "ij,ij->i", p[:, 1] - p[:, 0], np.cross(p[:, 2] - p[:, 0], p[:, 3] - p[:, 0])
    ) / 6.0


@dataclass(frozen=True)
class TubeParams:
    h: float
    layers: int = 1

    def __post_init__(self):
        if not self.h > 0:
            raise MeshError("tube thickness h must be positive")
        if int(self.layers) != self.layers or self.layers < 1:
            raise MeshError("layers must be an integer >= 1")


class TetMesh:
    """Conforming mesh of positively oriented tetrahedra.

    Edges are stored once, oriented from the lower to the higher global
    vertex index.  ``tet_edges[t, k]`` is the global edge of local edge
    ``LOCAL_EDGES[k]`` and ``tet_edge_signs[t, k]`` is +1 when the local
    direction agrees with the global one.

    When the mesh comes from :func:`extrude`, ``base``, ``normals``,
    ``params`` describe the layer structure: vertex ``i * V + v`` is
    ``base.vertices[v] + (i / layers) * h * normals[v]``.
    """

    def __init__(self, vertices, tets, base=None, normals=None, params=None):
        self.vertices = np.asarray(vertices, dtype=float)
        self.tets = np.asarray(tets, dtype=np.int64).reshape(-1, 4)
        self.base = base
        self.normals = normals
        self.params = params

        vols = _signed_volumes(self.vertices, self.tets)
        scale = np.ptp(self.vertices, axis=0).max() if len(self.vertices) else 1.0
        if np.any(vols <= 1e-14 * scale**3):
            bad = int(np.sum(vols <= 1e-14 * scale**3))
            raise MeshError(f"{bad} tetrahedra with non-positive volume")
        self.tet_volumes = vols

        nv = len(self.vertices)
        a = self.tets[:, LOCAL_EDGES[:, 0]]
        b = self.tets[:, LOCAL_EDGES[:, 1]]
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        keys, inverse = np.unique((lo * nv + hi).ravel(), return_inverse=True)
        self.edges = np.column_stack([keys // nv, keys % nv])
        self.tet_edges = inverse.reshape(-1, 6)
        self.tet_edge_signs = np.where(a < b, 1.0, -1.0)

        faces = np.sort(self.tets[:, [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]]], axis=2).reshape(-1, 3)
        fkeys = (faces[:, 0] * nv + faces[:, 1]) * nv + faces[:, 2]
        ukeys, first, counts = np.unique(fkeys, return_index=True, return_counts=True)
        if np.any(counts > 2):
            raise MeshError("non-conforming mesh: face shared by more than two tets")
        self.n_interior_faces = int(np.sum(counts == 2))
        self.boundary_faces = faces[first[counts == 1]]
        self.boundary_face_count = len(self.boundary_faces)

        on_bnd = np.zeros(nv, dtype=bool)
        on_bnd[self.boundary_faces.ravel()] = True
        self.boundary_vertex_flags = on_bnd
        bf = self.boundary_faces
        be = np.concatenate([bf[:, [0, 1]], bf[:, [0, 2]], bf[:, [1, 2]]])
        bkeys = np.unique(be[:, 0] * nv + be[:, 1])
        self.boundary_edge_flags = np.isin(keys, bkeys)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_tets(self) -> int:
        return len(self.tets)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def interior_vertices(self) -> np.ndarray:
        return np.nonzero(~self.boundary_vertex_flags)[0]

    @property
    def is_extrusion(self) -> bool:
        return self.base is not None

    def __repr__(self):
        return (f"TetMesh(V={self.n_vertices}, T={self.n_tets}, E={self.n_edges}, "
                f"boundary_faces={self.boundary_face_count})")


def extrude(surface: SurfaceMesh, params: TubeParams) -> TetMesh:
    """Tetrahedralise the layered tube over an embedded surface.

    Each prism (triangle x layer) is split into three tets with every quad
    diagonal issued from the quad's lowest global vertex index, so
    neighbouring prisms always agree on shared faces.
    """
    if not surface.is_embedded:
        raise MeshError("extrusion needs an embedded surface")
    nu = vertex_normals(surface)
    V, L, h = surface.n_vertices, int(params.layers), float(params.h)
    verts = np.concatenate([surface.vertices + (i / L) * h * nu for i in range(L + 1)])

    tri = surface.triangles
    order = np.argsort(tri, axis=1, kind="stable")
    srt = np.take_along_axis(tri, order, axis=1)
    # parity of the sorting permutation decides whether (a, b, c) keeps the
    # face orientation (and hence the direction of nu)
    even = np.isin(order @ np.array([9, 3, 1]), (5, 15, 19))  # (0,1,2), (1,2,0), (2,0,1)
    tets = []
    for i in range(L):
        a, b, c = (srt[:, k] + i * V for k in range(3))
        A, B, C = a + V, b + V, c + V
        for tet in ((a, b, c, C), (a, b, C, B), (a, A, B, C)):
            t = np.column_stack(tet)
            t[~even] = t[~even][:, [1, 0, 2, 3]]
            tets.append(t)
    tets = np.concatenate(tets)
    vols = _signed_volumes(verts, tets)
    if np.any(vols <= 0):
        raise MeshError(
            f"extrusion produced {int(np.sum(vols <= 0))} inverted tets; "
            f"h = {h} exceeds the admissible thickness for this surface"
        )
    return TetMesh(verts, tets, base=surface, normals=nu, params=params)


def volume(mesh: TetMesh) -> float:
    return float(_signed_volumes(mesh.vertices, mesh.tets).sum())


def box_mesh(n, size=(1.0, 1.0, 1.0)) -> TetMesh:
    """``[0,a] x [0,b] x [0,c]`` with ``n`` cells per side, 6 tets per cell.

    Each cell gets the Kuhn split along its main diagonal, mirrored in every
    axis with the parity of the cell index.  The result is invariant under
    the full symmetry group of the cube when ``n`` is even, so degenerate
    cavity modes stay exactly degenerate.
    """
    if n < 1:
        raise MeshError("n must be >= 1")
    a, b, c = (float(s) for s in size)
    if min(a, b, c) <= 0:
        raise MeshError("box sides must be positive")
    g = np.arange(n + 1)
    I, J, K = np.meshgrid(g, g, g, indexing="ij")
    verts = np.column_stack([I.ravel() * a / n, J.ravel() * b / n, K.ravel() * c / n])

    def idx(i, j, k):
        return (i * (n + 1) + j) * (n + 1) + k

    cells = [x.ravel() for x in np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")]
    odd = [x % 2 for x in cells]
    unit = np.eye(3, dtype=np.int64)
    tets = []
    for perm in itertools.permutations(range(3)):
        corners = [np.zeros(3, dtype=np.int64), unit[perm[0]], unit[perm[0]] + unit[perm[1]],
                   np.ones(3, dtype=np.int64)]
        cols = []
        for p in corners:
            # mirror the local corner offset in axes where the cell index is odd
            off = [np.where(odd[ax] == 1, 1 - p[ax], p[ax]) for ax in range(3)]
            cols.append(idx(cells[0] + off[0], cells[1] + off[1], cells[2] + off[2]))
        tets.append(np.column_stack(cols))
    tets = np.concatenate(tets)
    vols = _signed_volumes(verts, tets)
    tets[vols < 0] = tets[vols < 0][:, [1, 0, 2, 3]]
    return TetMesh(verts, tets)


def save_tetmesh(mesh: TetMesh, path) -> None:
    """ASCII export: header, vertex table, tet table (0-based indices)."""
    lines = ["# thinmax tetmesh v1", f"vertices {mesh.n_vertices}"]
    lines += [f"{x!r} {y!r} {z!r}" for x, y, z in mesh.vertices.tolist()]
    lines.append(f"tets {mesh.n_tets}")
    lines += [" ".join(map(str, t)) for t in mesh.tets.tolist()]
    Path(path).write_text("\n".join(lines) + "\n")


def load_tetmesh(path) -> TetMesh:
    rows = [ln.split() for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    try:
        nv = int(rows[0][1])
        verts = np.array(rows[1:1 + nv], dtype=float)
        nt = int(rows[1 + nv][1])
        tets = np.array(rows[2 + nv:2 + nv + nt], dtype=np.int64)
    except (IndexError, ValueError) as exc:
        raise MeshError(f"{path}: malformed tetmesh file ({exc})") from exc
    return TetMesh(verts, tets)
