"""Triangulated surfaces: representation, OFF I/O, builtin generators and topology.

A :class:`SurfaceMesh` always carries intrinsic edge lengths.  The 3D embedding
is optional so that surfaces without an isometric embedding in R^3 (the flat
torus) can still be fed to the Laplace-Beltrami solver and the spectrum
assembler.  Extrusion into a tube requires the embedding.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

__all__ = [
    "MeshError",
    "SurfaceMesh",
    "TopologyInfo",
    "Sphere",
    "load_off",
    "save_off",
    "topology",
    "vertex_normals",
    "refine",
    "icosahedron",
    "icosphere",
    "flat_torus",
    "rectangle",
    "square_with_hole",
    "dumbbell_chain",
    "generate_builtin",
    "BUILTIN_KINDS",
]


class MeshError(ValueError):
    """Raised for invalid meshes and invalid generator parameters."""


@dataclass(frozen=True)
class TopologyInfo:
    euler_characteristic: int
    genus: int
    boundary_component_count: int

    @property
    def b(self) -> int:
        """Number of boundary components minus one (0 for closed surfaces)."""
        return max(self.boundary_component_count - 1, 0)

    @property
    def is_closed(self) -> bool:
        return self.boundary_component_count == 0

    @property
    def harmonic_count(self) -> int:
        """Dimension of the (relative) harmonic 1-forms: 2g, or 2g + b with boundary."""
        return 2 * self.genus + self.b

    def to_dict(self) -> dict:
        return {
            "euler_characteristic": self.euler_characteristic,
            "genus": self.genus,
            "boundary_component_count": self.boundary_component_count,
            "b": self.b,
        }


class SurfaceMesh:
    """Connected, consistently oriented triangle mesh of a 2-manifold.

    Parameters
    ----------
    triangles : array_like, shape (F, 3)
        Vertex indices of each face.
    vertices : array_like, shape (V, 3), optional
        Embedding.  ``None`` gives an intrinsic-only mesh; then
        ``corner_lengths`` is required.
    corner_lengths : array_like, shape (F, 3), optional
        Length of the edge opposite each corner.  Ignored when ``vertices``
        is given (lengths are derived from the coordinates).
    reorient : bool
        Flip faces to obtain a consistent orientation when the input is
        orientable but inconsistently wound.  The orientation of face 0 is
        kept.

    Attributes
    ----------
    edges : ndarray, shape (E, 2)
        Undirected edges, each stored once with ``edges[:, 0] < edges[:, 1]``.
    tri_edges : ndarray, shape (F, 3)
        ``tri_edges[f, i]`` is the edge opposite corner ``i`` of face ``f``.
    edge_lengths : ndarray, shape (E,)
    boundary_loops : list of ndarray
        Closed vertex cycles, traversed along the face orientation.
    """

    def __init__(self, triangles, vertices=None, corner_lengths=None, reorient=False):
        tris = np.array(triangles, dtype=np.int64).reshape(-1, 3)
        if tris.shape[0] == 0:
            raise MeshError("mesh has no triangles")
        if vertices is not None:
            verts = np.array(vertices, dtype=float)
            if verts.ndim != 2 or verts.shape[1] != 3:
                raise MeshError("vertices must have shape (V, 3)")
            n_vertices = verts.shape[0]
        else:
            verts = None
            if corner_lengths is None:
                raise MeshError("intrinsic mesh requires corner_lengths")
            n_vertices = int(tris.max()) + 1
        if tris.min() < 0 or tris.max() >= n_vertices:
            raise MeshError("triangle index out of range")
        if np.any((tris[:, 0] == tris[:, 1]) | (tris[:, 1] == tris[:, 2]) | (tris[:, 0] == tris[:, 2])):
            raise MeshError("triangle with repeated vertex")

        self.vertices = verts
        self.n_vertices = n_vertices
        self._build_edges(tris)
        if reorient:
            tris = self._reorient(tris)
            self._build_edges(tris)
        self._check_orientation(tris)
        self.triangles = tris
        self._check_connected()

        if verts is not None:
            a, b = self.edges[:, 0], self.edges[:, 1]
            self.edge_lengths = np.linalg.norm(verts[b] - verts[a], axis=1)
        else:
            cl = np.asarray(corner_lengths, dtype=float).reshape(-1, 3)
            if cl.shape != tris.shape:
                raise MeshError("corner_lengths must have shape (F, 3)")
            lengths = np.zeros(len(self.edges))
            lengths[self.tri_edges.ravel()] = cl.ravel()
            if not np.allclose(lengths[self.tri_edges], cl, rtol=1e-12, atol=0.0):
                raise MeshError("inconsistent lengths for a shared edge")
            self.edge_lengths = lengths
        if np.any(self.edge_lengths <= 0):
            raise MeshError("non-positive edge length")
        cl = self.corner_lengths
        s = cl.sum(axis=1, keepdims=True)
        if np.any(s - 2 * cl <= 0):
            raise MeshError("triangle inequality violated")
        self.boundary_loops = self._trace_boundary()

    # -- construction helpers -------------------------------------------------

    def _build_edges(self, tris):
        # half-edge opposite corner i runs from corner i+1 to corner i+2
        start = tris[:, [1, 2, 0]]
        end = tris[:, [2, 0, 1]]
        lo = np.minimum(start, end).ravel()
        hi = np.maximum(start, end).ravel()
        keys = lo * self.n_vertices + hi
        uniq, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
        if np.any(counts > 2):
            raise MeshError("non-manifold edge (shared by more than 2 triangles)")
        self.edges = np.column_stack([uniq // self.n_vertices, uniq % self.n_vertices])
        self.tri_edges = inverse.reshape(-1, 3)
        self.edge_face_count = counts
        self._half_forward = (start < end)  # direction of each half-edge vs canonical

    def _reorient(self, tris):
        n_faces = tris.shape[0]
        # edge -> incident (face, forward) pairs
        incident = [[] for _ in range(len(self.edges))]
        for f in range(n_faces):
            for i in range(3):
                incident[self.tri_edges[f, i]].append((f, bool(self._half_forward[f, i])))
        flip = np.zeros(n_faces, dtype=bool)
        seen = np.zeros(n_faces, dtype=bool)
        faces_of_edge = incident
        for root in range(n_faces):
            if seen[root]:
                continue
            seen[root] = True
            queue = deque([root])
            while queue:
                f = queue.popleft()
                for i in range(3):
                    pair = faces_of_edge[self.tri_edges[f, i]]
                    if len(pair) != 2:
                        continue
                    (f0, d0), (f1, d1) = pair
                    g, dg, df = (f1, d1, d0) if f0 == f else (f0, d0, d1)
                    want_flip = flip[f] ^ (df == dg)
                    if not seen[g]:
                        seen[g] = True
                        flip[g] = want_flip
                        queue.append(g)
                    elif flip[g] != want_flip:
                        raise MeshError("surface is not orientable")
        out = tris.copy()
        out[flip] = out[flip][:, [0, 2, 1]]
        return out

    def _check_orientation(self, tris):
        fwd = np.zeros(len(self.edges), dtype=int)
        np.add.at(fwd, self.tri_edges.ravel(), self._half_forward.ravel().astype(int))
        interior = self.edge_face_count == 2
        if np.any(fwd[interior] != 1):
            raise MeshError("inconsistent triangle orientation (or non-orientable surface)")

    def _check_connected(self):
        used = np.zeros(self.n_vertices, dtype=bool)
        used[self.triangles.ravel()] = True
        if not used.all():
            raise MeshError("mesh has unreferenced vertices")
        graph = coo_matrix(
            (np.ones(len(self.edges)), (self.edges[:, 0], self.edges[:, 1])),
            shape=(self.n_vertices, self.n_vertices),
        )
        ncomp, _ = connected_components(graph, directed=False)
        if ncomp != 1:
            raise MeshError(f"mesh is disconnected ({ncomp} components)")

    def _trace_boundary(self):
        bnd = self.edge_face_count == 1
        if not bnd.any():
            return []
        f_idx, c_idx = np.nonzero(bnd[self.tri_edges])
        t = self.triangles
        starts = t[f_idx, (c_idx + 1) % 3]
        ends = t[f_idx, (c_idx + 2) % 3]
        nxt = {}
        for s, e in zip(starts.tolist(), ends.tolist()):
            if s in nxt:
                raise MeshError(f"non-manifold boundary vertex {s}")
            nxt[s] = e
        loops = []
        remaining = set(nxt)
        while remaining:
            v0 = min(remaining)
            loop = [v0]
            remaining.discard(v0)
            v = nxt[v0]
            while v != v0:
                loop.append(v)
                remaining.discard(v)
                v = nxt[v]
            loops.append(np.array(loop, dtype=np.int64))
        return loops

    # -- properties -------------------------------------------------------------

    @property
    def is_embedded(self) -> bool:
        return self.vertices is not None

    @property
    def is_closed(self) -> bool:
        return not self.boundary_loops

    @property
    def n_faces(self) -> int:
        return self.triangles.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def corner_lengths(self) -> np.ndarray:
        return self.edge_lengths[self.tri_edges]

    @property
    def boundary_vertices(self) -> np.ndarray:
        if not self.boundary_loops:
            return np.zeros(0, dtype=np.int64)
        return np.unique(np.concatenate(self.boundary_loops))

    @property
    def boundary_edge_mask(self) -> np.ndarray:
        return self.edge_face_count == 1

    def face_areas(self) -> np.ndarray:
        """Areas from intrinsic lengths (Heron, in the numerically stable form)."""
        l = np.sort(self.corner_lengths, axis=1)[:, ::-1]
        a, b, c = l[:, 0], l[:, 1], l[:, 2]
        prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
        return 0.25 * np.sqrt(np.maximum(prod, 0.0))

    def area(self) -> float:
        return float(self.face_areas().sum())

    def flipped(self) -> "SurfaceMesh":
        """Same surface with the global orientation reversed."""
        perm = [0, 2, 1]
        cl = None if self.is_embedded else self.corner_lengths[:, perm]
        return SurfaceMesh(self.triangles[:, perm], self.vertices, cl)

    def scaled(self, t: float) -> "SurfaceMesh":
        """Uniformly scale all lengths (and the embedding) by ``t``."""
        if t <= 0:
            raise MeshError("scale factor must be positive")
        if self.is_embedded:
            return SurfaceMesh(self.triangles, self.vertices * t)
        return SurfaceMesh(self.triangles, None, self.corner_lengths * t)

    def __repr__(self):
        kind = "embedded" if self.is_embedded else "intrinsic"
        return (
            f"SurfaceMesh(V={self.n_vertices}, E={self.n_edges}, F={self.n_faces}, "
            f"{kind}, boundary_loops={len(self.boundary_loops)})"
        )


# -- I/O ------------------------------------------------------------------------


def load_off(path) -> SurfaceMesh:
    """Read an ASCII OFF file with triangular faces."""
    text = Path(path).read_text()
    tokens = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            tokens.extend(line.split())
    if not tokens or not tokens[0].upper().endswith("OFF"):
        raise MeshError(f"{path}: missing OFF header")
    pos = 1
    try:
        nv, nf = int(tokens[pos]), int(tokens[pos + 1])
        pos += 3
        verts = np.array(tokens[pos:pos + 3 * nv], dtype=float).reshape(nv, 3)
        pos += 3 * nv
        tris = []
        for _ in range(nf):
            k = int(tokens[pos])
            if k != 3:
                raise MeshError(f"{path}: only triangular faces are supported (got {k}-gon)")
            tris.append([int(tokens[pos + 1]), int(tokens[pos + 2]), int(tokens[pos + 3])])
            pos += 4
    except (IndexError, ValueError) as exc:
        if isinstance(exc, MeshError):
            raise
        raise MeshError(f"{path}: malformed OFF file ({exc})") from exc
    return SurfaceMesh(tris, verts, reorient=True)


def save_off(mesh: SurfaceMesh, path) -> None:
    if not mesh.is_embedded:
        raise MeshError("OFF export requires an embedded mesh")
    lines = ["OFF", f"{mesh.n_vertices} {mesh.n_faces} {mesh.n_edges}"]
    lines += [f"{x!r} {y!r} {z!r}" for x, y, z in mesh.vertices.tolist()]
    lines += [f"3 {a} {b} {c}" for a, b, c in mesh.triangles.tolist()]
    Path(path).write_text("\n".join(lines) + "\n")


# -- topology and geometry ----------------------------------------------------


def topology(mesh: SurfaceMesh) -> TopologyInfo:
    chi = mesh.n_vertices - mesh.n_edges + mesh.n_faces
    nb = len(mesh.boundary_loops)
    twice_genus = 2 - chi - nb
    if twice_genus < 0 or twice_genus % 2:
        raise MeshError(f"invalid topology: chi={chi}, boundary components={nb}")
    return TopologyInfo(chi, twice_genus // 2, nb)


def vertex_normals(mesh: SurfaceMesh) -> np.ndarray:
    """Angle-weighted average of incident face normals, normalised."""
    if not mesh.is_embedded:
        raise MeshError("vertex normals need an embedded mesh")
    p = mesh.vertices[mesh.triangles]
    face_n = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    face_n /= np.linalg.norm(face_n, axis=1, keepdims=True)
    normals = np.zeros((mesh.n_vertices, 3))
    for i in range(3):
        u = p[:, (i + 1) % 3] - p[:, i]
        v = p[:, (i + 2) % 3] - p[:, i]
        cosang = np.einsum("ij,ij->i", u, v) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
        ang = np.arccos(np.clip(cosang, -1.0, 1.0))
        np.add.at(normals, mesh.triangles[:, i], ang[:, None] * face_n)
    return normals / np.linalg.norm(normals, axis=1, keepdims=True)


@dataclass(frozen=True)
class Sphere:
    """Analytic sphere used to project refined vertices."""

    radius: float = 1.0
    center: tuple = (0.0, 0.0, 0.0)

    def project(self, points):
        c = np.asarray(self.center, dtype=float)
        d = points - c
        return c + self.radius * d / np.linalg.norm(d, axis=1, keepdims=True)


def refine(mesh: SurfaceMesh, rounds: int = 1, project_to: Sphere | None = None) -> SurfaceMesh:
    """Midpoint (1 -> 4) subdivision, optionally projecting new vertices to a sphere."""
    if rounds < 0:
        raise MeshError("rounds must be >= 0")
    for _ in range(rounds):
        t = mesh.triangles
        nv = mesh.n_vertices
        m = nv + mesh.tri_edges  # m[:, i] = midpoint of edge opposite corner i
        a, b, c = t[:, 0], t[:, 1], t[:, 2]
        ma, mb, mc = m[:, 0], m[:, 1], m[:, 2]  # ma on bc, mb on ca, mc on ab
        new_t = np.concatenate([
            np.column_stack([a, mc, mb]),
            np.column_stack([mc, b, ma]),
            np.column_stack([mb, ma, c]),
            np.column_stack([mc, ma, mb]),
        ])
        if mesh.is_embedded:
            mids = 0.5 * (mesh.vertices[mesh.edges[:, 0]] + mesh.vertices[mesh.edges[:, 1]])
            if project_to is not None:
                mids = project_to.project(mids)
            mesh = SurfaceMesh(new_t, np.vstack([mesh.vertices, mids]))
        else:
            la, lb, lc = (0.5 * mesh.corner_lengths[:, i] for i in range(3))
            new_l = np.concatenate([
                np.column_stack([la, lb, lc]),
                np.column_stack([la, lb, lc]),
                np.column_stack([la, lb, lc]),
                np.column_stack([lc, la, lb]),
            ])
            mesh = SurfaceMesh(new_t, None, new_l)
    return mesh


# -- builtin generators -------------------------------------------------------


def icosahedron(radius: float = 1.0) -> SurfaceMesh:
    phi = (1 + math.sqrt(5)) / 2
    v = np.array([
        [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
        [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
        [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
    ], dtype=float)
    v *= radius / np.linalg.norm(v[0])
    f = [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ]
    return SurfaceMesh(f, v)


def icosphere(subdiv: int, radius: float = 1.0) -> SurfaceMesh:
    """Icosahedron refined ``subdiv`` times with projection; outward orientation."""
    if subdiv < 0:
        raise MeshError("subdiv must be >= 0")
    if radius <= 0:
        raise MeshError("radius must be positive")
    return refine(icosahedron(radius), subdiv, Sphere(radius))


def _grid_triangles(nx, ny, index):
    tris = []
    for i in range(nx):
        for j in range(ny):
            v00, v10 = index(i, j), index(i + 1, j)
            v01, v11 = index(i, j + 1), index(i + 1, j + 1)
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))
    return np.array(tris, dtype=np.int64)


def flat_torus(n: int, a: float = 1.0, b: float = 1.0) -> SurfaceMesh:
    """Periodic ``n x n`` grid on the ``a x b`` rectangle; intrinsic only."""
    if n < 3:
        raise MeshError("flat_torus needs n >= 3 to be a simplicial complex")
    if a <= 0 or b <= 0:
        raise MeshError("torus side lengths must be positive")
    tris = _grid_triangles(n, n, lambda i, j: (i % n) * n + (j % n))
    dx, dy = a / n, b / n
    dd = math.hypot(dx, dy)
    # (v00, v10, v11): opposite v00 is |v10 v11| = dy, opposite v10 is the diagonal, ...
    lower = [dy, dd, dx]
    upper = [dy, dx, dd]  # (v00, v11, v01)
    cl = np.array([lower, upper] * (n * n))
    return SurfaceMesh(tris, None, cl)


def rectangle(a: float, b: float, n: int) -> SurfaceMesh:
    """``[0, a] x [0, b]`` in the z = 0 plane, ``n x n`` cells split along one diagonal."""
    if n < 1:
        raise MeshError("n must be >= 1")
    if a <= 0 or b <= 0:
        raise MeshError("rectangle sides must be positive")
    xs, ys = np.linspace(0, a, n + 1), np.linspace(0, b, n + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    verts = np.column_stack([X.ravel(), Y.ravel(), np.zeros(X.size)])
    tris = _grid_triangles(n, n, lambda i, j: i * (n + 1) + j)
    return SurfaceMesh(tris, verts)


def square_with_hole(side: float, hole_radius: float, n: int) -> SurfaceMesh:
    """Square ``[0, side]^2`` minus a centred disk, meshed in a log-polar layout.

    The outer boundary carries ``n`` points per side; rings are spaced
    geometrically so cells stay close to square near the hole.
    """
    if n < 1:
        raise MeshError("n must be >= 1")
    if side <= 0 or hole_radius <= 0:
        raise MeshError("side and hole radius must be positive")
    if hole_radius >= side / 2:
        raise MeshError("hole radius must be smaller than side/2")
    m = 4 * max(n, 2)
    c = np.array([side / 2, side / 2])
    # outer boundary points, counter-clockwise, starting at the corner (side, 0)
    s = np.arange(m) / m * 4.0
    seg = np.floor(s).astype(int)
    frac = s - seg
    corners = np.array([[side, 0], [side, side], [0, side], [0, 0], [side, 0]], dtype=float)
    outer = corners[seg] + frac[:, None] * (corners[seg + 1] - corners[seg])
    d = outer - c
    dist = np.linalg.norm(d, axis=1)
    u = d / dist[:, None]
    ratio = float(np.mean(dist)) / hole_radius
    k = max(2, int(math.ceil(math.log(ratio) / (2 * math.pi / m))))
    pts = []
    for r in range(k + 1):
        rad = hole_radius * (dist / hole_radius) ** (r / k)
        pts.append(c + rad[:, None] * u)
    P = np.vstack(pts)
    verts = np.column_stack([P, np.zeros(len(P))])
    tris = []
    for r in range(k):
        for i in range(m):
            i1 = (i + 1) % m
            a0, a1 = r * m + i, r * m + i1
            b0, b1 = (r + 1) * m + i, (r + 1) * m + i1
            if (i + r) % 2 == 0:
                tris += [(a0, a1, b1), (a0, b1, b0)]
            else:
                tris += [(a0, a1, b0), (a1, b1, b0)]
    return SurfaceMesh(tris, verts)


def _sphere_rings(theta0, theta1, m):
    """Polar angles from theta0 to theta1 with Mercator-uniform spacing."""
    s0 = math.log(math.tan(theta0 / 2))
    s1 = math.log(math.tan(theta1 / 2))
    nr = max(2, int(math.ceil((s1 - s0) / (2 * math.pi / m))))
    s = np.linspace(s0, s1, nr + 1)
    return 2 * np.arctan(np.exp(s))


def dumbbell_chain(num_bulbs: int, bulb_radius: float, neck_radius: float,
                   neck_len: float, n: int) -> SurfaceMesh:
    """Closed genus-0 chain of spheres along the x axis joined by cylindrical necks.

    Every ring (on bulbs and necks) has ``max(8, n)`` vertices so the neck
    cylinders stitch directly onto the rims cut out of the spheres.
    """
    N, R, r, L = num_bulbs, bulb_radius, neck_radius, neck_len
    if N < 1 or n < 1:
        raise MeshError("num_bulbs and n must be >= 1")
    if min(R, r, L) <= 0:
        raise MeshError("radii and neck length must be positive")
    if r >= R:
        raise MeshError("neck radius must be smaller than bulb radius")
    m = max(8, n)
    theta0 = math.asin(r / R)
    phis = 2 * math.pi * np.arange(m) / m
    cosp, sinp = np.cos(phis), np.sin(phis)
    spacing = R * math.cos(theta0) * 2 + L

    verts = []
    rings = []  # list of vertex-index arrays along the chain (x increasing)
    poles = {}

    def add_ring(x, rad):
        idx = np.arange(len(verts), len(verts) + m)
        for cp, sp in zip(cosp, sinp):
            verts.append((x, rad * cp, rad * sp))
        rings.append(idx)

    for k in range(N):
        cx = k * spacing
        # theta measured from the -x axis, so x = cx - R cos(theta)
        lo = theta0 if k > 0 else None
        hi = math.pi - theta0 if k < N - 1 else None
        t_lo = lo if lo is not None else theta0
        t_hi = hi if hi is not None else math.pi - theta0
        thetas = _sphere_rings(t_lo, t_hi, m)
        if lo is None:
            poles[len(rings)] = ("start", len(verts))
            verts.append((cx - R, 0.0, 0.0))
        if k > 0:
            # neck from the previous bulb's rim to this bulb's rim
            x_prev = (k - 1) * spacing + R * math.cos(theta0)
            x_here = cx - R * math.cos(theta0)
            nn = max(1, int(math.ceil(L / (2 * math.pi * r / m))))
            for x in np.linspace(x_prev, x_here, nn + 1)[1:-1]:
                add_ring(x, r)
        for th in thetas:
            add_ring(cx - R * math.cos(th), R * math.sin(th))
        if hi is None:
            poles[len(rings) - 1] = ("end", len(verts))
            verts.append((cx + R, 0.0, 0.0))

    tris = []
    # rings are ordered by increasing x; with the ring parametrised by
    # (y, z) = rad * (cos phi, sin phi), (a0, a1, b1) has outward normal
    for ra, rb in zip(rings[:-1], rings[1:]):
        for i in range(m):
            i1 = (i + 1) % m
            a0, a1, b0, b1 = ra[i], ra[i1], rb[i], rb[i1]
            tris += [(a0, a1, b1), (a0, b1, b0)]
    for ring_pos, (kind, p) in poles.items():
        ring = rings[ring_pos]
        for i in range(m):
            i1 = (i + 1) % m
            if kind == "start":
                tris.append((p, ring[i1], ring[i]))
            else:
                tris.append((p, ring[i], ring[i1]))
    mesh = SurfaceMesh(tris, np.array(verts))
    return mesh


BUILTIN_KINDS = ("icosphere", "flat_torus", "rectangle", "square_with_hole", "dumbbell_chain")


def generate_builtin(kind: str, **params) -> SurfaceMesh:
    """Dispatch to a builtin generator by name (hyphens and underscores both accepted)."""
    kind = kind.replace("-", "_")
    gens = {
        "icosphere": icosphere,
        "flat_torus": flat_torus,
        "rectangle": rectangle,
        "square_with_hole": square_with_hole,
        "dumbbell_chain": dumbbell_chain,
    }
    if kind not in gens:
        raise MeshError(f"unknown builtin surface {kind!r}; choose from {', '.join(BUILTIN_KINDS)}")
    try:
        return gens[kind](**params)
    except TypeError as exc:
        raise MeshError(f"bad parameters for {kind}: {exc}") from exc
