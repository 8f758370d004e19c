"""End-to-end studies on thin tubes: thin-limit convergence, eigenfunction
distance, dumbbell surfaces with small eigenvalues, and the hole-induced
TEM branch.  Every study returns a plain report object with ``to_dict``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import surface as surf
from .eigen import SolveOptions
from .maxwell import eigenmode_interpolate_reference, solve_maxwell
from .mesh import MeshError, Sphere, SurfaceMesh, dumbbell_chain, rectangle, refine, square_with_hole, topology
from .spectrum import SCHEMA_VERSION, Spectrum, SpectrumEntry, assemble_coclosed, clusters, interval_dirichlet
from .tube import TubeParams, extrude, volume

__all__ = [
    "ConvergenceReport",
    "EigenfunctionReport",
    "converge_tube",
    "eigenfunction_distance",
    "dumbbell_small_eigs",
    "unit_volume_rescale",
    "tem_instability",
    "reference_clusters",
    "DumbbellReport",
    "InstabilityReport",
]

CLUSTER_RTOL = 1e-6


class _Report:
    def to_dict(self) -> dict:
        d = {"schema_version": SCHEMA_VERSION, "report": type(self).__name__}
        d.update(_plain(asdict(self)))
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _plain(x):
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


@dataclass
class ConvergenceReport(_Report):
    hs: list
    layers: int
    bc: str
    reference: list  # mu_j (closed, j >= 2) or muD_j, sorted
    cluster_sizes: list
    eigenvalues: list  # one row per h
    errors: list  # |lambda_j - mu_j|, one row per h
    C: float
    violations: int
    monotone_modes: list
    ratios: list  # errors(h_i) / errors(h_{i+1})
    kernel_dims: list
    interior_vertices: list
    n_dofs: list
    crossval_ok: bool
    mesh: dict = field(default_factory=dict)

    @property
    def monotone(self) -> bool:
        return all(self.monotone_modes)


@dataclass
class EigenfunctionReport(_Report):
    hs: list
    layers: int
    target: int
    block: list  # reference indices (1-based, within the matched list) of the target cluster
    residuals: list
    reference_norms: list
    decreasing: bool


def _check_hs(hs):
    hs = [float(h) for h in hs]
    if not hs:
        raise ValueError("need at least one h")
    if any(h <= 0 for h in hs):
        raise ValueError("h values must be positive")
    if any(a <= b for a, b in zip(hs, hs[1:])):
        raise ValueError("h values must be strictly decreasing")
    return hs


def _surface_bc(mesh: SurfaceMesh) -> str:
    return "closed" if mesh.is_closed else "dirichlet"


def reference_clusters(values, count: int, rtol: float = CLUSTER_RTOL):
    """Smallest prefix of ``values`` holding ``count`` entries and ending on a full cluster."""
    taken, sizes = 0, []
    for c in clusters(values, rtol):
        if taken >= count:
            break
        sizes.append(len(c))
        taken += len(c)
    if taken < count:
        raise ValueError(f"only {taken} reference values available, {count} requested")
    return np.sort(np.asarray(values, dtype=float))[:taken], sizes


def _references(mesh, count, consistent_mass):
    """Matched 2D references and their eigenfunctions (non-constant for closed Sigma)."""
    bc = _surface_bc(mesh)
    extra = 1 if bc == "closed" else 0
    sp2 = surf.solve(mesh, bc, consistent_mass=consistent_mass, count=mesh.n_vertices)
    vals = sp2.eigenvalues[extra:]
    vecs = sp2.eigenfunctions[:, extra:]
    ref, sizes = reference_clusters(vals, count)
    return bc, ref, sizes, vecs[:, :len(ref)], sp2


def _blocks(sizes):
    out, start = [], 0
    for s in sizes:
        out.append(list(range(start, start + s)))
        start += s
    return out


def converge_tube(surface: SurfaceMesh, hs, layers: int = 1, count: int = 4, refine_rounds: int = 0,
                  project_to: Sphere | None = None, consistent_mass: bool = False,
                  opts: SolveOptions | None = None, bracket_factor: float = 1.5) -> ConvergenceReport:
    """Maxwell eigenvalues of tubes of shrinking thickness against the 2D limit.

    The reference is computed on the same surface mesh that is extruded.
    Clusters are matched as sorted blocks.  ``C`` is the least-squares fit of
    ``|lambda_j - mu_j| ~ C h mu_j``; a violation is any value outside
    ``(1 +- bracket_factor * C * h) mu_j``.
    """
    hs = _check_hs(hs)
    mesh = refine(surface, refine_rounds, project_to) if refine_rounds else surface
    bc, ref, sizes, _, sp2 = _references(mesh, count, consistent_mass)
    n = len(ref)
    lams, errs, kd, iv, nd = [], [], [], [], []
    for h in hs:
        tube = extrude(mesh, TubeParams(h, layers))
        res = solve_maxwell(tube, n, opts)
        lam = np.sort(res.eigenvalues)
        lams.append(lam)
        errs.append(np.abs(lam - ref))
        kd.append(res.kernel_dim)
        iv.append(len(tube.interior_vertices))
        nd.append(res.n_dofs)
    lams, errs = np.array(lams), np.array(errs)
    H = np.array(hs)[:, None] * ref[None, :]
    C = float((errs * H).sum() / (H * H).sum())
    lo = (1 - bracket_factor * C * np.array(hs))[:, None] * ref[None, :]
    hi = (1 + bracket_factor * C * np.array(hs))[:, None] * ref[None, :]
    violations = int(np.sum((lams < lo) | (lams > hi)))
    monotone = [bool(np.all(np.diff(errs[:, j]) < 0)) for j in range(n)]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = (errs[:-1] / errs[1:]).tolist() if len(hs) > 1 else []

    # cross-validation against the product-manifold assembly at the same h,
    # within max(5%, the certified bracket)
    topo = topology(mesh)
    cut = float(ref[-1]) * (1 + 1e-9)
    if bc == "closed":
        inputs = (sp2.eigenvalues, np.inf)
    else:
        nsp = surf.solve(mesh, "neumann", count=mesh.n_vertices, consistent_mass=consistent_mass)
        inputs = {"dirichlet": (sp2.eigenvalues, np.inf), "neumann": (nsp.eigenvalues, np.inf)}
    ok = True
    for h, lam in zip(hs, lams):
        a = assemble_coclosed(inputs, topo, h, cut).values
        a = a[a > 0][:n]
        tol = np.maximum(0.05, bracket_factor * C * h) * np.abs(a)
        ok &= len(a) == n and bool(np.all(np.abs(lam - a) <= tol))

    return ConvergenceReport(
        hs, int(layers), bc, ref.tolist(), sizes, lams.tolist(), errs.tolist(), C, violations,
        monotone, ratios, kd, iv, nd, bool(ok),
        mesh={"n_vertices": mesh.n_vertices, "n_faces": mesh.n_faces, "refine_rounds": refine_rounds,
              "consistent_mass": consistent_mass, "topology": topo.to_dict()},
    )


def eigenfunction_distance(surface: SurfaceMesh, hs, layers: int = 1, target: int = 1,
                           consistent_mass: bool = False, sign: float = 1.0,
                           opts: SolveOptions | None = None) -> EigenfunctionReport:
    """Relative M-norm distance between ``h^{-1/2} w dt`` and the computed eigenspace.

    ``w`` is the ``target``-th 2D eigenfunction (non-constant ones for a
    closed surface, Dirichlet ones otherwise).  The interpolated reference is
    projected onto the span of the 3D eigenvectors of the matching cluster.
    """
    hs = _check_hs(hs)
    if target < 1:
        raise ValueError("target is 1-based")
    _, ref, sizes, W, _ = _references(surface, target, consistent_mass)
    block = next(b for b in _blocks(sizes) if target - 1 in b)
    w = sign * W[:, target - 1]
    residuals, norms = [], []
    for h in hs:
        tube = extrude(surface, TubeParams(h, layers))
        res = solve_maxwell(tube, block[-1] + 1, opts)
        U = res.eigenvectors[:, block]
        M = res.extra["M"]
        r = eigenmode_interpolate_reference(tube, w, h, res.extra["dofmap"])
        Mr = M @ r
        nrm = math.sqrt(float(r @ Mr))
        if nrm == 0:
            raise ValueError("reference field vanishes on the free edges")
        d = r - U @ (U.T @ Mr)
        residuals.append(math.sqrt(max(float(d @ (M @ d)), 0.0)) / nrm)
        norms.append(nrm)
    decreasing = bool(np.all(np.diff(residuals) < 0)) if len(hs) > 1 else True
    return EigenfunctionReport(hs, int(layers), int(target), [b + 1 for b in block], residuals, norms, decreasing)


def unit_volume_rescale(spectrum, vol: float):
    """Multiply every eigenvalue by ``vol^(2/3)`` (the unit-volume normalisation)."""
    if not vol > 0:
        raise ValueError("volume must be positive")
    t = vol ** (2.0 / 3.0)
    if isinstance(spectrum, Spectrum):
        ents = [SpectrumEntry(e.value * t, e.family, e.k, e.j, e.copy) for e in spectrum.entries]
        return Spectrum(ents, spectrum.cutoff * t, spectrum.h, spectrum.topology, spectrum.kind)
    return np.asarray(spectrum, dtype=float) * t


@dataclass
class DumbbellReport(_Report):
    num_bulbs: int
    eps: float
    h: float
    neck_radii: list
    mu: list  # per radius: mu_1..mu_N of the surface
    volumes: list
    rescaled: list  # per radius: first N tube eigenvalues times vol^(2/3)
    largest: list
    mu2_strictly_decreasing: bool
    achieved: bool
    achieved_radius: float | None


def dumbbell_small_eigs(num_bulbs: int = 2, eps: float = 0.1, neck_radii=(0.3, 0.1, 0.05),
                        h: float = 0.01, bulb_radius: float = 1.0, neck_len: float = 0.5, n: int = 16,
                        extend: bool = False, min_radius: float = 0.01) -> DumbbellReport:
    """First ``num_bulbs`` eigenvalues of thin tubes over dumbbell chains.

    For each neck radius the surface spectrum is assembled into the tube
    spectrum at thickness ``h`` and rescaled to unit volume.  With
    ``extend`` the sweep keeps halving the radius until the largest of the
    first ``num_bulbs`` values drops below ``eps``.
    """
    if num_bulbs < 2:
        raise ValueError("need at least two bulbs")
    radii = sorted((float(r) for r in neck_radii), reverse=True)
    if len(set(radii)) != len(radii):
        raise ValueError("neck radii must be distinct")
    N = int(num_bulbs)
    mus, vols, resc, largest = [], [], [], []

    def run(r):
        d = dumbbell_chain(N, bulb_radius, r, neck_len, n)
        sp2 = surf.solve(d, "closed", count=d.n_vertices)
        vol = volume(extrude(d, TubeParams(h, 1)))
        mu = sp2.eigenvalues[:N]
        cut = float(sp2.eigenvalues[N]) * (1 + 1e-9)
        tube = assemble_coclosed((sp2.eigenvalues, np.inf), topology(d), h, cut).values[:N]
        scaled = unit_volume_rescale(tube, vol)
        mus.append(mu.tolist())
        vols.append(vol)
        resc.append(scaled.tolist())
        largest.append(float(scaled.max()))

    for r in radii:
        run(r)
    while extend and largest[-1] >= eps:
        r = radii[-1] / 2
        if r < min_radius:
            raise MeshError(f"eps = {eps} not reached down to neck radius {min_radius}")
        radii.append(r)
        run(r)
    mu2 = [m[1] for m in mus]
    hit = [r for r, v in zip(radii, largest) if v < eps]
    return DumbbellReport(N, float(eps), float(h), radii, mus, vols, resc, largest,
                          bool(np.all(np.diff(mu2) < 0)), bool(largest[-1] < eps),
                          hit[0] if hit else None)


@dataclass
class InstabilityReport(_Report):
    side: float
    h: float
    cutoff: float
    deltas: list  # descending, 0 last
    tem: list  # per delta: TEM values
    tem_expected: list  # pi^2 j^2 / h^2 for j with value <= cutoff
    muD1: list
    coclosed_lowest: list  # per delta: lowest few non-TEM values
    tem_present: bool
    tem_absent_at_zero: bool
    muD1_decreasing: bool


def tem_instability(side: float = 1.0, deltas=(0.2, 0.1, 0.05), h: float = 1.0, cutoff: float = 100.0,
                    n: int = 6, square_n: int = 24, report_count: int = 6) -> InstabilityReport:
    """Assembled spectra of ``(square minus disk of radius delta) x (0, h)``.

    The TEM branch (one copy of each ``d_j(h)``, since b = 1) appears for
    every ``delta > 0`` and vanishes for the square itself.
    """
    ds = sorted((float(d) for d in deltas), reverse=True)
    if not ds or ds[-1] <= 0:
        raise ValueError("hole radii must be positive")
    if ds[0] >= side / 2:
        raise MeshError("hole too large for the square")
    meshes = [square_with_hole(side, d, n) for d in ds] + [rectangle(side, side, square_n)]
    expected = []
    j = 1
    while interval_dirichlet(h, j) <= cutoff:
        expected.append(interval_dirichlet(h, j))
        j += 1
    tem, mud, low = [], [], []
    for m in meshes:
        D = surf.solve(m, "dirichlet", cutoff=cutoff)
        N = surf.solve(m, "neumann", cutoff=cutoff)
        s = assemble_coclosed({"dirichlet": D, "neumann": N}, topology(m), h, cutoff)
        tem.append([e.value for e in s.select("TEM")])
        mud.append(float(D.eigenvalues[0]))
        low.append([e.value for e in s.entries if e.family != "TEM"][:report_count])
    present = all(t == expected for t in tem[:-1])
    absent = tem[-1] == []
    decreasing = bool(np.all(np.diff(mud) < 0))
    return InstabilityReport(side, h, cutoff, ds + [0.0], tem, expected, mud, low,
                             present, absent, decreasing)
