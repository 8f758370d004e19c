"""Product-manifold spectra of Sigma x (0, h) assembled from surface spectra.

The Maxwell (co-closed 1-forms, relative conditions) spectrum of the product
splits into branches labelled by a surface index ``k`` and an interval index
``j``:

closed surface
    TE    ``mu_k + eta_j``, k >= 2, j >= 1
    TM    ``mu_k + d_j``, k >= 2, j >= 1
    TEM   ``d_j``, 2*genus copies (harmonic 1-forms on Sigma times sin)
    ZERO  0, one copy (the harmonic ``dt`` field)

surface with boundary
    TE    ``muD_k + eta_j``, k, j >= 1
    TM    ``muN_k + d_j``, k >= 2, j >= 1
    TEM   ``d_j``, 2*genus + b copies

with ``d_j = (pi j / h)^2`` (Dirichlet interval) and ``eta_j = (pi (j-1) / h)^2``
(Neumann interval).  The full Hodge spectrum on 1-forms adds the non
co-closed pieces; those carry the tag ``EXACT``.  Absolute 2-form spectra
(used for the duality check) carry ``ABS2_SURF`` / ``ABS2_DT``.

Surface spectra may be passed as :class:`~thinmax.surface.SurfaceSpectrum`,
:class:`~thinmax.oracles.OracleSpectrum`, a ``(values, complete_to)`` pair,
or a bare array (taken as complete up to its largest value).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .mesh import TopologyInfo

__all__ = [
    "FAMILIES",
    "EXTRA_TAGS",
    "SpectrumEntry",
    "Spectrum",
    "SpectrumError",
    "interval_dirichlet",
    "interval_neumann",
    "surface_levels",
    "assemble_coclosed",
    "one_form_spectrum_closed",
    "assemble_full_hodge",
    "assemble_absolute_two_forms",
    "relative_absolute_duality_check",
    "multiset_equal",
    "multiset_includes",
    "provenance_includes",
    "clusters",
    "SCHEMA_VERSION",
]

SCHEMA_VERSION = 1
FAMILIES = ("TE", "TM", "TEM", "ZERO")
EXTRA_TAGS = ("EXACT", "ABS2_SURF", "ABS2_DT")


class SpectrumError(ValueError):
    """Incomplete surface input, topology mismatch or incompatible spectra."""


@dataclass(frozen=True, order=True)
class SpectrumEntry:
    value: float
    family: str
    k: int
    j: int
    copy: int = 1

    @property
    def key(self):
        return (self.family, self.k, self.j, self.copy)


@dataclass
class Spectrum:
    entries: list
    cutoff: float
    h: float
    topology: TopologyInfo | None = None
    kind: str = "coclosed"

    def __post_init__(self):
        self.entries = sorted(self.entries, key=lambda e: (e.value, e.family, e.k, e.j, e.copy))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def values(self) -> np.ndarray:
        return np.array([e.value for e in self.entries], dtype=float)

    def select(self, family: str) -> list:
        return [e for e in self.entries if e.family == family]

    def multiplicities(self, rtol: float = 1e-9):
        """``[(value, count), ...]``; ties across families are merged only here."""
        return [(float(c[0]), len(c)) for c in clusters(self.values, rtol)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "lambda", "family", "k", "j", "copy"])
        for i, e in enumerate(self.entries, start=1):
            w.writerow([i, f"{e.value:.12g}", e.family, e.k, e.j, e.copy])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "cutoff": self.cutoff,
            "h": self.h,
            "topology": None if self.topology is None else self.topology.to_dict(),
            "entries": [
                {"lambda": e.value, "family": e.family, "k": e.k, "j": e.j, "copy": e.copy}
                for e in self.entries
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def interval_dirichlet(h: float, j: int) -> float:
    """``d_j(h) = (pi j / h)^2``."""
    _check_interval(h, j)
    return (math.pi * j / h) ** 2


def interval_neumann(h: float, j: int) -> float:
    """``eta_j(h) = (pi (j - 1) / h)^2``; ``eta_1 = 0``."""
    _check_interval(h, j)
    return (math.pi * (j - 1) / h) ** 2


def _check_interval(h, j):
    if not h > 0:
        raise ValueError("interval length h must be positive")
    if int(j) != j or j < 1:
        raise ValueError("interval index j must be an integer >= 1")


def surface_levels(spec):
    """Normalise a surface spectrum to ``(sorted values, complete_to)``."""
    if isinstance(spec, tuple) and len(spec) == 2:
        vals, complete_to = spec
        vals = np.sort(np.asarray(vals, dtype=float))
        return vals, float(complete_to)
    if hasattr(spec, "eigenvalues"):  # SurfaceSpectrum
        vals = np.sort(np.asarray(spec.eigenvalues, dtype=float))
        cut = spec.cutoff
        if cut is None:
            cut = vals[-1] if len(vals) else -np.inf
        return vals, float(cut)
    if hasattr(spec, "values") and hasattr(spec, "cutoff"):  # OracleSpectrum
        return np.sort(np.asarray(spec.values, dtype=float)), float(spec.cutoff)
    vals = np.sort(np.asarray(spec, dtype=float).ravel())
    return vals, float(vals[-1]) if len(vals) else -np.inf


def _require(levels, need, name):
    vals, complete_to = levels
    if need >= 0 and complete_to < need:
        raise SpectrumError(
            f"{name} spectrum is complete only up to {complete_to:.6g}, need {need:.6g}"
        )


def _check_zero_mode(vals, name):
    if len(vals) == 0:
        raise SpectrumError(f"{name} spectrum is empty")
    scale = max(1.0, abs(vals).max())
    if abs(vals[0]) > 1e-8 * scale:
        raise SpectrumError(f"{name} spectrum must start with the constant mode 0, got {vals[0]:.3e}")


def _product(entries, family, surf, k0, interval, h, cutoff):
    """Append ``surf[k] + interval(h, j)`` for k >= k0 (1-based), j >= 1, value <= cutoff."""
    j = 1
    while True:
        t = interval(h, j)
        if len(surf) < k0 or surf[k0 - 1] + t > cutoff:
            # eta_1 = 0 < eta_2 <=..., d_j increasing: nothing further fits
            break
        for k in range(k0, len(surf) + 1):
            v = surf[k - 1] + t
            if v > cutoff:
                break
            entries.append(SpectrumEntry(float(v), family, k, j, 1))
        j += 1


def _harmonic(entries, family, copies, h, cutoff):
    j = 1
    while copies > 0 and interval_dirichlet(h, j) <= cutoff:
        for c in range(1, copies + 1):
            entries.append(SpectrumEntry(interval_dirichlet(h, j), family, 0, j, c))
        j += 1


def _split_inputs(surface, topo):
    """Return ("closed", mu) or ("boundary", muD, muN) as level pairs, checking topology."""
    if isinstance(surface, dict):
        keys = set(surface)
    else:
        keys = {"closed"}
        surface = {"closed": surface}
    if keys == {"closed"}:
        if not topo.is_closed:
            raise SpectrumError("a closed-surface spectrum was supplied for a surface with boundary")
        return "closed", surface_levels(surface["closed"])
    if keys == {"dirichlet", "neumann"}:
        if topo.is_closed:
            raise SpectrumError("Dirichlet/Neumann spectra were supplied for a closed surface")
        return "boundary", surface_levels(surface["dirichlet"]), surface_levels(surface["neumann"])
    raise SpectrumError(f"surface spectra must be {{'closed'}} or {{'dirichlet','neumann'}}, got {sorted(keys)}")


def assemble_coclosed(surface, topo: TopologyInfo, h: float, cutoff: float) -> Spectrum:
    """Maxwell spectrum of ``Sigma x (0, h)`` up to ``cutoff``."""
    if not h > 0:
        raise ValueError("h must be positive")
    parts = _split_inputs(surface, topo)
    entries = []
    if cutoff >= 0:
        d1 = interval_dirichlet(h, 1)
        if parts[0] == "closed":
            mu = parts[1]
            _check_zero_mode(mu[0], "closed")
            _require(mu, cutoff, "closed")
            _product(entries, "TE", mu[0], 2, interval_neumann, h, cutoff)
            _product(entries, "TM", mu[0], 2, interval_dirichlet, h, cutoff)
            _harmonic(entries, "TEM", 2 * topo.genus, h, cutoff)
            entries.append(SpectrumEntry(0.0, "ZERO", 1, 1, 1))
        else:
            muD, muN = parts[1], parts[2]
            _check_zero_mode(muN[0], "neumann")
            _require(muD, cutoff, "dirichlet")
            _require(muN, cutoff - d1, "neumann")
            _product(entries, "TE", muD[0], 1, interval_neumann, h, cutoff)
            _product(entries, "TM", muN[0], 2, interval_dirichlet, h, cutoff)
            _harmonic(entries, "TEM", topo.harmonic_count, h, cutoff)
    return Spectrum(entries, float(cutoff), float(h), topo, "coclosed")


def one_form_spectrum_closed(mu, genus: int) -> np.ndarray:
    """Hodge Laplacian on 1-forms of a closed surface from its function spectrum.

    Each non-zero eigenvalue appears twice (exact and co-exact copies) and
    0 appears ``2 * genus`` times.
    """
    vals, _ = surface_levels(mu)
    _check_zero_mode(vals, "closed")
    nz = vals[1:]
    return np.sort(np.concatenate([np.zeros(2 * int(genus)), np.repeat(nz, 2)]))


def _one_form_closed_labelled(mu, genus):
    """(value, family, k, copy) for the 1-form spectrum; copy 1 co-exact, copy 2 exact."""
    out = [(0.0, "TEM", 0, c) for c in range(1, 2 * genus + 1)]
    for k in range(2, len(mu) + 1):
        out.append((float(mu[k - 1]), "TM", k, 1))
        out.append((float(mu[k - 1]), "EXACT", k, 2))
    return out


def _one_form_relative_labelled(muD, muN, harmonic):
    # experimental: {muN nonzero} + {muD} + {0 x (2 gamma + b)}
    out = [(0.0, "TEM", 0, c) for c in range(1, harmonic + 1)]
    for k in range(2, len(muN) + 1):
        out.append((float(muN[k - 1]), "TM", k, 1))
    for k in range(1, len(muD) + 1):
        out.append((float(muD[k - 1]), "EXACT", k, 2))
    return out


def _with_interval(entries, labelled, interval, h, cutoff, family_override=None):
    j = 1
    while interval(h, j) <= cutoff:
        t = interval(h, j)
        for v, fam, k, c in labelled:
            if v + t <= cutoff:
                entries.append(SpectrumEntry(float(v + t), family_override or fam, k, j, c))
        j += 1


def _full_inputs(surface, topo, cutoff, h):
    parts = _split_inputs(surface, topo)
    d1 = interval_dirichlet(h, 1)
    if parts[0] == "closed":
        mu = parts[1]
        _check_zero_mode(mu[0], "closed")
        _require(mu, cutoff, "closed")
        return mu[0], _one_form_closed_labelled(mu[0], topo.genus)
    muD, muN = parts[1], parts[2]
    _check_zero_mode(muN[0], "neumann")
    _require(muD, cutoff, "dirichlet")
    _require(muN, cutoff - d1, "neumann")
    return muD[0], _one_form_relative_labelled(muD[0], muN[0], topo.harmonic_count)


def assemble_full_hodge(surface, topo: TopologyInfo, h: float, cutoff: float) -> Spectrum:
    """Hodge Laplacian on 1-forms of ``Sigma x (0, h)``, relative conditions.

    ``{d_j + mu1_k} U {eta_j + mu_k}`` with ``mu1`` the 1-form spectrum of
    Sigma.  Co-closed entries keep the labels used by
    :func:`assemble_coclosed`; the rest are tagged ``EXACT``.  The
    boundary-surface variant approximates the relative 1-form spectrum of
    Sigma by ``{muN_k, k >= 2} U {muD_k} U {0 x (2 genus + b)}`` and is
    experimental.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    entries = []
    if cutoff >= 0:
        fun, one = _full_inputs(surface, topo, cutoff, h)
        _with_interval(entries, one, interval_dirichlet, h, cutoff)
        closed = topo.is_closed
        for k in range(1, len(fun) + 1):
            j = 1
            while True:
                v = fun[k - 1] + interval_neumann(h, j)
                if v > cutoff:
                    break
                if closed and k == 1:
                    fam, v = ("ZERO", 0.0) if j == 1 else ("EXACT", interval_neumann(h, j))
                else:
                    fam = "TE"
                entries.append(SpectrumEntry(float(v), fam, k, j, 1))
                j += 1
    kind = "full_hodge" if topo.is_closed else "full_hodge_experimental"
    return Spectrum(entries, float(cutoff), float(h), topo, kind)


def assemble_absolute_two_forms(surface, topo: TopologyInfo, h: float, cutoff: float) -> Spectrum:
    """Absolute 2-form spectrum of ``Sigma x (0, h)`` by the dual formulas.

    A 2-form is (2-form on Sigma) x (function of t) plus (1-form on Sigma) x dt;
    absolute conditions put Neumann conditions on the first factor and
    Dirichlet conditions on the second.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    entries = []
    if cutoff >= 0:
        fun, one = _full_inputs(surface, topo, cutoff, h)
        for k in range(1, len(fun) + 1):
            j = 1
            while fun[k - 1] + interval_neumann(h, j) <= cutoff:
                entries.append(SpectrumEntry(float(fun[k - 1] + interval_neumann(h, j)), "ABS2_SURF", k, j, 1))
                j += 1
        j = 1
        while interval_dirichlet(h, j) <= cutoff:
            t = interval_dirichlet(h, j)
            for v, _, k, c in one:
                if t + v <= cutoff:
                    entries.append(SpectrumEntry(float(t + v), "ABS2_DT", k, j, c))
            j += 1
        if topo.is_closed:
            # the ZERO/EXACT k = 1 entries are formed as pure interval values
            entries = [
                SpectrumEntry(interval_neumann(h, e.j), e.family, e.k, e.j, e.copy)
                if e.family == "ABS2_SURF" and e.k == 1 else e
                for e in entries
            ]
    return Spectrum(entries, float(cutoff), float(h), topo, "absolute_2form")


def relative_absolute_duality_check(relative: Spectrum, absolute: Spectrum, tol: float = 1e-10) -> bool:
    """True iff the relative 1-form and absolute 2-form spectra agree as multisets."""
    if relative.cutoff != absolute.cutoff:
        raise SpectrumError(f"cutoff mismatch: {relative.cutoff} vs {absolute.cutoff}")
    return multiset_equal(relative.values, absolute.values, rtol=tol)


def _vals(x):
    if isinstance(x, Spectrum):
        return x.values
    if hasattr(x, "values") and not isinstance(x, np.ndarray):
        return np.asarray(x.values, dtype=float)
    return np.asarray(x, dtype=float).ravel()


def _close(a, b, rtol):
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))


def multiset_equal(a, b, rtol: float = 1e-9) -> bool:
    """Sorted-value matching with relative tolerance (absolute below 1)."""
    a, b = np.sort(_vals(a)), np.sort(_vals(b))
    if len(a) != len(b):
        return False
    return all(_close(x, y, rtol) for x, y in zip(a, b))


def multiset_includes(sub, sup, rtol: float = 1e-9) -> bool:
    """True when every value of ``sub`` can be matched to a distinct value of ``sup``."""
    a, b = np.sort(_vals(sub)), np.sort(_vals(sup))
    i = 0
    for x in a:
        while i < len(b) and b[i] < x and not _close(x, b[i], rtol):
            i += 1
        if i == len(b) or not _close(x, b[i], rtol):
            return False
        i += 1
    return True


def provenance_includes(sub: Spectrum, sup: Spectrum) -> bool:
    """Every entry of ``sub`` appears in ``sup`` with the same labels and the same value."""
    table = {e.key: e.value for e in sup.entries}
    return all(e.key in table and table[e.key] == e.value for e in sub.entries)


def clusters(values, rtol: float = 1e-6) -> list:
    """Group sorted values into runs whose consecutive gaps are within ``rtol``."""
    v = np.sort(np.asarray(values, dtype=float))
    out = []
    for x in v:
        if out and _close(out[-1][-1], x, rtol):
            out[-1].append(float(x))
        else:
            out.append([float(x)])
    return [np.array(c) for c in out]
