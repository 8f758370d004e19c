"""Closed-form reference spectra, independent of every finite-element path.

All oracles return every formula value ``<= cutoff`` exactly once per index
tuple, sorted ascending.  Bessel zeros for the disk come from bisection on
the ascending power series of ``J_m`` evaluated in extended precision.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from functools import lru_cache

import numpy as np

from .spectrum import interval_dirichlet, interval_neumann, surface_levels

__all__ = [
    "OracleSpectrum",
    "OracleError",
    "sphere_spectrum",
    "rect_spectrum",
    "flat_torus_spectrum",
    "disk_spectrum",
    "bessel_j",
    "bessel_j_zero",
    "bessel_jp_zero",
    "cube_maxwell_spectrum",
    "flat_cylinder_spectrum",
    "oracle_csv",
]


class OracleError(RuntimeError):
    """Bracketing failure inside an oracle, or incomplete oracle inputs."""


@dataclass
class OracleSpectrum:
    values: np.ndarray
    tag: str
    cutoff: float
    labels: list = field(default_factory=list)  # (k, j, copy) per value

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        order = np.argsort(v, kind="stable")
        self.values = v[order]
        if self.labels:
            self.labels = [tuple(self.labels[i]) for i in order]
        else:
            self.labels = [(i + 1, 0, 1) for i in range(len(v))]

    def __len__(self):
        return len(self.values)

    def multiplicities(self, rtol: float = 1e-9):
        out = []
        for v in self.values:
            if out and abs(v - out[-1][0]) <= rtol * max(1.0, abs(v)):
                out[-1][1] += 1
            else:
                out.append([float(v), 1])
        return [tuple(x) for x in out]


def _build(pairs, tag, cutoff):
    pairs = sorted(pairs, key=lambda p: (p[0], tuple(map(str, p[1]))))
    return OracleSpectrum(np.array([p[0] for p in pairs], dtype=float), tag, float(cutoff),
                          [p[1] for p in pairs])


def sphere_spectrum(R: float, cutoff: float) -> OracleSpectrum:
    """``l (l + 1) / R^2`` with multiplicity ``2 l + 1``."""
    if not R > 0:
        raise ValueError("radius must be positive")
    pairs = []
    l = 0
    while l * (l + 1) / R**2 <= cutoff:
        pairs += [(l * (l + 1) / R**2, (l, 0, c)) for c in range(1, 2 * l + 2)]
        l += 1
    return _build(pairs, "sphere", cutoff)


def rect_spectrum(a: float, b: float, bc: str, cutoff: float) -> OracleSpectrum:
    """``pi^2 (m^2 / a^2 + n^2 / b^2)``; m, n >= 1 (Dirichlet) or >= 0 (Neumann)."""
    if min(a, b) <= 0:
        raise ValueError("rectangle sides must be positive")
    if bc not in ("dirichlet", "neumann"):
        raise ValueError(f"bc must be 'dirichlet' or 'neumann', got {bc!r}")
    lo = 1 if bc == "dirichlet" else 0
    pairs = []
    m = lo
    while (math.pi * m / a) ** 2 + (math.pi * lo / b) ** 2 <= cutoff:
        n = lo
        while True:
            v = math.pi**2 * (m**2 / a**2 + n**2 / b**2)
            if v > cutoff:
                break
            pairs.append((v, (m, n, 1)))
            n += 1
        m += 1
    return _build(pairs, f"rect_{bc}", cutoff)


def flat_torus_spectrum(a: float, b: float, cutoff: float) -> OracleSpectrum:
    """``4 pi^2 (m^2 / a^2 + n^2 / b^2)`` over ``(m, n)`` in Z^2."""
    if min(a, b) <= 0:
        raise ValueError("torus periods must be positive")
    pairs = []
    if cutoff >= 0:
        M = int(math.floor(a * math.sqrt(cutoff) / (2 * math.pi)))
        N = int(math.floor(b * math.sqrt(cutoff) / (2 * math.pi)))
        for m in range(-M, M + 1):
            for n in range(-N, N + 1):
                v = 4 * math.pi**2 * (m**2 / a**2 + n**2 / b**2)
                if v <= cutoff:
                    pairs.append((v, (m, n, 1)))
    return _build(pairs, "flat_torus", cutoff)


# -- Bessel functions -------------------------------------------------------

def _series(m: int, x: float, deriv: bool = False) -> Decimal:
    """``J_m(x)`` (or ``J_m'(x)``) from the ascending series in decimal arithmetic."""
    digits = 30 + int(0.45 * abs(x)) + 1
    with localcontext() as ctx:
        ctx.prec = digits
        X = Decimal(repr(float(x)))
        q = -(X * X) / 4
        # k = 0 term of J_m: (x/2)^m / m!
        term = (X / 2) ** m / math.factorial(m) if m else Decimal(1)
        total = Decimal(0)
        k = 0
        tiny = Decimal(10) ** -18
        while True:
            coef = Decimal(2 * k + m) if deriv else Decimal(1)
            contrib = term * coef
            total += contrib
            k += 1
            term = term * q / (k * (k + m))
            # stop once past the peak and the term ratio to the sum is negligible
            if k > abs(x) and (total == 0 or abs(term * (2 * k + m if deriv else 1)) < tiny * abs(total)):
                break
            if k > 10_000:
                raise OracleError(f"Bessel series did not converge at x = {x}")
        if deriv:
            if x == 0:
                return Decimal(1) / 2 if m == 1 else Decimal(0)
            total = total / X
        return +total


def bessel_j(m: int, x: float) -> float:
    """``J_m(x)`` for integer ``m >= 0``."""
    return float(_series(int(m), float(x)))


def _bisect(f, lo, hi, what):
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise OracleError(f"{what}: no sign change on [{lo}, {hi}]")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi) or hi - lo <= 4e-16 * hi:
            break
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


@lru_cache(maxsize=None)
def bessel_j_zero(m: int, n: int) -> float:
    """n-th positive zero ``j_{m,n}`` of ``J_m``.

    Zeros of ``J_0`` are isolated in ``[(n - 1/4) pi - 1, (n - 1/4) pi + 1]``;
    higher orders use the interlacing ``j_{m-1,n} < j_{m,n} < j_{m-1,n+1}``.
    """
    if m < 0 or n < 1:
        raise ValueError("need m >= 0 and n >= 1")
    if m == 0:
        c = (n - 0.25) * math.pi
        lo, hi = max(c - 1.0, 1e-3), c + 1.0
    else:
        lo, hi = bessel_j_zero(m - 1, n), bessel_j_zero(m - 1, n + 1)
    return _bisect(lambda x: _series(m, x), lo, hi, f"j_({m},{n})")


@lru_cache(maxsize=None)
def bessel_jp_zero(m: int, n: int) -> float:
    """n-th positive zero of ``J_m'`` (the zero at the origin is not counted)."""
    if m < 0 or n < 1:
        raise ValueError("need m >= 0 and n >= 1")
    if m == 0:
        return bessel_j_zero(1, n)  # J_0' = -J_1
    lo = float(m) if n == 1 else bessel_j_zero(m, n - 1)
    hi = bessel_j_zero(m, n)
    return _bisect(lambda x: _series(m, x, deriv=True), lo, hi, f"j'_({m},{n})")


def disk_spectrum(R: float, bc: str, cutoff: float) -> OracleSpectrum:
    """``(j_{m,n} / R)^2`` (Dirichlet) or ``(j'_{m,n} / R)^2`` plus 0 (Neumann).

    Multiplicity 2 for ``m >= 1`` (cos and sin), 1 for ``m = 0``.
    """
    if not R > 0:
        raise ValueError("radius must be positive")
    if bc not in ("dirichlet", "neumann"):
        raise ValueError(f"bc must be 'dirichlet' or 'neumann', got {bc!r}")
    zero = bessel_j_zero if bc == "dirichlet" else bessel_jp_zero
    pairs = []
    if cutoff < 0:
        return _build(pairs, f"disk_{bc}", cutoff)
    if bc == "neumann":
        pairs.append((0.0, (0, 0, 1)))
    X = R * math.sqrt(cutoff)
    m = 0
    # j_{m,1} > m and j'_{m,1} >= m, so orders above X contribute nothing
    while m <= X:
        n = 1
        while True:
            z = zero(m, n)
            if z > X:
                break
            v = (z / R) ** 2
            pairs += [(v, (m, n, c)) for c in range(1, (2 if m else 1) + 1)]
            n += 1
        if n == 1 and m > 0:
            break
        m += 1
    return _build(pairs, f"disk_{bc}", cutoff)


# -- 3D and product oracles -------------------------------------------------

def cube_maxwell_spectrum(a: float, b: float, c: float, cutoff: float) -> OracleSpectrum:
    """PEC cavity ``(0,a) x (0,b) x (0,c)``: ``pi^2 (m^2/a^2 + n^2/b^2 + p^2/c^2)``.

    A triple with all indices positive carries two modes, one with exactly
    one zero index carries one, any other carries none.
    """
    if min(a, b, c) <= 0:
        raise ValueError("box sides must be positive")
    pairs = []
    if cutoff > 0:
        lim = [int(math.floor(s * math.sqrt(cutoff) / math.pi)) for s in (a, b, c)]
        for m in range(lim[0] + 1):
            for n in range(lim[1] + 1):
                for p in range(lim[2] + 1):
                    zeros = (m == 0) + (n == 0) + (p == 0)
                    copies = {0: 2, 1: 1}.get(zeros, 0)
                    if not copies:
                        continue
                    v = math.pi**2 * (m**2 / a**2 + n**2 / b**2 + p**2 / c**2)
                    if v <= cutoff:
                        pairs += [(v, (f"{m}:{n}:{p}", 0, k)) for k in range(1, copies + 1)]
    return _build(pairs, "cube_maxwell", cutoff)


def flat_cylinder_spectrum(dirichlet, neumann, D: int, h: float, cutoff: float) -> OracleSpectrum:
    """Maxwell spectrum of a straight cylinder ``omega x (0, h)`` over a planar domain.

    ``dirichlet`` / ``neumann`` are the spectra of ``omega`` (any form accepted
    by :func:`thinmax.spectrum.surface_levels`) and ``D`` counts the boundary
    components of ``omega``.  Modes: Neumann surface values ``k >= 2`` plus
    Dirichlet interval values; Dirichlet surface values plus Neumann interval
    values; and ``D - 1`` copies of each Dirichlet interval value.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    if D < 1:
        raise ValueError("omega has at least one boundary component")
    dv, dcomp = surface_levels(dirichlet)
    nv, ncomp = surface_levels(neumann)
    pairs = []
    if cutoff >= 0:
        if dcomp < cutoff:
            raise OracleError(f"Dirichlet input complete only to {dcomp:.6g} < {cutoff:.6g}")
        if ncomp < cutoff - interval_dirichlet(h, 1):
            raise OracleError(f"Neumann input complete only to {ncomp:.6g}")
        j = 1
        while interval_dirichlet(h, j) <= cutoff:
            dj = interval_dirichlet(h, j)
            for k in range(2, len(nv) + 1):
                if nv[k - 1] + dj <= cutoff:
                    pairs.append((nv[k - 1] + dj, (k, j, 1)))
            pairs += [(dj, (0, j, c)) for c in range(1, D)]
            j += 1
        j = 1
        while interval_neumann(h, j) <= cutoff:
            ej = interval_neumann(h, j)
            for k in range(1, len(dv) + 1):
                if dv[k - 1] + ej <= cutoff:
                    pairs.append((dv[k - 1] + ej, (k, j, 1)))
            j += 1
    return _build(pairs, "flat_cylinder", cutoff)


def oracle_csv(spec: OracleSpectrum) -> str:
    """Columns ``index, lambda, family, k, j, copy`` with the family fixed to the tag."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "lambda", "family", "k", "j", "copy"])
    for i, (v, (k, j, c)) in enumerate(zip(spec.values, spec.labels), start=1):
        w.writerow([i, f"{v:.12g}", spec.tag, k, j, c])
    return buf.getvalue()
