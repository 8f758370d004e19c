"""Lowest eigenpairs of K u = lambda M u with K symmetric PSD and M SPD.

The dense path calls LAPACK's symmetric-definite driver (reduction to
tridiagonal form) on the full matrices and is the default up to
``dense_cap`` unknowns.  Shift-invert Lanczos (ARPACK) is available for
larger problems when a shift above the zero cluster is known.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import scipy.io
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "EigenError",
    "EigenResult",
    "SolveOptions",
    "DEFAULT_DENSE_CAP",
    "dense_cap",
    "check_symmetric",
    "solve_lowest",
    "residual_check",
    "dump_matrix",
]

DEFAULT_DENSE_CAP = 4000


class EigenError(RuntimeError):
    """Solver failure: bad input, indefinite mass matrix, or no convergence."""


def dense_cap() -> int:
    """Dense-solver size limit; ``THINMAX_DENSE_CAP`` overrides the default."""
    value = os.environ.get("THINMAX_DENSE_CAP")
    if value is None:
        return DEFAULT_DENSE_CAP
    try:
        cap = int(value)
    except ValueError as exc:
        raise EigenError(f"THINMAX_DENSE_CAP must be an integer, got {value!r}") from exc
    if cap < 1:
        raise EigenError("THINMAX_DENSE_CAP must be positive")
    return cap


@dataclass
class SolveOptions:
    mode: str = "dense"  # "dense" or "shift_invert"
    sigma: float | None = None
    zero_threshold: float = 1e-8
    tol: float | None = None
    max_iter: int | None = None
    dense_cap: int | None = None

    def resolved_tol(self) -> float:
        if self.tol is not None:
            return self.tol
        return 1e-8 if self.mode == "dense" else 1e-6


@dataclass
class EigenResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns, M-orthonormal
    residuals: np.ndarray
    kernel_dim: int
    zero_cutoff: float
    mode: str = "dense"
    extra: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.eigenvalues)


def _as_matrix(A):
    if sp.issparse(A):
        return A.tocsr()
    return np.asarray(A, dtype=float)


def check_symmetric(A, name="matrix", rtol=1e-12) -> None:
    A = _as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise EigenError(f"{name} is not square: {A.shape}")
    if sp.issparse(A):
        diff = abs(A - A.T).max() if A.nnz else 0.0
        scale = abs(A).max() if A.nnz else 0.0
    else:
        diff = np.abs(A - A.T).max() if A.size else 0.0
        scale = np.abs(A).max() if A.size else 0.0
    if diff > rtol * max(scale, np.finfo(float).tiny):
        raise EigenError(f"{name} is not symmetric (max asymmetry {diff:.3e})")


def _trace(A):
    return float(A.diagonal().sum())


def _residuals(K, M, lam, U):
    KU = K @ U
    MU = M @ U
    R = KU - MU * lam[None, :]
    norms = np.linalg.norm(U, axis=0)
    return np.linalg.norm(R, axis=0) / norms


def solve_lowest(K, M, count: int, opts: SolveOptions | None = None) -> EigenResult:
    """Return the ``count`` lowest eigenpairs of ``K u = lambda M u``.

    ``kernel_dim`` counts returned eigenvalues below
    ``zero_threshold * trace(K) / trace(M)``.
    """
    opts = opts or SolveOptions()
    K, M = _as_matrix(K), _as_matrix(M)
    n = K.shape[0]
    if M.shape != K.shape:
        raise EigenError(f"dimension mismatch: K {K.shape} vs M {M.shape}")
    if count < 1 or count > n:
        raise EigenError(f"requested {count} eigenpairs of an order-{n} problem")
    check_symmetric(K, "K")
    check_symmetric(M, "M")
    cutoff = opts.zero_threshold * _trace(K) / _trace(M)
    tol = opts.resolved_tol()

    if opts.mode == "dense":
        cap = opts.dense_cap if opts.dense_cap is not None else dense_cap()
        if n > cap:
            raise EigenError(f"dense solve of order {n} exceeds the cap {cap} (set THINMAX_DENSE_CAP)")
        Kd = K.toarray() if sp.issparse(K) else K
        Md = M.toarray() if sp.issparse(M) else M
        try:
            lam, U = scipy.linalg.eigh(Kd, Md, subset_by_index=None, driver="gvd")
        except np.linalg.LinAlgError as exc:
            raise EigenError(f"mass matrix is not positive definite ({exc})") from exc
        lam, U = lam[:count], U[:, :count]
    elif opts.mode == "shift_invert":
        if opts.sigma is None:
            raise EigenError("shift_invert mode needs sigma above the zero cluster")
        Ks = sp.csc_matrix(K)
        Ms = sp.csc_matrix(M)
        try:
            spla.splu(Ms)
        except RuntimeError as exc:
            raise EigenError(f"mass matrix is singular ({exc})") from exc
        try:
            lam, U = spla.eigsh(Ks, k=count, M=Ms, sigma=opts.sigma, which="LM",
                                tol=tol * 1e-2, maxiter=opts.max_iter)
        except spla.ArpackNoConvergence as exc:
            raise EigenError(f"shift-invert Lanczos did not converge: {exc}") from exc
        order = np.argsort(lam)
        lam, U = lam[order], U[:, order]
        # M-normalise (ARPACK already returns M-orthonormal vectors up to rounding)
        U = U / np.sqrt(np.einsum("ij,ij->j", U, M @ U))[None, :]
    else:
        raise EigenError(f"unknown solver mode {opts.mode!r}")

    res = _residuals(K, M, lam, U)
    scale = max(abs(lam).max(), 1.0)
    if np.any(res > tol * scale) and opts.mode == "shift_invert":
        raise EigenError(f"shift-invert residual {res.max():.2e} above tolerance")
    kernel_dim = int(np.sum(lam < cutoff))
    return EigenResult(lam, U, res, kernel_dim, cutoff, opts.mode)


def residual_check(K, M, result: EigenResult) -> float:
    """Recompute ``max ||K u - lambda M u|| / ||u||`` from scratch."""
    K, M = _as_matrix(K), _as_matrix(M)
    U = np.asarray(result.eigenvectors, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    lam = np.atleast_1d(np.asarray(result.eigenvalues, dtype=float))
    norms = np.linalg.norm(U, axis=0)
    if np.any(norms == 0):
        raise EigenError("zero vector is not a valid eigenvector")
    worst = 0.0
    for i in range(U.shape[1]):
        u = U[:, i]
        r = K @ u - lam[i] * (M @ u)
        worst = max(worst, float(np.linalg.norm(r) / norms[i]))
    return worst


def dump_matrix(A, path) -> None:
    """Write a matrix in MatrixMarket coordinate format (debugging aid)."""
    scipy.io.mmwrite(str(path), sp.coo_matrix(A))
