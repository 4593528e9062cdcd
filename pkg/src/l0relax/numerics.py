"""Dense symmetric linear algebra shared by all solvers.

Thin, validated wrappers around LAPACK (via scipy/numpy): Cholesky,
symmetric eigendecomposition, PSD factorization, and support-restricted
least squares.  Everything is plain float64; matrices are ordinary numpy
arrays.  ``SymMatrix`` offers an optional symmetry-checked container for
callers that want the guarantee enforced at construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg


class NotPDError(Exception):
    """Matrix is not positive definite (a Cholesky pivot was <= 0)."""


class NotPSDError(Exception):
    """Matrix has an eigenvalue below the allowed negative tolerance."""


def check_symmetric(S, tol=1e-12):
    """Validate that S is square and symmetric; return the symmetrized copy.

    Asymmetry above tol * max(1, |S|_max) raises ValueError.  The returned
    array is (S + S.T)/2 so downstream LAPACK calls see an exactly
    symmetric matrix.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    scale = max(1.0, float(np.max(np.abs(S))) if S.size else 0.0)
    gap = float(np.max(np.abs(S - S.T))) if S.size else 0.0
    if gap > tol * scale:
        raise ValueError(f"matrix is not symmetric: max asymmetry {gap:.3e}")
    return 0.5 * (S + S.T)


@dataclass(frozen=True)
class SymMatrix:
    """A real symmetric matrix, symmetry-enforced on construction."""

    a: np.ndarray
    order: int = field(init=False)

    def __post_init__(self):
        arr = check_symmetric(self.a)
        arr.setflags(write=False)
        object.__setattr__(self, "a", arr)
        object.__setattr__(self, "order", arr.shape[0])

    def full(self):
        return np.array(self.a)


@dataclass(frozen=True)
class EigenDecomp:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a SymMatrix."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self):
        return (self.vectors * self.values) @ self.vectors.T


def _as_sym_array(S):
    if isinstance(S, SymMatrix):
        return S.a
    return check_symmetric(S)


def cholesky(S):
    """Lower-triangular L with L L^T = S; raises NotPDError if S is not PD."""
    S = _as_sym_array(S)
    try:
        return scipy.linalg.cholesky(S, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise NotPDError(str(exc)) from exc


def sym_eigen(S):
    """Full symmetric eigendecomposition, eigenvalues ascending.

    Uses the classic tridiagonalization + implicit QL/QR LAPACK driver,
    which is deterministic for a fixed input.
    """
    S = _as_sym_array(S)
    vals, vecs = scipy.linalg.eigh(S, driver="ev")
    return EigenDecomp(values=vals, vectors=vecs)


def min_eigenvalue(S):
    """Smallest eigenvalue of a symmetric matrix."""
    S = _as_sym_array(S)
    return float(scipy.linalg.eigh(S, eigvals_only=True, driver="ev")[0])


def psd_factor(S, tol=1e-7):
    """Factor U with U U^T ~= S for PSD S, dropping the numerical null space.

    Eigenvalues in [-tol, 0) are clamped to zero; anything below -tol raises
    NotPSDError.  Columns are kept for eigenvalues > tol, so the returned U
    has shape (m, r) with r the numerical rank at tolerance tol.
    """
    dec = sym_eigen(S)
    vals = dec.values
    if vals.size and vals[0] < -tol:
        raise NotPSDError(f"smallest eigenvalue {vals[0]:.3e} < -{tol:.1e}")
    keep = vals > tol
    return dec.vectors[:, keep] * np.sqrt(vals[keep])


def restricted_ls(X, y, mu, support):
    """Minimize 0.5|Xb - y|^2 + 0.5*mu*|b|^2 over b supported on `support`.

    Off-support coordinates of the returned vector are exact zeros.  Raises
    NotPDError when the restricted Gram matrix (plus mu*I) is singular,
    which can only happen for mu = 0 with linearly dependent columns.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    p = X.shape[1]
    idx = np.asarray(sorted(support), dtype=int)
    b = np.zeros(p)
    if idx.size == 0:
        return b
    if idx.size and (idx[0] < 0 or idx[-1] >= p):
        raise ValueError(f"support indices out of range for p={p}")
    Xs = X[:, idx]
    Gs = Xs.T @ Xs + mu * np.eye(idx.size)
    try:
        cf = scipy.linalg.cho_factor(Gs, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise NotPDError(f"singular restricted system on support {idx.tolist()}") from exc
    b[idx] = scipy.linalg.cho_solve(cf, Xs.T @ y)
    return b
