"""Covariance, eigendecomposition, PC subspaces, and principal angles.

The covariance here is the uncentered second-moment matrix ``X.T @ X / n``;
winsorized PCA is the eigendecomposition of that matrix after the rows of
``X`` have been winsorized, with no mean subtraction at any point.  Distances
between fitted and target subspaces are measured by principal angles, with
two independent computational routes (SVD of the cross-Gram matrix, and the
operator norm through an orthonormal complement) that cross-validate each
other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .transform import (
    RadiusSpec,
    as_data_matrix,
    resolve_radius,
    spherize_dataset,
    winsorize_dataset,
)

__all__ = [
    "Spectrum",
    "Subspace",
    "AngleReport",
    "WPCAFit",
    "sample_covariance",
    "symmetric_eigh",
    "fit_pc_subspace",
    "principal_angles",
    "sin_theta_operator",
]

# Eigenvalue ties at this relative scale make the top-d subspace ill-defined.
GAP_TIE_TOL = 1e-12


@dataclass(frozen=True)
class Spectrum:
    """Descending eigenvalues with matching orthonormal eigenvector columns.

    ``eigenvalues`` always has full length p.  ``eigenvectors`` has p rows
    and up to p columns; on the thin-SVD fitting path only ``min(n, p)``
    columns are available, and the trailing eigenvalues are exact zeros.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.eigenvalues, dtype=np.float64)
        vecs = np.asarray(self.eigenvectors, dtype=np.float64)
        if vals.ndim != 1 or vecs.ndim != 2:
            raise ValueError("Spectrum expects a 1-D value vector and 2-D vector matrix")
        if vecs.shape[1] > vals.size or vecs.shape[0] != vals.size:
            raise ValueError(
                f"shape mismatch: {vals.size} eigenvalues, eigenvectors {vecs.shape}"
            )
        if np.any(np.diff(vals) > 0):
            raise ValueError("eigenvalues must be sorted in descending order")
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "eigenvectors", vecs)


@dataclass(frozen=True)
class Subspace:
    """A d-dimensional linear subspace of R^p, stored as an orthonormal basis."""

    basis: np.ndarray

    def __post_init__(self) -> None:
        B = np.ascontiguousarray(self.basis, dtype=np.float64)
        if B.ndim == 1:
            B = B[:, None]
        if B.ndim != 2 or B.shape[0] < 1 or B.shape[1] < 1:
            raise ValueError("basis must be a nonempty p x d matrix")
        if B.shape[1] > B.shape[0]:
            raise ValueError(f"subspace dimension {B.shape[1]} exceeds ambient {B.shape[0]}")
        gram = B.T @ B
        if np.max(np.abs(gram - np.eye(B.shape[1]))) > 1e-8:
            raise ValueError("basis columns are not orthonormal within 1e-8")
        object.__setattr__(self, "basis", B)

    @property
    def p(self) -> int:
        return self.basis.shape[0]

    @property
    def d(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True)
class AngleReport:
    """Principal angles between two subspaces, ascending, in [0, pi/2]."""

    angles: np.ndarray

    @property
    def smallest(self) -> float:
        return float(self.angles[0])

    @property
    def largest(self) -> float:
        return float(self.angles[-1])

    @property
    def sin_largest(self) -> float:
        return math.sin(self.largest)


@dataclass(frozen=True)
class WPCAFit:
    """Result of a PC-subspace fit: basis, full spectrum, and how the radius resolved.

    ``degenerate_gap`` flags an eigenvalue tie at the subspace boundary; the
    fit is still returned but downstream gap-based bounds will be infinite.
    """

    subspace: Subspace
    spectrum: Spectrum
    mode: str
    effective_radius: float | None
    degenerate_gap: bool

    @property
    def basis(self) -> np.ndarray:
        return self.subspace.basis


def sample_covariance(X) -> np.ndarray:
    """Uncentered sample covariance ``X.T @ X / n``; no mean subtraction."""
    A = as_data_matrix(X)
    return A.T @ A / A.shape[0]


def _fix_column_signs(V: np.ndarray) -> np.ndarray:
    # Deterministic orientation: largest-magnitude entry of each column positive.
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def symmetric_eigh(S) -> Spectrum:
    """Eigendecomposition of a symmetric matrix, eigenvalues descending.

    Input must be symmetric within 1e-8 relative; it is symmetrized before
    factorization.  Negative eigenvalues within roundoff of zero (1e-10
    relative to the largest) are clamped to exactly zero.  Each eigenvector is
    oriented so its largest-magnitude entry is positive.
    """
    A = np.ascontiguousarray(S, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix contains non-finite entries")
    scale = np.max(np.abs(A)) if A.size else 0.0
    if np.max(np.abs(A - A.T)) > 1e-8 * max(scale, 1e-300):
        raise ValueError("matrix is not symmetric within 1e-8 relative")
    w, V = np.linalg.eigh((A + A.T) / 2.0)
    w = w[::-1].copy()
    V = V[:, ::-1]
    top = w[0] if w.size else 0.0
    if top > 0:
        w[(w < 0) & (w >= -1e-10 * top)] = 0.0
    return Spectrum(w, _fix_column_signs(V))


def _thin_svd_spectrum(W: np.ndarray) -> Spectrum:
    n, p = W.shape
    _, s, Vh = np.linalg.svd(W, full_matrices=False)
    vals = np.zeros(p)
    vals[: s.size] = s * s / n
    return Spectrum(vals, _fix_column_signs(Vh.T))


def fit_pc_subspace(X, d: int, spec: RadiusSpec) -> WPCAFit:
    """Fit the top-d PC subspace of ``X`` after applying a radius policy.

    The pipeline is: resolve the radius policy, winsorize / spherize / leave
    the rows alone accordingly, form the uncentered covariance, and take the
    top-d eigenvectors.  The full spectrum travels with the result so bound
    computations can consume the winsorized sample eigenvalues.
    """
    A = as_data_matrix(X)
    n, p = A.shape
    d = int(d)
    if not 1 <= d <= p:
        raise ValueError(f"subspace dimension d={d} must satisfy 1 <= d <= p={p}")
    mode, r = resolve_radius(A, spec)
    if mode == "winsorize":
        W = winsorize_dataset(A, r)
    elif mode == "spherize":
        W = spherize_dataset(A)
    else:
        W = A
    n_eff = W.shape[0]
    # Thin SVD of the transformed rows when the dense p x p eigenproblem is
    # the wrong tool; singular values squared over n are the eigenvalues.
    if (n_eff < p or p > 1000) and min(n_eff, p) >= d:
        spectrum = _thin_svd_spectrum(W)
    else:
        spectrum = symmetric_eigh(W.T @ W / n_eff)
    vals = spectrum.eigenvalues
    lam_next = vals[d] if d < p else 0.0
    degenerate = (vals[d - 1] - lam_next) <= GAP_TIE_TOL * max(vals[0], 1e-300)
    basis = spectrum.eigenvectors[:, :d]
    return WPCAFit(Subspace(basis), spectrum, mode, r, bool(degenerate))


def _basis_of(S) -> np.ndarray:
    if isinstance(S, Subspace):
        return S.basis
    B = np.ascontiguousarray(S, dtype=np.float64)
    if B.ndim == 1:
        B = B[:, None]
    if B.ndim != 2 or not np.all(np.isfinite(B)):
        raise ValueError("subspace basis must be a finite p x d matrix")
    if B.shape[1] > B.shape[0]:
        raise ValueError(f"subspace dimension {B.shape[1]} exceeds ambient {B.shape[0]}")
    if np.max(np.abs(B.T @ B - np.eye(B.shape[1]))) > 1e-6:
        raise ValueError("basis columns are not orthonormal")
    return B


def _check_pair(U, W) -> tuple[np.ndarray, np.ndarray]:
    Ub, Wb = _basis_of(U), _basis_of(W)
    if Ub.shape[0] != Wb.shape[0]:
        raise ValueError(f"ambient dimensions differ: {Ub.shape[0]} vs {Wb.shape[0]}")
    if Ub.shape[1] != Wb.shape[1]:
        raise ValueError(f"subspace dimensions differ: {Ub.shape[1]} vs {Wb.shape[1]}")
    return Ub, Wb


def principal_angles(U, W) -> AngleReport:
    """Principal angles between two d-dimensional subspaces of R^p.

    The cosines are the singular values of ``U.T @ W`` clamped to [0, 1];
    angles are reported ascending, so ``largest`` is the angle that bounds
    subspace recovery error and ``smallest`` the best-aligned direction.
    """
    Ub, Wb = _check_pair(U, W)
    if Ub.shape[1] == Ub.shape[0] or np.array_equal(Ub, Wb):
        # Identical bases, or two full bases of the whole space, span the
        # same subspace; skip the SVD so the zero angle is exact rather
        # than arccos of 1 minus roundoff.
        return AngleReport(np.zeros(Ub.shape[1]))
    sigma = np.linalg.svd(Ub.T @ Wb, compute_uv=False)
    return AngleReport(np.arccos(np.clip(sigma, 0.0, 1.0)))


def sin_theta_operator(U, W) -> float:
    """Sine of the largest principal angle via an orthonormal complement.

    Computes the operator 2-norm of ``U_perp.T @ W`` where ``U_perp``
    completes the first basis; this is an independent route to
    ``sin(principal_angles(U, W).largest)`` and the two agree within 1e-8.
    """
    Ub, Wb = _check_pair(U, W)
    p, d = Ub.shape
    if d == p or np.array_equal(Ub, Wb):
        return 0.0
    Q, _, _ = np.linalg.svd(Ub, full_matrices=True)
    perp = Q[:, d:]
    sigma = np.linalg.svd(perp.T @ Wb, compute_uv=False)
    return float(min(sigma[0], 1.0)) if sigma.size else 0.0
