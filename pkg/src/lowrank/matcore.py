"""Dense Hermitian/complex matrix kernel.

Eigendecomposition, matrix sign via functional calculus, the three
standard norms, tangent-space projections for a low-rank matrix, and the
2n x 2n Hermitian dilation used to lift non-Hermitian problems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput

HERMITICITY_TOL = 1e-12
DEFAULT_ZERO_TOL = 1e-10


def as_hermitian(A: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Validate a square complex array and return its symmetrized copy.

    Asymmetry up to `tol` (relative to the largest entry) is repaired by
    averaging with the adjoint; larger asymmetry is rejected so that bugs
    upstream are not silently hidden.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise InvalidInput(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A.view(float))):
        raise InvalidInput("matrix has non-finite entries")
    scale = max(1.0, float(np.abs(A).max()))
    asym = float(np.abs(A - A.conj().T).max())
    if asym > tol * scale:
        raise InvalidInput(f"matrix is not Hermitian (asymmetry {asym:.3e})")
    return (A + A.conj().T) / 2


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition with eigenvalues sorted in descending order."""

    eigenvalues: np.ndarray  # (n,) real, descending
    eigenvectors: np.ndarray  # (n, n) complex, column i pairs with eigenvalues[i]
    rank_tolerance: float = DEFAULT_ZERO_TOL

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def rank(self) -> int:
        """Number of eigenvalues above rank_tolerance * max|eigenvalue|."""
        top = float(np.abs(self.eigenvalues).max(initial=0.0))
        if top == 0.0:
            return 0
        return int(np.sum(np.abs(self.eigenvalues) > self.rank_tolerance * top))

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T


def eig_hermitian(A: np.ndarray) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending."""
    A = as_hermitian(A)
    vals, vecs = np.linalg.eigh(A)
    order = np.argsort(vals)[::-1]
    return Spectrum(eigenvalues=vals[order], eigenvectors=vecs[:, order])


def matrix_sign(A: np.ndarray, zero_tol: float = DEFAULT_ZERO_TOL) -> np.ndarray:
    """sign(A) by functional calculus; eigenvalues within zero_tol*||A|| map to 0."""
    if zero_tol < 0:
        raise InvalidInput("zero_tol must be nonnegative")
    spec = eig_hermitian(A)
    top = float(np.abs(spec.eigenvalues).max(initial=0.0))
    signs = np.zeros_like(spec.eigenvalues)
    if top > 0.0:
        keep = np.abs(spec.eigenvalues) > zero_tol * top
        signs[keep] = np.sign(spec.eigenvalues[keep])
    V = spec.eigenvectors
    out = (V * signs) @ V.conj().T
    return (out + out.conj().T) / 2


def norm(A: np.ndarray, kind: str = "operator") -> float:
    """Operator (largest singular value), Frobenius, or nuclear norm."""
    A = np.asarray(A, dtype=complex)
    if kind == "frobenius":
        return float(np.linalg.norm(A))
    s = np.linalg.svd(A, compute_uv=False)
    if kind == "operator":
        return float(s[0]) if s.size else 0.0
    if kind == "nuclear":
        return float(s.sum())
    raise InvalidInput(f"unknown norm kind {kind!r}")


@dataclass(frozen=True)
class TangentSpace:
    """Tangent space of a rank-r Hermitian matrix.

    Holds the orthogonal projector P onto the range together with an
    explicit orthonormal basis of the range; sigma belongs to the space
    iff its compression onto the kernel vanishes.
    """

    dim: int
    projector: np.ndarray  # (n, n) Hermitian idempotent P_U
    rank: int
    range_basis: np.ndarray  # (n, r) orthonormal columns spanning range

    @property
    def matrix_dim(self) -> int:
        """Real dimension 2nr - r^2 of the space as a set of Hermitian matrices."""
        return 2 * self.dim * self.rank - self.rank**2


def tangent_space(rho: np.ndarray, zero_tol: float = DEFAULT_ZERO_TOL) -> TangentSpace:
    """Tangent space determined by the range of rho."""
    spec = eig_hermitian(rho)
    top = float(np.abs(spec.eigenvalues).max(initial=0.0))
    if top == 0.0:
        raise InvalidInput("tangent space of the zero matrix is undefined")
    keep = np.abs(spec.eigenvalues) > zero_tol * top
    U = spec.eigenvectors[:, keep]
    P = U @ U.conj().T
    return TangentSpace(dim=rho.shape[0], projector=(P + P.conj().T) / 2,
                        rank=int(keep.sum()), range_basis=U)


def tangent_project(T: TangentSpace, sigma: np.ndarray, complement: bool = False) -> np.ndarray:
    """Project sigma onto T (or onto its orthocomplement)."""
    sigma = np.asarray(sigma, dtype=complex)
    if sigma.shape != (T.dim, T.dim):
        raise InvalidInput(f"dimension mismatch: {sigma.shape} vs {(T.dim, T.dim)}")
    P = T.projector
    PS = P @ sigma
    proj = PS + PS.conj().T - P @ sigma @ P
    proj = (proj + proj.conj().T) / 2
    # complement is the exact difference so both parts sum back to sigma
    return sigma - proj if complement else proj


def tangent_basis(T: TangentSpace) -> np.ndarray:
    """Orthonormal Hermitian basis of T, shape (2nr - r^2, n, n).

    Built in the frame [range, kernel]: rank x rank Hermitian block first
    (diagonal, then symmetric/antisymmetric pairs), then the coupling
    block between range and kernel.
    """
    n, r = T.dim, T.rank
    U = T.range_basis
    # Orthonormal completion of U to a full frame.
    full, _ = np.linalg.qr(np.hstack([U, np.eye(n, dtype=complex)]))
    frame = np.hstack([U, full[:, r:n]])
    out = np.empty((T.matrix_dim, n, n), dtype=complex)
    k = 0
    for i in range(r):
        vi = frame[:, i]
        out[k] = np.outer(vi, vi.conj())
        k += 1
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(r):
        for j in range(i + 1, n):
            vi, vj = frame[:, i], frame[:, j]
            E = np.outer(vi, vj.conj())
            out[k] = (E + E.conj().T) * inv_sqrt2
            out[k + 1] = 1j * (E - E.conj().T) * inv_sqrt2
            k += 2
    assert k == T.matrix_dim
    return out


def tilde_embed(sigma: np.ndarray) -> np.ndarray:
    """Hermitian 2n x 2n dilation (1/sqrt2) [[0, sigma], [sigma^dag, 0]]."""
    sigma = np.asarray(sigma, dtype=complex)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {sigma.shape}")
    n = sigma.shape[0]
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, n:] = sigma
    out[n:, :n] = sigma.conj().T
    return out / np.sqrt(2.0)


def polar_unitary_part(sigma: np.ndarray, zero_tol: float = DEFAULT_ZERO_TOL) -> np.ndarray:
    """Partial isometry of the polar decomposition, from singular triples.

    Singular values at or below zero_tol * smax are dropped, so the result
    maps the row space onto the column space of sigma.
    """
    sigma = np.asarray(sigma, dtype=complex)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {sigma.shape}")
    u, s, vh = np.linalg.svd(sigma)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros_like(sigma)
    keep = s > zero_tol * s[0]
    return u[:, keep] @ vh[keep, :]
