"""Dense symmetric linear algebra.

Cholesky factorization, a cyclic Jacobi eigen-solver, the symmetric-definite
generalized eigenproblem (via Cholesky reduction) and a PCA basis. Everything
here is a pure function of its inputs.
"""

from dataclasses import dataclass

import numba
import numpy as np

from .exceptions import ConvergenceFailure, DegenerateInput, NotPositiveDefinite

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


@dataclass(frozen=True)
class EigenBasis:
    """Eigenpairs with ``values`` non-increasing and unit-norm ``vectors`` columns."""

    values: np.ndarray
    vectors: np.ndarray


def symmetrize(S):
    S = np.array(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    return 0.5 * (S + S.T)


@numba.njit(cache=True, nogil=True)
def _cholesky_kernel(S):
    n = S.shape[0]
    L = np.zeros((n, n))
    for j in range(n):
        acc = S[j, j]
        for p in range(j):
            acc -= L[j, p] * L[j, p]
        if not acc > 0.0:
            return L, j
        L[j, j] = np.sqrt(acc)
        for i in range(j + 1, n):
            acc = S[i, j]
            for p in range(j):
                acc -= L[i, p] * L[j, p]
            L[i, j] = acc / L[j, j]
    return L, -1


@numba.njit(cache=True, nogil=True)
def _jacobi_kernel(S, tol, max_sweeps):
    n = S.shape[0]
    A = S.copy()
    V = np.eye(n)
    fro = 0.0
    for i in range(n):
        for j in range(n):
            fro += A[i, j] * A[i, j]
    threshold = tol * np.sqrt(fro)
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += A[i, j] * A[i, j]
        if np.sqrt(off) <= threshold:
            return A, V, sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for r in range(n):
                    arp = A[r, p]
                    arq = A[r, q]
                    A[r, p] = c * arp - s * arq
                    A[r, q] = s * arp + c * arq
                for r in range(n):
                    apr = A[p, r]
                    aqr = A[q, r]
                    A[p, r] = c * apr - s * aqr
                    A[q, r] = s * apr + c * aqr
                A[p, q] = 0.0
                A[q, p] = 0.0
                for r in range(n):
                    vrp = V[r, p]
                    vrq = V[r, q]
                    V[r, p] = c * vrp - s * vrq
                    V[r, q] = s * vrp + c * vrq
    return A, V, -1


@numba.njit(cache=True, nogil=True)
def _forward_solve(L, B):
    # Solves L X = B for lower-triangular L, column by column.
    n, m = B.shape
    X = np.empty((n, m))
    for c in range(m):
        for i in range(n):
            acc = B[i, c]
            for p in range(i):
                acc -= L[i, p] * X[p, c]
            X[i, c] = acc / L[i, i]
    return X


@numba.njit(cache=True, nogil=True)
def _backward_solve_t(L, B):
    # Solves L^T X = B for lower-triangular L.
    n, m = B.shape
    X = np.empty((n, m))
    for c in range(m):
        for i in range(n - 1, -1, -1):
            acc = B[i, c]
            for p in range(i + 1, n):
                acc -= L[p, i] * X[p, c]
            X[i, c] = acc / L[i, i]
    return X


def _canonical_signs(vectors):
    """Flip each column so its largest-magnitude entry is positive (lowest index on ties)."""
    if vectors.size == 0:
        return vectors
    lead = np.argmax(np.abs(vectors), axis=0)
    signs = np.where(vectors[lead, np.arange(vectors.shape[1])] < 0, -1.0, 1.0)
    return vectors * signs


def _sorted_basis(values, vectors):
    order = np.argsort(-values, kind="stable")
    return EigenBasis(values[order], _canonical_signs(vectors[:, order]))


def cholesky(S):
    """Lower-triangular ``L`` with ``L @ L.T == S``.

    Raises NotPositiveDefinite as soon as a pivot is not strictly positive.
    """
    S = symmetrize(S)
    if S.shape[0] < 1:
        raise ValueError("matrix must have dimension >= 1")
    L, failed = _cholesky_kernel(S)
    if failed >= 0:
        raise NotPositiveDefinite(f"non-positive pivot at index {failed}")
    return L


def sym_eigen(S):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations."""
    S = symmetrize(S)
    A, V, sweeps = _jacobi_kernel(S, JACOBI_TOL, JACOBI_MAX_SWEEPS)
    if sweeps < 0:
        raise ConvergenceFailure(f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")
    return _sorted_basis(np.diag(A).copy(), V)


def generalized_eigen(A, Bmat, ridge=0.0):
    """Eigenpairs of ``inv(Bmat + ridge*I) @ A`` for symmetric ``A`` and SPD ``Bmat``.

    Reduces to a symmetric problem with ``Bmat + ridge*I = L L^T``: the
    eigenvectors ``w`` of ``L^-1 A L^-T`` map back to ``u = L^-T w``. Columns
    are rescaled to unit Euclidean norm and negative eigenvalues clamped to 0.
    """
    A = symmetrize(A)
    Bmat = symmetrize(Bmat)
    if A.shape != Bmat.shape:
        raise ValueError(f"shape mismatch: {A.shape} vs {Bmat.shape}")
    dim = A.shape[0]
    L = cholesky(Bmat + ridge * np.eye(dim))
    # (L^-1 A)^T = A L^-T, so a second forward solve gives L^-1 A L^-T.
    C = _forward_solve(L, _forward_solve(L, A).T.copy())
    reduced = sym_eigen(C)
    U = _backward_solve_t(L, np.ascontiguousarray(reduced.vectors))
    U = U / np.linalg.norm(U, axis=0)
    return _sorted_basis(np.maximum(reduced.values, 0.0), U)


def pca_basis(X, m_out):
    """Top ``m_out`` principal directions of the column-centred sample covariance."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be two-dimensional")
    n, m = X.shape
    if n < 2:
        raise DegenerateInput("PCA needs at least two points")
    if not 1 <= m_out <= m:
        raise ValueError(f"m_out must lie in [1, {m}], got {m_out}")
    centred = X - X.mean(axis=0)
    eig = sym_eigen(centred.T @ centred / (n - 1))
    return EigenBasis(eig.values[:m_out], eig.vectors[:, :m_out])
