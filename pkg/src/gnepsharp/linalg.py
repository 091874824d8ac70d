"""Small dense symmetric eigenvalue routines (cyclic Jacobi)."""

import numpy as np


def jacobi_eigh(S, tol=1e-15, max_sweeps=100):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    S : array_like, shape (n, n)
        Symmetric matrix. Only desk-scale sizes (n up to ~50) are intended.
    tol : float
        Sweeps stop once the off-diagonal Frobenius norm drops below
        ``tol * ||S||_F``.
    max_sweeps : int
        Hard cap on the number of full sweeps.

    Returns
    -------
    w : ndarray, shape (n,)
        Eigenvalues in ascending order.
    V : ndarray, shape (n, n)
        Orthonormal eigenvectors, ``V[:, k]`` belongs to ``w[k]``.
    """
    A = np.array(S, dtype=float, copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("jacobi_eigh expects a square matrix")
    n = A.shape[0]
    V = np.eye(n)
    if n == 0:
        return np.zeros(0), V
    A = 0.5 * (A + A.T)
    scale = np.linalg.norm(A)
    if scale == 0.0:
        return np.zeros(n), V
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-18 * scale:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # rotate rows/cols p and q
                Ap = A[:, p].copy()
                Aq = A[:, q].copy()
                A[:, p] = c * Ap - s * Aq
                A[:, q] = s * Ap + c * Aq
                Ap = A[p, :].copy()
                Aq = A[q, :].copy()
                A[p, :] = c * Ap - s * Aq
                A[q, :] = s * Ap + c * Aq
                Vp = V[:, p].copy()
                Vq = V[:, q].copy()
                V[:, p] = c * Vp - s * Vq
                V[:, q] = s * Vp + c * Vq
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def eigvalsh(S):
    return jacobi_eigh(S)[0]


def lambda_min(S):
    """Smallest eigenvalue of the symmetric matrix ``S``."""
    return float(eigvalsh(S)[0])


def lambda_max(S):
    return float(eigvalsh(S)[-1])


def spectral_norm(M):
    """2-norm of a (not necessarily symmetric) matrix via eig(M^T M)."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    return float(np.sqrt(max(lambda_max(M.T @ M), 0.0)))
