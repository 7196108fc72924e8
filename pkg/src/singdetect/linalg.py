"""Cyclic Jacobi eigensolver for small dense symmetric matrices."""
from __future__ import annotations

import math

import numpy as np


def jacobi_eigh(A, tol: float = 1e-12, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors (columns) of symmetric ``A``.

    Sweeps stop once the off-diagonal Frobenius norm drops below
    ``tol * ||A||_F``; a final cleanup sweep then zeroes whatever is left
    above machine precision.
    """
    A = np.array(A, dtype=np.float64)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise ValueError("matrix must be square")
    V = np.eye(n)
    fro = np.linalg.norm(A)
    if n == 1 or fro == 0.0:
        return np.diag(A).copy(), V

    def off_norm() -> float:
        return math.sqrt(2.0 * float(np.sum(np.triu(A, 1) ** 2)))

    cleanup = False
    for _ in range(max_sweeps):
        off = off_norm()
        if off <= tol * fro:
            if cleanup:
                break
            cleanup = True
        if off == 0.0:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                app, aqq = A[p, p], A[q, q]
                theta = (aqq - app) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # rotate rows/columns p and q
                ap = A[:, p].copy()
                aq = A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap = A[p, :].copy()
                aq = A[q, :].copy()
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        raise RuntimeError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")

    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]
