"""Cyclic Jacobi eigensolver for stacks of small symmetric matrices."""

from __future__ import annotations

import numpy as np

from .errors import NumericError

OFF_TOL = 1e-13
MAX_SWEEPS = 100


def eigh_jacobi(a, tol=OFF_TOL, max_sweeps=MAX_SWEEPS):
    """Eigen-decomposition of symmetric matrices by cyclic Jacobi rotations.

    Parameters
    ----------
    a : array_like, shape (..., n, n)
        Symmetric matrices. Only the symmetric part is used.
    tol : float
        Sweeps stop once the off-diagonal Frobenius mass of every matrix is
        below ``tol`` times its full Frobenius norm.
    max_sweeps : int
        Upper bound on the number of full sweeps.

    Returns
    -------
    w : ndarray, shape (..., n)
        Eigenvalues in ascending order.
    v : ndarray, shape (..., n, n)
        Orthonormal eigenvectors stored column-wise, ``a = v @ diag(w) @ v.T``.

    Raises
    ------
    NumericError
        If some matrix is not diagonalised within ``max_sweeps`` sweeps.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {a.shape}")
    batch_shape = a.shape[:-2]
    n = a.shape[-1]
    work = a.reshape(-1, n, n)
    work = 0.5 * (work + np.swapaxes(work, -1, -2))
    v = np.broadcast_to(np.eye(n), work.shape).copy()
    if not np.all(np.isfinite(work)):
        raise NumericError("non-finite entries passed to the Jacobi eigensolver")

    scale = np.sqrt(np.sum(work * work, axis=(-1, -2)))
    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(work[:, offdiag] ** 2, axis=-1))
        if np.all(off <= tol * scale):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                _rotate(work, v, p, q)
    else:
        off = np.sqrt(np.sum(work[:, offdiag] ** 2, axis=-1))
        if not np.all(off <= tol * scale):
            raise NumericError(
                f"Jacobi eigensolver did not converge in {max_sweeps} sweeps "
                f"(max relative off-diagonal mass {np.max(off / np.maximum(scale, 1e-300)):.3e})"
            )

    w = np.diagonal(work, axis1=-2, axis2=-1).copy()
    order = np.argsort(w, axis=-1)
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[:, None, :], axis=-1)
    return w.reshape(batch_shape + (n,)), v.reshape(batch_shape + (n, n))


def _rotate(a, v, p, q):
    # annihilates a[:, p, q] in place; v accumulates the rotations
    apq = a[:, p, q]
    active = apq != 0.0
    if not np.any(active):
        return
    app = a[:, p, p]
    aqq = a[:, q, q]
    safe_apq = np.where(active, apq, 1.0)
    with np.errstate(over="ignore", divide="ignore"):
        theta = (aqq - app) / (2.0 * safe_apq)
    big = ~(np.abs(theta) <= 1e150)
    tame = np.where(big, 0.0, theta)
    theta_sq = tame * tame
    t = np.where(
        big,
        0.5 / np.where(theta == 0.0, 1.0, theta),
        np.where(theta >= 0.0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta_sq + 1.0)),
    )
    t = np.where(active, t, 0.0)
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c

    cc = c[:, None]
    ss = s[:, None]
    col_p = a[:, :, p].copy()
    col_q = a[:, :, q].copy()
    a[:, :, p] = cc * col_p - ss * col_q
    a[:, :, q] = ss * col_p + cc * col_q
    row_p = a[:, p, :].copy()
    row_q = a[:, q, :].copy()
    a[:, p, :] = cc * row_p - ss * row_q
    a[:, q, :] = ss * row_p + cc * row_q
    a[:, p, q] = np.where(active, 0.0, a[:, p, q])
    a[:, q, p] = a[:, p, q]

    vp = v[:, :, p].copy()
    vq = v[:, :, q].copy()
    v[:, :, p] = cc * vp - ss * vq
    v[:, :, q] = ss * vp + cc * vq


def sym_function(w, v, fw):
    """Rebuild ``v @ diag(fw) @ v.T`` from an eigen-decomposition."""
    return np.einsum("...ik,...k,...jk->...ij", v, fw, v)
