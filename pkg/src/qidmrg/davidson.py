"""Davidson eigensolver for the lowest eigenpairs of a real symmetric operator."""

from __future__ import annotations

from typing import Callable

import numpy as np


class ConvergenceError(RuntimeError):
    """Iterative eigensolver hit its iteration cap."""


def davidson(
    matvec: Callable[[np.ndarray], np.ndarray],
    diag: np.ndarray,
    x0: np.ndarray,
    k: int = 1,
    tol: float = 1e-9,
    max_iter: int = 2000,
    max_space: int | None = None,
    dense_below: int = 64,
):
    """Lowest ``k`` eigenpairs of a symmetric operator given only ``matvec``.

    Parameters
    ----------
    matvec : callable
        ``v -> H v`` on 1-D arrays.
    diag : ndarray
        Diagonal of ``H``; used for the preconditioner ``(E - diag)^-1``.
    x0 : ndarray
        Start vectors, shape ``(n,)`` or ``(n, m)``.
    tol : float
        Converged when every residual norm ``||Hv - Ev||`` is below ``tol``.
    dense_below : int
        Problems of this dimension or smaller are solved by applying ``matvec``
        to the identity and calling ``eigh``.

    Returns
    -------
    energies : ndarray, shape (k,)
    vectors : ndarray, shape (n, k)
    residuals : ndarray, shape (k,)
    """
    diag = np.asarray(diag, dtype=float)
    n = diag.size
    if k > n:
        raise ValueError(f"requested {k} eigenpairs of a dimension-{n} operator")
    if n <= max(dense_below, k):
        hmat = np.column_stack([matvec(e) for e in np.eye(n)])
        hmat = (hmat + hmat.T) / 2
        w, v = np.linalg.eigh(hmat)
        res = np.linalg.norm(hmat @ v[:, :k] - v[:, :k] * w[:k], axis=0)
        return w[:k], v[:, :k], res

    max_space = max_space or max(8 * k, 40)
    x0 = np.asarray(x0, dtype=float).reshape(n, -1)
    basis = _orthonormalize(np.empty((n, 0)), x0)
    if basis.shape[1] < k:
        extra = np.eye(n)[:, np.argsort(diag, kind="stable")[: k + 1]]
        basis = _orthonormalize(basis, extra)[:, : max(k, basis.shape[1])]
    hbasis = np.column_stack([matvec(b) for b in basis.T])

    for _ in range(max_iter):
        sub = basis.T @ hbasis
        sub = (sub + sub.T) / 2
        w, c = np.linalg.eigh(sub)
        w, c = w[:k], c[:, :k]
        x = basis @ c
        hx = hbasis @ c
        resid = hx - x * w
        norms = np.linalg.norm(resid, axis=0)
        if np.all(norms < tol):
            return w, x, norms

        corrections = []
        for i in np.flatnonzero(norms >= tol):
            denom = w[i] - diag
            denom[np.abs(denom) < 1e-8] = 1e-8
            corrections.append(resid[:, i] / denom)
        if basis.shape[1] + len(corrections) > max_space:
            basis, hbasis = x, hx  # thick restart on the current Ritz vectors
        new = _orthonormalize(basis, np.column_stack(corrections))
        if new.shape[1] == basis.shape[1]:
            # preconditioned residuals collapsed into the space; fall back to raw residuals
            new = _orthonormalize(basis, resid[:, norms >= tol])
            if new.shape[1] == basis.shape[1]:
                return w, x, norms
        added = new[:, basis.shape[1]:]
        basis = new
        hbasis = np.column_stack([hbasis] + [matvec(b) for b in added.T])
    raise ConvergenceError(f"Davidson did not converge in {max_iter} iterations (residuals {norms})")


def _orthonormalize(basis: np.ndarray, vecs: np.ndarray, eps: float = 1e-10) -> np.ndarray:
    cur = basis
    for v in vecs.T:
        v = v.copy()
        for _ in range(2):
            if cur.shape[1]:
                v -= cur @ (cur.T @ v)
        nv = np.linalg.norm(v)
        if nv > eps:
            v /= nv
            cur = np.column_stack([cur, v]) if cur.size else v[:, None]
    return cur if cur.size else np.empty((vecs.shape[0], 0))
