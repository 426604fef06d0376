"""Quantum-number block-sparse action of the two-block superblock Hamiltonian.

The superblock wave function is a matrix ``Psi[l, r]`` over left and right
block states.  Only entries whose labels add up to the target sector are
nonzero, so ``Psi`` is stored as one dense block per left sector.  Every
coupling term ``kron(OL, OR)`` changes the left label by a fixed shift and
the right label by its negative; terms are grouped by shift and applied
sector by sector.
"""

from __future__ import annotations

import numpy as np

ZERO_TOL = 1e-14


def operator_shift(op: np.ndarray, qn: np.ndarray):
    """The label change ``qn[row] - qn[col]`` shared by all nonzeros of ``op``."""
    rows, cols = np.nonzero(np.abs(op) > ZERO_TOL)
    if rows.size == 0:
        return None
    d = qn[rows] - qn[cols]
    if np.any(d != d[0]):
        raise AssertionError("operator mixes quantum-number shifts")
    return tuple(int(v) for v in d[0])


def _sectors(qn: np.ndarray) -> dict:
    out: dict = {}
    for i, q in enumerate(map(tuple, qn.tolist())):
        out.setdefault(q, []).append(i)
    return {q: np.array(v, dtype=int) for q, v in out.items()}


class SectorSuperblock:
    """Hamiltonian ``H_L x 1 + 1 x H_R + sum_k OL_k x OR_k`` restricted to one sector.

    Parameters
    ----------
    hl, hr : ndarray
        Block Hamiltonians.
    lo, ro : ndarray, shape (K, M, M)
        Stacks of coupling operators.
    qnl, qnr : ndarray, shape (M, 2)
        Labels of left and right block states.
    target : tuple
        Total ``(n, 2sz)``.
    """

    def __init__(self, hl, hr, lo, ro, qnl, qnr, target):
        target = tuple(int(t) for t in target)
        left = _sectors(qnl)
        right = _sectors(qnr)
        self.blocks = []  # (left label, left idx, right idx)
        for q in sorted(left):
            qr = (target[0] - q[0], target[1] - q[1])
            if qr in right:
                self.blocks.append((q, left[q], right[qr]))
        if not self.blocks:
            raise AssertionError("no superblock state in the target sector")
        self.dim_left, self.dim_right = qnl.shape[0], qnr.shape[0]
        index = {q: k for k, (q, _, _) in enumerate(self.blocks)}
        sizes = [li.size * ri.size for _, li, ri in self.blocks]
        self.offsets = np.concatenate([[0], np.cumsum(sizes)])
        self.size = int(self.offsets[-1])
        self.shapes = [(li.size, ri.size) for _, li, ri in self.blocks]
        self.hl = [hl[np.ix_(li, li)] for _, li, _ in self.blocks]
        self.hr_t = [hr[np.ix_(ri, ri)].T.copy() for _, _, ri in self.blocks]

        groups: dict = {}
        for k in range(lo.shape[0]):
            s = operator_shift(lo[k], qnl)
            if s is None or operator_shift(ro[k], qnr) is None:
                continue
            groups.setdefault(s, []).append(k)
        self.terms = []  # (source block, dest block, OL stack, OR stack)
        for s, ks in groups.items():
            ks = np.array(ks)
            for src, (q, li, ri) in enumerate(self.blocks):
                dst = index.get((q[0] + s[0], q[1] + s[1]))
                if dst is None:
                    continue
                _, lj, rj = self.blocks[dst]
                ol = lo[np.ix_(ks, lj, li)]
                orr = ro[np.ix_(ks, rj, ri)]
                keep = np.array([np.any(np.abs(a) > ZERO_TOL) and np.any(np.abs(b) > ZERO_TOL)
                                 for a, b in zip(ol, orr)], dtype=bool)
                if keep.any():
                    self.terms.append((src, dst, ol[keep], orr[keep]))

        diag = []
        for k, (h1, h2) in enumerate(zip(self.hl, self.hr_t)):
            diag.append(np.diag(h1)[:, None] + np.diag(h2)[None, :])
        for src, dst, ol, orr in self.terms:
            if src == dst:
                diag[src] = diag[src] + np.einsum("kaa,kbb->ab", ol, orr)
        self.diagonal = np.concatenate([d.ravel() for d in diag])

    def split(self, x: np.ndarray) -> list:
        return [x[self.offsets[k]:self.offsets[k + 1]].reshape(self.shapes[k])
                for k in range(len(self.blocks))]

    def matvec(self, x: np.ndarray) -> np.ndarray:
        psi = self.split(x)
        out = [h1 @ p + p @ h2 for h1, h2, p in zip(self.hl, self.hr_t, psi)]
        for src, dst, ol, orr in self.terms:
            t = np.matmul(ol, psi[src])
            out[dst] += np.tensordot(t, orr, axes=([0, 2], [0, 2]))
        return np.concatenate([o.ravel() for o in out])

    def to_dense(self, x: np.ndarray) -> np.ndarray:
        psi = np.zeros((self.dim_left, self.dim_right))
        for (_, li, ri), blk in zip(self.blocks, self.split(x)):
            psi[np.ix_(li, ri)] = blk
        return psi

    def from_dense(self, psi: np.ndarray) -> np.ndarray:
        return np.concatenate([psi[np.ix_(li, ri)].ravel() for _, li, ri in self.blocks])
