"""Full configuration interaction in a fixed (N, Sz) sector.

Determinant layout: bit ``p`` of the occupation integer is the up-spin
orbital ``p`` and bit ``n + p`` the down-spin orbital ``p``.  A determinant is
``prod_{bits ascending} a+_bit |vac>``, i.e. all up creators precede all down
creators, each group in orbital order.  The Hamiltonian is applied without
ever forming a matrix, as excitation tables acting on alpha and beta strings.

Orbital reduced density matrices use the local basis (0, dn, up, updn) with
``|updn> = a+_up a+_dn |0>``; for two orbitals ``a < b`` (original labels)
the product state ``|x y>`` is ``C_x(a) C_y(b) |0>`` and the basis index is
``4 * x + y``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from math import comb
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .davidson import davidson
from .integrals import IntegralSet, reference_determinant

MAX_DETERMINANTS = 4_000_000
RDM_TOL = 1e-12

# local basis (0, dn, up, updn): index = 2 * n_up + n_dn
LOCAL_QN = np.array([(0, 0), (1, -1), (1, 1), (2, 0)])


class SectorError(ValueError):
    """Requested (N, Sz) sector is empty or beyond the size cap."""


def _strings(n: int, k: int) -> np.ndarray:
    out = [sum(1 << i for i in c) for c in combinations(range(n), k)]
    return np.array(sorted(out), dtype=np.int64)


def _popcount_below(x: int, i: int) -> int:
    return bin(x & ((1 << i) - 1)).count("1")


@dataclass(frozen=True)
class SectorBasis:
    """Sorted, duplicate-free determinant list for (n_orbitals, n_electrons, 2Sz)."""

    n_orbitals: int
    n_electrons: int
    two_sz: int
    alpha: np.ndarray
    beta: np.ndarray

    @property
    def n_alpha(self) -> int:
        return (self.n_electrons + self.two_sz) // 2

    @property
    def n_beta(self) -> int:
        return (self.n_electrons - self.two_sz) // 2

    @property
    def size(self) -> int:
        return self.alpha.size * self.beta.size

    def __len__(self) -> int:
        return self.size

    @cached_property
    def determinants(self) -> np.ndarray:
        """Occupation integers, ascending (beta string major, alpha minor)."""
        return (self.beta[:, None] << self.n_orbitals | self.alpha[None, :]).ravel()

    def to_matrix(self, amplitudes: np.ndarray) -> np.ndarray:
        """Flat determinant-ordered amplitudes -> ``C[alpha, beta]``."""
        return np.asarray(amplitudes).reshape(self.beta.size, self.alpha.size).T

    def from_matrix(self, cmat: np.ndarray) -> np.ndarray:
        return np.ascontiguousarray(cmat.T).ravel()

    def index_of(self, det: int) -> int:
        a = det & ((1 << self.n_orbitals) - 1)
        b = det >> self.n_orbitals
        ia = np.searchsorted(self.alpha, a)
        ib = np.searchsorted(self.beta, b)
        if ia >= self.alpha.size or ib >= self.beta.size or self.alpha[ia] != a or self.beta[ib] != b:
            raise KeyError(det)
        return int(ib * self.alpha.size + ia)


def enumerate_sector(n_orbitals: int, n_electrons: int, two_sz: int) -> SectorBasis:
    if not 0 <= n_electrons <= 2 * n_orbitals or abs(two_sz) > n_electrons \
            or (two_sz - n_electrons) % 2:
        raise SectorError(f"infeasible sector N={n_electrons}, 2Sz={two_sz} on {n_orbitals} orbitals")
    na, nb = (n_electrons + two_sz) // 2, (n_electrons - two_sz) // 2
    if na > n_orbitals or nb > n_orbitals:
        raise SectorError(f"infeasible sector N={n_electrons}, 2Sz={two_sz} on {n_orbitals} orbitals")
    if comb(n_orbitals, na) * comb(n_orbitals, nb) > MAX_DETERMINANTS:
        raise SectorError(f"sector exceeds the {MAX_DETERMINANTS} determinant cap")
    return SectorBasis(n_orbitals, n_electrons, two_sz, _strings(n_orbitals, na), _strings(n_orbitals, nb))


@dataclass
class WaveVector:
    basis: SectorBasis
    amplitudes: np.ndarray

    def normalized(self) -> "WaveVector":
        return WaveVector(self.basis, self.amplitudes / np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class SubsetRDM:
    """Reduced density matrix of one or two orbitals in the local product basis."""

    orbital_subset: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        d = 4 ** len(self.orbital_subset)
        if m.shape != (d, d):
            raise ValueError(f"RDM for {len(self.orbital_subset)} orbitals must be {d}x{d}")
        object.__setattr__(self, "matrix", m)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh((self.matrix + self.matrix.T) / 2)

    def partial_trace(self, keep: int) -> "SubsetRDM":
        """One-orbital RDM of ``orbital_subset[keep]`` from a two-orbital RDM."""
        m = self.matrix.reshape(4, 4, 4, 4)
        red = np.einsum("ajbj->ab", m) if keep == 0 else np.einsum("jajb->ab", m)
        return SubsetRDM((self.orbital_subset[keep],), red)


class _StringTables:
    """Excitation tables ``E_ij = a+_i a_j`` on occupation strings of one spin."""

    def __init__(self, strings: np.ndarray, n: int):
        index = {int(s): k for k, s in enumerate(strings)}
        rows, cols, vals = [], [], []
        for k, s in enumerate(strings):
            s = int(s)
            occ = [j for j in range(n) if s >> j & 1]
            for j in occ:
                s1 = s ^ (1 << j)
                sign_j = -1 if _popcount_below(s, j) % 2 else 1
                for i in range(n):
                    if s1 >> i & 1:
                        continue
                    t = s1 | (1 << i)
                    sign = sign_j * (-1 if _popcount_below(s1, i) % 2 else 1)
                    rows.append((i * n + j, index[t]))
                    cols.append(k)
                    vals.append(sign)
        ns = len(strings)
        ij = np.array([r[0] for r in rows], dtype=np.int64)
        dst = np.array([r[1] for r in rows], dtype=np.int64)
        src = np.array(cols, dtype=np.int64)
        val = np.array(vals, dtype=float)
        # gather: D[ij*ns + dst, :] = sum_src E_ij[dst, src] C[src, :]
        self.gather = sp.csr_matrix((val, (ij * ns + dst, src)), shape=(n * n * ns, ns))
        # scatter: sigma[dst, :] = sum_{ij, src} E_ij[dst, src] G[ij*ns + src, :]
        self.scatter = sp.csr_matrix((val, (dst, ij * ns + src)), shape=(ns, n * n * ns))
        self.occupations = np.array([[s >> i & 1 for i in range(n)] for s in strings], dtype=float) \
            if ns else np.zeros((0, n))


class FciHamiltonian:
    """Matrix-free ``H`` on a :class:`SectorBasis` (Knowles-Handy sigma build)."""

    def __init__(self, h: IntegralSet, basis: SectorBasis):
        n = h.n_orbitals
        if basis.n_orbitals != n:
            raise ValueError("basis and integrals disagree on orbital count")
        self.h = h
        self.basis = basis
        self.n = n
        g = h.two_body
        self.k = h.one_body - 0.5 * np.einsum("ikkj->ij", g)
        self.gmat = g.reshape(n * n, n * n)
        self.ta = _StringTables(basis.alpha, n)
        self.tb = _StringTables(basis.beta, n) if basis.n_alpha != basis.n_beta \
            or not np.array_equal(basis.alpha, basis.beta) else self.ta

    @cached_property
    def diagonal(self) -> np.ndarray:
        h, g = self.h.one_body, self.h.two_body
        oa, ob = self.ta.occupations, self.tb.occupations
        hd = np.diag(h)
        jmat = np.einsum("iijj->ij", g)
        kmat = np.einsum("ijji->ij", g)
        ea = oa @ hd + 0.5 * np.einsum("ai,ij,aj->a", oa, jmat - kmat, oa)
        eb = ob @ hd + 0.5 * np.einsum("bi,ij,bj->b", ob, jmat - kmat, ob)
        eab = oa @ jmat @ ob.T
        dmat = self.h.core_energy + ea[:, None] + eb[None, :] + eab
        return self.basis.from_matrix(dmat)

    def apply_matrix(self, c: np.ndarray) -> np.ndarray:
        n2 = self.n * self.n
        na, nb = c.shape
        # D[kl, a, b] = (E_kl C)[a, b], spin summed
        d = (self.ta.gather @ c).reshape(n2, na, nb)
        d += (self.tb.gather @ c.T).reshape(n2, nb, na).transpose(0, 2, 1)
        gd = (self.gmat @ d.reshape(n2, -1)).reshape(n2, na, nb)
        gd *= 0.5
        gd += self.k.reshape(n2, 1, 1) * c[None, :, :]
        sigma = self.ta.scatter @ gd.reshape(n2 * na, nb)
        sigma += (self.tb.scatter @ gd.transpose(0, 2, 1).reshape(n2 * nb, na)).T
        return sigma + self.h.core_energy * c

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.basis.from_matrix(self.apply_matrix(self.basis.to_matrix(v)))


def reference_determinant_bits(h: IntegralSet) -> int:
    bits = 0
    n = h.n_orbitals
    for p, state in enumerate(reference_determinant(h.meta.hf_occupations)):
        if state & 2:
            bits |= 1 << p
        if state & 1:
            bits |= 1 << (n + p)
    return bits


def determinant_energy(h: IntegralSet, det: int) -> float:
    """``<D|H|D>`` for one determinant (Slater-Condon diagonal rule)."""
    n = h.n_orbitals
    oa = np.array([det >> p & 1 for p in range(n)], dtype=float)
    ob = np.array([det >> (n + p) & 1 for p in range(n)], dtype=float)
    g = h.two_body
    jmat = np.einsum("iijj->ij", g)
    kmat = np.einsum("ijji->ij", g)
    hd = np.diag(h.one_body)
    e = h.core_energy + (oa + ob) @ hd
    e += 0.5 * (oa + ob) @ jmat @ (oa + ob)
    e -= 0.5 * (oa @ kmat @ oa + ob @ kmat @ ob)
    return float(e)


def hf_energy(h: IntegralSet) -> float:
    """Energy of the reference determinant built from ``meta.hf_occupations``."""
    return determinant_energy(h, reference_determinant_bits(h))


def ground_state(h: IntegralSet, sector: SectorBasis, k: int = 1, tol: float = 1e-9,
                 max_iter: int = 2000, seed: int = 7) -> list[tuple[float, WaveVector]]:
    """The ``k`` lowest eigenpairs of ``h`` in ``sector``.

    Start vectors: the reference determinant when it lies in the sector,
    otherwise the lowest-diagonal determinants, each mixed with a 1e-3
    seeded random component so no symmetry sector is excluded.
    """
    if sector.size == 0:
        raise ValueError("empty sector")
    ham = FciHamiltonian(h, sector)
    diag = ham.diagonal
    order = np.argsort(diag, kind="stable")
    starts = []
    try:
        starts.append(sector.index_of(reference_determinant_bits(h)))
    except KeyError:
        pass
    for idx in order:
        if len(starts) >= k:
            break
        if idx not in starts:
            starts.append(int(idx))
    rng = np.random.default_rng(seed)
    x0 = np.zeros((sector.size, len(starts)))
    for c, idx in enumerate(starts):
        x0[idx, c] = 1.0
    x0 += 1e-3 * rng.standard_normal(x0.shape)
    w, v, res = davidson(ham.matvec, diag, x0, k=k, tol=tol, max_iter=max_iter)
    out = []
    for i in range(k):
        vec = v[:, i] / np.linalg.norm(v[:, i])
        # fix the global sign: largest-magnitude amplitude positive
        if vec[np.argmax(np.abs(vec))] < 0:
            vec = -vec
        out.append((float(w[i]), WaveVector(sector, vec)))
    return out


def residual_norm(h: IntegralSet, energy: float, psi: WaveVector) -> float:
    ham = FciHamiltonian(h, psi.basis)
    return float(np.linalg.norm(ham.matvec(psi.amplitudes) - energy * psi.amplitudes))


# --- reduced density matrices -------------------------------------------------

def _local_state(det: int, n: int, orb: int) -> int:
    return 2 * (det >> orb & 1) + (det >> (n + orb) & 1)


def _reorder_sign(det: int, n: int, subset: Sequence[int]) -> int:
    """Sign of moving the subset's creators to the front, in the order
    (a up, a dn, b up, b dn, ...), followed by the rest in global order."""
    front = []
    for o in subset:
        if det >> o & 1:
            front.append(o)
        if det >> (n + o) & 1:
            front.append(n + o)
    chosen = set(front)
    rest = [b for b in range(2 * n) if det >> b & 1 and b not in chosen]
    seq = front + rest
    inv = 0
    for x in range(len(seq)):
        for y in range(x + 1, len(seq)):
            if seq[x] > seq[y]:
                inv += 1
    return -1 if inv % 2 else 1


def schmidt_matrix(psi: WaveVector, subset: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient matrix ``M[x, rest]`` with ``psi = sum M[x, r] |x>_subset |r>``.

    Returns ``(M, local_configs)`` where ``local_configs`` are the integer
    subset configurations (base-4 digits, first orbital most significant).
    """
    n = psi.basis.n_orbitals
    subset = list(subset)
    dets = psi.basis.determinants
    amps = psi.amplitudes
    mask_sub = 0
    for o in subset:
        mask_sub |= (1 << o) | (1 << (n + o))
    xs = np.empty(dets.size, dtype=np.int64)
    rs = np.empty(dets.size, dtype=np.int64)
    vals = np.empty(dets.size)
    for k, det in enumerate(dets.tolist()):
        x = 0
        for o in subset:
            x = 4 * x + _local_state(det, n, o)
        xs[k] = x
        rs[k] = det & ~mask_sub
        vals[k] = amps[k] * _reorder_sign(det, n, subset)
    ux, ix = np.unique(xs, return_inverse=True)
    ur, ir = np.unique(rs, return_inverse=True)
    m = np.zeros((ux.size, ur.size))
    m[ix, ir] = vals
    return m, ux


def subset_rdm(psi: WaveVector, orbitals: Sequence[int]) -> SubsetRDM:
    """Partial trace of ``|psi><psi|`` onto one or two orbitals (0-based)."""
    orbitals = list(orbitals)
    n = psi.basis.n_orbitals
    if not 1 <= len(orbitals) <= 2 or len(set(orbitals)) != len(orbitals):
        raise IndexError("need one or two distinct orbitals")
    if any(o < 0 or o >= n for o in orbitals):
        raise IndexError(f"orbital index out of range 0..{n - 1}")
    orbitals = sorted(orbitals)
    m, xs = schmidt_matrix(psi, orbitals)
    d = 4 ** len(orbitals)
    full = np.zeros((d, m.shape[1]))
    full[xs] = m
    rho = full @ full.T
    return SubsetRDM(tuple(orbitals), rho)


def block_entropy(psi: WaveVector, subset: Sequence[int]) -> float:
    """Von Neumann entropy (nats) of an arbitrary orbital subset."""
    if len(subset) == 0 or len(subset) == psi.basis.n_orbitals:
        return 0.0
    m, _ = schmidt_matrix(psi, subset)
    sv = np.linalg.svd(m, compute_uv=False)
    w = sv ** 2
    w = w[w > 1e-300]
    return float(-np.sum(w * np.log(w)))


def expectation_s2(psi: WaveVector) -> float:
    """``<S^2> = Sz (Sz + 1) + ||S+ psi||^2``, with ``S+ = sum_i a+_{i up} a_{i dn}``."""
    basis = psi.basis
    n = basis.n_orbitals
    sz = basis.two_sz / 2
    if basis.n_beta == 0:
        return float(sz * (sz + 1))
    target = enumerate_sector(n, basis.n_electrons, basis.two_sz + 2) \
        if basis.n_alpha < n else None
    if target is None:
        return float(sz * (sz + 1))
    out = np.zeros(target.size)
    nalpha = basis.n_alpha
    for det, amp in zip(basis.determinants.tolist(), psi.amplitudes.tolist()):
        if amp == 0.0:
            continue
        for i in range(n):
            if det >> (n + i) & 1 and not det >> i & 1:
                sign = (nalpha + _popcount_below(det >> n, i)) + _popcount_below(det, i)
                new = (det ^ (1 << (n + i))) | (1 << i)
                out[target.index_of(new)] += -amp if sign % 2 else amp
    return float(sz * (sz + 1) + out @ out)


def report_dict(results: list[tuple[float, WaveVector]], h: IntegralSet) -> dict:
    return {
        "energy": [e for e, _ in results],
        "s2": [expectation_s2(psi) for _, psi in results],
        "residual": [residual_norm(h, e, psi) for e, psi in results],
    }


def write_rdm_csv(rdm: SubsetRDM, path) -> None:
    """Row-major CSV; rows/cols in local basis order (0, dn, up, updn)^k."""
    labels = ["0", "dn", "up", "updn"]
    if len(rdm.orbital_subset) == 1:
        names = labels
    else:
        names = [f"{a}|{b}" for a in labels for b in labels]
    with open(path, "w") as fh:
        fh.write("state," + ",".join(names) + "\n")
        for name, row in zip(names, rdm.matrix):
            fh.write(name + "," + ",".join(repr(float(x)) for x in row) + "\n")


def write_report(path, results, h: IntegralSet) -> None:
    with open(path, "w") as fh:
        json.dump(report_dict(results, h), fh, indent=1)
