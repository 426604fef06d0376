"""Two-site DMRG with dynamic block-state selection.

The engine sweeps a two-site superblock ``L[l] * site l * site l+1 * R`` over
an ordered orbital chain.  Every renormalization step keeps the smallest
number of reduced-density-matrix eigenvectors whose discarded entropy stays
below ``chi`` and records entropy and truncation diagnostics.  After the last
left-to-right half sweep the stored block transformations form a matrix
product state from which all one- and two-orbital RDMs are measured.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np

from .blocks import (SITE_PARITY, SITE_QN, Block, ChainHamiltonian, cross_terms, empty_block,
                     merge, rotate, site_block)
from .davidson import davidson
from .entanglement import von_neumann
from .fci import SubsetRDM
from .integrals import IntegralSet, Permutation, apply_permutation
from .superblock import SectorSuperblock

log = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1
DEGENERACY_TOL = 1e-10
ZERO_WEIGHT = 1e-14


class QuantumNumberError(AssertionError):
    """Internal quantum-number bookkeeping is inconsistent."""


@dataclass
class SweepConfig:
    """Sweep and truncation parameters.

    ``n_electrons`` and ``two_sz`` select the target sector; ``None`` falls back
    to the Hamiltonian metadata.
    """

    chi: float = 1e-6
    m_min: int = 64
    m_start: int = 64
    m_cap: int = 4096
    max_sweeps: int = 8
    convergence_tol: float = 1e-7
    n_electrons: int | None = None
    two_sz: int | None = None
    solver_tol: float = 1e-9
    seed: int = 7

    def __post_init__(self):
        if self.m_min < 1:
            raise ValueError("m_min must be at least 1")
        if not self.chi > 0:
            raise ValueError("chi must be positive")
        if self.m_cap < self.m_min:
            raise ValueError("m_cap must not be below m_min")
        if self.max_sweeps < 0:
            raise ValueError("max_sweeps must be non-negative")


@dataclass
class SchmidtSpectrum:
    """Reduced-density-matrix eigenvalues across a cut, sorted non-increasing."""

    weights: np.ndarray
    cut_position: int = 0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        w = np.where(w < 0, 0.0, w)
        self.weights = np.sort(w)[::-1]

    @property
    def entropy(self) -> float:
        return von_neumann(self.weights)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.sqrt(self.weights)


@dataclass
class TruncationRecord:
    cut_position: int
    kept: int
    entropy_before: float
    entropy_after: float
    info_loss: float
    m_used: int
    clamped: bool = False
    direction: str = ""
    half_sweep: int = 0


@dataclass
class StepRecord:
    """Per-iteration diagnostics."""

    half_sweep: int
    direction: str
    position: int
    energy: float
    dim_left: int
    dim_right: int
    kept: int
    entropy_left: float
    entropy_right: float
    s_block: float
    s_site: float
    s_enlarged: float
    i_block: float
    residual: float


@dataclass
class MpsState:
    """Left-canonical chain tensors ``A[k]`` with shape ``(D_k, 4, D_{k+1})``.

    The last tensor carries the norm.  ``bond_qn[k]`` lists the ``(n, 2sz)``
    label of every state on bond ``k``.
    """

    tensors: list
    bond_qn: list
    ordering: Permutation

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    def right_environments(self) -> list:
        n = self.n_sites
        env = [None] * (n + 1)
        env[n] = np.ones((1, 1))
        for k in range(n - 1, -1, -1):
            a = self.tensors[k]
            env[k] = np.einsum("asb,bc,tsc->at", a, env[k + 1], a, optimize=True)
        return env

    def bond_spectra(self) -> list:
        """Reduced-density-matrix eigenvalues of the left part at every bond."""
        # the left bases are orthonormal, so the right environment is the RDM
        return [np.clip(np.linalg.eigvalsh((e + e.T) / 2), 0, None)[::-1]
                for e in self.right_environments()]

    def block_entropies(self) -> np.ndarray:
        prof = np.array([von_neumann(w) for w in self.bond_spectra()])
        prof[0] = prof[-1] = 0.0
        return prof


@dataclass
class DmrgResult:
    energies: list
    final_energy: float
    profiles: list
    truncations: list
    m_max: int
    s2_expectation: float
    converged: bool
    n_sweeps: int
    steps: list = field(default_factory=list)
    half_sweep_labels: list = field(default_factory=list)
    one_rdms: dict = field(default_factory=dict)
    two_rdms: dict = field(default_factory=dict)
    state: MpsState | None = None
    ordering: Permutation | None = None
    config: SweepConfig | None = None

    @property
    def clamped_count(self) -> int:
        return sum(1 for t in self.truncations if t.clamped)

    def s1(self) -> np.ndarray:
        from .entanglement import entropy_of_rdm
        n = len(self.one_rdms)
        return np.array([entropy_of_rdm(self.one_rdms[i]) for i in range(n)])

    def mutual_info(self):
        from .entanglement import mutual_information_from_rdms
        return mutual_information_from_rdms(self.one_rdms, self.two_rdms, len(self.one_rdms))


class WarmupStrategy(Protocol):
    def environment(self, ctx: ChainHamiltonian, h_chain: IntegralSet, chain_orbitals: np.ndarray,
                    start: int, left_qn: np.ndarray, m_left: int, target: tuple) -> Block:
        """Right block over chain sites ``start..N-1`` for the first half sweep."""


# --- truncation ----------------------------------------------------------------

def feasible(qn: np.ndarray, target: tuple, rest_sites: int) -> np.ndarray:
    """Whether each block label can be completed to ``target`` by ``rest_sites`` sites."""
    n_rest = target[0] - qn[:, 0]
    sz_rest = target[1] - qn[:, 1]
    ok = (n_rest >= 0) & (n_rest <= 2 * rest_sites)
    ok &= np.abs(sz_rest) <= np.minimum(n_rest, 2 * rest_sites - n_rest)
    ok &= (n_rest - sz_rest) % 2 == 0
    return ok


def dbss_truncate(spectrum: SchmidtSpectrum, cfg: SweepConfig, limit: int | None = None) -> TruncationRecord:
    """Choose the number of kept states for a spectrum of RDM eigenvalues.

    ``kept`` is the smallest ``m`` whose discarded entropy
    ``S(all) - S(first m)`` is strictly below ``chi``; it is raised to
    ``min(m_min, available)``, extended to cover a degenerate multiplet at
    the boundary, and finally capped at ``m_cap`` (``clamped`` is set when
    the cap removes states the entropy criterion asked for).
    """
    w = spectrum.weights
    n = w.size
    if limit is not None:
        n = min(n, limit)
    terms = np.where(w > 0, -w * np.log(np.where(w > 0, w, 1.0)), 0.0)
    full = float(terms.sum())
    partial = np.concatenate([[0.0], np.cumsum(terms)])
    m = 1
    while m < n and full - partial[m] >= cfg.chi:
        m += 1
    m = max(m, min(cfg.m_min, n))
    while m < n and w[m] > ZERO_WEIGHT and w[m - 1] - w[m] <= DEGENERACY_TOL * max(1.0, w[m - 1]):
        m += 1
    clamped = False
    if m > cfg.m_cap:
        clamped = full - partial[cfg.m_cap] >= cfg.chi
        m = cfg.m_cap
    after = float(partial[m])
    return TruncationRecord(spectrum.cut_position, int(m), full, after, full - after, int(w.size), clamped)


def _blocked_eigh(rho: np.ndarray, qn: np.ndarray, allowed: np.ndarray):
    """Eigen-decompose a quantum-number block-diagonal RDM sector by sector.

    Returns weights (descending), eigenvectors as columns in the full basis,
    and their labels.  States with ``allowed == False`` are left out.
    """
    dim = rho.shape[0]
    keys = {}
    for i in np.flatnonzero(allowed):
        keys.setdefault(tuple(qn[i]), []).append(i)
    ws, vs, labels = [], [], []
    for key in sorted(keys):
        idx = np.array(keys[key])
        w, v = np.linalg.eigh(rho[np.ix_(idx, idx)])
        full = np.zeros((dim, idx.size))
        full[idx] = v
        ws.append(w)
        vs.append(full)
        labels.extend([key] * idx.size)
    if not ws:
        raise QuantumNumberError("no feasible block states")
    w = np.concatenate(ws)
    v = np.concatenate(vs, axis=1)
    order = np.argsort(-w, kind="stable")
    return np.clip(w[order], 0.0, None), v[:, order], np.array(labels, dtype=int)[order]


def schmidt_spectrum(psi: np.ndarray, cut: int = 0) -> SchmidtSpectrum:
    """Schmidt weights (RDM eigenvalues) of a bipartite state matrix."""
    s = np.linalg.svd(np.asarray(psi, dtype=float), compute_uv=False)
    return SchmidtSpectrum(s ** 2, cut)


# --- engine --------------------------------------------------------------------

class _Engine:
    def __init__(self, h: IntegralSet, ordering: Permutation, cfg: SweepConfig, warmup):
        self.h = h
        self.ordering = ordering
        self.cfg = cfg
        self.warmup = warmup
        self.hc = apply_permutation(h, ordering)
        self.ctx = ChainHamiltonian(self.hc)
        self.n = h.n_orbitals
        if self.n < 2:
            raise ValueError("two-site DMRG needs at least two orbitals")
        ne = cfg.n_electrons if cfg.n_electrons is not None else h.n_electrons
        tsz = cfg.two_sz if cfg.two_sz is not None else h.ms2
        self.target = (int(ne), int(tsz))
        if not feasible(np.zeros((1, 2), dtype=int), self.target, self.n)[0]:
            raise ValueError(f"sector {self.target} is empty for {self.n} orbitals")
        self.sites = [site_block(self.ctx, k) for k in range(self.n)]
        self.left: list = [None] * self.n
        self.right: list = [None] * self.n
        self.left[0] = empty_block(self.ctx, 0)
        self.right[0] = empty_block(self.ctx, self.n)
        self.rng = np.random.default_rng(cfg.seed)
        self.steps: list = []
        self.truncations: list = []
        self.psi = None  # last superblock solution (full basis)
        self.left_transforms: dict = {}

    # superblock ---------------------------------------------------------------
    def _solve(self, lp: Block, rp: Block, guess: np.ndarray | None):
        lo, ro = cross_terms(self.ctx, lp, rp)
        try:
            sb = SectorSuperblock(lp.ham, rp.ham, lo, ro, lp.qn, rp.qn, self.target)
        except AssertionError as exc:
            raise QuantumNumberError(str(exc)) from exc
        x0 = None
        if guess is not None and guess.shape == (lp.dim, rp.dim):
            g = sb.from_dense(guess)
            if np.linalg.norm(g) > 1e-8:
                x0 = g / np.linalg.norm(g)
        if x0 is None:
            x0 = np.zeros(sb.size)
            x0[int(np.argmin(sb.diagonal))] = 1.0
            x0 += 1e-3 * self.rng.standard_normal(sb.size)
        w, v, res = davidson(sb.matvec, sb.diagonal, x0, k=1, tol=self.cfg.solver_tol)
        psi = sb.to_dense(v[:, 0] / np.linalg.norm(v[:, 0]))
        return float(w[0]) + self.hc.core_energy, psi, float(res[0])

    # one renormalization step ---------------------------------------------------
    def step(self, l: int, direction: str, half: int, right_block: Block, guess=None):
        n = self.n
        lp = merge(self.ctx, self.left[l], self.sites[l])
        rp = merge(self.ctx, self.sites[l + 1], right_block)
        energy, psi, res = self._solve(lp, rp, guess)
        self.psi = psi
        rho_l = psi @ psi.T
        rho_r = psi.T @ psi
        ent_l = von_neumann(np.linalg.eigvalsh(rho_l))
        ent_r = von_neumann(np.linalg.eigvalsh(rho_r))
        if direction == "LR":
            rho, blk, rest = rho_l, lp, n - l - 1
            m_old = self.left[l].dim
            r4 = rho.reshape(m_old, 4, m_old, 4)
            s_block = von_neumann(np.linalg.eigvalsh(np.einsum("aibi->ab", r4)))
            s_site = von_neumann(np.linalg.eigvalsh(np.einsum("aiaj->ij", r4)))
            s_enl = ent_l
        else:
            rho, blk, rest = rho_r, rp, l + 1
            m_old = right_block.dim
            r4 = rho.reshape(4, m_old, 4, m_old)
            s_block = von_neumann(np.linalg.eigvalsh(np.einsum("iajb->ab", r4)))
            s_site = von_neumann(np.linalg.eigvalsh(np.einsum("iaja->ij", r4)))
            s_enl = ent_r
        allowed = feasible(blk.qn, self.target, rest)
        w, vecs, labels = _blocked_eigh(rho, blk.qn, allowed)
        spec = SchmidtSpectrum(w, l + 1)
        rec = dbss_truncate(spec, self.cfg)
        rec.direction, rec.half_sweep = direction, half
        rec.m_used = blk.dim
        self.truncations.append(rec)
        u = vecs[:, : rec.kept]
        new = rotate(blk, u, labels[: rec.kept])
        self.steps.append(StepRecord(half, direction, l, energy, lp.dim, rp.dim, rec.kept, ent_l, ent_r,
                                     s_block, s_site, s_enl, s_enl - s_block - s_site, res))
        return energy, psi, new, u

    # half sweeps --------------------------------------------------------------
    def sweep_lr(self, half: int, warm: bool):
        n = self.n
        guess = None
        if not warm and self.psi is not None:
            guess = self.psi  # same superblock as the end of the previous R->L pass
        profile = np.zeros(n + 1)
        energy = None
        for l in range(n - 1):
            r = n - l - 2
            if warm:
                rb = self._warm_environment(l)
            else:
                rb = self.right[r]
            energy, psi, new, u = self.step(l, "LR", half, rb, guess)
            profile[l + 1] = self.steps[-1].entropy_left
            self.left_transforms[l] = u
            if l + 1 < n - 1:
                self.left[l + 1] = new
                guess = None
                if not warm and rb.transform is not None:
                    guess = (u.T @ psi).reshape(new.dim * 4, -1) @ rb.transform.T
        profile[0] = profile[n] = 0.0
        return energy, profile

    def sweep_rl(self, half: int):
        n = self.n
        guess = self.psi
        profile = np.zeros(n + 1)
        energy = None
        for l in range(n - 2, -1, -1):
            r = n - l - 2
            energy, psi, new, v = self.step(l, "RL", half, self.right[r], guess)
            profile[l + 1] = self.steps[-1].entropy_right
            if l > 0:
                self.right[r + 1] = new
                lblk = self.left[l]
                phi = (psi @ v).reshape(lblk.dim, 4 * v.shape[1])
                guess = lblk.transform @ phi if lblk.transform is not None else None
        profile[0] = profile[n] = 0.0
        return energy, profile

    def _warm_environment(self, l: int) -> Block:
        n = self.n
        start = l + 2
        if start >= n:
            return self.right[0]
        lp_qn = (self.left[l].qn[:, None, :] + SITE_QN[None, :, :]).reshape(-1, 2)
        sys_qn = (lp_qn[:, None, :] + SITE_QN[None, :, :]).reshape(-1, 2)
        sys_qn = np.unique(sys_qn, axis=0)
        return self.warmup.environment(self.ctx, self.hc, self.ordering.image, start, sys_qn,
                                       self.left[l].dim, self.target)

    # turning point ------------------------------------------------------------
    def build_state(self) -> MpsState:
        n = self.n
        tensors, bond_qn = [], [self.left[0].qn]
        for k in range(n - 2):
            u = self.left_transforms[k]
            d = self.left[k].dim
            tensors.append(u.reshape(d, 4, u.shape[1]))
            bond_qn.append(self.left[k + 1].qn)
        d = self.left[n - 2].dim
        theta = self.psi.reshape(d * 4, 4)
        uu, s, vt = np.linalg.svd(theta, full_matrices=False)
        keep = s > 1e-14 * max(s[0], 1.0)
        keep[0] = True
        uu, s, vt = uu[:, keep], s[keep], vt[keep]
        tensors.append(uu.reshape(d, 4, -1))
        tensors.append((s[:, None] * vt).reshape(-1, 4, 1))
        lq = (self.left[n - 2].qn[:, None, :] + SITE_QN[None, :, :]).reshape(-1, 2)
        bond_qn.append(lq[np.argmax(np.abs(uu), axis=0)])
        bond_qn.append(np.array([self.target]))
        return MpsState(tensors, bond_qn, self.ordering)


# --- measurement -----------------------------------------------------------------

def _pair_sign() -> np.ndarray:
    par = (SITE_QN[:, 0] % 2)
    return np.where(np.outer(par, par) == 1, -1.0, 1.0)


def measure_turning_point(state: MpsState):
    """All one- and two-orbital RDMs from a chain state, in original orbital labels.

    Returns ``(one, two)`` with ``one[i]`` and ``two[(i, j)]`` (``i < j``)
    :class:`SubsetRDM` objects whose local basis is ``(0, dn, up, updn)`` and
    whose pair basis index is ``4 x_i + x_j``.
    """
    if not state.tensors:
        raise ValueError("missing transformation history")
    n = state.n_sites
    env = state.right_environments()
    order = state.ordering.image
    one_chain = []
    left = [np.ones((1, 1))]
    for k in range(n):
        a = state.tensors[k]
        one_chain.append(np.einsum("ab,asc,cd,btd->st", left[k], a, env[k + 1], a, optimize=True))
        left.append(np.einsum("ab,asc,bsd->cd", left[-1], a, a, optimize=True))
    parity = SITE_QN[:, 0] % 2
    odd_pair = (parity[:, None] != parity[None, :])  # (x, x') pairs needing a string
    sign = _pair_sign()
    one = {}
    for k in range(n):
        one[int(order[k])] = SubsetRDM((int(order[k]),), one_chain[k])
    two = {}
    odd_site = parity == 1
    for i in range(n - 1):
        a = state.tensors[i]
        la = np.tensordot(left[i], a, axes=([0], [0]))  # b x c
        t = np.tensordot(la, a, axes=([0], [0])).transpose(0, 2, 1, 3)  # x z c d
        for j in range(i + 1, n):
            b = state.tensors[j]
            be = np.tensordot(b, env[j + 1], axes=([2], [0]))  # b y e
            w = np.tensordot(be, b, axes=([2], [2]))  # b y d w
            rho = np.tensordot(t, w, axes=([2, 3], [0, 2])).transpose(0, 2, 1, 3)
            oi, oj = int(order[i]), int(order[j])
            if oi > oj:
                rho = rho.transpose(1, 0, 3, 2) * sign[:, :, None, None] * sign[None, None, :, :]
                oi, oj = oj, oi
            mat = rho.reshape(16, 16)
            two[(oi, oj)] = SubsetRDM((oi, oj), (mat + mat.T) / 2)
            if j < n - 1:
                tb = np.tensordot(t, b, axes=([2], [0]))  # x z d s c
                g_even = np.tensordot(tb[:, :, :, ~odd_site], b[:, ~odd_site], axes=([2, 3], [0, 1]))
                g_odd = np.tensordot(tb[:, :, :, odd_site], b[:, odd_site], axes=([2, 3], [0, 1]))
                t = np.where(odd_pair[:, :, None, None], g_even - g_odd, g_even + g_odd)
    return one, two


S_PLUS = np.zeros((4, 4))
S_PLUS[2, 1] = 1.0
S_Z = np.diag([0.0, -0.5, 0.5, 0.0])
S2_LOCAL = np.diag([0.0, 0.75, 0.75, 0.0])


def s2_from_rdms(one: dict, two: dict) -> float:
    """``<S^2>`` assembled from one- and two-orbital RDMs."""
    pair = np.kron(S_Z, S_Z) + 0.5 * (np.kron(S_PLUS, S_PLUS.T) + np.kron(S_PLUS.T, S_PLUS))
    total = sum(float(np.trace(r.matrix @ S2_LOCAL)) for r in one.values())
    total += 2 * sum(float(np.trace(r.matrix @ pair)) for r in two.values())
    return total


# --- driver ----------------------------------------------------------------------

def run_dmrg(h: IntegralSet, ordering: Permutation | None = None, cfg: SweepConfig | None = None,
             warmup=None, measure: bool = True) -> DmrgResult:
    """Ground state of ``h`` on the chain ``ordering`` by two-site sweeps.

    The first left-to-right half sweep uses environment blocks supplied by
    ``warmup`` (CI-DEAS by default).  Afterwards right-to-left and
    left-to-right half sweeps alternate.  After every left-to-right half sweep
    the energy and block-entropy profile are compared with the previous one;
    the run stops when both change by less than ``convergence_tol`` or after
    ``max_sweeps`` sweep pairs.
    """
    cfg = cfg or SweepConfig()
    ordering = ordering or Permutation.identity(h.n_orbitals)
    if warmup is None:
        from .cideas import Warmup
        warmup = Warmup()
    eng = _Engine(h, ordering, cfg, warmup)
    energies, profiles, labels = [], [], []
    e, prof = eng.sweep_lr(0, warm=True)
    energies.append(e)
    profiles.append(prof)
    labels.append("LR")
    last_e, last_prof = e, prof
    converged = False
    n_sweeps = 0
    for sweep in range(1, cfg.max_sweeps + 1):
        e, prof = eng.sweep_rl(2 * sweep - 1)
        energies.append(e)
        profiles.append(prof)
        labels.append("RL")
        e, prof = eng.sweep_lr(2 * sweep, warm=False)
        energies.append(e)
        profiles.append(prof)
        labels.append("LR")
        n_sweeps = sweep
        de = abs(e - last_e)
        dp = float(np.max(np.abs(prof - last_prof)))
        log.info("sweep %d: E=%.12f dE=%.2e dS=%.2e", sweep, e, de, dp)
        last_e, last_prof = e, prof
        if de < cfg.convergence_tol and dp < cfg.convergence_tol:
            converged = True
            break
    state = eng.build_state()
    one, two, s2 = {}, {}, float("nan")
    if measure:
        one, two = measure_turning_point(state)
        s2 = s2_from_rdms(one, two)
    m_max = max([t.kept for t in eng.truncations] + [1])
    return DmrgResult(energies, energies[-1], profiles, eng.truncations, m_max, s2, converged, n_sweeps,
                      eng.steps, labels, one, two, state, ordering, cfg)


# --- persistence and reports --------------------------------------------------------

def save_checkpoint(result: DmrgResult, path) -> None:
    """Write chain tensors, bond labels, ordering, config and diagnostics to ``.npz``."""
    st = result.state
    arrays = {f"tensor_{k}": t for k, t in enumerate(st.tensors)}
    arrays.update({f"bond_qn_{k}": q for k, q in enumerate(st.bond_qn)})
    meta = {
        "version": CHECKPOINT_VERSION,
        "n_sites": st.n_sites,
        "ordering": [int(x) for x in st.ordering.image],
        "config": asdict(result.config) if result.config else {},
        "energies": result.energies,
        "final_energy": result.final_energy,
        "converged": result.converged,
        "n_sweeps": result.n_sweeps,
        "m_max": result.m_max,
        "s2": result.s2_expectation,
        "profiles": [list(map(float, p)) for p in result.profiles],
        "truncations": [asdict(t) for t in result.truncations],
    }
    np.savez_compressed(path, meta=np.array(json.dumps(meta)), **arrays)


def load_checkpoint(path):
    """Return ``(MpsState, metadata dict)`` from :func:`save_checkpoint` output."""
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        if meta.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta.get('version')}")
        n = meta["n_sites"]
        tensors = [data[f"tensor_{k}"] for k in range(n)]
        bond_qn = [data[f"bond_qn_{k}"] for k in range(n + 1)]
    state = MpsState(tensors, bond_qn, Permutation(np.array(meta["ordering"])))
    return state, meta


def write_energy_trace(result: DmrgResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["half_sweep", "direction", "energy"])
        for k, (lab, e) in enumerate(zip(result.half_sweep_labels, result.energies)):
            w.writerow([k, lab, f"{e:.12f}"])


def write_m_trace(result: DmrgResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "half_sweep", "direction", "position", "kept", "dim_left", "dim_right",
                    "energy"])
        for it, s in enumerate(result.steps):
            w.writerow([it, s.half_sweep, s.direction, s.position, s.kept, s.dim_left, s.dim_right,
                        f"{s.energy:.12f}"])


def write_truncation_log(result: DmrgResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["half_sweep", "direction", "cut", "kept", "m_used", "entropy_before",
                    "entropy_after", "info_loss", "clamped"])
        for t in result.truncations:
            w.writerow([t.half_sweep, t.direction, t.cut_position, t.kept, t.m_used,
                        f"{t.entropy_before:.12e}", f"{t.entropy_after:.12e}", f"{t.info_loss:.12e}",
                        int(t.clamped)])
