"""CI-based dynamically extended active space (CI-DEAS) warm-up.

During the first left-to-right half sweep no renormalized right blocks exist
yet.  At every step the orbitals to the right of the two-site superblock are
classified using a CAS vector (orbitals sorted by single-orbital entropy):
the leading ones in CAS order become active, the rest are frozen at their
Hartree-Fock occupation.  The environment is then spanned by determinants
over the active orbitals whose excitation rank relative to the Hartree-Fock
reference does not exceed a CI level.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .blocks import SITE_QN, Block, ChainHamiltonian, product_state_block
from .integrals import IntegralSet, reference_determinant

ACTIVE, DOUBLY_FILLED, EMPTY = "active", "doubly_filled", "empty"

# spin-orbital occupations (up, dn) of the local states (0, dn, up, updn)
_OCC = np.array([(0, 0), (0, 1), (1, 0), (1, 1)])


class InfeasibleEnvironment(ValueError):
    """No environment determinant completes the system to the target sector."""


@dataclass(frozen=True)
class CasVector:
    """Orbital indices (0-based) in order of non-increasing single-orbital entropy."""

    orbitals: tuple

    def __post_init__(self):
        object.__setattr__(self, "orbitals", tuple(int(o) for o in self.orbitals))
        if sorted(self.orbitals) != list(range(len(self.orbitals))):
            raise ValueError("CAS vector must list every orbital exactly once")

    def one_based(self) -> tuple:
        return tuple(o + 1 for o in self.orbitals)


def build_cas_vector(s1=None, n_orbitals: int | None = None) -> CasVector:
    """Sort orbitals by decreasing entropy; ties keep index order.

    Without entropies the bootstrap vector ``(N-1, ..., 1, 0)`` is returned.
    """
    if s1 is None:
        if n_orbitals is None:
            raise ValueError("need s1 or n_orbitals")
        return CasVector(tuple(range(n_orbitals - 1, -1, -1)))
    s1 = np.asarray(s1, dtype=float)
    if np.any(s1 < 0):
        raise ValueError("single-orbital entropies must be non-negative")
    return CasVector(tuple(np.argsort(-s1, kind="stable")))


@dataclass(frozen=True)
class EnvClassification:
    """Role of every environment orbital, keyed by orbital index."""

    roles: dict

    def of(self, kind: str) -> list:
        return sorted(o for o, r in self.roles.items() if r == kind)

    @property
    def active(self) -> list:
        return self.of(ACTIVE)

    @property
    def doubly_filled(self) -> list:
        return self.of(DOUBLY_FILLED)

    @property
    def empty(self) -> list:
        return self.of(EMPTY)


def classify_environment(hf_occ, casv: CasVector, env, budget: int) -> EnvClassification:
    """Mark the first ``budget`` environment orbitals in CAS order as active.

    The remaining environment orbitals are doubly filled when their
    Hartree-Fock occupation is 2 and empty otherwise.
    """
    if budget < 1:
        raise ValueError("active budget must be at least 1")
    env = set(int(o) for o in env)
    ordered = [o for o in casv.orbitals if o in env]
    roles = {}
    for k, o in enumerate(ordered):
        if k < budget:
            roles[o] = ACTIVE
        else:
            roles[o] = DOUBLY_FILLED if hf_occ[o] == 2 else EMPTY
    return EnvClassification(roles)


@dataclass
class WarmupConfig:
    ci_level_cap: int = 3
    m_start: int = 64
    active_budget: int = 6

    def __post_init__(self):
        if self.ci_level_cap < 0:
            raise ValueError("ci_level_cap must be non-negative")
        if self.active_budget < 1:
            raise ValueError("active_budget must be at least 1")


@dataclass
class EnvironmentBasis:
    """Determinants over an ordered list of environment orbitals.

    ``configs[k, j]`` is the local state (0, dn, up, updn) of ``orbitals[j]``
    in basis state ``k``; ``qn`` holds ``(n, 2sz)`` per state and ``rank`` the
    excitation level relative to the Hartree-Fock reference.
    """

    orbitals: tuple
    configs: np.ndarray
    qn: np.ndarray
    rank: np.ndarray
    core_shift: float = 0.0


def excitation_rank(config, reference) -> int:
    """``max(holes, particles)`` of a determinant relative to a reference."""
    a = _OCC[np.asarray(config)]
    b = _OCC[np.asarray(reference)]
    holes = int(np.sum(b & ~a.astype(bool)))
    particles = int(np.sum(a & ~b.astype(bool)))
    return max(holes, particles)


def core_energy_shift(h: IntegralSet, doubly: list) -> float:
    """Energy of the frozen doubly filled orbitals among themselves."""
    if not doubly:
        return 0.0
    idx = np.asarray(doubly)
    hh = h.one_body[np.ix_(idx, idx)]
    g = h.two_body[np.ix_(idx, idx, idx, idx)]
    j = np.einsum("iijj->ij", g)
    k = np.einsum("ijji->ij", g)
    return float(2 * np.trace(hh) + np.sum(2 * j - k))


def build_environment_basis(h: IntegralSet, cls: EnvClassification, cfg: WarmupConfig, m_l: int,
                            env_order=None, left_qn=None, target=None, s1=None,
                            reference=None) -> EnvironmentBasis:
    """CI-restricted determinant basis for the environment.

    Parameters
    ----------
    env_order : sequence of int, optional
        Column order of the returned configurations (defaults to sorted).
    left_qn : array (k, 2), optional
        Labels available on the system side; only determinants that can be
        combined with one of them into ``target`` are kept.
    s1 : array, optional
        Single-orbital entropies used to rank determinants of equal rank.
    reference : array of local states, optional
        Hartree-Fock local state of every orbital; derived from
        ``h.meta.hf_occupations`` when omitted.

    The first ``max(m_l, m_start)`` determinants are kept after sorting by
    excitation rank, then by the summed entropy of the orbitals that gain
    electrons (descending), then lexicographically.
    """
    orbitals = tuple(sorted(cls.roles) if env_order is None else (int(o) for o in env_order))
    ref_all = np.asarray(reference if reference is not None
                         else reference_determinant(h.meta.hf_occupations))
    ref = ref_all[list(orbitals)]
    s1 = np.zeros(h.n_orbitals) if s1 is None else np.asarray(s1, dtype=float)
    active = [j for j, o in enumerate(orbitals) if cls.roles[o] == ACTIVE]
    fixed = np.array([3 if cls.roles[o] == DOUBLY_FILLED else 0 for o in orbitals], dtype=int)
    cands = []
    for states in product(range(4), repeat=len(active)):
        conf = fixed.copy()
        conf[active] = states
        rank = excitation_rank(conf, ref)
        if rank > cfg.ci_level_cap:
            continue
        qn = SITE_QN[conf].sum(axis=0)
        if left_qn is not None and target is not None:
            need = np.asarray(target) - qn
            if not np.any(np.all(np.asarray(left_qn) == need, axis=1)):
                continue
        gained = _OCC[conf].sum(axis=1) > _OCC[ref].sum(axis=1)
        weight = float(sum(s1[orbitals[j]] for j in np.flatnonzero(gained)))
        cands.append((rank, -weight, tuple(int(c) for c in conf), qn))
    if not cands:
        raise InfeasibleEnvironment(
            f"no determinant of rank <= {cfg.ci_level_cap} over {len(active)} active orbitals "
            "completes the target sector")
    cands.sort(key=lambda c: (c[0], c[1], c[2]))
    cands = cands[: max(m_l, cfg.m_start)]
    configs = np.array([c[2] for c in cands], dtype=int).reshape(len(cands), len(orbitals))
    return EnvironmentBasis(
        orbitals, configs, np.array([c[3] for c in cands], dtype=int),
        np.array([c[0] for c in cands], dtype=int), core_energy_shift(h, cls.doubly_filled),
    )


class Warmup:
    """Environment provider for the first half sweep.

    ``mode="cideas"`` uses the configured CI level; ``mode="naive"`` keeps only
    the Hartree-Fock determinant of the environment.  ``casv`` and ``s1`` are
    in original orbital labels; without them the bootstrap CAS vector is used.
    """

    def __init__(self, config: WarmupConfig | None = None, casv: CasVector | None = None, s1=None,
                 mode: str = "cideas"):
        if mode not in ("cideas", "naive"):
            raise ValueError(f"unknown warm-up mode {mode!r}")
        self.config = config or WarmupConfig()
        if mode == "naive":
            self.config = WarmupConfig(0, self.config.m_start, self.config.active_budget)
        self.casv = casv
        self.s1 = None if s1 is None else np.asarray(s1, dtype=float)
        self.mode = mode
        self.log: list = []

    def environment(self, ctx: ChainHamiltonian, h_chain: IntegralSet, chain_orbitals, start: int,
                    left_qn, m_left: int, target) -> Block:
        n = h_chain.n_orbitals
        chain_orbitals = np.asarray(chain_orbitals)
        positions = np.empty(n, dtype=int)
        positions[chain_orbitals] = np.arange(n)
        casv = self.casv or build_cas_vector(n_orbitals=n)
        casv_chain = CasVector(tuple(positions[o] for o in casv.orbitals))
        s1_chain = None if self.s1 is None else self.s1[chain_orbitals]
        env = list(range(start, n))
        hf = h_chain.meta.hf_occupations
        cls = classify_environment(hf, casv_chain, env, self.config.active_budget)
        basis = build_environment_basis(h_chain, cls, self.config, m_left, env_order=env,
                                        left_qn=left_qn, target=target, s1=s1_chain)
        self.log.append({"start": start, "active": [int(chain_orbitals[k]) for k in cls.active],
                         "n_states": int(basis.configs.shape[0]), "core_shift": basis.core_shift})
        return product_state_block(ctx, start, basis.configs)
