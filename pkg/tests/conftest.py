import dataclasses
import functools

import numpy as np
import pytest

from qidmrg import fci
from qidmrg.dmrg import SweepConfig, run_dmrg
from qidmrg.integrals import IntegralSet, OrbitalMeta, build_hubbard, random_integrals

# seeds of the random 6-orbital fixtures used throughout the suite
RANDOM_SEEDS = (11, 23, 37)

ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@functools.lru_cache(maxsize=None)
def hubbard(sites: int, u: float) -> IntegralSet:
    return build_hubbard(sites, 1.0, u)


@functools.lru_cache(maxsize=None)
def random6(seed: int) -> IntegralSet:
    return random_integrals(6, seed=seed, n_electrons=6)


@functools.lru_cache(maxsize=None)
def dimer_chain() -> IntegralSet:
    """Three Hubbard dimers with weak inter-dimer hopping.

    Partners are orbitals (0, 3), (1, 4), (2, 5), so the index order places
    every strongly entangled pair three sites apart.
    """
    n = 6
    pairs = [(0, 3), (1, 4), (2, 5)]
    h = np.zeros((n, n))
    for a, b in pairs:
        h[a, b] = h[b, a] = -1.0
    for a in range(n):
        for b in range(n):
            if a != b and h[a, b] == 0.0:
                h[a, b] = -0.02 * (1 + ((a + b) % 3))
    h = (h + h.T) / 2
    np.fill_diagonal(h, [0.0, 0.1, 0.2, 0.0, 0.1, 0.2])
    g = np.zeros((n, n, n, n))
    for a in range(n):
        g[a, a, a, a] = 2.0
    meta = OrbitalMeta(n, np.ones(n, dtype=int), np.ones(n, dtype=int), np.arange(n))
    return IntegralSet(meta, h, g, 0.0, 6, 0)


_ORACLE_CACHE: dict = {}


def oracle(h: IntegralSet):
    """Ground energy and vector from exact diagonalization (cached per object)."""
    if id(h) not in _ORACLE_CACHE:
        sector = fci.enumerate_sector(h.n_orbitals, h.n_electrons, h.ms2)
        (e, psi), = fci.ground_state(h, sector)
        _ORACLE_CACHE[id(h)] = (h, e, psi, None)
    _, e, psi, _ = _ORACLE_CACHE[id(h)]
    return e, psi


def oracle_rdms(h: IntegralSet):
    e, psi = oracle(h)
    cached = _ORACLE_CACHE[id(h)]
    if cached[3] is None:
        n = h.n_orbitals
        one = {i: fci.subset_rdm(psi, [i]) for i in range(n)}
        two = {(i, j): fci.subset_rdm(psi, [i, j]) for i in range(n) for j in range(i + 1, n)}
        _ORACLE_CACHE[id(h)] = (h, e, psi, (one, two))
    return _ORACLE_CACHE[id(h)][3]


_DMRG_CACHE: dict = {}


def dmrg_run(h: IntegralSet, ordering=None, warmup=None, **cfg):
    """Cached DMRG run keyed by fixture identity and settings."""
    key = (id(h), None if ordering is None else tuple(ordering.image),
           None if warmup is None else (warmup.mode, warmup.casv, dataclasses.astuple(warmup.config)), tuple(sorted(cfg.items())))
    if key not in _DMRG_CACHE:
        _DMRG_CACHE[key] = (h, run_dmrg(h, ordering, SweepConfig(**cfg), warmup))
    return _DMRG_CACHE[key][1]


@pytest.fixture(scope="session")
def hub6():
    return hubbard(6, 4.0)
