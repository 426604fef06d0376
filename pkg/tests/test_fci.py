from functools import reduce
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qidmrg import fci
from qidmrg.davidson import davidson
from qidmrg.integrals import Permutation, apply_permutation, build_hubbard, random_integrals


def jordan_wigner_hamiltonian(h):
    """Dense Fock-space Hamiltonian built from Jordan-Wigner matrices.

    Independent of the determinant-string machinery; spin-orbital ``2i + s``.
    """
    n = h.n_orbitals
    m = 2 * n
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    z = np.diag([1.0, -1.0])
    eye = np.eye(2)
    ann = [reduce(np.kron, [z] * p + [a] + [eye] * (m - p - 1)) for p in range(m)]
    cre = [x.T for x in ann]
    dim = 2 ** m
    ham = h.core_energy * np.eye(dim)
    for p in range(m):
        for q in range(m):
            if p % 2 == q % 2 and h.one_body[p // 2, q // 2] != 0:
                ham += h.one_body[p // 2, q // 2] * cre[p] @ ann[q]
    g = h.two_body
    for p in range(m):
        for q in range(m):
            for r in range(m):
                for s in range(m):
                    if p % 2 != q % 2 or r % 2 != s % 2:
                        continue
                    v = g[p // 2, q // 2, r // 2, s // 2]
                    if v != 0:
                        ham += 0.5 * v * cre[p] @ cre[r] @ ann[s] @ ann[q]
    num = sum(c @ x for c, x in zip(cre, ann))
    sz = sum(0.5 * (1 if p % 2 == 0 else -1) * cre[p] @ ann[p] for p in range(m))
    return ham, np.diag(num), np.diag(sz)


def sector_ground_energy_jw(h, nelec, two_sz):
    ham, num, sz = jordan_wigner_hamiltonian(h)
    idx = np.flatnonzero((np.round(num) == nelec) & (np.round(2 * sz) == two_sz))
    return np.linalg.eigvalsh(ham[np.ix_(idx, idx)])[0]


@pytest.mark.parametrize("u, expected", [(0.0, -2.0), (4.0, 2.0 - np.sqrt(8.0))])
def test_hubbard_dimer_energy(u, expected):
    h = build_hubbard(2, 1.0, u)
    (e, psi), = fci.ground_state(h, fci.enumerate_sector(2, 2, 0))
    assert e == pytest.approx(expected, abs=1e-12)


def test_single_site_doubly_occupied():
    h = build_hubbard(1, 1.0, 4.0, n_electrons=2)
    (e, _), = fci.ground_state(h, fci.enumerate_sector(1, 2, 0))
    assert e == pytest.approx(4.0, abs=1e-12)


@pytest.mark.parametrize("n, ne, tsz", [(6, 6, 0), (5, 4, 2), (4, 3, 1), (3, 0, 0)])
def test_sector_size_is_binomial(n, ne, tsz):
    na, nb = (ne + tsz) // 2, (ne - tsz) // 2
    assert fci.enumerate_sector(n, ne, tsz).size == comb(n, na) * comb(n, nb)


def test_invalid_sector():
    with pytest.raises(fci.SectorError):
        fci.enumerate_sector(3, 3, 0)
    with pytest.raises(fci.SectorError):
        fci.enumerate_sector(2, 5, 1)


@pytest.mark.parametrize("seed, n, ne, tsz", [(1, 3, 2, 0), (2, 3, 3, 1), (3, 4, 4, 0), (4, 4, 3, -1)])
def test_energy_matches_jordan_wigner_route(seed, n, ne, tsz):
    h = random_integrals(n, seed=seed, n_electrons=ne)
    (e, _), = fci.ground_state(h, fci.enumerate_sector(n, ne, tsz))
    assert e == pytest.approx(sector_ground_energy_jw(h, ne, tsz), abs=1e-10)


def test_hamiltonian_is_symmetric_and_diagonal_consistent():
    h = random_integrals(4, seed=8, n_electrons=4)
    sec = fci.enumerate_sector(4, 4, 0)
    ham = fci.FciHamiltonian(h, sec)
    dense = np.column_stack([ham.matvec(e) for e in np.eye(sec.size)])
    assert np.abs(dense - dense.T).max() < 1e-12
    assert np.allclose(np.diag(dense), ham.diagonal, atol=1e-12)


def test_hf_energy_is_reference_diagonal():
    h = random_integrals(4, seed=8, n_electrons=4)
    sec = fci.enumerate_sector(4, 4, 0)
    ham = fci.FciHamiltonian(h, sec)
    idx = sec.index_of(fci.reference_determinant_bits(h))
    assert fci.hf_energy(h) == pytest.approx(ham.diagonal[idx], abs=1e-12)


def test_davidson_matches_dense_eigh():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((300, 300)) * 0.05
    a = a + a.T + np.diag(np.arange(300, dtype=float))
    w, v, res = davidson(lambda x: a @ x, np.diag(a), np.eye(300)[:, 0], k=2, tol=1e-10)
    ref = np.linalg.eigvalsh(a)[:2]
    assert np.allclose(w, ref, atol=1e-9)
    assert np.all(res < 1e-10)


def test_ground_state_residual_and_normalization():
    h = random_integrals(5, seed=3, n_electrons=4)
    (e, psi), = fci.ground_state(h, fci.enumerate_sector(5, 4, 0))
    assert np.linalg.norm(psi.amplitudes) == pytest.approx(1.0, abs=1e-12)
    assert fci.residual_norm(h, e, psi) < 1e-8


@pytest.mark.parametrize("h", [build_hubbard(4, 1.0, 4.0), random_integrals(5, seed=2, n_electrons=4)])
def test_singlet_s2_is_zero(h):
    (e, psi), = fci.ground_state(h, fci.enumerate_sector(h.n_orbitals, h.n_electrons, 0))
    assert fci.expectation_s2(psi) < 1e-8


def test_triplet_s2():
    # two electrons in a strongly repulsive dimer with Sz = 1 form a triplet
    h = build_hubbard(2, 1.0, 4.0)
    (e, psi), = fci.ground_state(h, fci.enumerate_sector(2, 2, 2))
    assert fci.expectation_s2(psi) == pytest.approx(2.0, abs=1e-10)


def test_dimer_rdms():
    h = build_hubbard(2, 1.0, 0.0)
    (e, psi), = fci.ground_state(h, fci.enumerate_sector(2, 2, 0))
    rho = fci.subset_rdm(psi, [0])
    assert np.allclose(rho.matrix, np.eye(4) / 4, atol=1e-12)
    pair = fci.subset_rdm(psi, [0, 1])
    w = np.linalg.eigvalsh(pair.matrix)
    assert w[-1] == pytest.approx(1.0, abs=1e-12)


def test_rdm_traces_and_partial_traces():
    h = random_integrals(5, seed=6, n_electrons=5)
    (e, psi), = fci.ground_state(h, fci.enumerate_sector(5, 5, 1))
    for i, j in [(0, 1), (1, 3), (2, 4)]:
        pair = fci.subset_rdm(psi, [i, j])
        assert np.trace(pair.matrix) == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(pair.partial_trace(0).matrix, fci.subset_rdm(psi, [i]).matrix, atol=1e-12)
        assert np.allclose(pair.partial_trace(1).matrix, fci.subset_rdm(psi, [j]).matrix, atol=1e-12)
        assert np.linalg.eigvalsh(pair.matrix).min() > -1e-12


def test_rdm_respects_quantum_numbers():
    h = random_integrals(4, seed=7, n_electrons=4)
    (e, psi), = fci.ground_state(h, fci.enumerate_sector(4, 4, 0))
    qn = fci.LOCAL_QN
    pair_qn = [tuple(qn[x] + qn[y]) for x in range(4) for y in range(4)]
    mat = fci.subset_rdm(psi, [1, 2]).matrix
    for a in range(16):
        for b in range(16):
            if pair_qn[a] != pair_qn[b]:
                assert abs(mat[a, b]) < 1e-14


def test_complementary_block_entropies_agree():
    h = random_integrals(5, seed=5, n_electrons=4)
    (e, psi), = fci.ground_state(h, fci.enumerate_sector(5, 4, 0))
    for sub in ([0], [0, 1], [1, 3], [0, 2, 4]):
        rest = [i for i in range(5) if i not in sub]
        assert fci.block_entropy(psi, sub) == pytest.approx(fci.block_entropy(psi, rest), abs=1e-10)


def test_two_orbital_rdm_matches_jordan_wigner_expectations():
    # <n_i n_j> and <a+_iu a_ju> from the RDM versus dense JW expectation values
    h = random_integrals(3, seed=4, n_electrons=3)
    (e, psi), = fci.ground_state(h, fci.enumerate_sector(3, 3, 1))
    ham, num, sz = jordan_wigner_hamiltonian(h)
    idx = np.flatnonzero((np.round(num) == 3) & (np.round(2 * sz) == 1))
    w, v = np.linalg.eigh(ham[np.ix_(idx, idx)])
    full = np.zeros(2 ** 6)
    full[idx] = v[:, 0]
    m = 6
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    z = np.diag([1.0, -1.0])
    ann = [reduce(np.kron, [z] * p + [a] + [np.eye(2)] * (m - p - 1)) for p in range(m)]
    n_loc = np.diag([0.0, 1.0, 1.0, 2.0])
    pair = fci.subset_rdm(psi, [0, 2]).matrix
    ni = ann[0].T @ ann[0] + ann[1].T @ ann[1]
    nj = ann[4].T @ ann[4] + ann[5].T @ ann[5]
    assert np.trace(pair @ np.kron(n_loc, n_loc)) == pytest.approx(full @ ni @ nj @ full, abs=1e-10)
    # hopping of an up electron from orbital 2 to orbital 0: local basis (0, dn, up, updn)
    cu = np.zeros((4, 4))
    cu[2, 0] = cu[3, 1] = 1.0
    par = np.diag([1.0, -1.0, -1.0, 1.0])
    hop = np.kron(cu @ par, cu.T)  # a+_0u a_2u in the ordered pair basis
    assert np.trace(pair @ hop) == pytest.approx(full @ ann[0].T @ ann[4] @ full, abs=1e-10)


@settings(max_examples=8, deadline=None)
@given(st.permutations(list(range(5))))
def test_energy_invariant_under_orbital_permutation(image):
    h = random_integrals(5, seed=12, n_electrons=4)
    (e, _), = fci.ground_state(h, fci.enumerate_sector(5, 4, 0))
    hp = apply_permutation(h, Permutation(np.array(image)))
    (ep, _), = fci.ground_state(hp, fci.enumerate_sector(5, 4, 0))
    assert ep == pytest.approx(e, abs=1e-10)


def test_report_files(tmp_path):
    h = build_hubbard(2, 1.0, 0.0)
    res = fci.ground_state(h, fci.enumerate_sector(2, 2, 0))
    fci.write_report(tmp_path / "r.json", res, h)
    fci.write_rdm_csv(fci.subset_rdm(res[0][1], [0, 1]), tmp_path / "rdm.csv")
    lines = (tmp_path / "rdm.csv").read_text().splitlines()
    assert len(lines) == 17 and lines[0].startswith("state,0|0,")
