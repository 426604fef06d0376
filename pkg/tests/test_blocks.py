import numpy as np
import pytest

from qidmrg import fci
from qidmrg.blocks import (CDAG_DN, CDAG_UP, SITE_QN, ChainHamiltonian, _kron_sum, block_from_creators,
                           cross_terms, empty_block, merge, product_state_block, site_block)
from qidmrg.integrals import build_hubbard, random_integrals
from qidmrg.superblock import SectorSuperblock


def left_block(ctx, stop):
    blk = empty_block(ctx, 0)
    for k in range(stop):
        blk = merge(ctx, blk, site_block(ctx, k))
    return blk


def right_block(ctx, start):
    blk = empty_block(ctx, ctx.n_sites)
    for k in range(ctx.n_sites - 1, start - 1, -1):
        blk = merge(ctx, site_block(ctx, k), blk)
    return blk


def superblock_dense(ctx, left, right):
    lo, ro = cross_terms(ctx, left, right)
    ml, mr = left.dim, right.dim
    return np.kron(left.ham, np.eye(mr)) + np.kron(np.eye(ml), right.ham) + _kron_sum(lo, ro)


def sector_indices(left, right, target):
    tot = left.qn[:, None, :] + right.qn[None, :, :]
    return np.flatnonzero(np.all(tot.reshape(-1, 2) == np.array(target), axis=1))


def test_site_operators_anticommute():
    up, dn = CDAG_UP, CDAG_DN
    eye = np.eye(4)
    assert np.allclose(up @ up.T + up.T @ up, eye)
    assert np.allclose(dn @ dn.T + dn.T @ dn, eye)
    assert np.allclose(up @ dn + dn @ up, 0)
    assert np.allclose(up.T @ dn + dn @ up.T, 0)
    # the doubly occupied state is a+_up a+_dn |0>
    assert up @ dn @ np.eye(4)[0] @ np.eye(4)[3] == pytest.approx(1.0)
    assert list(map(tuple, SITE_QN)) == [(0, 0), (1, -1), (1, 1), (2, 0)]


@pytest.mark.parametrize("n, seed", [(3, 1), (4, 2), (5, 3)])
def test_merged_block_matches_brute_force(n, seed):
    ctx = ChainHamiltonian(random_integrals(n, seed=seed))
    for stop in range(1, min(n, 4)):
        blk = left_block(ctx, stop)
        ref = block_from_creators(ctx, 0, stop, blk.inside, blk.cdag, blk.qn, mode=blk.mode)
        assert blk.mode == ctx.block_mode(stop)
        assert np.allclose(blk.ham, ref.ham, atol=1e-12)
        assert np.allclose(blk.s_comp, ref.s_comp, atol=1e-12)
        if blk.mode == "normal":
            assert np.allclose(blk.cc, ref.cc, atol=1e-12)
            assert np.allclose(blk.cd, ref.cd, atol=1e-12)
        else:
            for name in ("pp", "q1", "q2"):
                assert np.allclose(getattr(blk, name), getattr(ref, name), atol=1e-12)


@pytest.mark.parametrize("h", [
    build_hubbard(4, 1.0, 4.0),
    random_integrals(5, seed=2, n_electrons=4),
])
def test_superblock_ground_energy_matches_fci_at_every_cut(h):
    ctx = ChainHamiltonian(h)
    (e0, _), = fci.ground_state(h, fci.enumerate_sector(h.n_orbitals, h.n_electrons, h.ms2))
    for cut in range(1, h.n_orbitals):
        left, right = left_block(ctx, cut), right_block(ctx, cut)
        dense = superblock_dense(ctx, left, right)
        idx = sector_indices(left, right, (h.n_electrons, h.ms2))
        e = np.linalg.eigvalsh(dense[np.ix_(idx, idx)])[0] + ctx.core
        assert e == pytest.approx(e0, abs=1e-10)


def test_sector_superblock_matches_dense():
    h = random_integrals(5, seed=9, n_electrons=4)
    ctx = ChainHamiltonian(h)
    left, right = left_block(ctx, 2), right_block(ctx, 2)
    lo, ro = cross_terms(ctx, left, right)
    sb = SectorSuperblock(left.ham, right.ham, lo, ro, left.qn, right.qn, (4, 0))
    dense = superblock_dense(ctx, left, right)
    idx = sector_indices(left, right, (4, 0))
    assert sb.size == idx.size
    rng = np.random.default_rng(0)
    x = rng.standard_normal(sb.size)
    full = sb.to_dense(x).ravel()
    assert np.allclose(sb.from_dense(sb.to_dense(x).reshape(left.dim, right.dim)), x)
    assert np.allclose(sb.to_dense(sb.matvec(x)).ravel(), dense @ full, atol=1e-12)
    assert np.allclose(sb.diagonal, np.array([sb.matvec(e)[k] for k, e in enumerate(np.eye(sb.size))]))


def test_empty_target_sector_is_rejected():
    ctx = ChainHamiltonian(build_hubbard(2, 1.0, 1.0))
    left, right = left_block(ctx, 1), right_block(ctx, 1)
    lo, ro = cross_terms(ctx, left, right)
    with pytest.raises(AssertionError):
        SectorSuperblock(left.ham, right.ham, lo, ro, left.qn, right.qn, (7, 0))


def test_product_state_block_is_exact_projection():
    h = random_integrals(5, seed=6, n_electrons=5)
    ctx = ChainHamiltonian(h)
    start = 2
    full = right_block(ctx, start)
    configs = np.array([[3, 0, 0], [2, 1, 0], [0, 3, 1], [1, 2, 2], [3, 3, 0]])
    blk = product_state_block(ctx, start, configs)
    # full-block index of a configuration is mixed radix 4 with the leftmost site most significant
    idx = configs @ np.array([16, 4, 1])
    sel = np.ix_(idx, idx)
    assert np.allclose(blk.ham, full.ham[sel], atol=1e-12)
    assert np.allclose(blk.cdag, full.cdag[:, idx][:, :, idx], atol=1e-12)
    assert np.allclose(blk.s_comp, full.s_comp[:, idx][:, :, idx], atol=1e-12)
    assert np.array_equal(blk.qn, full.qn[idx])


def test_product_state_block_rejects_bad_width():
    ctx = ChainHamiltonian(build_hubbard(3, 1.0, 1.0))
    with pytest.raises(ValueError):
        product_state_block(ctx, 1, np.zeros((2, 3), dtype=int))
