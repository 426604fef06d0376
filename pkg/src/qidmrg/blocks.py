"""Renormalized DMRG blocks and the complementary-operator Hamiltonian.

Chain conventions
-----------------
Spatial orbital at chain position ``k`` carries spin-orbitals ``2k`` (up) and
``2k + 1`` (down); the global fermionic order is site-major, up before down.
A block is a contiguous run of sites.  Joining block ``A`` (left) with block
``B`` (right) uses the basis ``|a>|b> = C_a C_b |vac>``, so an operator that
acts on ``B`` picks up the parity of ``A``:

    (O_A)(O_B)  ->  kron(O_A @ P_A**parity(O_B), O_B)

The Hamiltonian in spin-orbital form is

    H = sum t_pq a+_p a_q + 1/2 sum v_pqrs a+_p a+_q a_r a_s,
    v_pqrs = (ps|qr) delta(sp, ss) delta(sq, sr).

Every block stores its own Hamiltonian, creators ``a+_p`` of its
spin-orbitals, and the complementary single operators

    S_x = 1/2 sum_q t_xq a_q + sum_qrs v_xqrs a+_q a_r a_s      (x outside)

Blocks on the short side of the chain (``n_sites <= N/2``) also store the
normal pair operators ``a+_p a+_q`` and ``a+_p a_q``; blocks on the long side
store instead the complementary pairs, for ``x, y`` outside,

    P_xy  = sum_rs v_xyrs a_r a_s
    Q1_xy = sum_qr v_xqry a+_q a_r
    Q2_xy = sum_qr v_xqyr a+_q a_r

which are all that is needed to couple it to a short partner.  Complementary
pairs of a short block are contracted on demand.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .integrals import IntegralSet

# local basis (0, dn, up, updn)
SITE_QN = np.array([(0, 0), (1, -1), (1, 1), (2, 0)])
CDAG_UP = np.zeros((4, 4))
CDAG_UP[2, 0] = 1.0
CDAG_UP[3, 1] = 1.0
CDAG_DN = np.zeros((4, 4))
CDAG_DN[1, 0] = 1.0
CDAG_DN[3, 2] = -1.0
SITE_PARITY = np.array([1.0, -1.0, -1.0, 1.0])

ZERO_TOL = 1e-14


class ChainHamiltonian:
    """Spin-orbital integrals of an :class:`IntegralSet` already in chain order."""

    def __init__(self, h: IntegralSet):
        n = h.n_orbitals
        self.n_sites = n
        self.n_so = 2 * n
        so = np.arange(2 * n)
        site, spin = so // 2, so % 2
        same = (spin[:, None] == spin[None, :]).astype(float)
        self.t = h.one_body[np.ix_(site, site)] * same
        g = h.two_body[np.ix_(site, site, site, site)]  # g[p,s,q,r] -> (ps|qr)
        v = g.transpose(0, 2, 3, 1)  # v[p,q,r,s] = (ps|qr)
        self.v = v * same[:, None, None, :] * same[None, :, :, None]
        self.core = h.core_energy

    def block_mode(self, n_sites: int) -> str:
        return "normal" if 2 * n_sites <= self.n_sites else "comp"


@dataclass
class Block:
    """A renormalized block over chain sites ``[start, stop)``."""

    start: int
    stop: int
    qn: np.ndarray
    ham: np.ndarray
    inside: np.ndarray
    outside: np.ndarray
    cdag: np.ndarray
    s_comp: np.ndarray
    mode: str
    cc: np.ndarray | None = None
    cd: np.ndarray | None = None
    pp: np.ndarray | None = None
    q1: np.ndarray | None = None
    q2: np.ndarray | None = None
    transform: np.ndarray | None = None

    @property
    def n_sites(self) -> int:
        return self.stop - self.start

    @property
    def dim(self) -> int:
        return self.qn.shape[0]

    @property
    def parity(self) -> np.ndarray:
        return np.where(self.qn[:, 0] % 2 == 0, 1.0, -1.0)

    def ann(self) -> np.ndarray:
        return self.cdag.transpose(0, 2, 1)

    def out_pos(self, xs) -> np.ndarray:
        lookup = {int(x): k for k, x in enumerate(self.outside)}
        return np.array([lookup[int(x)] for x in xs], dtype=int)

    def comp_singles(self, xs) -> np.ndarray:
        return self.s_comp[self.out_pos(xs)]

    def comp_pairs(self, ctx: ChainHamiltonian, xs, ys):
        """``(P, Q1, Q2)`` for outside index lists ``xs``, ``ys``; shape (nx, ny, M, M)."""
        xs = np.asarray(xs, dtype=int)
        ys = np.asarray(ys, dtype=int)
        if self.mode == "comp":
            ix, iy = self.out_pos(xs), self.out_pos(ys)
            sel = np.ix_(ix, iy)
            return self.pp[sel], self.q1[sel], self.q2[sel]
        inn = self.inside
        m = self.dim
        shape = (xs.size, ys.size, m, m)
        if inn.size == 0 or xs.size == 0 or ys.size == 0:
            z = np.zeros(shape)
            return z, z.copy(), z.copy()
        v = ctx.v
        ann2 = self.cc.transpose(1, 0, 3, 2)  # ann2[r, s] = a_r a_s
        vp = v[np.ix_(xs, ys, inn, inn)]
        p = np.tensordot(vp, ann2, axes=([2, 3], [0, 1]))
        v1 = v[np.ix_(xs, inn, inn, ys)]
        q1 = np.tensordot(v1, self.cd, axes=([1, 2], [0, 1]))
        v2 = v[np.ix_(xs, inn, ys, inn)]
        q2 = np.tensordot(v2, self.cd, axes=([1, 3], [0, 1]))
        return p, q1, q2


def _nonzero(x: np.ndarray) -> bool:
    return x.size > 0 and float(np.max(np.abs(x))) > ZERO_TOL


def empty_block(ctx: ChainHamiltonian, position: int) -> Block:
    """Zero-site block sitting at ``position`` (dimension 1, vacuum)."""
    outside = np.arange(ctx.n_so)
    return Block(
        position, position, np.zeros((1, 2), dtype=int), np.zeros((1, 1)),
        np.zeros(0, dtype=int), outside, np.zeros((0, 1, 1)),
        np.zeros((outside.size, 1, 1)), "normal",
        cc=np.zeros((0, 0, 1, 1)), cd=np.zeros((0, 0, 1, 1)),
    )


def site_block(ctx: ChainHamiltonian, k: int) -> Block:
    """Exact four-state block for chain site ``k``."""
    inside = np.array([2 * k, 2 * k + 1])
    return block_from_creators(ctx, k, k + 1, inside, np.array([CDAG_UP, CDAG_DN]), SITE_QN.copy(),
                               mode="normal")


def block_from_creators(ctx: ChainHamiltonian, start: int, stop: int, inside: np.ndarray,
                        cdag: np.ndarray, qn: np.ndarray, mode: str | None = None) -> Block:
    """Build every operator of a block from exact creator matrices by brute force.

    ``cdag`` must be exact (untruncated) matrices on the block's Fock space;
    used for single sites and as an independent reference in tests.
    """
    m = qn.shape[0]
    outside = np.setdiff1d(np.arange(ctx.n_so), inside)
    mode = mode or ctx.block_mode(stop - start)
    ann = cdag.transpose(0, 2, 1)
    n_in = inside.size
    cc = np.einsum("pab,qbc->pqac", cdag, cdag)
    cd = np.einsum("pab,qbc->pqac", cdag, ann)
    t_in = ctx.t[np.ix_(inside, inside)]
    v_in = ctx.v[np.ix_(inside, inside, inside, inside)]
    ham = np.einsum("pq,pqab->ab", t_in, cd)
    # a+_p a+_q a_r a_s = cc[p, q] @ (a_r a_s)
    ann2 = cc.transpose(1, 0, 3, 2)
    ham += 0.5 * np.einsum("pqrs,pqab,rsbc->ac", v_in, cc, ann2)
    # S_x = 1/2 t_xq a_q + v_xqrs a+_q a_r a_s
    t_xo = ctx.t[np.ix_(outside, inside)]
    v_xo = ctx.v[np.ix_(outside, inside, inside, inside)]
    s_comp = 0.5 * np.einsum("xq,qab->xab", t_xo, ann)
    s_comp += np.einsum("xqrs,qrab,sbc->xac", v_xo, cd, ann)
    blk = Block(start, stop, qn, ham, inside, outside, cdag, s_comp, "normal", cc=cc, cd=cd)
    if mode == "comp":
        p, q1, q2 = blk.comp_pairs(ctx, outside, outside)
        blk = replace(blk, mode="comp", cc=None, cd=None, pp=p, q1=q1, q2=q2)
    return blk


def cross_terms(ctx: ChainHamiltonian, a: Block, b: Block):
    """Coupling between adjacent blocks ``a`` (left) and ``b`` (right).

    Returns ``(left_ops, right_ops)`` stacks such that the coupling equals
    ``sum_k kron(left_ops[k], right_ops[k])`` in the ``|a>|b>`` basis.
    """
    pa = a.parity
    left, right = [], []

    def add(x, y):
        if _nonzero(x) and _nonzero(y):
            left.append(x)
            right.append(y)

    # one index in a: sum_p a+_p S^b_p + h.c.
    if a.inside.size:
        sb = b.comp_singles(a.inside)
        for k in range(a.inside.size):
            cp = a.cdag[k] * pa[None, :]
            add(cp, sb[k])
            add(-(a.cdag[k].T * pa[None, :]), sb[k].T)
    # three indices in a: sum_s a+_s S^a_s + h.c., reordered a-first
    if b.inside.size:
        sa = a.comp_singles(b.inside)
        for k in range(b.inside.size):
            add(-(sa[k] * pa[None, :]), b.cdag[k])
            add(sa[k].T * pa[None, :], b.cdag[k].T)
    # two indices in each
    if a.mode == "normal" and a.inside.size and b.inside.size:
        p, q1, q2 = b.comp_pairs(ctx, a.inside, a.inside)
        n = a.inside.size
        for i in range(n):
            for j in range(i + 1, n):
                add(a.cc[i, j], p[i, j])
                add(a.cc[i, j].T, p[i, j].T)
        for i in range(n):
            for j in range(n):
                add(a.cd[i, j], q1[i, j] - q2[i, j])
    elif b.mode == "normal" and a.inside.size and b.inside.size:
        p, q1, q2 = a.comp_pairs(ctx, b.inside, b.inside)
        n = b.inside.size
        for i in range(n):
            for j in range(i + 1, n):
                add(p[i, j], b.cc[i, j])
                add(p[i, j].T, b.cc[i, j].T)
        for i in range(n):
            for j in range(n):
                add(q1[i, j] - q2[i, j], b.cd[i, j])
    elif a.inside.size and b.inside.size:
        raise AssertionError("two complementary-mode blocks cannot be coupled")
    ma, mb = a.dim, b.dim
    if not left:
        return np.zeros((0, ma, ma)), np.zeros((0, mb, mb))
    return np.array(left), np.array(right)


def _kron_sum(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """``sum_k kron(left[k], right[k])``."""
    ma, mb = left.shape[1], right.shape[1]
    if left.shape[0] == 0:
        return np.zeros((ma * mb, ma * mb))
    return np.einsum("kab,kcd->acbd", left, right, optimize=True).reshape(ma * mb, ma * mb)


def _kron_stack(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Elementwise kron over leading axes: ``out[...] = kron(x[...], y[...])``."""
    lead = np.broadcast_shapes(x.shape[:-2], y.shape[:-2])
    ma, mb = x.shape[-1], y.shape[-1]
    out = x[..., :, None, :, None] * y[..., None, :, None, :]
    return out.reshape(lead + (ma * mb, ma * mb))


def merge(ctx: ChainHamiltonian, a: Block, b: Block, mode: str | None = None) -> Block:
    """Exact union of adjacent blocks ``a`` (left) and ``b`` (right)."""
    if a.stop != b.start:
        raise ValueError("blocks are not adjacent")
    ma, mb = a.dim, b.dim
    m = ma * mb
    pa = a.parity
    PA = np.diag(pa)
    ia, ib = np.eye(ma), np.eye(mb)
    qn = (a.qn[:, None, :] + b.qn[None, :, :]).reshape(m, 2)
    inside = np.concatenate([a.inside, b.inside])
    outside = np.setdiff1d(np.arange(ctx.n_so), inside)
    mode = mode or ctx.block_mode(b.stop - a.start)

    # creators
    cdag = np.concatenate([
        _kron_stack(a.cdag, ib[None]) if a.inside.size else np.zeros((0, m, m)),
        _kron_stack(PA[None], b.cdag) if b.inside.size else np.zeros((0, m, m)),
    ])

    # Hamiltonian
    lo, ro = cross_terms(ctx, a, b)
    ham = np.kron(a.ham, ib) + np.kron(ia, b.ham) + _kron_sum(lo, ro)

    # complementary singles for x outside the union
    sa = a.comp_singles(outside)
    sb = b.comp_singles(outside)
    s_comp = _kron_stack(sa, ib[None]) + _kron_stack(PA[None], sb)
    if a.inside.size:
        p_b, q1_b, q2_b = b.comp_pairs(ctx, outside, a.inside)
        qb = q1_b - q2_b
        # sum_q kron(a+_q, P^b_xq) + kron(a_q, (Q1 - Q2)^b_xq)
        s_comp += np.einsum("qab,xqcd->xacbd", a.cdag, p_b, optimize=True).reshape(-1, m, m)
        s_comp += np.einsum("qab,xqcd->xacbd", a.ann(), qb, optimize=True).reshape(-1, m, m)
    if b.inside.size:
        p_a, q1_a, q2_a = a.comp_pairs(ctx, outside, b.inside)
        qa = (q1_a - q2_a) * pa[None, None, None, :]
        p_a = p_a * pa[None, None, None, :]
        s_comp += np.einsum("xqab,qcd->xacbd", p_a, b.cdag, optimize=True).reshape(-1, m, m)
        s_comp += np.einsum("xqab,qcd->xacbd", qa, b.ann(), optimize=True).reshape(-1, m, m)

    blk = Block(a.start, b.stop, qn, ham, inside, outside, cdag, s_comp, mode)

    a_c = a.cdag * pa[None, None, :]  # a+_q P_A
    a_a = a.ann() * pa[None, None, :]  # a_q P_A
    if mode == "normal":
        if a.mode != "normal" or b.mode != "normal":
            raise AssertionError("normal block requires normal-mode parts")
        na, nb = a.inside.size, b.inside.size
        n = na + nb
        cc = np.zeros((n, n, m, m))
        cd = np.zeros((n, n, m, m))
        if na:
            cc[:na, :na] = _kron_stack(a.cc, ib)
            cd[:na, :na] = _kron_stack(a.cd, ib)
        if nb:
            cc[na:, na:] = _kron_stack(ia, b.cc)
            cd[na:, na:] = _kron_stack(ia, b.cd)
        if na and nb:
            x = _kron_stack(a_c[:, None], b.cdag[None, :])  # a+_p(A) a+_q(B)
            cc[:na, na:] = x
            cc[na:, :na] = -x.transpose(1, 0, 2, 3)
            cd[:na, na:] = _kron_stack(a_c[:, None], b.ann()[None, :])
            cd[na:, :na] = -_kron_stack(a_a[None, :], b.cdag[:, None])
        blk.cc, blk.cd = cc, cd
    else:
        v = ctx.v
        o = outside
        p_a, q1_a, q2_a = a.comp_pairs(ctx, o, o)
        p_b, q1_b, q2_b = b.comp_pairs(ctx, o, o)
        pp = _kron_stack(p_a, ib) + _kron_stack(ia, p_b)
        q1 = _kron_stack(q1_a, ib) + _kron_stack(ia, q1_b)
        q2 = _kron_stack(q2_a, ib) + _kron_stack(ia, q2_b)
        if a.inside.size and b.inside.size:
            ai, bi = a.inside, b.inside
            # P: sum_{u in A, w in B} (v_xyuw - v_xywu) kron(a_u P_A, a_w)
            coef = v[np.ix_(o, o, ai, bi)] - v[np.ix_(o, o, bi, ai)].transpose(0, 1, 3, 2)
            pp += _mixed(coef, a_a, b.ann())
            # Q1: q in A, r in B: v_xqry kron(a+_q P_A, a_r); q in B, r in A: -v_xqry kron(a_r P_A, a+_q)
            c1 = v[np.ix_(o, ai, bi, o)].transpose(0, 3, 1, 2)
            c2 = v[np.ix_(o, bi, ai, o)].transpose(0, 3, 2, 1)
            q1 += _mixed(c1, a_c, b.ann()) - _mixed(c2, a_a, b.cdag)
            # Q2: same with v_xqyr
            c1 = v[np.ix_(o, ai, o, bi)].transpose(0, 2, 1, 3)
            c2 = v[np.ix_(o, bi, o, ai)].transpose(0, 2, 3, 1)
            q2 += _mixed(c1, a_c, b.ann()) - _mixed(c2, a_a, b.cdag)
        blk.pp, blk.q1, blk.q2 = pp, q1, q2
    return blk


def _mixed(coef: np.ndarray, opa: np.ndarray, opb: np.ndarray) -> np.ndarray:
    """``out[x, y] = sum_{u, w} coef[x, y, u, w] kron(opa[u], opb[w])``."""
    nx, ny = coef.shape[:2]
    ma, mb = opa.shape[1], opb.shape[1]
    if not np.any(coef):
        return np.zeros((nx, ny, ma * mb, ma * mb))
    tmp = np.tensordot(coef, opb, axes=([3], [0]))  # x y u c d
    out = np.einsum("xyucd,uab->xyacbd", tmp, opa, optimize=True)
    return out.reshape(nx, ny, ma * mb, ma * mb)


def rotate(block: Block, u: np.ndarray, qn: np.ndarray | None = None) -> Block:
    """Project every operator onto the columns of ``u`` (orthonormal)."""
    def tr(x):
        if x is None:
            return None
        return np.einsum("ia,...ij,jb->...ab", u, x, u, optimize=True)

    if qn is None:
        # columns must have definite quantum numbers
        idx = np.argmax(np.abs(u), axis=0)
        qn = block.qn[idx]
    return Block(
        block.start, block.stop, np.asarray(qn, dtype=int), tr(block.ham), block.inside,
        block.outside, tr(block.cdag), tr(block.s_comp), block.mode,
        cc=tr(block.cc), cd=tr(block.cd), pp=tr(block.pp), q1=tr(block.q1), q2=tr(block.q2),
        transform=u,
    )


def select(block: Block, keep: np.ndarray) -> Block:
    """Restrict a block to a subset of its basis states (exact for product states)."""
    u = np.eye(block.dim)[:, keep]
    out = rotate(block, u, block.qn[keep])
    out.transform = None
    return out


def product_state_block(ctx: ChainHamiltonian, start: int, configs: np.ndarray) -> Block:
    """Right block over sites ``start..N-1`` spanned by local-state product configurations.

    ``configs`` has one row per basis state and one column per site.  The
    block is assembled site by site from the right, keeping at each stage only
    the suffix configurations that occur, so operators are exact on the span.
    """
    n = ctx.n_sites
    configs = np.asarray(configs, dtype=int)
    if configs.shape[1] != n - start:
        raise ValueError("configuration width does not match the block length")
    blk = empty_block(ctx, n)
    suffixes = [()]
    for k in range(n - 1, start - 1, -1):
        col = k - start
        new_suffixes = sorted({tuple(row[col:]) for row in configs.tolist()})
        index = {s: i for i, s in enumerate(suffixes)}
        keep = [c[0] * len(suffixes) + index[c[1:]] for c in new_suffixes]
        merged = merge(ctx, site_block(ctx, k), blk)
        blk = select(merged, np.array(keep, dtype=int))
        suffixes = new_suffixes
    # reorder to the requested row order
    index = {s: i for i, s in enumerate(suffixes)}
    order = np.array([index[tuple(r)] for r in configs.tolist()], dtype=int)
    return select(blk, order)
