"""Orbital ordering from mutual information.

The cost of placing orbitals on a chain is the entanglement distance

    I_dist = sum_{a < b} I_ab |pos(a) - pos(b)|**eta

(the sum runs over unordered pairs).  Three minimizers are provided:
simulated annealing with an optional irrep-contiguity constraint, spectral
seriation with the Fiedler vector of the graph Laplacian, and exhaustive
search for small systems.

A :class:`~qidmrg.integrals.Permutation` lists, for every chain position, the
orbital placed there.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import islice, permutations
from pathlib import Path

import numpy as np
from scipy.sparse.csgraph import connected_components

from .entanglement import MutualInfoMatrix
from .integrals import Permutation, format_vector

BRUTE_FORCE_CAP = 9


@dataclass(frozen=True)
class CostParams:
    eta: float = 2.0

    def __post_init__(self):
        if self.eta < 1:
            raise ValueError("eta must be at least 1")


@dataclass(frozen=True)
class IrrepConstraint:
    enabled: bool = False
    labels: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(int(x) for x in self.labels))


@dataclass
class AnnealSchedule:
    """Geometric cooling; ``iterations=None`` means ``10**4 * N``."""

    iterations: int | None = None
    t_start: float | None = None
    t_ratio: float = 1e-4
    seed: int = 1234


@dataclass
class OrderingResult:
    permutation: Permutation
    cost: float
    method: str
    seed: int | None = None
    details: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "perm": [int(x) for x in self.permutation.image],
            "cost": float(self.cost),
            "method": self.method,
            "seed": self.seed,
        }

    def ord_text(self) -> str:
        """ORD vector (1-based orbital indices) in the text layout used for CAS vectors."""
        return format_vector("ORD", self.permutation.one_based())


def _matrix(info) -> np.ndarray:
    vals = info.values if isinstance(info, MutualInfoMatrix) else np.asarray(info, dtype=float)
    if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
        raise ValueError(f"mutual information must be square, got shape {vals.shape}")
    return vals


def _distance_weights(n: int, eta: float) -> np.ndarray:
    idx = np.arange(n)
    return np.abs(idx[:, None] - idx[None, :]).astype(float) ** eta


def _cost_from_positions(mat: np.ndarray, w: np.ndarray, pos: np.ndarray) -> float:
    return float(0.5 * np.sum(mat * w[np.ix_(pos, pos)]))


def entanglement_distance(info, p: Permutation, params: CostParams = CostParams()) -> float:
    """Entanglement distance of ordering ``p``."""
    mat = _matrix(info)
    n = mat.shape[0]
    if len(p) != n:
        raise ValueError(f"permutation of length {len(p)} for a {n}-orbital matrix")
    return _cost_from_positions(mat, _distance_weights(n, params.eta), p.positions())


# --- simulated annealing -------------------------------------------------------

def _two_distinct(rng, n: int) -> tuple:
    i = int(rng.integers(n))
    j = int(rng.integers(n - 1))
    if j >= i:
        j += 1
    return (i, j) if i < j else (j, i)


def _group_by_irrep(image: np.ndarray, labels) -> list:
    """Blocks of orbitals sharing an irrep, in order of first appearance."""
    blocks: dict = {}
    for o in image:
        blocks.setdefault(labels[o], []).append(int(o))
    return list(blocks.values())


def optimize_ordering(info, constraint: IrrepConstraint | None = None, params: CostParams = CostParams(),
                      schedule: AnnealSchedule | None = None, start: Permutation | None = None
                      ) -> OrderingResult:
    """Minimize the entanglement distance by simulated annealing.

    Moves are swaps of two orbitals and reversals of a chain segment.  With
    the irrep constraint enabled the start ordering is first grouped into
    contiguous irrep blocks; moves then swap two orbitals inside one block or
    exchange two neighbouring blocks, so blocks stay contiguous.  The best
    ordering seen is returned, which is never worse than the (grouped) start.
    """
    mat = _matrix(info)
    n = mat.shape[0]
    schedule = schedule or AnnealSchedule()
    constraint = constraint or IrrepConstraint()
    rng = np.random.default_rng(schedule.seed)
    w = _distance_weights(n, params.eta)
    image = (start or Permutation.identity(n)).image.copy()
    if constraint.enabled:
        if len(constraint.labels) != n:
            raise ValueError("irrep labels must cover every orbital")
        blocks = _group_by_irrep(image, constraint.labels)
        image = np.array([o for b in blocks for o in b], dtype=int)
    else:
        blocks = None

    half_w = 0.5 * w

    def cost_of(img):
        return float(np.sum(mat[img[:, None], img[None, :]] * half_w))

    def propose(img, blks):
        if blks is None:
            i, j = _two_distinct(rng, n)
            new = img.copy()
            if rng.random() < 0.5:
                new[i], new[j] = new[j], new[i]
            else:
                new[i:j + 1] = new[i:j + 1][::-1]
            return new, None
        movable = [k for k, b in enumerate(blks) if len(b) > 1]
        if len(blks) > 1 and (not movable or rng.random() < 0.3):
            k = int(rng.integers(len(blks) - 1))
            nb = blks[:k] + [blks[k + 1], blks[k]] + blks[k + 2:]
        elif movable:
            k = movable[int(rng.integers(len(movable)))]
            b = list(blks[k])
            i, j = _two_distinct(rng, len(b))
            b[i], b[j] = b[j], b[i]
            nb = blks[:k] + [b] + blks[k + 1:]
        else:
            return img, blks
        return np.array([o for b in nb for o in b], dtype=int), nb

    cur_cost = cost_of(image)
    best_img, best_cost = image.copy(), cur_cost
    iters = schedule.iterations if schedule.iterations is not None else 10_000 * n
    if n < 2 or not np.any(mat) or iters == 0:
        return OrderingResult(Permutation(best_img), best_cost, "anneal", schedule.seed)
    t0 = schedule.t_start
    if t0 is None:
        probes = [abs(cost_of(propose(image, blocks)[0]) - cur_cost) for _ in range(50)]
        t0 = float(np.mean(probes)) or float(np.max(mat))
    alpha = schedule.t_ratio ** (1.0 / max(iters - 1, 1))
    temp = t0
    cur, cur_blocks = image, blocks
    trace = []
    for _ in range(iters):
        new, nb = propose(cur, cur_blocks)
        c = cost_of(new)
        if c <= cur_cost or rng.random() < np.exp(-(c - cur_cost) / temp):
            cur, cur_blocks, cur_cost = new, nb, c
            if c < best_cost:
                best_img, best_cost = new.copy(), c
        trace.append(best_cost)
        temp *= alpha
    best = Permutation(best_img)
    return OrderingResult(best, entanglement_distance(mat, best, params), "anneal", schedule.seed,
                          {"incumbent_trace": trace[:: max(1, iters // 1000)]})


# --- spectral ordering ----------------------------------------------------------

def _fiedler_vector(mat: np.ndarray, tol: float = 1e-10):
    n = mat.shape[0]
    lap = np.diag(mat.sum(axis=1)) - mat
    w, v = np.linalg.eigh(lap)
    scale = max(1.0, float(np.max(np.abs(w))))
    lam = w[1]
    sel = np.abs(w - lam) <= tol * scale
    sel[0] = False
    ramp = np.arange(n) - (n - 1) / 2.0
    space = v[:, sel]
    x = space @ (space.T @ ramp)
    if np.linalg.norm(x) < 1e-12:
        x = space[:, 0]
    x = x - x.mean()
    x /= np.linalg.norm(x)
    if x @ ramp < 0:
        x = -x
    return x, float(lam), lap


def fiedler_ordering(info, params: CostParams = CostParams()) -> OrderingResult:
    """Order orbitals by the components of the Fiedler vector of ``L = D - I``.

    Both the non-decreasing and non-increasing orders are evaluated and the
    cheaper is returned (non-decreasing on a tie).  A disconnected graph is
    ordered component by component, larger components first, and flagged in
    ``details["disconnected"]``.
    """
    mat = _matrix(info)
    n = mat.shape[0]
    if n == 1:
        return OrderingResult(Permutation.identity(1), 0.0, "fiedler", None, {"disconnected": False})
    n_comp, labels = connected_components(mat > 0, directed=False)
    if n_comp > 1 and np.any(mat):
        comps = [np.flatnonzero(labels == c) for c in range(n_comp)]
        comps.sort(key=lambda c: (-c.size, c.min()))
        image = []
        for c in comps:
            if c.size == 1:
                image.append(int(c[0]))
                continue
            sub = fiedler_ordering(mat[np.ix_(c, c)], params)
            image.extend(int(c[k]) for k in sub.permutation.image)
        perm = Permutation(np.array(image))
        x, lam, _ = _fiedler_vector(mat)
        return OrderingResult(perm, entanglement_distance(mat, perm, params), "fiedler", None,
                              {"disconnected": True, "components": [c.tolist() for c in comps],
                               "lambda2": lam, "vector": x.tolist()})
    x, lam, _ = _fiedler_vector(mat)
    up = Permutation(np.argsort(x, kind="stable"))
    down = Permutation(np.argsort(-x, kind="stable"))
    c_up = entanglement_distance(mat, up, params)
    c_down = entanglement_distance(mat, down, params)
    perm, cost = (up, c_up) if c_up <= c_down else (down, c_down)
    return OrderingResult(perm, cost, "fiedler", None,
                          {"disconnected": False, "lambda2": lam, "vector": x.tolist()})


# --- exhaustive search ----------------------------------------------------------

def brute_force_ordering(info, params: CostParams = CostParams(), chunk: int = 40320) -> OrderingResult:
    """Global minimum over all orderings (``N <= 9``).

    Orderings and their reversals have equal cost; only those with the first
    orbital below the last are scanned and the first minimum in
    lexicographic order is returned.
    """
    mat = _matrix(info)
    n = mat.shape[0]
    if n > BRUTE_FORCE_CAP:
        raise ValueError(f"brute force is limited to N <= {BRUTE_FORCE_CAP}, got N = {n}")
    if n == 1:
        return OrderingResult(Permutation.identity(1), 0.0, "brute")
    w = _distance_weights(n, params.eta)
    pairs = [(k, l) for k in range(n) for l in range(k + 1, n)]
    best_cost, best = np.inf, None
    it = (p for p in permutations(range(n)) if p[0] < p[-1])
    while True:
        block = np.array(list(islice(it, chunk)), dtype=int)
        if block.size == 0:
            break
        cost = np.zeros(block.shape[0])
        for k, l in pairs:
            cost += mat[block[:, k], block[:, l]] * w[k, l]
        i = int(np.argmin(cost))
        if cost[i] < best_cost:
            best_cost, best = float(cost[i]), block[i].copy()
    perm = Permutation(best)
    return OrderingResult(perm, entanglement_distance(mat, perm, params), "brute")


def write_ordering_json(results: list, path) -> None:
    Path(path).write_text(json.dumps([r.to_json_dict() for r in results], indent=2) + "\n")
