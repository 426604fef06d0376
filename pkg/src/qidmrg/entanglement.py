"""Entropies, mutual information and related observables computed from RDMs."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from .fci import LOCAL_QN, SubsetRDM

TRACE_TOL = 1e-8
SUBADDITIVITY_TOL = 1e-10


class SubadditivityError(ValueError):
    """A two-orbital entropy exceeds the sum of its single-orbital entropies."""


def von_neumann(weights) -> float:
    """``-sum w ln w`` with ``0 ln 0 = 0``; tiny negative round-off is ignored."""
    w = np.asarray(weights, dtype=float)
    w = w[w > 0]
    return float(-np.sum(w * np.log(w)))


def entropy_of_rdm(rho) -> float:
    """Von Neumann entropy in nats of a density matrix or :class:`SubsetRDM`."""
    mat = rho.matrix if isinstance(rho, SubsetRDM) else np.asarray(rho, dtype=float)
    tr = float(np.trace(mat))
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValueError(f"density matrix trace {tr:.12g} is not 1")
    return von_neumann(np.linalg.eigvalsh((mat + mat.T) / 2))


@dataclass
class MutualInfoMatrix:
    """Pairwise mutual information ``I_ij = s1_i + s1_j - s2_ij`` (nats)."""

    values: np.ndarray
    s1: np.ndarray
    s2: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def laplacian(self) -> np.ndarray:
        """Graph Laplacian ``D - I``; ``D`` holds the row sums of ``I``."""
        return np.diag(self.values.sum(axis=1)) - self.values


def mutual_information(s1, s2) -> MutualInfoMatrix:
    """Mutual-information matrix from single- and two-orbital entropies.

    Raises
    ------
    SubadditivityError
        If some ``s2_ij`` exceeds ``s1_i + s1_j`` by more than 1e-10.
    """
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    n = s1.size
    if s2.shape != (n, n):
        raise ValueError(f"s2 has shape {s2.shape}, expected {(n, n)}")
    vals = s1[:, None] + s1[None, :] - s2
    np.fill_diagonal(vals, 0.0)
    vals = (vals + vals.T) / 2
    worst = vals.min() if n > 1 else 0.0
    if worst < -SUBADDITIVITY_TOL:
        i, j = np.unravel_index(np.argmin(vals), vals.shape)
        raise SubadditivityError(f"s2[{i},{j}] exceeds s1[{i}] + s1[{j}] by {-worst:.3e}")
    vals = np.where(vals < 0, 0.0, vals)
    return MutualInfoMatrix(vals, s1.copy(), s2.copy())


def mutual_information_from_rdms(one: dict, two: dict, n: int) -> MutualInfoMatrix:
    """Build ``s1``, ``s2`` and ``I`` from dictionaries of orbital RDMs.

    ``one[i]`` and ``two[(i, j)]`` (``i < j``) are :class:`SubsetRDM` or arrays.
    """
    s1 = np.array([entropy_of_rdm(one[i]) for i in range(n)])
    s2 = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            s2[i, j] = s2[j, i] = entropy_of_rdm(two[(i, j)])
    return mutual_information(s1, s2)


def total_correlation(s1) -> float:
    """Sum of single-orbital entropies."""
    s1 = np.asarray(s1, dtype=float)
    if np.any(s1 < 0):
        raise ValueError("single-orbital entropies must be non-negative")
    return float(s1.sum())


def bond_count(info: MutualInfoMatrix | np.ndarray, threshold: float = 1e-4) -> np.ndarray:
    """Number of partners ``j != i`` with ``I_ij > threshold`` for every orbital."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    vals = info.values if isinstance(info, MutualInfoMatrix) else np.asarray(info, dtype=float)
    mask = vals > threshold
    np.fill_diagonal(mask, False)
    return mask.sum(axis=1)


@dataclass
class EntropyProfile:
    """Single-orbital entropies and the block-entropy profile ``s(l)``, ``l = 0..N``."""

    s1: np.ndarray
    block: np.ndarray
    sweep_index: int = 0

    def __post_init__(self):
        self.s1 = np.asarray(self.s1, dtype=float)
        self.block = np.asarray(self.block, dtype=float)
        if self.block.size and (self.block[0] != 0.0 or self.block[-1] != 0.0):
            raise ValueError("block-entropy endpoints must be exactly zero")


def allowed_rdm_entries(local_qn=LOCAL_QN) -> list[tuple[int, int]]:
    """Upper-triangle entries of a two-orbital RDM permitted by (n, Sz) conservation.

    The pair basis is ``4 x + y``.  An entry ``(a, b)`` can be nonzero only
    when both basis states carry the same particle number and spin
    projection.
    """
    qn = np.asarray(local_qn)
    pair = [tuple(qn[x] + qn[y]) for x, y in product(range(4), repeat=2)]
    return [(a, b) for a in range(16) for b in range(a, 16) if pair[a] == pair[b]]


def correlator_count(local_qn=LOCAL_QN) -> dict:
    """Counting of independent two-orbital RDM parameters.

    Returns the symmetry-block sizes, the number of independent entries of
    the real symmetric matrix, and that number after the unit-trace
    condition.
    """
    qn = np.asarray(local_qn)
    sectors: dict = {}
    for x, y in product(range(4), repeat=2):
        key = tuple(int(v) for v in qn[x] + qn[y])
        sectors[key] = sectors.get(key, 0) + 1
    entries = sum(d * (d + 1) // 2 for d in sectors.values())
    return {"sectors": sectors, "independent": entries, "after_trace": entries - 1}


# --- reports -------------------------------------------------------------------

def write_s1_csv(s1, path, labels=None) -> None:
    labels = labels if labels is not None else range(len(s1))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["orbital", "s1"])
        for lab, v in zip(labels, s1):
            w.writerow([lab, f"{v:.12e}"])


def write_matrix_csv(mat, path) -> None:
    mat = np.asarray(mat, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in mat:
            w.writerow([f"{v:.12e}" for v in row])


def read_matrix_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [[float(x) for x in row] for row in csv.reader(fh) if row]
    mat = np.array(rows, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"{path}: expected a square matrix, got shape {mat.shape}")
    return mat


def write_profiles_csv(profiles, path) -> None:
    """One row per (sweep, cut) pair: ``sweep,l,s``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sweep", "l", "s"])
        for k, prof in enumerate(profiles):
            for l, v in enumerate(prof):
                w.writerow([k, l, f"{v:.12e}"])


def summary_dict(info: MutualInfoMatrix, threshold: float = 1e-4) -> dict:
    return {
        "i_tot": total_correlation(info.s1),
        "s1": [float(x) for x in info.s1],
        "bonds": [int(x) for x in bond_count(info, threshold)],
        "threshold": threshold,
    }


def write_summary_json(info: MutualInfoMatrix, path, threshold: float = 1e-4) -> None:
    Path(path).write_text(json.dumps(summary_dict(info, threshold), indent=2, sort_keys=True) + "\n")
