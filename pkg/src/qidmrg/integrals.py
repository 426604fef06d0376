"""Second-quantized electronic Hamiltonians: storage, FCIDUMP I/O and reindexing.

Integrals are stored in chemist notation, ``(ij|kl)``, with full 8-fold
permutational symmetry expanded into a dense ``(n, n, n, n)`` array.  The
Hamiltonian represented is

    H = core + sum_{ij,s} h_ij a+_is a_js
             + 1/2 sum_{ijkl,st} (ij|kl) a+_is a+_kt a_lt a_js

Orbital indices are 0-based in the Python API and 1-based in every text
format (FCIDUMP, JSON, ORD/CASV vectors).
"""

from __future__ import annotations

import io
import json
import re
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

import numpy as np

DUPLICATE_TOL = 1e-12


class FcidumpError(ValueError):
    """Malformed or inconsistent FCIDUMP input."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class OrbitalMeta:
    """Per-orbital metadata carried alongside the integrals."""

    n_orbitals: int
    irrep_labels: np.ndarray
    hf_occupations: np.ndarray
    energy_order: np.ndarray

    def __post_init__(self):
        n = self.n_orbitals
        for name in ("irrep_labels", "hf_occupations", "energy_order"):
            arr = np.asarray(getattr(self, name), dtype=int)
            if arr.shape != (n,):
                raise ValueError(f"{name} must have length {n}, got {arr.shape}")
            object.__setattr__(self, name, _frozen(arr))
        if np.any((self.hf_occupations < 0) | (self.hf_occupations > 2)):
            raise ValueError("hf_occupations must be 0, 1 or 2")
        if sorted(self.energy_order.tolist()) != list(range(n)):
            raise ValueError("energy_order must be a ranking 0..n-1")

    @property
    def n_electrons(self) -> int:
        return int(self.hf_occupations.sum())

    def permuted(self, image: np.ndarray) -> "OrbitalMeta":
        return OrbitalMeta(
            self.n_orbitals,
            self.irrep_labels[image],
            self.hf_occupations[image],
            # re-rank so the field stays a 0..n-1 ranking
            np.argsort(np.argsort(self.energy_order[image], kind="stable"), kind="stable"),
        )


@dataclass(frozen=True)
class Permutation:
    """Chain ordering: ``image[position] = original orbital index`` (0-based)."""

    image: np.ndarray

    def __post_init__(self):
        img = np.asarray(self.image, dtype=int)
        if img.ndim != 1 or sorted(img.tolist()) != list(range(img.size)):
            raise ValueError(f"not a permutation: {img.tolist()}")
        object.__setattr__(self, "image", _frozen(img))

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n))

    @classmethod
    def from_one_based(cls, seq: Iterable[int]) -> "Permutation":
        return cls(np.asarray(list(seq), dtype=int) - 1)

    def __len__(self) -> int:
        return self.image.size

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and np.array_equal(self.image, other.image)

    def __hash__(self) -> int:
        return hash(tuple(self.image.tolist()))

    def inverse(self) -> "Permutation":
        return Permutation(np.argsort(self.image))

    def reversed(self) -> "Permutation":
        return Permutation(self.image[::-1])

    def positions(self) -> np.ndarray:
        """``positions()[orbital]`` is the chain position of that orbital."""
        return np.argsort(self.image)

    def one_based(self) -> list[int]:
        return (self.image + 1).tolist()


def compose(p: Permutation, q: Permutation) -> Permutation:
    """Permutation ``r`` with ``apply_permutation(h, r) == apply_permutation(apply_permutation(h, q), p)``."""
    if len(p) != len(q):
        raise ValueError("permutation sizes differ")
    return Permutation(q.image[p.image])


@dataclass(frozen=True)
class IntegralSet:
    """One- and two-electron integrals (Hartree) plus orbital metadata.

    ``two_body[i, j, k, l]`` is the chemist-notation integral ``(ij|kl)``.
    """

    meta: OrbitalMeta
    one_body: np.ndarray
    two_body: np.ndarray
    core_energy: float = 0.0
    n_electrons: int | None = None
    ms2: int = 0
    convention_tag: str = "chemist"

    def __post_init__(self):
        n = self.meta.n_orbitals
        h = np.asarray(self.one_body, dtype=float)
        g = np.asarray(self.two_body, dtype=float)
        if h.shape != (n, n) or g.shape != (n, n, n, n):
            raise ValueError("integral arrays do not match n_orbitals")
        if not np.array_equal(h, h.T):
            raise ValueError("one-body table must be exactly symmetric")
        if self.convention_tag != "chemist":
            raise ValueError("only chemist-notation two-body integrals are stored")
        object.__setattr__(self, "one_body", _frozen(h))
        object.__setattr__(self, "two_body", _frozen(g))
        object.__setattr__(self, "core_energy", float(self.core_energy))
        if self.n_electrons is None:
            object.__setattr__(self, "n_electrons", self.meta.n_electrons)

    @property
    def n_orbitals(self) -> int:
        return self.meta.n_orbitals

    def symmetry_defect(self) -> float:
        """Largest deviation from the 8-fold real-orbital symmetry of ``(ij|kl)``."""
        g = self.two_body
        images = [
            g.transpose(1, 0, 2, 3), g.transpose(0, 1, 3, 2), g.transpose(1, 0, 3, 2),
            g.transpose(2, 3, 0, 1), g.transpose(3, 2, 0, 1), g.transpose(2, 3, 1, 0),
            g.transpose(3, 2, 1, 0),
        ]
        return max(float(np.max(np.abs(g - x))) if g.size else 0.0 for x in images)

    def equals(self, other: "IntegralSet") -> bool:
        """Bitwise equality of all numerical content and metadata."""
        return (
            np.array_equal(self.one_body, other.one_body)
            and np.array_equal(self.two_body, other.two_body)
            and self.core_energy == other.core_energy
            and self.n_electrons == other.n_electrons
            and self.ms2 == other.ms2
            and np.array_equal(self.meta.irrep_labels, other.meta.irrep_labels)
            and np.array_equal(self.meta.hf_occupations, other.meta.hf_occupations)
            and np.array_equal(self.meta.energy_order, other.meta.energy_order)
        )


def default_hf_occupations(n_orbitals: int, n_electrons: int) -> np.ndarray:
    """Aufbau filling in orbital order: doubly occupied first, one open shell if odd."""
    if not 0 <= n_electrons <= 2 * n_orbitals:
        raise ValueError("electron count does not fit in the orbital space")
    occ = np.zeros(n_orbitals, dtype=int)
    occ[: n_electrons // 2] = 2
    if n_electrons % 2:
        occ[n_electrons // 2] = 1
    return occ


def reference_determinant(hf_occ: Sequence[int]) -> list[int]:
    """Local states (0, dn=1, up=2, updn=3) of the reference determinant.

    Singly occupied orbitals alternate up/down starting with up, so an even
    number of open shells gives an Sz = 0 (Neel-like) reference.
    """
    states = []
    flip = False
    for occ in hf_occ:
        if occ == 2:
            states.append(3)
        elif occ == 1:
            states.append(1 if flip else 2)
            flip = not flip
        else:
            states.append(0)
    return states


def _sym_images(i: int, j: int, k: int, l: int) -> set[tuple[int, int, int, int]]:
    return {
        (i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
        (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i),
    }


def canonical_two_body(i: int, j: int, k: int, l: int) -> tuple[int, int, int, int]:
    """Representative of the 8-fold orbit: ``i >= j``, ``k >= l``, ``(i,j) >= (k,l)``."""
    return max(_sym_images(i, j, k, l))


_HEADER_RE = re.compile(r"&FCI(.*?)(?:&END|/)", re.S | re.I)
_KEY_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*=\s*([^=]*?)(?=(?:,?\s*[A-Za-z_][A-Za-z0-9_]*\s*=)|\Z)", re.S)


def _parse_header(header: str) -> dict[str, list[int]]:
    fields: dict[str, list[int]] = {}
    for key, raw in _KEY_RE.findall(header):
        values = [v for v in re.split(r"[,\s]+", raw.strip()) if v]
        try:
            fields[key.upper()] = [int(v) for v in values]
        except ValueError as exc:
            raise FcidumpError(f"non-integer value for {key}: {raw.strip()!r}", 1) from exc
    return fields


def parse_fcidump(text: str | io.TextIOBase) -> IntegralSet:
    """Read an FCIDUMP stream into an :class:`IntegralSet`.

    Symmetry-equivalent two-body entries are expanded from whichever
    representative is stored.  Entries that repeat the same canonical index
    tuple with values differing by more than 1e-12 are rejected, as are
    indices outside ``1..NORB``.
    """
    if not isinstance(text, str):
        text = text.read()
    match = _HEADER_RE.search(text)
    if match is None:
        raise FcidumpError("missing &FCI ... &END header", 1)
    header = _parse_header(match.group(1))
    for key in ("NORB", "NELEC"):
        if key not in header or len(header[key]) != 1:
            raise FcidumpError(f"header lacks {key}", 1)
    n = header["NORB"][0]
    nelec = header["NELEC"][0]
    ms2 = header.get("MS2", [0])[0]
    if n < 1:
        raise FcidumpError("NORB must be positive", 1)
    orbsym = header.get("ORBSYM", [1] * n)
    if len(orbsym) != n:
        raise FcidumpError(f"ORBSYM has {len(orbsym)} entries, expected {n}", 1)

    body_start = match.end()
    first_line = text.count("\n", 0, body_start) + 1
    h = np.zeros((n, n))
    g = np.zeros((n, n, n, n))
    core = 0.0
    seen: dict[tuple, float] = {}

    def check_dup(key: tuple, value: float, lineno: int) -> None:
        if key in seen and abs(seen[key] - value) > DUPLICATE_TOL:
            raise FcidumpError(f"conflicting duplicate entry {key}: {seen[key]!r} vs {value!r}", lineno)
        seen[key] = value

    for offset, line in enumerate(text[body_start:].splitlines()):
        lineno = first_line + offset
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 5:
            raise FcidumpError(f"expected 'value i j k l', got {line.strip()!r}", lineno)
        try:
            value = float(parts[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(x) for x in parts[1:])
        except ValueError as exc:
            raise FcidumpError(f"unparsable entry {line.strip()!r}", lineno) from exc
        if any(x < 0 or x > n for x in (i, j, k, l)):
            raise FcidumpError(f"index out of range 1..{n} in {line.strip()!r}", lineno)
        if i == j == k == l == 0:
            check_dup(("core",), value, lineno)
            core = value
        elif k == 0 and l == 0 and i > 0 and j > 0:
            key = ("h", max(i, j), min(i, j))
            check_dup(key, value, lineno)
            h[i - 1, j - 1] = h[j - 1, i - 1] = value
        elif min(i, j, k, l) > 0:
            key = ("g",) + canonical_two_body(i, j, k, l)
            check_dup(key, value, lineno)
            for a, b, c, d in _sym_images(i - 1, j - 1, k - 1, l - 1):
                g[a, b, c, d] = value
        elif j == k == l == 0:
            continue  # orbital energy line; not part of the Hamiltonian
        else:
            raise FcidumpError(f"unsupported index pattern in {line.strip()!r}", lineno)

    meta = OrbitalMeta(
        n,
        np.asarray(orbsym),
        default_hf_occupations(n, nelec),
        np.arange(n),
    )
    return IntegralSet(meta, h, g, core, nelec, ms2)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_fcidump(h: IntegralSet, tol: float = 0.0) -> str:
    """Serialize to FCIDUMP text; values printed with shortest round-trip repr."""
    n = h.n_orbitals
    out = [
        f" &FCI NORB={n},NELEC={h.n_electrons},MS2={h.ms2},",
        "  ORBSYM=" + ",".join(str(int(x)) for x in h.meta.irrep_labels) + ",",
        "  ISYM=1,",
        " &END",
    ]
    g = h.two_body
    for i in range(n):
        for j in range(i + 1):
            for k in range(n):
                for l in range(k + 1):
                    if (i, j) < (k, l):
                        continue
                    v = g[i, j, k, l]
                    if v != 0.0 and abs(v) > tol:
                        out.append(f"{_fmt(v)} {i + 1} {j + 1} {k + 1} {l + 1}")
    for i in range(n):
        for j in range(i + 1):
            v = h.one_body[i, j]
            if v != 0.0 and abs(v) > tol:
                out.append(f"{_fmt(v)} {i + 1} {j + 1} 0 0")
    out.append(f"{_fmt(h.core_energy)} 0 0 0 0")
    return "\n".join(out) + "\n"


def to_json_dict(h: IntegralSet) -> dict:
    n = h.n_orbitals
    one = [[i + 1, j + 1, float(h.one_body[i, j])]
           for i in range(n) for j in range(i + 1) if h.one_body[i, j] != 0.0]
    two = []
    for i, j, k, l in product(range(n), repeat=4):
        if (i, j, k, l) == canonical_two_body(i, j, k, l) and h.two_body[i, j, k, l] != 0.0:
            two.append([i + 1, j + 1, k + 1, l + 1, float(h.two_body[i, j, k, l])])
    return {
        "norb": n,
        "nelec": int(h.n_electrons),
        "ms2": int(h.ms2),
        "orbsym": [int(x) for x in h.meta.irrep_labels],
        "core": h.core_energy,
        "one_body": one,
        "two_body": two,
        "hf_occ": [int(x) for x in h.meta.hf_occupations],
        "energy_order": [int(x) for x in h.meta.energy_order],
    }


def from_json_dict(d: dict) -> IntegralSet:
    n = int(d["norb"])
    h = np.zeros((n, n))
    g = np.zeros((n, n, n, n))
    for i, j, v in d["one_body"]:
        h[i - 1, j - 1] = h[j - 1, i - 1] = v
    for i, j, k, l, v in d["two_body"]:
        for idx in _sym_images(i - 1, j - 1, k - 1, l - 1):
            g[idx] = v
    nelec = int(d["nelec"])
    meta = OrbitalMeta(
        n,
        np.asarray(d.get("orbsym", [1] * n)),
        np.asarray(d.get("hf_occ", default_hf_occupations(n, nelec))),
        np.asarray(d.get("energy_order", range(n))),
    )
    return IntegralSet(meta, h, g, float(d.get("core", 0.0)), nelec, int(d.get("ms2", 0)))


def save_json(h: IntegralSet, path) -> None:
    with open(path, "w") as fh:
        json.dump(to_json_dict(h), fh, indent=1)


def load_integrals(path) -> IntegralSet:
    """Load from FCIDUMP text or from the JSON fixture layout (by extension)."""
    path = str(path)
    with open(path) as fh:
        text = fh.read()
    if path.endswith(".json"):
        return from_json_dict(json.loads(text))
    return parse_fcidump(text)


def build_hubbard(sites: int, t: float, u: float, n_electrons: int | None = None) -> IntegralSet:
    """Open-chain Hubbard model in the site basis.

    ``(ii|ii) = U`` reproduces ``U n_up n_dn`` under the 1/2-prefactored
    two-body sum used throughout this package.
    """
    if sites < 1:
        raise ValueError("sites must be >= 1")
    n_el = sites if n_electrons is None else n_electrons
    h = np.zeros((sites, sites))
    for i in range(sites - 1):
        h[i, i + 1] = h[i + 1, i] = -t
    g = np.zeros((sites,) * 4)
    for i in range(sites):
        g[i, i, i, i] = u
    occ = np.ones(sites, dtype=int) if n_el == sites else default_hf_occupations(sites, n_el)
    meta = OrbitalMeta(sites, np.ones(sites, dtype=int), occ, np.arange(sites))
    return IntegralSet(meta, h, g, 0.0, n_el, n_el % 2)


def random_integrals(n: int, seed: int, n_electrons: int | None = None,
                     irreps: Sequence[int] | None = None, scale: float = 0.25) -> IntegralSet:
    """Seeded random molecular-like Hamiltonian.

    Orbital energies increase with index (so the identity is the energetic
    ordering); the two-body tensor is built as ``sum_P B^P_ij B^P_kl`` with
    symmetric ``B`` so the ERI supermatrix is positive semidefinite.
    """
    rng = np.random.default_rng(seed)
    n_el = n if n_electrons is None else n_electrons
    eps = np.sort(rng.uniform(-2.0, 1.0, n))
    off = rng.normal(scale=0.1, size=(n, n))
    h = np.diag(eps) + (off + off.T) / 2 - np.diag(np.diag(off))
    h = (h + h.T) / 2
    naux = 2 * n
    b = rng.normal(scale=scale, size=(naux, n, n))
    b = (b + b.transpose(0, 2, 1)) / 2
    b[:, np.arange(n), np.arange(n)] += 0.6
    g = np.einsum("pij,pkl->ijkl", b, b) / naux
    g = _symmetrize8(g)
    irreps = np.ones(n, dtype=int) if irreps is None else np.asarray(irreps)
    meta = OrbitalMeta(n, irreps, default_hf_occupations(n, n_el), np.arange(n))
    return IntegralSet(meta, h, g, 0.0, n_el, n_el % 2)


def _symmetrize8(g: np.ndarray) -> np.ndarray:
    acc = (g + g.transpose(1, 0, 2, 3) + g.transpose(0, 1, 3, 2) + g.transpose(1, 0, 3, 2))
    acc = acc + acc.transpose(2, 3, 0, 1)
    return acc / 8.0


def apply_permutation(h: IntegralSet, p: Permutation) -> IntegralSet:
    """Reindex so that new orbital ``a`` is old orbital ``p.image[a]``."""
    if len(p) != h.n_orbitals:
        raise ValueError(f"permutation of size {len(p)} for {h.n_orbitals} orbitals")
    ix = p.image
    one = h.one_body[np.ix_(ix, ix)]
    two = h.two_body[np.ix_(ix, ix, ix, ix)]
    return IntegralSet(h.meta.permuted(ix), one, two, h.core_energy, h.n_electrons, h.ms2)


def energetic_ordering(h: IntegralSet) -> Permutation:
    """Chain ordering by the canonical energy rank of each orbital."""
    return Permutation(np.argsort(h.meta.energy_order, kind="stable"))


def format_vector(name: str, values: Sequence[int], per_line: int = 15) -> str:
    """ORD/CASV vector in the tabular layout (1-based, whitespace separated)."""
    vals = [str(int(v)) for v in values]
    rows = [" ".join(vals[i:i + per_line]) for i in range(0, len(vals), per_line)]
    return f"{name} = [ " + "\n    ".join(rows) + " ]\n"


def parse_vectors(text: str) -> dict[str, list[int]]:
    """Inverse of :func:`format_vector` for any number of named vectors."""
    found = {}
    for name, body in re.findall(r"([A-Za-z]+)\s*=\s*\[(.*?)\]", text, re.S):
        found[name.upper()] = [int(x) for x in body.replace("&", " ").split()]
    return found
