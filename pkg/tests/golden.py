"""Golden report files: fixed inputs, the CLI cases that produce them, and a tolerant comparator.

Regenerate with ``python3 tests/golden.py`` after an intentional change to a
report format or to a numerical default.
"""

import csv
import json
import math
import shutil
import sys
from pathlib import Path

import numpy as np

from qidmrg.cli import main
from qidmrg.entanglement import write_matrix_csv
from qidmrg.integrals import build_hubbard, random_integrals, write_fcidump

HERE = Path(__file__).resolve().parent
DATA = HERE / "data"
GOLDEN = HERE / "golden"

# (name, CLI arguments with {data} and {out} placeholders)
GOLDEN_CASES = [
    ("oracle_hub4", ["oracle", "{data}/hub4_u4.fcidump", "-o", "{out}"]),
    ("run_random4", ["run", "{data}/random4.fcidump", "--m-min", "8", "--m-start", "8", "-o", "{out}"]),
    ("run_auto_random4", ["run", "{data}/random4.fcidump", "--ordering", "auto", "-o", "{out}"]),
    ("order_random7", ["order", "{data}/random7_imatrix.csv", "--seed", "5", "-o", "{out}"]),
]

# report files excluded from golden comparison (binary)
BINARY = {"checkpoint.npz"}


# keys whose values depend on where the suite runs
PATH_KEYS = {"input", "output", "ordering_file"}
RTOL, ATOL = 1e-6, 1e-7


def _same_scalar(a, b) -> bool:
    if isinstance(a, bool) or isinstance(b, bool) or a is None or b is None:
        return a == b
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return math.isclose(a, b, rel_tol=RTOL, abs_tol=ATOL)
    return a == b


def same_json(a, b, path="") -> list:
    """List of differences between two decoded JSON documents, numbers compared with tolerance."""
    if isinstance(a, dict) and isinstance(b, dict):
        if set(a) != set(b):
            return [f"{path}: keys {sorted(set(a) ^ set(b))}"]
        return [d for k in a if k not in PATH_KEYS for d in same_json(a[k], b[k], f"{path}.{k}")]
    if isinstance(a, list) and isinstance(b, list):
        if len(a) != len(b):
            return [f"{path}: length {len(a)} != {len(b)}"]
        return [d for i, (x, y) in enumerate(zip(a, b)) for d in same_json(x, y, f"{path}[{i}]")]
    return [] if _same_scalar(a, b) else [f"{path}: {a!r} != {b!r}"]


def _token(s):
    try:
        return float(s)
    except ValueError:
        return s


def same_text(a: str, b: str) -> list:
    """Compare CSV-like text cell by cell, numbers with tolerance."""
    ra = list(csv.reader(a.splitlines()))
    rb = list(csv.reader(b.splitlines()))
    if len(ra) != len(rb):
        return [f"{len(ra)} rows != {len(rb)} rows"]
    diffs = []
    for i, (x, y) in enumerate(zip(ra, rb)):
        cx = [_token(t) for c in x for t in c.split()]
        cy = [_token(t) for c in y for t in c.split()]
        if len(cx) != len(cy) or not all(_same_scalar(p, q) for p, q in zip(cx, cy)):
            diffs.append(f"row {i}: {x} != {y}")
    return diffs


def compare_report_dirs(out: Path, golden: Path) -> list:
    got = sorted(f.name for f in out.iterdir() if f.name not in BINARY)
    want = sorted(f.name for f in golden.iterdir())
    if got != want:
        return [f"files {got} != {want}"]
    diffs = []
    for name in want:
        a, b = (out / name).read_text(), (golden / name).read_text()
        d = same_json(json.loads(a), json.loads(b)) if name.endswith(".json") else same_text(a, b)
        diffs.extend(f"{name}: {x}" for x in d)
    return diffs


def write_inputs() -> None:
    DATA.mkdir(exist_ok=True)
    (DATA / "hub2_u0.fcidump").write_text(write_fcidump(build_hubbard(2, 1.0, 0.0)))
    (DATA / "hub4_u4.fcidump").write_text(write_fcidump(build_hubbard(4, 1.0, 4.0)))
    (DATA / "random4.fcidump").write_text(write_fcidump(random_integrals(4, seed=21, n_electrons=4)))
    rng = np.random.default_rng(7)
    a = rng.random((7, 7)) ** 3
    a = (a + a.T) / 2
    np.fill_diagonal(a, 0.0)
    write_matrix_csv(a, DATA / "random7_imatrix.csv")


def run_case(args, out: Path) -> int:
    return main([a.format(data=DATA, out=out) for a in args])


def regenerate() -> None:
    write_inputs()
    if GOLDEN.exists():
        shutil.rmtree(GOLDEN)
    for name, args in GOLDEN_CASES:
        out = GOLDEN / name
        code = run_case(args, out)
        if code != 0:
            sys.exit(f"{name}: exit code {code}")
        for f in out.iterdir():
            if f.name in BINARY:
                f.unlink()


if __name__ == "__main__":
    regenerate()
