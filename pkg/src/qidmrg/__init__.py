"""Entanglement-guided two-site DMRG with an exact-diagonalization reference."""

import os

# QIDMRG_THREADS sets the default BLAS thread count; it must be applied
# before numpy is first imported.
if "QIDMRG_THREADS" in os.environ:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, os.environ["QIDMRG_THREADS"])

from .integrals import (IntegralSet, OrbitalMeta, Permutation, build_hubbard, load_integrals,  # noqa: E402
                        parse_fcidump, random_integrals, write_fcidump)
from .dmrg import DmrgResult, SweepConfig, run_dmrg  # noqa: E402

__version__ = "0.1.0"

__all__ = [
    "IntegralSet", "OrbitalMeta", "Permutation", "build_hubbard", "load_integrals", "parse_fcidump",
    "random_integrals", "write_fcidump", "DmrgResult", "SweepConfig", "run_dmrg",
]
