"""Command-line front end: ``qidmrg {oracle,run,order,analyze}``.

Settings come from defaults, then an optional flat ``key = value`` config
file (``--config``), then command-line flags; later sources win.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import cideas, dmrg, entanglement, fci, ordering
from .integrals import (FcidumpError, Permutation, energetic_ordering, format_vector, load_integrals,
                        parse_vectors)

log = logging.getLogger("qidmrg")


@dataclass
class RunConfig:
    input: str = ""
    nelec: int | None = None
    two_sz: int | None = None
    chi: float = 1e-6
    m_min: int = 64
    m_start: int = 64
    m_cap: int = 4096
    max_sweeps: int = 8
    convergence_tol: float = 1e-7
    eta: float = 2.0
    ordering: str = "energetic"
    ordering_file: str = ""
    warmup: str = "cideas"
    ci_level_cap: int = 3
    active_budget: int = 6
    irrep_constraint: bool = False
    short_m_min: int = 16
    short_chi: float = 1e-4
    short_sweeps: int = 2
    bond_threshold: float = 1e-4
    seed: int = 7
    output: str = "qidmrg_out"

    def validate(self) -> None:
        if self.ordering not in ("energetic", "file", "auto"):
            raise ValueError(f"ordering must be energetic, file or auto, not {self.ordering!r}")
        if self.warmup not in ("cideas", "cas-bootstrap", "naive"):
            raise ValueError(f"warmup must be cideas, cas-bootstrap or naive, not {self.warmup!r}")
        if self.ordering == "file" and not self.ordering_file:
            raise ValueError("ordering=file needs ordering_file")
        dmrg.SweepConfig(chi=self.chi, m_min=self.m_min, m_start=self.m_start, m_cap=self.m_cap,
                         max_sweeps=self.max_sweeps)
        ordering.CostParams(self.eta)

    def sweep_config(self, **over) -> dmrg.SweepConfig:
        kw = dict(chi=self.chi, m_min=self.m_min, m_start=self.m_start, m_cap=self.m_cap,
                  max_sweeps=self.max_sweeps, convergence_tol=self.convergence_tol,
                  n_electrons=self.nelec, two_sz=self.two_sz, seed=self.seed)
        kw.update(over)
        return dmrg.SweepConfig(**kw)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, value: str):
    kind = _FIELD_TYPES[key]
    if value.lower() in ("none", "") and "None" in kind:
        return None
    if kind.startswith("bool"):
        if value.lower() in ("1", "true", "yes", "on"):
            return True
        if value.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{key}: not a boolean: {value!r}")
    if kind.startswith("int"):
        return int(value)
    if kind.startswith("float"):
        return float(value)
    return value


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELD_TYPES:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _convert(key, value)
    return out


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for name in _FIELD_TYPES:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


# --- helpers -------------------------------------------------------------------

def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _load_ordering_file(path, n: int) -> Permutation:
    p = Path(path)
    if p.suffix == ".json":
        data = json.loads(p.read_text())
        if isinstance(data, list):
            data = data[0]
        return Permutation(np.array(data["perm"], dtype=int))
    vecs = parse_vectors(p.read_text())
    if "ORD" not in vecs:
        raise ValueError(f"{path}: no ORD vector found")
    perm = Permutation.from_one_based(vecs["ORD"])
    if len(perm) != n:
        raise ValueError(f"{path}: ORD has {len(perm)} entries for {n} orbitals")
    return perm


def _info_from_result(res: dmrg.DmrgResult) -> entanglement.MutualInfoMatrix:
    return res.mutual_info()


def _write_info_reports(out: Path, info: entanglement.MutualInfoMatrix) -> None:
    entanglement.write_matrix_csv(info.values, out / "mutual_info.csv")
    entanglement.write_s1_csv(info.s1, out / "s1.csv")


# --- commands --------------------------------------------------------------------

def cmd_oracle(cfg: RunConfig) -> int:
    h = load_integrals(cfg.input)
    ne = cfg.nelec if cfg.nelec is not None else h.n_electrons
    tsz = cfg.two_sz if cfg.two_sz is not None else h.ms2
    sector = fci.enumerate_sector(h.n_orbitals, ne, tsz)
    (energy, psi), = fci.ground_state(h, sector)
    n = h.n_orbitals
    one = {i: fci.subset_rdm(psi, [i]) for i in range(n)}
    two = {(i, j): fci.subset_rdm(psi, [i, j]) for i in range(n) for j in range(i + 1, n)}
    info = entanglement.mutual_information_from_rdms(one, two, n)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    entanglement.write_matrix_csv(info.values, out / "i_matrix.csv")
    _write_json(out / "oracle.json", {
        "energy": energy,
        "s2": fci.expectation_s2(psi),
        "s1": [float(x) for x in info.s1],
        "i_tot": entanglement.total_correlation(info.s1),
        "residual": fci.residual_norm(h, energy, psi),
        "n_determinants": sector.size,
        "i_matrix": "i_matrix.csv",
    })
    print(f"E0 = {energy:.12f}")
    return 0


def _make_warmup(cfg: RunConfig, casv=None, s1=None) -> cideas.Warmup:
    wcfg = cideas.WarmupConfig(cfg.ci_level_cap, cfg.m_start, cfg.active_budget)
    if cfg.warmup == "naive":
        return cideas.Warmup(wcfg, mode="naive")
    if cfg.warmup == "cas-bootstrap":
        return cideas.Warmup(wcfg)
    return cideas.Warmup(wcfg, casv=casv, s1=s1)


def cmd_run(cfg: RunConfig) -> int:
    h = load_integrals(cfg.input)
    n = h.n_orbitals
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    params = ordering.CostParams(cfg.eta)
    base = energetic_ordering(h)
    casv, s1, method = None, None, "input"
    if cfg.ordering == "file":
        perm = _load_ordering_file(cfg.ordering_file, n)
        method = "file"
    elif cfg.ordering == "energetic":
        perm = base
        method = "energetic"
    else:
        log.info("exploratory run with bootstrap CAS vector")
        short = dmrg.run_dmrg(h, base, cfg.sweep_config(m_min=min(cfg.short_m_min, cfg.m_cap),
                                                         chi=max(cfg.chi, cfg.short_chi),
                                                         max_sweeps=cfg.short_sweeps),
                              _make_warmup(RunConfig(**{**asdict(cfg), "warmup": "cas-bootstrap"})))
        info0 = _info_from_result(short)
        constraint = ordering.IrrepConstraint(cfg.irrep_constraint, h.meta.irrep_labels)
        res = ordering.optimize_ordering(info0, constraint, params,
                                         ordering.AnnealSchedule(seed=cfg.seed), start=base)
        perm, method = res.permutation, "anneal"
        s1 = info0.s1
        casv = cideas.build_cas_vector(s1)
        _write_json(out / "exploratory.json", {
            "energy": short.final_energy,
            "s1": [float(x) for x in s1],
            "cost_energetic": ordering.entanglement_distance(info0, base, params),
            "cost_optimized": res.cost,
        })
    warm = _make_warmup(cfg, casv, s1)
    result = dmrg.run_dmrg(h, perm, cfg.sweep_config(), warm)
    info = _info_from_result(result)
    if casv is None:
        casv = cideas.build_cas_vector(info.s1)

    dmrg.write_energy_trace(result, out / "energy_trace.csv")
    entanglement.write_profiles_csv(result.profiles, out / "block_entropy.csv")
    dmrg.write_m_trace(result, out / "m_trace.csv")
    dmrg.write_truncation_log(result, out / "truncation.csv")
    _write_info_reports(out, info)
    ores = ordering.OrderingResult(perm, ordering.entanglement_distance(info, perm, params), method, cfg.seed)
    _write_json(out / "ordering.json", ores.to_json_dict())
    (out / "vectors.txt").write_text(format_vector("ORD", perm.one_based())
                                     + format_vector("CASV", casv.one_based()))
    summary = {
        "energy": result.final_energy,
        "energies": result.energies,
        "converged": result.converged,
        "n_sweeps": result.n_sweeps,
        "m_max": result.m_max,
        "s2": result.s2_expectation,
        "clamped": result.clamped_count,
        "ordering": [int(x) for x in perm.image],
        "casv": list(casv.orbitals),
        "config": asdict(cfg),
        **entanglement.summary_dict(info, cfg.bond_threshold),
    }
    _write_json(out / "summary.json", summary)
    dmrg.save_checkpoint(result, out / "checkpoint.npz")
    print(f"E = {result.final_energy:.12f}  converged = {result.converged}  M_max = {result.m_max}")
    if not result.converged:
        print("run did not converge within max_sweeps", file=sys.stderr)
        return 1
    return 0


def cmd_order(args: argparse.Namespace) -> int:
    mat = entanglement.read_matrix_csv(args.imatrix)
    n = mat.shape[0]
    params = ordering.CostParams(args.eta)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    if "brute" in methods and n > ordering.BRUTE_FORCE_CAP:
        raise ValueError(f"brute force is limited to N <= {ordering.BRUTE_FORCE_CAP} (got N = {n})")
    labels = tuple(int(x) for x in args.irreps.split(",")) if args.irreps else tuple([1] * n)
    constraint = ordering.IrrepConstraint(bool(args.irreps), labels)
    results = []
    for m in methods:
        if m == "anneal":
            results.append(ordering.optimize_ordering(mat, constraint, params,
                                                      ordering.AnnealSchedule(seed=args.seed)))
        elif m == "fiedler":
            results.append(ordering.fiedler_ordering(mat, params))
        elif m == "brute":
            results.append(ordering.brute_force_ordering(mat, params))
        else:
            raise ValueError(f"unknown ordering method {m!r}")
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    ordering.write_ordering_json(results, out / "ordering.json")
    identity_cost = ordering.entanglement_distance(mat, Permutation.identity(n), params)
    with open(out / "order_comparison.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "cost", "perm"])
        w.writerow(["input", f"{identity_cost:.12e}", " ".join(map(str, range(n)))])
        for r in results:
            w.writerow([r.method, f"{r.cost:.12e}", " ".join(map(str, r.permutation.image))])
    for r in results:
        print(f"{r.method:8s} {r.cost:.10g}  ORD = {' '.join(map(str, r.permutation.one_based()))}")
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    state, meta = dmrg.load_checkpoint(args.checkpoint)
    one, two = dmrg.measure_turning_point(state)
    info = entanglement.mutual_information_from_rdms(one, two, state.n_sites)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    _write_info_reports(out, info)
    entanglement.write_profiles_csv([state.block_entropies()], out / "block_entropy.csv")
    summary = entanglement.summary_dict(info, args.threshold)
    summary["s2"] = dmrg.s2_from_rdms(one, two)
    summary["energy"] = meta["final_energy"]
    _write_json(out / "summary.json", summary)
    print(f"I_tot = {summary['i_tot']:.10f}")
    return 0


# --- argument parsing ------------------------------------------------------------

def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", nargs="?", default=None, help="FCIDUMP or JSON integral file")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--nelec", type=int)
    p.add_argument("--two-sz", dest="two_sz", type=int)
    p.add_argument("--chi", type=float)
    p.add_argument("--m-min", dest="m_min", type=int)
    p.add_argument("--m-start", dest="m_start", type=int)
    p.add_argument("--m-cap", dest="m_cap", type=int)
    p.add_argument("--max-sweeps", dest="max_sweeps", type=int)
    p.add_argument("--convergence-tol", dest="convergence_tol", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--ordering", choices=["energetic", "file", "auto"])
    p.add_argument("--ordering-file", dest="ordering_file")
    p.add_argument("--warmup", choices=["cideas", "cas-bootstrap", "naive"])
    p.add_argument("--ci-level-cap", dest="ci_level_cap", type=int)
    p.add_argument("--active-budget", dest="active_budget", type=int)
    p.add_argument("--irrep-constraint", dest="irrep_constraint", action="store_const", const=True)
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qidmrg", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    _add_run_flags(sub.add_parser("oracle", help="exact diagonalization reference"))
    _add_run_flags(sub.add_parser("run", help="DMRG run with reports"))
    po = sub.add_parser("order", help="orbital ordering from a mutual-information CSV")
    po.add_argument("imatrix")
    po.add_argument("--methods", default="anneal,fiedler,brute")
    po.add_argument("--eta", type=float, default=2.0)
    po.add_argument("--irreps", default="", help="comma-separated irrep label per orbital")
    po.add_argument("--seed", type=int, default=1234)
    po.add_argument("-o", "--output", default="qidmrg_order")
    pa = sub.add_parser("analyze", help="recompute entanglement reports from a checkpoint")
    pa.add_argument("checkpoint")
    pa.add_argument("--threshold", type=float, default=1e-4)
    pa.add_argument("-o", "--output", default="qidmrg_analyze")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "order":
            return cmd_order(args)
        if args.command == "analyze":
            return cmd_analyze(args)
        cfg = resolve_config(args)
        if not cfg.input:
            raise ValueError("no input file given")
        if args.command == "oracle":
            return cmd_oracle(cfg)
        return cmd_run(cfg)
    except (FileNotFoundError, FcidumpError, ValueError) as exc:
        print(f"qidmrg: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
