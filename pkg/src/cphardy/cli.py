"""Command line front end: corpus analysis, identity verification, sweeps.

Symbol records (one per line in a symbol file, or semicolon-separated on the
command line) use the grammar::

    identity
    polynomial <c0> <c1> ...        coefficients as re,im pairs, ascending
    blaschke <rot> <zero> [...]     unimodular rotation, zeros in the disk
    moebius <a> [<rot>]             automorphism z -> rot (z-a)/(1-conj(a)z)
    affine <r> [<s>]                z -> r z + s, r in (0,1], r+|s| <= 1

Stages chained with ``|`` apply left to right: ``affine 0.5,0 0.5,0 |
polynomial 0,0 0,0 1,0`` is the square of the half-shift.

Reports are deterministic: identical configuration and seeds produce
byte-identical output files (no timestamps, sorted keys).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .criteria import (
    CriteriaConfig,
    SymbolArtifacts,
    analyze,
    golden_corpus,
)
from .hardy import (
    TestFunction,
    norm_boundary,
    norm_hardy_stein,
    norm_layer_cake,
)
from .measures import (
    CarlesonWindow,
    TestObservable,
    pullback_measure,
    verify_pushforward_identity,
    verify_window_domination,
)
from .nevanlinna import TauField, verify_change_of_variable
from .numerics import DiskQuadrature, PreconditionError, SeededSampler
from .symbols import SymbolError, SymbolSpec, parse_symbol_record

__all__ = ["RunConfig", "cmd_analyze", "cmd_verify", "cmd_sweep", "main"]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class RunConfig:
    """Fully-resolved run parameters; echoed verbatim into every report.

    Every field has a default; the CLI only overrides what its flags name.
    Environment variables are never consulted.
    """

    symbols: tuple[tuple[str, str], ...] = ()  # (tag, record)
    p_list: tuple[float, ...] = (2.0,)
    seed: int = 20250809
    atom_count: int = 1_000_000
    kernel_depth: int = 12
    window_depth: int = 10
    levelset_depth: int = 10
    out_dir: str = "out"
    fmt: str = "both"  # json | csv | both
    verify_atom_count: int = 200_000
    verify_tol_change_v: float = 1e-4
    verify_tol_pushforward: float = 1e-2
    verify_tol_norms: float = 1e-4
    hardy_stein_constant: float | None = None
    sweep_param: str = ""
    sweep_values: tuple[float, ...] = ()

    def criteria_config(self) -> CriteriaConfig:
        return CriteriaConfig(
            seed=self.seed,
            atom_count=self.atom_count,
            kernel_depth=self.kernel_depth,
            window_depth=self.window_depth,
            levelset_depth=self.levelset_depth,
        )

    def as_dict(self) -> dict:
        d = asdict(self)
        d["symbols"] = [list(s) for s in self.symbols]
        return d


def _parse_symbols(arg: str | None, golden: bool) -> list[tuple[str, SymbolSpec]]:
    if golden:
        return golden_corpus()
    if not arg:
        return []
    path = Path(arg)
    if path.is_file():
        lines = [ln.strip() for ln in path.read_text().splitlines()]
        records = [ln for ln in lines if ln and not ln.startswith("#")]
    else:
        records = [part.strip() for part in arg.split(";") if part.strip()]
    out = []
    for i, rec in enumerate(records):
        phi = parse_symbol_record(rec)
        out.append((f"s{i:02d}-{phi.variant}", phi))
    return out


def _json_dump(doc: dict, path: Path) -> None:
    path.write_text(json.dumps(doc, sort_keys=True, indent=1, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"not JSON-serializable: {type(obj)!r}")


def cmd_analyze(cfg: RunConfig, symbols: list[tuple[str, SymbolSpec]]) -> int:
    """One report per (symbol, p); exit 0 iff every consistency flag is true."""
    if not symbols:
        print("analyze: no symbols given (use --symbols or --golden)", file=sys.stderr)
        return 2
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ccfg = cfg.criteria_config()
    rows = []
    all_consistent = True
    for tag, phi in symbols:
        artifacts = SymbolArtifacts(phi, ccfg)
        for p in cfg.p_list:
            rep = analyze(phi, p, ccfg, artifacts=artifacts, tag=tag)
            all_consistent &= rep.consistent
            doc = rep.as_dict()
            doc["run_config"] = cfg.as_dict()
            if cfg.fmt in ("json", "both"):
                _json_dump(doc, out / f"{tag}_p{p:g}.json")
            rows.append(
                {
                    "tag": tag,
                    "p": p,
                    "kernel": rep.verdict_kernel.state,
                    "boundary_density": rep.verdict_density.state,
                    "levelset_area": rep.verdict_levelset.state,
                    "window": rep.verdict_window.state,
                    "kernel_estimate": rep.verdict_kernel.estimate,
                    "density_estimate": rep.verdict_density.estimate,
                    "levelset_estimate": rep.verdict_levelset.estimate,
                    "window_estimate": rep.verdict_window.estimate,
                    "consistent": rep.consistent,
                }
            )
            states = {k: v.state for k, v in rep.verdicts().items()}
            print(f"{tag} p={p:g}: {states} consistent={rep.consistent}")
    if cfg.fmt in ("csv", "both"):
        _write_csv(out / "analyze_summary.csv", rows)
    return 0 if all_consistent else 1


def _write_csv(path: Path, rows: list[dict]) -> None:
    if not rows:
        return
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def _observables() -> list[TestObservable]:
    return [
        TestObservable(
            g=lambda z: np.abs(z) ** 2, laplacian=lambda z: 4.0 * np.ones(np.shape(z)), description="|z|^2"
        ),
        TestObservable(
            g=lambda z: np.real(z), laplacian=lambda z: np.zeros(np.shape(z)), description="Re z"
        ),
        TestObservable(
            g=lambda z: np.abs(z) ** 4, laplacian=lambda z: 16.0 * np.abs(z) ** 2, description="|z|^4"
        ),
    ]


def _norm_family() -> list[TestFunction]:
    fams = [
        TestFunction(lambda z: np.full(np.shape(z), 1.5 + 0j), lambda z: np.zeros(np.shape(z), dtype=complex), True, "const 1.5"),
        TestFunction(lambda z: 2.0 + z, lambda z: np.ones(np.shape(z), dtype=complex), True, "2+z"),
        TestFunction(lambda z: 1.0 - 0.5 * z, lambda z: np.full(np.shape(z), -0.5 + 0j), True, "1-z/2"),
        TestFunction(lambda z: 1.0 / (1.0 - 0.6 * z), lambda z: 0.6 / (1.0 - 0.6 * z) ** 2, True, "kernel 0.6"),
        TestFunction(lambda z: np.exp(0.7 * z), lambda z: 0.7 * np.exp(0.7 * z), True, "exp(0.7 z)"),
        TestFunction(lambda z: (2.0 + z) ** 2, lambda z: 2.0 * (2.0 + z), True, "(2+z)^2"),
    ]
    return fams


def cmd_verify(cfg: RunConfig, symbols: list[tuple[str, SymbolSpec]]) -> int:
    """Identity suite: substitution identity, pushforward identity, window
    domination, and three-way norm agreement.  Exit 0 iff all rows pass."""
    if not symbols:
        symbols = [(t, s) for t, s in golden_corpus() if t in {
            "identity", "square", "cube", "automorphism", "contraction-0.8", "half-shift"}]
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    q_disk = DiskQuadrature()
    rows: list[dict] = []

    def add(check, subject, status, lhs, rhs, gap, tol):
        rows.append(
            {"check": check, "subject": subject, "status": status,
             "lhs": lhs, "rhs": rhs, "gap": gap, "tolerance": tol}
        )

    observables = _observables()
    for tag, phi in symbols:
        tau_field = TauField(phi)
        mu = pullback_measure(phi, cfg.verify_atom_count, SeededSampler(cfg.seed).spawn(1))
        for obs in observables:
            rep = verify_change_of_variable(phi, obs.g, q_disk, tau_field=tau_field)
            ok = rep.rel_gap < cfg.verify_tol_change_v
            add("change_of_variable", f"{tag};g={obs.description}",
                "pass" if ok else "FAIL", rep.lhs, rep.rhs, rep.rel_gap, cfg.verify_tol_change_v)
            pb = verify_pushforward_identity(phi, obs, mu, q_disk, tau_field=tau_field)
            ok = pb.rel_gap < cfg.verify_tol_pushforward
            add("pushforward_identity", f"{tag};g={obs.description}",
                "pass" if ok else "FAIL", pb.lhs, pb.rhs, pb.rel_gap, cfg.verify_tol_pushforward)
        for k in range(4, 8):
            h = 0.5**k
            for j in range(8):
                zeta = np.exp(2j * np.pi * j / 8)
                try:
                    wrep = verify_window_domination(phi, CarlesonWindow(zeta, h), 1.0 / 16.0, mu,
                                                    tau_field=tau_field)
                except PreconditionError as exc:
                    add("window_domination", f"{tag};h=2^-{k};j={j}", "skip", 0.0, 0.0, 0.0, str(exc))
                    continue
                add("window_domination", f"{tag};h=2^-{k};j={j}",
                    "pass" if wrep.holds else "FAIL",
                    wrep.sup_counting, wrep.bound, -wrep.margin, 0.0)

    for tf in _norm_family():
        for p in cfg.p_list:
            nb = norm_boundary(tf, p)
            hs = norm_hardy_stein(tf, p, q_disk, constant=cfg.hardy_stein_constant)
            lc = norm_layer_cake(tf, p)
            worst = max(abs(hs - nb), abs(lc - nb)) / nb
            ok = worst < cfg.verify_tol_norms
            add("norm_agreement", f"{tf.description};p={p:g}",
                "pass" if ok else "FAIL", nb, hs, worst, cfg.verify_tol_norms)

    failures = [r for r in rows if r["status"] == "FAIL"]
    _write_csv(out / "verify_table.csv", rows)
    width = max(len(r["check"]) for r in rows)
    for r in rows:
        print(f"{r['check']:<{width}}  {r['status']:<4}  {r['subject']}  gap={r['gap']:.3e}")
    print(f"verify: {len(rows) - len(failures)}/{len(rows)} rows pass "
          f"({sum(1 for r in rows if r['status'] == 'skip')} skipped)")
    if failures:
        worst = max(failures, key=lambda r: r["gap"])
        print(
            f"worst offender: {worst['check']} {worst['subject']} "
            f"lhs={worst['lhs']:.6g} rhs={worst['rhs']:.6g} gap={worst['gap']:.3e}",
            file=sys.stderr,
        )
        return 1
    return 0


def cmd_sweep(cfg: RunConfig, symbols: list[tuple[str, SymbolSpec]]) -> int:
    """CSV curve over one swept parameter (affine scale or exponent p)."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ccfg = cfg.criteria_config()
    if not cfg.sweep_values:
        print("sweep: no values given", file=sys.stderr)
        return 2
    rows = []
    if cfg.sweep_param == "affine-scale":
        from .symbols import affine

        p = cfg.p_list[0]
        for r in cfg.sweep_values:
            phi = affine(float(r))
            rep = analyze(phi, p, ccfg, tag=f"affine-{r:g}")
            rows.append(_sweep_row(f"{r:g}", rep))
    elif cfg.sweep_param == "p":
        if len(symbols) != 1:
            print("sweep over p needs exactly one symbol", file=sys.stderr)
            return 2
        tag, phi = symbols[0]
        artifacts = SymbolArtifacts(phi, ccfg)
        for p in cfg.sweep_values:
            rep = analyze(phi, float(p), ccfg, artifacts=artifacts, tag=tag)
            rows.append(_sweep_row(f"{p:g}", rep))
    else:
        print(f"sweep: unknown parameter {cfg.sweep_param!r}", file=sys.stderr)
        return 2
    _write_csv(out / "sweep.csv", rows)
    for r in rows:
        print(",".join(str(v) for v in r.values()))
    return 0


def _sweep_row(value: str, rep) -> dict:
    return {
        "value": value,
        "kernel_estimate": rep.verdict_kernel.estimate,
        "density_estimate": rep.verdict_density.estimate,
        "levelset_estimate": rep.verdict_levelset.estimate,
        "window_estimate": rep.verdict_window.estimate,
        "kernel": rep.verdict_kernel.state,
        "boundary_density": rep.verdict_density.state,
        "levelset_area": rep.verdict_levelset.state,
        "window": rep.verdict_window.state,
        "consistent": rep.consistent,
    }


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cphardy", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("analyze", "closed-range verdicts for a corpus of symbols"),
        ("verify", "integral identity and inequality verification suite"),
        ("sweep", "estimate curves over one swept parameter"),
    ]:
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--symbols", help="symbol file or inline ';'-separated records")
        sp.add_argument("--golden", action="store_true", help="use the built-in reference corpus")
        sp.add_argument("--p", default="2", help="comma-separated exponent list")
        sp.add_argument("--seed", type=int, default=20250809)
        sp.add_argument("--depth", type=int, default=None, help="kernel lambda-grid depth override")
        sp.add_argument("--atoms", type=int, default=None, help="pullback sample count override")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--format", default="both", choices=["json", "csv", "both"])
        if name == "verify":
            sp.add_argument("--hardy-stein-constant", type=float, default=None,
                            help="override the derivative-energy constant (negative control)")
        if name == "sweep":
            sp.add_argument("--param", required=True, choices=["affine-scale", "p"])
            sp.add_argument("--values", required=True, help="comma-separated values")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        p_list = tuple(float(tok) for tok in str(args.p).split(",") if tok.strip())
    except ValueError:
        print(f"bad --p list {args.p!r}", file=sys.stderr)
        return 2
    cfg = RunConfig(p_list=p_list, seed=args.seed, out_dir=args.out, fmt=args.format)
    if args.atoms is not None:
        cfg = replace(cfg, atom_count=args.atoms, verify_atom_count=args.atoms)
    if args.depth is not None:
        cfg = replace(cfg, kernel_depth=args.depth)
    if getattr(args, "hardy_stein_constant", None) is not None:
        cfg = replace(cfg, hardy_stein_constant=args.hardy_stein_constant)
    if args.command == "sweep":
        try:
            values = tuple(float(tok) for tok in args.values.split(",") if tok.strip())
        except ValueError:
            print(f"bad --values list {args.values!r}", file=sys.stderr)
            return 2
        cfg = replace(cfg, sweep_param=args.param, sweep_values=values)
    try:
        symbols = _parse_symbols(args.symbols, args.golden)
    except SymbolError as exc:
        print(f"symbol parse error: {exc}", file=sys.stderr)
        return 2
    cfg = replace(cfg, symbols=tuple((t, s.to_record()) for t, s in symbols))
    if args.command == "analyze":
        return cmd_analyze(cfg, symbols)
    if args.command == "verify":
        return cmd_verify(cfg, symbols)
    return cmd_sweep(cfg, symbols)


if __name__ == "__main__":
    sys.exit(main())
