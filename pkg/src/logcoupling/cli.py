"""Command-line interface: ``logcoupling <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from typing import List, Optional, Sequence

from .characters import (
    DENSE,
    dense_polymer_identity,
    ising_decomposition_checks,
    kac_character,
)
from .errors import LogCouplingError
from .koo_saleur import VARIANTS
from .lattice.dilute import VERTEX, DiluteChain, DiluteSpec
from .lattice.tl import FREE_FERMION, LOOP, XXZ, ChainSpec, DenseChain
from .pipeline import (
    DILUTE,
    PRESETS,
    BetaSeries,
    Job,
    Theory,
    beta_lattice,
    exit_code,
    extrapolate,
    load_config,
    reproduce_exact_table,
    run_campaign,
    summary,
    write_csv,
    write_json,
)
from .spectral import annotate_weights, jordanize, low_spectrum
from .symbolic.beta import beta_exact
from .symbolic.kac import as_fraction
from .symbolic.staggered import staggered_shape
from .symbolic.verma import ACONV, CONVENTIONS


def _x0_from_lambda(lam: float) -> Fraction:
    return Fraction(math.pi / (4 * lam - math.pi)).limit_denominator(1000)


def _theory_x0(args) -> Fraction:
    if getattr(args, "lam", None) is not None:
        return _x0_from_lambda(args.lam)
    if args.x0 is None:
        raise SystemExit("one of --x0 or --lambda is required")
    return as_fraction(args.x0)


# -- subcommands -------------------------------------------------------------------

def cmd_beta_exact(args) -> int:
    shape = staggered_shape(args.family, as_fraction(args.x0), Fraction(args.j))
    result = beta_exact(shape, args.convention)
    print(shape.describe())
    print(f"A = {result.operator}")
    print(f"beta = {result.value}  ({float(result.value):.12g})")
    return 0


def cmd_beta_lattice(args) -> int:
    family = DILUTE if args.rep == VERTEX else DENSE
    theory = Theory(
        family,
        _theory_x0(args),
        Fraction(args.j),
        args.rep,
        args.a_variant,
        args.window if args.window is not None else (0.5 if family == DENSE else 1.0),
        args.convention,
    )
    exact = beta_exact(theory.shape, theory.convention).value
    series = BetaSeries(theory)
    print(f"{theory.label()}  variant={theory.a_variant}  exact={exact} ({float(exact):.8g})")
    print(f"{'L':>4} {'h_L':>10} {'beta_L':>16} {'Im':>10} {'gauge':>10} {'sec':>7}")
    for L in range(args.L_min, args.L_max + 1):
        if not theory.sizes_allowed(L) or (series.samples and (L - series.sizes[0]) % 2):
            continue
        s = beta_lattice(theory, L, k=args.k, tol=args.tol)
        series.add(s)
        print(f"{L:>4} {s.h_psi:>10.6f} {s.beta.real:>16.10g} {s.beta.imag:>10.2e} {s.gauge_spread:>10.2e} {s.seconds:>7.1f}")
        sys.stdout.flush()
    if len(series.samples) >= 3:
        ext = extrapolate(series, args.degree, args.fit_window)
        print(f"extrapolation (degree {ext.degree}, sizes {list(ext.sizes)}): {ext.beta:.8g} +- {ext.error:.2g}")
    return 0


def cmd_characters(args) -> int:
    x0 = as_fraction(args.x0)
    for j in range(args.j_max + 1):
        print(f"K_{j} = {kac_character(x0, j, args.family, args.trunc)}")
    if not args.check:
        return 0
    ok = True
    for name, verdict in ising_decomposition_checks(args.trunc).items():
        print(f"{name}: {'holds' if verdict else 'FAILS'}")
        ok &= verdict
    lhs, rhs = dense_polymer_identity(args.trunc)
    verdict = lhs.agrees_with(rhs)
    print(f"x=1 partition function identity: {'holds' if verdict else 'FAILS'}")
    ok &= verdict
    return 0 if ok else 2


def _spectrum_chains(args):
    L, sector = args.L, Fraction(args.sector)
    if args.rep == VERTEX:
        lam = args.lam if args.lam is not None else math.pi * (1 + 1 / float(as_fraction(args.x0))) / 4
        chain = DiluteChain(DiluteSpec(L, lam, sector, VERTEX))
        ground = chain if sector == 0 else DiluteChain(DiluteSpec(L, lam, 0, VERTEX))
        return chain, ground
    x0 = as_fraction(args.x0)
    chain = DenseChain(ChainSpec(L, args.rep, x0, sector))
    return chain, DenseChain(ChainSpec(L, XXZ, x0, Fraction(L % 2, 2)))


def cmd_spectrum(args) -> int:
    chain, ground = _spectrum_chains(args)
    ref = chain.reference()
    E0 = float(low_spectrum(ground.hamiltonian, k=1).eigenvalues[0].real)
    record = low_spectrum(chain.hamiltonian, k=args.levels)
    blocks = jordanize(record, tol=args.tol, scale=math.pi * ref.v_F / args.L)
    annotate_weights(blocks, E0, args.L, ref.v_F)
    print(f"L={args.L} rep={args.rep} sector={args.sector} E0={E0:.12g} v_F={ref.v_F:.10g}")
    print(f"{'E':>22} {'h_L':>10} {'block':>5}")
    for b in blocks:
        print(f"{b.eigenvalue.real:>22.14g} {b.h:>10.6f} {b.size:>5}")
    return 0


def _print_results(results) -> None:
    for entry in summary(results)["jobs"]:
        ext = entry.get("extrapolation")
        value = f"{ext['beta']:.8g} +- {ext['error']:.2g}" if ext else "-"
        verdict = {True: "pass", False: "FAIL", None: "report"}[entry["passed"]]
        print(f"{entry['name']:<34} exact={entry['exact']:<18} extrapolated={value:<24} {verdict}")
        if entry["error"]:
            print(f"    error: {entry['error']}")


def cmd_campaign(args) -> int:
    if args.preset == "reproduce-table-5":
        rows = reproduce_exact_table(args.convention)
        for row in rows:
            print(f"{row['name']:<32} {row['beta']:>22} {'match' if row['match'] else 'MISMATCH'}")
        if args.json:
            with open(args.json, "w", encoding="utf-8") as fh:
                json.dump({"exact": rows}, fh, indent=2)
        return 0 if all(r["match"] for r in rows) else 2
    jobs: List[Job] = list(PRESETS[args.preset]) if args.preset else load_config(args.config)
    results = run_campaign(jobs, workers=args.workers)
    _print_results(results)
    if args.csv:
        write_csv(results, args.csv)
    if args.json:
        write_json(results, args.json)
    return exit_code(results)


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="logcoupling", description="Logarithmic couplings, exactly and on the lattice.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("beta-exact", help="exact coupling from the limit formula")
    p.add_argument("--family", choices=(DENSE, DILUTE), default=DENSE)
    p.add_argument("--x0", required=True, help="Kac parameter, e.g. 2 or 1/2")
    p.add_argument("--j", required=True, help="spin of the diamond, e.g. 2 or 3/2")
    p.add_argument("--convention", choices=CONVENTIONS, default=ACONV)
    p.set_defaults(func=cmd_beta_exact)

    p = sub.add_parser("beta-lattice", help="finite-size couplings and their extrapolation")
    p.add_argument("--rep", choices=(XXZ, FREE_FERMION, VERTEX), default=XXZ)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--x0")
    group.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--j", required=True)
    p.add_argument("--L-min", type=int, default=8)
    p.add_argument("--L-max", type=int, default=14)
    p.add_argument("--a-variant", choices=VARIANTS, default=None)
    p.add_argument("--tol", type=float, default=1e-6, help="eigenvalue clustering tolerance")
    p.add_argument("--convention", choices=CONVENTIONS, default=ACONV)
    p.add_argument("--window", type=float, default=None, help="h window for identification")
    p.add_argument("--degree", type=int, default=None, help="polynomial degree in 1/L")
    p.add_argument("--fit-window", type=int, default=None, help="number of largest sizes fitted")
    p.add_argument("--k", type=int, default=30, help="number of Schur vectors")
    p.set_defaults(func=cmd_beta_lattice)

    p = sub.add_parser("characters", help="Kac characters and identity checks")
    p.add_argument("--x0", default="3")
    p.add_argument("--family", choices=(DENSE, DILUTE), default=DENSE)
    p.add_argument("--trunc", type=int, default=30)
    p.add_argument("--j-max", type=int, default=3)
    p.add_argument("--check", action="store_true", help="verify the decomposition identities")
    p.set_defaults(func=cmd_characters)

    p = sub.add_parser("spectrum", help="low spectrum with Jordan structure")
    p.add_argument("--rep", choices=(XXZ, LOOP, FREE_FERMION, VERTEX), default=XXZ)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--x0")
    group.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--sector", default="0", help="S_z, or the through-line spin j for loop")
    p.add_argument("--levels", type=int, default=10)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("campaign", help="run a preset or a configuration file")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--preset", choices=sorted(PRESETS))
    group.add_argument("--config")
    p.add_argument("--csv", help="per-size output")
    p.add_argument("--json", help="summary output")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--convention", choices=CONVENTIONS, default=ACONV)
    p.set_defaults(func=cmd_campaign)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (LogCouplingError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
