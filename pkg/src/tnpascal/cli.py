"""Command-line interface.

    tnpascal bd --family lattice:alpha=sqrt(2),beta=sqrt(3),gamma=sqrt(5) --n 5
    tnpascal solve --family pnl:x=3/2,lambda=1 --n 10 --rhs-mode alternating
    tnpascal inverse --family r:x=1,y=1 --n 4 --mode certified --digits 13
    tnpascal eig --family lattice:alpha=1,beta=1,gamma=1 --n 6
    tnpascal svd --family pnl:x=3/2,lambda=1 --n 8
    tnpascal experiment --family lattice:alpha=sqrt(2),beta=sqrt(3),gamma=sqrt(5) \
        --sizes 5,10 --quantities min_eig,min_sv --csv out.csv --plot out.svg

Exit codes: 0 success, 2 validation failure, 3 precision ceiling reached.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from .bd import SingularMatrixError, bd_to_json
from .certify import NoConvergence
from .families import parse_family
from .params import ParamParseError, parse_param
from .tnalg import (
    STRUCTURED,
    CertifiedPrecision,
    tn_eigenvalues,
    tn_inverse,
    tn_singular_values,
    tn_solve,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NO_CONVERGENCE = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tnpascal",
        description="Bidiagonal decompositions of Pascal and lattice-path "
                    "matrices and accuracy-preserving linear algebra on them.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_family(p):
        p.add_argument("--family", required=True,
                       help="family spec, e.g. lattice:alpha=sqrt(2),beta=sqrt(3),gamma=sqrt(5)")
        p.add_argument("--n", type=int, required=True,
                       help="size parameter (matrix order is n+1)")

    p_bd = sub.add_parser("bd", help="print the bidiagonal decomposition as JSON")
    add_family(p_bd)
    p_bd.add_argument("--json", metavar="PATH", help="write JSON here instead of stdout")

    p_solve = sub.add_parser("solve", help="solve A x = b from the decomposition")
    add_family(p_solve)
    p_solve.add_argument("--mode", choices=("structured", "certified"),
                         default="structured")
    p_solve.add_argument("--digits", type=int, default=13,
                         help="certified mode tolerance is 10^-digits")
    p_solve.add_argument("--rhs", help="comma-separated right-hand side entries")
    p_solve.add_argument("--rhs-mode", choices=("alternating", "mixed"),
                         default="alternating",
                         help="generate b when --rhs is not given")
    p_solve.add_argument("--seed", type=int, default=1)

    p_inv = sub.add_parser("inverse", help="invert A from the decomposition")
    add_family(p_inv)
    p_inv.add_argument("--mode", choices=("structured", "certified"),
                       default="structured")
    p_inv.add_argument("--digits", type=int, default=13)

    for name, help_text in (("eig", "certified eigenvalues, descending"),
                            ("svd", "certified singular values, descending")):
        p = sub.add_parser(name, help=help_text)
        add_family(p)
        p.add_argument("--digits", type=int, default=13,
                       help="certified relative tolerance is 10^-digits")

    p_exp = sub.add_parser("experiment",
                           help="score conventional vs accurate vs oracle, emit CSV")
    p_exp.add_argument("--config", metavar="PATH",
                       help="key=value file: family, sizes, quantities, methods, seed, digits")
    p_exp.add_argument("--family")
    p_exp.add_argument("--sizes", help="comma-separated size parameters")
    p_exp.add_argument("--quantities", help="comma-separated quantity names")
    p_exp.add_argument("--methods", help="comma-separated method names")
    p_exp.add_argument("--seed", type=int)
    p_exp.add_argument("--digits", type=int)
    p_exp.add_argument("--csv", required=True, metavar="PATH")
    p_exp.add_argument("--plot", metavar="PATH", help="also write an SVG chart")
    return parser


def _mode(args):
    if args.mode == "structured":
        return STRUCTURED
    return CertifiedPrecision(Fraction(1, 10 ** args.digits))


def _parse_rhs(text: str, order: int):
    entries = [parse_param(part) for part in text.split(",")]
    if len(entries) != order:
        raise ValueError(f"right-hand side has {len(entries)} entries, "
                         f"matrix order is {order}")
    return entries


def _print_vector(values) -> None:
    for v in values:
        print(f"{float(v):.17g}")


def _run_bd(args) -> int:
    spec = parse_family(args.family, args.n)
    text = bd_to_json(spec.bd())
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def _run_solve(args) -> int:
    from .bench import gen_rhs

    spec = parse_family(args.family, args.n)
    if args.rhs:
        b = _parse_rhs(args.rhs, spec.order)
    else:
        b = gen_rhs(spec.order, args.seed, args.rhs_mode)
    result = tn_solve(spec.bd(), b, _mode(args))
    _print_vector(result)
    print(f"# hra_flag={result.hra_flag}", file=sys.stderr)
    return EXIT_OK


def _run_inverse(args) -> int:
    spec = parse_family(args.family, args.n)
    result = tn_inverse(spec.bd(), _mode(args))
    for row in result:
        print(",".join(f"{float(v):.17g}" for v in row))
    return EXIT_OK


def _run_spectrum(args, kernel) -> int:
    spec = parse_family(args.family, args.n)
    result = kernel(spec.bd(), CertifiedPrecision(Fraction(1, 10 ** args.digits)))
    _print_vector(result)
    return EXIT_OK


def _read_config(path: str) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"expected key=value, got {line!r}")
            key, _, val = line.partition("=")
            values[key.strip().lower()] = val.strip()
    return values


def _run_experiment(args) -> int:
    from .bench import ExperimentConfig, emit_csv, emit_plot, run_experiment

    raw = _read_config(args.config) if args.config else {}
    for key in ("family", "sizes", "quantities", "methods", "seed", "digits"):
        override = getattr(args, key)
        if override is not None:
            raw[key] = override
    if "family" not in raw:
        raise ValueError("experiment needs a family (--family or config file)")
    kwargs = {"family": raw["family"]}
    if "sizes" in raw:
        kwargs["sizes"] = tuple(int(s) for s in str(raw["sizes"]).split(","))
    if "quantities" in raw:
        kwargs["quantities"] = tuple(str(raw["quantities"]).split(","))
    if "methods" in raw:
        kwargs["methods"] = tuple(str(raw["methods"]).split(","))
    if "seed" in raw:
        kwargs["seed"] = int(raw["seed"])
    if "digits" in raw:
        kwargs["digits"] = int(raw["digits"])
    cfg = ExperimentConfig(**kwargs)
    report = run_experiment(cfg)
    emit_csv(report, args.csv)
    if args.plot:
        emit_plot(report, args.plot)
    print(f"wrote {len(report.rows)} rows to {args.csv}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "bd":
            return _run_bd(args)
        if args.command == "solve":
            return _run_solve(args)
        if args.command == "inverse":
            return _run_inverse(args)
        if args.command == "eig":
            return _run_spectrum(args, tn_eigenvalues)
        if args.command == "svd":
            return _run_spectrum(args, tn_singular_values)
        if args.command == "experiment":
            return _run_experiment(args)
        raise ValueError(f"unknown command {args.command}")
    except NoConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (ValueError, TypeError, ParamParseError, SingularMatrixError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
