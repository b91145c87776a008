"""Command-line front end.

Exit codes: 0 when every requested comparison matched (or none was
requested), 1 on a mismatch or a failed cell, 2 on bad usage, 3 when a
guard stopped the run (row cap, precision budget).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .conway import prime_power
from .errors import (
    InsufficientPrecision,
    InvalidDimension,
    OutsideTheoremRange,
    PrecisionExhausted,
    TooLarge,
)
from .incidence import (
    affine_incidence_matrix,
    projective_incidence_matrix,
    read_incidence,
    write_matrix_market,
)
from .invariants import (
    CSV_HEADER,
    affine_spectrum_difference,
    affine_spectrum_direct,
    degenerate_projective_spectrum,
    projective_spectrum,
)
from .snf import smith_normal_form
from .verify import (
    DEFAULT_GRID,
    DEFAULT_ROW_CAP,
    REPORT_HEADER,
    GridConfig,
    grid_csv,
    grid_json,
    grid_ok,
    grid_report,
    parse_config,
    verify_affine,
    verify_projective,
    write_grid,
)

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_GUARD = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _need(args, *names):
    missing = [f"--{n}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command} needs {' '.join(missing)}")


def _build(args):
    _need(args, "q", "n", "r")
    if args.space == "affine":
        return affine_incidence_matrix(args.n, args.q, args.r)
    return projective_incidence_matrix(args.n, args.q, args.r)


# -- subcommands --------------------------------------------------------------


def cmd_incidence(args) -> int:
    M = _build(args)
    fmt = args.format or "mtx"
    if fmt == "mtx":
        if args.out:
            M.write(args.out)
        else:
            buf = io.StringIO()
            write_matrix_market(buf, M)
            sys.stdout.write(buf.getvalue())
    elif fmt == "json":
        side = M.sidecar()
        side["row_sums"] = sorted(set(M.row_sums().tolist()))
        side["col_sums"] = sorted(set(M.col_sums().tolist()))
        side["nnz"] = len(M.entries)
        _emit(_dumps(side), args.out)
    else:
        raise UsageError("incidence writes mtx or json")
    return EXIT_OK


def cmd_snf(args) -> int:
    if args.matrix:
        M = read_incidence(args.matrix)
        p = args.p or M.metadata.get("p")
    else:
        M = _build(args)
        p = args.p or prime_power(args.q)[0]
    res = smith_normal_form(M)
    fmt = args.format or "json"
    if fmt == "json":
        _emit(res.dumps(p) + "\n", args.out)
    elif fmt == "csv":
        if p is None:
            raise UsageError("csv output needs --p (or a sidecar with p)")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", "multiplicity"])
        w.writerows(res.p_spectrum(p).items())
        _emit(buf.getvalue(), args.out)
    else:
        raise UsageError("snf writes json or csv")
    return EXIT_OK


def _formula(args):
    _need(args, "q", "n", "r")
    n, q, r = args.n, args.q, args.r
    if args.space == "affine":
        sp = affine_spectrum_direct(n, q, r)
        diff = affine_spectrum_difference(n, q, r) if r <= n - 2 else None
        return sp, diff
    if r in (1, n + 1):
        return degenerate_projective_spectrum(n, q, r), None
    return projective_spectrum(n, q, r), None


def cmd_formula(args) -> int:
    sp, diff = _formula(args)
    fmt = args.format or "json"
    if fmt == "json":
        out = sp.to_json()
        out["invariants"] = _runs(sp.invariants())
        if diff is not None:
            out["difference_agrees"] = diff.same_as(sp)
        _emit(_dumps(out), args.out)
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(sp.csv_rows())
        _emit(buf.getvalue(), args.out)
    else:
        raise UsageError("formula writes json or csv")
    return EXIT_OK


def _runs(values) -> list[list[int]]:
    out: list[list[int]] = []
    for d in values:
        if out and out[-1][0] == d:
            out[-1][1] += 1
        else:
            out.append([d, 1])
    return out


def cmd_charsum(args) -> int:
    from .charsum import audit_csv, basis_array, coordinate_valuations, types_of

    _need(args, "q", "n", "r")
    n, q, r = args.n, args.q, args.r
    if not 1 <= r <= n + 1:
        raise InvalidDimension(f"r={r} outside [1, n+1]")
    fmt = args.format or "csv"
    if fmt == "csv":
        _emit(audit_csv(n, q, r, args.precision), args.out)
        return EXIT_OK
    if fmt != "json":
        raise UsageError("charsum writes csv or json")
    B = basis_array(n, q)
    B = B[B.any(axis=1)]
    val = coordinate_valuations(B, n, q, r, args.precision)
    alphas = (r - types_of(B, q)).clip(min=0).sum(axis=1)
    mins = [int(v[v >= 0].min()) if (v >= 0).any() else None for v in val]
    agree = all(m == int(a) for m, a in zip(mins, alphas))
    p, t = prime_power(q)
    out = {"p": p, "t": t, "n": n, "r": r, "monomials": len(B), "min_equals_alpha": agree}
    _emit(_dumps(out), args.out)
    return EXIT_OK if agree else EXIT_MISMATCH


def cmd_verify(args) -> int:
    _need(args, "q", "n", "r")
    fn = verify_affine if args.space == "affine" else verify_projective
    M = read_incidence(args.matrix) if args.matrix else None
    rep = fn(args.n, args.q, args.r, row_cap=args.row_cap, matrix=M)
    fmt = args.format or "json"
    if fmt == "json":
        _emit(_dumps(rep.to_json()), args.out)
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        w.writerows(rep.csv_rows())
        _emit(buf.getvalue(), args.out)
    else:
        raise UsageError("verify writes json or csv")
    return EXIT_OK if rep.passed else EXIT_MISMATCH


def cmd_grid(args) -> int:
    text = Path(args.config).read_text() if args.config else DEFAULT_GRID
    try:
        config = parse_config(text)
    except ValueError as exc:
        raise UsageError(f"bad grid config: {exc}") from exc
    if args.row_cap is not None:
        config = GridConfig(config.cells, args.row_cap)

    def progress(res):
        c = res["cell"]
        print(f"{c.space[0].upper()}(n={c.n},q={c.q},r={c.r}) {res['status']}", file=sys.stderr)

    report = grid_report(config, jobs=args.jobs, progress=None if args.quiet else progress)
    fmt = args.format
    if args.out and fmt is None:
        write_grid(report, args.out)
    elif fmt == "csv":
        _emit(grid_csv(report), args.out)
    else:
        _emit(_dumps(grid_json(report)), args.out)
    s = report["summary"]
    print(
        f"grid: {len(report['results'])} cells, {s['pass']} pass, {s['mismatch']} mismatch, "
        f"{s['error']} error, {s['skipped']} skipped",
        file=sys.stderr,
    )
    return EXIT_OK if grid_ok(report) else EXIT_MISMATCH


# -- argument parsing ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="incsnf", description="Smith normal forms of finite-geometry incidence matrices."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats, geometry=True):
        if geometry:
            p.add_argument("--q", type=int, help="field order")
            p.add_argument("--n", type=int, help="geometry dimension")
            p.add_argument("--r", type=int, help="subspace dimension (flat dimension for affine)")
            p.add_argument("--space", choices=["projective", "affine"], default="projective")
        p.add_argument("--out", help="output path (stdout when omitted)")
        p.add_argument("--format", choices=formats)

    common(sub.add_parser("incidence", help="build an incidence matrix"), ["mtx", "json"])
    p = sub.add_parser("snf", help="integer Smith normal form of a matrix")
    common(p, ["json", "csv"])
    p.add_argument("--matrix", help="Matrix Market file (sidecar JSON optional)")
    p.add_argument("--p", type=int, help="prime for the p-spectrum")
    common(sub.add_parser("formula", help="closed-form invariant spectrum"), ["json", "csv"])
    p = sub.add_parser("charsum", help="coordinate valuations of the monomial basis")
    common(p, ["csv", "json"])
    p.add_argument("--precision", type=int, help="starting p-adic precision N")
    p = sub.add_parser("verify", help="compare formula and oracle on one cell")
    common(p, ["json", "csv"])
    p.add_argument("--matrix", help="use this matrix instead of building one")
    p.add_argument("--row-cap", type=int, default=DEFAULT_ROW_CAP)
    p = sub.add_parser("grid", help="verify a grid of cells")
    common(p, ["json", "csv"], geometry=False)
    p.add_argument("--config", help="key=value grid definition (default grid when omitted)")
    p.add_argument("--row-cap", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--quiet", action="store_true", help="no per-cell progress")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    handlers = {
        "incidence": cmd_incidence,
        "snf": cmd_snf,
        "formula": cmd_formula,
        "charsum": cmd_charsum,
        "verify": cmd_verify,
        "grid": cmd_grid,
    }
    try:
        return handlers[args.command](args)
    except UsageError as exc:
        print(f"incsnf: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TooLarge, PrecisionExhausted, InsufficientPrecision) as exc:
        print(f"incsnf: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (InvalidDimension, OutsideTheoremRange, ValueError, OSError) as exc:
        print(f"incsnf: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
