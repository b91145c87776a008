"""Formula-versus-oracle comparisons for single cells and whole grids."""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

from .conway import prime_power
from .errors import InvalidDimension, OutsideTheoremRange, TooLarge
from .geometry import gaussian_binomial
from .incidence import (
    IncidenceMatrix,
    affine_incidence_matrix,
    projective_incidence_matrix,
    read_incidence,
)
from .invariants import (
    InvariantSpectrum,
    affine_spectrum_difference,
    affine_spectrum_direct,
    projective_spectrum,
    spectrum_from_invariants,
)
from .snf import p_elementary_divisors, smith_normal_form

DEFAULT_ROW_CAP = 5000
REPORT_HEADER = [
    "p", "t", "n", "r", "space", "alpha", "multiplicity", "last_nonp", "match", "ms_total",
]


@dataclass
class VerificationReport:
    p: int
    t: int
    n: int
    r: int
    space: str
    formula_spectrum: InvariantSpectrum | None
    oracle_spectrum: InvariantSpectrum
    integer_invariants: list[int]
    match: bool | None
    timings: dict[str, float] = field(default_factory=dict)
    difference_spectrum: InvariantSpectrum | None = None
    snf_method: str = "integer"
    degenerate: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """False only for an actual mismatch; degenerate cells have nothing to compare."""
        return self.match is not False

    @property
    def ms_total(self) -> float:
        return sum(self.timings.values())

    def compressed_invariants(self) -> list[list[int]]:
        """Run-length form [[value, count], ...] of the integer invariants."""
        out: list[list[int]] = []
        for d in self.integer_invariants:
            if out and out[-1][0] == d:
                out[-1][1] += 1
            else:
                out.append([d, 1])
        return out

    def to_json(self, timings: bool = True) -> dict:
        out = {
            "p": self.p,
            "t": self.t,
            "n": self.n,
            "r": self.r,
            "space": self.space,
            "match": self.match,
            "degenerate": self.degenerate,
            "formula": self.formula_spectrum.to_json() if self.formula_spectrum else None,
            "difference": self.difference_spectrum.to_json() if self.difference_spectrum else None,
            "oracle": self.oracle_spectrum.to_json(),
            "integer_invariants": self.compressed_invariants(),
            "snf_method": self.snf_method,
            "notes": self.notes,
        }
        if timings:
            out["timings_ms"] = {k: round(v, 1) for k, v in self.timings.items()}
        return out

    def csv_rows(self) -> list[list]:
        sp = self.formula_spectrum or self.oracle_spectrum
        match = "" if self.match is None else str(self.match).lower()
        return [
            [self.p, self.t, self.n, self.r, self.space, a, m, sp.last_nonp, match, round(self.ms_total)]
            for a, m in sorted(sp.mult.items())
        ]


@contextmanager
def _timed(timings: dict, key: str):
    start = time.perf_counter()
    yield
    timings[key] = timings.get(key, 0.0) + (time.perf_counter() - start) * 1000


def _guard(rows: int, cols: int, row_cap: int):
    if rows > row_cap:
        raise TooLarge(
            f"{rows} rows exceed the row cap {row_cap}",
            {"rows": rows, "cols": cols, "row_cap": row_cap},
        )


def _oracle(M, p: int, timings: dict):
    with _timed(timings, "p_local"):
        local = p_elementary_divisors(M, p)
    with _timed(timings, "integer_snf"):
        res = smith_normal_form(M, local_hint={p: local})
    return local, res


def verify_projective(
    n: int, q: int, r: int, row_cap: int = DEFAULT_ROW_CAP, matrix: IncidenceMatrix | None = None
) -> VerificationReport:
    p, t = prime_power(q)
    if not 1 <= r <= n + 1:
        raise InvalidDimension(f"r={r} outside [1, n+1]")
    _guard(gaussian_binomial(n + 1, r, q), gaussian_binomial(n + 1, 1, q), row_cap)
    timings: dict[str, float] = {}
    degenerate = not 2 <= r <= n
    formula = None
    if not degenerate:
        with _timed(timings, "formula"):
            formula = projective_spectrum(n, q, r)
    with _timed(timings, "matrix"):
        M = matrix if matrix is not None else projective_incidence_matrix(n, q, r)
    local, res = _oracle(M, p, timings)
    invariants = list(res.invariants)
    oracle = spectrum_from_invariants(invariants, n, q, r, "projective", degenerate)
    notes = []
    if degenerate:
        # no closed form is evaluated outside 2 <= r <= n
        match = None
        notes.append("degenerate r: oracle only")
    else:
        match = (
            local == formula.mult
            and res.p_spectrum(p) == local
            and invariants == formula.invariants()
        )
    return VerificationReport(
        p, t, n, r, "projective", formula, oracle, invariants, match, timings,
        snf_method=res.method, degenerate=degenerate, notes=notes,
    )


def verify_affine(
    n: int, q: int, r: int, row_cap: int = DEFAULT_ROW_CAP, matrix: IncidenceMatrix | None = None
) -> VerificationReport:
    p, t = prime_power(q)
    if not 1 <= r <= n - 1:
        raise OutsideTheoremRange(f"affine comparison needs 1 <= r <= n-1, got r={r}, n={n}")
    rows = q ** (n - r) * gaussian_binomial(n, r, q)
    _guard(rows, q**n, row_cap)
    timings: dict[str, float] = {}
    with _timed(timings, "formula"):
        direct = affine_spectrum_direct(n, q, r)
        diff = affine_spectrum_difference(n, q, r) if r <= n - 2 else None
    with _timed(timings, "matrix"):
        M = matrix if matrix is not None else affine_incidence_matrix(n, q, r)
    local, res = _oracle(M, p, timings)
    invariants = list(res.invariants)
    oracle = spectrum_from_invariants(invariants, n, q, r, "affine")
    only_p_powers = all(d == p ** _vp(d, p) for d in invariants)
    match = (
        local == direct.mult
        and res.p_spectrum(p) == local
        and invariants == direct.invariants()
        and only_p_powers
        and (diff is None or diff.mult == direct.mult)
    )
    notes = [] if diff is not None else ["difference form not applied at r = n-1"]
    return VerificationReport(
        p, t, n, r, "affine", direct, oracle, invariants, match, timings,
        difference_spectrum=diff, snf_method=res.method, notes=notes,
    )


def _vp(d: int, p: int) -> int:
    v = 0
    while d % p == 0:
        d //= p
        v += 1
    return v


# -- grids ------------------------------------------------------------------


@dataclass(frozen=True)
class Cell:
    q: int
    n: int
    r: int
    space: str
    matrix: str | None = None

    def key(self):
        return (self.space != "projective", self.q, self.n, self.r)


@dataclass
class GridConfig:
    cells: list[Cell]
    row_cap: int = DEFAULT_ROW_CAP


def _parse_list(text: str) -> list[int]:
    out: list[int] = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _valid_r(space: str, n: int) -> range:
    return range(2, n + 1) if space == "projective" else range(1, n)


def parse_config(text: str) -> GridConfig:
    """key=value lines.

    q, n take comma lists or lo..hi ranges; r is 'all' (valid range only) or a
    list; space is projective, affine or both; row_cap is an integer.  Lines
    'cell = q n r space [matrix_path]' add explicit cells.  '#' starts a comment.
    """
    opts: dict[str, str] = {}
    cells: list[Cell] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key == "cell":
            parts = value.split()
            q, n, r = (int(x) for x in parts[:3])
            cells.append(Cell(q, n, r, parts[3], parts[4] if len(parts) > 4 else None))
        elif key in ("q", "n", "r", "space", "row_cap"):
            opts[key] = value
        else:
            raise ValueError(f"unknown config key {key!r}")
    if "q" in opts or "n" in opts:
        qs = _parse_list(opts.get("q", ""))
        ns = _parse_list(opts.get("n", ""))
        space = opts.get("space", "both")
        spaces = ["projective", "affine"] if space == "both" else [space]
        rsel = opts.get("r", "all")
        for sp in spaces:
            for q in qs:
                for n in ns:
                    rs = _valid_r(sp, n) if rsel == "all" else _parse_list(rsel)
                    cells.extend(Cell(q, n, r, sp) for r in rs)
    for c in cells:
        if c.space not in ("projective", "affine"):
            raise ValueError(f"unknown space {c.space!r}")
    cells = sorted(set(cells), key=lambda c: (c.key(), c.matrix or ""))
    return GridConfig(cells, int(opts.get("row_cap", DEFAULT_ROW_CAP)))


DEFAULT_GRID = """\
q = 2,3,4,5,8,9
n = 1..4
r = all
space = both
row_cap = 5000
"""


def run_cell(cell: Cell, row_cap: int) -> dict:
    """Verify one cell; returns a plain dict so it crosses process boundaries."""
    fn = verify_projective if cell.space == "projective" else verify_affine
    try:
        M = read_incidence(cell.matrix) if cell.matrix else None
        rep = fn(cell.n, cell.q, cell.r, row_cap=row_cap, matrix=M)
    except TooLarge as exc:
        return {"cell": cell, "status": "skipped", "reason": str(exc), "counts": exc.counts}
    except Exception as exc:  # reported, the sweep carries on
        return {"cell": cell, "status": "error", "reason": f"{type(exc).__name__}: {exc}"}
    status = "pass" if rep.passed else "mismatch"
    return {"cell": cell, "status": status, "report": rep}


def grid_report(config: GridConfig, jobs: int = 1, progress=None) -> dict:
    """Run every cell; returns {'results': [...], 'summary': {...}} in cell order."""
    if jobs > 1 and len(config.cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(run_cell, c, config.row_cap) for c in config.cells]
            results = []
            for fut in futures:
                results.append(fut.result())
                if progress:
                    progress(results[-1])
    else:
        results = []
        for c in config.cells:
            results.append(run_cell(c, config.row_cap))
            if progress:
                progress(results[-1])
    counts = {k: sum(r["status"] == k for r in results) for k in ("pass", "mismatch", "error", "skipped")}
    return {"results": results, "summary": counts}


def grid_ok(report: dict) -> bool:
    s = report["summary"]
    return s["mismatch"] == 0 and s["error"] == 0


def grid_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    for res in report["results"]:
        if "report" in res:
            w.writerows(res["report"].csv_rows())
    return buf.getvalue()


def grid_json(report: dict, timings: bool = True) -> dict:
    cells = []
    for res in report["results"]:
        c = res["cell"]
        entry = {"q": c.q, "n": c.n, "r": c.r, "space": c.space, "status": res["status"]}
        if c.matrix:
            entry["matrix"] = c.matrix
        if "report" in res:
            entry["report"] = res["report"].to_json(timings)
        else:
            entry["reason"] = res["reason"]
        cells.append(entry)
    return {"cells": cells, "summary": report["summary"]}


def write_grid(report: dict, out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "grid.csv"
    json_path = out / "grid.json"
    csv_path.write_text(grid_csv(report))
    json_path.write_text(json.dumps(grid_json(report), indent=2) + "\n")
    return csv_path, json_path
