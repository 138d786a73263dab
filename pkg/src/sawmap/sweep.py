"""Parameter-plane sweep engine and figure palettes.

A sweep samples the rectangle of (sigma, lambda) cells at cell centers
(so the region boundary is never hit exactly), classifies the reduced
saw map of every cell, and renders two figure families:

  kstar  : grayscale map of the absorbing index k_star
           (1 white, 2 light gray, 3 gray, 4 dark gray, >=5 black);
  j1type : color map of the first tooth's type, split into panel (a)
           for cells with k_star >= 2 and panel (b) for k_star = 1
           (light gray type I, yellow type II with a one-band
           attractor, red type II with split bands, black type III,
           white for the other panel's cells, blue for cells flagged
           as numerically boundary-degenerate).

Cells are independent; a worker pool only changes wall time, never the
output bytes.  Classification failures become per-cell flags, never a
sweep abort.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .classify import classify_interval, domain_D_membership, renorm_index
from .core import SawMap
from .errors import SawMapError
from .system2d import ClosedFormSequences, TwoDParams

CSV_COLUMNS = ("sigma", "lambda", "k_star", "type_J1", "N_J1", "in_domain_D", "flags")

#: flags that mark a cell as boundary-degenerate (rendered blue,
#: excluded from acceptance comparisons)
BOUNDARY_FLAGS = ("beta_eq_1", "sum_eq_1", "kss_equality", "p_eq_r", "kstar_boundary")

PGM_KSTAR = {1: 255, 2: 192, 3: 128, 4: 64}
PGM_KSTAR_DEEP = 0
PGM_FLAGGED = 16

RGB_TYPE_I = (192, 192, 192)
RGB_TYPE_II_ONE = (255, 215, 0)
RGB_TYPE_II_TWO = (220, 20, 60)
RGB_TYPE_III = (0, 0, 0)
RGB_WHITE = (255, 255, 255)
RGB_FLAGGED = (30, 144, 255)


class GridSpec(NamedTuple):
    lo: float
    hi: float
    n: int


def parse_range(text) -> GridSpec:
    """Parse a lo:hi:n axis specification."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ValueError(f"range must be lo:hi:n, got {text!r}")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if not (hi > lo and n >= 1):
        raise ValueError(f"bad range {text!r}")
    return GridSpec(lo, hi, n)


def cell_centers(spec: GridSpec):
    w = (spec.hi - spec.lo) / spec.n
    return [spec.lo + (i + 0.5) * w for i in range(spec.n)]


@dataclass
class CellRecord:
    sigma: float
    lam: float
    k_star: int | None = None
    type_j1: str = ""
    n_j1: int | None = None
    in_domain_d: bool | None = None
    flags: tuple = ()
    beta1_margin: float | None = None
    sum1_margin: float | None = None
    domain_margin: float | None = None
    deep_ok: bool | None = None

    @property
    def flagged(self):
        return any(f.split(":")[0] in BOUNDARY_FLAGS or f.startswith(("invalid", "error"))
                   for f in self.flags)


def classify_cell(sigma, lam, *, deep_types=True, eps=1e-12) -> CellRecord:
    """Full classification of one parameter cell.

    Any failure is converted into flags on the record so a sweep never
    aborts; boundary coincidences within ``eps`` are flagged and the
    cell is excluded from agreement checks downstream.
    """
    flags = []
    rec = CellRecord(sigma=sigma, lam=lam)
    try:
        params = TwoDParams(sigma, lam)
        dd = domain_D_membership(sigma, lam)
        rec.in_domain_d = dd.inside
        rec.domain_margin = dd.margin
        seqs = ClosedFormSequences(params, tol=eps)
        if seqs.k_shift_equality:
            flags.append("kss_equality")
        saw = SawMap(seqs, tol=eps, validate_depth=6)
        for f in saw.report.flags:
            name = f.split(":")[0]
            if name in BOUNDARY_FLAGS and f not in flags:
                flags.append(f)
        rec.k_star = saw.k_star
        a1, b1 = saw.alpha(1), saw.beta(1)
        rec.beta1_margin = abs(b1 - 1.0)
        rec.sum1_margin = abs(1.0 / a1 + 1.0 / b1 - 1.0)
        t = classify_interval(a1, b1, eps)
        rec.type_j1 = t.tag
        if t.boundary != "none":
            flags.append(t.boundary)
        elif t.tag == "II":
            rec.n_j1 = renorm_index(a1, b1).N
        if deep_types and rec.k_star >= 2:
            rec.deep_ok = True
            for k in range(2, rec.k_star + 1):
                tk = classify_interval(saw.alpha(k), saw.beta(k), eps)
                if tk.tag != "III":
                    rec.deep_ok = False
                    flags.append(f"deep_type_violation:{k}")
                    break
    except SawMapError as exc:
        kind = "invalid" if exc.__class__.__name__ == "InvalidMapError" else "error"
        flags.append(f"{kind}:{exc.__class__.__name__}")
    rec.flags = tuple(flags)
    return rec


def _row_worker(args):
    sigmas, lam, deep_types = args
    return [classify_cell(s, lam, deep_types=deep_types) for s in sigmas]


@dataclass
class SweepResult:
    sigma_spec: GridSpec
    lambda_spec: GridSpec
    sigmas: list
    lams: list  # descending: row 0 is the lambda closest to 0
    rows: list  # rows[i][j] = cell at (sigmas[j], lams[i])

    def cells(self):
        for row in self.rows:
            yield from row


def run_sweep(sigma_spec: GridSpec, lambda_spec: GridSpec, *, threads=1,
              deep_types=True) -> SweepResult:
    """Classify every cell of the rectangle; row-major, top row at the
    lambda closest to 0.  ``threads`` selects worker processes and has
    no effect on the result bytes."""
    sigmas = cell_centers(sigma_spec)
    lams = sorted(cell_centers(lambda_spec), reverse=True)
    jobs = [(sigmas, lam, deep_types) for lam in lams]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_row_worker, jobs, chunksize=4))
    else:
        rows = [_row_worker(j) for j in jobs]
    return SweepResult(sigma_spec, lambda_spec, sigmas, lams, rows)


# -- CSV ---------------------------------------------------------------------


def write_csv(result: SweepResult, path):
    """One row per cell in image order; floats via repr (round-trip exact)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for cell in result.cells():
            w.writerow(
                [
                    repr(cell.sigma),
                    repr(cell.lam),
                    "" if cell.k_star is None else cell.k_star,
                    cell.type_j1,
                    "" if cell.n_j1 is None else cell.n_j1,
                    "" if cell.in_domain_d is None else int(cell.in_domain_d),
                    "|".join(cell.flags),
                ]
            )


def read_csv_cells(path):
    """Parse a sweep CSV back into minimal records (palette fields only)."""
    cells = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            cells.append(
                CellRecord(
                    sigma=float(row["sigma"]),
                    lam=float(row["lambda"]),
                    k_star=int(row["k_star"]) if row["k_star"] else None,
                    type_j1=row["type_J1"],
                    n_j1=int(row["N_J1"]) if row["N_J1"] else None,
                    in_domain_d=bool(int(row["in_domain_D"])) if row["in_domain_D"] else None,
                    flags=tuple(f for f in row["flags"].split("|") if f),
                )
            )
    return cells


# -- palettes ------------------------------------------------------------------


def palette_kstar(cell: CellRecord):
    if cell.k_star is None:
        return PGM_FLAGGED
    return PGM_KSTAR.get(cell.k_star, PGM_KSTAR_DEEP)


def palette_j1type(cell: CellRecord, panel):
    on_panel = (cell.k_star is not None) and (
        cell.k_star >= 2 if panel == "a" else cell.k_star == 1
    )
    if cell.k_star is None:
        return RGB_FLAGGED
    if not on_panel:
        return RGB_WHITE
    if cell.flagged:
        return RGB_FLAGGED
    if cell.type_j1 == "I":
        return RGB_TYPE_I
    if cell.type_j1 == "II":
        return RGB_TYPE_II_ONE if cell.n_j1 == 0 else RGB_TYPE_II_TWO
    if cell.type_j1 == "III":
        return RGB_TYPE_III
    return RGB_FLAGGED


def render_kstar(cells, shape):
    h, w = shape
    img = np.empty((h, w), dtype=np.uint8)
    it = iter(cells)
    for i in range(h):
        for j in range(w):
            img[i, j] = palette_kstar(next(it))
    return img


def render_j1type(cells, shape, panel):
    h, w = shape
    img = np.empty((h, w, 3), dtype=np.uint8)
    it = iter(cells)
    for i in range(h):
        for j in range(w):
            img[i, j] = palette_j1type(next(it), panel)
    return img
