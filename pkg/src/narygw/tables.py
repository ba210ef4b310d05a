"""Reproduction of the three published pmf tables (all with offspring mean ~13)."""
from __future__ import annotations

import io
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

from .dist import PmfTable, pmf_closed_form
from .offspring import Geometric, OffspringLaw, OneOrMany, Poisson


@dataclass(frozen=True)
class TableLayout:
    number: int
    law: OffspringLaw
    Ns: tuple[int, ...]
    j_cols: int  # columns j = 0..j_cols-1
    tail_col: bool  # whether a ">=j_cols" column is printed
    caption: str


LAYOUTS = {
    1: TableLayout(1, Geometric(13 / 14), (1, 2, 3, 4, 5), 10, True,
                   "geometric offspring, m = 13"),
    2: TableLayout(2, Poisson(13.0), (2, 3, 4, 5), 10, True,
                   "Poisson offspring, m = 13"),
    3: TableLayout(3, OneOrMany(0.93, 14), (2, 3, 4, 5), 8, False,
                   "1-or-14 offspring, p = 0.93 (m = 13.09)"),
}


def round2(x: float) -> Decimal:
    """Round half away from zero to two decimals."""
    return Decimal(repr(float(x))).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)


def table_rows(which: int) -> list[dict]:
    """Unrounded and rounded cells for each row of table ``which``."""
    layout = LAYOUTS[which]
    rows = []
    for N in layout.Ns:
        pmf: PmfTable = pmf_closed_form(layout.law, N)
        probs = [pmf.prob(j) for j in range(layout.j_cols)]
        rounded = [round2(p) for p in probs]
        row = {"N": N, "probs": probs, "rounded": rounded, "mean": pmf.mean,
               "mean_rounded": round2(pmf.mean), "pmf": pmf}
        if layout.tail_col:
            row["tail"] = 1.0 - sum(probs)
            row["tail_rounded"] = round2(Decimal(1) - sum(rounded))
        rows.append(row)
    return rows


def header(which: int) -> list[str]:
    layout = LAYOUTS[which]
    cols = ["N"] + [str(j) for j in range(layout.j_cols)]
    if layout.tail_col:
        cols.append(f">={layout.j_cols}")
    return cols + ["E"]


def table_csv(which: int) -> str:
    """CSV text of table ``which`` with every cell rounded to two decimals."""
    if which not in LAYOUTS:
        raise ValueError(f"unknown table {which!r}; choose 1, 2 or 3")
    buf = io.StringIO()
    buf.write(",".join(header(which)) + "\n")
    for row in table_rows(which):
        cells = [str(row["N"])] + [f"{r:.2f}" for r in row["rounded"]]
        if "tail_rounded" in row:
            cells.append(f"{row['tail_rounded']:.2f}")
        cells.append(f"{row['mean_rounded']:.2f}")
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()
