"""Delimited-text readers and writers."""

from __future__ import annotations

import csv
import re
import warnings
from pathlib import Path

import numpy as np

from .copulas import Sample
from .dependence import DependenceSurface, Grid
from .empirical import PseudoSample, SummaryStats
from .exceptions import ParseError
from .inference import NullTable, TestReport

__all__ = [
    "parse_csv",
    "write_surface_csv",
    "read_surface_csv",
    "write_pseudo_csv",
    "write_summary_csv",
    "write_null_table",
    "read_null_table",
    "write_reports_csv",
    "write_rows_csv",
    "fmt7",
]

MISSING = {"", "na", "nan", "?", "null", "none", "."}
REPORT_FIELDS = ["test", "statistic", "observed", "p_value", "B", "seed", "n", "grid"]


def fmt7(x: float) -> str:
    """Seven significant digits."""
    return f"{float(x):.7g}"


def _split(line: str) -> list[str]:
    if "," in line:
        return [c.strip() for c in next(csv.reader([line]))]
    if ";" in line:
        return [c.strip() for c in line.split(";")]
    return line.split()


def parse_csv(path, columns=(0, 1), drop_missing: bool = False) -> Sample:
    """Read two numeric columns from a delimited file.

    Comma, semicolon and whitespace delimiters are accepted.  A first line
    that is not numeric is taken as a header.  Rows with a missing cell
    raise :class:`ParseError` unless ``drop_missing`` is set, in which case
    they are skipped and listed in a warning.
    """
    path = Path(path)
    ci, cj = columns
    xs, ys, dropped = [], [], []
    seen_data = False
    with path.open() as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            cells = _split(line)
            if len(cells) < 2 or max(ci, cj) >= len(cells):
                raise ParseError(f"{path}:{lineno}: expected at least {max(ci, cj) + 1} columns, got {len(cells)}")
            pair = cells[ci], cells[cj]
            if any(c.lower() in MISSING for c in pair):
                if drop_missing:
                    dropped.append(lineno)
                    continue
                raise ParseError(f"{path}:{lineno}: missing value in row {lineno}")
            try:
                x, y = float(pair[0]), float(pair[1])
            except ValueError:
                if not seen_data and not xs:
                    seen_data = True  # header line
                    continue
                raise ParseError(f"{path}:{lineno}: non-numeric cell in {pair!r}") from None
            if not (np.isfinite(x) and np.isfinite(y)):
                raise ParseError(f"{path}:{lineno}: non-finite value")
            seen_data = True
            xs.append(x)
            ys.append(y)
    if dropped:
        warnings.warn(f"{path}: dropped {len(dropped)} row(s) with missing values: lines {dropped}", stacklevel=2)
    if len(xs) < 2:
        raise ParseError(f"{path}: need at least 2 data rows, got {len(xs)}")
    return Sample(np.array(xs), np.array(ys))


def write_surface_csv(surface: DependenceSurface, path) -> Path:
    """Write ``u,v,value,kind`` rows, ``u`` varying slowest."""
    path = Path(path)
    t = surface.grid.ticks
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["u", "v", "value", "kind"])
        for i, u in enumerate(t):
            for j, v in enumerate(t):
                w.writerow([fmt7(u), fmt7(v), fmt7(surface.values[i, j]), surface.kind])
    return path


def read_surface_csv(path) -> DependenceSurface:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ParseError(f"{path}: empty surface file")
    k = int(round(np.sqrt(len(rows))))
    if k * k != len(rows):
        raise ParseError(f"{path}: {len(rows)} rows do not form a square grid")
    kinds = {r["kind"] for r in rows}
    if len(kinds) != 1:
        raise ParseError(f"{path}: mixed surface kinds {sorted(kinds)}")
    values = np.array([float(r["value"]) for r in rows]).reshape(k, k)
    return DependenceSurface(Grid(k + 1), values, kinds.pop(), {"source": str(path)})


def write_pseudo_csv(ps: PseudoSample, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "r", "s", "u", "v"])
        for i in range(ps.n):
            w.writerow([i + 1, f"{ps.r[i]:g}", f"{ps.s[i]:g}", fmt7(ps.u[i]), fmt7(ps.v[i])])
    return path


def write_summary_csv(stats: SummaryStats, path, n: int, kind: str = "L_n") -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kind", "n", "l_star", "l_upper", "l_o"])
        w.writerow([kind, n, fmt7(stats.l_star), fmt7(stats.l_upper), fmt7(stats.l_o)])
    return path


_META = re.compile(r"(\w+)=([^,]+)")


def write_null_table(table: NullTable, path) -> Path:
    """Metadata comment line followed by the sorted replicates at full precision."""
    path = Path(path)
    with path.open("w") as fh:
        fh.write(
            f"# n={table.n}, B={table.B}, seed={table.master_seed}, "
            f"statistic={table.statistic}, target={table.target_label()}\n"
        )
        fh.write("value\n")
        for x in table.values:
            fh.write(f"{float(x)!r}\n")
    return path


def read_null_table(path) -> NullTable:
    path = Path(path)
    with path.open() as fh:
        head = fh.readline()
        if not head.startswith("#"):
            raise ParseError(f"{path}: missing metadata line")
        meta = {k: v.strip() for k, v in _META.findall(head)}
        try:
            n, B, seed = int(meta["n"]), int(meta["B"]), int(meta["seed"])
            statistic, target = meta["statistic"], meta["target"]
        except KeyError as exc:
            raise ParseError(f"{path}: metadata lacks {exc}") from None
        if fh.readline().strip() != "value":
            raise ParseError(f"{path}: expected a 'value' column header")
        try:
            values = [float(line) for line in fh if line.strip()]
        except ValueError as exc:
            raise ParseError(f"{path}: {exc}") from None
    if target.startswith("grid"):
        tgt = Grid(int(target[4:]))
    else:
        tgt = tuple(float(t) for t in target.split(";"))
    return NullTable(n, statistic, tgt, B, seed, np.array(values))


def write_reports_csv(reports: list[TestReport], path) -> Path:
    return write_rows_csv([r.as_row() for r in reports], path, REPORT_FIELDS)


def write_rows_csv(rows: list[dict], path, fields=None) -> Path:
    path = Path(path)
    fields = fields or (list(rows[0]) if rows else [])
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return path
