"""Output formats: time-series CSV, spectrum snapshots and run directories."""

from __future__ import annotations

import csv
import os
from pathlib import Path
from typing import Iterable

import numpy as np

from .evolution import TIMESERIES_COLUMNS, SolverState
from .spectral import Spectrum

OUTPUT_ROOT_ENV = "CVSHEET_OUTPUT_ROOT"
ENERGY_REPORT_COLUMNS = ("t", "energy", "y", "margin", "riccati_lhs", "riccati_rhs", "bound_ok")


class OutputError(OSError):
    """An output file could not be written or read; the message names the path."""


def resolve_out_dir(out: str | os.PathLike | None, name: str = "run") -> Path:
    """``out`` as given, else ``$CVSHEET_OUTPUT_ROOT/name``, else ``./name``."""
    if out is not None:
        return Path(out)
    return Path(os.environ.get(OUTPUT_ROOT_ENV, ".")) / name


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    # repr of a float is the shortest string that round-trips
    return repr(float(v))


def write_csv(path: Path, columns: Iterable[str], rows: Iterable) -> int:
    """Write ``rows`` (dicts keyed by column, or sequences) and return the row count."""
    columns = tuple(columns)
    count = 0
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for row in rows:
                vals = [row[c] for c in columns] if isinstance(row, dict) else list(row)
                w.writerow([_fmt(v) for v in vals])
                count += 1
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return count


def emit_timeseries(path: Path, rows: Iterable[dict]) -> int:
    """``timeseries.csv`` with the columns of :data:`TIMESERIES_COLUMNS`."""
    return write_csv(Path(path), TIMESERIES_COLUMNS, rows)


def read_csv(path: Path) -> dict[str, np.ndarray]:
    """Columns of a numeric CSV as float arrays (empty arrays for header-only files)."""
    try:
        with open(path, newline="") as fh:
            r = csv.reader(fh)
            header = next(r)
            data = [[float(x) for x in row] for row in r if row]
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    arr = np.array(data, dtype=float).reshape(len(data), len(header))
    return {name: arr[:, j] for j, name in enumerate(header)}


def emit_snapshot(directory: Path, step: int, state: SolverState) -> tuple[Path, Path]:
    """Write ``phi_<step>.txt`` and ``phit_<step>.txt`` in the spectrum text format."""
    directory = Path(directory)
    paths = (directory / f"phi_{step:06d}.txt", directory / f"phit_{step:06d}.txt")
    try:
        directory.mkdir(parents=True, exist_ok=True)
        paths[0].write_text(state.phi.spectrum.to_text())
        paths[1].write_text(state.phi_t.spectrum.to_text())
    except OSError as exc:
        raise OutputError(f"cannot write snapshot in {directory}: {exc.strerror or exc}") from exc
    return paths


def load_snapshot(path: Path) -> Spectrum:
    try:
        return Spectrum.from_text(Path(path).read_text())
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc.strerror or exc}") from exc
