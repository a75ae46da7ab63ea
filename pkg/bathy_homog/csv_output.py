"""Plot-ready CSV and key/value text emission."""

from __future__ import annotations

import io
from pathlib import Path
from typing import Final, Iterable, Sequence

import numpy as np

FLOAT_FORMAT: Final[str] = "%.17g"
SNAPSHOT_COLUMNS: Final[tuple[str, ...]] = ("t", "x", "eta_bar", "q_bar")


def table_text(header: Sequence[str], rows: np.ndarray) -> str:
    """Comma-separated table with a header row and 17 significant digits."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.size and rows.shape[1] != len(header):
        raise ValueError(f"Header has {len(header)} columns but rows have {rows.shape[1]}.")
    buffer = io.StringIO()
    np.savetxt(buffer, rows, fmt=FLOAT_FORMAT, delimiter=",", header=",".join(header), comments="")
    return buffer.getvalue()


def write_table(path: Path | str, header: Sequence[str], rows: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(table_text(header, rows), encoding="utf-8")
    return path


def snapshot_columns(
    t: float,
    x: np.ndarray,
    eta_bar: np.ndarray,
    q_bar: np.ndarray,
    eta_reconstructed: np.ndarray | None = None,
    eta_reference: np.ndarray | None = None,
) -> tuple[list[str], np.ndarray]:
    """One snapshot in the shared schema; optional columns appear only when given."""
    header = list(SNAPSHOT_COLUMNS)
    columns = [np.full(x.size, float(t)), x, eta_bar, q_bar]
    if eta_reconstructed is not None:
        header.append("eta_reconstructed")
        columns.append(eta_reconstructed)
    if eta_reference is not None:
        header.append("eta_reference")
        columns.append(eta_reference)
    return header, np.column_stack(columns)


def stack_snapshots(tables: Iterable[tuple[list[str], np.ndarray]]) -> tuple[list[str], np.ndarray]:
    """Concatenate snapshot tables that share one header."""
    tables = list(tables)
    if not tables:
        raise ValueError("No snapshots to stack.")
    header = tables[0][0]
    if any(h != header for h, _ in tables):
        raise ValueError("Snapshots disagree on their columns.")
    return header, np.vstack([rows for _, rows in tables])


def key_value_text(rows: Iterable[tuple[str, float]]) -> str:
    return "".join(f"{name} = {FLOAT_FORMAT % value}\n" for name, value in rows)


def key_value_table(rows: Iterable[tuple[str, float]]) -> str:
    return "key,value\n" + "".join(f"{name},{FLOAT_FORMAT % value}\n" for name, value in rows)
