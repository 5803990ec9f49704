"""Plain-text writers for spectra, crossings, curves, grids and comparisons.

Every table is comma-separated with a header row and ``%.12g`` numbers,
except grids which are whitespace-separated ``mu eps value`` triples in
``%.9g`` with a blank line between energy rows.  Line endings are LF.
"""

from __future__ import annotations

import csv
import hashlib
from pathlib import Path

import numpy as np

__all__ = [
    "fmt",
    "write_table",
    "write_levels",
    "write_crossings",
    "write_grid",
    "write_comparison",
    "read_table",
    "read_grid",
    "sha256_file",
]

_SIGN_CHAR = {1: "+", -1: "-", 0: "."}


def fmt(x, spec: str = "%.12g") -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return spec % x


def write_table(path, header, columns) -> Path:
    """Write equal-length ``columns`` under ``header``."""
    path = Path(path)
    cols = [list(c) for c in columns]
    n = len(cols[0]) if cols else 0
    if any(len(c) != n for c in cols):
        raise ValueError("columns differ in length")
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*cols):
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def write_levels(path, n1, n2, energy) -> Path:
    return write_table(path, ("n1", "n2", "energy"),
                       (np.asarray(n1, np.int64), np.asarray(n2, np.int64), np.asarray(energy, float)))


def write_crossings(path, cs) -> Path:
    """Crossing table; the sign column is ``+``, ``-`` or ``.`` (unclassified)."""
    signs = [_SIGN_CHAR[int(s)] for s in cs.sign]
    return write_table(path, ("n1", "n2", "n1p", "n2p", "mu_star", "energy", "V", "v", "sign"),
                       (cs.n1, cs.n2, cs.n1p, cs.n2p, cs.mu_star, cs.energy, cs.V, cs.v, signs))


def write_grid(path, eps_axis, mu_axis, values) -> Path:
    """Matrix-style grid file, one ``mu eps value`` triple per line."""
    path = Path(path)
    values = np.asarray(values)
    with open(path, "w", newline="\n") as fh:
        for i, e in enumerate(eps_axis):
            if i:
                fh.write("\n")
            for j, m in enumerate(mu_axis):
                fh.write(f"{m:.9g} {e:.9g} {values[i, j]:.9g}\n")
    return path


def write_comparison(path, report) -> Path:
    rows = list(report.rows())
    cols = list(zip(*rows)) if rows else [[]] * 6
    return write_table(path, ("bin_left", "bin_right", "count", "density", "prediction", "residual"), cols)


def read_table(path) -> dict:
    """Read a table written by :func:`write_table` into column lists."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    out = {}
    for k, col in zip(header, zip(*body) if body else [()] * len(header)):
        vals = list(col)
        try:
            out[k] = np.array([float(v) for v in vals])
        except ValueError:
            out[k] = vals
    return out


def read_grid(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    blocks, cur = [], []
    for line in Path(path).read_text().split("\n"):
        if line.strip():
            cur.append([float(t) for t in line.split()])
        elif cur:
            blocks.append(cur)
            cur = []
    if cur:
        blocks.append(cur)
    arr = np.array(blocks)
    return arr[:, 0, 1], arr[0, :, 0], arr[:, :, 2]


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
