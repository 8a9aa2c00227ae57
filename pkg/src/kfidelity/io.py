"""Byte-stable CSV and PGM emission.

Files are written to a temporary sibling and moved into place with
``os.replace``, so a reader never sees a partial file.
"""

import os
import tempfile

import numpy as np

from .fidelity import SENTINEL


def _atomic_write(path, text):
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_number(x):
    """Nine significant digits; negative zero is written as ``0``."""
    x = float(x)
    if x == 0:
        x = 0.0
    if not np.isfinite(x):
        raise ValueError(f"cannot write non-finite value {x}")
    return f"{x:.9g}"


def grid_csv_text(grid):
    ks = [np.broadcast_to(k, grid.values.shape).ravel() for k in grid.momenta()]
    vals = grid.values.ravel()
    header = "k,value" if grid.spec.dim == 1 else "kx,ky,value"
    lines = [header]
    for i in range(vals.size):
        lines.append(",".join(format_number(c[i]) for c in ks) + "," + format_number(vals[i]))
    return "\n".join(lines) + "\n"


def write_grid_csv(grid, path):
    """Write ``kx,ky,value`` rows in row-major order, k_x fastest."""
    _atomic_write(path, grid_csv_text(grid))


def pgm_levels(values):
    """Grey levels ``floor(255 v + 1/2)``; the sentinel maps to 0."""
    v = np.asarray(values, dtype=float)
    sentinel = v == SENTINEL
    bad = ~sentinel & ~((v >= 0) & (v <= 1))
    if np.any(bad):
        raise ValueError(f"PGM values must lie in [0, 1] or equal {SENTINEL:g}; got {v[bad][0]!r}")
    levels = np.floor(255 * np.where(sentinel, 0.0, v) + 0.5).astype(int)
    return levels


def pgm_text(grid):
    levels = pgm_levels(grid.values)[::-1]  # image rows run from top (largest k_y) down
    rows = "\n".join(" ".join(str(x) for x in row) for row in levels)
    return f"P2\n{levels.shape[1]} {levels.shape[0]}\n255\n{rows}\n"


def write_pgm(grid, path):
    """ASCII greyscale image of a grid with values in [0, 1]."""
    _atomic_write(path, pgm_text(grid))


def write_text(path, text):
    _atomic_write(path, text)


def write_rows_csv(path, header, rows):
    lines = [",".join(header)] + [",".join(str(c) for c in row) for row in rows]
    _atomic_write(path, "\n".join(lines) + "\n")
