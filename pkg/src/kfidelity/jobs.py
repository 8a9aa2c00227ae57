"""Run a parsed :class:`ScanJob` and emit its outputs."""

import os
from dataclasses import dataclass, field
from math import isinf, pi

import numpy as np

from .config import format_config
from .correspondence import counterexample_suite, critical_line
from .errors import GaplessError
from .fidelity import SENTINEL, fidelity_ising_k, fidelity_map
from .grid import Grid2D, GridSpec
from .io import format_number, write_grid_csv, write_pgm, write_rows_csv, write_text
from .models import get_model
from .topology import (
    TRI_MOMENTA, chern_number, gap_map, gapless_on_segment, tri_antipodality, tri_masses, z2_strong, zero_exponent,
)


@dataclass
class JobResult:
    report: str
    artifacts: list = field(default_factory=list)
    ok: bool = True
    data: object = None


def _spec(job, default_bounds):
    return GridSpec(job.grid, job.bounds if job.bounds is not None else default_bounds)


def _fmt_k(k):
    return "(" + ", ".join(format_number(x) for x in np.atleast_1d(k)) + ")"


def _fmt_q(q):
    return ", ".join(f"{p}={format_number(v)}" for p, v in q.items())


def _header(job):
    lines = [f"command: {job.command}"]
    if job.model:
        lines.append(f"model: {job.model}")
    if job.q1:
        lines.append(f"q1: {_fmt_q(job.q1)}")
    if job.q2:
        lines.append(f"q2: {_fmt_q(job.q2)}")
    return lines


def _grid_argmin(grid, mask):
    vals = np.where(mask, grid.values, np.inf)
    idx = np.unravel_index(int(np.argmin(vals)), vals.shape)
    k = tuple(float(c[idx]) for c in grid.momenta())
    return float(grid.values[idx]), k


def _fidelity_map(job):
    model = get_model(job.model)
    spec = _spec(job, model.bz)
    grid = fidelity_map(model, job.q1, job.q2, spec, job.beta, job.workers)
    gapless = grid.values == SENTINEL
    lines = _header(job) + [
        f"beta: {'inf' if isinf(job.beta) else format_number(job.beta)}"
        f" (T = {format_number(job.temperature)})",
        "grid: " + " x ".join(str(n) for n in spec.n) + " over " + str([list(b) for b in spec.bounds]),
    ]
    if np.all(gapless):
        lines.append("minimum fidelity: undefined (every grid point is gapless)")
    else:
        fmin, kmin = _grid_argmin(grid, ~gapless)
        lines.append(f"minimum fidelity: {format_number(fmin)} at k = {_fmt_k(kmin)}")
        lines.append(f"grid points with F <= 1e-9: {int(np.sum(~gapless & (grid.values <= 1e-9)))}")
    lines.append(f"gapless grid points (sentinel -1): {int(gapless.sum())}")
    for k in _first(grid, gapless):
        lines.append(f"    gapless at k = {_fmt_k(k)}")
    for k0 in job.exponent_k:
        try:
            p = zero_exponent(grid, k0)
            lines.append(f"zero exponent at k = {_fmt_k(k0)}: p = {p:.4f}")
        except ValueError as exc:
            lines.append(f"zero exponent at k = {_fmt_k(k0)}: not available ({exc})")
    return grid, lines


def _first(grid, mask, limit=10):
    idx = np.argwhere(mask)[:limit]
    ks = grid.momenta()
    return [tuple(float(c[tuple(i)]) for c in ks) for i in idx]


def _gap_map(job):
    model = get_model(job.model)
    spec = _spec(job, model.bz)
    grid = gap_map(model, job.q1, spec, job.workers)
    gmin, kmin = _grid_argmin(grid, np.ones(grid.values.shape, dtype=bool))
    lines = _header(job) + [
        "grid: " + " x ".join(str(n) for n in spec.n),
        f"minimum gap: {format_number(gmin)} at k = {_fmt_k(kmin)}",
        f"maximum gap: {format_number(grid.values.max())}",
    ]
    return grid, lines


def _normalised(grid):
    top = grid.values.max()
    vals = grid.values / top if top > 0 else np.zeros_like(grid.values)
    return Grid2D(grid.spec, np.minimum(vals, 1.0), dict(grid.meta))


def _ising(job):
    spec = _spec(job, ((0.0, pi),))
    ks = spec.axes()[0]
    h1, h2 = job.q1["h"], job.q2["h"]
    vals = np.empty(ks.size)
    for i, k in enumerate(ks):
        try:
            vals[i] = fidelity_ising_k(k, h1, h2)
        except GaplessError:
            vals[i] = SENTINEL
    grid = Grid2D(spec, vals[None, :], {"kind": "ising"})
    ok = vals != SENTINEL
    lines = _header(job) + [f"k points: {ks.size} on [{format_number(ks[0])}, {format_number(ks[-1])}]"]
    lines.append(f"product fidelity over gapped k: {format_number(np.prod(vals[ok]))}")
    lines.append(f"F at k = 0: {format_number(vals[0]) if ok[0] else 'undefined (gapless)'}")
    lines.append(f"gapless k points (sentinel -1): {int((~ok).sum())}")
    return grid, lines


def _segment(job):
    model = get_model(job.model)
    spec = _spec(job, model.bz)
    rep = gapless_on_segment(model, job.q1, job.q2, spec, job.n_s, job.tol)
    lines = _header(job) + [f"s samples: {job.n_s + 1}, tolerance: {format_number(job.tol)}",
                            f"gapless events: {len(rep.events)}"]
    rows = []
    for e in rep.events:
        q = rep.q_at(e.s)
        lines.append(f"    k = {_fmt_k(e.k)}  s = {e.s:.10f}  gap = {e.gap:.3g}  sector = {e.sector}  [{_fmt_q(q)}]")
        rows.append([format_number(x) for x in e.k] + [format_number(e.s), format_number(e.gap), e.sector]
                    + [format_number(q[p]) for p in model.schema])
    header = (["k"] if model.dim_k == 1 else ["kx", "ky", "kz"][:model.dim_k]) + ["s", "gap", "sector"]
    header += list(model.schema)
    return rep, lines, header, rows


def _z2(job):
    nu = z2_strong(job.model, job.q1)
    masses = tri_masses(job.model, job.q1)
    lines = _header(job) + [f"nu = {nu}"]
    rows = []
    inner = tri_antipodality(job.model, job.q1, job.q2) if job.q2 else None
    for i, k in enumerate(TRI_MOMENTA):
        row = [format_number(x) for x in k] + [format_number(masses[i])]
        text = f"    k = {_fmt_k(k)}  m = {format_number(masses[i])}"
        if inner is not None:
            row.append(format_number(inner[i][1]))
            text += f"  n1.n2 = {format_number(inner[i][1])}"
        rows.append(row)
        lines.append(text)
    header = ["kx", "ky", "kz", "mass"] + (["inner"] if inner is not None else [])
    return nu, lines, header, rows


def _resolve(path, out_dir):
    if out_dir is None or os.path.isabs(path):
        return path
    return os.path.join(out_dir, path)


def run_job(job, out_dir=None):
    """Execute ``job``; write every requested output atomically.

    Returns a :class:`JobResult` whose ``ok`` is False only when a
    verification job (counterexamples) reports a failing check.
    """
    cmd = job.command
    grid = table = data = pgm_grid = None
    ok = True
    if cmd == "fidelity-map":
        grid, lines = _fidelity_map(job)
        pgm_grid = grid
    elif cmd == "gap-map":
        grid, lines = _gap_map(job)
        pgm_grid = _normalised(grid)
    elif cmd == "ising":
        grid, lines = _ising(job)
    elif cmd == "chern":
        data = chern_number(job.model, job.q1, n_grid=job.grid[0])
        lines = _header(job) + [f"cell samples: {job.grid[0]} x {job.grid[0]}", f"C = {data}"]
    elif cmd == "z2":
        data, lines, header, rows = _z2(job)
        table = (header, rows)
    elif cmd == "segment":
        data, lines, header, rows = _segment(job)
        table = (header, rows)
    elif cmd == "critical-line":
        data = critical_line(job.model, job.q1, job.q2, job.k, job.tol)
        lines = _header(job) + [
            f"k: {_fmt_k(data.k)}",
            f"lambda = {format_number(data.lam)}",
            f"direction: {_fmt_q(data.direction)}",
            f"verified gap at direction: {data.verified_gap:.3g}",
        ]
    elif cmd == "counterexamples":
        data = counterexample_suite(job.grid[0])
        ok = data.passed
        lines = _header(job) + ["", data.render().rstrip("\n")]
        table = (["check", "result", "title"], [[c, r, t.replace(",", ";")] for c, r, t in data.rows()])
    else:  # parse_config rejects anything else
        raise ValueError(f"unknown command {cmd!r}")
    report = "\n".join(lines) + "\n\n# effective config\n" + format_config(job)

    artifacts = []
    for kind, path in job.outputs:
        target = _resolve(path, out_dir)
        if kind == "csv":
            if grid is not None:
                write_grid_csv(grid, target)
            else:
                write_rows_csv(target, *table)
        elif kind == "pgm":
            write_pgm(pgm_grid, target)
        else:
            write_text(target, report)
        artifacts.append((kind, target))
    return JobResult(report, artifacts, ok, grid if data is None else data)
