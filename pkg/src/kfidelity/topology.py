"""Gap maps, gapless points along parameter segments, zero exponents and invariants."""

from dataclasses import dataclass, field
from math import pi

import numpy as np

from .errors import GaplessError, ModelError
from .fidelity import GAPLESS_EPS, PAULI, SENTINEL
from .grid import Grid2D, evaluate_rows
from .models import get_model, sector_models

TRI_MOMENTA = (
    (0.0, 0.0, 0.0), (pi, 0.0, 0.0), (0.0, pi, 0.0), (0.0, 0.0, pi),
    (pi, pi, 0.0), (0.0, pi, pi), (pi, 0.0, pi), (pi, pi, pi),
)

# Orientation of the lattice field strength chosen so that ti_toy1 gives
# C = 2 for t2 > t1p - delta/4 and C = 1 below.
CHERN_SIGN = 1

_GOLDEN = (np.sqrt(5.0) - 1) / 2
_REFINE_ITERS = 64


def gap_map(model, q, spec, workers=1):
    """Direct gap ``2|h|`` on a grid; composite models take the smallest sector gap."""
    model = get_model(model)
    sectors = sector_models(model)
    for s in sectors:
        s.check_params(q)

    def fn(*k):
        return np.min([2 * np.linalg.norm(s.field(q, k)[1], axis=0) for s in sectors], axis=0)

    values = evaluate_rows(spec, fn, workers)
    return Grid2D(spec, values, {"kind": "gap", "model": model.id, "q1": dict(q), "bounds": spec.bounds})


# --- straight parameter segments --------------------------------------------


def interpolate(q1, q2, s):
    """Parameter point ``(1 - s) q1 + s q2`` (``s`` may be an array)."""
    return {p: (1 - s) * q1[p] + s * q2[p] for p in q1}


@dataclass(frozen=True)
class GaplessEvent:
    k: tuple
    s: float
    gap: float
    sector: str


@dataclass
class SegmentReport:
    model: str
    q1: dict
    q2: dict
    events: list
    tolerance: float
    n_s: int = 0
    meta: dict = field(default_factory=dict)

    def q_at(self, s):
        return interpolate(self.q1, self.q2, s)

    def momenta(self):
        return sorted({e.k for e in self.events})


def grid_points(spec):
    axes = spec.axes()
    if spec.dim == 1:
        return (axes[0],)
    kx, ky = np.meshgrid(axes[0], axes[1])
    return kx.ravel(), ky.ravel()


def _norm2(model, q1, q2, s, k):
    h = model.field(interpolate(q1, q2, s), k)[1]
    return np.sum(h * h, axis=0)


def _golden_min(f, lo, hi):
    """Vectorised golden-section search for the minimum of ``f`` on ``[lo, hi]``."""
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(_REFINE_ITERS):
        left = fc < fd
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
        new = np.where(left, hi - _GOLDEN * (hi - lo), lo + _GOLDEN * (hi - lo))
        fn = f(new)
        c, d, fc, fd = (
            np.where(left, new, d), np.where(left, c, new),
            np.where(left, fn, fd), np.where(left, fc, fn),
        )
    return np.where(fc < fd, c, d)


def gapless_on_segment(model, q1, q2, spec, n_s=200, tol=1e-8, block=2048):
    """Band touchings along the straight segment from ``q1`` to ``q2``.

    For every grid momentum the gap is sampled at ``n_s + 1`` equally spaced
    ``s``; each discrete local minimum is refined by golden-section search on
    its bracketing interval and kept if the refined gap is ``<= tol``.
    """
    model = get_model(model)
    if n_s < 2:
        raise ValueError("n_s must be at least 2")
    sectors = sector_models(model)
    for s in sectors:
        s.check_params(q1)
        s.check_params(q2)
    if set(q1) != set(q2):
        raise ModelError("q1 and q2 must share a schema")
    s_grid = np.linspace(0.0, 1.0, n_s + 1)
    pts = grid_points(spec)
    npts = pts[0].size
    events = {}
    for sec in sectors:
        for b0 in range(0, npts, block):
            k = tuple(c[b0:b0 + block] for c in pts)
            g = _norm2(sec, q1, q2, s_grid[:, None], tuple(c[None, :] for c in k))
            left = np.vstack([np.full((1, g.shape[1]), np.inf), g[:-1]])
            right = np.vstack([g[1:], np.full((1, g.shape[1]), -np.inf)])
            right[-1] = np.inf
            is_min = (g <= left) & (g < right)
            is_min[-1] = g[-1] <= g[-2]
            i_s, i_k = np.nonzero(is_min)
            if i_s.size == 0:
                continue
            lo = s_grid[np.maximum(i_s - 1, 0)]
            hi = s_grid[np.minimum(i_s + 1, n_s)]
            kc = tuple(c[i_k] for c in k)

            def f(s, kc=kc, sec=sec):
                return _norm2(sec, q1, q2, s, kc)

            s_best = _golden_min(f, lo, hi)
            g_best = f(s_best)
            # keep the sample itself if the search did not improve on it
            g_sample = g[i_s, i_k]
            use_sample = g_sample < g_best
            s_best = np.where(use_sample, s_grid[i_s], s_best)
            gap = 2 * np.sqrt(np.where(use_sample, g_sample, g_best))
            for j in np.nonzero(gap <= tol)[0]:
                kk = tuple(float(c[j]) for c in kc)
                _add_event(events, GaplessEvent(kk, float(s_best[j]), float(gap[j]), sec.id))
    ordered = sorted((e for evs in events.values() for e in evs), key=lambda e: (e.k, e.s, e.sector))
    return SegmentReport(model.id, dict(q1), dict(q2), ordered, tol, n_s)


def _add_event(events, ev, merge=1e-6):
    bucket = events.setdefault((ev.k, ev.sector), [])
    for i, other in enumerate(bucket):
        if abs(other.s - ev.s) < merge:
            if ev.gap < other.gap:
                bucket[i] = ev
            return
    bucket.append(ev)


# --- fidelity zeros ----------------------------------------------------------


def zero_exponent(grid, k0, radius=None, max_fidelity=0.5):
    """Power ``p`` in ``F ~ |k - k0|^p`` from a least-squares fit of log F on log r.

    The fit uses grid points with ``step <= r <= radius`` (``radius`` defaults
    to 8 grid steps) and ``0 < F <= max_fidelity``.
    """
    step = min(grid.spec.step())
    if radius is None:
        radius = 8 * step
    if radius < 4 * step * (1 - 1e-9):
        raise ValueError("radius must span at least 4 grid steps")
    idx = grid.nearest_index(k0)
    if not 0 <= grid.values[idx] <= 1e-6:
        raise ValueError(f"no fidelity zero at {tuple(np.atleast_1d(k0))}: F = {grid.values[idx]:.3g}")
    ks = grid.momenta()
    r = np.sqrt(sum((kc - kc[idx]) ** 2 for kc in ks))
    f = grid.values
    sel = (r >= step * (1 - 1e-9)) & (r <= radius * (1 + 1e-9)) & (f > 0) & (f <= max_fidelity)
    if np.count_nonzero(sel) < 5:
        raise ValueError("too few grid points in the fitting annulus")
    p, _ = np.polyfit(np.log(r[sel]), np.log(f[sel]), 1)
    return float(p)


# --- invariants --------------------------------------------------------------


def _cell_momenta(model, n):
    g1, g2 = (np.asarray(v, dtype=float) for v in model.reciprocal)
    i, j = np.meshgrid(np.arange(n) / n, np.arange(n) / n, indexing="ij")
    return i * g1[0] + j * g2[0], i * g1[1] + j * g2[1]


def chern_number(model, q, n_grid=60):
    """Chern number of the lower band by lattice field-strength summation.

    Link variables between neighbouring momenta of an ``n_grid x n_grid``
    sampling of one reciprocal cell are built from lower-band eigenvectors;
    the plaquette phases sum to 2 pi C exactly, independent of gauge.
    """
    model = get_model(model)
    if model.composite or model.dim_h != 3 or model.dim_k != 2:
        raise ModelError(f"Chern number needs a 2d two-band model, got {model.id!r}")
    kx, ky = _cell_momenta(model, n_grid)
    h = model.field(q, (kx, ky))[1]
    if np.min(2 * np.linalg.norm(h, axis=0)) <= 1e-9:
        raise GaplessError(f"{model.id} is gapless at {q}; Chern number undefined")
    ham = np.einsum("iab,ixy->xyab", PAULI, h)
    u = np.linalg.eigh(ham)[1][..., :, 0]

    def link(axis):
        return np.sum(u.conj() * np.roll(u, -1, axis=axis), axis=-1)

    u1, u2 = link(0), link(1)
    flux = np.angle(u1 * np.roll(u2, -1, axis=0) * np.conj(np.roll(u1, -1, axis=1)) * np.conj(u2))
    c = CHERN_SIGN * flux.sum() / (2 * pi)
    return int(round(c))


def _dirac_model(model):
    model = get_model(model)
    if model.id != "dirac3d_ti":
        raise ModelError(f"strong Z2 index is implemented for dirac3d_ti, not {model.id!r}")
    return model


def tri_masses(model, q):
    """Mass ``m(k)`` at the eight time-reversal invariant momenta."""
    model = _dirac_model(model)
    k = tuple(np.array([p[i] for p in TRI_MOMENTA]) for i in range(3))
    m = model.field(q, k)[1][3]
    if np.any(np.abs(m) <= GAPLESS_EPS):
        bad = [TRI_MOMENTA[i] for i in np.nonzero(np.abs(m) <= GAPLESS_EPS)[0]]
        raise GaplessError(f"mass vanishes at TRI momenta {bad}: critical point")
    return m


def z2_strong(model, q):
    """Product of mass signs over the TRI momenta, +1 or -1."""
    return int(np.prod(np.sign(tri_masses(model, q))))


def tri_antipodality(model, q1, q2):
    """Normalised inner product of the two h-vectors at each TRI momentum."""
    model = _dirac_model(model)
    tri_masses(model, q1)
    tri_masses(model, q2)
    out = []
    for k in TRI_MOMENTA:
        h1 = model.field(q1, k)[1]
        h2 = model.field(q2, k)[1]
        inner = float(h1 @ h2 / (np.linalg.norm(h1) * np.linalg.norm(h2)))
        out.append((k, inner))
    return out


__all__ = [
    "TRI_MOMENTA", "GaplessEvent", "SegmentReport", "chern_number", "gap_map", "gapless_on_segment",
    "interpolate", "tri_antipodality", "tri_masses", "z2_strong", "zero_exponent", "SENTINEL",
]
