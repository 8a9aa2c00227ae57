"""Momentum grids and deterministic block-parallel evaluation."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .models import get_model

# Rows per work unit.  Fixed so that the floating-point work done for any grid
# point does not depend on how many workers share the grid.
BLOCK_ROWS = 8


@dataclass(frozen=True)
class GridSpec:
    """Closed tensor grid: ``n[i]`` points from ``bounds[i][0]`` to ``bounds[i][1]`` inclusive.

    Both ends are sampled so that odd ``n`` over a symmetric zone hits k = 0 and
    the zone boundary exactly.
    """

    n: tuple
    bounds: tuple

    def __post_init__(self):
        n = tuple(int(x) for x in self.n)
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if len(n) != len(bounds) or not 1 <= len(n) <= 2:
            raise ValueError("grid must be 1d or 2d with one (lo, hi) pair per axis")
        if any(x < 2 for x in n):
            raise ValueError("each grid axis needs at least 2 points")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "bounds", bounds)

    @property
    def dim(self):
        return len(self.n)

    def axes(self):
        return [lo + (hi - lo) * np.arange(m) / (m - 1) for m, (lo, hi) in zip(self.n, self.bounds)]

    def step(self):
        return tuple((hi - lo) / (m - 1) for m, (lo, hi) in zip(self.n, self.bounds))


def default_grid(model, n=201, n_y=None):
    """Grid over the model's default zone (one reciprocal cell)."""
    model = get_model(model)
    if model.dim_k == 1:
        return GridSpec((n,), model.bz)
    if model.dim_k == 2:
        return GridSpec((n, n if n_y is None else n_y), model.bz)
    raise ValueError(f"{model.id!r} has a {model.dim_k}d zone; grids are 1d or 2d")


@dataclass
class Grid2D:
    """Values on a momentum grid.

    ``values`` has shape ``(n_y, n_x)`` (``n_y = 1`` for 1d grids), so a flat
    row-major walk runs k_x fastest.
    """

    spec: GridSpec
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def n_x(self):
        return self.spec.n[0]

    @property
    def n_y(self):
        return self.spec.n[1] if self.spec.dim == 2 else 1

    @property
    def bounds(self):
        return self.spec.bounds

    def momenta(self):
        """Arrays ``(kx, ky)`` (or ``(k,)``) with the same shape as ``values``."""
        axes = self.spec.axes()
        if self.spec.dim == 1:
            return (axes[0][None, :],)
        kx, ky = np.meshgrid(axes[0], axes[1])
        return kx, ky

    def nearest_index(self, k0):
        idx = []
        for a, x in zip(self.spec.axes(), np.atleast_1d(k0)):
            idx.append(int(np.argmin(np.abs(a - x))))
        if self.spec.dim == 1:
            return (0, idx[0])
        return (idx[1], idx[0])

    def value_at(self, k0):
        return float(self.values[self.nearest_index(k0)])


def evaluate_rows(spec, fn, workers=1):
    """Evaluate ``fn(*k_arrays) -> ndarray`` over ``spec`` in fixed row blocks.

    The result is identical for any ``workers``: blocks are fixed and
    reassembled in row order.
    """
    axes = spec.axes()
    if spec.dim == 1:
        return np.asarray(fn(axes[0][None, :]), dtype=float)
    ky_all = axes[1]
    starts = range(0, len(ky_all), BLOCK_ROWS)

    def block(j0):
        kx, ky = np.meshgrid(axes[0], ky_all[j0:j0 + BLOCK_ROWS])
        return np.asarray(fn(kx, ky), dtype=float)

    if workers <= 1:
        parts = [block(j0) for j0 in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(block, starts))
    return np.concatenate(parts, axis=0)
