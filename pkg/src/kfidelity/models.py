"""Two-band and Dirac-like Bloch Hamiltonians as maps (parameters, k) -> h-vector.

Every model is written as H = h0 * I + sum_mu h[mu] * gamma_mu, with gamma the
Pauli matrices (d = 3) or a four-generator Clifford representation (d = 4).
Bands are h0 -+ |h|.

Model evaluation is vectorised: ``ModelSpec.field`` accepts momentum components
as numpy arrays of any common shape and returns ``h`` with a leading component
axis.
"""

from dataclasses import dataclass, field
from math import pi, sqrt

import numpy as np

from .errors import ModelError

SQRT3 = sqrt(3.0)

# Honeycomb lattice (nearest-neighbour distance 1).
HONEYCOMB_A = ((1.0, 0.0), (-0.5, SQRT3 / 2), (-0.5, -SQRT3 / 2))
HONEYCOMB_B = ((0.0, SQRT3), (-1.5, -SQRT3 / 2), (1.5, -SQRT3 / 2))
HONEYCOMB_G = ((4 * pi / 3, 0.0), (2 * pi / 3, 2 * pi / SQRT3))
DIRAC_K = (2 * pi / 3, 2 * pi / (3 * SQRT3))
DIRAC_KP = (2 * pi / 3, -2 * pi / (3 * SQRT3))

_SQUARE_BZ = ((-pi, pi), (-pi, pi))
_HONEYCOMB_BZ = ((0.0, 4 * pi / 3), (-pi / SQRT3, pi / SQRT3))


@dataclass(frozen=True)
class HVector:
    """Coefficients of a Bloch Hamiltonian at one momentum."""

    h: np.ndarray
    h0: float = 0.0

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        if h.ndim != 1 or h.size not in (2, 3, 4):
            raise ValueError(f"h-vector must have 2, 3 or 4 components, got shape {h.shape}")
        if not np.all(np.isfinite(h)) or not np.isfinite(self.h0):
            raise ValueError("h-vector components must be finite")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "h0", float(self.h0))

    @property
    def d(self):
        return self.h.size

    @property
    def norm(self):
        return float(np.linalg.norm(self.h))


@dataclass(frozen=True)
class ModelSpec:
    """One member of the model zoo.

    ``linear_in`` lists the parameters in which h is jointly homogeneous linear
    when the remaining parameters are held fixed.  Composite models (``sectors``
    non-empty) have no h-vector of their own; their fidelity is the product of
    the sector fidelities and their gap is the smallest sector gap.
    """

    id: str
    dim_k: int
    dim_h: int
    schema: tuple
    linear_in: tuple = ()
    description: str = ""
    reciprocal: tuple = ()
    bz: tuple = ()
    sectors: tuple = ()
    _fn: object = field(default=None, repr=False, compare=False)

    @property
    def composite(self):
        return bool(self.sectors)

    def check_params(self, q):
        keys = set(q)
        missing = [p for p in self.schema if p not in keys]
        extra = sorted(keys - set(self.schema))
        if missing or extra:
            raise ModelError(
                f"parameters for {self.id!r} must be exactly {list(self.schema)}; "
                f"missing {missing}, unexpected {extra}"
            )
        # arrays pass through so callers can vectorise over parameter points
        return {p: q[p] if isinstance(q[p], np.ndarray) else float(q[p]) for p in self.schema}

    def field(self, q, k):
        """Vectorised evaluation.

        Parameters
        ----------
        q : mapping
            Parameter values, keys exactly ``schema``.
        k : sequence of array_like
            ``dim_k`` momentum components, broadcast against each other.

        Returns
        -------
        h0 : ndarray
        h : ndarray, shape (dim_h, *kshape)
        """
        if self.composite:
            raise ModelError(f"{self.id!r} is composite; evaluate its sectors {self.sectors}")
        p = self.check_params(q)
        if len(k) != self.dim_k:
            raise ModelError(f"{self.id!r} expects {self.dim_k} momentum components, got {len(k)}")
        k = np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in k])
        h0, comps = self._fn(p, *k)
        shape = np.broadcast_shapes(k[0].shape, np.shape(h0), *[np.shape(c) for c in comps])
        h = np.stack([np.broadcast_to(np.asarray(c, dtype=float), shape) for c in comps])
        h0 = np.broadcast_to(np.asarray(h0, dtype=float), shape)
        return h0, h


def _momentum(model, k):
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if k.shape != (model.dim_k,):
        raise ModelError(f"{model.id!r} expects a momentum with {model.dim_k} components, got {k.shape}")
    return tuple(k)


def eval_h(model, q, k):
    """h-vector of ``model`` at parameters ``q`` and momentum ``k``."""
    model = get_model(model)
    h0, h = model.field(q, _momentum(model, k))
    return HVector(h, float(h0))


def band_energies(model, q, k):
    """Return ``(E_minus, E_plus) = (h0 - |h|, h0 + |h|)``."""
    v = eval_h(model, q, k)
    n = v.norm
    return v.h0 - n, v.h0 + n


# --- model definitions -----------------------------------------------------


def _square_eps(p, kx, ky):
    return -2 * p["t"] * (np.cos(kx) + np.cos(ky)) - p["mu"]


def _triplet(spin):
    def fn(p, kx, ky):
        eps = _square_eps(p, kx, ky)
        d = p["delta_t"]
        return 0.0, (-spin * d * np.sin(ky), d * np.sin(kx), eps - spin * p["m_z"])

    return fn


def _ti_toy1(p, kx, ky):
    cx, cy, sx, sy = np.cos(kx), np.cos(ky), np.sin(kx), np.sin(ky)
    return 0.0, (
        sqrt(2) * p["t_x1"] * (cx + cy),
        sqrt(2) * p["t_y1"] * (cx - cy),
        4 * p["t2"] * sx * sy + 2 * p["t1p"] * (sx + sy) + p["delta"],
    )


def _ti_toy2(p, kx, ky):
    cx, cy = np.cos(kx), np.cos(ky)
    return 0.0, (cx + cy, cx - cy, p["t2"] * np.sin(kx) * np.sin(ky))


def _kitaev(p, k):
    return 0.0, (0.0, 2 * p["delta"] * np.sin(k), -2 * p["t"] * np.cos(k) - p["mu"])


def _honeycomb_a(kx, ky):
    """Nearest-neighbour structure factor in the periodic (Bravais) gauge."""
    return 1 + np.exp(1j * SQRT3 * ky) + np.exp(1j * (1.5 * kx + SQRT3 / 2 * ky))


def _haldane(p, kx, ky):
    a = p["t1"] * _honeycomb_a(kx, ky)
    kb = [b[0] * kx + b[1] * ky for b in HONEYCOMB_B]
    h0 = 2 * p["t2"] * np.cos(p["phi"]) * sum(np.cos(x) for x in kb)
    hz = p["m"] - 2 * p["t2"] * np.sin(p["phi"]) * sum(np.sin(x) for x in kb)
    return h0, (a.real, a.imag, hz)


def _bcs(p, kx, ky):
    return 0.0, (p["delta"], 0.0, _square_eps(p, kx, ky))


def _ising(p, k):
    return 0.0, (np.sin(k), 0.0, np.cos(k) - p["h"])


def _graphene_uniform(p, kx, ky):
    a = p["t"] * _honeycomb_a(kx, ky)
    return 0.0, (a.real, a.imag, p["m"])


def _graphene_haldane_mass(p, kx, ky):
    a = p["t"] * _honeycomb_a(kx, ky)
    s = SQRT3 / 2 * ky
    hz = 4 * p["m"] * np.sin(s) * (np.cos(1.5 * kx) - np.cos(s))
    return 0.0, (a.real, a.imag, hz)


def _graphene_theta(p, kx, ky):
    a = _honeycomb_a(kx, ky)
    c = p["t0"] * np.cos(p["theta"])
    return 0.0, (c * a.real, -c * a.imag, p["t0"] * np.sin(p["theta"]))


def _dirac3d(p, kx, ky, kz):
    v = p["v"]
    m = p["m"] - p["t"] * (np.cos(kx) + np.cos(ky) + np.cos(kz))
    return 0.0, (v * np.sin(kx), v * np.sin(ky), v * np.sin(kz), m)


def _rot_flat(p, kx, ky):
    return 0.0, (np.cos(p["phi"]), np.sin(p["phi"]), 0.0)


def _polar_plane(p, kx, ky):
    r = p["rho"]
    return 0.0, (r * np.cos(p["phi"]), r * np.sin(p["phi"]), 0.0)


_SQ2 = ((2 * pi, 0.0), (0.0, 2 * pi))

_CATALOG = (
    ModelSpec("triplet_up", 2, 3, ("t", "mu", "m_z", "delta_t"), ("t", "mu", "m_z", "delta_t"),
              "spin-up sector of the 2d triplet superconductor", _SQ2, _SQUARE_BZ, _fn=_triplet(1)),
    ModelSpec("triplet_down", 2, 3, ("t", "mu", "m_z", "delta_t"), ("t", "mu", "m_z", "delta_t"),
              "spin-down sector of the 2d triplet superconductor", _SQ2, _SQUARE_BZ, _fn=_triplet(-1)),
    ModelSpec("triplet_product", 2, 3, ("t", "mu", "m_z", "delta_t"), ("t", "mu", "m_z", "delta_t"),
              "2d triplet superconductor, product over spin sectors", _SQ2, _SQUARE_BZ,
              sectors=("triplet_up", "triplet_down")),
    ModelSpec("ti_toy1", 2, 3, ("t_x1", "t_y1", "t2", "t1p", "delta"), ("t_x1", "t_y1", "t2", "t1p", "delta"),
              "toy Chern insulator with C = 1, 2 phases", _SQ2, _SQUARE_BZ, _fn=_ti_toy1),
    ModelSpec("ti_toy2", 2, 3, ("t2",), (), "toy Chern insulator with C = +-2",
              _SQ2, _SQUARE_BZ, _fn=_ti_toy2),
    ModelSpec("kitaev1d", 1, 3, ("t", "mu", "delta"), ("t", "mu", "delta"), "1d Kitaev chain",
              ((2 * pi,),), ((-pi, pi),), _fn=_kitaev),
    ModelSpec("haldane", 2, 3, ("t1", "t2", "m", "phi"), ("t1", "t2", "m"), "Haldane Chern insulator",
              HONEYCOMB_G, _HONEYCOMB_BZ, _fn=_haldane),
    ModelSpec("bcs2d", 2, 3, ("t", "mu", "delta"), ("t", "mu", "delta"), "s-wave BCS superconductor (Nambu)",
              _SQ2, _SQUARE_BZ, _fn=_bcs),
    ModelSpec("ising_tf", 1, 3, ("h",), (), "transverse-field Ising chain (Bogoliubov form)",
              ((2 * pi,),), ((-pi, pi),), _fn=_ising),
    ModelSpec("graphene_mass_uniform", 2, 3, ("t", "m"), ("t", "m"), "graphene with a uniform mass",
              HONEYCOMB_G, _HONEYCOMB_BZ, _fn=_graphene_uniform),
    ModelSpec("graphene_mass_haldane", 2, 3, ("t", "m"), ("t", "m"),
              "graphene with opposite masses at the two Dirac cones", HONEYCOMB_G, _HONEYCOMB_BZ,
              _fn=_graphene_haldane_mass),
    ModelSpec("graphene_theta", 2, 3, ("t0", "theta"), ("t0",), "graphene interpolated to a pure mass",
              HONEYCOMB_G, _HONEYCOMB_BZ, _fn=_graphene_theta),
    ModelSpec("dirac3d_ti", 3, 4, ("v", "m", "t"), ("v", "m", "t"), "3d time-reversal invariant insulator",
              ((2 * pi, 0.0, 0.0), (0.0, 2 * pi, 0.0), (0.0, 0.0, 2 * pi)), ((-pi, pi),) * 3, _fn=_dirac3d),
    ModelSpec("rot_flat", 2, 3, ("phi",), (), "k-independent unit vector at angle phi (flat bands)",
              _SQ2, _SQUARE_BZ, _fn=_rot_flat),
    ModelSpec("polar_plane", 2, 3, ("rho", "phi"), ("rho",), "k-independent planar vector rho (cos phi, sin phi)",
              _SQ2, _SQUARE_BZ, _fn=_polar_plane),
)

_BY_ID = {m.id: m for m in _CATALOG}


def catalog():
    """All models, in a fixed order."""
    return list(_CATALOG)


def get_model(model):
    if isinstance(model, ModelSpec):
        return model
    try:
        return _BY_ID[model]
    except KeyError:
        raise ModelError(f"unknown model {model!r}; known: {', '.join(_BY_ID)}") from None


def sector_models(model):
    """Models whose fidelities multiply to give the fidelity of ``model``."""
    model = get_model(model)
    if model.composite:
        return [get_model(s) for s in model.sectors]
    return [model]
