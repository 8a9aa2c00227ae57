"""Momentum-resolved fidelity kernels.

Closed forms
------------
Zero temperature (any Clifford dimension)::

    F = sqrt((1 + n1.n2) / 2),   n = h / |h|

evaluated as ``|n1 + n2| / 2`` so that exactly opposite vectors give exactly 0.

Finite temperature (d = 3), with x_i = beta |h_i| (the gap is E = 2|h|)::

    F = [2 + sqrt(2 (1 + A + B n1.n2))] / sqrt((2 + 2 cosh x1)(2 + 2 cosh x2))
    A = cosh x1 cosh x2,  B = sinh x1 sinh x2

This is the Uhlmann fidelity between the Gibbs states of the two-mode
fermionic Hamiltonian c^dag (h.sigma) c.  It is evaluated after dividing
through by exp((x1 + x2) / 2), which cannot overflow.
"""

from dataclasses import dataclass
from math import inf, isinf

import numpy as np
from scipy.linalg import expm

from .errors import GaplessError
from .grid import Grid2D, evaluate_rows
from .models import HVector, get_model, sector_models

# |h| at or below this is a band touching; fidelity is undefined there.
GAPLESS_EPS = 1e-12

SENTINEL = -1.0

PAULI = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)
_I2 = np.eye(2)
# tau^z (x) sigma^mu, tau^x (x) 1
GAMMA4 = np.array(
    [np.kron(PAULI[2], PAULI[0]), np.kron(PAULI[2], PAULI[1]), np.kron(PAULI[2], PAULI[2]), np.kron(PAULI[0], _I2)]
)


@dataclass(frozen=True)
class GibbsContext:
    """Inverse temperature; ``beta = inf`` is the ground state."""

    beta: float = inf

    def __post_init__(self):
        b = float(self.beta)
        if np.isnan(b) or b < 0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")
        object.__setattr__(self, "beta", b)

    @property
    def temperature(self):
        return 0.0 if isinf(self.beta) else (inf if self.beta == 0 else 1.0 / self.beta)


def _beta(ctx):
    return ctx.beta if isinstance(ctx, GibbsContext) else GibbsContext(ctx).beta


def _vec(h):
    if isinstance(h, HVector):
        return h.h
    return np.asarray(h, dtype=float)


def _pair(h1, h2):
    a, b = _vec(h1), _vec(h2)
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"h-vectors have different dimensions {a.shape[0]} and {b.shape[0]}")
    return a, b


def _unit(h):
    n = np.linalg.norm(h, axis=0)
    gapless = n <= GAPLESS_EPS
    with np.errstate(invalid="ignore", divide="ignore"):
        u = h / np.where(gapless, 1.0, n)
    return u, n, gapless


# --- array kernels -----------------------------------------------------------


def pure_fidelity_array(h1, h2):
    """Ground-state fidelity for stacked h-vectors of shape ``(d, ...)``; NaN where gapless."""
    u1, _, g1 = _unit(h1)
    u2, _, g2 = _unit(h2)
    f = np.minimum(np.linalg.norm(u1 + u2, axis=0) / 2, 1.0)
    return np.where(g1 | g2, np.nan, f)


def gibbs_fidelity_array(h1, h2, beta):
    """Finite-temperature fidelity for stacked 3-component h-vectors."""
    if isinf(beta):
        return pure_fidelity_array(h1, h2)
    u1, n1, g1 = _unit(h1)
    u2, n2, g2 = _unit(h2)
    either = g1 | g2
    # 1 + c and 1 - c without cancellation; c is irrelevant (B = 0) if a state is gapless
    one_pc = np.where(either, 1.0, np.sum((u1 + u2) ** 2, axis=0) / 2)
    one_mc = np.where(either, 1.0, np.sum((u1 - u2) ** 2, axis=0) / 2)
    x1, x2 = beta * n1, beta * n2
    e1, e2 = np.exp(-x1), np.exp(-x2)
    a1, a2 = e1 * e1, e2 * e2
    es = e1 * e2
    inner = 2 * es + 0.5 * (one_pc * (1 + a1 * a2) + one_mc * (a1 + a2))
    f = (2 * np.sqrt(es) + np.sqrt(inner)) / ((1 + e1) * (1 + e2))
    return np.minimum(f, 1.0)


# --- scalar operations -------------------------------------------------------


def fidelity_pure(h1, h2):
    """Ground-state fidelity ``sqrt((1 + n1.n2)/2)`` for d = 2, 3 or 4.

    Raises
    ------
    GaplessError
        If either vector has zero length.
    """
    a, b = _pair(h1, h2)
    for v in (a, b):
        if np.linalg.norm(v) <= GAPLESS_EPS:
            raise GaplessError("fidelity is undefined at a band-touching point (|h| = 0)")
    return float(pure_fidelity_array(a, b))


def fidelity_gibbs(h1, h2, ctx):
    """Fidelity between Gibbs states of two 2x2 Bloch Hamiltonians.

    ``ctx`` is a :class:`GibbsContext` or a bare ``beta``.  At ``beta = inf``
    this is :func:`fidelity_pure`.
    """
    beta = _beta(ctx)
    a, b = _pair(h1, h2)
    if a.shape[0] != 3:
        raise ValueError("finite-temperature fidelity is defined for 2x2 (d = 3) Hamiltonians only")
    if isinf(beta):
        return fidelity_pure(a, b)
    return float(gibbs_fidelity_array(a, b, beta))


def fidelity_product(factors):
    out = 1.0
    for f in factors:
        f = float(f)
        if not 0.0 <= f <= 1.0:
            raise ValueError(f"fidelity factor {f} outside [0, 1]")
        out *= f
    return out


def _bogoliubov_double_angle(k, field):
    """Unit vector (cos 2 theta_k, sin 2 theta_k) of the Bogoliubov rotation."""
    if not 0.0 <= k <= np.pi:
        raise ValueError(f"k must lie in [0, pi], got {k}")
    v = np.array([np.cos(k) - field, np.sin(k)])
    eps = np.hypot(*v)
    if eps <= GAPLESS_EPS:
        raise GaplessError(f"Ising spectrum closes at k={k}, h={field}")
    return v / eps


def fidelity_ising_k(k, h_field1, h_field2):
    """|cos(theta_k - theta'_k)| from the Bogoliubov angles of the transverse-field Ising chain.

    With k in [0, pi] both angles lie in [0, pi/2], so the cosine of their
    difference equals ``|u1 + u2| / 2`` for the double-angle unit vectors;
    this form is exactly 0 when the two rotations are opposite.
    """
    u1 = _bogoliubov_double_angle(float(k), float(h_field1))
    u2 = _bogoliubov_double_angle(float(k), float(h_field2))
    return float(min(np.hypot(*(u1 + u2)) / 2, 1.0))


def fidelity_ising_total(grid, h_field1, h_field2):
    ks = np.asarray(grid, dtype=float)
    if ks.ndim != 1 or ks.size == 0:
        raise ValueError("k grid must be a non-empty 1d sequence")
    if np.any(np.diff(ks) <= 0) or ks[0] < 0 or ks[-1] > np.pi:
        raise ValueError("k grid must be strictly increasing inside [0, pi]")
    return fidelity_product(fidelity_ising_k(k, h_field1, h_field2) for k in ks)


# --- brute-force oracle ------------------------------------------------------

_A = np.array([[0, 1], [0, 0]], dtype=complex)  # annihilator on (|0>, |1>)
_MODES = (np.kron(_A, _I2), np.kron(PAULI[2], _A))  # Jordan-Wigner


def _fock_hamiltonian(h):
    hs = np.einsum("i,ijk->jk", h, PAULI)
    out = np.zeros((4, 4), dtype=complex)
    for i, ci in enumerate(_MODES):
        for j, cj in enumerate(_MODES):
            out += hs[i, j] * ci.conj().T @ cj
    return out


def _sqrt_gibbs(h, beta):
    s = expm(-0.5 * beta * _fock_hamiltonian(h))
    return s / np.sqrt(np.trace(s @ s).real)


def _lower_projector(h, gammas):
    if np.linalg.norm(h) <= GAPLESS_EPS:
        raise GaplessError("fidelity is undefined at a band-touching point (|h| = 0)")
    w, v = np.linalg.eigh(np.einsum("i,ijk->jk", h, gammas))
    low = v[:, w < 0]
    return low @ low.conj().T


def fidelity_oracle(h1, h2, ctx):
    """Uhlmann fidelity Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)) from explicit matrices.

    d = 3 at finite beta uses the 4x4 Fock-space Gibbs state built by
    Jordan-Wigner and matrix exponentiation; beta = inf uses the lower-band
    eigenprojector (rank 1 for d = 3, rank 2 for d = 4 with rho = P / 2).
    The trace is the nuclear norm of sqrt(rho1) sqrt(rho2), taken by SVD.
    """
    beta = _beta(ctx)
    a, b = _pair(h1, h2)
    if a.shape[0] == 2:
        a, b = np.append(a, 0.0), np.append(b, 0.0)
    d = a.shape[0]
    if d == 3 and not isinf(beta):
        r1, r2 = _sqrt_gibbs(a, beta), _sqrt_gibbs(b, beta)
    elif d == 3:
        r1, r2 = _lower_projector(a, PAULI), _lower_projector(b, PAULI)
    elif d == 4 and isinf(beta):
        r1 = _lower_projector(a, GAMMA4) / np.sqrt(2)
        r2 = _lower_projector(b, GAMMA4) / np.sqrt(2)
    else:
        raise ValueError(f"oracle supports d = 3 (any beta) or d = 4 (beta = inf); got d = {d}, beta = {beta}")
    return float(np.linalg.svd(r1 @ r2, compute_uv=False).sum())


# --- grids -------------------------------------------------------------------


def fidelity_map(model, q1, q2, spec, beta=inf, workers=1):
    """Fidelity between the states at ``q1`` and ``q2`` over a momentum grid.

    Composite models multiply their sector fidelities.  At ``beta = inf`` a
    k-point where either state is gapless in any sector gets ``SENTINEL``.
    """
    model = get_model(model)
    sectors = sector_models(model)
    for s in sectors:
        s.check_params(q1)
        s.check_params(q2)
    beta = _beta(beta)

    def fn(*k):
        out = 1.0
        for s in sectors:
            _, h1 = s.field(q1, k)
            _, h2 = s.field(q2, k)
            if isinf(beta):
                out = out * pure_fidelity_array(h1, h2)
            else:
                if h1.shape[0] != 3:
                    raise ValueError("finite-temperature fidelity needs d = 3")
                out = out * gibbs_fidelity_array(h1, h2, beta)
        return np.where(np.isnan(out), SENTINEL, out)

    values = evaluate_rows(spec, fn, workers)
    meta = {"kind": "fidelity", "model": model.id, "q1": dict(q1), "q2": dict(q2), "beta": beta,
            "bounds": spec.bounds, "gapless_points": int(np.sum(values == SENTINEL))}
    return Grid2D(spec, values, meta)
