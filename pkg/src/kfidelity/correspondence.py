"""Zero-fidelity pairs, antipodality ratios and critical lines.

A pair of parameter points has vanishing fidelity at k exactly when
h2(k) = -lam * h1(k) with lam > 0.  If h depends homogeneously and linearly on
the parameters, every point of the ray nu * (lam * q1 + q2) is then gapless at
k.  The counter-example suite checks the cases where this correspondence
breaks down in either direction.
"""

from dataclasses import dataclass, field
from math import pi

import numpy as np

from .errors import GaplessError, LinearityError, NotAntipodalError, VerificationError
from .fidelity import GAPLESS_EPS, SENTINEL, fidelity_map, pure_fidelity_array
from .grid import default_grid
from .models import DIRAC_K, DIRAC_KP, HONEYCOMB_G, eval_h, get_model, sector_models
from .topology import grid_points


@dataclass(frozen=True)
class AntipodalWitness:
    k: tuple
    q1: dict
    q2: dict
    lam: float
    residual: float
    fidelity: float
    sector: str
    pair: tuple = ()


@dataclass(frozen=True)
class CriticalLine:
    model: str
    direction: dict
    k: tuple
    lam: float
    verified_gap: float
    linear_in: tuple

    def point(self, nu):
        """Parameter point ``nu * direction`` (non-linear parameters held fixed)."""
        return {p: (nu * v if p in self.linear_in else v) for p, v in self.direction.items()}


def _vec(h):
    return np.asarray(getattr(h, "h", h), dtype=float)


def antipodal_lambda(h1, h2, tol=1e-8):
    """Ratio ``|h2| / |h1|`` for antipodal vectors (``n1.n2 <= -1 + tol``)."""
    a, b = _vec(h1), _vec(h2)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na <= GAPLESS_EPS or nb <= GAPLESS_EPS:
        raise GaplessError("antipodality is undefined for a zero h-vector")
    cos = float(a @ b) / (na * nb)
    if cos > -1 + tol:
        raise NotAntipodalError(f"h-vectors are not antipodal: n1.n2 = {cos:.12g}")
    return float(nb / na)


def critical_line(model, q1, q2, k, tol=1e-8):
    """Line of gapless points through ``lam * q1 + q2`` built from an antipodal pair at ``k``.

    Parameters that differ between ``q1`` and ``q2`` must all be declared in the
    model's ``linear_in``; the remaining parameters are carried over unchanged.
    For composite models the first sector that is antipodal at ``k`` is used.
    """
    model = get_model(model)
    varied = sorted(p for p in model.schema if q1[p] != q2[p])
    if not model.linear_in or not set(varied) <= set(model.linear_in):
        raise LinearityError(
            f"{model.id!r} is not declared linear in the varied parameters {varied} "
            f"(linear_in = {list(model.linear_in)})"
        )
    lam, sector = None, None
    for sec in sector_models(model):
        try:
            lam = antipodal_lambda(eval_h(sec, q1, k), eval_h(sec, q2, k), tol)
        except NotAntipodalError:
            continue
        sector = sec
        break
    if sector is None:
        raise NotAntipodalError(f"no sector of {model.id!r} is antipodal at k = {k}")
    direction = {p: (lam * q1[p] + q2[p] if p in model.linear_in else q1[p]) for p in model.schema}
    gap = 2 * eval_h(sector, direction, k).norm
    if gap > tol:
        raise VerificationError(f"gap at lam*q1 + q2 is {gap:.3g} > {tol:g}", measured=gap)
    kk = tuple(float(x) for x in np.atleast_1d(k))
    return CriticalLine(sector.id, direction, kk, lam, gap, tuple(model.linear_in))


def zero_fidelity_pairs(model, q_samples, spec, tol=1e-8):
    """All (pair, k) with ground-state fidelity ``<= tol``, both states gapped.

    Pairs are visited in sample order ``(i, j), i < j`` and momenta in
    row-major order.
    """
    model = get_model(model)
    if len(q_samples) < 2:
        raise ValueError("need at least two parameter samples")
    sectors = sector_models(model)
    pts = grid_points(spec)
    fields = [[sec.field(q, pts)[1] for sec in sectors] for q in q_samples]
    out = []
    for i in range(len(q_samples)):
        for j in range(i + 1, len(q_samples)):
            per = np.array([pure_fidelity_array(fields[i][s], fields[j][s]) for s in range(len(sectors))])
            total = np.prod(per, axis=0)
            hits = np.nonzero(total <= tol)[0]  # NaN (gapless) never compares true
            for n in hits:
                s = int(np.argmin(per[:, n]))
                h1, h2 = fields[i][s][:, n], fields[j][s][:, n]
                lam = float(np.linalg.norm(h2) / np.linalg.norm(h1))
                out.append(AntipodalWitness(
                    tuple(float(c[n]) for c in pts), dict(q_samples[i]), dict(q_samples[j]), lam,
                    float(np.linalg.norm(h2 + lam * h1)), float(total[n]), sectors[s].id, (i, j),
                ))
    return out


def perturbative_search(model, q_c, k, delta=1e-3, n_dirs=16, params=None, domain=None, tol=1e-6, seed=0):
    """Look for a zero-fidelity pair ``q_c +- delta * r`` around a gapless point.

    Random unit directions ``r`` over ``params`` (default: the whole schema)
    are tried; pairs with a point outside ``domain`` (a predicate on parameter
    dicts) are skipped.  Returns ``(n_success, n_valid_pairs)``.
    """
    model = get_model(model)
    params = list(params or model.schema)
    rng = np.random.default_rng(seed)
    ok = valid = 0
    for _ in range(n_dirs):
        r = rng.normal(size=len(params))
        r /= np.linalg.norm(r)
        qa, qb = dict(q_c), dict(q_c)
        for p, x in zip(params, r):
            qa[p] = q_c[p] + delta * x
            qb[p] = q_c[p] - delta * x
        if domain is not None and not (domain(qa) and domain(qb)):
            continue
        fs = []
        for sec in sector_models(model):
            fs.append(pure_fidelity_array(eval_h(sec, qa, k).h, eval_h(sec, qb, k).h))
        f = float(np.prod(fs))
        if np.isnan(f):
            continue
        valid += 1
        ok += f <= tol
    return ok, valid


# --- counter-example suite ---------------------------------------------------


@dataclass
class CheckResult:
    key: str
    title: str
    passed: bool
    lines: list = field(default_factory=list)


@dataclass
class SuiteReport:
    checks: list

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def render(self):
        out = []
        for c in self.checks:
            out.append(f"[{c.key}] {c.title}")
            out.extend(f"    {line}" for line in c.lines)
            out.append(f"    result: {'PASS' if c.passed else 'FAIL'}")
            out.append("")
        out.append(f"overall: {'PASS' if self.passed else 'FAIL'} "
                   f"({sum(c.passed for c in self.checks)}/{len(self.checks)} checks)")
        return "\n".join(out) + "\n"

    def rows(self):
        return [(c.key, "pass" if c.passed else "fail", c.title) for c in self.checks]


def _check_rot_flat(n):
    phis = [i * pi / 4 for i in range(8)]
    spec = default_grid("rot_flat", n)
    wit = zero_fidelity_pairs("rot_flat", [{"phi": p} for p in phis], spec)
    pairs = sorted({w.pair for w in wit})
    expected = sorted((i, i + 4) for i in range(4))
    pts = grid_points(spec)
    gaps = [2 * np.linalg.norm(get_model("rot_flat").field({"phi": p}, pts)[1], axis=0)
            for p in np.linspace(0, 2 * pi, 73)]
    gmin, gmax = float(np.min(gaps)), float(np.max(gaps))
    passed = pairs == expected and abs(gmin - 2) < 1e-12 and abs(gmax - 2) < 1e-12
    return CheckResult("a", "rot_flat: zero-fidelity pairs without any gapless point", passed, [
        f"zero-fidelity sample pairs (phi indices of pi/4): {pairs}",
        f"expected antipodal pairs phi, phi + pi: {expected}",
        f"gap over 73 phi x {spec.n[0]}x{spec.n[1]} k: min {gmin:.12g}, max {gmax:.12g} (flat bands at +-1)",
    ])


def _check_polar_plane(n, n_random=50, seed=7):
    rng = np.random.default_rng(seed)
    samples = [{"rho": r, "phi": p} for r in np.linspace(0, 1, 5) for p in np.linspace(0, pi / 2, 5)]
    samples += [{"rho": float(r), "phi": float(p)}
                for r, p in zip(rng.uniform(0, 1, n_random), rng.uniform(0, pi / 2, n_random))]
    spec = default_grid("polar_plane", n)
    wit = zero_fidelity_pairs("polar_plane", samples, spec)
    gap0 = 2 * eval_h("polar_plane", {"rho": 0.0, "phi": 0.3}, (0.0, 0.0)).norm

    def inside(q):
        return 0 <= q["rho"] <= 1 and 0 <= q["phi"] <= pi / 2

    ok, valid = perturbative_search("polar_plane", {"rho": 0.0, "phi": pi / 4}, (0.0, 0.0),
                                    n_dirs=64, domain=inside)
    passed = gap0 == 0 and not wit and ok == 0
    return CheckResult("b", "polar_plane on rho in [0,1], phi in [0,pi/2]: gapless point, no zero-fidelity pair",
                       passed, [
                           f"gap at rho = 0: {gap0:g}",
                           f"{len(samples)} samples ({n_random} random, seed {seed}): {len(wit)} zero-fidelity witnesses",
                           f"perturbative search around rho = 0 inside the domain: {ok} successes "
                           f"in {valid} admissible direction pairs",
                       ])


def _dirac_images():
    pts = []
    g1, g2 = (np.array(g) for g in HONEYCOMB_G)
    for base in (DIRAC_K, DIRAC_KP):
        for a in (-1, 0, 1):
            for b in (-1, 0, 1):
                pts.append(np.array(base) + a * g1 + b * g2)
    return pts


def _check_graphene_theta(n):
    model = get_model("graphene_theta")
    spec = default_grid(model, n)
    q0, qpi = {"t0": 1.0, "theta": 0.0}, {"t0": 1.0, "theta": pi}
    fmap = fidelity_map(model, q0, qpi, spec)
    valid = fmap.values[fmap.values != SENTINEL]
    fmax = float(valid.max())
    masked = int(np.sum(fmap.values == SENTINEL))
    at_dirac = [pure_fidelity_array(eval_h(model, q0, k).h, eval_h(model, qpi, k).h) for k in (DIRAC_K, DIRAC_KP)]
    dirac_masked = all(np.isnan(f) for f in at_dirac)

    kx, ky = fmap.momenta()
    step = max(spec.step())
    far = np.ones(kx.shape, dtype=bool)
    for p in _dirac_images():
        far &= np.hypot(kx - p[0], ky - p[1]) > 2 * step
    thetas = np.linspace(0, 2 * pi, 73)
    bad = []
    for th in thetas:
        q = {"t0": 1.0, "theta": th}
        g = 2 * np.linalg.norm(model.field(q, (kx, ky))[1], axis=0)
        crit = abs(np.sin(th)) < 1e-12
        gap_k = 2 * min(eval_h(model, q, DIRAC_K).norm, eval_h(model, q, DIRAC_KP).norm)
        if crit:
            if gap_k > 1e-12 or g[far].min() <= 1e-6:
                bad.append(th)
        elif g.min() < 2 * abs(np.sin(th)) - 1e-12:
            bad.append(th)
    passed = fmax <= 1e-12 and dirac_masked and not bad
    return CheckResult("c", "graphene_theta: F(theta=0, theta=pi) = 0 everywhere, gapless only at K, K' for theta = n pi",
                       passed, [
                           f"max F over {valid.size} gapped grid points: {fmax:.3g}",
                           f"grid points masked as gapless: {masked}; K and K' masked: {dirac_masked}",
                           f"theta values violating E = t0 sqrt(cos^2|A|^2 + sin^2) gap structure: {len(bad)} of {len(thetas)}",
                       ])


def _check_triplet_normal(n):
    q1 = {"t": 1.0, "mu": -3.0, "m_z": 0.5, "delta_t": 0.0}
    q2 = dict(q1, mu=-0.1)
    spec = default_grid("triplet_product", n)
    fmap = fidelity_map("triplet_product", q1, q2, spec)
    kx, ky = fmap.momenta()
    predicted = np.zeros(kx.shape, dtype=bool)
    for spin in (1, -1):
        e1 = -2 * (np.cos(kx) + np.cos(ky)) - q1["mu"] - spin * q1["m_z"]
        e2 = -2 * (np.cos(kx) + np.cos(ky)) - q2["mu"] - spin * q2["m_z"]
        predicted |= np.sign(e1) != np.sign(e2)
    ok = fmap.values != SENTINEL
    zero = ok & (fmap.values <= 1e-12)
    frac = float(zero.sum() / ok.sum())
    agree = bool(np.all(zero[ok] == predicted[ok]))
    passed = frac > 0.01 and agree
    return CheckResult("d", "triplet with delta_t = 0: fidelity vanishes on extended zones", passed, [
        f"zero-fidelity area fraction: {frac:.4f} (> 0.01 required)",
        f"zero set equals sign-change region of eps_k -+ M_z: {agree}",
        f"gapless grid points masked: {int((~ok).sum())}",
    ])


def _check_generic():
    runs = [
        ("kitaev1d", {"t": 1.0, "mu": 0.0, "delta": 0.0}, (pi / 2,)),
        ("triplet_up", {"t": 1.0, "mu": -0.5, "m_z": 0.5, "delta_t": 0.6}, (pi, 0.0)),
        ("bcs2d", {"t": 1.0, "mu": 0.0, "delta": 0.0}, (pi / 2, pi / 2)),
    ]
    lines, passed = [], True
    for mid, qc, k in runs:
        ok, valid = perturbative_search(mid, qc, k)
        passed &= ok >= 1
        lines.append(f"{mid} at {qc}, k = {tuple(round(x, 6) for x in k)}: {ok}/{valid} direction pairs give F = 0")
    lines.append("criterion: at least one sampled direction pair (our reading of 'generically')")
    return CheckResult("e", "gapless point => nearby zero-fidelity pair (randomised perturbative search)", passed, lines)


def counterexample_suite(n=101):
    """Run all correspondence checks on ``n x n`` grids."""
    return SuiteReport([
        _check_rot_flat(min(n, 21)),
        _check_polar_plane(min(n, 11)),
        _check_graphene_theta(n),
        _check_triplet_normal(n),
        _check_generic(),
    ])


__all__ = [
    "AntipodalWitness", "CheckResult", "CriticalLine", "SuiteReport", "antipodal_lambda", "counterexample_suite",
    "critical_line", "perturbative_search", "zero_fidelity_pairs",
]
