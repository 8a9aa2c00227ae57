from math import pi, sqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kfidelity.errors import ModelError
from kfidelity.models import (
    DIRAC_K, DIRAC_KP, HVector, band_energies, catalog, eval_h, get_model, sector_models,
)

TRIPLET = {"t": 1.0, "mu": -3.0, "m_z": 0.5, "delta_t": 0.6}
coord = st.floats(-10, 10, allow_nan=False)
param = st.floats(-3, 3, allow_nan=False)


def sample_params(model, rng):
    return {p: float(rng.uniform(-2, 2)) for p in model.schema}


def test_catalog_ids_unique_and_resolvable():
    ids = [m.id for m in catalog()]
    assert len(ids) == len(set(ids))
    for mid in ids:
        assert get_model(mid).id == mid
    assert ids[:3] == ["triplet_up", "triplet_down", "triplet_product"]


def test_unknown_model():
    with pytest.raises(ModelError, match="unknown model"):
        get_model("kagome")


def test_schema_mismatch_is_rejected():
    with pytest.raises(ModelError, match="missing"):
        eval_h("kitaev1d", {"t": 1.0, "mu": 0.0}, (0.3,))
    with pytest.raises(ModelError, match="unexpected"):
        eval_h("kitaev1d", {"t": 1.0, "mu": 0.0, "delta": 1.0, "x": 2.0}, (0.3,))


def test_momentum_dimension_checked():
    with pytest.raises(ModelError):
        eval_h("kitaev1d", {"t": 1.0, "mu": 0.0, "delta": 1.0}, (0.3, 0.1))


def test_hvector_validation():
    with pytest.raises(ValueError):
        HVector(np.zeros(5))
    with pytest.raises(ValueError):
        HVector(np.array([0.0, np.nan, 1.0]))
    assert HVector(np.array([3.0, 4.0])).norm == 5.0


def test_triplet_sectors_at_x_point():
    up = eval_h("triplet_up", TRIPLET, (pi, 0.0))
    down = eval_h("triplet_down", TRIPLET, (pi, 0.0))
    # eps(pi, 0) = -mu
    np.testing.assert_allclose(up.h, [0.0, 0.0, 3.0 - 0.5], atol=1e-15)
    np.testing.assert_allclose(down.h, [0.0, 0.0, 3.0 + 0.5], atol=1e-15)
    assert [m.id for m in sector_models("triplet_product")] == ["triplet_up", "triplet_down"]


def test_composite_model_has_no_field():
    with pytest.raises(ModelError, match="composite"):
        eval_h("triplet_product", TRIPLET, (0.0, 0.0))


def test_kitaev_touching_point():
    h = eval_h("kitaev1d", {"t": 1.0, "mu": 0.0, "delta": 0.0}, (pi / 2,))
    np.testing.assert_allclose(h.h, 0.0, atol=1e-15)


def test_ising_vector():
    h = eval_h("ising_tf", {"h": 0.5}, (0.0,))
    np.testing.assert_allclose(h.h, [0.0, 0.0, 0.5])


def test_dirac3d_mass_at_gamma():
    h = eval_h("dirac3d_ti", {"v": 1.0, "m": 2.0, "t": 1.0}, (0.0, 0.0, 0.0))
    assert h.d == 4
    np.testing.assert_allclose(h.h, [0, 0, 0, -1.0], atol=1e-15)


def test_graphene_dirac_points_are_gapless():
    for k in (DIRAC_K, DIRAC_KP):
        assert eval_h("graphene_mass_uniform", {"t": 1.0, "m": 0.0}, k).norm < 1e-14
        assert eval_h("haldane", {"t1": 1.0, "t2": 0.0, "m": 0.0, "phi": 0.3}, k).norm < 1e-14


def test_haldane_identity_term():
    q = {"t1": 1.0, "t2": 0.2, "m": 0.1, "phi": 0.4}
    h = eval_h("haldane", q, (0.0, 0.0))
    assert h.h0 == pytest.approx(6 * 0.2 * np.cos(0.4))
    lo, hi = band_energies("haldane", q, (0.0, 0.0))
    assert hi - lo == pytest.approx(2 * h.norm)
    # |A(Gamma)| = 3
    assert h.norm == pytest.approx(sqrt(9 + 0.1 ** 2))


def test_graphene_theta_limits():
    q = {"t0": 2.0, "theta": pi / 2}
    h = eval_h("graphene_theta", q, (0.3, 0.7))
    np.testing.assert_allclose(h.h, [0, 0, 2.0], atol=1e-15)


def test_field_broadcasts_over_parameters():
    m = get_model("kitaev1d")
    mus = np.linspace(-1, 1, 5)[:, None]
    ks = np.linspace(0, pi, 7)[None, :]
    _, h = m.field({"t": 1.0, "mu": mus, "delta": 0.5}, (ks,))
    assert h.shape == (3, 5, 7)
    np.testing.assert_allclose(h[2], -2 * np.cos(ks) - mus)


@pytest.mark.parametrize("model", [m for m in catalog() if not m.composite and m.dim_k == 2], ids=lambda m: m.id)
@settings(max_examples=25, deadline=None)
@given(kx=coord, ky=coord, seed=st.integers(0, 2 ** 32 - 1))
def test_periodic_in_reciprocal_vectors(model, kx, ky, seed):
    q = sample_params(model, np.random.default_rng(seed))
    h = eval_h(model, q, (kx, ky))
    for g in model.reciprocal:
        hg = eval_h(model, q, (kx + g[0], ky + g[1]))
        np.testing.assert_allclose(hg.h, h.h, atol=1e-9)
        assert hg.h0 == pytest.approx(h.h0, abs=1e-9)


@pytest.mark.parametrize("model", [m for m in catalog() if m.linear_in and not m.composite], ids=lambda m: m.id)
@settings(max_examples=25, deadline=None)
@given(scale=st.floats(-4, 4, allow_nan=False), seed=st.integers(0, 2 ** 32 - 1))
def test_homogeneous_in_linear_parameters(model, scale, seed):
    rng = np.random.default_rng(seed)
    q = sample_params(model, rng)
    k = tuple(rng.uniform(-pi, pi, model.dim_k))
    scaled = {p: (scale * v if p in model.linear_in else v) for p, v in q.items()}
    np.testing.assert_allclose(eval_h(model, scaled, k).h, scale * eval_h(model, q, k).h, atol=1e-12)
