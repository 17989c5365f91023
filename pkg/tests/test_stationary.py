"""Stationary characteristic functions and density recovery.

Closed forms under test: the affine contraction gives a point mass at
A/(1-kappa); adding white Gaussian noise gives a Gaussian of width
R/(1-kappa^2); swapping in L-state jump noise multiplies in an infinite
product over scales kappa^gamma.
"""
import math
import warnings

import numpy as np
import pytest

from dilatox.models import (
    GaussianNoise,
    KuboAndersen,
    LinearDet,
    MixedNoise,
    NoNoise,
    OrnsteinUhlenbeck,
    iterate,
)
from dilatox.numkit import Grid1D, Grid2D, ProductTruncation
from dilatox.stationary import (
    CharFnResult,
    charfn_gauss_ka,
    charfn_linear_det,
    charfn_linear_gauss,
    density_from_charfn,
    gauss_ka_values,
    linear_det_values,
    linear_gauss_values,
    noise_charfn,
)

GRID2 = Grid2D(-5.0, 5.0, 41, -5.0, 5.0, 41)
KA_HALF = KuboAndersen(points=(0.0, 0.5), probs=(0.5, 0.5))


def test_linear_det_closed_form_and_product_oracle():
    cf = charfn_linear_det((1.0, 0.0), 0.5, GRID2)
    assert cf.params["fixed_point"] == (2.0, 0.0)
    center = np.argmin(np.abs(GRID2.points()).sum(axis=1))
    assert cf.point_values()[center] == 1.0 + 0j
    val = linear_det_values((1.0, 0.0), 0.5, np.array([[math.pi, 0.0]]))
    assert abs(val[0] - 1.0) < 1e-15  # exp(-2 pi i)
    # the closed form telescopes the product of per-step phase factors
    rng = np.random.default_rng(3)
    U = rng.uniform(-4.0, 4.0, (50, 2))
    direct = np.ones(50, dtype=complex)
    for gamma in range(60):
        direct *= np.exp(-1j * 0.5 ** gamma * (U @ np.array([1.0, 0.0])))
    assert np.max(np.abs(linear_det_values((1.0, 0.0), 0.5, U) - direct)) < 1e-12
    with pytest.raises(ValueError):
        charfn_linear_det((1.0, 0.0), 1.5, GRID2)


def test_linear_det_fixed_point_matches_iteration():
    states = list(iterate(LinearDet(offset=(1.0, 0.0), kappa=0.5),
                          NoNoise(), (0.0, 0.0), 100))
    assert np.max(np.abs(states[-1] - np.array([2.0, 0.0]))) < 1e-9


def test_linear_gauss_params_and_values():
    cf = charfn_linear_gauss((1.0, 0.0), 0.5, 0.2, GRID2)
    assert cf.params["mean"] == (2.0, 0.0)
    assert abs(cf.params["per_component_variance"] - 2.0 / 15.0) < 1e-15
    U = np.array([[0.7, -1.3]])
    got = linear_gauss_values((1.0, 0.0), 0.5, 0.2, U)[0]
    want = np.exp(-1j * 0.7 / 0.5 - 0.25 * (0.2 / 0.75) * (0.7 ** 2 + 1.3 ** 2))
    assert abs(got - want) < 1e-15
    with pytest.raises(ValueError):
        charfn_linear_gauss((1.0, 0.0), 0.5, 0.0, GRID2)


def test_linear_gauss_degenerates_to_point_mass():
    grid = Grid1D(-5.0, 5.0, 101)
    small = charfn_linear_gauss(1.0, 0.5, 1e-12, grid).point_values()
    det = charfn_linear_det(1.0, 0.5, grid).point_values()
    assert np.max(np.abs(small - det)) < 1e-9


def test_gauss_ka_normalization_modulus_symmetry():
    cf = charfn_gauss_ka(0.5, 0.2, KA_HALF, Grid1D(-8.0, 8.0, 321))
    vals = cf.point_values()
    assert vals[160] == 1.0 + 0j  # U = 0
    assert np.max(np.abs(vals)) <= 1.0 + 1e-12
    assert np.max(np.abs(vals[::-1] - np.conj(vals))) < 1e-13
    assert not np.any(cf.flagged)


def test_gauss_ka_pure_fractal_direct_product():
    vals, _, _ = gauss_ka_values(0.5, 0.0, KA_HALF,
                                 np.array([[2.0 * math.pi]]),
                                 ProductTruncation(tol=1e-14))
    oracle = 1.0 + 0j
    for gamma in range(40):
        oracle *= 0.5 * (1.0 + np.exp(-1j * 0.5 ** gamma * math.pi))
    assert abs(vals[0] - oracle) < 1e-10


def test_gauss_ka_single_jump_point_is_gaussian():
    ka1 = KuboAndersen(points=((1.0, 0.0),), probs=(1.0,))
    red = charfn_gauss_ka(0.5, 0.2, ka1, GRID2, ProductTruncation(tol=1e-13))
    ref = charfn_linear_gauss((1.0, 0.0), 0.5, 0.2, GRID2)
    assert np.max(np.abs(red.values - ref.values)) < 1e-12


def test_scaling_relation_residual():
    trunc = ProductTruncation(tol=1e-12)
    # 1D with Gaussian + jumps
    U = Grid1D(-6.0, 6.0, 241).points()[:, None]
    v, _, _ = gauss_ka_values(0.4, 0.3, KA_HALF, U, trunc)
    vk, _, _ = gauss_ka_values(0.4, 0.3, KA_HALF, 0.4 * U, trunc)
    factor = noise_charfn(MixedNoise(GaussianNoise(R=0.3, d=1), KA_HALF), U)
    assert np.max(np.abs(v - factor * vk)) < 10.0 * trunc.tol
    # 2D, jump noise alone (R = 0)
    ka2 = KuboAndersen(points=((0.0, 0.0), (0.5, 0.3)), probs=(0.4, 0.6))
    U2 = Grid2D(-4.0, 4.0, 21, -4.0, 4.0, 21).points()
    v2, _, _ = gauss_ka_values(0.5, 0.0, ka2, U2, trunc)
    v2k, _, _ = gauss_ka_values(0.5, 0.0, ka2, 0.5 * U2, trunc)
    assert np.max(np.abs(v2 - noise_charfn(ka2, U2) * v2k)) < 10.0 * trunc.tol


def test_noise_charfn_rejects_correlated_noise():
    with pytest.raises(ValueError):
        noise_charfn(OrnsteinUhlenbeck(R=0.2, tau_cor=1.0, t_del=1.0),
                     np.zeros((3, 1)))


def test_density_recovers_gaussian():
    cf = charfn_linear_gauss(0.0, 0.5, 0.2, Grid1D(-20.0, 20.0, 401))
    xgrid = Grid1D(-2.0, 2.0, 801)
    dens = density_from_charfn(cf, xgrid)
    width = 0.2 / 0.75
    x = xgrid.points()
    ref = np.exp(-x * x / width) / math.sqrt(math.pi * width)
    vals = np.asarray(dens.values)
    assert np.max(np.abs(vals - ref)) < 1e-6
    assert abs(dens.mass() - 1.0) < 1e-3
    assert dens.info["boundary_decayed"]
    assert np.max(np.abs(vals - vals[::-1])) < 1e-10  # even cf, even density


def test_density_recovers_2d_gaussian():
    cf = charfn_linear_gauss((0.0, 0.0), 0.5, 0.2,
                             Grid2D(-20.0, 20.0, 161, -20.0, 20.0, 161))
    xgrid = Grid2D(-1.5, 1.5, 101, -1.5, 1.5, 101)
    dens = density_from_charfn(cf, xgrid)
    width = 0.2 / 0.75
    gx, gy = xgrid.mesh()
    ref = np.exp(-(gx * gx + gy * gy) / width) / (math.pi * width)
    assert np.max(np.abs(np.asarray(dens.values) - ref)) < 1e-6
    assert abs(dens.mass() - 1.0) < 1e-3


def test_density_warns_without_boundary_decay():
    cf = charfn_linear_det(1.0, 0.5, Grid1D(-20.0, 20.0, 401))
    with pytest.warns(UserWarning, match="boundary"):
        dens = density_from_charfn(cf, Grid1D(-2.0, 2.0, 401))
    assert not dens.info["boundary_decayed"]


def test_density_grid_validation():
    cf = charfn_linear_gauss(0.0, 0.5, 0.2, Grid1D(-3.0, 5.0, 101))
    with pytest.raises(ValueError, match="symmetric"):
        density_from_charfn(cf, Grid1D(-2.0, 2.0, 101))
    good = charfn_linear_gauss(0.0, 0.5, 0.2, Grid1D(-20.0, 20.0, 201))
    with pytest.raises(TypeError):
        density_from_charfn(good, Grid2D(-1, 1, 11, -1, 1, 11))
    with pytest.raises(TypeError):
        density_from_charfn(good, np.linspace(-1, 1, 11))


def test_charfn_result_shape_check_and_exports(tmp_path):
    grid = Grid1D(-2.0, 2.0, 5)
    with pytest.raises(ValueError):
        CharFnResult(grid, np.ones(4, dtype=complex), "m", {})
    cf = charfn_linear_gauss(1.0, 0.5, 0.2, grid)
    path = tmp_path / "cf.csv"
    cf.to_csv(path)
    text = path.read_text()
    assert text.startswith("# model=linear_gauss")
    rows = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    assert rows[0] == "u,re,im"
    body = np.array([[float(v) for v in ln.split(",")] for ln in rows[1:]])
    np.testing.assert_array_equal(body[:, 0], grid.points())
    np.testing.assert_array_equal(body[:, 1], cf.point_values().real)
    d = cf.to_json_dict()
    assert d["model"] == "linear_gauss" and len(d["re"]) == 5


def test_charfn_csv_2d_has_both_coordinates(tmp_path):
    grid = Grid2D(-1.0, 1.0, 3, -1.0, 1.0, 3)
    cf = charfn_linear_gauss((0.0, 0.0), 0.5, 0.2, grid)
    path = tmp_path / "cf2.csv"
    cf.to_csv(path)
    lines = [ln for ln in path.read_text().splitlines()
             if ln and not ln.startswith("#")]
    assert lines[0] == "ux,uy,re,im"
    rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    np.testing.assert_array_equal(rows[:, :2], grid.points())
