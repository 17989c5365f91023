"""Numerical kernel tests.

Reference values come from independent routes: mpmath/scipy for Bessel
functions and quadrature, closed-form geometric series for truncated
products.
"""
import math

import numpy as np
import pytest
import mpmath as mp
import scipy.integrate
import scipy.special

from dilatox.numkit import (
    Grid1D,
    Grid2D,
    GridFunction,
    ProductTruncation,
    QuadratureError,
    bessel_j0,
    bessel_y0,
    chain_generator,
    gaussian_sample,
    make_generator,
    quad_adaptive,
    truncated_product,
    truncated_product_grid,
    J0_FIRST_ZERO,
)

mp.mp.dps = 30

# frozen references (30-digit mpmath, rounded to float64)
J0_AT_1 = 0.7651976865579666
XJ0_INTEGRAL_TO_FIRST_ZERO = 1.2484591696955067  # = z1 * J1(z1)


# ---------------------------------------------------------------------------
# bessel_j0

def test_j0_value_at_one():
    assert abs(bessel_j0(1.0) - J0_AT_1) < 1e-15


def test_j0_accuracy_below_switch():
    xs = np.linspace(0.0, 50.0, 1501)
    ref = np.array([float(mp.besselj(0, float(v))) for v in xs])
    assert np.max(np.abs(bessel_j0(xs) - ref)) < 1e-14


def test_j0_accuracy_above_switch():
    xs = np.linspace(50.5, 400.0, 300)
    ref = scipy.special.j0(xs)
    assert np.max(np.abs(bessel_j0(xs) - ref)) < 1e-13


def test_j0_first_zero():
    # bisection on our own evaluation must reproduce the reference root
    lo, hi = 2.0, 3.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if bessel_j0(mid) > 0:
            lo = mid
        else:
            hi = mid
    assert abs(0.5 * (lo + hi) - J0_FIRST_ZERO) < 1e-12
    assert abs(J0_FIRST_ZERO - 2.404825557695773) < 1e-14


def test_j0_bounded_and_even():
    rng = np.random.default_rng(7)
    xs = rng.uniform(-200.0, 200.0, size=2000)
    vals = bessel_j0(xs)
    assert np.all(np.abs(vals) <= 1.0 + 1e-15)
    assert np.allclose(vals, bessel_j0(-xs), rtol=0, atol=1e-15)


def test_j0_scalar_and_shape():
    assert isinstance(bessel_j0(0.3), float)
    assert bessel_j0(0.0) == 1.0
    xs = np.ones((3, 4))
    assert bessel_j0(xs).shape == (3, 4)


def test_y0_against_scipy():
    xs = np.concatenate([np.linspace(0.05, 15.0, 400), np.linspace(15.0, 200.0, 400)])
    ref = scipy.special.y0(xs)
    assert np.max(np.abs(bessel_y0(xs) - ref)) < 1e-9
    with pytest.raises(ValueError):
        bessel_y0(-1.0)


# ---------------------------------------------------------------------------
# truncated products

def test_product_geometric_phase():
    # prod exp(-i 0.5^g) = exp(-i (1 - 0.5^n) / (1 - 0.5)), n = terms used
    trunc = ProductTruncation(tol=1e-12, max_terms=200)
    res = truncated_product(lambda g: np.exp(-1j * 0.5 ** g), trunc)
    assert res.converged
    closed = np.exp(-2j * (1.0 - 0.5 ** res.terms_used))
    assert abs(res.value - closed) < 1e-14
    assert abs(res.value - np.exp(-2j)) < 5 * trunc.tol


def test_product_j0_chain():
    # prod_g J0(0.5^g), frozen from a 60-term high-precision product
    trunc = ProductTruncation(tol=1e-10, max_terms=200)
    res = truncated_product(lambda g: bessel_j0(1.0 * 0.5 ** g), trunc)
    assert res.converged
    assert abs(res.value - 0.7032628699913387) < 1e-9


def test_product_flagged_on_max_terms():
    trunc = ProductTruncation(tol=1e-12, max_terms=5)
    res = truncated_product(lambda g: np.exp(-1j * 0.5 ** g), trunc)
    assert not res.converged
    assert res.terms_used == 5
    # value still returned: the 5-term partial product
    assert abs(res.value - np.exp(-1j * (2.0 - 2.0 * 0.5 ** 5))) < 1e-14


def test_product_tail_within_twice_tol():
    # once the stop rule triggers at n, extending to 2n moves the value
    # by less than 2 tol (checked for both factor families in actual use)
    for tol, term in [
        (1e-8, lambda g: np.exp(-1j * 0.5 ** g)),
        (1e-8, lambda g: bessel_j0(3.0 * 0.7 ** g)),
    ]:
        res = truncated_product(term, ProductTruncation(tol=tol, max_terms=500))
        assert res.converged
        n = res.terms_used
        full = complex(1.0)
        at_n = None
        for g in range(2 * n):
            if g == n:
                at_n = full
            full *= complex(term(g))
        assert abs(at_n - full) < 2 * tol


def test_product_grid_matches_scalar():
    trunc = ProductTruncation(tol=1e-11, max_terms=300)
    betas = np.array([0.3, 1.0, 4.0, 17.0])
    vals, used, flagged = truncated_product_grid(
        lambda g: bessel_j0(betas * 0.5 ** g) + 0j, trunc)
    assert not flagged.any()
    for i, b in enumerate(betas):
        ref = truncated_product(lambda g: bessel_j0(b * 0.5 ** g), trunc)
        assert abs(vals[i] - ref.value) < 1e-15
        assert used[i] == ref.terms_used


def test_product_grid_flags_per_point():
    trunc = ProductTruncation(tol=1e-12, max_terms=4)
    betas = np.array([1e-14, 5.0])
    vals, used, flagged = truncated_product_grid(
        lambda g: np.exp(-1j * betas * 0.5 ** g), trunc)
    assert not flagged[0] and used[0] == 0 and vals[0] == 1.0 + 0j
    assert flagged[1]


# ---------------------------------------------------------------------------
# quadrature

def test_quad_polynomial_exactness():
    # the embedded Gauss rule is exact through degree 13
    rng = np.random.default_rng(11)
    for a, b in [(0.0, 1.0), (-1.0, 1.0), (-0.9, 0.7)]:
        coeffs = rng.uniform(-2, 2, size=14)
        anti = np.polyint(coeffs)
        exact = np.polyval(anti, b) - np.polyval(anti, a)
        got = quad_adaptive(lambda x: np.polyval(coeffs, x), a, b, tol=1e-12)
        assert abs(got - exact) < 1e-13


def test_quad_x_j0_to_first_zero():
    val = quad_adaptive(lambda x: x * bessel_j0(x), 0.0, J0_FIRST_ZERO, tol=1e-12)
    assert abs(val - XJ0_INTEGRAL_TO_FIRST_ZERO) < 1e-10
    ref, _ = scipy.integrate.quad(lambda x: x * scipy.special.j0(x), 0.0, J0_FIRST_ZERO)
    assert abs(val - ref) < 1e-10


def test_quad_against_scipy_assorted():
    cases = [
        (lambda x: np.exp(-x * x), -4.0, 4.0),
        (lambda x: np.cos(40.0 * x), 0.0, float(np.pi)),
        (lambda x: np.sqrt(np.abs(x)), 0.0, 1.0),
    ]
    for f, a, b in cases:
        ref, _ = scipy.integrate.quad(f, a, b, limit=200)
        assert abs(quad_adaptive(f, a, b, tol=1e-10) - ref) < 1e-8


def test_quad_scalar_function_and_orientation():
    val = quad_adaptive(lambda x: math.exp(x), 0.0, 1.0, tol=1e-12)
    assert abs(val - (math.e - 1.0)) < 1e-12
    assert quad_adaptive(lambda x: np.exp(x), 1.0, 0.0, tol=1e-12) == pytest.approx(-(math.e - 1.0))
    assert quad_adaptive(lambda x: x, 2.0, 2.0) == 0.0


def test_quad_panel_cap_error():
    def nasty(x):
        return np.where(np.abs(x) < 1e-6, 1e6, 0.0) + np.sin(997.0 * x)

    with pytest.raises(QuadratureError) as exc:
        quad_adaptive(nasty, -1.0, 1.0, tol=1e-14, max_panels=8)
    assert np.isfinite(exc.value.best_estimate)


# ---------------------------------------------------------------------------
# random streams

def test_streams_bit_identical():
    a = make_generator(123).normal(size=64)
    b = make_generator(123).normal(size=64)
    assert np.array_equal(a, b)
    c0 = chain_generator(123, 0).normal(size=64)
    c1 = chain_generator(123, 1).normal(size=64)
    assert np.array_equal(c0, a)  # chain 0 is the master stream
    assert not np.array_equal(c0, c1)
    assert np.array_equal(c1, chain_generator(123, 1).normal(size=64))


def test_gaussian_sample_variance():
    rng = make_generator(99)
    draws = gaussian_sample(rng, R=0.2, d=2, size=1_000_000)
    assert draws.shape == (1_000_000, 2)
    v = draws.var(axis=0)
    # per-component variance R/2 = 0.1; 4-sigma band for the estimator
    tol = 4.0 * 0.1 * math.sqrt(2.0 / 1e6)
    assert np.all(np.abs(v - 0.1) < tol)
    assert np.all(np.abs(draws.mean(axis=0)) < 4.0 * math.sqrt(0.1 / 1e6))
    with pytest.raises(ValueError):
        gaussian_sample(rng, R=0.0)


# ---------------------------------------------------------------------------
# grids

def test_grid1d_basics():
    g = Grid1D(-2.0, 2.0, 5)
    assert np.allclose(g.points(), [-2, -1, 0, 1, 2])
    assert g.step == 1.0
    with pytest.raises(ValueError):
        Grid1D(1.0, 1.0, 5)
    with pytest.raises(ValueError):
        Grid1D(0.0, 1.0, 1)


def test_grid2d_basics():
    g = Grid2D(0.0, 1.0, 3, 0.0, 2.0, 5)
    assert g.size == 15
    assert g.points().shape == (15, 2)
    gx, gy = g.mesh()
    assert gx.shape == (3, 5)
    with pytest.raises(ValueError):
        Grid2D(0.0, 0.0, 3, 0.0, 1.0, 3)


def test_gridfunction_mass_and_clip():
    g = Grid1D(-8.0, 8.0, 801)
    x = g.points()
    gf = GridFunction(g, np.exp(-x * x) / math.sqrt(math.pi))
    assert abs(gf.mass() - 1.0) < 1e-9
    noisy = GridFunction(g, gf.values - 1e-4)
    assert noisy.min_value() < 0
    assert noisy.values_clipped().min() == 0.0
    with pytest.raises(ValueError):
        GridFunction(g, np.zeros(7))
