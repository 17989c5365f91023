"""Shared numerical kernels: Bessel evaluation, truncated infinite products,
adaptive quadrature, grids, and reproducible random streams.

Everything downstream (characteristic functions, fractal integrals, the
chaotic-ring density) is built on the routines here, so the accuracy
contracts are deliberately tight and tested against independent references.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "Grid1D",
    "Grid2D",
    "GridFunction",
    "ProductTruncation",
    "ProductResult",
    "RngSeed",
    "QuadratureError",
    "bessel_j0",
    "bessel_y0",
    "truncated_product",
    "truncated_product_grid",
    "quad_adaptive",
    "gaussian_sample",
    "make_generator",
    "chain_generator",
]

J0_FIRST_ZERO = 2.4048255576957728


# ---------------------------------------------------------------------------
# grids

@dataclass(frozen=True)
class Grid1D:
    """Uniform closed grid on [lo, hi] with `count` points."""

    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if not (self.hi > self.lo):
            raise ValueError("Grid1D needs hi > lo")
        if self.count < 2:
            raise ValueError("Grid1D needs count >= 2")

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.count - 1)

    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)

    @property
    def ndim(self) -> int:
        return 1

    @property
    def size(self) -> int:
        return self.count


@dataclass(frozen=True)
class Grid2D:
    """Uniform rectangular grid; values on it are indexed [ix, iy]."""

    xlo: float
    xhi: float
    nx: int
    ylo: float
    yhi: float
    ny: int

    def __post_init__(self):
        if not (self.xhi > self.xlo and self.yhi > self.ylo):
            raise ValueError("Grid2D needs hi > lo on both axes")
        if self.nx < 2 or self.ny < 2:
            raise ValueError("Grid2D needs at least 2 points per axis")

    @property
    def xstep(self) -> float:
        return (self.xhi - self.xlo) / (self.nx - 1)

    @property
    def ystep(self) -> float:
        return (self.yhi - self.ylo) / (self.ny - 1)

    def xpoints(self) -> np.ndarray:
        return np.linspace(self.xlo, self.xhi, self.nx)

    def ypoints(self) -> np.ndarray:
        return np.linspace(self.ylo, self.yhi, self.ny)

    def mesh(self):
        return np.meshgrid(self.xpoints(), self.ypoints(), indexing="ij")

    def points(self) -> np.ndarray:
        """All grid points as an (nx*ny, 2) array, x-major order."""
        gx, gy = self.mesh()
        return np.column_stack([gx.ravel(), gy.ravel()])

    @property
    def ndim(self) -> int:
        return 2

    @property
    def size(self) -> int:
        return self.nx * self.ny


@dataclass
class GridFunction:
    """Sampled function on a Grid1D or Grid2D.

    `values` has shape (count,) for 1D grids and (nx, ny) for 2D grids.
    For densities recovered by quadrature, small negative ringing is kept
    in `values`; exports clip it and `min_value()` reports the raw floor.
    """

    grid: object
    values: np.ndarray
    terms_used: Optional[np.ndarray] = None
    flagged: Optional[np.ndarray] = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values)
        expected = (self.grid.count,) if self.grid.ndim == 1 else (self.grid.nx, self.grid.ny)
        if self.values.shape != expected:
            raise ValueError(f"values shape {self.values.shape} does not match grid {expected}")

    def min_value(self) -> float:
        return float(np.real(self.values).min())

    def values_clipped(self) -> np.ndarray:
        return np.clip(np.real(self.values), 0.0, None)

    def mass(self) -> float:
        """Trapezoid integral of the (real part of the) values."""
        v = np.real(self.values)
        if self.grid.ndim == 1:
            return float(trapezoid(v, self.grid.step))
        inner = np.apply_along_axis(trapezoid, 1, v, self.grid.ystep)
        return float(trapezoid(inner, self.grid.xstep))


def trapezoid(values: np.ndarray, dx: float, axis: int = -1) -> np.ndarray:
    """Plain trapezoid rule with uniform spacing."""
    v = np.moveaxis(np.asarray(values), axis, -1)
    return dx * (v[..., 0] * 0.5 + v[..., 1:-1].sum(axis=-1) + v[..., -1] * 0.5)


# ---------------------------------------------------------------------------
# Bessel functions

# J0 for |x| <= 50 is the equal-weight cosine sum over the circle,
#   J0(x) = (1/N) sum_k cos(x sin(2 pi k / N)),
# exact up to the aliased order-N Bessel tail: below 1e-20 for N = 128.
_J0_N = 128
_J0_SIN = np.sin(2.0 * np.pi * np.arange(_J0_N) / _J0_N)
_J0_SWITCH = 50.0
_J0_CHUNK = 4096

# Coefficients c_j = prod_{i<=j} (2i-1)^2 / (j! 8^j) of the large-x expansion.
_HANKEL_TERMS = 10
_HANKEL_C = [1.0]
for _j in range(1, 2 * _HANKEL_TERMS):
    _HANKEL_C.append(_HANKEL_C[-1] * (2 * _j - 1) ** 2 / (_j * 8.0))

_EULER = 0.5772156649015328606
_Y0_SWITCH = 15.0


def _j0_small(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    for start in range(0, x.size, _J0_CHUNK):
        blk = x[start:start + _J0_CHUNK]
        out[start:start + _J0_CHUNK] = np.cos(np.multiply.outer(blk, _J0_SIN)).mean(axis=-1)
    return out


def _hankel_pq(x: np.ndarray):
    inv2 = 1.0 / (x * x)
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    pk = np.ones_like(x)
    for k in range(_HANKEL_TERMS):
        c2k = _HANKEL_C[2 * k]
        c2k1 = _HANKEL_C[2 * k + 1]
        sgn = -1.0 if k % 2 else 1.0
        p += sgn * c2k * pk
        q += -sgn * c2k1 * pk / x
        pk = pk * inv2
    return p, q


def _j0_large(x: np.ndarray) -> np.ndarray:
    p, q = _hankel_pq(x)
    th = x - 0.25 * np.pi
    return np.sqrt(2.0 / (np.pi * x)) * (p * np.cos(th) - q * np.sin(th))


def bessel_j0(x):
    """Bessel function J0, elementwise.

    Parameters
    ----------
    x : float or array_like
        Real argument(s).

    Returns
    -------
    float or ndarray
        J0(x); absolute error below 1e-14 for |x| <= 50 and relative
        error at machine level beyond.
    """
    scalar = np.isscalar(x) or np.ndim(x) == 0
    ax = np.abs(np.asarray(x, dtype=float).ravel())
    out = np.empty_like(ax)
    small = ax <= _J0_SWITCH
    if small.any():
        out[small] = _j0_small(ax[small])
    if (~small).any():
        out[~small] = _j0_large(ax[~small])
    if scalar:
        return float(out[0])
    return out.reshape(np.shape(x))


def _y0_series(x: np.ndarray, terms: int = 80) -> np.ndarray:
    q = x * x / 4.0
    term = np.ones_like(x)
    j0 = np.ones_like(x)
    s = np.zeros_like(x)
    h = 0.0
    for k in range(1, terms):
        term = term * (-q) / (k * k)
        j0 += term
        h += 1.0 / k
        s -= term * h
    return (2.0 / np.pi) * ((np.log(x / 2.0) + _EULER) * j0 + s)


def _y0_large(x: np.ndarray) -> np.ndarray:
    p, q = _hankel_pq(x)
    th = x - 0.25 * np.pi
    return np.sqrt(2.0 / (np.pi * x)) * (p * np.sin(th) + q * np.cos(th))


def bessel_y0(x):
    """Bessel function Y0 for x > 0 (diagnostic accuracy, ~1e-10)."""
    scalar = np.isscalar(x) or np.ndim(x) == 0
    ax = np.asarray(x, dtype=float).ravel()
    if (ax <= 0).any():
        raise ValueError("bessel_y0 requires x > 0")
    out = np.empty_like(ax)
    small = ax <= _Y0_SWITCH
    if small.any():
        out[small] = _y0_series(ax[small])
    if (~small).any():
        out[~small] = _y0_large(ax[~small])
    if scalar:
        return float(out[0])
    return out.reshape(np.shape(x))


# ---------------------------------------------------------------------------
# truncated infinite products

@dataclass(frozen=True)
class ProductTruncation:
    """Stop rule for infinite products: quit at the first factor within
    tol of 1, or flag the result when max_terms factors were not enough."""

    tol: float = 1e-12
    max_terms: int = 500

    def __post_init__(self):
        if not (0.0 < self.tol < 1.0):
            raise ValueError("tol must be in (0, 1)")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


@dataclass(frozen=True)
class ProductResult:
    value: complex
    terms_used: int
    converged: bool


def truncated_product(term: Callable[[int], complex],
                      trunc: ProductTruncation = ProductTruncation()) -> ProductResult:
    """Evaluate prod_{g=0..n-1} term(g), n = first index with |term(n)-1| < tol.

    The caller guarantees |term(g) - 1| is eventually monotonically
    decreasing; a factor that lands within tol of 1 before the tail has
    genuinely settled would truncate early.
    """
    value = complex(1.0)
    for g in range(trunc.max_terms):
        t = complex(term(g))
        if abs(t - 1.0) < trunc.tol:
            return ProductResult(value, g, True)
        value *= t
    return ProductResult(value, trunc.max_terms, False)


def truncated_product_grid(term: Callable[[int], np.ndarray],
                           trunc: ProductTruncation = ProductTruncation()):
    """Vectorized truncated product: term(g) returns one factor per grid
    point and each point stops at its own first in-tolerance factor.

    Returns (values, terms_used, flagged) arrays.
    """
    t0 = np.asarray(term(0))
    value = np.ones(t0.shape, dtype=complex)
    terms_used = np.zeros(t0.shape, dtype=np.int64)
    active = np.ones(t0.shape, dtype=bool)
    g = 0
    t = t0
    while True:
        done = active & (np.abs(t - 1.0) < trunc.tol)
        active &= ~done
        if not active.any():
            break
        value[active] = value[active] * t[active]
        g += 1
        terms_used[active] = g
        if g >= trunc.max_terms:
            break
        t = np.asarray(term(g))
    return value, terms_used, active.copy()


# ---------------------------------------------------------------------------
# adaptive quadrature (15-point Kronrod rule with embedded 7-point Gauss)

_GK_X = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
])
_GK_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979,
    0.022935322010529,
])
_GK_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
    0.381830050505119, 0.279705391489277, 0.129484966168870,
])


class QuadratureError(RuntimeError):
    """Raised when adaptive subdivision hits its panel cap; carries the
    best available estimate."""

    def __init__(self, message: str, best_estimate: float):
        super().__init__(message)
        self.best_estimate = best_estimate


def _eval_vectorized(f, xs: np.ndarray) -> np.ndarray:
    try:
        ys = np.asarray(f(xs), dtype=float)
        if ys.shape == xs.shape:
            return ys
    except (TypeError, ValueError):
        pass
    return np.array([float(f(v)) for v in xs], dtype=float)


def quad_adaptive(f, a: float, b: float, tol: float = 1e-10,
                  max_panels: int = 4096) -> float:
    """Adaptive panel integration of f over [a, b] to absolute tolerance tol.

    Bisects panels whose Gauss/Kronrod discrepancy exceeds their share of
    the budget; the embedded Gauss rule is exact through polynomial degree
    13, so smooth integrands converge in very few panels.  f may be either
    vectorized over ndarrays or a plain scalar function.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if a > b:
        a, b = b, a
        sign = -1.0

    lefts = np.array([a])
    rights = np.array([b])

    def rule(lo, hi):
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        xs = mid[:, None] + half[:, None] * _GK_X[None, :]
        ys = _eval_vectorized(f, xs.ravel()).reshape(xs.shape)
        k15 = (ys @ _GK_WK) * half
        g7 = (ys[:, 1::2] @ _GK_WG) * half
        resabs = (np.abs(ys) @ _GK_WK) * half
        return k15, np.abs(k15 - g7), resabs

    vals, errs, resabs = rule(lefts, rights)
    span = b - a
    # the Gauss/Kronrod discrepancy cannot drop below roundoff of the
    # accumulated |f| mass, so the target is floored there
    while errs.sum() > max(tol, 50.0 * np.finfo(float).eps * resabs.sum()):
        budget = tol * (rights - lefts) / span
        split = errs > budget
        if not split.any():
            split = errs == errs.max()
        if len(lefts) + split.sum() > max_panels:
            best = sign * math.fsum(vals)
            raise QuadratureError(
                f"quad_adaptive exceeded {max_panels} panels (err {errs.sum():.3e})",
                best)
        mids = 0.5 * (lefts[split] + rights[split])
        new_lo = np.concatenate([lefts[~split], lefts[split], mids])
        new_hi = np.concatenate([rights[~split], mids, rights[split]])
        order = np.argsort(new_lo, kind="stable")
        lefts, rights = new_lo[order], new_hi[order]
        vals, errs, resabs = rule(lefts, rights)
    return sign * math.fsum(vals)


# ---------------------------------------------------------------------------
# random streams

@dataclass(frozen=True)
class RngSeed:
    """64-bit master seed; all randomness in a run flows from it."""

    seed: int

    def __post_init__(self):
        if not (0 <= self.seed < 2 ** 64):
            raise ValueError("seed must fit in 64 bits")


def _seed_value(seed) -> int:
    return seed.seed if isinstance(seed, RngSeed) else int(seed)


def make_generator(seed) -> np.random.Generator:
    """Counter-based generator for the master stream of `seed`."""
    return np.random.Generator(np.random.Philox(key=_seed_value(seed)))


def chain_generator(seed, chain: int) -> np.random.Generator:
    """Independent stream for chain number `chain` of the same master seed.

    Chain c uses the master Philox stream jumped ahead by c blocks, so
    parallel chains are reproducible and scheduling-independent.
    """
    if chain < 0:
        raise ValueError("chain index must be >= 0")
    bg = np.random.Philox(key=_seed_value(seed))
    if chain:
        bg = bg.jumped(chain)
    return np.random.Generator(bg)


def gaussian_sample(rng: np.random.Generator, R: float, d: int = 1,
                    size: Optional[int] = None) -> np.ndarray:
    """Draw from the isotropic density (pi R)^(-d/2) exp(-|X|^2 / R).

    Per-component variance is R/2.  Returns shape (d,) or (size, d).
    """
    if R <= 0:
        raise ValueError("R must be positive")
    shape = (d,) if size is None else (size, d)
    return rng.normal(0.0, math.sqrt(R / 2.0), size=shape)
