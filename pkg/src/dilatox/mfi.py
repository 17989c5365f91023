"""Integrals of smooth functions against self-similar weighted measures.

The measure lives on a Cantor-like set built from a branching recursion:
a generation-n point is determined by a signature (s_1, ..., s_n) with
each s_j drawn from the shifted level set, and carries a product weight.
Generation-n quadratures converge geometrically in n, and the measure's
Fourier transform satisfies a one-step scaling identity that is checked
in the tests rather than assumed.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _io
from .numkit import (
    Grid1D,
    GridFunction,
    ProductTruncation,
    _GK_WG,
    _GK_WK,
    _GK_X,
    quad_adaptive,
    truncated_product_grid,
)

_BLOCK_LIMIT = 1 << 16        # points generated per streamed block
_MATERIALIZE_LIMIT = 1 << 24  # refuse to build single arrays past this

_NORM_TOL = 1e-12


class NormalizationError(ValueError):
    """Weight sum does not match the branch count."""


@dataclass(frozen=True)
class FractalSpec:
    """Branching recursion defining a weighted self-similar measure.

    levels must be strictly increasing with levels[0] == 0 and
    levels[-1] == 1; anchor is the accumulation point of the coarse
    recursion and must sit strictly inside (0, 1).  weights may be
    complex; unless unchecked=True their sum must equal the branch
    count (the condition under which generation sums are normalized).
    """

    kappa: float
    anchor: float
    levels: tuple = (0.0, 1.0)
    weights: tuple = (1.0, 1.0)
    unchecked: bool = False
    normalization_defect: float = field(init=False, default=0.0)

    def __post_init__(self):
        if not 0.0 < self.kappa < 1.0:
            raise ValueError(f"kappa must lie in (0, 1), got {self.kappa}")
        levels = tuple(float(v) for v in self.levels)
        weights = tuple(complex(w) for w in self.weights)
        if len(levels) < 2:
            raise ValueError("need at least two levels")
        if len(weights) != len(levels):
            raise ValueError("levels and weights must have equal length")
        if levels[0] != 0.0 or levels[-1] != 1.0:
            raise ValueError("levels must start at 0 and end at 1")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError("levels must be strictly increasing")
        if not 0.0 < self.anchor < 1.0:
            raise ValueError(f"anchor must lie in (0, 1), got {self.anchor}")
        defect = abs(sum(weights) - len(weights))
        if defect > _NORM_TOL and not self.unchecked:
            raise NormalizationError(
                f"weight sum defect {defect:.3e}; pass unchecked=True to "
                "proceed anyway (generation sums then drift by the defect)")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "normalization_defect", defect)

    @property
    def branches(self) -> int:
        return len(self.levels)

    @property
    def shifted_levels(self) -> np.ndarray:
        return np.array(self.levels, dtype=float) - self.anchor

    @property
    def weight_array(self) -> np.ndarray:
        return np.array(self.weights, dtype=complex)

    def point_count(self, n: int) -> int:
        return self.branches ** n


def weight_bound(spec: FractalSpec):
    """(G1, G): mean absolute weight and its floor at 1.

    G controls the geometric tail of generation sums; see
    cauchy_tail_bound.
    """
    g1 = float(np.abs(spec.weight_array).sum() / spec.branches)
    return g1, max(g1, 1.0)


def cauchy_tail_bound(deriv_bound: float, growth: float, kappa: float,
                      n: int) -> float:
    """Upper bound on |sigma_m - sigma_n| for all m >= n.

    Valid for integrands f with |f^(l)(x)| < deriv_bound for every
    derivative order l at once, and for normalized weight systems with
    mean absolute weight at most growth (>= 1).  The bound is
    2 * M * e^G * (e^(G kappa^n) - 1) with M = deriv_bound and
    G = max(growth, 1), geometric in n.
    """
    g = max(float(growth), 1.0)
    return 2.0 * float(deriv_bound) * math.exp(g) * math.expm1(g * kappa ** n)


def _signature_blocks(spec: FractalSpec, n: int, kappas,
                      block_limit: int = _BLOCK_LIMIT):
    """Yield (offsets, theta) blocks over all L^n signatures.

    offsets is a tuple with one array per entry of kappas; entry a holds
    (1 - kappas[a]) * sum_j kappas[a]^(j-1) * s_j for each signature in
    the block.  theta holds the matching weight products.  Signatures
    are enumerated lexicographically (first component slowest), block
    boundaries fall on whole prefix subtrees, and the block layout
    depends only on n, so consumers summing blocks in order are
    deterministic regardless of how blocks are dispatched.
    """
    L = spec.branches
    sbar = spec.shifted_levels
    w = spec.weight_array
    if n == 0:
        yield tuple(np.zeros(1) for _ in kappas), np.ones(1, dtype=complex)
        return
    m = n
    while L ** m > block_limit:
        m -= 1
    p = n - m  # prefix depth enumerated python-side

    # suffix cores: depth-m sums with the per-axis kappa weighting,
    # built once and reused (scaled) under every prefix
    cores = []
    for kap in kappas:
        core = np.zeros(1)
        for j in range(1, m + 1):
            core = (core[:, None]
                    + (1.0 - kap) * kap ** (j - 1) * sbar[None, :]).ravel()
        cores.append(core)
    theta_core = np.ones(1, dtype=complex)
    for _ in range(m):
        theta_core = (theta_core[:, None] * w[None, :]).ravel()

    if p == 0:
        yield tuple(cores), theta_core
        return
    scaled = [core * kap ** p for core, kap in zip(cores, kappas)]
    for sig in np.ndindex(*([L] * p)):
        offs = []
        for kap, suff in zip(kappas, scaled):
            pre = sum((1.0 - kap) * kap ** (j - 1) * sbar[sig[j - 1]]
                      for j in range(1, p + 1))
            offs.append(pre + suff)
        th = theta_core
        for idx in sig:
            th = th * w[idx]
        yield tuple(offs), th


def _blocks(spec: FractalSpec, n: int, block_limit: int = _BLOCK_LIMIT):
    """Yield (points, theta) blocks: points = anchor + depth-n offsets."""
    for (off,), theta in _signature_blocks(spec, n, (spec.kappa,),
                                           block_limit):
        yield spec.anchor + off, theta


def _cfsum(parts) -> complex:
    parts = list(parts)
    return complex(math.fsum(p.real for p in parts),
                   math.fsum(p.imag for p in parts))


class WeightedPointSet:
    """Generation-n point cloud with its weights, streamed in blocks."""

    def __init__(self, spec: FractalSpec, n: int):
        if n < 0:
            raise ValueError("generation must be >= 0")
        self.spec = spec
        self.n = int(n)
        self.count = spec.point_count(n)

    def blocks(self, block_limit: int = _BLOCK_LIMIT):
        return _blocks(self.spec, self.n, block_limit)

    def _materialize(self):
        if self.count > _MATERIALIZE_LIMIT:
            raise ValueError(
                f"{self.count} points exceed the materialization limit "
                f"{_MATERIALIZE_LIMIT}; iterate over blocks() instead")
        pts = np.empty(self.count)
        th = np.empty(self.count, dtype=complex)
        pos = 0
        for lam, theta in self.blocks():
            pts[pos:pos + lam.size] = lam
            th[pos:pos + lam.size] = theta
            pos += lam.size
        return pts, th

    def points(self) -> np.ndarray:
        return self._materialize()[0]

    def weights(self) -> np.ndarray:
        return self._materialize()[1]

    def normalization(self) -> complex:
        """L^-n sum of weight products; 1 for checked weight systems."""
        scale = 1.0 / self.spec.point_count(self.n)
        return _cfsum(np.sum(theta) for _, theta in self.blocks()) * scale

    def to_csv(self, path) -> None:
        comments = [
            f"generation={self.n} branches={self.spec.branches} "
            f"kappa={_io.fmt_float(self.spec.kappa)} "
            f"anchor={_io.fmt_float(self.spec.anchor)}",
        ]
        pts, th = self._materialize()
        _io.write_csv(path, comments, ("lambda", "weight_re", "weight_im"),
                      (pts, th.real, th.imag))


def prefractal(spec: FractalSpec, n: int) -> WeightedPointSet:
    """The generation-n approximant of the limit set."""
    return WeightedPointSet(spec, n)


def _vectorize(f):
    def call(x: np.ndarray) -> np.ndarray:
        try:
            y = np.asarray(f(x), dtype=complex)
        except Exception:
            return np.array([complex(f(float(v))) for v in x])
        if y.shape == x.shape:
            return y
        if y.ndim == 0:  # constant integrand
            return np.full(x.shape, complex(y))
        return np.array([complex(f(float(v))) for v in x])
    return call


@dataclass(frozen=True)
class MfiResult:
    """Converged (or best-effort) generation sequence for one integrand."""

    value: complex
    n_final: int
    cauchy_gap: float
    tail_bound: float | None
    converged: bool
    trace: tuple
    defect: float

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "n_final": self.n_final,
            "cauchy_gap": self.cauchy_gap,
            "tail_bound": self.tail_bound,
            "converged": self.converged,
            "trace": list(self.trace),
            "defect": self.defect,
        }


def _generation_sum(spec: FractalSpec, n: int, block_eval,
                    threads: int | None) -> complex:
    """L^-n sum of theta * block_eval(points), deterministic in order."""
    scale = 1.0 / spec.point_count(n)
    blocks = _blocks(spec, n)
    if threads is not None and threads > 1:
        def one(block):
            lam, theta = block
            return np.sum(theta * block_eval(lam))
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(one, blocks))
    else:
        partials = [np.sum(theta * block_eval(lam)) for lam, theta in blocks]
    return _cfsum(partials) * scale


def mfi_eval(spec: FractalSpec, f, *, tol: float = 1e-10, n_max: int = 24,
             deriv_bound: float | None = None,
             threads: int | None = None) -> MfiResult:
    """Integrate f against the limit measure by deepening generations.

    Stops at the first n with |sigma_n - sigma_(n-1)| < tol; when
    deriv_bound is given the a-priori tail bound must also drop below
    tol, and the certified bound is reported.  A non-convergent run
    (n_max generations exhausted) returns converged=False rather than
    raising, since divergent weight systems are legitimate objects of
    study.
    """
    fv = _vectorize(f)
    g1, g = weight_bound(spec)
    trace = []
    gap = math.inf
    for n in range(1, n_max + 1):
        sigma = _generation_sum(spec, n, fv, threads)
        if trace:
            gap = abs(sigma - trace[-1])
        trace.append(sigma)
        if n >= 2 and gap < tol:
            if deriv_bound is None:
                return MfiResult(sigma, n, gap, None, True, tuple(trace),
                                 spec.normalization_defect)
            bound = cauchy_tail_bound(deriv_bound, g, spec.kappa, n)
            if bound < tol:
                return MfiResult(sigma, n, gap, bound, True, tuple(trace),
                                 spec.normalization_defect)
    bound = (None if deriv_bound is None else
             cauchy_tail_bound(deriv_bound, g, spec.kappa, n_max))
    return MfiResult(trace[-1], n_max, gap, bound, False, tuple(trace),
                     spec.normalization_defect)


# -- Fourier transform of the measure ---------------------------------

def measure_charfn_values(spec: FractalSpec, omegas, trunc=None):
    """Transform values at arbitrary frequencies.

    Returns (values, terms_used, flagged).  Computed as the phase
    e^(-i omega anchor) times the truncated product over scales gamma
    of the mean weighted phase factor at frequency omega (1-kappa)
    kappa^gamma.
    """
    if trunc is None:
        trunc = ProductTruncation()
    om = np.atleast_1d(np.asarray(omegas, dtype=float))
    sbar = spec.shifted_levels
    w = spec.weight_array
    L = spec.branches

    def term(gamma: int, x: np.ndarray) -> np.ndarray:
        phase = x[:, None] * (1.0 - spec.kappa) * spec.kappa ** gamma
        return np.exp(-1j * phase * sbar[None, :]) @ w / L

    prod, terms_used, flagged = truncated_product_grid(
        lambda gamma: term(gamma, om), trunc)
    values = np.exp(-1j * om * spec.anchor) * prod
    return values, terms_used, flagged


def measure_charfn(spec: FractalSpec, omega_grid: Grid1D,
                   trunc=None) -> GridFunction:
    values, terms_used, flagged = measure_charfn_values(
        spec, omega_grid.points(), trunc)
    return GridFunction(omega_grid, values, terms_used=terms_used,
                        flagged=flagged,
                        info={"kind": "measure_charfn",
                              "kappa": spec.kappa, "anchor": spec.anchor})


def dilatation_factor(spec: FractalSpec, omegas) -> np.ndarray:
    """g(omega) with transform(omega) = g(omega) * transform(kappa omega)."""
    om = np.atleast_1d(np.asarray(omegas, dtype=float))
    shifted = spec.anchor + spec.shifted_levels
    phases = np.exp(-1j * om[:, None] * (1.0 - spec.kappa)
                    * shifted[None, :])
    return phases @ spec.weight_array / spec.branches


# -- box (cell-averaged) variant ---------------------------------------

def _require_binary_unit(spec: FractalSpec, op: str) -> None:
    if spec.branches != 2 or spec.levels != (0.0, 1.0):
        raise ValueError(f"{op} requires the two-branch unit level set")


def _cell_averages(fv, centers: np.ndarray, width: float,
                   tol_cell: float) -> np.ndarray:
    """Mean of f over [c - w/2, c + w/2] for every center, to tol_cell."""
    half = 0.5 * width
    nodes = centers[:, None] + half * _GK_X[None, :]
    vals = fv(nodes.ravel()).reshape(nodes.shape)
    k15 = vals @ _GK_WK * half
    g7 = vals[:, 1::2] @ _GK_WG * half
    err = np.abs(k15 - g7)
    avg = k15 / width
    bad = np.nonzero(err > tol_cell)[0]
    for i in bad:
        a = float(centers[i]) - half
        b = float(centers[i]) + half
        re = quad_adaptive(lambda x: fv(np.atleast_1d(x)).real, a, b,
                           tol=0.5 * tol_cell)
        im = quad_adaptive(lambda x: fv(np.atleast_1d(x)).imag, a, b,
                           tol=0.5 * tol_cell)
        avg[i] = complex(re, im) / width
    return avg


def mfi_box_eval(spec: FractalSpec, f, *, tol: float = 1e-10,
                 n_max: int = 24, quad_tol: float | None = None) -> MfiResult:
    """Integrate f using cell averages instead of point values.

    Each generation-n point is replaced by the mean of f over its cell
    of width kappa^n, which matches the limit integral to the same
    geometric accuracy while also smoothing integrands with singular
    derivatives.  Requires the two-branch unit level set with disjoint
    cells (kappa < 1/2); the balanced case kappa = 1/2 makes cells
    touch and is rejected.
    """
    _require_binary_unit(spec, "mfi_box_eval")
    if spec.kappa >= 0.5:
        raise ValueError("cell averaging needs kappa < 1/2 (disjoint cells)")
    if quad_tol is None:
        quad_tol = tol
    fv = _vectorize(f)
    trace = []
    gap = math.inf
    for n in range(1, n_max + 1):
        width = spec.kappa ** n
        scale = 1.0 / spec.point_count(n)
        tol_cell = quad_tol * scale
        partials = []
        for lam, theta in _blocks(spec, n):
            avg = _cell_averages(fv, lam, width, tol_cell)
            partials.append(np.sum(theta * avg))
        sigma = _cfsum(partials) * scale
        if trace:
            gap = abs(sigma - trace[-1])
        trace.append(sigma)
        if n >= 2 and gap < tol:
            return MfiResult(sigma, n, gap, None, True, tuple(trace),
                             spec.normalization_defect)
    return MfiResult(trace[-1], n_max, gap, None, False, tuple(trace),
                     spec.normalization_defect)


# -- planar variant -----------------------------------------------------

_GL12_X, _GL12_W = np.polynomial.legendre.leggauss(12)


def mfi_2d_eval(spec: FractalSpec, kappa_x: float, kappa_y: float, f2, *,
                tol: float = 1e-10, n_max: int = 20) -> MfiResult:
    """Integrate f2(x, y) against the planar product-form measure.

    Both axes share the same branch signature; axis a contracts at its
    own rate kappa_a.  Cell averages use a tensor Gauss rule on the
    kappa_x^n by kappa_y^n cell.  At least one rate must be <= 1/2 so
    that the construction stays within the disjoint/touching regime.
    """
    _require_binary_unit(spec, "mfi_2d_eval")
    for name, kap in (("kappa_x", kappa_x), ("kappa_y", kappa_y)):
        if not 0.0 < kap < 1.0:
            raise ValueError(f"{name} must lie in (0, 1), got {kap}")
    if min(kappa_x, kappa_y) > 0.5:
        raise ValueError("need min(kappa_x, kappa_y) <= 1/2")

    def f2v(x, y):
        shape = np.broadcast_shapes(x.shape, y.shape)
        try:
            z = np.asarray(f2(x, y), dtype=complex)
            # integrands ignoring an axis come back with a collapsed
            # shape; views broadcast back at no cost
            if np.broadcast_shapes(z.shape, shape) == shape:
                return np.broadcast_to(z, shape)
        except Exception:
            pass
        xb = np.broadcast_to(x, shape)
        yb = np.broadcast_to(y, shape)
        flat = [complex(f2(float(a), float(b)))
                for a, b in zip(xb.ravel(), yb.ravel())]
        return np.array(flat).reshape(shape)

    wq = _GL12_W
    pair_w = 0.25 * wq[:, None] * wq[None, :]
    trace = []
    gap = math.inf
    for n in range(1, n_max + 1):
        hx = 0.5 * kappa_x ** n
        hy = 0.5 * kappa_y ** n
        partials = []
        for (offx, offy), theta in _signature_blocks(
                spec, n, (kappa_x, kappa_y), block_limit=1 << 12):
            cx = spec.anchor + offx
            cy = spec.anchor + offy
            xn = cx[:, None, None] + hx * _GL12_X[None, :, None]
            yn = cy[:, None, None] + hy * _GL12_X[None, None, :]
            vals = f2v(xn, yn)
            avg = np.einsum("cij,ij->c", vals, pair_w)
            partials.append(np.sum(theta * avg))
        sigma = _cfsum(partials) / spec.point_count(n)
        if trace:
            gap = abs(sigma - trace[-1])
        trace.append(sigma)
        if n >= 2 and gap < tol:
            return MfiResult(sigma, n, gap, None, True, tuple(trace),
                             spec.normalization_defect)
    return MfiResult(trace[-1], n_max, gap, None, False, tuple(trace),
                     spec.normalization_defect)


# -- dimensions ---------------------------------------------------------

@dataclass(frozen=True)
class Dimensions:
    """Similarity dimensions of the axis sets and the planar graph."""

    axis_x: float | None
    axis_y: float | None
    planar: float | None


def dimensions(kappa_x: float, kappa_y: float = 0.5) -> Dimensions:
    """Closed-form dimensions for the two-branch construction.

    An axis contracting at rate kappa has dimension -1 / log2(kappa)
    when kappa <= 1/2 (branches disjoint or touching); for kappa > 1/2
    branches overlap and the formula does not apply (None).  The planar
    value 2 / (1 - log2(kappa_x)) holds when kappa_y == 1/2 exactly.
    """
    def axis(kap):
        if not 0.0 < kap < 1.0:
            raise ValueError(f"rate must lie in (0, 1), got {kap}")
        if kap > 0.5:
            return None
        return -1.0 / math.log2(kap)

    dx = axis(kappa_x)
    dy = axis(kappa_y)
    planar = None
    if kappa_y == 0.5 and kappa_x <= 0.5:
        planar = 2.0 / (1.0 - math.log2(kappa_x))
    return Dimensions(dx, dy, planar)


def box_counting_dimension(points: np.ndarray, box_sizes) -> float:
    """log-log slope of occupied-box counts against 1/size."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    sizes = np.asarray(box_sizes, dtype=float)
    if sizes.size < 2:
        raise ValueError("need at least two box sizes")
    counts = []
    for eps in sizes:
        cells = np.floor(pts / eps).astype(np.int64)
        counts.append(len(np.unique(cells, axis=0)))
    slope = np.polyfit(np.log(1.0 / sizes), np.log(counts), 1)[0]
    return float(slope)


def singular_measure_approx(spec: FractalSpec, n: int, grid: Grid1D,
                            width: float) -> GridFunction:
    """Gaussian-mollified generation-n measure on a grid.

    Each weighted point contributes a normal bump of the given width;
    the result integrates (trapezoid) to ~normalization() once the grid
    covers the support with a few points per bump.
    """
    if width <= 0.0:
        raise ValueError("width must be positive")
    x = grid.points()
    dens = np.zeros(x.size, dtype=complex)
    norm = 1.0 / (width * math.sqrt(2.0 * math.pi) * spec.point_count(n))
    for lam, theta in _blocks(spec, n, block_limit=1 << 12):
        z = (x[None, :] - lam[:, None]) / width
        dens += theta @ np.exp(-0.5 * z * z)
    values = dens * norm
    if np.abs(values.imag).max() < 1e-15 * max(np.abs(values.real).max(), 1.0):
        values = values.real
    return GridFunction(grid, values,
                        info={"kind": "singular_measure_approx",
                              "generation": n, "width": width})
