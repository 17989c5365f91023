"""Stationary characteristic functions of the solvable linear models.

For the affine contraction X' = xi + A + kappa X the stationary law
satisfies Psi(U) = g(U) e^{-i<A,U>} Psi(kappa U) with g the one-step
noise characteristic function; the three solved cases below have closed
forms or rapidly convergent infinite products.  Frequencies U live on
the same Grid1D/Grid2D types used for state-space grids.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _io
from .models import GaussianNoise, KuboAndersen, MixedNoise, NoNoise
from .numkit import (
    Grid1D,
    Grid2D,
    GridFunction,
    ProductTruncation,
    truncated_product_grid,
)


def _frequency_points(grid) -> np.ndarray:
    """Grid points as an (m, d) array."""
    if isinstance(grid, Grid1D):
        return grid.points()[:, None]
    if isinstance(grid, Grid2D):
        return grid.points()
    raise TypeError("grid must be Grid1D or Grid2D")


def _offset_vector(A, d: int) -> np.ndarray:
    a = np.atleast_1d(np.asarray(A, dtype=float))
    if a.shape != (d,):
        raise ValueError(f"offset has dimension {a.shape}, grid has {d}")
    return a


def _shape_for(grid, flat: np.ndarray) -> np.ndarray:
    if isinstance(grid, Grid2D):
        return flat.reshape(grid.nx, grid.ny)
    return flat


@dataclass(frozen=True)
class CharFnResult:
    """Characteristic-function samples on a frequency grid.

    values is complex, shaped (count,) for Grid1D and (nx, ny) for
    Grid2D.  terms_used/flagged carry per-point truncation diagnostics
    for product-form models and are None for closed forms.  params
    records the model constants plus derived stationary quantities.
    """

    grid: object
    values: np.ndarray
    model: str
    params: dict
    terms_used: np.ndarray | None = None
    flagged: np.ndarray | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        expected = ((self.grid.nx, self.grid.ny)
                    if isinstance(self.grid, Grid2D) else (self.grid.count,))
        if vals.shape != expected:
            raise ValueError(f"values shape {vals.shape}, want {expected}")
        object.__setattr__(self, "values", vals)

    def point_values(self) -> np.ndarray:
        return np.asarray(self.values).reshape(-1)

    def to_csv(self, path) -> None:
        comments = [f"model={self.model}"]
        for k in sorted(self.params):
            comments.append(f"{k}={self.params[k]}")
        pts = _frequency_points(self.grid)
        vals = self.point_values()
        if pts.shape[1] == 1:
            names = ("u", "re", "im")
            cols = (pts[:, 0], vals.real, vals.imag)
        else:
            names = ("ux", "uy", "re", "im")
            cols = (pts[:, 0], pts[:, 1], vals.real, vals.imag)
        _io.write_csv(path, comments, names, cols)

    def to_json_dict(self) -> dict:
        pts = _frequency_points(self.grid)
        vals = self.point_values()
        out = {
            "model": self.model,
            "params": dict(self.params),
            "points": pts[:, 0] if pts.shape[1] == 1 else pts,
            "re": vals.real,
            "im": vals.imag,
        }
        if self.flagged is not None:
            out["flagged_points"] = int(np.count_nonzero(self.flagged))
        return out


def noise_charfn(spec, U: np.ndarray) -> np.ndarray:
    """One-step noise characteristic function E exp(-i<xi, U>).

    U has shape (m, d).  This is the multiplier g(U) in the stationary
    scaling relation; correlated noise has no one-step multiplier and
    is rejected.
    """
    U = np.asarray(U, dtype=float)
    if isinstance(spec, NoNoise):
        return np.ones(U.shape[0], dtype=complex)
    if isinstance(spec, GaussianNoise):
        return np.exp(-0.25 * spec.R * np.sum(U * U, axis=1)) + 0j
    if isinstance(spec, KuboAndersen):
        phases = np.exp(-1j * (U @ spec.point_array.T))
        return phases @ spec.prob_array
    if isinstance(spec, MixedNoise):
        return noise_charfn(spec.gaussian, U) * noise_charfn(spec.jumps, U)
    raise ValueError(f"no one-step characteristic function for {spec!r}")


# -- closed forms -------------------------------------------------------

def linear_det_values(A, kappa: float, Upts: np.ndarray) -> np.ndarray:
    if not 0.0 < kappa < 1.0:
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")
    Upts = np.asarray(Upts, dtype=float)
    a = _offset_vector(A, Upts.shape[1])
    return np.exp(-1j * (Upts @ a) / (1.0 - kappa))


def charfn_linear_det(A, kappa: float, grid) -> CharFnResult:
    """Noise-free affine contraction: a point mass at A/(1-kappa)."""
    pts = _frequency_points(grid)
    vals = linear_det_values(A, kappa, pts)
    a = _offset_vector(A, pts.shape[1])
    fp = a / (1.0 - kappa)
    return CharFnResult(grid, _shape_for(grid, vals), "linear_det",
                        {"offset": tuple(a), "kappa": kappa,
                         "fixed_point": tuple(fp)})


def linear_gauss_values(A, kappa: float, R: float,
                        Upts: np.ndarray) -> np.ndarray:
    if R <= 0.0:
        raise ValueError(f"R must be positive, got {R}")
    Upts = np.asarray(Upts, dtype=float)
    det = linear_det_values(A, kappa, Upts)
    width = R / (1.0 - kappa * kappa)
    return det * np.exp(-0.25 * width * np.sum(Upts * Upts, axis=1))


def charfn_linear_gauss(A, kappa: float, R: float, grid) -> CharFnResult:
    """Affine contraction with additive white Gaussian noise.

    The stationary law is Gaussian: mean A/(1-kappa), width parameter
    R/(1-kappa^2) (per-component variance half of that).
    """
    pts = _frequency_points(grid)
    vals = linear_gauss_values(A, kappa, R, pts)
    a = _offset_vector(A, pts.shape[1])
    width = R / (1.0 - kappa * kappa)
    return CharFnResult(grid, _shape_for(grid, vals), "linear_gauss",
                        {"offset": tuple(a), "kappa": kappa, "R": R,
                         "mean": tuple(a / (1.0 - kappa)),
                         "width": width,
                         "per_component_variance": 0.5 * width})


def gauss_ka_values(kappa: float, R: float, ka: KuboAndersen,
                    Upts: np.ndarray, trunc: ProductTruncation | None = None):
    """Returns (values, terms_used, flagged) at arbitrary frequencies."""
    if not 0.0 < kappa < 1.0:
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")
    if R < 0.0:
        raise ValueError(f"R must be >= 0, got {R}")
    if trunc is None:
        trunc = ProductTruncation()
    Upts = np.asarray(Upts, dtype=float)
    if ka.point_array.shape[1] != Upts.shape[1]:
        raise ValueError("jump points and grid dimensions differ")

    def term(gamma: int) -> np.ndarray:
        phases = np.exp(-1j * kappa ** gamma * (Upts @ ka.point_array.T))
        return phases @ ka.prob_array

    prod, terms_used, flagged = truncated_product_grid(term, trunc)
    if R > 0.0:
        width = R / (1.0 - kappa * kappa)
        prod = prod * np.exp(-0.25 * width * np.sum(Upts * Upts, axis=1))
    return prod, terms_used, flagged


def charfn_gauss_ka(kappa: float, R: float, ka: KuboAndersen, grid,
                    trunc: ProductTruncation | None = None) -> CharFnResult:
    """Contraction driven by Gaussian plus L-state jump noise.

    The jump part contributes the infinite product over scales
    kappa^gamma of the jump characteristic function; with R = 0 the
    product alone remains and the stationary law is purely fractal.
    """
    pts = _frequency_points(grid)
    vals, terms_used, flagged = gauss_ka_values(kappa, R, ka, pts, trunc)
    params = {"kappa": kappa, "R": R,
              "jump_points": tuple(map(tuple, ka.point_array)),
              "jump_probs": tuple(ka.prob_array)}
    if R > 0.0:
        params["width"] = R / (1.0 - kappa * kappa)
    return CharFnResult(grid, _shape_for(grid, vals), "gauss_ka", params,
                        terms_used=_shape_for(grid, terms_used),
                        flagged=_shape_for(grid, flagged))


# -- density recovery ---------------------------------------------------

_BOUNDARY_DECAY = 1e-8


def _check_symmetric(lo: float, hi: float, span: float) -> None:
    if abs(lo + hi) > 1e-12 * span:
        raise ValueError("frequency grid must be symmetric about 0")


def _trap_weights(n: int) -> np.ndarray:
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    return w


def density_from_charfn(cf: CharFnResult, xgrid) -> GridFunction:
    """Invert characteristic-function samples to a density estimate.

    Plain discrete inverse transform with trapezoidal weights on the
    frequency grid, which must be uniform and symmetric about zero.
    If |values| at the grid boundary exceeds 1e-8 the transform is
    still computed but carries a decay warning (point masses and
    fractal laws have no density to recover).
    """
    grid = cf.grid
    if isinstance(grid, Grid1D):
        if not isinstance(xgrid, Grid1D):
            raise TypeError("1D characteristic function needs a 1D x grid")
        _check_symmetric(grid.lo, grid.hi, grid.hi - grid.lo)
        U = grid.points()
        vals = cf.point_values()
        boundary = max(abs(vals[0]), abs(vals[-1]))
        x = xgrid.points()
        phases = np.exp(1j * x[:, None] * U[None, :])
        dens = phases @ (_trap_weights(U.size) * vals)
        dens = dens * (grid.step / (2.0 * math.pi))
    elif isinstance(grid, Grid2D):
        if not isinstance(xgrid, Grid2D):
            raise TypeError("2D characteristic function needs a 2D x grid")
        _check_symmetric(grid.xlo, grid.xhi, grid.xhi - grid.xlo)
        _check_symmetric(grid.ylo, grid.yhi, grid.yhi - grid.ylo)
        Ux, Uy = grid.xpoints(), grid.ypoints()
        vals = np.asarray(cf.values)
        edge = np.concatenate([vals[0, :], vals[-1, :],
                               vals[:, 0], vals[:, -1]])
        boundary = np.abs(edge).max()
        weighted = vals * np.outer(_trap_weights(Ux.size),
                                   _trap_weights(Uy.size))
        Ex = np.exp(1j * xgrid.xpoints()[:, None] * Ux[None, :])
        Ey = np.exp(1j * xgrid.ypoints()[:, None] * Uy[None, :])
        dens = Ex @ weighted @ Ey.T
        dens = dens * (grid.xstep * grid.ystep / (4.0 * math.pi ** 2))
    else:
        raise TypeError("grid must be Grid1D or Grid2D")

    decayed = boundary < _BOUNDARY_DECAY
    if not decayed:
        warnings.warn(
            f"characteristic function magnitude {boundary:.3g} at the "
            "frequency-grid boundary; density estimate is unreliable "
            "(point masses and fractal laws have no density)")
    info = {"kind": "density", "model": cf.model,
            "boundary_max_abs": float(boundary),
            "boundary_decayed": bool(decayed),
            "max_imag": float(np.abs(dens.imag).max())}
    return GridFunction(xgrid, dens.real, info=info)
