"""Seeded Monte Carlo: ensembles of map iterations and comparison metrics.

Chains draw their noise from Philox streams jumped by chain index, so a
run is reproducible sample-for-sample no matter how the chains are
batched in memory, and any single chain can be replayed in isolation
through models.iterate.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import _io
from .models import (
    DIVERGENCE_GUARD,
    DivergenceError,
    IkedaMap,
    LinearDet,
    MapSpec,
    NoNoise,
    NoiseSpec,
    apply_map,
    map_dim,
    noise_block,
    noise_dim,
)
from .numkit import Grid1D, Grid2D, GridFunction, RngSeed, chain_generator

_BATCH_BYTES = 1 << 28
_ECF_CHUNK = 1 << 16
_MAGIC = b"DLTX0001"


@dataclass(frozen=True)
class EnsembleSpec:
    """A reproducible ensemble: what to iterate, how long, and from where."""

    map: MapSpec
    noise: NoiseSpec
    chains: int
    steps: int
    seed: RngSeed
    burn_in: int = 1000
    thin: int = 1
    x0: Optional[tuple] = None

    def __post_init__(self):
        if isinstance(self.seed, int):
            object.__setattr__(self, "seed", RngSeed(self.seed))
        if self.chains < 1:
            raise ValueError("chains must be >= 1")
        if not 0 <= self.burn_in < self.steps:
            raise ValueError("need 0 <= burn_in < steps")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        d = map_dim(self.map)
        nd = noise_dim(self.noise)
        if nd is not None and nd != d:
            raise ValueError(f"noise dimension {nd} does not match map "
                             f"dimension {d}")
        if self.x0 is not None:
            x0 = tuple(float(v) for v in np.atleast_1d(self.x0))
            if len(x0) != d:
                raise ValueError(f"x0 must have dimension {d}")
            object.__setattr__(self, "x0", x0)

    @property
    def dim(self) -> int:
        return map_dim(self.map)

    @property
    def kept_per_chain(self) -> int:
        return -((self.burn_in - self.steps) // self.thin)

    @property
    def total_samples(self) -> int:
        return self.chains * self.kept_per_chain

    def start_point(self) -> np.ndarray:
        if self.x0 is not None:
            return np.asarray(self.x0, dtype=float)
        if isinstance(self.map, LinearDet):
            return self.map.fixed_point
        if isinstance(self.map, IkedaMap):
            return np.array([1.0, 0.0])
        raise TypeError(f"no default start for {self.map!r}")


def radial_center(map_spec: MapSpec) -> np.ndarray:
    """Center used for radial statistics: the Ikeda cluster sits at 1."""
    if isinstance(map_spec, IkedaMap):
        return np.array([1.0, 0.0])
    return np.zeros(map_dim(map_spec))


@dataclass(frozen=True)
class EmpiricalSummary:
    """Immutable digest of an ensemble run; samples kept for metrics."""

    count: int
    mean: np.ndarray
    variance: np.ndarray
    center: np.ndarray
    samples: np.ndarray
    sorted_radii: np.ndarray
    hist_edges: np.ndarray
    hist_mass: np.ndarray
    hist2d: Optional[tuple] = None
    ecf: Optional[GridFunction] = None

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    def radial_cdf_at(self, r) -> np.ndarray:
        """Empirical P(|X - center| <= r), vectorized over r."""
        r = np.asarray(r, dtype=float)
        return np.searchsorted(self.sorted_radii, r, side="right") / self.count

    def to_json_dict(self) -> dict:
        out = {
            "count": self.count,
            "mean": self.mean,
            "variance": self.variance,
            "center": self.center,
            "hist_edges": self.hist_edges,
            "hist_mass": self.hist_mass,
        }
        if self.hist2d is not None:
            xe, ye, mass = self.hist2d
            out["hist2d"] = {"xedges": xe, "yedges": ye, "mass": mass}
        return out


def _fd_edges(values: np.ndarray) -> np.ndarray:
    """Freedman-Diaconis bin edges, falling back to a single wide bin for
    degenerate samples."""
    lo, hi = float(values.min()), float(values.max())
    q75, q25 = np.percentile(values, [75.0, 25.0])
    width = 2.0 * (q75 - q25) * values.size ** (-1.0 / 3.0)
    if width <= 0.0 or hi <= lo:
        span = max(hi - lo, 1.0)
        return np.array([lo - 0.5 * span, hi + 0.5 * span])
    n = min(int(math.ceil((hi - lo) / width)), 4096)
    return np.linspace(lo, hi, n + 1)


def _summarize(spec: EnsembleSpec, samples: np.ndarray,
               chain_sums: np.ndarray) -> EmpiricalSummary:
    total = samples.shape[0]
    mean = np.array([math.fsum(chain_sums[:, j]) for j in range(spec.dim)])
    mean /= total
    # second deterministic pass for the spread about the final mean
    kept = spec.kept_per_chain
    sq = np.empty((spec.chains, spec.dim))
    for c in range(spec.chains):
        block = samples[c * kept:(c + 1) * kept]
        sq[c] = np.sum((block - mean) ** 2, axis=0)
    variance = np.array([math.fsum(sq[:, j]) for j in range(spec.dim)])
    variance /= total

    center = radial_center(spec.map)
    radii = np.linalg.norm(samples - center, axis=1)
    order = np.sort(radii)
    edges = _fd_edges(radii)
    counts, _ = np.histogram(radii, bins=edges)
    hist2d = None
    if spec.dim == 2:
        xe = _fd_edges(samples[:, 0])
        ye = _fd_edges(samples[:, 1])
        c2, _, _ = np.histogram2d(samples[:, 0], samples[:, 1], bins=(xe, ye))
        hist2d = (xe, ye, c2 / total)
    return EmpiricalSummary(count=total, mean=mean, variance=variance,
                            center=center, samples=samples,
                            sorted_radii=order, hist_edges=edges,
                            hist_mass=counts / total, hist2d=hist2d)


def run_ensemble(spec: EnsembleSpec, ugrid=None,
                 batch_bytes: int = _BATCH_BYTES) -> EmpiricalSummary:
    """Iterate the ensemble and digest it.

    Chains are advanced together as array rows; the batch size only
    controls memory, never the numbers.  Kept samples are ordered by
    (chain, time).  With `ugrid` the empirical characteristic function is
    attached to the summary.
    """
    d = spec.dim
    kept = spec.kept_per_chain
    samples = np.empty((spec.chains * kept, d))
    chain_sums = np.empty((spec.chains, d))
    per_chain = max(spec.steps * d * 8, 1)
    batch = int(np.clip(batch_bytes // per_chain, 1, spec.chains))
    x0 = spec.start_point()

    for c0 in range(0, spec.chains, batch):
        c1 = min(c0 + batch, spec.chains)
        nb = [noise_block(spec.noise, chain_generator(spec.seed, c),
                          spec.steps) for c in range(c0, c1)]
        xi = None if nb[0] is None else np.stack(nb)
        x = np.tile(x0, (c1 - c0, 1))
        k = 0
        for n in range(1, spec.steps + 1):
            x = apply_map(spec.map, x)
            if xi is not None:
                x = x + xi[:, n - 1, :]
            norms = np.linalg.norm(x, axis=1)
            if (norms > DIVERGENCE_GUARD).any():
                bad = int(np.argmax(norms > DIVERGENCE_GUARD))
                raise DivergenceError(n, float(norms[bad]), chain=c0 + bad)
            if n > spec.burn_in and (n - spec.burn_in - 1) % spec.thin == 0:
                rows = np.arange(c0, c1) * kept + k
                samples[rows] = x
                k += 1
        for i in range(c0, c1):
            block = samples[i * kept:(i + 1) * kept]
            chain_sums[i] = np.sum(block, axis=0)

    summary = _summarize(spec, samples, chain_sums)
    if ugrid is not None:
        ecf = empirical_charfn(summary, ugrid)
        summary = EmpiricalSummary(**{**summary.__dict__, "ecf": ecf})
    return summary


def empirical_charfn(samples, ugrid) -> GridFunction:
    """(1/N) sum_j exp(-i <X_j, U>) on the grid; exactly 1 at U = 0."""
    if isinstance(samples, EmpiricalSummary):
        samples = samples.samples
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    n, d = samples.shape
    if n < 1000:
        raise ValueError("need at least 10^3 samples")

    if isinstance(ugrid, Grid1D):
        if d != 1:
            raise ValueError("1D grid needs 1D samples")
        u = ugrid.points()
        acc = np.zeros(u.size, dtype=complex)
        for lo in range(0, n, _ECF_CHUNK):
            x = samples[lo:lo + _ECF_CHUNK, 0]
            acc += np.exp(-1j * np.outer(x, u)).sum(axis=0)
        return GridFunction(ugrid, acc / n, info={"kind": "ecf", "count": n})
    if isinstance(ugrid, Grid2D):
        if d != 2:
            raise ValueError("2D grid needs 2D samples")
        ux = np.linspace(ugrid.xlo, ugrid.xhi, ugrid.nx)
        uy = np.linspace(ugrid.ylo, ugrid.yhi, ugrid.ny)
        acc = np.zeros((ugrid.nx, ugrid.ny), dtype=complex)
        # separable phases turn the sum into a dense matrix product
        for lo in range(0, n, _ECF_CHUNK):
            ex = np.exp(-1j * np.outer(samples[lo:lo + _ECF_CHUNK, 0], ux))
            ey = np.exp(-1j * np.outer(samples[lo:lo + _ECF_CHUNK, 1], uy))
            acc += ex.T @ ey
        return GridFunction(ugrid, acc / n, info={"kind": "ecf", "count": n})
    raise TypeError("ugrid must be Grid1D or Grid2D")


# -- comparison metrics ----------------------------------------------------


def _cf_supnorm(values: np.ndarray, grid, summary: EmpiricalSummary) -> float:
    ecf = summary.ecf
    if ecf is None or ecf.grid != grid:
        ecf = empirical_charfn(summary, grid)
    return float(np.abs(np.asarray(values) - ecf.values).max())


def _ks_radial(dens, summary: EmpiricalSummary) -> float:
    cdf = np.clip(dens.radial_cdf(), 0.0, 1.0)
    rs = summary.sorted_radii
    f_an = np.interp(rs, dens.grid.points(), cdf,
                     left=0.0, right=float(cdf[-1]))
    i = np.arange(1, rs.size + 1)
    d_plus = np.abs(i / rs.size - f_an).max()
    d_minus = np.abs((i - 1) / rs.size - f_an).max()
    return float(max(d_plus, d_minus))


def _l1_density(gf: GridFunction, summary: EmpiricalSummary) -> float:
    grid = gf.grid
    vals = np.real(gf.values)
    samples = summary.samples
    if grid.ndim == 1:
        if summary.dim != 1:
            raise ValueError("1D density against non-1D samples")
        step = grid.step
        idx = np.floor((samples[:, 0] - (grid.lo - 0.5 * step)) / step)
        inside = (idx >= 0) & (idx < grid.count)
        counts = np.bincount(idx[inside].astype(np.int64),
                             minlength=grid.count)
        emp = counts / (summary.count * step)
        l1 = float(np.abs(emp - vals).sum() * step)
    else:
        if summary.dim != 2:
            raise ValueError("2D density against non-2D samples")
        ix = np.floor((samples[:, 0] - (grid.xlo - 0.5 * grid.xstep))
                      / grid.xstep)
        iy = np.floor((samples[:, 1] - (grid.ylo - 0.5 * grid.ystep))
                      / grid.ystep)
        inside = ((ix >= 0) & (ix < grid.nx) & (iy >= 0) & (iy < grid.ny))
        flat = (ix[inside] * grid.ny + iy[inside]).astype(np.int64)
        counts = np.bincount(flat, minlength=grid.nx * grid.ny)
        area = grid.xstep * grid.ystep
        emp = counts.reshape(grid.nx, grid.ny) / (summary.count * area)
        l1 = float(np.abs(emp - vals).sum() * area)
    # mass that fell off the grid is pure discrepancy
    return l1 + float((~inside).sum()) / summary.count


def compare(analytic, empirical: EmpiricalSummary) -> dict:
    """Distance metrics between an analytic object and an ensemble.

    The analytic side picks the metric: characteristic functions give the
    sup norm of the difference, radial densities the one-sample KS
    distance on |X - center|, and gridded densities the L1 distance
    against the cell histogram.  Every metric lives in [0, 2].
    """
    from .ikeda import RadialDensity
    from .stationary import CharFnResult

    if isinstance(analytic, CharFnResult):
        return {"cf_sup": _cf_supnorm(analytic.values, analytic.grid,
                                      empirical)}
    if isinstance(analytic, RadialDensity):
        return {"ks_radial": _ks_radial(analytic, empirical)}
    if isinstance(analytic, GridFunction):
        if analytic.info.get("kind") == "ecf" or np.iscomplexobj(
                analytic.values):
            return {"cf_sup": _cf_supnorm(analytic.values, analytic.grid,
                                          empirical)}
        return {"l1_hist": _l1_density(analytic, empirical)}
    raise TypeError(f"no comparison defined for {type(analytic).__name__}")


# -- raw sample export -----------------------------------------------------


def write_samples_binary(path, samples: np.ndarray) -> None:
    """Little-endian float64 pairs after a 16-byte header (magic, count).

    1D samples are padded with a zero second component.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.shape[1] == 1:
        arr = np.column_stack([arr[:, 0], np.zeros(arr.shape[0])])
    if arr.shape[1] != 2:
        raise ValueError("binary export holds pairs; got dimension "
                         f"{arr.shape[1]}")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<Q", arr.shape[0]))
        fh.write(arr.astype("<f8").tobytes())


def read_samples_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(16)
        if len(head) != 16 or head[:8] != _MAGIC:
            raise ValueError("not a sample file (bad magic)")
        (count,) = struct.unpack("<Q", head[8:])
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != 2 * count:
        raise ValueError(f"sample file truncated: header says {count} "
                         f"pairs, found {data.size // 2}")
    return data.reshape(count, 2).astype(float)
