"""Map and noise descriptors for the stochastic recursion

    X_{N+1} = xi_N + F(X_N)

together with single-step application, noise sampling, and streaming
iteration.  States are flat real vectors of length d; the planar Ikeda
map treats d = 2 as the complex plane.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

import numpy as np

__all__ = [
    "LinearDet",
    "IkedaMap",
    "NoNoise",
    "GaussianNoise",
    "KuboAndersen",
    "OrnsteinUhlenbeck",
    "MixedNoise",
    "DivergenceError",
    "apply_map",
    "map_dim",
    "noise_dim",
    "sample_noise",
    "noise_block",
    "iterate",
]

DIVERGENCE_GUARD = 1e12


class DivergenceError(RuntimeError):
    """Trajectory left the |X| <= guard ball; `step` is where it happened.

    Ensemble runs also record which chain diverged in `chain`.
    """

    def __init__(self, step: int, norm: float, chain: "Optional[int]" = None):
        where = f"step {step}" if chain is None else f"chain {chain}, step {step}"
        super().__init__(f"trajectory diverged at {where} (|X| = {norm:.3e})")
        self.step = step
        self.chain = chain


# ---------------------------------------------------------------------------
# maps

@dataclass(frozen=True)
class LinearDet:
    """F(X) = offset + kappa * X with contraction 0 < kappa < 1."""

    offset: tuple
    kappa: float

    def __post_init__(self):
        off = np.atleast_1d(np.asarray(self.offset, dtype=float))
        object.__setattr__(self, "offset", tuple(off.tolist()))
        if not (0.0 < self.kappa < 1.0):
            raise ValueError("kappa must lie in (0, 1)")

    @property
    def offset_vector(self) -> np.ndarray:
        return np.asarray(self.offset, dtype=float)

    @property
    def fixed_point(self) -> np.ndarray:
        return self.offset_vector / (1.0 - self.kappa)


@dataclass(frozen=True)
class IkedaMap:
    """Planar map F(X) = 1 + kappa * X * exp(i (lam |X|^2 + theta0))."""

    kappa: float
    lam: float
    theta0: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.kappa < 1.0):
            raise ValueError("kappa must lie in (0, 1)")


MapSpec = Union[LinearDet, IkedaMap]


def map_dim(spec: MapSpec) -> int:
    if isinstance(spec, LinearDet):
        return len(spec.offset)
    if isinstance(spec, IkedaMap):
        return 2
    raise TypeError(f"not a map spec: {spec!r}")


def _ikeda_complex(spec: IkedaMap, z: np.ndarray) -> np.ndarray:
    return 1.0 + spec.kappa * z * np.exp(1j * (spec.lam * (z.real ** 2 + z.imag ** 2)
                                               + spec.theta0))


def apply_map(spec: MapSpec, x):
    """Apply F once.  Accepts shape (d,) or (m, d) real states; the Ikeda
    map additionally accepts complex scalars/arrays and returns the same."""
    if isinstance(spec, LinearDet):
        x = np.asarray(x, dtype=float)
        return spec.offset_vector + spec.kappa * x
    if isinstance(spec, IkedaMap):
        if np.iscomplexobj(x) or np.isscalar(x):
            return _ikeda_complex(spec, np.asarray(x, dtype=complex))
        x = np.asarray(x, dtype=float)
        z = x[..., 0] + 1j * x[..., 1]
        w = _ikeda_complex(spec, z)
        return np.stack([w.real, w.imag], axis=-1)
    raise TypeError(f"not a map spec: {spec!r}")


# ---------------------------------------------------------------------------
# noises

@dataclass(frozen=True)
class NoNoise:
    """Deterministic recursion."""


@dataclass(frozen=True)
class GaussianNoise:
    """White noise with density (pi R)^(-d/2) exp(-|X|^2/R)."""

    R: float
    d: int = 1

    def __post_init__(self):
        if self.R <= 0:
            raise ValueError("R must be positive")
        if self.d < 1:
            raise ValueError("d must be >= 1")


@dataclass(frozen=True)
class KuboAndersen:
    """Jump noise over a finite point set with fixed probabilities."""

    points: tuple
    probs: tuple

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:  # flat sequence of scalars: 1-D points
            pts = pts[:, None]
        if pts.ndim != 2:
            raise ValueError("points must be scalars or d-vectors")
        pr = np.asarray(self.probs, dtype=float)
        if pts.shape[0] != pr.shape[0]:
            raise ValueError("points and probs must have the same length")
        if (pr <= 0).any():
            raise ValueError("probabilities must be positive")
        if abs(pr.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {pr.sum()!r}, not 1")
        object.__setattr__(self, "points", tuple(map(tuple, pts.tolist())))
        object.__setattr__(self, "probs", tuple(pr.tolist()))

    @property
    def point_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)

    @property
    def prob_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)


@dataclass(frozen=True)
class OrnsteinUhlenbeck:
    """Exponentially correlated Gaussian noise observed every t_del.

    The exact discrete transition is
        xi' = xi * exp(-t_del/tau_cor) + N(0, (R/2)(1 - exp(-2 t_del/tau_cor)))
    per component, with stationary per-component variance R/2.
    """

    R: float
    tau_cor: float
    t_del: float
    d: int = 1

    def __post_init__(self):
        if self.R <= 0 or self.tau_cor <= 0 or self.t_del <= 0:
            raise ValueError("R, tau_cor, t_del must be positive")
        if self.d < 1:
            raise ValueError("d must be >= 1")

    @property
    def decay(self) -> float:
        return math.exp(-self.t_del / self.tau_cor)


@dataclass(frozen=True)
class MixedNoise:
    """Sum of independent Gaussian and jump components."""

    gaussian: GaussianNoise
    jumps: KuboAndersen

    def __post_init__(self):
        if self.gaussian.d != self.jumps.point_array.shape[1]:
            raise ValueError("gaussian and jump dimensions differ")


NoiseSpec = Union[NoNoise, GaussianNoise, KuboAndersen, OrnsteinUhlenbeck, MixedNoise]


def noise_dim(spec: NoiseSpec) -> Optional[int]:
    if isinstance(spec, NoNoise):
        return None
    if isinstance(spec, (GaussianNoise, OrnsteinUhlenbeck)):
        return spec.d
    if isinstance(spec, KuboAndersen):
        return spec.point_array.shape[1]
    if isinstance(spec, MixedNoise):
        return spec.gaussian.d
    raise TypeError(f"not a noise spec: {spec!r}")


def _ka_draw(spec: KuboAndersen, rng: np.random.Generator, n: int) -> np.ndarray:
    cum = np.cumsum(spec.prob_array)
    cum[-1] = 1.0
    idx = np.searchsorted(cum, rng.random(n), side="right")
    return spec.point_array[idx]


def sample_noise(spec: NoiseSpec, rng: np.random.Generator, prev=None):
    """One noise draw.  For Ornstein-Uhlenbeck noise, `prev` is the
    previous value; without it the draw comes from the stationary law."""
    if isinstance(spec, NoNoise):
        return None
    if isinstance(spec, GaussianNoise):
        return rng.normal(0.0, math.sqrt(spec.R / 2.0), size=spec.d)
    if isinstance(spec, KuboAndersen):
        return _ka_draw(spec, rng, 1)[0]
    if isinstance(spec, OrnsteinUhlenbeck):
        s_stat = math.sqrt(spec.R / 2.0)
        if prev is None:
            return rng.normal(0.0, s_stat, size=spec.d)
        rho = spec.decay
        return (np.asarray(prev, dtype=float) * rho
                + rng.normal(0.0, s_stat * math.sqrt(1.0 - rho * rho), size=spec.d))
    if isinstance(spec, MixedNoise):
        g = sample_noise(spec.gaussian, rng)
        return g + sample_noise(spec.jumps, rng)
    raise TypeError(f"not a noise spec: {spec!r}")


def noise_block(spec: NoiseSpec, rng: np.random.Generator, steps: int) -> Optional[np.ndarray]:
    """The full noise sequence xi_0 .. xi_{steps-1} as one (steps, d) block.

    This block layout is the documented consumption order of a chain's
    random stream: Gaussian components first, then jump uniforms.  Both
    `iterate` and the ensemble runner draw through this function, so a
    single chain of an ensemble is reproducible in isolation.
    """
    if isinstance(spec, NoNoise):
        return None
    if isinstance(spec, GaussianNoise):
        return rng.normal(0.0, math.sqrt(spec.R / 2.0), size=(steps, spec.d))
    if isinstance(spec, KuboAndersen):
        return _ka_draw(spec, rng, steps)
    if isinstance(spec, OrnsteinUhlenbeck):
        rho = spec.decay
        s_stat = math.sqrt(spec.R / 2.0)
        innov = rng.normal(0.0, 1.0, size=(steps, spec.d))
        out = np.empty((steps, spec.d))
        out[0] = s_stat * innov[0]
        s_step = s_stat * math.sqrt(1.0 - rho * rho)
        for k in range(1, steps):
            out[k] = rho * out[k - 1] + s_step * innov[k]
        return out
    if isinstance(spec, MixedNoise):
        g = noise_block(spec.gaussian, rng, steps)
        j = noise_block(spec.jumps, rng, steps)
        return g + j
    raise TypeError(f"not a noise spec: {spec!r}")


# ---------------------------------------------------------------------------
# iteration

def iterate(map_spec: MapSpec, noise_spec: NoiseSpec, x0, steps: int,
            rng: Optional[np.random.Generator] = None,
            guard: float = DIVERGENCE_GUARD) -> Iterator[np.ndarray]:
    """Stream the states X_0 .. X_steps of one trajectory.

    The noise block for all steps is drawn up front from `rng` (see
    noise_block).  Raises DivergenceError when |X| exceeds `guard`.
    """
    d = map_dim(map_spec)
    nd = noise_dim(noise_spec)
    if nd is not None and nd != d:
        raise ValueError(f"noise dimension {nd} does not match map dimension {d}")
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    if x.shape != (d,):
        raise ValueError(f"x0 must have shape ({d},)")
    if nd is not None and rng is None:
        raise ValueError("rng is required for noisy iteration")
    xi = noise_block(noise_spec, rng, steps) if steps > 0 else None

    yield x.copy()
    for n in range(steps):
        x = apply_map(map_spec, x)
        if xi is not None:
            x = x + xi[n]
        norm = float(np.linalg.norm(x))
        if norm > guard:
            raise DivergenceError(n + 1, norm)
        yield x.copy()
