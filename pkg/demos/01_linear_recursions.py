"""Linear recursions: where they settle and how wide they spread.

The recursion X' = A + kappa X contracts to the fixed point A/(1-kappa).
Adding white Gaussian noise turns the fixed point into a stationary
cloud whose mean is still A/(1-kappa) and whose per-component variance
is R/(2(1-kappa^2)).  This script iterates both and checks the numbers.
"""

import numpy as np

from dilatox import (
    EnsembleSpec,
    GaussianNoise,
    LinearDet,
    NoNoise,
    iterate,
    run_ensemble,
)

KAPPA = 0.5
A = (1.0,)

# deterministic: watch the iterates close in on 2
path = list(iterate(LinearDet(A, KAPPA), NoNoise(), (0.0,), 30))
print("deterministic iterates (every 5th):")
for n in range(0, 31, 5):
    print(f"  n={n:2d}  X={path[n][0]:.12f}")
print(f"  fixed point A/(1-kappa) = {A[0] / (1 - KAPPA)}")

# noisy: one million stationary samples, moments against the closed form
print("\nstationary moments, 10^6 samples per case:")
print(f"  {'kappa':>5} {'R':>4} {'mean':>10} {'expected':>10} "
      f"{'variance':>10} {'expected':>10}")
for kappa in (0.3, 0.6):
    for R in (0.1, 0.4):
        spec = EnsembleSpec(LinearDet(A, kappa), GaussianNoise(R, 1),
                            chains=20, steps=51000, seed=5, burn_in=1000)
        summ = run_ensemble(spec)
        m_true = A[0] / (1 - kappa)
        v_true = R / (2 * (1 - kappa * kappa))
        print(f"  {kappa:5.1f} {R:4.1f} {summ.mean[0]:10.5f} {m_true:10.5f} "
              f"{summ.variance[0]:10.6f} {v_true:10.6f}")

# the same seed always reproduces the same cloud, chain by chain
spec = EnsembleSpec(LinearDet(A, KAPPA), GaussianNoise(0.2, 1),
                    chains=4, steps=2000, seed=5, burn_in=500)
a = run_ensemble(spec)
b = run_ensemble(spec)
identical = np.array_equal(a.samples, b.samples)
print(f"\nsame seed, re-run: samples bitwise identical = {identical}")
