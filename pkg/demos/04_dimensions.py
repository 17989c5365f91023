"""Fractal dimensions: closed forms against box counting.

The two-branch construction with contraction kappa spreads its support
on a set whose similarity dimension is -1/log2(kappa) for kappa <= 1/2.
We tabulate the closed form, then estimate the dimension of the
middle-thirds set directly by counting occupied boxes on a generation-10
prefractal and fitting the log-log slope.
"""

import numpy as np

from dilatox import (
    FractalSpec,
    box_counting_dimension,
    dimensions,
    prefractal,
)

print("closed-form dimensions (axis kappa_x, planar graph over kappa_y=1/2):")
print(f"  {'kappa_x':>7} {'axis':>7} {'planar':>7}")
for kx in (0.25, 1.0 / 3.0, 0.4, 0.5, 0.6):
    d = dimensions(kx)
    axis = "n/a" if d.axis_x is None else f"{d.axis_x:.4f}"
    planar = "n/a" if d.planar is None else f"{d.planar:.4f}"
    print(f"  {kx:7.4f} {axis:>7} {planar:>7}")

spec = FractalSpec(kappa=1.0 / 3.0, anchor=0.5)
pts = prefractal(spec, 10)
print(f"\ngeneration-10 prefractal: {pts.count} points, "
      f"weights normalize to {pts.normalization().real:g}")

sizes = 3.0 ** -np.arange(1, 7)
slope = box_counting_dimension(pts.points(), sizes)
target = 1.0 / np.log2(3.0)
print(f"box-counting slope over sizes 3^-1 .. 3^-6: {slope:.6f}")
print(f"similarity dimension 1/log2(3):             {target:.6f}")
print(f"relative error: {abs(slope - target) / target:.2%}")
