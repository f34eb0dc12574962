"""
Fourier analysis on a finite abelian group
==========================================

Signals live on Z_4 x Z_6, stored as flat row-major arrays.  The transform
uses counting measure on the group, so Plancherel picks up a 1/#G on the
dual side.
"""

import numpy as np

from scatterlab import FrequencySet, GroupSpec, Signal, convolve, fourier, power_set

g = GroupSpec.parse("4 x 6")
rng = np.random.default_rng(0)
print(g, "order", g.order)

# element (1, 2) and its flat index
print("index of (1, 2):", g.index((1, 2)), "back:", g.residues(g.index((1, 2))))

f = Signal.random(g, rng)
F = fourier(f)
print("||f||^2      ", f.norm_sq())
print("||f^||^2 / #G", F.norm_sq())

# a delta is the unit for convolution; a constant has its spectrum at 0 only
print("f * delta == f:", np.allclose(convolve(f, Signal.delta(g)).values, f.values))
print("spectrum of 1:", np.round(fourier(Signal.constant(g)).coeffs[:4].real, 12), "...")

# convolution is spectral multiplication
h = Signal.random(g, rng)
lhs = fourier(convolve(f, h)).coeffs
print("conv theorem max err:", np.max(np.abs(lhs - F.coeffs * fourier(h).coeffs)))

# sumsets grow until they fill a subgroup
A = FrequencySet.of(g, [(0, 0), (1, 0), (0, 1)])
for k in range(5):
    print(f"#{k}A =", len(power_set(A, k)))
