"""
Energy bookkeeping through the layers
=====================================

Every path signal U[p]f splits into an output part (low-pass) and the
energy passed on to the next layer.  For a Parseval bank nothing is lost.
"""

import math

import numpy as np

from scatterlab import FrequencySet, GroupSpec, Signal, build_random_smooth_bank, propagate, scattering_layer

g = GroupSpec((16,))
bank = build_random_smooth_bank(g, 3, FrequencySet.of(g, [0]), seed=7)
f = Signal.random(g, np.random.default_rng(1))

out = propagate([scattering_layer(bank)], f, depth=5)
led = out.ledger
print(f"input energy {led.input_energy:.6f}")
print("N  paths  W_N          O_N          sum O + W")
for N in range(led.depth + 1):
    total = led.cumulative_output(N) + led.propagated[N]
    print(f"{N}  {led.num_paths[N]:5d}  {led.propagated[N]:.6e}  {led.output[N]:.6e}  {total:.12f}")

# empirical per-layer contraction 1 - W_{N+1}/W_N
print("contraction:", [None if c is None else round(c, 4) for c in led.contraction])

# the whole output energy plus what is still in flight equals ||f||^2
print("deficit:", abs(math.fsum(led.output[:5]) + led.propagated[5] - led.input_energy))
