"""
Certified decay of the propagated energy
========================================

Each bound has the form W_N <= base^(N-1) (||f||^2 - ||f * chi||^2).
The certificate checks every layer against every requested bound.
"""

import numpy as np

from scatterlab import (
    FrequencySet,
    GroupSpec,
    Signal,
    bound_report,
    build_ideal_partition_bank,
    certify,
    power_set,
    propagate,
    scattering_layer,
)
from scatterlab.decay_bounds import covering_number, format_certificate, gamma_candidates

# Z_64 with a wide low-pass gap: room for a symmetric Gamma with 8Gamma in the gap
g = GroupSpec((64,))
gap = FrequencySet.of(g, range(-8, 9))
bands = [FrequencySet.of(g, [s * k for k in range(a, b) for s in (1, -1)]) for a, b in ((9, 21), (21, 33))]
bank = build_ideal_partition_bank(g, gap, bands)

cands = gamma_candidates(gap)
print("Gamma candidates:", [c.sorted() for c in cands])

# the filter supports get covered by translates of 2Gamma
gamma = cands[-1]
cov = covering_number(bank.supports(), power_set(gamma, 2), gamma)
print("covering counts: greedy", cov.n_greedy, "ruzsa", cov.n_ruzsa, "exact", cov.n_exact,
      "(degraded)" if cov.exact_degraded else "")

f = Signal.random(g, np.random.default_rng(2))
report = bound_report(bank, f, depth=4)
for name, e in report.entries.items():
    print(f"{name}: base {e.base:.6f}")

result = certify(propagate([scattering_layer(bank)], f, 4).ledger, report)
print(format_certificate(result, report, label="z64 demo"))
