"""
Generic layers built from matrices
==================================

Outside the group setting a layer is any pair (A, L) with
A*A + L*L <= I.  Completing the mean projector P to a Parseval pair
gives L = I - P, and the constant vector is an eigen-witness with
eigenvalue one, so W_N decays like (1 - 1/d)^(N-1).
"""

import numpy as np

from scatterlab import EigenWitness, check_assumption1, complete_to_parseval, corollary1_bound, mean_projector, propagate

d = 8
P = mean_projector(d)
layer = complete_to_parseval(P)
print("largest singular value of [A; L]:", check_assumption1(layer).max_singular_value)

witness = EigenWitness(1.0, np.full(d, 1 / np.sqrt(d)), "constant")
rng = np.random.default_rng(3)
f = rng.standard_normal(d)
entry = corollary1_bound([layer], f, 5, witness)
print("base:", entry.base, "= 1 - 1/d")

led = propagate([layer], f, 5).ledger
for N in range(1, 6):
    print(f"N={N}  W_N={led.propagated[N]:.3e}  bound={entry.curve(N):.3e}")

# the ReLU variant is only sub-Parseval, but the bound still holds
relu = complete_to_parseval(P, sigma="real-relu")
led = propagate([relu], f, 5).ledger
print("relu W:", [f"{w:.2e}" for w in led.propagated])
