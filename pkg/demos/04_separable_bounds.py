"""
Separable bounds
================

Largest <Q^dagger Q> over product states: Slater determinants for fermions,
orthonormal (type 1) or arbitrary (type 2) orbitals for bosons.
"""

import numpy as np

from pairing_witness.separability import (
    boson_type1_bound,
    boson_type2_bound,
    fermion_sep_bound,
    overlap_matrices,
    permutation_maximizer,
)
from pairing_witness.spectral import lambda_max

# %%
# Closed forms.
for r, N in [(3, 4), (2, 5)]:
    b = fermion_sep_bound(r, N)
    print(f"fermion r={r} N={N}: Lambda={b.value}, lambda={lambda_max('fermion', r, N)}")

b = boson_type1_bound(3, 6)
print("type-1 N=6:", b.value, "certificate multiplicities", b.certificate.multiplicities)

# %%
# The type-1 optimum pairs an orbital with its complex conjugate, |R12| = 1.
print(np.round(overlap_matrices(b.certificate.orbitals, 3).R, 6))

# %%
# Reducing to permutations: f over (m1, m2) peaks at the 2-cycle with m1*m2.
print(permutation_maximizer((3, 3)), permutation_maximizer((2, 2, 2)))

# %%
# Type 2 is found numerically and is a lower bound on the true supremum.
res = boson_type2_bound(3, 4, restarts=16)
print("type-2 r=3 N=4:", res.value, res.solver["converged_fraction"])
