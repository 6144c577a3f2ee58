"""
Largest eigenvalue of Q^dagger Q
================================

Compare brute-force diagonalization with the ladder construction and the
closed forms.
"""

from pairing_witness.pairing import QSpec
from pairing_witness.spectral import (
    brute_force_spectrum,
    ladder_levels,
    lambda_max,
    modes_for_lambda,
    su2_check,
)

# %%
# Fermions. The optimum keeps N - 2 mu particles outside the paired modes,
# so enough modes are needed to see it.
for r, N in [(3, 2), (3, 3), (4, 6)]:
    M = max(modes_for_lambda("fermion", r, N), N)
    got = brute_force_spectrum(QSpec("fermion", r, (), M), N).max
    print(f"fermion r={r} N={N} M={M}: brute {got:.6f}, closed form {lambda_max('fermion', r, N)}")

# %%
# Bosons: every eigenvalue comes from a harmonic kernel state raised by Q^dagger.
r, N = 3, 5
spec = brute_force_spectrum(QSpec("boson", r), N)
print("ladder levels", sorted({lv.eigenvalue for lv in ladder_levels("boson", r, N, r)}))
print("max", spec.max, "closed form", lambda_max("boson", r, N))

# %%
# The fermionic pair operators close an su(2) algebra.
print(su2_check(QSpec("fermion", 2)))
