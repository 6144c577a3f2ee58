"""
Detecting pairing correlations
==============================

W = Lambda - Q^dagger Q is non-negative on separable states, so a negative
value certifies correlations.
"""

import numpy as np

from pairing_witness import fock
from pairing_witness.pairing import QSpec, qdag_operator
from pairing_witness.spectral import top_eigenvector
from pairing_witness.witness import detectability_ratio, evaluate_witness

qs = QSpec("fermion", 3)

# %%
# A single delocalized pair, Q^dagger |0>.
pair = (qdag_operator(qs, 0) @ fock.vacuum("fermion", 6)).normalized()
print(evaluate_witness(qs, pair).to_json())

# %%
# A random Slater determinant never triggers the witness.
rng = np.random.default_rng(3)
q, _ = np.linalg.qr(rng.normal(size=(6, 2)) + 1j * rng.normal(size=(6, 2)))
print(evaluate_witness(qs, fock.product_state("fermion", q.T)).verdict.value)

# %%
# Bosons: the top eigenvector against the type-1 bound, and how much room there is.
qb = QSpec("boson", 4)
psi, lam = top_eigenvector(qb, 6)
rep = evaluate_witness(qb, psi)
print(rep.verdict.value, rep.margin, detectability_ratio("boson", 4, 6))
