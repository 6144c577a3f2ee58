"""
Fock sectors and the pairing operator
=====================================

Build fixed-N sectors, apply ladder operators and assemble Q^dagger Q.
"""

import numpy as np

from pairing_witness import fock
from pairing_witness.pairing import QSpec, q_operator, qdagq_operator

# %%
# Basis states are occupation tuples in lexicographic order, mode 0 first.
sector = fock.enumerate_sector("fermion", 4, 2)
print(sector.dim, sector.basis.tolist())

# %%
# Fermionic signs count occupied modes below the target mode.
psi = fock.basis_state("fermion", [1, 1, 0, 0])
print(fock.apply_annihilator(psi, 1).amplitudes)

# %%
# One pair, Q = c0 c1. Acting on c0^+ c1^+ |0> gives -|0>.
q = q_operator(QSpec("fermion", 1, (), 4), 2)
print((q @ psi).amplitudes)

# %%
# Bosons: Q = (c0^2 + c1^2 + c2^2) / 2 on three particles in three modes.
op = qdagq_operator(QSpec("boson", 3), 3)
print(op.dim_in, np.round(np.linalg.eigvalsh(op.dense()), 6))
