"""
Reducing a pairing matrix to normal form
========================================

Any pairing operator sum_ij A_ij c_i c_j can be rotated to a sum of r
independent pairs. Bosons need a Takagi factorization of the symmetric A,
fermions the block form of the antisymmetric A.
"""

import numpy as np
from scipy.stats import unitary_group

from pairing_witness.canonical import antisymmetric_canonical, build_qspec, takagi

rng = np.random.default_rng(0)

# %%
# A random symmetric matrix of rank 3 hidden in 5 modes.
U = unitary_group.rvs(5, random_state=1)
A = U.conj() @ np.diag([2.0, 1.0, 0.5, 0, 0]) @ U.conj().T
c = takagi(A)
print("boson coefficients", np.round(c.coefficients, 10), "residual", c.residual(A))

# %%
# Antisymmetric: three equal blocks give the equal-coefficient normal form.
J = np.kron(np.eye(3), [[0, 1], [-1, 0]])
V = unitary_group.rvs(6, random_state=2)
c = antisymmetric_canonical(V.T @ J @ V)
qs = build_qspec(c)
print("fermion rank", qs.r, "equal coefficients", qs.equal_coefficients)
