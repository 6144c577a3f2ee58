"""Permanent-based evaluation of ``<Q^dagger Q>`` on bosonic product states.

For ``|Psi> = prod_k c^dagger(phi_k)|0>`` with Gram matrix ``G[k, l] = <phi_k|phi_l>``
and bilinear overlaps ``R[k, l] = sum_{i<r} phi_k[i] phi_l[i]``::

    <Psi|Psi>         = perm(G)
    <Psi|Q^+ Q|Psi>   = sum_{k<l, k'<l'} conj(R[k,l]) R[k',l'] perm(G minus rows k,l / cols k',l')

Both sums are evaluated with one pass of Glynn's formula over sign vectors,
together with their derivatives with respect to ``G`` and ``conj(R)``.
Cost is ``O(2**N N**3 / 6)`` and independent of the mode count.
"""

from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True)
def _glynn_pass(G, R, grad):
    N = G.shape[0]
    Rb = np.conj(R)
    Z = 0j
    F = 0j
    dZ = np.zeros((N, N), dtype=np.complex128)
    dF = np.zeros((N, N), dtype=np.complex128)
    dRb = np.zeros((N, N), dtype=np.complex128)
    t = np.zeros(N, dtype=np.complex128)
    delta = np.ones(N)
    seg = np.ones((N + 1, N + 1), dtype=np.complex128)
    q = np.zeros(N, dtype=np.complex128)
    for code in range(1 << (N - 1)):
        sp = 1.0
        delta[0] = 1.0
        for j in range(1, N):
            if (code >> (j - 1)) & 1:
                delta[j] = -1.0
                sp = -sp
            else:
                delta[j] = 1.0
        for i in range(N):
            acc = 0j
            for j in range(N):
                acc += delta[j] * G[i, j]
            t[i] = acc
        for a in range(N + 1):
            seg[a, a] = 1.0
            for b in range(a + 1, N + 1):
                seg[a, b] = seg[a, b - 1] * t[b - 1]
        Z += sp * seg[0, N]
        bS = 0j
        aS = 0j
        for k in range(N):
            for l in range(k + 1, N):
                bS += R[k, l] * delta[k] * delta[l]
                aS += Rb[k, l] * seg[0, k] * seg[k + 1, l] * seg[l + 1, N]
        F += sp * aS * bS
        if grad:
            cb = sp * bS
            for i in range(N):
                p1 = sp * seg[0, i] * seg[i + 1, N]
                for j in range(N):
                    dZ[i, j] += delta[j] * p1
            for k in range(N):
                for l in range(k + 1, N):
                    dRb[k, l] += cb * seg[0, k] * seg[k + 1, l] * seg[l + 1, N]
            for i in range(N):
                q[i] = 0j
            for x in range(N):
                for y in range(x + 1, N):
                    for z in range(y + 1, N):
                        p3 = seg[0, x] * seg[x + 1, y] * seg[y + 1, z] * seg[z + 1, N]
                        q[x] += Rb[y, z] * p3
                        q[y] += Rb[x, z] * p3
                        q[z] += Rb[x, y] * p3
            for i in range(N):
                ci = cb * q[i]
                for j in range(N):
                    dF[i, j] += delta[j] * ci
    scale = 1.0 / (1 << (N - 1))
    return Z * scale, F * scale, dZ * scale, dF * scale, dRb * scale


def boson_product_moments(orbitals: np.ndarray, r: int, grad: bool = False, coefficients=None):
    """Norm and ``Q^dagger Q`` moment of a bosonic product state.

    ``orbitals`` has shape ``(N, M)``; the pairing operator is
    ``1/2 sum_{i<r} A_i c_i^2`` with ``A = coefficients`` (default all 1).  Returns ``(Z, F)`` or, with ``grad``,
    ``(Z, F, dZ, dF)`` where ``dZ``/``dF`` are the Wirtinger derivatives with
    respect to ``conj(orbitals)``.
    """
    phi = np.ascontiguousarray(orbitals, dtype=np.complex128)
    N = phi.shape[0]
    if N == 0:
        return (1.0, 0.0, phi.copy(), phi.copy()) if grad else (1.0, 0.0)
    G = phi.conj() @ phi.T
    Pr = phi[:, :r]
    A = np.ones(r) if coefficients is None else np.asarray(coefficients, dtype=float)
    R = (Pr * A) @ Pr.T
    Z, F, dZG, dFG, dRb = _glynn_pass(G, R, grad)
    if not grad:
        return Z.real, F.real
    dZ = dZG @ phi
    B = dRb + dRb.T
    dF = dFG @ phi
    dF[:, :r] += B @ (Pr.conj() * A)
    return Z.real, F.real, dZ, dF


def boson_rayleigh(orbitals: np.ndarray, r: int, grad: bool = False, coefficients=None):
    """``<Q^dagger Q>`` in the normalized product state; optionally with the
    real gradient (``d/dRe``, ``d/dIm``) packed as a complex array."""
    if not grad:
        Z, F = boson_product_moments(orbitals, r, coefficients=coefficients)
        return F / Z
    Z, F, dZ, dF = boson_product_moments(orbitals, r, grad=True, coefficients=coefficients)
    f = F / Z
    g = 2.0 * (dF - f * dZ) / Z
    return f, g
