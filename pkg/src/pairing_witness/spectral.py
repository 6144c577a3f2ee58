"""Spectra of ``Q^dagger Q``: closed forms, ladder construction, brute force."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from math import comb

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fock import StateVector, Statistics, as_statistics, enumerate_sector, sector_exists
from .pairing import QSpec, nq_operator, q_operator, qdag_operator, qdagq_operator

DENSE_LIMIT = 4000
EIG_TOL = 1e-9


class PreconditionError(ValueError):
    pass


class Method(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    LADDER = "ladder"
    BRUTE_FORCE = "brute_force"


def lambda_max_fermion(r: int, N: int) -> float:
    """Largest eigenvalue of ``Q^dagger Q`` over ``N``-fermion states (rank ``r``)."""
    if r < 1 or N < 0:
        raise ValueError("need r >= 1 and N >= 0")
    half = (r + 1) // 2
    if N < 2 * half:
        k = N // 2
        return float(k * (r + 1 - k))
    return float(half * (r + 1 - half))


def lambda_max_boson(r: int, N: int) -> float:
    """Largest eigenvalue of ``Q^dagger Q`` over ``N``-boson states (rank ``r``)."""
    if r < 1 or N < 0:
        raise ValueError("need r >= 1 and N >= 0")
    if N % 2 == 0:
        return N * (N + r - 2) / 4
    return (N - 1) * (N + r - 1) / 4


def lambda_max(statistics, r: int, N: int) -> float:
    if as_statistics(statistics) is Statistics.FERMION:
        return lambda_max_fermion(r, N)
    return lambda_max_boson(r, N)


def modes_for_lambda(statistics, r: int, N: int) -> int:
    """Smallest mode count at which ``lambda_max`` is reached for ``N`` particles.

    The maximising fermionic level parks ``N - 2*mu`` particles outside the
    ``2r`` paired modes, so it needs that many spectator modes.
    """
    if as_statistics(statistics) is Statistics.BOSON:
        return r
    mu = min(N // 2, (r + 1) // 2)
    return 2 * r + max(0, N - 2 * mu)


@dataclass(frozen=True)
class LadderState:
    """Quantum numbers of ``(Q^dagger)^mu |psi_0>``.

    ``nu`` is the ``N_Q`` eigenvalue of the kernel state and ``spectators``
    the number of particles outside the paired modes.
    """

    statistics: Statistics
    r: int
    nu: int
    mu: int
    spectators: int

    @property
    def N(self) -> int:
        return self.nu + self.spectators + 2 * self.mu

    @property
    def eigenvalue(self) -> float:
        return ladder_eigenvalue(self.statistics, self.r, self.nu, self.mu)


def ladder_eigenvalue(statistics, r: int, nu: int, mu: int) -> float:
    if as_statistics(statistics) is Statistics.FERMION:
        if not (0 <= nu <= r and 0 <= mu <= r - nu):
            raise ValueError(f"invalid fermionic ladder numbers nu={nu}, mu={mu} for r={r}")
        return float(mu * (r - nu - mu + 1))
    if nu < 0 or mu < 0:
        raise ValueError("nu and mu must be non-negative")
    return mu * (nu + r / 2 + mu - 1)


def ladder_levels(statistics, r: int, N: int, M: int | None = None) -> list[LadderState]:
    """All ladder quantum numbers compatible with ``N`` particles in ``M`` modes.

    ``M=None`` means unlimited spectator modes.
    """
    statistics = as_statistics(statistics)
    support = 2 * r if statistics is Statistics.FERMION else r
    room = None if M is None else M - support
    if room is not None and room < 0:
        raise ValueError("M smaller than the paired modes")
    out = []
    if statistics is Statistics.FERMION:
        nus = range(0, r + 1)
    else:
        nus = range(0, N + 1) if r >= 2 else range(0, min(N, 1) + 1)
    for nu in nus:
        mu_max = (N - nu) // 2
        if statistics is Statistics.FERMION:
            mu_max = min(mu_max, r - nu)
        for mu in range(0, mu_max + 1):
            spect = N - nu - 2 * mu
            if spect < 0:
                continue
            if room is not None and spect > room:
                continue
            out.append(LadderState(statistics, r, nu, mu, spect))
    return out


def ladder_max(statistics, r: int, N: int, M: int | None = None) -> float:
    levels = ladder_levels(statistics, r, N, M)
    return max((lv.eigenvalue for lv in levels), default=0.0)


@dataclass(frozen=True)
class SpectrumResult:
    qspec: QSpec
    N: int
    eigenvalues: np.ndarray
    method: Method

    @property
    def max(self) -> float:
        return float(self.eigenvalues[-1]) if len(self.eigenvalues) else 0.0

    @property
    def min(self) -> float:
        return float(self.eigenvalues[0]) if len(self.eigenvalues) else 0.0


def brute_force_spectrum(qspec: QSpec, N: int, dense_limit: int = DENSE_LIMIT) -> SpectrumResult:
    """Diagonalize ``Q^dagger Q`` on the ``N`` sector.

    Below ``dense_limit`` the full spectrum is returned; above it only the
    largest eigenvalue (Lanczos) is certified.
    """
    op = qdagq_operator(qspec, N)
    dim = op.dim_in
    if dim < dense_limit:
        evals = np.linalg.eigvalsh(op.dense()) if dim else np.zeros(0)
    else:
        top = spla.eigsh(op.matrix, k=1, which="LA", return_eigenvectors=False, tol=1e-12)
        evals = np.sort(top.real)
    return SpectrumResult(qspec, N, np.asarray(evals, dtype=float), Method.BRUTE_FORCE)


def top_eigenvector(qspec: QSpec, N: int) -> tuple[StateVector, float]:
    """A normalized eigenvector for the largest eigenvalue of ``Q^dagger Q``."""
    op = qdagq_operator(qspec, N)
    if op.dim_in < DENSE_LIMIT:
        evals, evecs = np.linalg.eigh(op.dense())
        val, vec = evals[-1], evecs[:, -1]
    else:
        vals, vecs = spla.eigsh(op.matrix, k=1, which="LA", tol=1e-12)
        val, vec = vals[0], vecs[:, 0]
    return StateVector(op.sector_in, vec).normalized(), float(val)


def closed_form_spectrum(qspec: QSpec, N: int) -> SpectrumResult:
    if not qspec.equal_coefficients:
        raise PreconditionError("closed forms assume unit coefficients")
    value = lambda_max(qspec.statistics, qspec.r, N)
    return SpectrumResult(qspec, N, np.array([value]), Method.CLOSED_FORM)


def ladder_spectrum(qspec: QSpec, N: int) -> SpectrumResult:
    """Distinct ladder eigenvalues reachable with ``qspec.M`` modes (no multiplicities)."""
    if not qspec.equal_coefficients:
        raise PreconditionError("ladder eigenvalues assume unit coefficients")
    vals = sorted({lv.eigenvalue for lv in ladder_levels(qspec.statistics, qspec.r, N, qspec.M)})
    return SpectrumResult(qspec, N, np.array(vals, dtype=float), Method.LADDER)


# ---------------------------------------------------------------------------
# ladder eigenstates


def _apply(op, state: StateVector) -> StateVector:
    return op @ state


def ladder_eigenstate(qspec: QSpec, kernel_state: StateVector, mu: int, tol: float = 1e-10):
    """``(Q^dagger)^mu |psi_0>`` normalized, with its ``Q^dagger Q`` eigenvalue.

    ``kernel_state`` must be annihilated by ``Q`` and be an ``N_Q``
    eigenstate.  The returned vector is checked against the closed-form
    eigenvalue (residual at most ``1e-8``).
    """
    if not qspec.equal_coefficients:
        raise PreconditionError("ladder construction assumes unit coefficients")
    if mu < 0:
        raise ValueError("mu must be non-negative")
    psi0 = kernel_state
    if psi0.sector.statistics is not qspec.statistics or psi0.M != qspec.M:
        raise PreconditionError("kernel state does not live in the QSpec's Fock space")
    nrm = psi0.norm()
    if nrm == 0:
        raise PreconditionError("kernel state is zero")
    if psi0.N >= 2:
        resid = (q_operator(qspec, psi0.N) @ psi0).norm() / nrm
        if resid > tol:
            raise PreconditionError(f"kernel state is not annihilated by Q (residual {resid:.2e})")
    nq = nq_operator(qspec, psi0.N)
    nu_f = (psi0.vdot(nq @ psi0) / nrm**2).real
    nu = int(round(nu_f))
    resid = np.linalg.norm((nq @ psi0).amplitudes - nu * psi0.amplitudes) / nrm
    if resid > tol:
        raise PreconditionError(f"kernel state is not an N_Q eigenstate (residual {resid:.2e})")
    value = ladder_eigenvalue(qspec.statistics, qspec.r, nu, mu)
    psi = psi0
    for _ in range(mu):
        if not sector_exists(qspec.statistics, qspec.M, psi.N + 2):
            raise PreconditionError("ladder step leaves the Fock space")
        psi = qdag_operator(qspec, psi.N) @ psi
    if psi.norm() <= tol * nrm:
        raise PreconditionError("ladder state vanished")
    psi = psi.normalized()
    resid = np.linalg.norm((qdagq_operator(qspec, psi.N) @ psi).amplitudes - value * psi.amplitudes)
    if resid > 1e-8:
        raise ArithmeticError(f"ladder state fails eigen-check (residual {resid:.2e})")
    return psi, value


def kernel_states(qspec: QSpec, N: int, nu: int) -> list[StateVector]:
    """Orthonormal basis of ``{psi : Q psi = 0, N_Q psi = nu psi}`` in the ``N`` sector."""
    sector = enumerate_sector(qspec.statistics, qspec.M, N)
    occ = sector.basis[:, : qspec.support].sum(axis=1)
    cols = np.nonzero(occ == nu)[0]
    if len(cols) == 0:
        return []
    if N < 2:
        basis = np.eye(sector.dim)[:, cols]
    else:
        q = q_operator(qspec, N).matrix[:, cols].toarray()
        null = sla.null_space(q, rcond=1e-10)
        basis = np.zeros((sector.dim, null.shape[1]), dtype=complex)
        basis[cols] = null
    return [StateVector(sector, basis[:, k]) for k in range(basis.shape[1])]


def harmonic_dimension(r: int, nu: int) -> int:
    """Dimension of degree-``nu`` harmonic polynomials in ``r`` variables."""
    if nu < 0:
        return 0
    lower = comb(nu + r - 3, r - 1) if nu >= 2 else 0
    return comb(nu + r - 1, r - 1) - lower


def harmonic_kernel_basis(r: int, nu: int) -> list[StateVector]:
    """Kernel states ``f(c_1^dagger..c_r^dagger)|0>`` with ``f`` harmonic of degree ``nu``."""
    if r < 2:
        raise ValueError("need r >= 2")
    if nu < 0:
        raise ValueError("need nu >= 0")
    return kernel_states(QSpec(Statistics.BOSON, r), nu, nu)


# ---------------------------------------------------------------------------
# algebra checks


def _maxabs(m) -> float:
    if sp.issparse(m):
        m = m.tocoo()
        return float(np.max(np.abs(m.data), initial=0.0))
    return float(np.max(np.abs(m), initial=0.0))


def _fermion_full_space(qspec: QSpec):
    M = qspec.M
    sizes = [enumerate_sector(qspec.statistics, M, n).dim for n in range(M + 1)]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    blocks_q = [[None] * (M + 1) for _ in range(M + 1)]
    blocks_n = [[None] * (M + 1) for _ in range(M + 1)]
    for n in range(M + 1):
        blocks_n[n][n] = nq_operator(qspec, n).matrix
        if n >= 2:
            blocks_q[n - 2][n] = q_operator(qspec, n).matrix
    for n in range(M + 1):
        for m in range(M + 1):
            if blocks_q[n][m] is None and n == m:
                blocks_q[n][m] = sp.csr_matrix((sizes[n], sizes[m]), dtype=complex)
    Q = sp.bmat(blocks_q, format="csr")
    NQ = sp.bmat(blocks_n, format="csr")
    return Q, NQ, offsets


def su2_check(qspec: QSpec, N: int | None = None) -> dict[str, float]:
    """Max-norm residuals of the angular-momentum algebra built from ``Q``.

    ``J_x = (Q + Q^dagger)/2``, ``J_y = i(Q - Q^dagger)/2``,
    ``J_z = (N_Q - r)/2`` on the whole fermionic Fock space, or restricted to
    inputs from the ``N`` sector.
    """
    if qspec.statistics is not Statistics.FERMION:
        raise PreconditionError("su2_check needs a fermionic QSpec")
    if not qspec.equal_coefficients:
        raise PreconditionError("su2_check needs unit coefficients")
    Q, NQ, offsets = _fermion_full_space(qspec)
    Qd = Q.conj().T.tocsr()
    dim = Q.shape[0]
    eye = sp.identity(dim, dtype=complex, format="csr")
    Jx = 0.5 * (Q + Qd)
    Jy = 0.5j * (Q - Qd)
    Jz = 0.5 * (NQ - qspec.r * eye)
    cols = slice(None) if N is None else slice(offsets[N], offsets[N + 1])

    def restrict(m):
        return m.tocsc()[:, cols]

    J2 = Jx @ Jx + Jy @ Jy + Jz @ Jz
    return {
        "[Jx,Jy]-iJz": _maxabs(restrict(Jx @ Jy - Jy @ Jx - 1j * Jz)),
        "[Jy,Jz]-iJx": _maxabs(restrict(Jy @ Jz - Jz @ Jy - 1j * Jx)),
        "[Jz,Jx]-iJy": _maxabs(restrict(Jz @ Jx - Jx @ Jz - 1j * Jy)),
        "QdQ-(J2-Jz2+Jz)": _maxabs(restrict(Qd @ Q - (J2 - Jz @ Jz + Jz))),
        "Q-(Jx-iJy)": _maxabs(restrict(Q - (Jx - 1j * Jy))),
    }


def sl2r_check(qspec: QSpec, N: int) -> dict[str, float]:
    """Residuals of ``[Q,Q^dagger] = N_Q + r/2``, ``[N_Q,Q^dagger] = 2Q^dagger``, ``[N_Q,Q] = -2Q`` on sector ``N``.

    Every product is formed between explicitly enumerated sectors
    ``N-2, N, N+2``, so no Fock truncation enters.
    """
    if qspec.statistics is not Statistics.BOSON:
        raise PreconditionError("sl2r_check needs a bosonic QSpec")
    if not qspec.equal_coefficients:
        raise PreconditionError("sl2r_check needs unit coefficients")
    r = qspec.r
    dim = enumerate_sector(qspec.statistics, qspec.M, N).dim
    eye = sp.identity(dim, dtype=complex, format="csr")
    nq = nq_operator(qspec, N).matrix
    qd = qdag_operator(qspec, N).matrix
    qqd = q_operator(qspec, N + 2).matrix @ qd
    qdq = qdag_operator(qspec, N - 2).matrix @ q_operator(qspec, N).matrix if N >= 2 else sp.csr_matrix((dim, dim))
    out = {
        "[Q,Qd]-(NQ+r/2)": _maxabs(qqd - qdq - (nq + 0.5 * r * eye)),
        "[NQ,Qd]-2Qd": _maxabs(nq_operator(qspec, N + 2).matrix @ qd - qd @ nq - 2 * qd),
    }
    if N >= 2:
        q = q_operator(qspec, N).matrix
        out["[NQ,Q]+2Q"] = _maxabs(nq_operator(qspec, N - 2).matrix @ q - q @ nq + 2 * q)
    else:
        out["[NQ,Q]+2Q"] = 0.0
    return out
