"""Normal forms of pairing matrices under unitary congruence ``A -> U^T A U``.

Symmetric (bosonic) ``A`` is brought to a non-negative diagonal (Autonne-Takagi);
antisymmetric (fermionic) ``A`` to a direct sum of ``[[0, a], [-a, 0]]`` blocks
with ``a > 0`` plus zeros.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .fock import Statistics, as_statistics
from .pairing import QSpec

SYMMETRY_TOL = 1e-12
RANK_RTOL = 1e-10


class NotSymmetricError(ValueError):
    pass


class NoPairingError(ValueError):
    """The pairing matrix has numerical rank zero."""


@dataclass(frozen=True)
class CanonicalForm:
    """``U`` with ``U^T A U`` in normal form.

    ``coefficients`` are sorted descending: the Takagi values for bosons, one
    value per 2x2 block for fermions.  ``rank`` counts those above
    ``RANK_RTOL`` times the largest.
    """

    statistics: Statistics
    U: np.ndarray
    coefficients: np.ndarray
    rank: int

    def normal_form(self) -> np.ndarray:
        M = self.U.shape[0]
        out = np.zeros((M, M), dtype=complex)
        if self.statistics is Statistics.BOSON:
            out[np.arange(len(self.coefficients)), np.arange(len(self.coefficients))] = self.coefficients
        else:
            for k, a in enumerate(self.coefficients):
                out[2 * k, 2 * k + 1] = a
                out[2 * k + 1, 2 * k] = -a
        return out

    def residual(self, A: np.ndarray) -> float:
        return float(np.max(np.abs(self.U.T @ A @ self.U - self.normal_form()), initial=0.0))

    def to_dict(self) -> dict:
        return {
            "statistics": self.statistics.value,
            "rank": self.rank,
            "coefficients": self.coefficients.tolist(),
            "U_re": self.U.real.tolist(),
            "U_im": self.U.imag.tolist(),
        }


def _numerical_rank(values: np.ndarray) -> int:
    if len(values) == 0 or values[0] <= 0:
        return 0
    return int(np.sum(values > RANK_RTOL * values[0]))


def _check_square(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"pairing matrix must be square, got shape {A.shape}")
    return A


def _complete(U_part: np.ndarray, M: int) -> np.ndarray:
    if U_part.shape[1] == M:
        return U_part
    if U_part.shape[1] == 0:
        return np.eye(M, dtype=complex)
    rest = sla.null_space(U_part.conj().T)
    return np.hstack([U_part, rest])


def takagi(A, tol: float = SYMMETRY_TOL) -> CanonicalForm:
    """Autonne-Takagi factorization of a complex symmetric matrix.

    Uses the real symmetric embedding ``[[Re A, Im A], [Im A, -Re A]]``: an
    eigenvector ``(x, y)`` with eigenvalue ``s >= 0`` gives ``w = x + i y`` with
    ``A conj(w) = s w``; ``U`` collects the conjugates of those ``w``.
    """
    A = _check_square(A)
    scale = max(1.0, float(np.max(np.abs(A), initial=0.0)))
    if np.max(np.abs(A - A.T), initial=0.0) > tol * scale:
        raise NotSymmetricError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    M = A.shape[0]
    B, C = A.real, A.imag
    H = np.block([[B, C], [C, -B]])
    evals, evecs = np.linalg.eigh(H)
    order = np.argsort(-evals, kind="stable")
    evals, evecs = evals[order], evecs[:, order]
    top = evals[:M].clip(min=0.0)
    r = _numerical_rank(top)
    W = evecs[:M, :r] + 1j * evecs[M:, :r]
    U = _complete(W.conj(), M)
    # tie-break degenerate values by the original index of their dominant component
    values = np.concatenate([top[:r], np.zeros(M - r)])
    keys = np.argmax(np.abs(U), axis=0)
    perm = np.lexsort((keys, -np.round(values, 12)))
    U, values = U[:, perm], values[perm]
    # phases: make the diagonal of U^T A U real and non-negative
    d = np.einsum("ij,ik,kj->j", U, A, U)
    phase = np.where(np.abs(d) > 0, np.exp(-0.5j * np.angle(d)), 1.0)
    U = U * phase
    return CanonicalForm(Statistics.BOSON, U, values[:r], r)


def antisymmetric_canonical(A, tol: float = SYMMETRY_TOL, cluster_rtol: float = 1e-8) -> CanonicalForm:
    """Block normal form of a complex antisymmetric matrix.

    Each block partner is ``u2 = -conj(A u1) / s`` for a unit right singular
    vector ``u1`` with singular value ``s``; degenerate eigenspaces are consumed
    by Gram-Schmidt so the pairs stay mutually orthogonal.
    """
    A = _check_square(A)
    scale = max(1.0, float(np.max(np.abs(A), initial=0.0)))
    if np.max(np.abs(A + A.T), initial=0.0) > tol * scale:
        raise NotSymmetricError("matrix is not antisymmetric")
    A = 0.5 * (A - A.T)
    M = A.shape[0]
    # right singular vectors span the eigenspaces of A^dagger A
    _, sing, Vh = np.linalg.svd(A)
    evecs = Vh.conj().T
    smax = sing[0] if M else 0.0
    cutoff = RANK_RTOL * smax
    cols: list[np.ndarray] = []
    coeffs: list[float] = []
    start = 0
    while start < M and sing[start] > cutoff:
        stop = start + 1
        while stop < M and abs(sing[stop] - sing[start]) <= cluster_rtol * smax:
            stop += 1
        V = evecs[:, start:stop]
        while len(cols) < stop:
            P = V.copy()
            if cols:
                Uc = np.array(cols).T
                P = P - Uc @ (Uc.conj().T @ P)
            norms = np.linalg.norm(P, axis=0)
            j = int(np.argmax(norms))
            if norms[j] < 1e-6:
                break
            u1 = P[:, j] / norms[j]
            Au = A @ u1
            s = float(np.linalg.norm(Au))
            u2 = -Au.conj() / s
            for u in cols:
                u2 = u2 - np.vdot(u, u2) * u
            u2 = u2 / np.linalg.norm(u2)
            cols.extend([u1, u2])
            coeffs.append(s)
        start = stop
    U = _complete(np.array(cols).T.reshape(M, len(cols)), M)
    coeffs_arr = np.array(coeffs)
    order = np.argsort(-np.round(coeffs_arr, 12), kind="stable")
    blocks = [U[:, 2 * k : 2 * k + 2] for k in order]
    U = np.hstack(blocks + [U[:, 2 * len(coeffs) :]]) if coeffs else U
    coeffs_arr = coeffs_arr[order]
    return CanonicalForm(Statistics.FERMION, U, coeffs_arr, len(coeffs))


def canonicalize(A, statistics) -> CanonicalForm:
    statistics = as_statistics(statistics)
    if statistics is Statistics.BOSON:
        return takagi(A)
    return antisymmetric_canonical(A)


def build_qspec(canon: CanonicalForm, statistics=None, equalize: bool = True, M: int | None = None) -> QSpec:
    """``QSpec`` for the rotated standard basis of ``canon``.

    With ``equalize`` every coefficient is replaced by 1; otherwise the
    canonical coefficients are kept.
    """
    statistics = canon.statistics if statistics is None else as_statistics(statistics)
    if statistics is not canon.statistics:
        raise ValueError("statistics does not match the canonical form")
    if canon.rank == 0:
        raise NoPairingError("pairing matrix has rank 0")
    coeffs = (1.0,) * canon.rank if equalize else tuple(float(a) for a in canon.coefficients[: canon.rank])
    return QSpec(statistics, canon.rank, coeffs, M or canon.U.shape[0])


# ---------------------------------------------------------------------------
# I/O


def pairing_matrix_from_json(text: str) -> tuple[Statistics | None, np.ndarray]:
    """Parse ``{"statistics": ..., "re": [[...]], "im": [[...]]}``."""
    data = json.loads(text)
    re = np.asarray(data["re"], dtype=float)
    im = np.asarray(data.get("im", np.zeros_like(re)), dtype=float)
    stat = as_statistics(data["statistics"]) if "statistics" in data else None
    return stat, _check_square(re + 1j * im)


def pairing_matrix_from_csv(text: str) -> np.ndarray:
    """Parse row-major CSV with interleaved ``re, im`` columns per entry."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].lstrip().startswith("#")]
    vals = np.asarray(rows, dtype=float)
    if vals.shape[1] % 2:
        raise ValueError("CSV rows must hold interleaved re,im pairs")
    return _check_square(vals[:, 0::2] + 1j * vals[:, 1::2])
