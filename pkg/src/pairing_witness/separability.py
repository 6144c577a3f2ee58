"""Separable-state bounds on ``<Q^dagger Q>``.

Closed forms for fermionic Slater states and bosonic type-1 states (orthonormal
orbitals with multiplicities), a multi-start optimizer for bosonic type-2
states (arbitrary unit orbitals), and the overlap-matrix machinery used to
derive the type-1 bound.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from . import fock
from ._glynn import boson_rayleigh
from .fock import Statistics, as_statistics
from .optimize import GRAD_TOL, maximize_boson_product
from .pairing import QSpec, qdagq_operator
from .spectral import lambda_max

ORTHO_TOL = 1e-10
VALIDATION_TOL = 1e-6


class DegenerateStateError(ValueError):
    """The product state has zero norm (linearly dependent fermionic orbitals)."""


class ValidationError(RuntimeError):
    """Optimizing outside the first ``r`` modes beat the restricted optimum."""


class ProductKind(str, enum.Enum):
    FERMION_SLATER = "fermion_slater"
    BOSON_TYPE1 = "boson_type1"
    BOSON_TYPE2 = "boson_type2"


class BoundKind(str, enum.Enum):
    FERMION_SEP = "fermion_sep"
    TYPE1 = "type1"
    TYPE2 = "type2"


def as_bound_kind(kind) -> BoundKind:
    if isinstance(kind, BoundKind):
        return kind
    aliases = {"fermion": "fermion_sep", "sep": "fermion_sep", "type-1": "type1", "type-2": "type2"}
    return BoundKind(aliases.get(str(kind).lower(), str(kind).lower()))


@dataclass(frozen=True, eq=False)
class ProductStateSpec:
    """Orbitals (rows) of a product state, plus multiplicities for type 1."""

    kind: ProductKind
    orbitals: np.ndarray
    multiplicities: tuple[int, ...] | None = None

    def __post_init__(self):
        kind = ProductKind(self.kind)
        orbs = np.asarray(self.orbitals, dtype=complex)
        if orbs.ndim != 2:
            raise ValueError("orbitals must be a 2-d array (one orbital per row)")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "orbitals", orbs)
        if kind is ProductKind.BOSON_TYPE1:
            if self.multiplicities is None or len(self.multiplicities) != len(orbs):
                raise ValueError("type-1 states need one multiplicity per orbital")
            mult = tuple(int(m) for m in self.multiplicities)
            if any(m < 1 for m in mult):
                raise ValueError("multiplicities must be positive")
            object.__setattr__(self, "multiplicities", mult)
        elif self.multiplicities is not None:
            raise ValueError("multiplicities are only meaningful for type-1 states")
        norms = np.linalg.norm(orbs, axis=1)
        if np.any(np.abs(norms - 1) > ORTHO_TOL):
            raise ValueError("orbitals must have unit norm")
        if kind is not ProductKind.BOSON_TYPE2 and len(orbs):
            gram = orbs.conj() @ orbs.T
            if np.max(np.abs(gram - np.eye(len(orbs)))) > ORTHO_TOL:
                raise ValueError(f"{kind.value} orbitals must be orthonormal")

    @property
    def statistics(self) -> Statistics:
        return Statistics.FERMION if self.kind is ProductKind.FERMION_SLATER else Statistics.BOSON

    @property
    def M(self) -> int:
        return self.orbitals.shape[1]

    @property
    def N(self) -> int:
        return sum(self.multiplicities) if self.multiplicities else len(self.orbitals)

    def expanded(self) -> np.ndarray:
        """One orbital per particle."""
        if self.multiplicities is None:
            return self.orbitals
        return np.repeat(self.orbitals, self.multiplicities, axis=0)

    def state(self) -> fock.StateVector:
        """The normalized product state."""
        if self.N == 0:
            return fock.vacuum(self.statistics, self.M)
        psi = fock.product_state(self.statistics, self.expanded())
        if psi.norm() ** 2 < 1e-20:
            raise DegenerateStateError("product state has zero norm")
        return psi.normalized()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "orbitals_re": self.orbitals.real.tolist(),
            "orbitals_im": self.orbitals.imag.tolist(),
            "multiplicities": list(self.multiplicities) if self.multiplicities else None,
        }


def expectation_qdagq(qspec: QSpec, prod: ProductStateSpec) -> float:
    """``<Psi|Q^dagger Q|Psi>`` for the normalized product state, built in Fock space."""
    if prod.statistics is not qspec.statistics:
        raise ValueError("product state and Q have different statistics")
    if prod.M != qspec.M:
        raise ValueError(f"orbitals have {prod.M} components, Q lives on {qspec.M} modes")
    psi = prod.state()
    if prod.N < 2:
        return 0.0
    op = qdagq_operator(qspec, prod.N)
    return float(np.vdot(psi.amplitudes, op.matrix @ psi.amplitudes).real)


@dataclass
class BoundResult:
    statistics: Statistics
    kind: BoundKind
    r: int
    N: int
    value: float
    certificate: ProductStateSpec
    solver: dict | None = None
    lower_bound: bool = False

    @property
    def lambda_max(self) -> float:
        return lambda_max(self.statistics, self.r, self.N)

    def to_dict(self) -> dict:
        return {
            "statistics": self.statistics.value,
            "kind": self.kind.value,
            "r": self.r,
            "N": self.N,
            "value": self.value,
            "lower_bound": self.lower_bound,
            "lambda_max": self.lambda_max,
            "solver": self.solver,
            "certificate": self.certificate.to_dict(),
        }


# ---------------------------------------------------------------------------
# closed forms


def fermion_sep_value(r: int, N: int) -> int:
    if r < 1 or N < 0:
        raise ValueError("need r >= 1 and N >= 0")
    return N // 2 if N < 2 * r else r


def fermion_sep_bound(r: int, N: int, M: int | None = None) -> BoundResult:
    """Slater-state maximum; the certificate fills the first ``N`` modes."""
    value = fermion_sep_value(r, N)
    M = max(2 * r, N) if M is None else M
    if M < max(2 * r, N):
        raise ValueError(f"need at least {max(2 * r, N)} modes")
    cert = ProductStateSpec(ProductKind.FERMION_SLATER, np.eye(M, dtype=complex)[:N])
    return BoundResult(Statistics.FERMION, BoundKind.FERMION_SEP, r, N, float(value), cert)


def type1_value(N: int) -> int:
    """``max_{m1 + m2 = N} m1 m2``."""
    if N < 0:
        raise ValueError("N must be non-negative")
    return (N * N) // 4


def conjugate_orbital(phi) -> np.ndarray:
    return np.conj(np.asarray(phi, dtype=complex))


def conjugate_pair(M: int) -> np.ndarray:
    alpha = np.zeros(M, dtype=complex)
    alpha[:2] = np.array([1, 1j]) / np.sqrt(2)
    return np.array([alpha, conjugate_orbital(alpha)])


def boson_type1_bound(r: int, N: int, M: int | None = None) -> BoundResult:
    """Type-1 maximum, certified by ``alpha`` and its conjugate with ``m = (ceil(N/2), floor(N/2))``."""
    if r < 2:
        raise ValueError("the type-1 bound needs r >= 2")
    M = r if M is None else M
    if M < r:
        raise ValueError("M must be at least r")
    pair = conjugate_pair(M)
    mult = [m for m in ((N + 1) // 2, N // 2) if m > 0]
    cert = ProductStateSpec(ProductKind.BOSON_TYPE1, pair[: len(mult)], tuple(mult))
    return BoundResult(Statistics.BOSON, BoundKind.TYPE1, r, N, float(type1_value(N)), cert)


# ---------------------------------------------------------------------------
# type 2


def boson_type2_bound(
    r: int,
    N: int,
    *,
    restarts: int = 64,
    seed: int | None = 0,
    M: int | None = None,
    validate: bool = False,
    coefficients: Sequence[float] | None = None,
    gtol: float = GRAD_TOL,
) -> BoundResult:
    """Best type-2 value found by multi-start ascent (a certified lower bound).

    Orbitals live in the first ``r`` modes.  With ``validate`` the search is
    repeated in ``r + 2`` modes and :class:`ValidationError` is raised if that
    improves the value by more than ``VALIDATION_TOL``.
    """
    if r < 2:
        raise ValueError("type-2 bounds need r >= 2")
    if N < 0:
        raise ValueError("N must be non-negative")
    M = r if M is None else M
    if N < 2:
        orbs = np.zeros((N, M), dtype=complex)
        orbs[:, 0] = 1.0
        cert = ProductStateSpec(ProductKind.BOSON_TYPE2, orbs)
        solver = {"restarts": 0, "iterations": 0, "converged_fraction": 1.0, "hit_fraction": 1.0,
                  "tolerance": gtol, "seed": seed}
        return BoundResult(Statistics.BOSON, BoundKind.TYPE2, r, N, 0.0, cert, solver, lower_bound=True)
    res = maximize_boson_product(r, N, M, coefficients=coefficients, span=r, restarts=restarts, seed=seed, gtol=gtol)
    solver = res.report.to_dict()
    if validate:
        wide = maximize_boson_product(r, N, r + 2, coefficients=coefficients, restarts=restarts, seed=seed, gtol=gtol)
        gain = wide.value - res.value
        solver["validation"] = {"M": r + 2, "value": wide.value, "gain": gain}
        if gain > VALIDATION_TOL:
            raise ValidationError(f"orbitals outside the first r modes improved the bound by {gain:.3g}")
    cert = ProductStateSpec(ProductKind.BOSON_TYPE2, res.orbitals)
    return BoundResult(Statistics.BOSON, BoundKind.TYPE2, r, N, res.value, cert, solver, lower_bound=True)


def bound(statistics, kind, r: int, N: int, **kwargs) -> BoundResult:
    """Dispatch on the bound kind."""
    statistics, kind = as_statistics(statistics), as_bound_kind(kind)
    if statistics is Statistics.FERMION:
        if kind is not BoundKind.FERMION_SEP:
            raise ValueError(f"{kind.value} is a bosonic bound")
        return fermion_sep_bound(r, N, kwargs.get("M"))
    if kind is BoundKind.TYPE1:
        return boson_type1_bound(r, N, kwargs.get("M"))
    if kind is BoundKind.TYPE2:
        return boson_type2_bound(r, N, **kwargs)
    raise ValueError("fermion_sep is a fermionic bound")


# ---------------------------------------------------------------------------
# overlap matrices and f(D)


@dataclass(frozen=True, eq=False)
class OverlapMatrices:
    R: np.ndarray
    D: np.ndarray

    @property
    def row_sums(self) -> np.ndarray:
        return self.D.sum(axis=1)

    def is_substochastic(self, tol: float = 1e-10) -> bool:
        return bool(np.all(self.row_sums <= 1 + tol))


def overlap_matrices(orbitals, r: int) -> OverlapMatrices:
    """``R_ab = sum_{i<r} alpha_a[i] alpha_b[i]`` and ``D = |R|**2``.

    For orthonormal orbitals ``D`` is doubly substochastic; that is checked.
    """
    orbs = np.atleast_2d(np.asarray(orbitals, dtype=complex))
    if np.any(np.abs(np.linalg.norm(orbs, axis=1) - 1) > ORTHO_TOL):
        raise ValueError("orbitals must have unit norm")
    P = orbs[:, :r]
    R = P @ P.T
    out = OverlapMatrices(R, np.abs(R) ** 2)
    gram = orbs.conj() @ orbs.T
    if np.max(np.abs(gram - np.eye(len(orbs)))) <= ORTHO_TOL and not out.is_substochastic():
        raise ArithmeticError("D of orthonormal orbitals is not substochastic")
    return out


def f_of_D(D, m: Sequence[int]) -> float:
    """``1/2 sum_{a != b} D_ab m_a m_b + 1/4 sum_a D_aa m_a (m_a - 1)``."""
    D = np.asarray(D, dtype=float)
    m = np.asarray(m, dtype=float)
    if D.shape != (len(m), len(m)):
        raise ValueError("D must be p x p with p = len(m)")
    off = D - np.diag(np.diag(D))
    return float(0.5 * m @ off @ m + 0.25 * np.sum(np.diag(D) * m * (m - 1)))


def f_of_permutation(perm: Sequence[int], m: Sequence[int]) -> Fraction:
    """Exact ``f(D)`` for the permutation matrix ``D[a, perm[a]] = 1``."""
    total = Fraction(0)
    for a, b in enumerate(perm):
        if a == b:
            total += Fraction(m[a] * (m[a] - 1), 4)
        else:
            total += Fraction(m[a] * m[b], 2)
    return total


def permutation_maximizer(m: Sequence[int]) -> tuple[tuple[int, ...], Fraction]:
    """Exhaustive maximum of ``f`` over permutation matrices (``len(m) <= 10``).

    Ties keep the lexicographically first permutation.
    """
    m = [int(x) for x in m]
    if not 1 <= len(m) <= 10:
        raise ValueError("need 1 <= p <= 10")
    if any(x < 1 for x in m):
        raise ValueError("multiplicities must be positive")
    best, best_val = None, None
    for perm in itertools.permutations(range(len(m))):
        val = f_of_permutation(perm, m)
        if best_val is None or val > best_val:
            best, best_val = perm, val
    return best, best_val


def partitions(N: int, p_max: int | None = None):
    """Partitions of ``N`` into at most ``p_max`` positive parts, non-increasing, fewest parts first."""
    p_max = N if p_max is None else p_max

    def parts(n, k, cap):
        if k == 0:
            if n == 0:
                yield ()
            return
        for first in range(min(n - (k - 1), cap), 0, -1):
            if first * k < n:
                break
            for rest in parts(n - first, k - 1, first):
                yield (first,) + rest

    for p in range(1, min(N, p_max) + 1):
        yield from parts(N, p, N)


def cycle_sum(m: Sequence[int]) -> Fraction:
    """``f`` restricted to one cycle through ``m``: ``1/2 (m1 m2 + ... + m_l m1)``."""
    return Fraction(sum(m[i] * m[(i + 1) % len(m)] for i in range(len(m))), 2)


def conjoin_sides(m1: int, m2: int, m3: int, m4: int, m5: int, m_last: int) -> tuple[int, int]:
    """Both sides of the ``l -> l-2`` reduction (labels 1,3 and 2,4 merged)."""
    lhs = m_last * m1 + m1 * m2 + m2 * m3 + m3 * m4 + m4 * m5
    rhs = m_last * (m1 + m3) + (m1 + m3) * (m2 + m4) + (m2 + m4) * m5
    return lhs, rhs


def four_cycle_sides(m1: int, m2: int, m3: int, m4: int) -> tuple[Fraction, int]:
    return cycle_sum((m1, m2, m3, m4)), (m1 + m3) * (m2 + m4)


def three_cycle_sides(m1: int, m2: int, m3: int) -> tuple[Fraction, int]:
    """Sides of the 3-cycle reduction; ``m1`` must be the largest."""
    if m1 < m2 or m1 < m3:
        raise ValueError("m1 must be the largest multiplicity")
    return cycle_sum((m1, m2, m3)), m1 * (m2 + m3)


# ---------------------------------------------------------------------------
# type-1 oracle


def _frame(x: np.ndarray, M: int, p: int) -> np.ndarray:
    X = (x[: M * p] + 1j * x[M * p :]).reshape(M, p)
    Q, _ = np.linalg.qr(X)
    return Q.T


def type1_bound_oracle(
    r: int, N: int, p_max: int = 4, restarts: int = 3, seed: int | None = 0
) -> BoundResult:
    """Numerical type-1 maximum over all multiplicity partitions with ``p <= p_max`` parts.

    Each partition is optimized over orthonormal frames in ``r + p`` modes
    (QR of an unconstrained complex matrix), starting from several random
    frames.  The objective is the permanent formula for ``<Q^dagger Q>``.
    Ties between partitions keep the one with fewer parts.
    """
    if r < 2 or N < 0:
        raise ValueError("need r >= 2 and N >= 0")
    if p_max > 4 or N > 8:
        raise ValueError("the oracle is limited to p_max <= 4 and N <= 8")
    rng = np.random.default_rng(seed)
    best: tuple[float, ProductStateSpec] | None = None
    if N == 0:
        return BoundResult(Statistics.BOSON, BoundKind.TYPE1, r, 0, 0.0,
                           ProductStateSpec(ProductKind.BOSON_TYPE1, np.zeros((0, r)), ()))
    for m in partitions(N, p_max):
        p = len(m)
        M = r + p

        def neg(x, m=m, M=M, p=p):
            frame = _frame(x, M, p)
            return -float(boson_rayleigh(np.repeat(frame, m, axis=0), r))

        for _ in range(restarts):
            x0 = rng.normal(size=2 * M * p)
            res = minimize(neg, x0, method="BFGS", options={"gtol": 1e-9})
            value = -float(res.fun)
            if best is None or value > best[0] + 1e-9:
                frame = _frame(res.x, M, p)
                best = (value, ProductStateSpec(ProductKind.BOSON_TYPE1, frame, tuple(m)))
    value, cert = best
    return BoundResult(Statistics.BOSON, BoundKind.TYPE1, r, N, value, cert,
                       {"restarts": restarts, "p_max": p_max, "seed": seed}, lower_bound=True)


def certificate_value(result: BoundResult, coefficients: Sequence[float] = ()) -> float:
    """Re-evaluate ``<Q^dagger Q>`` on the certificate of ``result`` in Fock space."""
    cert = result.certificate
    qspec = QSpec(result.statistics, result.r, tuple(coefficients), cert.M)
    return expectation_qdagq(qspec, cert)

