"""Pairing operators ``Q`` in normal form and their matrices on Fock sectors.

Fermions: ``Q = sum_k A_k c_{2k} c_{2k+1}`` over the first ``2r`` modes.
Bosons:   ``Q = 1/2 sum_k A_k c_k^2`` over the first ``r`` modes.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .fock import (
    SparseOperator,
    Statistics,
    Term,
    as_statistics,
    assemble_operator,
    enumerate_sector,
    number_terms,
    sector_exists,
)


@dataclass(frozen=True)
class QSpec:
    """Statistics, rank, coefficients and total mode count of a pairing operator."""

    statistics: Statistics
    r: int
    coefficients: tuple[float, ...] = field(default=())
    M: int = 0

    def __post_init__(self):
        stat = as_statistics(self.statistics)
        object.__setattr__(self, "statistics", stat)
        if self.r < 1:
            raise ValueError("rank r must be >= 1")
        coeffs = tuple(float(a) for a in self.coefficients) or (1.0,) * self.r
        if len(coeffs) != self.r:
            raise ValueError(f"expected {self.r} coefficients, got {len(coeffs)}")
        if any(not a > 0 for a in coeffs):
            raise ValueError("coefficients must be positive")
        object.__setattr__(self, "coefficients", coeffs)
        support = self.support
        M = self.M or support
        if M < support:
            raise ValueError(f"M={M} is smaller than the Q support ({support} modes)")
        object.__setattr__(self, "M", int(M))

    @property
    def support(self) -> int:
        """Number of modes ``Q`` acts on (``2r`` fermions, ``r`` bosons)."""
        return 2 * self.r if self.statistics is Statistics.FERMION else self.r

    @property
    def equal_coefficients(self) -> bool:
        return all(a == 1.0 for a in self.coefficients)

    def with_modes(self, M: int) -> "QSpec":
        return QSpec(self.statistics, self.r, self.coefficients, M)

    def q_terms(self) -> list[Term]:
        if self.statistics is Statistics.FERMION:
            return [(a, (("-", 2 * k), ("-", 2 * k + 1))) for k, a in enumerate(self.coefficients)]
        return [(0.5 * a, (("-", k), ("-", k))) for k, a in enumerate(self.coefficients)]

    def qdag_terms(self) -> list[Term]:
        if self.statistics is Statistics.FERMION:
            return [(a, (("+", 2 * k + 1), ("+", 2 * k))) for k, a in enumerate(self.coefficients)]
        return [(0.5 * a, (("+", k), ("+", k))) for k, a in enumerate(self.coefficients)]

    def qdagq_terms(self) -> list[Term]:
        """Normal-ordered two-body terms of ``Q^dagger Q``."""
        out = []
        for cd, opd in self.qdag_terms():
            for c, op in self.q_terms():
                out.append((np.conj(cd) * c, opd + op))
        return out

    def nq_terms(self) -> list[Term]:
        return number_terms(range(self.support))


@functools.lru_cache(maxsize=256)
def q_operator(qspec: QSpec, N: int) -> SparseOperator:
    """``Q`` as a map from the ``N`` sector to the ``N-2`` sector."""
    return assemble_operator(enumerate_sector(qspec.statistics, qspec.M, N), qspec.q_terms())


@functools.lru_cache(maxsize=256)
def qdag_operator(qspec: QSpec, N: int) -> SparseOperator:
    """``Q^dagger`` as a map from the ``N`` sector to the ``N+2`` sector."""
    return assemble_operator(enumerate_sector(qspec.statistics, qspec.M, N), qspec.qdag_terms())


@functools.lru_cache(maxsize=256)
def qdagq_operator(qspec: QSpec, N: int) -> SparseOperator:
    """``Q^dagger Q`` on the ``N`` sector, assembled from normal-ordered terms."""
    return assemble_operator(enumerate_sector(qspec.statistics, qspec.M, N), qspec.qdagq_terms(), hermitian=True)


def qdagq_by_product(qspec: QSpec, N: int) -> SparseOperator:
    """``Q^dagger Q`` assembled as the product of ``Q`` matrices (independent route)."""
    sector = enumerate_sector(qspec.statistics, qspec.M, N)
    if N < 2:
        return assemble_operator(sector, [], hermitian=True)
    q = q_operator(qspec, N).matrix
    return SparseOperator((q.conj().T @ q).tocsr(), sector, sector, True)


@functools.lru_cache(maxsize=256)
def nq_operator(qspec: QSpec, N: int) -> SparseOperator:
    """Number of particles in the modes ``Q`` acts on."""
    return assemble_operator(enumerate_sector(qspec.statistics, qspec.M, N), qspec.nq_terms(), hermitian=True)


def has_sector(qspec: QSpec, N: int) -> bool:
    return sector_exists(qspec.statistics, qspec.M, N)
