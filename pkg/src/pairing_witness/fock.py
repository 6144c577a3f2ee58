"""Fixed-particle-number Fock sectors and second-quantized operators.

Sectors are enumerated in ascending lexicographic order of the occupation
vector, mode 0 most significant.  Fermionic operators carry the parity sign
``(-1)**(number of occupied modes with a lower index)``; bosonic operators
carry the usual ``sqrt(n)`` factors.  Modes are 0-based throughout.

Elementary operators are realised as gathers over precomputed index tables
(:class:`Ladder`), which keeps applications fully vectorised and lets the same
tables back both sparse-matrix assembly and direct state manipulation.
"""

from __future__ import annotations

import enum
import functools
import json
from dataclasses import dataclass
from math import comb
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

DEFAULT_SECTOR_CAP = 5_000_000


class Statistics(str, enum.Enum):
    FERMION = "fermion"
    BOSON = "boson"


class InvalidDimensionError(ValueError):
    """Raised for impossible (statistics, M, N) combinations."""


class SectorTooLargeError(OverflowError):
    """Raised when a sector exceeds the configured size cap."""


_sector_cap = DEFAULT_SECTOR_CAP


def set_sector_cap(cap: int) -> int:
    """Set the global sector-size cap and return the previous value."""
    global _sector_cap
    previous, _sector_cap = _sector_cap, int(cap)
    return previous


def get_sector_cap() -> int:
    return _sector_cap


def as_statistics(statistics) -> Statistics:
    if isinstance(statistics, Statistics):
        return statistics
    try:
        return Statistics(str(statistics).lower())
    except ValueError:
        raise ValueError(f"unknown statistics {statistics!r}") from None


def sector_size(statistics, M: int, N: int) -> int:
    """Number of occupation vectors with ``N`` particles in ``M`` modes."""
    statistics = as_statistics(statistics)
    if N < 0 or M < 0:
        return 0
    if M == 0:
        return 1 if N == 0 else 0
    if statistics is Statistics.FERMION:
        return comb(M, N)
    return comb(N + M - 1, N)


def _count(statistics: Statistics, m: int, n: int) -> int:
    # states with n particles on the last m modes
    if n < 0:
        return 0
    if m == 0:
        return 1 if n == 0 else 0
    if statistics is Statistics.FERMION:
        return comb(m, n)
    return comb(n + m - 1, n)


@functools.lru_cache(maxsize=None)
def _enumerate(statistics: Statistics, m: int, n: int) -> np.ndarray:
    if m == 0:
        return np.zeros((1 if n == 0 else 0, 0), dtype=np.int64)
    vmax = n if statistics is Statistics.BOSON else min(n, 1)
    blocks = []
    for v in range(vmax + 1):
        tail = _enumerate(statistics, m - 1, n - v)
        if len(tail):
            head = np.full((len(tail), 1), v, dtype=np.int64)
            blocks.append(np.hstack([head, tail]))
    if not blocks:
        return np.zeros((0, m), dtype=np.int64)
    return np.vstack(blocks)


@dataclass(frozen=True, eq=False)
class FockSector:
    """All ``N``-particle occupation vectors over ``M`` modes.

    ``basis[k]`` is the ``k``-th occupation vector; :meth:`rank` is its exact
    inverse.
    """

    statistics: Statistics
    M: int
    N: int
    basis: np.ndarray
    _rank_table: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def __len__(self) -> int:
        return self.dim

    @property
    def key(self) -> tuple[Statistics, int, int]:
        return (self.statistics, self.M, self.N)

    def __eq__(self, other) -> bool:
        return isinstance(other, FockSector) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return f"FockSector({self.statistics.value}, M={self.M}, N={self.N}, dim={self.dim})"

    def rank(self, occ: np.ndarray) -> np.ndarray:
        """Ordinal of each occupation vector (rows of ``occ``) in this sector.

        Vectors that do not belong to the sector map to ``-1``.
        """
        occ = np.asarray(occ, dtype=np.int64)
        single = occ.ndim == 1
        occ = np.atleast_2d(occ)
        if occ.shape[1] != self.M:
            raise ValueError(f"occupation vectors must have length {self.M}")
        vmax = self.N if self.statistics is Statistics.BOSON else 1
        valid = np.all((occ >= 0) & (occ <= vmax), axis=1) & (occ.sum(axis=1) == self.N)
        safe = np.where(valid[:, None], occ, 0)
        remaining = self.N - np.concatenate(
            [np.zeros((len(occ), 1), dtype=np.int64), np.cumsum(safe, axis=1)[:, :-1]], axis=1
        )
        remaining = np.clip(remaining, 0, self.N)
        cols = np.arange(self.M)
        out = self._rank_table[cols[None, :], remaining, np.minimum(safe, self.N)].sum(axis=1)
        out = np.where(valid, out, -1)
        return int(out[0]) if single else out

    def index(self, occ: Sequence[int]) -> int:
        k = self.rank(np.asarray(occ))
        if k < 0:
            raise KeyError(f"{tuple(occ)} is not in {self!r}")
        return k

    def __contains__(self, occ) -> bool:
        return self.rank(np.asarray(occ)) >= 0

    def to_dict(self) -> dict:
        return {
            "statistics": self.statistics.value,
            "M": self.M,
            "N": self.N,
            "basis": self.basis.tolist(),
        }


def _rank_table(statistics: Statistics, M: int, N: int) -> np.ndarray:
    # table[i, n, v] = number of states on modes i.. with n particles whose entry at i is < v
    table = np.zeros((M, N + 1, N + 1), dtype=np.int64)
    for i in range(M):
        for n in range(N + 1):
            acc = 0
            for v in range(N + 1):
                table[i, n, v] = acc
                if v <= n and (statistics is Statistics.BOSON or v <= 1):
                    acc += _count(statistics, M - i - 1, n - v)
    return table


@functools.lru_cache(maxsize=64)
def _sector(statistics: Statistics, M: int, N: int) -> FockSector:
    basis = _enumerate(statistics, M, N)
    basis.setflags(write=False)
    table = _rank_table(statistics, M, N)
    table.setflags(write=False)
    return FockSector(statistics, M, N, basis, table)


def enumerate_sector(statistics, M: int, N: int, cap: int | None = None) -> FockSector:
    """Return the (cached) ``N``-particle sector over ``M`` modes."""
    statistics = as_statistics(statistics)
    if M < 1 or N < 0:
        raise InvalidDimensionError(f"need M >= 1 and N >= 0, got M={M}, N={N}")
    if statistics is Statistics.FERMION and N > M:
        raise InvalidDimensionError(f"{N} fermions do not fit in {M} modes")
    cap = _sector_cap if cap is None else cap
    size = sector_size(statistics, M, N)
    if size > cap:
        raise SectorTooLargeError(f"sector size {size} exceeds cap {cap}")
    return _sector(statistics, int(M), int(N))


def sector_exists(statistics, M: int, N: int) -> bool:
    statistics = as_statistics(statistics)
    return N >= 0 and not (statistics is Statistics.FERMION and N > M)


# ---------------------------------------------------------------------------
# ladder tables


@dataclass(frozen=True, eq=False)
class Ladder:
    """Index tables connecting the ``N-1`` and ``N`` particle sectors.

    ``down_idx[t, i]`` is the ``N-1`` ordinal of ``c_i |t>`` with coefficient
    ``down_coef[t, i]``; ``up_idx[s, i]`` / ``up_coef[s, i]`` describe
    ``c_i^dagger |s>``.  Missing targets are ``-1`` with coefficient 0, so a
    gather from an array padded with one trailing zero is always safe.
    """

    lower: FockSector
    upper: FockSector
    down_idx: np.ndarray
    down_coef: np.ndarray
    up_idx: np.ndarray
    up_coef: np.ndarray


def _parity_prefix(occ: np.ndarray) -> np.ndarray:
    lower = np.concatenate([np.zeros((len(occ), 1), dtype=np.int64), np.cumsum(occ, axis=1)[:, :-1]], axis=1)
    return np.where(lower % 2 == 0, 1.0, -1.0)


@functools.lru_cache(maxsize=32)
def _ladder(statistics: Statistics, M: int, N: int) -> Ladder:
    upper = enumerate_sector(statistics, M, N)
    lower = enumerate_sector(statistics, M, N - 1)
    eye = np.eye(M, dtype=np.int64)

    occ = upper.basis
    down_idx = np.full((upper.dim, M), -1, dtype=np.int64)
    for i in range(M):
        down_idx[:, i] = lower.rank(occ - eye[i])
    if statistics is Statistics.FERMION:
        down_coef = np.where(occ == 1, _parity_prefix(occ), 0.0)
    else:
        down_coef = np.sqrt(occ.astype(float))
    down_coef = np.where(down_idx >= 0, down_coef, 0.0)

    occ = lower.basis
    up_idx = np.full((lower.dim, M), -1, dtype=np.int64)
    for i in range(M):
        up_idx[:, i] = upper.rank(occ + eye[i])
    if statistics is Statistics.FERMION:
        up_coef = np.where(occ == 0, _parity_prefix(occ), 0.0)
    else:
        up_coef = np.sqrt(occ.astype(float) + 1.0)
    up_coef = np.where(up_idx >= 0, up_coef, 0.0)

    for arr in (down_idx, down_coef, up_idx, up_coef):
        arr.setflags(write=False)
    return Ladder(lower, upper, down_idx, down_coef, up_idx, up_coef)


def ladder(statistics, M: int, N: int) -> Ladder:
    """Tables for creation into / annihilation out of the ``N`` sector."""
    statistics = as_statistics(statistics)
    if N < 1:
        raise InvalidDimensionError("a ladder needs N >= 1")
    enumerate_sector(statistics, M, N)
    return _ladder(statistics, int(M), int(N))


def _pad(v: np.ndarray) -> np.ndarray:
    return np.concatenate([v, np.zeros(1, dtype=v.dtype)])


def annihilate_all(statistics, M: int, N: int, v: np.ndarray) -> np.ndarray:
    """Columns ``c_i v`` for every mode ``i``, shape ``(dim_{N-1}, M)``."""
    lad = ladder(statistics, M, N)
    return lad.up_coef * _pad(v)[lad.up_idx]


def create_with(statistics, M: int, N: int, v: np.ndarray, orbital: np.ndarray) -> np.ndarray:
    """``c^dagger(orbital) v`` for ``v`` in the ``N-1`` sector (result in ``N``)."""
    lad = ladder(statistics, M, N)
    return (lad.down_coef * _pad(v)[lad.down_idx]) @ orbital


# ---------------------------------------------------------------------------
# states


@dataclass(frozen=True, eq=False)
class StateVector:
    """Amplitudes over the canonical basis of one sector."""

    sector: FockSector
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.sector.dim,):
            raise ValueError(f"expected {self.sector.dim} amplitudes, got shape {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def statistics(self) -> Statistics:
        return self.sector.statistics

    @property
    def N(self) -> int:
        return self.sector.N

    @property
    def M(self) -> int:
        return self.sector.M

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        nrm = self.norm()
        if nrm == 0.0:
            raise ZeroDivisionError("cannot normalize the zero vector")
        return StateVector(self.sector, self.amplitudes / nrm)

    def vdot(self, other: "StateVector") -> complex:
        if other.sector != self.sector:
            raise ValueError("states live in different sectors")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def is_zero(self, atol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.amplitudes) <= atol))


def vacuum(statistics, M: int) -> StateVector:
    return StateVector(enumerate_sector(statistics, M, 0), np.ones(1))


def basis_state(statistics, occ: Sequence[int]) -> StateVector:
    occ = np.asarray(occ, dtype=np.int64)
    sector = enumerate_sector(statistics, len(occ), int(occ.sum()))
    amps = np.zeros(sector.dim, dtype=complex)
    amps[sector.index(occ)] = 1.0
    return StateVector(sector, amps)


def _check_mode(state: StateVector, mode: int) -> None:
    if not 0 <= mode < state.M:
        raise IndexError(f"mode {mode} out of range for M={state.M}")


def apply_annihilator(state: StateVector, mode: int) -> StateVector:
    """``c_mode |state>``; annihilating an empty mode gives the zero vector."""
    _check_mode(state, mode)
    if state.N < 1:
        raise InvalidDimensionError("cannot annihilate a particle from the vacuum sector")
    lad = ladder(state.statistics, state.M, state.N)
    out = lad.up_coef[:, mode] * _pad(state.amplitudes)[lad.up_idx[:, mode]]
    return StateVector(lad.lower, out)


def apply_creator(state: StateVector, mode: int) -> StateVector:
    """``c_mode^dagger |state>``; Pauli-blocked fermionic creation gives zero."""
    _check_mode(state, mode)
    if state.statistics is Statistics.FERMION and state.N >= state.M:
        raise InvalidDimensionError("no room for another fermion")
    lad = ladder(state.statistics, state.M, state.N + 1)
    out = lad.down_coef[:, mode] * _pad(state.amplitudes)[lad.down_idx[:, mode]]
    return StateVector(lad.upper, out)


def _check_orbital(state: StateVector, orbital) -> np.ndarray:
    orbital = np.asarray(orbital, dtype=complex)
    if orbital.shape != (state.M,):
        raise ValueError(f"orbital must have length {state.M}, got shape {orbital.shape}")
    if not np.all(np.isfinite(orbital)):
        raise ValueError("orbital must be finite")
    return orbital


def apply_general_creator(state: StateVector, orbital) -> StateVector:
    """``c^dagger(phi) = sum_i phi_i c_i^dagger`` applied to ``state``."""
    orbital = _check_orbital(state, orbital)
    if state.statistics is Statistics.FERMION and state.N >= state.M:
        raise InvalidDimensionError("no room for another fermion")
    lad = ladder(state.statistics, state.M, state.N + 1)
    return StateVector(lad.upper, create_with(state.statistics, state.M, state.N + 1, state.amplitudes, orbital))


def apply_general_annihilator(state: StateVector, orbital) -> StateVector:
    """``c(phi) = sum_i conj(phi_i) c_i`` applied to ``state``."""
    orbital = _check_orbital(state, orbital)
    cols = annihilate_all(state.statistics, state.M, state.N, state.amplitudes)
    return StateVector(ladder(state.statistics, state.M, state.N).lower, cols @ orbital.conj())


def product_state(statistics, orbitals) -> StateVector:
    """``c^dagger(phi_0) c^dagger(phi_1) ... c^dagger(phi_{N-1}) |0>`` (unnormalized)."""
    orbitals = np.atleast_2d(np.asarray(orbitals, dtype=complex))
    statistics = as_statistics(statistics)
    state = vacuum(statistics, orbitals.shape[1])
    for phi in orbitals[::-1]:
        state = apply_general_creator(state, phi)
    return state


# ---------------------------------------------------------------------------
# operators

# A term is (coefficient, ((kind, mode), ...)) with kind "+" for c^dagger and
# "-" for c; the rightmost factor acts first.
Term = tuple[complex, tuple[tuple[str, int], ...]]


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """A sparse map from ``sector_in`` to ``sector_out``."""

    matrix: sp.csr_matrix
    sector_in: FockSector
    sector_out: FockSector
    hermitian: bool = False

    @property
    def dim_in(self) -> int:
        return self.sector_in.dim

    @property
    def dim_out(self) -> int:
        return self.sector_out.dim

    def __matmul__(self, other):
        if isinstance(other, StateVector):
            if other.sector != self.sector_in:
                raise ValueError("state is not in the operator's input sector")
            return StateVector(self.sector_out, self.matrix @ other.amplitudes)
        return self.matrix @ other

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def entries(self) -> list[tuple[int, int, complex]]:
        coo = self.matrix.tocoo()
        return [(int(i), int(j), complex(v)) for i, j, v in zip(coo.row, coo.col, coo.data)]

    def hermiticity_residual(self) -> float:
        diff = self.matrix - self.matrix.conj().T
        return float(abs(diff).max()) if diff.nnz else 0.0

    def to_dict(self) -> dict:
        out = self.sector_in.to_dict()
        if self.sector_out != self.sector_in:
            out["N_out"] = self.sector_out.N
            out["basis_out"] = self.sector_out.basis.tolist()
        out["hermitian"] = self.hermitian
        out["entries"] = [[i, j, v.real, v.imag] for i, j, v in self.entries()]
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "SparseOperator":
        stat = as_statistics(data["statistics"])
        sin = enumerate_sector(stat, data["M"], data["N"])
        sout = enumerate_sector(stat, data["M"], data.get("N_out", data["N"]))
        if np.asarray(data["basis"]).tolist() != sin.basis.tolist():
            raise ValueError("basis in dump does not match the canonical ordering")
        entries = np.asarray(data["entries"], dtype=float).reshape(-1, 4)
        mat = sp.csr_matrix(
            (entries[:, 2] + 1j * entries[:, 3], (entries[:, 0].astype(int), entries[:, 1].astype(int))),
            shape=(sout.dim, sin.dim),
        )
        return cls(mat, sin, sout, bool(data.get("hermitian", False)))


def _apply_term(sector: FockSector, ops: tuple[tuple[str, int], ...]):
    stat, M = sector.statistics, sector.M
    idx = np.arange(sector.dim)
    amp = np.ones(sector.dim)
    n = sector.N
    for kind, mode in reversed(ops):
        if not 0 <= mode < M:
            raise IndexError(f"mode {mode} out of range for M={M}")
        if kind == "-":
            if n == 0:
                return n - 1, None, None
            lad = ladder(stat, M, n)
            safe = np.where(idx >= 0, idx, 0)
            amp = amp * np.where(idx >= 0, lad.down_coef[safe, mode], 0.0)
            idx = np.where(idx >= 0, lad.down_idx[safe, mode], -1)
            n -= 1
        elif kind == "+":
            if not sector_exists(stat, M, n + 1):
                return n + 1, None, None
            lad = ladder(stat, M, n + 1)
            safe = np.where(idx >= 0, idx, 0)
            amp = amp * np.where(idx >= 0, lad.up_coef[safe, mode], 0.0)
            idx = np.where(idx >= 0, lad.up_idx[safe, mode], -1)
            n += 1
        else:
            raise ValueError(f"operator kind must be '+' or '-', got {kind!r}")
    return n, idx, amp


def assemble_operator(sector: FockSector, terms: Iterable[Term], hermitian: bool = False) -> SparseOperator:
    """Sparse matrix of ``sum coef * product(ops)`` acting on ``sector``.

    All terms must change the particle number by the same amount.
    """
    terms = list(terms)
    shifts = {sum(1 if k == "+" else -1 for k, _ in ops) for _, ops in terms}
    if len(shifts) > 1:
        raise ValueError("terms change particle number by different amounts")
    shift = shifts.pop() if shifts else 0
    n_out = sector.N + shift
    if not sector_exists(sector.statistics, sector.M, n_out):
        raise InvalidDimensionError(f"output sector N={n_out} does not exist")
    out = enumerate_sector(sector.statistics, sector.M, n_out)
    rows, cols, data = [], [], []
    for coef, ops in terms:
        _, idx, amp = _apply_term(sector, tuple(ops))
        if idx is None:
            continue
        keep = (idx >= 0) & (amp != 0.0)
        rows.append(idx[keep])
        cols.append(np.nonzero(keep)[0])
        data.append(coef * amp[keep])
    if rows:
        rows, cols, data = np.concatenate(rows), np.concatenate(cols), np.concatenate(data).astype(complex)
    else:
        rows, cols, data = np.zeros(0, int), np.zeros(0, int), np.zeros(0, complex)
    mat = sp.csr_matrix((data, (rows, cols)), shape=(out.dim, sector.dim))
    mat.sum_duplicates()
    mat.eliminate_zeros()
    return SparseOperator(mat, sector, out, hermitian)


def mode_operator(statistics, M: int, N: int, mode: int, kind: str) -> SparseOperator:
    """Matrix of ``c_mode`` (kind ``"-"``) or ``c_mode^dagger`` (``"+"``) on sector ``N``."""
    return assemble_operator(enumerate_sector(statistics, M, N), [(1.0, ((kind, mode),))])


def number_terms(modes: Iterable[int]) -> list[Term]:
    return [(1.0, (("+", i), ("-", i))) for i in modes]
