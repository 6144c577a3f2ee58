"""Pairing witnesses ``W = Lambda * 1 - Q^dagger Q``."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .fock import SparseOperator, StateVector, Statistics, as_statistics
from .pairing import QSpec, qdagq_operator
from .separability import BoundKind, BoundResult, as_bound_kind, bound
from .spectral import lambda_max

VERDICT_TOL = 1e-9
NORM_TOL = 1e-10


class Verdict(str, enum.Enum):
    NO_VIOLATION = "NoViolation"
    CORRELATED = "Correlated"


class StateError(ValueError):
    """State not normalized or not in a single sector matching ``Q``."""


@dataclass(frozen=True)
class WitnessReport:
    qspec: QSpec
    N: int
    bound_kind: BoundKind
    Lambda: float
    expectation: float
    lower_bound: bool = False

    @property
    def margin(self) -> float:
        return self.Lambda - self.expectation

    @property
    def verdict(self) -> Verdict:
        return Verdict.CORRELATED if self.margin < -VERDICT_TOL else Verdict.NO_VIOLATION

    @property
    def ratio(self) -> float:
        """``lambda_max / Lambda``; infinite when ``Lambda`` is 0."""
        lam = lambda_max(self.qspec.statistics, self.qspec.r, self.N)
        if self.Lambda <= 0:
            return float("inf") if lam > 0 else 1.0
        return lam / self.Lambda

    def to_dict(self) -> dict:
        out = {
            "statistics": self.qspec.statistics.value,
            "r": self.qspec.r,
            "M": self.qspec.M,
            "N": self.N,
            "bound_kind": self.bound_kind.value,
            "Lambda": self.Lambda,
            "expectation": self.expectation,
            "margin": self.margin,
            "verdict": self.verdict.value,
            "ratio": self.ratio,
        }
        if self.lower_bound:
            out["note"] = "Lambda is a numerical lower bound; a Correlated verdict holds only if the optimizer reached the supremum"
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def default_kind(statistics) -> BoundKind:
    return BoundKind.FERMION_SEP if as_statistics(statistics) is Statistics.FERMION else BoundKind.TYPE1


def _resolve(qspec: QSpec, N: int, bound_kind, precomputed: BoundResult | None, **bound_kw) -> BoundResult:
    kind = default_kind(qspec.statistics) if bound_kind is None else as_bound_kind(bound_kind)
    if precomputed is not None:
        if precomputed.kind is not kind or precomputed.r != qspec.r or precomputed.N != N:
            raise ValueError("precomputed bound does not match (kind, r, N)")
        return precomputed
    return bound(qspec.statistics, kind, qspec.r, N, **bound_kw)


def evaluate_witness(
    qspec: QSpec,
    state: StateVector,
    bound_kind=None,
    *,
    precomputed: BoundResult | None = None,
    **bound_kw,
) -> WitnessReport:
    """Evaluate ``<W>`` on a normalized state of a single particle-number sector.

    ``precomputed`` reuses a bound instead of recomputing it (useful for
    type-2 bounds, which are optimized numerically).
    """
    if not isinstance(state, StateVector):
        raise StateError("expected a StateVector (a single particle-number sector)")
    if state.statistics is not qspec.statistics or state.M != qspec.M:
        raise StateError("state sector does not match Q (statistics or mode count)")
    if abs(state.norm() - 1) > NORM_TOL:
        raise StateError(f"state is not normalized (norm {state.norm():.12g})")
    res = _resolve(qspec, state.N, bound_kind, precomputed, **bound_kw)
    if state.N < 2:
        expect = 0.0
    else:
        amps = state.amplitudes
        expect = float(np.vdot(amps, qdagq_operator(qspec, state.N).matrix @ amps).real)
    return WitnessReport(qspec, state.N, res.kind, res.value, expect, res.lower_bound)


def evaluate_mixture(qspec: QSpec, states, weights, bound_kind=None, **kw) -> WitnessReport:
    """Witness on ``sum_k w_k |psi_k><psi_k|`` (all states in one sector)."""
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1) > NORM_TOL:
        raise StateError("weights must be a probability vector")
    reports = [evaluate_witness(qspec, s, bound_kind, **kw) for s in states]
    if len({r.N for r in reports}) > 1:
        raise StateError("mixture components live in different sectors")
    first = reports[0]
    expect = float(sum(w * r.expectation for w, r in zip(weights, reports)))
    return WitnessReport(qspec, first.N, first.bound_kind, first.Lambda, expect, first.lower_bound)


def detectability_ratio(statistics, r: int, N: int, bound_kind=None) -> float:
    """``lambda_max / Lambda`` from the closed forms (fermion or type-1 bounds)."""
    statistics = as_statistics(statistics)
    kind = default_kind(statistics) if bound_kind is None else as_bound_kind(bound_kind)
    if kind is BoundKind.TYPE2:
        raise ValueError("no closed form for the type-2 bound")
    Lam = bound(statistics, kind, r, N).value
    if Lam <= 0:
        raise ValueError("Lambda is 0, the ratio is undefined")
    return lambda_max(statistics, r, N) / Lam


def witness_matrix(qspec: QSpec, N: int, bound_kind=None, **bound_kw) -> SparseOperator:
    """``Lambda * 1 - Q^dagger Q`` on the ``N`` sector."""
    res = _resolve(qspec, N, bound_kind, None, **bound_kw)
    op = qdagq_operator(qspec, N)
    W = (res.value * sp.identity(op.dim_in, dtype=complex, format="csr") - op.matrix).tocsr()
    return SparseOperator(W, op.sector_in, op.sector_out, True)
