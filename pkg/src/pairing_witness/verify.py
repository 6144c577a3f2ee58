"""Closed forms checked against brute force, algebra residuals and the
cycle-reduction inequalities, grouped by scope."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np

from . import fock
from .optimize import maximize_slater
from .pairing import QSpec, qdagq_operator
from .separability import (
    conjoin_sides,
    fermion_sep_value,
    four_cycle_sides,
    partitions,
    permutation_maximizer,
    three_cycle_sides,
    type1_value,
)
from .spectral import (
    brute_force_spectrum,
    ladder_levels,
    lambda_max_boson,
    lambda_max_fermion,
    modes_for_lambda,
    sl2r_check,
    su2_check,
)

SCOPES = ("fermion", "boson", "algebra", "appendix", "rank2")
EIG_TOL = 1e-9
OPT_TOL = 1e-6
ALGEBRA_TOL = 1e-12

# Formulas under test; replaced in the harness self-test.
FORMULAS: dict[str, Callable] = {
    "lambda_fermion": lambda_max_fermion,
    "lambda_boson": lambda_max_boson,
    "sep_fermion": fermion_sep_value,
    "type1": type1_value,
}


@dataclass(frozen=True)
class Check:
    scope: str
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} [{self.scope}] {self.name}" + (f": {self.detail}" if self.detail else "")


def _close(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol


def fermion_checks(r_max: int, N_max: int, formulas: dict, seed: int = 0) -> Iterator[Check]:
    for r in range(1, r_max + 1):
        for N in range(0, min(2 * r + 2, N_max) + 1):
            M = max(modes_for_lambda("fermion", r, N), N)
            got = brute_force_spectrum(QSpec("fermion", r, (), M), N).max
            want = formulas["lambda_fermion"](r, N)
            yield Check("fermion", f"lambda r={r} N={N} M={M}", _close(got, want, EIG_TOL), f"brute {got:.10g} formula {want:.10g}")
            M = 2 * r + 2
            if N <= M:
                qs = QSpec("fermion", r, (), M)
                opt = maximize_slater(qs, N, restarts=4, seed=seed).value
                want = formulas["sep_fermion"](r, N)
                yield Check("fermion", f"sep r={r} N={N}", _close(opt, want, OPT_TOL), f"optimizer {opt:.10g} formula {want}")


def boson_checks(r_max: int, N_max: int, formulas: dict) -> Iterator[Check]:
    for r in range(1, r_max + 1):
        qs = QSpec("boson", r)
        for N in range(0, N_max + 1):
            spec = brute_force_spectrum(qs, N)
            want = formulas["lambda_boson"](r, N)
            yield Check("boson", f"lambda r={r} N={N}", _close(spec.max, want, EIG_TOL), f"brute {spec.max:.10g} formula {want:.10g}")
            missing = [lv.eigenvalue for lv in ladder_levels("boson", r, N, r)
                       if np.min(np.abs(spec.eigenvalues - lv.eigenvalue)) > EIG_TOL]
            yield Check("boson", f"ladder r={r} N={N}", not missing, f"missing {missing}" if missing else "")
            yield Check("boson", f"psd r={r} N={N}", spec.min >= -1e-10, f"min {spec.min:.3g}")


def algebra_checks(r_max: int, N_max: int) -> Iterator[Check]:
    for r in range(1, r_max + 1):
        res = su2_check(QSpec("fermion", r))
        worst = max(res.values())
        yield Check("algebra", f"su2 r={r}", worst <= ALGEBRA_TOL, f"max residual {worst:.3g}")
    for r in range(1, r_max + 1):
        for N in range(0, N_max - 1):
            res = sl2r_check(QSpec("boson", r), N)
            worst = max(res.values(), default=0.0)
            yield Check("algebra", f"sl2r r={r} N={N}", worst <= ALGEBRA_TOL, f"max residual {worst:.3g}")


def appendix_checks(N_max: int, formulas: dict, samples: int = 1000, seed: int = 0) -> Iterator[Check]:
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(samples):
        m = [int(x) for x in rng.integers(1, 50, size=6)]
        lhs, rhs = conjoin_sides(*m)
        bad += not lhs < rhs
        lhs, rhs = four_cycle_sides(*m[:4])
        bad += not lhs < rhs
        lhs, rhs = three_cycle_sides(*sorted(m[:3], reverse=True))
        bad += not lhs < rhs
    yield Check("appendix", f"cycle inequalities x{samples}", bad == 0, f"{bad} violations" if bad else "")
    for N in range(2, min(N_max, 8) + 1):
        best = max((permutation_maximizer(m)[1], -len(m)) for m in partitions(N, 4))
        want = Fraction(formulas["type1"](N))
        yield Check("appendix", f"f(D) max N={N}", best[0] == want and -best[1] == 2,
                    f"max {best[0]} at p={-best[1]}, closed form {want}")


def rank2_checks(N_max: int, formulas: dict, seed: int = 0) -> Iterator[Check]:
    qs = QSpec("boson", 2)
    for N in range(0, N_max + 1):
        got = brute_force_spectrum(qs, N).max
        want = formulas["type1"](N)
        yield Check("rank2", f"boson lambda=type1 N={N}", _close(got, want, EIG_TOL), f"brute {got:.10g} type1 {want}")
    for N in range(4, N_max + 1):
        lam = formulas["lambda_fermion"](2, N)
        sep = formulas["sep_fermion"](2, N)
        yield Check("rank2", f"fermion lambda=sep N={N}", lam == sep == 2, f"lambda {lam} sep {sep}")
    rng = np.random.default_rng(seed)
    for A1, A2 in rng.uniform(0.2, 3.0, size=(3, 2)):
        for N in range(4, min(N_max, 6) + 1):
            qs = QSpec("fermion", 2, (A1, A2), N + 2)
            got = brute_force_spectrum(qs, N).max
            occ = [1] * N + [0, 0]
            psi = fock.basis_state("fermion", occ)
            op = qdagq_operator(qs, N)
            res = np.linalg.norm(op.matrix @ psi.amplitudes - (A1**2 + A2**2) * psi.amplitudes)
            ok = _close(got, A1**2 + A2**2, EIG_TOL) and res <= 1e-8
            yield Check("rank2", f"unequal A=({A1:.3f},{A2:.3f}) N={N}", ok, f"brute {got:.10g} residual {res:.2g}")


def run_verify(scope: str = "all", r_max: int = 4, N_max: int = 8, seed: int = 0,
               formulas: dict | None = None) -> list[Check]:
    formulas = {**FORMULAS, **(formulas or {})}
    scopes = SCOPES if scope == "all" else (scope,)
    if any(s not in SCOPES for s in scopes):
        raise ValueError(f"unknown scope {scope!r}; choose from all, {', '.join(SCOPES)}")
    out: list[Check] = []
    for s in scopes:
        if s == "fermion":
            out += fermion_checks(r_max, N_max, formulas, seed)
        elif s == "boson":
            out += boson_checks(r_max, N_max, formulas)
        elif s == "algebra":
            out += algebra_checks(r_max, N_max)
        elif s == "appendix":
            out += appendix_checks(N_max, formulas, seed=seed)
        else:
            out += rank2_checks(N_max, formulas, seed)
    return out
