"""Acceptance gate: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the lines are repeated in the
terminal summary. Criterion 6 runs the full type-2 sweep and takes minutes.
"""

import time
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import unitary_group

from acceptance_log import record
from pairing_witness import fock
from pairing_witness.optimize import maximize_boson_product, maximize_slater, random_orbitals
from pairing_witness.pairing import QSpec, qdagq_operator
from pairing_witness.separability import (
    ProductKind,
    ProductStateSpec,
    boson_type1_bound,
    boson_type2_bound,
    conjoin_sides,
    fermion_sep_bound,
    four_cycle_sides,
    overlap_matrices,
    partitions,
    permutation_maximizer,
    three_cycle_sides,
    type1_bound_oracle,
)
from pairing_witness.spectral import (
    brute_force_spectrum,
    lambda_max,
    lambda_max_boson,
    lambda_max_fermion,
    modes_for_lambda,
    sl2r_check,
    su2_check,
    top_eigenvector,
)
from pairing_witness.witness import Verdict, detectability_ratio, evaluate_witness

EIG_TOL = 1e-9
OPT_TOL = 1e-6
ALGEBRA_TOL = 1e-12
RESIDUAL_TOL = 1e-8


def _fmt_cells(cells, limit=8):
    text = ", ".join(str(c) for c in cells[:limit])
    return text + (" ..." if len(cells) > limit else "")


def test_criterion_1_fermion_closed_forms():
    t0 = time.perf_counter()
    eig_bad, opt_bad = [], []
    for r in range(1, 6):
        M = 2 * r + 2
        qs = QSpec("fermion", r, (), M)
        for N in range(0, M + 1):
            got = brute_force_spectrum(qs, N).max
            if abs(got - lambda_max_fermion(r, N)) > EIG_TOL:
                eig_bad.append((r, N, round(got, 9), lambda_max_fermion(r, N)))
            opt = maximize_slater(qs, N, restarts=4, seed=r * 100 + N).value
            if abs(opt - fermion_sep_bound(r, N).value) > OPT_TOL:
                opt_bad.append((r, N, opt))
    elapsed = time.perf_counter() - t0
    ok = not eig_bad and not opt_bad and elapsed < 120
    detail = f"M=2r+2, r<=5, N<=2r+2 in {elapsed:.1f}s"
    if eig_bad:
        detail += f"; brute max != formula at (r, N, brute, formula): {_fmt_cells(eig_bad)}"
    if opt_bad:
        detail += f"; Slater optimum != sep bound at {_fmt_cells(opt_bad)}"
    record(1, ok, detail)
    assert ok, detail


def test_criterion_2_boson_closed_forms():
    t0 = time.perf_counter()
    bad = []
    for r in range(2, 5):
        for N in range(0, 9):
            want = N * (N + r - 2) / 4 if N % 2 == 0 else (N - 1) * (N + r - 1) / 4
            got = brute_force_spectrum(QSpec("boson", r), N).max
            if abs(got - want) > EIG_TOL:
                bad.append((r, N, got, want))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 120
    detail = f"r in 2..4, N in 0..8 in {elapsed:.1f}s" + (f"; mismatches {_fmt_cells(bad)}" if bad else "")
    record(2, ok, detail)
    assert ok, detail


def test_criterion_3_type1_oracle():
    bad = []
    for r in (2, 3):
        for N in range(2, 9):
            res = type1_bound_oracle(r, N)
            want = N * N // 4
            R12 = abs(overlap_matrices(res.certificate.orbitals, r).R[0, 1])
            pair = len(res.certificate.multiplicities) == 2
            if abs(res.value - want) > OPT_TOL or not pair or abs(R12 - 1) > OPT_TOL:
                bad.append((r, N, res.value, R12))
    ok = not bad
    detail = "oracle = floor(N^2/4) with a conjugate-pair certificate, r in {2,3}, N in 2..8"
    record(3, ok, detail + (f"; failures {_fmt_cells(bad)}" if bad else ""))
    assert ok, bad


def test_criterion_4_rank2_degeneracy():
    bad = []
    for N in range(4, 13):
        if not (lambda_max_fermion(2, N) == fermion_sep_bound(2, N).value == 2):
            bad.append(("fermion", N))
    qs = QSpec("boson", 2)
    for N in range(0, 9):
        lam = brute_force_spectrum(qs, N).max
        if abs(lam - boson_type1_bound(2, N).value) > EIG_TOL:
            bad.append(("boson type1", N, lam))
        if N >= 2:
            t2 = maximize_boson_product(2, N, restarts=16, seed=N).value
            if abs(t2 - lam) > OPT_TOL:
                bad.append(("boson type2", N, t2))
    rng = np.random.default_rng(2024)
    for A1, A2 in rng.uniform(0.1, 3.0, size=(10, 2)):
        for N in (4, 5, 6):
            qa = QSpec("fermion", 2, (A1, A2), N + 2)
            got = brute_force_spectrum(qa, N).max
            # the first N modes filled: both pairs occupied plus N - 4 spectators
            psi = fock.basis_state("fermion", [1] * N + [0, 0])
            res = np.linalg.norm(qdagq_operator(qa, N).matrix @ psi.amplitudes - (A1**2 + A2**2) * psi.amplitudes)
            if abs(got - (A1**2 + A2**2)) > EIG_TOL or res > RESIDUAL_TOL:
                bad.append(("unequal", round(A1, 3), round(A2, 3), N, got, res))
    ok = not bad
    record(4, ok, "rank-2 lambda equals the separable bound (fermion, boson type 1 and 2, unequal A)"
           + (f"; failures {_fmt_cells(bad)}" if bad else ""))
    assert ok, bad


def test_criterion_5_algebra():
    worst = 0.0
    for r in range(1, 5):
        worst = max(worst, *su2_check(QSpec("fermion", r)).values())
    for r in range(1, 5):
        for N in range(0, 9):
            worst = max(worst, *sl2r_check(QSpec("boson", r), N).values())
    ok = worst <= ALGEBRA_TOL
    record(5, ok, f"su(2) on the full fermion Fock space r<=4, sl(2,R) on boson sectors r<=4, N<=8; worst residual {worst:.2e}")
    assert ok


@pytest.fixture(scope="module")
def type2_sweep():
    t0 = time.perf_counter()
    table = {}
    for N in range(2, 11):
        for r in range(2, 13):
            seed = int(np.random.SeedSequence([0, r, N]).generate_state(1)[0])
            table[(r, N)] = boson_type2_bound(r, N, restarts=64, seed=seed)
    return table, time.perf_counter() - t0


def test_criterion_6_type2_sweep(type2_sweep):
    table, elapsed = type2_sweep
    problems = []
    for N in range(2, 11):
        col = {r: table[(r, N)].value for r in range(2, 13)}
        if abs(col[2] - N * N // 4) > OPT_TOL:
            problems.append(f"(a) N={N} r=2 {col[2]:.9f}")
        for r in range(2, N):
            if col[r + 1] < col[r] - OPT_TOL:
                problems.append(f"(b) N={N} r={r}->{r + 1} {col[r]:.9f}->{col[r + 1]:.9f}")
        sat = [col[r] for r in range(2, 13) if r >= N]
        if sat and max(sat) - min(sat) > OPT_TOL:
            problems.append(f"(c) N={N} spread {max(sat) - min(sat):.2e}")
        for r in range(2, 13):
            if not (N * N // 4 - OPT_TOL <= col[r] <= lambda_max_boson(r, N) + OPT_TOL):
                problems.append(f"(d) r={r} N={N} {col[r]:.9f}")
    low = [(r, N, table[(r, N)].solver["converged_fraction"]) for (r, N) in table
           if table[(r, N)].solver["converged_fraction"] < 0.5]
    if low:
        problems.append(f"converged_fraction < 0.5 at {_fmt_cells(low)}")
    if elapsed > 1800:
        problems.append(f"sweep took {elapsed:.0f}s")
    ok = not problems
    frac = min(res.solver["converged_fraction"] for res in table.values())
    record(6, ok, f"type-2 sweep N<=10, r<=12, 64 restarts in {elapsed:.0f}s, min converged_fraction {frac:.2f}"
           + (f"; {'; '.join(problems[:8])}" if problems else ""))
    assert ok, problems


def test_criterion_7_appendix():
    rng = np.random.default_rng(7)
    violations = 0
    for _ in range(10_000):
        m = [int(x) for x in rng.integers(1, 10**6, size=6)]
        violations += not (lambda s: s[0] < s[1])(conjoin_sides(*m))
        violations += not (lambda s: s[0] < s[1])(four_cycle_sides(*m[:4]))
        violations += not (lambda s: s[0] < s[1])(three_cycle_sides(*sorted(m[:3], reverse=True)))
    bad = []
    for N in range(2, 9):
        vals = [(permutation_maximizer(m)[1], -len(m)) for m in partitions(N, 4)]
        best = max(vals)
        overall = max(v for v, _ in vals)
        if overall != Fraction(N * N // 4) or -best[1] != 2:
            bad.append((N, overall, -best[1]))
    ok = violations == 0 and not bad
    record(7, ok, f"{violations} cycle-inequality violations in 10^4 tuples; partition maxima at p=2 for N<=8"
           + (f"; failures {bad}" if bad else ""))
    assert ok


def _random_type1(rng, N, M):
    parts = list(partitions(N, M))
    m = parts[rng.integers(len(parts))]
    U = unitary_group.rvs(M, random_state=rng.integers(2**31))
    return ProductStateSpec(ProductKind.BOSON_TYPE1, U.T[: len(m)], m)


def test_criterion_8_witness_soundness():
    rng = np.random.default_rng(8)
    samples = 1000
    false_alarms = []
    for r, N in [(2, 3), (3, 4), (3, 5), (4, 6)]:
        qs = QSpec("fermion", r, (), 2 * r + 2)
        Lam = fermion_sep_bound(r, N)
        for _ in range(samples):
            U = unitary_group.rvs(qs.M, random_state=rng.integers(2**31))
            psi = ProductStateSpec(ProductKind.FERMION_SLATER, U.T[:N]).state()
            if evaluate_witness(qs, psi, precomputed=Lam).verdict is Verdict.CORRELATED:
                false_alarms.append(("fermion", r, N))
    for r, N in [(2, 4), (3, 5), (3, 6)]:
        qs = QSpec("boson", r, (), r + 2)
        Lam = boson_type1_bound(r, N)
        for _ in range(samples):
            psi = _random_type1(rng, N, qs.M).state()
            if evaluate_witness(qs, psi, precomputed=Lam).verdict is Verdict.CORRELATED:
                false_alarms.append(("type1", r, N))
    for r, N in [(3, 4), (2, 5)]:
        qs = QSpec("boson", r)
        Lam = boson_type2_bound(r, N, restarts=64)
        for _ in range(samples):
            psi = fock.product_state("boson", random_orbitals(rng, N, r)).normalized()
            if evaluate_witness(qs, psi, "type2", precomputed=Lam).verdict is Verdict.CORRELATED:
                false_alarms.append(("type2", r, N))

    missed = []
    for r in range(1, 5):
        for N in range(0, 2 * r + 3):
            qs = QSpec("fermion", r, (), max(modes_for_lambda("fermion", r, N), N, 2))
            psi, lam = top_eigenvector(qs, N)
            rep = evaluate_witness(qs, psi)
            expect_corr = lambda_max("fermion", r, N) > rep.Lambda
            if (rep.verdict is Verdict.CORRELATED) != expect_corr:
                missed.append(("fermion", r, N))
    for r in range(2, 5):
        for N in range(0, 9):
            qs = QSpec("boson", r)
            psi, lam = top_eigenvector(qs, N)
            rep = evaluate_witness(qs, psi)
            expect_corr = lambda_max("boson", r, N) > rep.Lambda
            if (rep.verdict is Verdict.CORRELATED) != expect_corr:
                missed.append(("boson", r, N))

    ratio_bad = [(r, N) for r in range(2, 13) for N in range(2, 13, 2)
                 if detectability_ratio("boson", r, N) != (N + r - 2) / N
                 or Fraction(lambda_max_boson(r, N)) / Fraction(N * N, 4) != Fraction(N + r - 2, N)]
    ok = not false_alarms and not missed and not ratio_bad
    detail = (f"{samples} random product states per configuration: {len(false_alarms)} false alarms; "
              f"top eigenvectors misclassified: {len(missed)}; boson even-N ratio mismatches: {len(ratio_bad)}")
    record(8, ok, detail)
    assert ok, (false_alarms[:5], missed, ratio_bad)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
