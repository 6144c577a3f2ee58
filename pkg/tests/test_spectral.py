import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from pairing_witness import fock
from pairing_witness.pairing import QSpec, qdagq_operator
from pairing_witness.spectral import (
    LadderState,
    PreconditionError,
    brute_force_spectrum,
    closed_form_spectrum,
    harmonic_dimension,
    harmonic_kernel_basis,
    kernel_states,
    ladder_eigenstate,
    ladder_levels,
    ladder_max,
    ladder_spectrum,
    lambda_max,
    lambda_max_boson,
    lambda_max_fermion,
    modes_for_lambda,
    sl2r_check,
    su2_check,
    top_eigenvector,
)


@pytest.mark.parametrize("r,N,value", [(3, 2, 3), (4, 6, 6), (2, 4, 2)])
def test_lambda_fermion_examples(r, N, value):
    assert lambda_max_fermion(r, N) == value


@pytest.mark.parametrize("r,N,value", [(3, 4, 5), (3, 5, 7), (2, 2, 1)])
def test_lambda_boson_examples(r, N, value):
    assert lambda_max_boson(r, N) == value


def test_lambda_fermion_is_max_over_mu():
    for r in range(1, 9):
        for N in range(0, 20):
            want = max(mu * (r + 1 - mu) for mu in range(0, min(r, N // 2) + 1))
            assert lambda_max_fermion(r, N) == want


def test_brute_force_examples():
    assert np.isclose(brute_force_spectrum(QSpec("fermion", 3, (), 6), 2).max, 3)
    assert np.isclose(brute_force_spectrum(QSpec("boson", 3, (), 3), 4).max, 5)
    assert np.isclose(brute_force_spectrum(QSpec("fermion", 2, (1.0, 2.0), 6), 4).max, 5)


def test_brute_force_matches_oracle_matrix():
    evals = brute_force_spectrum(QSpec("boson", 2, (), 3), 4).eigenvalues
    ref = np.linalg.eigvalsh(oracles.dense_qdagq("boson", 3, 4, 2))
    assert np.allclose(evals, ref)


def test_iterative_route_agrees():
    qs = QSpec("fermion", 3, (), 8)
    dense = brute_force_spectrum(qs, 5)
    lanczos = brute_force_spectrum(qs, 5, dense_limit=1)
    assert len(lanczos.eigenvalues) == 1
    assert abs(dense.max - lanczos.max) < 1e-9


@pytest.mark.parametrize("r", range(1, 6))
def test_fermion_lambda_with_enough_modes(r):
    for N in range(0, 2 * r + 1):
        M = max(modes_for_lambda("fermion", r, N), N)
        spec = brute_force_spectrum(QSpec("fermion", r, (), M), N)
        assert abs(spec.max - lambda_max_fermion(r, N)) < 1e-9
        assert spec.min >= -1e-10


def test_fermion_lambda_needs_spectators():
    # the maximizing level parks N - 2 mu particles outside the paired modes
    assert modes_for_lambda("fermion", 3, 3) == 7
    assert abs(brute_force_spectrum(QSpec("fermion", 3, (), 6), 3).max - 2) < 1e-9
    assert abs(brute_force_spectrum(QSpec("fermion", 3, (), 7), 3).max - 3) < 1e-9


@pytest.mark.parametrize("r,M", [(2, 6), (3, 8), (4, 10), (5, 12)])
def test_ladder_max_tracks_brute_force_for_fixed_modes(r, M):
    for N in range(0, min(M, 2 * r + 2) + 1):
        spec = brute_force_spectrum(QSpec("fermion", r, (), M), N)
        assert abs(spec.max - ladder_max("fermion", r, N, M)) < 1e-9


@pytest.mark.parametrize("r", range(1, 6))
def test_boson_lambda(r):
    for N in range(0, 9):
        spec = brute_force_spectrum(QSpec("boson", r), N)
        assert abs(spec.max - lambda_max_boson(r, N)) < 1e-9
        assert spec.min >= -1e-10


@pytest.mark.parametrize("stat,r,M", [("fermion", 2, 6), ("fermion", 3, 7), ("boson", 2, 2), ("boson", 3, 4)])
def test_ladder_levels_in_spectrum(stat, r, M):
    for N in range(0, 7 if stat == "boson" else M + 1):
        spec = brute_force_spectrum(QSpec(stat, r, (), M), N).eigenvalues
        for lv in ladder_levels(stat, r, N, M):
            assert np.min(np.abs(spec - lv.eigenvalue)) < 1e-9, lv


def test_ladder_state_fields():
    lv = LadderState(fock.Statistics.FERMION, 3, 1, 1, 2)
    assert lv.N == 5 and lv.eigenvalue == 1 * (3 - 1 - 1 + 1)
    b = LadderState(fock.Statistics.BOSON, 4, 2, 3, 0)
    assert b.eigenvalue == 3 * (2 + 2 + 3 - 1)


def test_ladder_eigenstate_examples():
    qs = QSpec("fermion", 3)
    state, val = ladder_eigenstate(qs, fock.vacuum("fermion", 6), 2)
    assert val == 4
    op = qdagq_operator(qs, 4)
    assert np.linalg.norm(op.matrix @ state.amplitudes - 4 * state.amplitudes) < 1e-8

    qb = QSpec("boson", 2)
    psi0 = fock.StateVector(fock.enumerate_sector("boson", 2, 1), np.array([1j, 1.0]) / np.sqrt(2))
    state, val = ladder_eigenstate(qb, psi0, 1)
    assert val == 2
    op = qdagq_operator(qb, 3)
    assert np.linalg.norm(op.matrix @ state.amplitudes - 2 * state.amplitudes) < 1e-8

    same, val = ladder_eigenstate(qb, psi0, 0)
    assert val == 0 and np.allclose(same.amplitudes, psi0.amplitudes)


def test_ladder_eigenstate_preconditions():
    qs = QSpec("fermion", 2)
    with pytest.raises(PreconditionError):
        ladder_eigenstate(qs, fock.basis_state("fermion", [1, 1, 0, 0]), 1)
    mixed = fock.StateVector(fock.enumerate_sector("fermion", 4, 1), np.array([1, 0, 0, 1]) / np.sqrt(2))
    ladder_eigenstate(qs, mixed, 1)  # N_Q = 1 on both components
    sector = fock.enumerate_sector("fermion", 5, 1)
    amps = np.zeros(sector.dim)
    amps[sector.index([1, 0, 0, 0, 0])] = amps[sector.index([0, 0, 0, 0, 1])] = 1 / np.sqrt(2)
    with pytest.raises(PreconditionError):
        ladder_eigenstate(QSpec("fermion", 2, (), 5), fock.StateVector(sector, amps), 1)


@pytest.mark.parametrize("r,nu,dim", [(2, 1, 2), (3, 2, 5), (2, 2, 2), (3, 3, 7), (4, 2, 9)])
def test_harmonic_basis(r, nu, dim):
    basis = harmonic_kernel_basis(r, nu)
    assert len(basis) == dim == harmonic_dimension(r, nu)
    qs = QSpec("boson", r)
    for psi in basis:
        if nu >= 2:
            from pairing_witness.pairing import q_operator

            assert np.linalg.norm(q_operator(qs, nu).matrix @ psi.amplitudes) < 1e-10


def test_harmonic_example_state():
    # (c1^+ + i c2^+)^2 |0> is harmonic
    psi = fock.product_state("boson", np.array([[1, 1j], [1, 1j]]))
    span = np.array([s.amplitudes for s in harmonic_kernel_basis(2, 2)]).T
    coef, *_ = np.linalg.lstsq(span, psi.amplitudes, rcond=None)
    assert np.linalg.norm(span @ coef - psi.amplitudes) < 1e-10


def test_kernel_states_fermion():
    ks = kernel_states(QSpec("fermion", 2), 2, 2)
    # two particles in the paired modes, killed by Q: 6 - 1 (symmetric pair state) = 5
    assert len(ks) == 5


@pytest.mark.parametrize("r", [1, 2, 3])
def test_su2(r):
    res = su2_check(QSpec("fermion", r))
    assert max(res.values()) <= 1e-12
    res = su2_check(QSpec("fermion", r), N=min(r, 3))
    assert max(res.values()) <= 1e-12


@pytest.mark.parametrize("r,N_max", [(2, 4), (3, 5)])
def test_sl2r(r, N_max):
    for N in range(0, N_max + 1):
        assert max(sl2r_check(QSpec("boson", r), N).values()) <= 1e-12


def test_algebra_preconditions():
    with pytest.raises(PreconditionError):
        su2_check(QSpec("boson", 2))
    with pytest.raises(PreconditionError):
        sl2r_check(QSpec("fermion", 2), 2)
    with pytest.raises(PreconditionError):
        su2_check(QSpec("fermion", 2, (1.0, 2.0)))


def test_closed_form_and_ladder_spectrum():
    qs = QSpec("boson", 3)
    assert closed_form_spectrum(qs, 5).max == 7
    assert ladder_spectrum(qs, 5).max == 7
    with pytest.raises(PreconditionError):
        closed_form_spectrum(QSpec("boson", 2, (1.0, 2.0)), 4)


def test_rank2_unequal_product_eigenstate():
    rng = np.random.default_rng(7)
    for A1, A2 in rng.uniform(0.1, 3, size=(5, 2)):
        for N in (4, 5, 6):
            qs = QSpec("fermion", 2, (A1, A2), N + 1)
            assert abs(brute_force_spectrum(qs, N).max - (A1**2 + A2**2)) < 1e-9
            psi = fock.basis_state("fermion", [1] * N + [0])
            res = qdagq_operator(qs, N).matrix @ psi.amplitudes - (A1**2 + A2**2) * psi.amplitudes
            assert np.linalg.norm(res) < 1e-8


def test_top_eigenvector():
    psi, val = top_eigenvector(QSpec("fermion", 3), 2)
    assert abs(val - 3) < 1e-9 and abs(psi.norm() - 1) < 1e-12


@settings(max_examples=40, deadline=None)
@given(r=st.integers(1, 12), N=st.integers(0, 30))
def test_lambda_dispatch_and_ladder_agree(r, N):
    assert lambda_max("fermion", r, N) == ladder_max("fermion", r, N)
    if r >= 1:
        assert abs(lambda_max("boson", r, N) - ladder_max("boson", r, N)) < 1e-12
