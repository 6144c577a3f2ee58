import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

import oracles
from pairing_witness.canonical import (
    NoPairingError,
    NotSymmetricError,
    antisymmetric_canonical,
    build_qspec,
    canonicalize,
    pairing_matrix_from_csv,
    pairing_matrix_from_json,
    takagi,
)


def rand_complex(rng, M):
    return rng.normal(size=(M, M)) + 1j * rng.normal(size=(M, M))


def check_form(canon, A):
    U = canon.U
    assert np.max(np.abs(U.conj().T @ U - np.eye(len(U)))) < 1e-10
    assert canon.residual(A) < 1e-10
    assert np.all(np.diff(canon.coefficients) <= 1e-12)


def test_takagi_examples():
    c = takagi(np.eye(2))
    assert np.allclose(c.coefficients, [1, 1])
    A = np.array([[0, 1], [1, 0]], dtype=complex)
    c = takagi(A)
    assert np.allclose(c.coefficients, oracles.takagi_values(A))
    check_form(c, A)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), M=st.integers(1, 12))
def test_takagi_random(seed, M):
    rng = np.random.default_rng(seed)
    B = rand_complex(rng, M)
    A = B + B.T
    c = takagi(A)
    check_form(c, A)
    assert np.allclose(c.coefficients, oracles.takagi_values(A)[: c.rank], atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), M=st.integers(2, 12))
def test_antisymmetric_random(seed, M):
    rng = np.random.default_rng(seed)
    B = rand_complex(rng, M)
    A = B - B.T
    c = antisymmetric_canonical(A)
    check_form(c, A)
    sv = oracles.takagi_values(A)
    assert np.allclose(sv[0 : 2 * c.rank : 2], sv[1 : 2 * c.rank : 2], atol=1e-10)
    assert np.allclose(c.coefficients, sv[0 : 2 * c.rank : 2], atol=1e-9)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6), M=st.integers(2, 8), stat=st.sampled_from(["boson", "fermion"]))
def test_congruence_invariance(seed, M, stat):
    rng = np.random.default_rng(seed)
    B = rand_complex(rng, M)
    A = B + B.T if stat == "boson" else B - B.T
    V = unitary_group.rvs(M, random_state=rng.integers(2**31))
    a = canonicalize(A, stat).coefficients
    b = canonicalize(V.T @ A @ V, stat).coefficients
    assert np.allclose(a, b, atol=1e-9)


def test_degenerate_blocks():
    # three equal blocks mixed by a random unitary
    rng = np.random.default_rng(1)
    J = np.zeros((6, 6))
    for k in range(3):
        J[2 * k, 2 * k + 1], J[2 * k + 1, 2 * k] = 1, -1
    V = unitary_group.rvs(6, random_state=2)
    A = V.T @ J @ V
    c = antisymmetric_canonical(A)
    assert c.rank == 3 and np.allclose(c.coefficients, 1)
    check_form(c, A)


def test_single_block_and_zero():
    c = antisymmetric_canonical(np.array([[0, 1], [-1, 0]]))
    assert np.allclose(c.coefficients, [1]) and c.rank == 1
    z = antisymmetric_canonical(np.zeros((4, 4)))
    assert z.rank == 0 and len(z.coefficients) == 0
    with pytest.raises(NoPairingError):
        build_qspec(z)


def test_rank_threshold():
    c = takagi(np.diag([1.0, 1e-14]))
    assert c.rank == 1


def test_symmetry_errors():
    with pytest.raises(NotSymmetricError):
        takagi(np.array([[0, 1], [0, 0]]))
    with pytest.raises(NotSymmetricError):
        antisymmetric_canonical(np.eye(2))


def test_build_qspec():
    J = np.zeros((6, 6))
    for k in range(3):
        J[2 * k, 2 * k + 1], J[2 * k + 1, 2 * k] = 1, -1
    qs = build_qspec(antisymmetric_canonical(J))
    assert qs.r == 3 and qs.equal_coefficients and qs.M == 6
    qs = build_qspec(takagi(np.diag([2.0, 1.0])), equalize=False)
    assert qs.coefficients == (2.0, 1.0)


def test_io_roundtrip():
    A = np.array([[0, 1 + 2j], [-1 - 2j, 0]])
    stat, B = pairing_matrix_from_json(json.dumps({"statistics": "fermion", "re": A.real.tolist(), "im": A.imag.tolist()}))
    assert stat.value == "fermion" and np.allclose(A, B)
    text = "# comment\n0,0,1,2\n-1,-2,0,0\n"
    assert np.allclose(pairing_matrix_from_csv(text), A)
    c = antisymmetric_canonical(A)
    d = c.to_dict()
    assert d["rank"] == 1 and np.isclose(d["coefficients"][0], abs(1 + 2j))
