import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from pairing_witness._glynn import boson_product_moments, boson_rayleigh
from pairing_witness.optimize import (
    BosonObjective,
    FockObjective,
    maximize_boson_product,
    maximize_slater,
    pack,
    pack_grad,
    random_orbitals,
    unpack,
)
from pairing_witness.pairing import QSpec


def fd_grad(f, orbitals, h=1e-6):
    x = pack(orbitals)
    N, M = orbitals.shape
    g = np.zeros_like(x)
    for k in range(len(x)):
        e = np.zeros_like(x)
        e[k] = h
        g[k] = (f(unpack(x + e, N, M)) - f(unpack(x - e, N, M))) / (2 * h)
    return g


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6), N=st.integers(1, 5), M=st.integers(1, 4))
def test_permanent_moments_match_oracle(seed, N, M):
    rng = np.random.default_rng(seed)
    r = rng.integers(1, M + 1)
    orbs = rng.normal(size=(N, M)) + 1j * rng.normal(size=(N, M))
    Z, F = boson_product_moments(orbs, r)
    assert np.isclose(Z, oracles.permanent(orbs.conj() @ orbs.T).real, rtol=1e-10)
    state = oracles.product("boson", orbs)
    ref = oracles.expectation_qdagq("boson", state, r)
    assert np.isclose(F / Z, ref, rtol=1e-9, atol=1e-12)


def test_coefficients_in_permanent_route():
    rng = np.random.default_rng(2)
    orbs = random_orbitals(rng, 4, 3)
    A = [0.5, 2.0]
    state = oracles.product("boson", orbs)
    assert np.isclose(boson_rayleigh(orbs, 2, coefficients=A), oracles.expectation_qdagq("boson", state, 2, A))


@pytest.mark.parametrize("N,r,M", [(3, 2, 2), (4, 3, 4), (5, 2, 3)])
def test_boson_gradient(N, r, M):
    rng = np.random.default_rng(N)
    ob = BosonObjective(r, N, M)
    o = random_orbitals(rng, N, M)
    _, g = ob.value_and_grad(o)
    assert np.allclose(pack_grad(g), fd_grad(ob.value, o), atol=1e-7)


@pytest.mark.parametrize("stat,r,M,N", [("fermion", 2, 5, 3), ("boson", 2, 3, 3)])
def test_fock_gradient_and_routes_agree(stat, r, M, N):
    rng = np.random.default_rng(11)
    ob = FockObjective(QSpec(stat, r, (), M), N)
    o = random_orbitals(rng, N, M)
    f, g = ob.value_and_grad(o)
    assert np.allclose(pack_grad(g), fd_grad(ob.value, o), atol=1e-7)
    ref = oracles.expectation_qdagq(stat, oracles.product(stat, o), r)
    assert np.isclose(f, ref)
    if stat == "boson":
        fb, gb = BosonObjective(r, N, M).value_and_grad(o)
        assert np.isclose(f, fb) and np.allclose(g, gb)


def test_multistart_is_deterministic():
    a = maximize_boson_product(3, 4, restarts=4, seed=5)
    b = maximize_boson_product(3, 4, restarts=4, seed=5)
    assert a.value == b.value and np.array_equal(a.orbitals, b.orbitals)
    assert a.report.restarts == 4 and 0 <= a.report.hit_fraction <= 1


def test_slater_maximum():
    res = maximize_slater(QSpec("fermion", 3, (), 8), 4, restarts=4)
    assert abs(res.value - 2) < 1e-6
    assert maximize_slater(QSpec("fermion", 2), 0).value == 0
    with pytest.raises(ValueError):
        maximize_slater(QSpec("boson", 2), 2)


def test_convergence_on_coalescing_optimum():
    # at r = 2 the optimum has coincident orbitals and L-BFGS alone stalls
    res = maximize_boson_product(2, 8, restarts=4, seed=0)
    assert abs(res.value - 16) < 1e-9
    assert res.report.converged_fraction >= 0.5
