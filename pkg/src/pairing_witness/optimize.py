"""Multi-start local maximization of ``<Q^dagger Q>`` over product states.

Orbitals are packed as ``2*N*M`` real numbers (real parts, then imaginary
parts).  The Rayleigh quotient is invariant under rescaling any orbital, so
no normalization constraint is imposed during the search; orbitals are
normalized before the convergence test and in the returned certificate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.sparse.linalg import LinearOperator, minres

from . import fock
from ._glynn import boson_rayleigh
from .fock import Statistics
from .pairing import QSpec, qdagq_operator

GRAD_TOL = 1e-8


@dataclass
class SolverReport:
    restarts: int
    iterations: int
    converged_fraction: float
    tolerance: float
    hit_fraction: float = 0.0
    seed: int | None = None
    values: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "restarts": self.restarts,
            "iterations": self.iterations,
            "converged_fraction": self.converged_fraction,
            "hit_fraction": self.hit_fraction,
            "tolerance": self.tolerance,
            "seed": self.seed,
        }


@dataclass
class OptimumResult:
    value: float
    orbitals: np.ndarray
    report: SolverReport


def pack(orbitals: np.ndarray) -> np.ndarray:
    return np.concatenate([orbitals.real.ravel(), orbitals.imag.ravel()])


def unpack(x: np.ndarray, N: int, M: int) -> np.ndarray:
    half = N * M
    return (x[:half] + 1j * x[half:]).reshape(N, M)


def normalize_rows(orbitals: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(orbitals, axis=1, keepdims=True)
    return orbitals / np.where(norms > 0, norms, 1.0)


def random_orbitals(rng: np.random.Generator, N: int, M: int, span: int | None = None) -> np.ndarray:
    """``N`` orbitals uniform on the unit sphere of ``C^span`` embedded in ``C^M``."""
    span = M if span is None else span
    out = np.zeros((N, M), dtype=complex)
    out[:, :span] = rng.normal(size=(N, span)) + 1j * rng.normal(size=(N, span))
    return normalize_rows(out)


# ---------------------------------------------------------------------------
# objectives


class BosonObjective:
    """Type-2 product states, evaluated through permanents."""

    def __init__(self, r: int, N: int, M: int, coefficients=None):
        self.r, self.N, self.M = r, N, M
        self.coefficients = coefficients

    def value(self, orbitals: np.ndarray) -> float:
        return float(boson_rayleigh(orbitals, self.r, coefficients=self.coefficients))

    def value_and_grad(self, orbitals: np.ndarray):
        f, g = boson_rayleigh(orbitals, self.r, grad=True, coefficients=self.coefficients)
        return float(f), g


class FockObjective:
    """Product states built explicitly in Fock space (either statistics).

    The gradient uses the adjoint sweep: with ``b_k = C_k ... C_{N-1}|0>``
    and ``u_{k+1} = c(phi_k) u_k`` started from ``u_0 = X``, the holomorphic
    derivative of ``<X|Psi>`` with respect to ``phi_k[i]`` is
    ``<c_i u_k | b_{k+1}>``.
    """

    def __init__(self, qspec: QSpec, N: int):
        self.qspec, self.N, self.M = qspec, N, qspec.M
        self.stat = qspec.statistics
        self.A = qdagq_operator(qspec, N).matrix

    def _chain(self, orbitals):
        N, M = self.N, self.M
        b = [None] * (N + 1)
        b[N] = np.ones(1, dtype=complex)
        for k in range(N - 1, -1, -1):
            b[k] = fock.create_with(self.stat, M, N - k, b[k + 1], orbitals[k])
        return b

    def value(self, orbitals: np.ndarray) -> float:
        psi = self._chain(orbitals)[0]
        Z = np.vdot(psi, psi).real
        if Z <= 0:
            raise ZeroDivisionError("product state has zero norm")
        return float(np.vdot(psi, self.A @ psi).real / Z)

    def _holo_grad(self, X, orbitals, b):
        N, M = self.N, self.M
        h = np.zeros((N, M), dtype=complex)
        u = X
        for k in range(N):
            cols = fock.annihilate_all(self.stat, M, N - k, u)
            h[k] = cols.conj().T @ b[k + 1]
            u = cols @ orbitals[k].conj()
        return h

    def value_and_grad(self, orbitals: np.ndarray):
        b = self._chain(orbitals)
        psi = b[0]
        Z = np.vdot(psi, psi).real
        if Z <= 0:
            raise ZeroDivisionError("product state has zero norm")
        Apsi = self.A @ psi
        F = np.vdot(psi, Apsi).real
        f = F / Z
        hF = self._holo_grad(Apsi, orbitals, b)
        hZ = self._holo_grad(psi, orbitals, b)
        g = (hF - f * hZ) / Z
        # d/dRe = 2 Re g, d/dIm = -2 Im g
        return float(f), 2.0 * g.conj()


# ---------------------------------------------------------------------------
# driver


def _snap_clusters(orbitals: np.ndarray, tol: float) -> np.ndarray:
    """Merge orbitals whose overlap modulus is within ``tol`` of 1."""
    out = orbitals.copy()
    N = len(out)
    seen = np.zeros(N, dtype=bool)
    for k in range(N):
        if seen[k]:
            continue
        ov = out.conj() @ out[k]
        members = np.flatnonzero((np.abs(ov) > 1 - tol) & ~seen)
        seen[members] = True
        phases = ov[members] / np.abs(ov[members])
        mean = (out[members] * phases[:, None]).sum(axis=0)
        mean /= np.linalg.norm(mean)
        out[members] = mean
    return out


class _Polisher:
    """Newton steps with finite-difference Hessian products, solved by MINRES.

    Only used near a local maximum where L-BFGS stalls on a flat direction.
    Steps are accepted when the gradient shrinks without losing value.
    """

    def __init__(self, objective, N, M, free):
        self.objective, self.N, self.M, self.free = objective, N, M, free

    def grad(self, xf):
        x = np.zeros(2 * self.N * self.M)
        x[self.free] = xf
        f, g = self.objective.value_and_grad(unpack(x, self.N, self.M))
        return f, pack_grad(g)[self.free]

    def normalized(self, xf):
        x = np.zeros(2 * self.N * self.M)
        x[self.free] = xf
        return pack(normalize_rows(unpack(x, self.N, self.M)))[self.free]

    def run(self, xf, gtol, steps=8, h=1e-6):
        f, g = self.grad(xf)
        for _ in range(steps):
            gn = np.abs(g).max()
            if gn < gtol:
                break

            def hv(v, x=xf):
                nv = np.linalg.norm(v)
                if nv == 0:
                    return np.zeros_like(v)
                e = h / nv
                return (self.grad(x + e * v)[1] - self.grad(x - e * v)[1]) / (2 * e)

            H = LinearOperator((xf.size, xf.size), matvec=hv, dtype=float)
            d, _ = minres(H, -g, maxiter=60, rtol=1e-10)
            t, accepted = 1.0, False
            while t > 1e-3:
                x2 = self.normalized(xf + t * d)
                f2, g2 = self.grad(x2)
                if np.abs(g2).max() < gn and f2 >= f - 1e-12 * max(1.0, abs(f)):
                    accepted = True
                    break
                t /= 2
            if not accepted:
                break
            xf, f, g = x2, f2, g2
        return xf, f, float(np.abs(g).max(initial=0.0))


def _local_ascent(objective, x0: np.ndarray, N: int, M: int, span: int, gtol: float, maxiter: int, rounds: int = 2):
    mask = np.zeros((N, M), dtype=bool)
    mask[:, :span] = True
    free = np.concatenate([mask.ravel(), mask.ravel()])

    def fun(xf):
        x = np.zeros(2 * N * M)
        x[free] = xf
        f, g = objective.value_and_grad(unpack(x, N, M))
        return -f, -pack_grad(g)[free]

    def state(xf):
        x = np.zeros(2 * N * M)
        x[free] = xf
        orbitals = normalize_rows(unpack(x, N, M))
        f, g = objective.value_and_grad(orbitals)
        return f, orbitals, float(np.max(np.abs(pack_grad(g)[free]), initial=0.0))

    xf = x0[free]
    iters = 0
    for _ in range(rounds):
        res = minimize(
            fun, xf, jac=True, method="L-BFGS-B",
            options={"maxiter": maxiter, "gtol": gtol * 0.1, "ftol": 1e-16, "maxcor": 20},
        )
        iters += int(res.nit)
        f, orbitals, gnorm = state(res.x)
        xf = pack(orbitals)[free]
        if gnorm < gtol:
            return f, orbitals, iters, True
    # Flat directions: Newton steps from copies with near-coincident orbitals
    # merged, then from the point itself.
    polisher = _Polisher(objective, N, M, free)
    floor = f - 1e-12 * max(1.0, abs(f))
    starts = [_snap_clusters(orbitals, tol) for tol in (1e-2, 1e-4)] + [orbitals]
    for k, start in enumerate(starts):
        if any(np.array_equal(start, s) for s in starts[:k]):
            continue
        cand, _, _ = polisher.run(pack(start)[free], gtol)
        fc, oc, gc = state(cand)
        if fc >= floor and gc < gnorm:
            f, orbitals, gnorm = fc, oc, gc
        if gnorm < gtol:
            break
    return f, orbitals, iters, gnorm < gtol


def pack_grad(g: np.ndarray) -> np.ndarray:
    """Real gradient from the complex packing ``d/dRe + i d/dIm``."""
    return np.concatenate([g.real.ravel(), g.imag.ravel()])


def multistart_maximize(
    objective,
    N: int,
    M: int,
    *,
    span: int | None = None,
    restarts: int = 64,
    seed: int | None = 0,
    gtol: float = GRAD_TOL,
    maxiter: int = 3000,
    hit_tol: float = 1e-6,
    rng: np.random.Generator | None = None,
) -> OptimumResult:
    """Best local maximum over ``restarts`` random starts.

    Ties are broken by the lower restart index, so the result depends only on
    the seed and the restart count.
    """
    span = M if span is None else span
    rng = np.random.default_rng(seed) if rng is None else rng
    starts = [random_orbitals(rng, N, M, span) for _ in range(restarts)]
    values, orbs, converged = [], [], []
    iters = 0
    for x0 in starts:
        f, orbitals, it, ok = _local_ascent(objective, pack(x0), N, M, span, gtol, maxiter)
        values.append(f)
        orbs.append(orbitals)
        converged.append(ok)
        iters += it
    values_arr = np.array(values)
    best = int(np.argmax(values_arr))
    report = SolverReport(
        restarts=restarts,
        iterations=iters,
        converged_fraction=float(np.mean(converged)) if restarts else 0.0,
        tolerance=gtol,
        hit_fraction=float(np.mean(values_arr >= values_arr[best] - hit_tol)) if restarts else 0.0,
        seed=seed,
        values=values,
    )
    return OptimumResult(float(values_arr[best]), orbs[best], report)


def maximize_boson_product(r: int, N: int, M: int | None = None, coefficients=None, **kwargs) -> OptimumResult:
    """Type-2 maximization over ``N`` orbitals in ``M`` modes (default ``M = r``).

    ``span`` limits the orbitals to the first ``span`` modes (default all ``M``).
    """
    M = r if M is None else M
    return multistart_maximize(BosonObjective(r, N, M, coefficients), N, M, **kwargs)


def maximize_slater(qspec: QSpec, N: int, **kwargs) -> OptimumResult:
    """Largest ``<Q^dagger Q>`` found over ``N``-fermion Slater determinants in ``qspec.M`` modes."""
    if qspec.statistics is not Statistics.FERMION:
        raise ValueError("maximize_slater needs a fermionic QSpec")
    if N == 0:
        report = SolverReport(0, 0, 1.0, kwargs.get("gtol", GRAD_TOL), 1.0, kwargs.get("seed"))
        return OptimumResult(0.0, np.zeros((0, qspec.M), dtype=complex), report)
    return multistart_maximize(FockObjective(qspec, N), N, qspec.M, **kwargs)
