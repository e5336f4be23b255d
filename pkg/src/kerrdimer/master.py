"""Lindblad master equation of the lossy driven dimer.

The density matrix evolves as

    drho/dt = -i[H, rho]
              + gamma * (2 a1 rho a1^+ + 2 a2 rho a2^+ - N rho - rho N)

with N = n1 + n2; the factor-2 bracket is equivalent to standard-form
jump operators sqrt(2 gamma) a_i, a convention fixed project-wide.

Two steady-state paths are provided and cross-validated:

- evolve_to_steady: vectorized RK4 propagation (compiled, column-batched
  over initial states) with per-step re-Hermitization and trace renorm.
- steady_state_direct: solves L(rho) = 0 directly.  The default backend
  rewrites the stationarity condition as rho = M(rho) with
  M(rho) = -S^{-1}[2 gamma (a1 rho a1^+ + a2 rho a2^+)], where S is the
  Sylvester map rho -> D rho + rho D^+ of the no-jump drift
  D = -iH - gamma N.  M is a completely positive map whose largest
  eigenvalue is exactly 1 with the steady state as eigenvector, found by
  Arnoldi iteration; each application costs one dense Sylvester solve
  against a cached Schur form of D.  A sparse-LU backend on the
  vectorized Liouvillian is kept for validation at small dimensions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ._kernels import lindblad_rk4_batch
from .fockspace import (EDGE_TOL, FockBasis, annihilation, build_hamiltonian,
                        check_density_matrix, edge_population, number,
                        vacuum_projector)
from .model import SystemParams

__all__ = ["MasterRunResult", "lindblad_rhs", "liouvillian",
           "evolve_to_steady", "steady_state_direct", "sweep_steady_states",
           "random_density_matrix"]


@dataclass
class MasterRunResult:
    """Steady-state (or final-state) summary of a master-equation run.

    residual is the Frobenius norm of drho/dt at termination; converged
    means residual < tol.  cutoff_warning is set when the population on
    the m_i = n_max edge exceeds EDGE_TOL ("cutoff too small").
    """

    rho_ss: np.ndarray
    n1: float
    n2: float
    g2_1: float
    g2_2: float
    converged: bool
    residual: float
    t_elapsed: float | None = None
    cutoff_warning: bool = False


@lru_cache(maxsize=8)
def _ops(params: SystemParams, basis: FockBasis):
    h = build_hamiltonian(params, basis)
    a1 = annihilation(basis, 1)
    a2 = annihilation(basis, 2)
    m1, m2 = basis.occupations()
    ndiag = (m1 + m2).astype(float)
    return h, a1, a2, ndiag


def observables(rho: np.ndarray, basis: FockBasis):
    """(n1, n2, g2_1, g2_2) from the Fock-diagonal populations of rho."""
    pops = np.real(np.diagonal(rho))
    m1, m2 = basis.occupations()
    n1 = float(pops @ m1)
    n2 = float(pops @ m2)
    q1 = float(pops @ (m1 * (m1 - 1.0)))
    q2 = float(pops @ (m2 * (m2 - 1.0)))
    g2_1 = q1 / n1**2 if n1 > 1e-12 else 0.0
    g2_2 = q2 / n2**2 if n2 > 1e-12 else 0.0
    return n1, n2, g2_1, g2_2


def lindblad_rhs(params: SystemParams, basis: FockBasis,
                 rho: np.ndarray) -> np.ndarray:
    """drho/dt for a dense density matrix.  Trace-free to round-off."""
    h, a1, a2, ndiag = _ops(params, basis)
    g = params.gamma
    comm = h @ rho - (h @ rho.conj().T).conj().T
    jump = a1 @ (a1 @ rho.conj().T).conj().T + a2 @ (a2 @ rho.conj().T).conj().T
    return (-1j * comm
            + g * (2.0 * jump - ndiag[:, None] * rho - rho * ndiag[None, :]))


def liouvillian(params: SystemParams, basis: FockBasis) -> sp.csr_matrix:
    """Sparse generator L acting on row-major vec(rho)."""
    h, a1, a2, ndiag = _ops(params, basis)
    d = basis.dim
    eye = sp.identity(d, dtype=complex, format="csr")
    g = params.gamma
    lop = -1j * (sp.kron(h, eye) - sp.kron(eye, h.T))
    lop = lop + 2.0 * g * (sp.kron(a1, a1.conj()) + sp.kron(a2, a2.conj()))
    nmat = sp.diags(ndiag).tocsr().astype(complex)
    lop = lop - g * (sp.kron(nmat, eye) + sp.kron(eye, nmat))
    return lop.tocsr()


def random_density_matrix(basis: FockBasis, rng: np.random.Generator) -> np.ndarray:
    """Random full-rank valid density matrix (Wishart-type construction)."""
    d = basis.dim
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def _transpose_perm(d: int) -> np.ndarray:
    idx = np.arange(d * d)
    return (idx % d) * d + idx // d


def evolve_to_steady(params: SystemParams, basis: FockBasis,
                     rho0: np.ndarray | list[np.ndarray] | None = None,
                     dt: float = 2e-3, tol: float = 1e-8,
                     t_max: float = 500.0):
    """Propagate rho with RK4 until ||drho/dt||_F < tol or t_max.

    Parameters
    ----------
    rho0 : density matrix, list of them, or None
        None starts from vacuum.  A list (or 3-D array) is propagated as
        one column-batched run and comes back as a list of results; the
        batch stops once every member converged, so early finishers are
        integrated a little further than a lone run would be (they only
        get closer to the fixed point).
    dt : float
        RK4 step; validated against a Gershgorin bound on the generator
        spectrum (raises if outside the stability region).
    tol, t_max : float
        Convergence threshold on the residual, and horizon; hitting the
        horizon yields converged=False with the last residual.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    single = False
    if rho0 is None:
        stack = [vacuum_projector(basis)]
        single = True
    elif isinstance(rho0, np.ndarray) and rho0.ndim == 2:
        stack = [rho0]
        single = True
    else:
        stack = [np.asarray(r) for r in rho0]
    for r in stack:
        check_density_matrix(r, herm_tol=1e-8, trace_tol=1e-6, eig_floor=-1e-6)

    lop = liouvillian(params, basis)
    # RK4 absolute-stability guard along the dominant (imaginary-ish) axis.
    row_bound = float(np.max(np.abs(lop).sum(axis=1)))
    if row_bound > 0 and dt > 2.5 / row_bound:
        raise ValueError(
            f"dt = {dt} outside the RK4 stability region; need "
            f"dt <= {2.5 / row_bound:.2e} at this cutoff")

    d = basis.dim
    nb = len(stack)
    vr = np.empty((d * d, nb))
    vi = np.empty((d * d, nb))
    for b, r in enumerate(stack):
        v = np.asarray(r, dtype=complex).ravel()
        vr[:, b] = v.real
        vi[:, b] = v.imag

    lcsr = lop.tocsr()
    status = np.zeros(nb, dtype=np.uint8)
    conv_step = np.zeros(nb, dtype=np.int64)
    residual = np.full(nb, np.inf)
    n_steps = int(round(t_max / dt))
    check_every = max(1, int(round(0.5 / dt)))
    lindblad_rk4_batch(
        lcsr.indptr, lcsr.indices,
        np.ascontiguousarray(lcsr.data.real), np.ascontiguousarray(lcsr.data.imag),
        vr, vi, _transpose_perm(d), np.arange(d) * d + np.arange(d),
        dt, n_steps, check_every, tol, status, conv_step, residual)

    results = []
    for b in range(nb):
        if status[b] == 2:
            raise RuntimeError(
                "density-matrix propagation lost trace or diverged "
                f"(column {b}); reduce dt")
        rho = (vr[:, b] + 1j * vi[:, b]).reshape(d, d)
        n1, n2, g2_1, g2_2 = observables(rho, basis)
        res = MasterRunResult(
            rho_ss=rho, n1=n1, n2=n2, g2_1=g2_1, g2_2=g2_2,
            converged=bool(status[b] == 1), residual=float(residual[b]),
            t_elapsed=float(conv_step[b] * dt) if status[b] == 1 else t_max,
            cutoff_warning=edge_population(rho, basis) > EDGE_TOL)
        results.append(res)
    return results[0] if single else results


def _vacuum_result(params, basis) -> MasterRunResult:
    rho = vacuum_projector(basis)
    res = float(np.linalg.norm(lindblad_rhs(params, basis, rho)))
    return MasterRunResult(rho_ss=rho, n1=0.0, n2=0.0, g2_1=0.0, g2_2=0.0,
                           converged=True, residual=res)


def steady_state_direct(params: SystemParams, basis: FockBasis,
                        method: str = "fixedpoint", tol: float = 1e-8,
                        rho_guess: np.ndarray | None = None) -> MasterRunResult:
    """Solve L(rho) = 0 with tr rho = 1 directly.

    method "fixedpoint" (default) is the Sylvester fixed-point Arnoldi
    iteration described in the module docstring; it needs only dense
    d x d algebra (d = basis.dim) and scales to the default cutoff.
    method "lu" factorizes the vectorized Liouvillian with the trace
    condition replacing one row; memory-bounded to small cutoffs.
    rho_guess warm-starts the Arnoldi iteration (useful in sweeps).

    The residual certificate ||L(rho)||_F is computed from the returned
    state; converged = residual < tol.

    Raises
    ------
    RuntimeError
        If the solve is singular/ill-conditioned or fails to converge;
        the message advises the propagation path.
    """
    if abs(params.f) == 0.0:
        return _vacuum_result(params, basis)
    if method == "fixedpoint":
        rho = _fixedpoint_solve(params, basis, rho_guess)
    elif method == "lu":
        rho = _lu_solve(params, basis)
    else:
        raise ValueError(f"unknown method {method!r}")

    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    residual = float(np.linalg.norm(lindblad_rhs(params, basis, rho)))
    if not math.isfinite(residual) or residual > 1e4 * tol:
        raise RuntimeError(
            f"direct steady-state solve ill-conditioned (residual "
            f"{residual:.2e}); use evolve_to_steady instead")
    n1, n2, g2_1, g2_2 = observables(rho, basis)
    return MasterRunResult(rho_ss=rho, n1=n1, n2=n2, g2_1=g2_1, g2_2=g2_2,
                           converged=residual < tol, residual=residual,
                           cutoff_warning=edge_population(rho, basis) > EDGE_TOL)


def _fixedpoint_solve(params: SystemParams, basis: FockBasis,
                      rho_guess: np.ndarray | None) -> np.ndarray:
    h, a1, a2, ndiag = _ops(params, basis)
    d = basis.dim
    g = params.gamma
    drift = (-1j) * h.toarray()
    drift[np.diag_indices(d)] -= g * ndiag
    t_schur, q_schur = sla.schur(drift, output="complex")
    (trsyl,) = sla.get_lapack_funcs(("trsyl",), (t_schur,))
    qh = q_schur.conj().T

    def apply_m(v):
        rho = v.reshape(d, d)
        x = 2.0 * g * (a1 @ (a1 @ rho.conj().T).conj().T
                       + a2 @ (a2 @ rho.conj().T).conj().T)
        z, scale, info = trsyl(t_schur, t_schur, -(qh @ x @ q_schur), tranb="C")
        if info < 0:
            raise RuntimeError("Sylvester solve failed in the fixed-point map")
        return ((q_schur @ z @ qh) / scale).ravel()

    lin = spla.LinearOperator((d * d, d * d), matvec=apply_m, dtype=complex)
    # Blend any guess with the maximally mixed state: a guess supported
    # only on the vacuum sits in the kernel of the recycling map and
    # would hand ARPACK a zero first Krylov vector.
    v0 = (np.eye(d, dtype=complex) / d).ravel()
    if rho_guess is not None:
        v0 = v0 + np.asarray(rho_guess, dtype=complex).ravel()
    for ncv in (32, 64):
        try:
            vals, vecs = spla.eigs(lin, k=1, which="LM", v0=v0,
                                   ncv=min(ncv, d * d - 1), tol=1e-12,
                                   maxiter=3000)
            break
        except spla.ArpackNoConvergence:
            continue
        except spla.ArpackError as exc:
            raise RuntimeError(
                f"Arnoldi iteration failed ({exc}); "
                "use evolve_to_steady instead") from exc
    else:
        raise RuntimeError(
            "Arnoldi iteration on the fixed-point map did not converge; "
            "use evolve_to_steady instead")
    if abs(vals[0] - 1.0) > 1e-6:
        raise RuntimeError(
            f"fixed-point map eigenvalue {vals[0]:.8f} differs from 1; "
            "use evolve_to_steady instead")
    return vecs[:, 0].reshape(d, d)


def _lu_solve(params: SystemParams, basis: FockBasis) -> np.ndarray:
    d = basis.dim
    if d * d > 20000:
        raise RuntimeError(
            "LU backend needs the vectorized Liouvillian factorized; "
            f"dim^2 = {d * d} exceeds the memory-safe bound, use "
            "method='fixedpoint' or evolve_to_steady")
    lop = liouvillian(params, basis).tolil()
    trace_row = np.zeros(d * d, dtype=complex)
    trace_row[np.arange(d) * d + np.arange(d)] = 1.0
    lop[0] = trace_row
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    try:
        lu = spla.splu(lop.tocsc())
        x = lu.solve(rhs)
    except RuntimeError as exc:
        raise RuntimeError(
            f"sparse LU of the Liouvillian failed ({exc}); use "
            "evolve_to_steady instead") from exc
    return x.reshape(d, d)


def sweep_steady_states(params_list, basis: FockBasis,
                        method: str = "fixedpoint") -> list[MasterRunResult]:
    """Direct steady states along a parameter sweep, warm-starting each
    solve from the previous solution."""
    results = []
    guess = None
    for p in params_list:
        res = steady_state_direct(p, basis, method=method, rho_guess=guess)
        guess = res.rho_ss
        results.append(res)
    return results
