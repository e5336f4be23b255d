"""Truncated two-mode Fock basis and operator assembly.

Basis states |m1, m2> with 0 <= m_i <= n_max are enumerated row-major,
index = m1*(n_max+1) + m2.  Operators are scipy CSR matrices; states are
plain numpy arrays (vectors for wavefunctions, dim x dim dense matrices
for density operators).  The truncation is adequate when the population
on the m_i = n_max edge stays below EDGE_TOL at steady state; helpers
here measure that so callers can flag "cutoff too small".
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .model import SystemParams

__all__ = [
    "EDGE_TOL", "FockBasis", "annihilation", "number", "build_hamiltonian",
    "swap_permutation", "expectation", "coherent_state", "vacuum_state",
    "vacuum_projector", "edge_population", "check_density_matrix",
]

# Steady-state population allowed on the m_i = n_max edge before a run is
# flagged "cutoff too small".
EDGE_TOL = 1e-6


@dataclass(frozen=True)
class FockBasis:
    """Two-mode Fock space truncated at n_max photons per site."""

    n_max: int = 15

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    @property
    def dim(self) -> int:
        return (self.n_max + 1) ** 2

    def index(self, m1: int, m2: int) -> int:
        """Basis index of |m1, m2>."""
        n = self.n_max + 1
        if not (0 <= m1 <= self.n_max and 0 <= m2 <= self.n_max):
            raise ValueError("occupation outside truncated basis")
        return m1 * n + m2

    def occupations(self) -> tuple[np.ndarray, np.ndarray]:
        """Arrays (m1, m2) of per-site occupation for every basis index."""
        n = self.n_max + 1
        idx = np.arange(self.dim)
        return idx // n, idx % n


def _site_annihilation(n_max: int) -> sp.csr_matrix:
    m = np.arange(1, n_max + 1)
    return sp.csr_matrix(
        (np.sqrt(m.astype(float)), (m - 1, m)),
        shape=(n_max + 1, n_max + 1), dtype=complex)


def annihilation(basis: FockBasis, site: int) -> sp.csr_matrix:
    """Annihilation operator a_site (site in {1, 2}) on the full space."""
    a = _site_annihilation(basis.n_max)
    eye = sp.identity(basis.n_max + 1, dtype=complex, format="csr")
    if site == 1:
        return sp.kron(a, eye, format="csr")
    if site == 2:
        return sp.kron(eye, a, format="csr")
    raise ValueError("site must be 1 or 2")


def number(basis: FockBasis, site: int) -> sp.csr_matrix:
    """Number operator of one site (diagonal)."""
    m1, m2 = basis.occupations()
    diag = m1 if site == 1 else m2
    if site not in (1, 2):
        raise ValueError("site must be 1 or 2")
    return sp.diags(diag.astype(float)).tocsr().astype(complex)


def build_hamiltonian(params: SystemParams, basis: FockBasis) -> sp.csr_matrix:
    """Dimer Hamiltonian in the frame rotating at the drive frequency.

    H = -J (a1^+ a2 + a2^+ a1) + (U/2)(a1^+2 a1^2 + a2^+2 a2^2)
        + dw (n1 + n2) + F (a1^+ + a2^+) + F* (a1 + a2)

    Hermitian by construction.
    """
    m1, m2 = basis.occupations()
    diag = (params.delta_omega * (m1 + m2)
            + 0.5 * params.u * (m1 * (m1 - 1.0) + m2 * (m2 - 1.0)))
    h = sp.diags(diag).tocsr().astype(complex)
    a1 = annihilation(basis, 1)
    a2 = annihilation(basis, 2)
    hop = a1.conj().T @ a2
    h = h - params.j * (hop + hop.conj().T)
    drive = params.f * (a1.conj().T + a2.conj().T)
    h = h + drive + drive.conj().T
    return h.tocsr()


def swap_permutation(basis: FockBasis) -> sp.csr_matrix:
    """Permutation operator P exchanging the two sites: P|m1,m2> = |m2,m1>."""
    m1, m2 = basis.occupations()
    n = basis.n_max + 1
    target = m2 * n + m1
    return sp.csr_matrix(
        (np.ones(basis.dim), (target, np.arange(basis.dim))),
        shape=(basis.dim, basis.dim), dtype=complex)


def expectation(state_or_rho: np.ndarray, operator) -> complex:
    """<O> for a state vector (normalized internally) or a density matrix."""
    x = np.asarray(state_or_rho)
    if x.ndim == 1:
        if operator.shape[1] != x.shape[0]:
            raise ValueError("dimension mismatch between state and operator")
        nrm = np.vdot(x, x).real
        if nrm == 0:
            raise ValueError("cannot take expectation in a zero state")
        return complex(np.vdot(x, operator @ x) / nrm)
    if x.ndim == 2:
        if x.shape[0] != x.shape[1] or operator.shape[1] != x.shape[0]:
            raise ValueError("dimension mismatch between rho and operator")
        return complex(np.sum((operator @ x).diagonal()))
    raise ValueError("state must be a vector or a square matrix")


def vacuum_state(basis: FockBasis) -> np.ndarray:
    psi = np.zeros(basis.dim, dtype=complex)
    psi[0] = 1.0
    return psi


def vacuum_projector(basis: FockBasis) -> np.ndarray:
    rho = np.zeros((basis.dim, basis.dim), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def coherent_state(basis: FockBasis, alpha1: complex, alpha2: complex) -> np.ndarray:
    """Truncated product coherent state |alpha1> x |alpha2>, normalized.

    Truncation error is negligible only when |alpha_i|^2 is well below
    n_max; check with edge_population when in doubt.
    """
    def site(alpha):
        m = np.arange(basis.n_max + 1)
        # alpha^m / sqrt(m!) via logs to dodge overflow at large m.
        if alpha == 0:
            v = np.zeros(basis.n_max + 1, dtype=complex)
            v[0] = 1.0
            return v
        lg = m * math.log(abs(alpha)) - 0.5 * np.array(
            [math.lgamma(k + 1) for k in m])
        v = np.exp(lg) * np.exp(1j * m * np.angle(complex(alpha)))
        return v

    psi = np.kron(site(complex(alpha1)), site(complex(alpha2)))
    return psi / math.sqrt(np.vdot(psi, psi).real)


def edge_population(state_or_rho: np.ndarray, basis: FockBasis) -> float:
    """Total population on basis states with m1 = n_max or m2 = n_max."""
    m1, m2 = basis.occupations()
    edge = (m1 == basis.n_max) | (m2 == basis.n_max)
    x = np.asarray(state_or_rho)
    if x.ndim == 1:
        p = np.abs(x) ** 2
        p = p / p.sum()
    else:
        p = np.real(np.diagonal(x))
    return float(p[edge].sum())


def check_density_matrix(rho: np.ndarray, herm_tol: float = 1e-10,
                         trace_tol: float = 1e-8,
                         eig_floor: float = -1e-8) -> None:
    """Assert the defining properties of a density matrix.

    Raises ValueError naming the violated property (Hermiticity within
    herm_tol, unit trace within trace_tol, eigenvalues above eig_floor).
    """
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("rho must be square")
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise ValueError("rho is not Hermitian within tolerance")
    if abs(np.trace(rho).real - 1.0) > trace_tol or abs(np.trace(rho).imag) > trace_tol:
        raise ValueError("trace of rho is not 1 within tolerance")
    if np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() < eig_floor:
        raise ValueError("rho has an eigenvalue below the positivity floor")
