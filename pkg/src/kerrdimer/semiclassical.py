"""Mean-field dynamics and steady-state structure of the driven Kerr dimer.

The coherent-state equations of motion for the two mode amplitudes are

    d(alpha1)/dt = F - alpha1 * f(|alpha1|^2) + i J alpha2
    d(alpha2)/dt = F - alpha2 * f(|alpha2|^2) + i J alpha1

with f(n) = kappa + i U n and kappa = gamma + i delta_omega.  This module
integrates the flow, enumerates every fixed point by multi-start Newton
iteration, classifies linear stability, and sweeps phase diagrams of
stable-state counts.  Up to nine fixed points exist, of which at most four
are stable; stable solutions come either as exchange-symmetric states
(n1 = n2) or as mirror pairs that spontaneously break the exchange symmetry.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .model import SystemParams

__all__ = [
    "Stability", "Symmetry", "MeanFieldState", "MeanFieldTrajectory",
    "StabilityMatrix", "SteadyStateSolution", "SearchGrid", "PhaseDiagram",
    "rhs", "integrate", "find_all_steady_states", "stability_matrix",
    "classify", "state_equation_residual", "symmetric_branch", "phase_diagram",
]

# Eigenvalue real parts within +-EPS_MARGINAL of zero are neither counted
# stable nor unstable (bifurcation guard).
EPS_MARGINAL = 1e-8
# Exchange-symmetry tolerance on (dn, dtheta).
EPS_SYMMETRY = 1e-6
# Two roots closer than this (max component-wise distance) are duplicates.
DEDUP_TOL = 1e-6


class Stability(enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"


class Symmetry(enum.Enum):
    PRESERVING = "preserving"
    BREAKING = "breaking"


def wrap_angle(x: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    w = math.remainder(x, 2.0 * math.pi)
    if w <= -math.pi:
        w = math.pi
    return w


@dataclass(frozen=True)
class MeanFieldState:
    """Pair of coherent amplitudes (alpha1, alpha2)."""

    alpha1: complex
    alpha2: complex

    @property
    def n1(self) -> float:
        return abs(self.alpha1) ** 2

    @property
    def n2(self) -> float:
        return abs(self.alpha2) ** 2

    @property
    def theta1(self) -> float:
        return math.atan2(self.alpha1.imag, self.alpha1.real)

    @property
    def theta2(self) -> float:
        return math.atan2(self.alpha2.imag, self.alpha2.real)

    @property
    def dn(self) -> float:
        return self.n1 - self.n2

    @property
    def dtheta(self) -> float:
        """Relative phase theta1 - theta2, wrapped to (-pi, pi]."""
        return wrap_angle(self.theta1 - self.theta2)

    def swapped(self) -> "MeanFieldState":
        return MeanFieldState(self.alpha2, self.alpha1)


@dataclass
class MeanFieldTrajectory:
    """Fixed-step integration record of the mean-field flow.

    converged is True when the residual norm of the equations of motion
    stayed below 1e-9 for a sustained window of 10/gamma; convergence_time
    is the start of the first such window (None if never).
    """

    times: np.ndarray
    alpha1: np.ndarray
    alpha2: np.ndarray
    converged: bool
    convergence_time: float | None

    def final_state(self) -> MeanFieldState:
        return MeanFieldState(complex(self.alpha1[-1]), complex(self.alpha2[-1]))


@dataclass
class StabilityMatrix:
    """Linearization of the flow about a state.

    In the fluctuation ordering (d_alpha1, d_alpha1*, d_alpha2, d_alpha2*)
    the matrix a is minus the Jacobian of the flow, so a fixed point is
    linearly stable exactly when every eigenvalue has positive real part.
    trace and determinant are reported for the Hurwitz cross-check (both
    must be positive at a stable point; the trace is 4*gamma identically).
    """

    a: np.ndarray
    eigenvalues: np.ndarray
    trace: complex
    determinant: complex


@dataclass
class SteadyStateSolution:
    """A located fixed point with its linear-stability classification."""

    state: MeanFieldState
    eigenvalues: np.ndarray
    stability: Stability
    symmetry: Symmetry

    @property
    def n1(self) -> float:
        return self.state.n1

    @property
    def n2(self) -> float:
        return self.state.n2


@dataclass(frozen=True)
class SearchGrid:
    """Deterministic multi-start grid for the root search.

    Per site, n_amp amplitude points on [0, n_max] crossed with n_phase
    phases on [0, 2pi); the two sites are crossed again, so the default
    8 x 8 per site yields 4096 Newton starts.  The amplitude levels are
    anchored at the symmetric-branch occupations (fixed points cluster
    near them, and near a fold the middle basin is too thin for a bare
    uniform grid), with the remainder spread over [0, n_max].
    n_max = None uses 2|F|^2/gamma^2 + 10.
    """

    n_amp: int = 8
    n_phase: int = 8
    n_max: float | None = None

    def starts(self, params: SystemParams) -> np.ndarray:
        n_max = self.n_max
        if n_max is None:
            n_max = 2.0 * abs(params.f) ** 2 / params.gamma**2 + 10.0
        anchors = [0.0] + [n for n, _ in symmetric_branch(params)
                           if n <= n_max]
        n_fill = max(self.n_amp - len(anchors), 2)
        levels = np.unique(np.concatenate(
            [np.linspace(0.0, n_max, n_fill), anchors]))
        amps = np.sqrt(levels)
        phases = np.linspace(0.0, 2.0 * np.pi, self.n_phase, endpoint=False)
        per_site = (amps[:, None] * np.exp(1j * phases)[None, :]).ravel()
        a1, a2 = np.meshgrid(per_site, per_site, indexing="ij")
        grid = np.stack([a1.ravel(), a2.ravel()], axis=1)
        # Exact symmetric-branch amplitudes F / (kappa + i(U n - J)) and
        # their cross products: at J = 0 these are the fixed points
        # themselves, and near a fold their Newton basins are thinner
        # than any uniform grid resolves.
        alpha = np.array([params.f / (params.kappa
                                      + 1j * (params.u * n - params.j))
                          for n, _ in symmetric_branch(params)])
        if alpha.size:
            b1, b2 = np.meshgrid(alpha, alpha, indexing="ij")
            grid = np.concatenate(
                [grid, np.stack([b1.ravel(), b2.ravel()], axis=1)])
        return grid


@dataclass
class PhaseDiagram:
    """Grid of stable-state counts over two swept parameters.

    n_stable counts stable fixed points (1, 2, or 4 in the regions of the
    phase diagram), n_breaking the stable symmetry-breaking ones among them
    (0 or 2), n_total all distinct fixed points found (<= 9).  Failed grid
    points carry the sentinel -1 in all three matrices.
    """

    axis1: str
    axis2: str
    values1: np.ndarray
    values2: np.ndarray
    n_stable: np.ndarray
    n_breaking: np.ndarray
    n_total: np.ndarray


def rhs(params: SystemParams, state: MeanFieldState) -> tuple[complex, complex]:
    """Time derivatives (d alpha1/dt, d alpha2/dt) of the mean-field flow."""
    kappa = params.kappa
    u, j, f = params.u, params.j, params.f
    a1, a2 = complex(state.alpha1), complex(state.alpha2)
    d1 = f - a1 * (kappa + 1j * u * (a1.real**2 + a1.imag**2)) + 1j * j * a2
    d2 = f - a2 * (kappa + 1j * u * (a2.real**2 + a2.imag**2)) + 1j * j * a1
    return d1, d2


def integrate(params: SystemParams, initial: MeanFieldState,
              t_final: float = 200.0, dt: float = 1e-3) -> MeanFieldTrajectory:
    """Integrate the mean-field flow with fixed-step RK4.

    Parameters
    ----------
    initial : MeanFieldState
        Starting amplitudes.
    t_final, dt : float
        Horizon and step, in units of 1/gamma.  Defaults settle the
        transients of all parameter sets studied here.

    Returns
    -------
    MeanFieldTrajectory
        Amplitudes sampled at every step, plus the convergence report:
        converged when the residual norm stays below 1e-9 over 10/gamma.

    Raises
    ------
    RuntimeError
        If either |alpha_i| exceeds 1e3 (runaway trajectory).
    """
    if dt <= 0 or t_final <= 0:
        raise ValueError("dt and t_final must be positive")
    n_steps = int(round(t_final / dt))
    kappa = params.kappa
    u, j, f = params.u, params.j, params.f

    def deriv(a1, a2):
        d1 = f - a1 * (kappa + 1j * u * (a1.real**2 + a1.imag**2)) + 1j * j * a2
        d2 = f - a2 * (kappa + 1j * u * (a2.real**2 + a2.imag**2)) + 1j * j * a1
        return d1, d2

    times = np.arange(n_steps + 1) * dt
    traj1 = np.empty(n_steps + 1, dtype=complex)
    traj2 = np.empty(n_steps + 1, dtype=complex)
    a1, a2 = complex(initial.alpha1), complex(initial.alpha2)
    traj1[0], traj2[0] = a1, a2

    needed = max(1, int(math.ceil(10.0 / (params.gamma * dt))))
    streak = 0
    convergence_time = None

    for k in range(n_steps):
        k1a, k1b = deriv(a1, a2)
        k2a, k2b = deriv(a1 + 0.5 * dt * k1a, a2 + 0.5 * dt * k1b)
        k3a, k3b = deriv(a1 + 0.5 * dt * k2a, a2 + 0.5 * dt * k2b)
        k4a, k4b = deriv(a1 + dt * k3a, a2 + dt * k3b)
        a1 = a1 + (dt / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
        a2 = a2 + (dt / 6.0) * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
        traj1[k + 1], traj2[k + 1] = a1, a2
        if abs(a1) > 1e3 or abs(a2) > 1e3:
            raise RuntimeError(
                f"mean-field trajectory diverged at t = {(k + 1) * dt:.3f} "
                f"(|alpha| > 1e3)")
        r1, r2 = deriv(a1, a2)
        if math.hypot(abs(r1), abs(r2)) < 1e-9:
            streak += 1
            if streak >= needed and convergence_time is None:
                convergence_time = (k + 1 - streak) * dt
        else:
            streak = 0

    return MeanFieldTrajectory(times=times, alpha1=traj1, alpha2=traj2,
                               converged=convergence_time is not None,
                               convergence_time=convergence_time)


def stability_matrix(params: SystemParams, state: MeanFieldState) -> StabilityMatrix:
    """Linear-stability matrix about a state.

    Minus the Jacobian of the flow in the ordering
    (d_alpha1, d_alpha1*, d_alpha2, d_alpha2*): positive eigenvalue real
    parts mean decaying fluctuations.  At alpha = 0 the spectrum is
    gamma + i(delta_omega +- j) and its conjugates, real part gamma.
    """
    kappa = params.kappa
    u, j = params.u, params.j
    a1, a2 = complex(state.alpha1), complex(state.alpha2)
    n1 = a1.real**2 + a1.imag**2
    n2 = a2.real**2 + a2.imag**2
    ij = 1j * j
    a = np.array([
        [kappa + 2j * u * n1, 1j * u * a1 * a1, -ij, 0.0],
        [-1j * u * (a1 * a1).conjugate(), kappa.conjugate() - 2j * u * n1, 0.0, ij],
        [-ij, 0.0, kappa + 2j * u * n2, 1j * u * a2 * a2],
        [0.0, ij, -1j * u * (a2 * a2).conjugate(), kappa.conjugate() - 2j * u * n2],
    ], dtype=complex)
    eigenvalues = np.linalg.eigvals(a)
    return StabilityMatrix(a=a, eigenvalues=eigenvalues,
                           trace=complex(np.trace(a)),
                           determinant=complex(np.linalg.det(a)))


def classify(params: SystemParams, state: MeanFieldState) -> SteadyStateSolution:
    """Classify a (near-)fixed point by stability and exchange symmetry."""
    sm = stability_matrix(params, state)
    re = sm.eigenvalues.real
    if np.all(re > EPS_MARGINAL):
        stab = Stability.STABLE
    elif np.any(re < -EPS_MARGINAL):
        stab = Stability.UNSTABLE
    else:
        stab = Stability.MARGINAL
    symmetric = (abs(state.dn) < EPS_SYMMETRY * (1.0 + state.n1 + state.n2)
                 and abs(state.dtheta) < EPS_SYMMETRY)
    sym = Symmetry.PRESERVING if symmetric else Symmetry.BREAKING
    return SteadyStateSolution(state=state, eigenvalues=sm.eigenvalues,
                               stability=stab, symmetry=sym)


def _residuals(params: SystemParams, a1: np.ndarray, a2: np.ndarray):
    """Vectorized fixed-point residuals (r1, r2) of the flow."""
    kappa = params.kappa
    u, j, f = params.u, params.j, params.f
    r1 = f - a1 * (kappa + 1j * u * (a1.real**2 + a1.imag**2)) + 1j * j * a2
    r2 = f - a2 * (kappa + 1j * u * (a2.real**2 + a2.imag**2)) + 1j * j * a1
    return r1, r2


def _newton_batch(params: SystemParams, starts: np.ndarray,
                  max_iter: int = 60, tol: float | None = None):
    """Newton iteration on the 4 real amplitude components, batched over starts.

    Returns (roots, converged_mask).  Starts whose Jacobian degenerates or
    whose iterates run away are dropped from the active set.
    """
    kappa = params.kappa
    u, j, f = params.u, params.j, params.f
    if tol is None:
        tol = 1e-11 * (1.0 + abs(f) ** 2)

    alpha = starts.astype(complex).copy()
    m = alpha.shape[0]
    active = np.ones(m, dtype=bool)
    converged = np.zeros(m, dtype=bool)

    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        a1, a2 = alpha[idx, 0], alpha[idx, 1]
        r1, r2 = _residuals(params, a1, a2)
        res = np.maximum(np.abs(r1), np.abs(r2))
        done = res < tol
        if np.any(done):
            converged[idx[done]] = True
            active[idx[done]] = False
            keep = ~done
            idx, a1, a2, r1, r2 = idx[keep], a1[keep], a2[keep], r1[keep], r2[keep]
            if idx.size == 0:
                break

        n1 = a1.real**2 + a1.imag**2
        n2 = a2.real**2 + a2.imag**2
        # Wirtinger derivatives of (r1, r2); the real 4x4 Jacobian columns
        # follow from d/dx = d/da + d/da*, d/dy = i(d/da - d/da*).
        d1_1 = -(kappa + 2j * u * n1)          # dr1/dalpha1
        d1_1c = -1j * u * a1 * a1              # dr1/dalpha1*
        d2_2 = -(kappa + 2j * u * n2)
        d2_2c = -1j * u * a2 * a2
        ij = 1j * j

        k = idx.size
        jac = np.empty((k, 4, 4), dtype=float)
        c11x = d1_1 + d1_1c
        c11y = 1j * (d1_1 - d1_1c)
        c22x = d2_2 + d2_2c
        c22y = 1j * (d2_2 - d2_2c)
        jac[:, 0, 0], jac[:, 1, 0] = c11x.real, c11x.imag
        jac[:, 0, 1], jac[:, 1, 1] = c11y.real, c11y.imag
        jac[:, 0, 2], jac[:, 1, 2] = ij.real, ij.imag
        jac[:, 0, 3], jac[:, 1, 3] = (1j * ij).real, (1j * ij).imag
        jac[:, 2, 0], jac[:, 3, 0] = ij.real, ij.imag
        jac[:, 2, 1], jac[:, 3, 1] = (1j * ij).real, (1j * ij).imag
        jac[:, 2, 2], jac[:, 3, 2] = c22x.real, c22x.imag
        jac[:, 2, 3], jac[:, 3, 3] = c22y.real, c22y.imag

        rvec = np.empty((k, 4))
        rvec[:, 0], rvec[:, 1] = r1.real, r1.imag
        rvec[:, 2], rvec[:, 3] = r2.real, r2.imag

        det = np.linalg.det(jac)
        bad = ~np.isfinite(det) | (np.abs(det) < 1e-30)
        if np.any(bad):
            active[idx[bad]] = False
            good = ~bad
            idx, jac, rvec = idx[good], jac[good], rvec[good]
            if idx.size == 0:
                continue

        step = np.linalg.solve(jac, rvec[:, :, None])[:, :, 0]
        alpha[idx, 0] -= step[:, 0] + 1j * step[:, 1]
        alpha[idx, 1] -= step[:, 2] + 1j * step[:, 3]

        run = ~np.isfinite(alpha[idx]).all(axis=1) | (np.abs(alpha[idx]) > 1e6).any(axis=1)
        if np.any(run):
            active[idx[run]] = False

    return alpha, converged


def find_all_steady_states(params: SystemParams,
                           search_grid: SearchGrid | None = None
                           ) -> list[SteadyStateSolution]:
    """Locate every fixed point of the mean-field flow.

    Multi-start Newton iteration from a deterministic amplitude/phase grid
    (see :class:`SearchGrid`), deduplicated at max component-wise distance
    1e-6 and classified via the stability matrix.  Ordering is
    deterministic: by total occupation, then occupation imbalance, then
    relative phase.

    Raises
    ------
    RuntimeError
        If no start converges (at least one fixed point always exists), or
        if more than nine distinct roots survive deduplication.
    """
    grid = search_grid if search_grid is not None else SearchGrid()
    starts = grid.starts(params)
    roots, ok = _newton_batch(params, starts)
    roots = roots[ok]
    if roots.shape[0] == 0:
        raise RuntimeError("steady-state search converged from no start point")

    # Collapse numerically identical roots cheaply before the tolerance pass.
    _, first = np.unique(np.round(roots, 8), axis=0, return_index=True)
    roots = roots[np.sort(first)]

    accepted: list[np.ndarray] = []
    for r in roots:
        dup = False
        for a in accepted:
            if max(abs(r[0] - a[0]), abs(r[1] - a[1])) < DEDUP_TOL:
                dup = True
                break
        if not dup:
            accepted.append(r)
    if len(accepted) > 9:
        raise RuntimeError(
            f"{len(accepted)} distinct roots found; more than nine indicates "
            "a deduplication failure")

    solutions = [classify(params, MeanFieldState(complex(r[0]), complex(r[1])))
                 for r in accepted]
    solutions.sort(key=lambda s: (round(s.n1 + s.n2, 9),
                                  round(s.n1 - s.n2, 9),
                                  round(s.state.dtheta, 9)))
    return solutions


def state_equation_residual(params: SystemParams, n1: float, n2: float,
                            delta_theta: float) -> tuple[float, float]:
    """Residuals of the two polar-form state equations.

    Eliminating the phases from the fixed-point conditions leaves two real
    equations in (n1, n2, dtheta); each residual is |F|^2 minus the
    corresponding right-hand side:

        |F|^2 = n1 (gamma^2 + (U n1 + dw)^2)
                - 2 gamma J sqrt(n1 n2) sin(dtheta)
                - 2 J sqrt(n1 n2) (U n1 + dw) cos(dtheta) + J^2 n2

    and the site-2 equation with 1 <-> 2 and the sign of the sin term
    flipped.  Any located fixed point satisfies both to 1e-7 (1 + |F|^2).
    """
    if n1 < 0 or n2 < 0:
        raise ValueError("occupations must be non-negative")
    g, u, j, dw = params.gamma, params.u, params.j, params.delta_omega
    f2 = abs(params.f) ** 2
    root = math.sqrt(n1 * n2)
    s, c = math.sin(delta_theta), math.cos(delta_theta)
    rhs1 = (n1 * (g**2 + (u * n1 + dw) ** 2)
            - 2.0 * g * j * root * s
            - 2.0 * j * root * (u * n1 + dw) * c + j**2 * n2)
    rhs2 = (n2 * (g**2 + (u * n2 + dw) ** 2)
            + 2.0 * g * j * root * s
            - 2.0 * j * root * (u * n2 + dw) * c + j**2 * n1)
    return f2 - rhs1, f2 - rhs2


def symmetric_branch(params: SystemParams) -> list[tuple[float, Stability]]:
    """Occupations of the exchange-symmetric branch, with stability.

    On the symmetric branch (n1 = n2 = n, dtheta = 0) the state equations
    collapse to one real cubic,

        |F|^2 = n (gamma^2 + (U n + dw - J)^2),

    solved here by its companion matrix (with a Newton polish).  At U = 0
    the cubic degenerates to a linear equation.  Stability is classified
    with the full 4x4 matrix, so symmetric roots that are unstable toward
    antisymmetric fluctuations are labelled accordingly.  Returns up to
    three (n, stability) pairs sorted by n.
    """
    g, u, j, dw = params.gamma, params.u, params.j, params.delta_omega
    f2 = abs(params.f) ** 2
    b = dw - j
    if u == 0.0:
        ns = [f2 / (g**2 + b**2)]
    else:
        coeffs = [u**2, 2.0 * u * b, g**2 + b**2, -f2]
        raw = np.roots(coeffs)
        scale = max(abs(r) for r in raw) + 1.0
        ns = []
        for r in raw:
            if abs(r.imag) > 1e-9 * scale:
                continue
            n = float(r.real)
            # One Newton polish on the cubic.
            p = ((u**2 * n + 2.0 * u * b) * n + (g**2 + b**2)) * n - f2
            dp = (3.0 * u**2 * n + 4.0 * u * b) * n + (g**2 + b**2)
            if dp != 0.0:
                n -= p / dp
            if n > -1e-12:
                ns.append(max(n, 0.0))

    out = []
    for n in sorted(ns):
        if f2 == 0.0:
            alpha = 0.0 + 0.0j
        else:
            alpha = params.f / (params.kappa + 1j * u * n - 1j * j)
        sol = classify(params, MeanFieldState(alpha, alpha))
        out.append((n, sol.stability))
    return out


_AXIS_FIELDS = {"j": "j", "f": "f", "u": "u", "delta_omega": "delta_omega",
                "dw": "delta_omega"}


def _with_axis(params: SystemParams, axis: str, value: float) -> SystemParams:
    fields = {"j": params.j, "u": params.u, "f": params.f,
              "delta_omega": params.delta_omega, "gamma": params.gamma}
    fields[_AXIS_FIELDS[axis]] = value
    return SystemParams(**fields)


def phase_diagram(params_base: SystemParams, axis1: str, axis2: str,
                  grid: tuple[np.ndarray, np.ndarray],
                  search_grid: SearchGrid | None = None) -> PhaseDiagram:
    """Stable-state counts over a 2-D parameter grid.

    Parameters
    ----------
    axis1, axis2 : str
        Swept fields, each one of {"j", "f", "u", "delta_omega"}.
    grid : (values1, values2)
        Axis values; the result matrices have shape (len(values1),
        len(values2)), row-major in axis1.

    Notes
    -----
    At exactly J = 0 the cavities decouple and the product-state count is
    a convention; the J = 0 column reports the single-cavity stable count
    (1 or 2) from the symmetric branch instead.  Failed points carry the
    sentinel -1 and never abort the sweep.
    """
    for ax in (axis1, axis2):
        if ax not in _AXIS_FIELDS:
            raise ValueError(f"unknown sweep axis {ax!r}")
    values1 = np.asarray(grid[0], dtype=float)
    values2 = np.asarray(grid[1], dtype=float)
    if values1.size < 2 or values2.size < 2:
        raise ValueError("grid needs at least 2 points per axis")

    shape = (values1.size, values2.size)
    n_stable = np.full(shape, -1, dtype=int)
    n_breaking = np.full(shape, -1, dtype=int)
    n_total = np.full(shape, -1, dtype=int)

    for i, v1 in enumerate(values1):
        for k, v2 in enumerate(values2):
            p = _with_axis(_with_axis(params_base, axis1, v1), axis2, v2)
            try:
                if p.j == 0.0:
                    branch = symmetric_branch(p)
                    n_total[i, k] = len(branch)
                    n_stable[i, k] = sum(s is Stability.STABLE for _, s in branch)
                    n_breaking[i, k] = 0
                    continue
                sols = find_all_steady_states(p, search_grid)
            except (RuntimeError, np.linalg.LinAlgError):
                continue
            stable = [s for s in sols if s.stability is Stability.STABLE]
            n_total[i, k] = len(sols)
            n_stable[i, k] = len(stable)
            n_breaking[i, k] = sum(s.symmetry is Symmetry.BREAKING for s in stable)

    return PhaseDiagram(axis1=axis1, axis2=axis2, values1=values1,
                        values2=values2, n_stable=n_stable,
                        n_breaking=n_breaking, n_total=n_total)
