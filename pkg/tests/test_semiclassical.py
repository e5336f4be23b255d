"""Mean-field flow, root enumeration, stability, and phase-diagram tests.

Oracles used here, independent of the implementation under test:
- the exact linear-cavity fixed point alpha = F/kappa;
- companion-matrix roots of the symmetric-branch cubic, frozen as literals;
- finite-difference differentiation of the flow for the stability matrix;
- product structure of the J = 0 root set;
- analytic vacuum spectrum gamma + i(delta_omega +- j) and conjugates.
"""

import itertools
import math

import numpy as np
import pytest
from conftest import assert_spectra_match

from kerrdimer import make_params
from kerrdimer.semiclassical import (
    MeanFieldState, SearchGrid, Stability, Symmetry, classify,
    find_all_steady_states, integrate, phase_diagram, rhs,
    stability_matrix, state_equation_residual, symmetric_branch, wrap_angle,
)

FIG2 = make_params(j=0.1, u=0.6, f=2.6, delta_omega=-3.0)

# Companion-matrix roots of n*(g^2 + (u*n + dw - j)^2) = F^2, frozen.
CUBIC_J01 = (0.892050997682, 3.609634354137, 5.831647981514)
CUBIC_J0 = (1.000000000000, 3.286648351787, 5.713351648213)


def test_rhs_at_vacuum_is_drive():
    d1, d2 = rhs(FIG2, MeanFieldState(0, 0))
    assert d1 == FIG2.f and d2 == FIG2.f


def test_rhs_pure_decay():
    p = make_params(j=0.0, u=0.0, f=0.0, delta_omega=-3.0)
    d1, _ = rhs(p, MeanFieldState(1.0, 0.0))
    assert abs(d1 - (-(1.0 - 3.0j))) < 1e-15


def test_rhs_vanishes_at_found_roots():
    for sol in find_all_steady_states(FIG2):
        d1, d2 = rhs(FIG2, sol.state)
        assert math.hypot(abs(d1), abs(d2)) < 1e-9


def test_wrap_angle():
    assert wrap_angle(math.pi) == math.pi
    assert wrap_angle(-math.pi) == math.pi
    assert abs(wrap_angle(3 * math.pi) - math.pi) < 1e-15
    assert abs(wrap_angle(0.3) - 0.3) < 1e-15
    assert abs(wrap_angle(2 * math.pi + 0.3) - 0.3) < 1e-14


def test_integrate_linear_cavity_exact():
    # Residual decays like exp(-gamma t) from ~0.3, crossing 1e-9 near
    # t = 20; the sustained-window check then needs 10/gamma more.
    p = make_params(j=0.0, u=0.0, f=1.0, delta_omega=-3.0)
    traj = integrate(p, MeanFieldState(0, 0), t_final=45.0)
    assert traj.converged
    final = traj.final_state()
    assert abs(final.alpha1 - p.f / p.kappa) < 1e-9
    assert abs(final.n1 - 0.1) < 1e-9


def test_integrate_preserves_exchange_symmetry():
    # A symmetric start must keep dn identically zero along the flow.
    traj = integrate(FIG2, MeanFieldState(0.3, 0.3), t_final=60.0)
    dn = np.abs(traj.alpha1) ** 2 - np.abs(traj.alpha2) ** 2
    assert np.max(np.abs(dn)) < 1e-12
    final = traj.final_state()
    sym_roots = [s for s in find_all_steady_states(FIG2)
                 if s.symmetry is Symmetry.PRESERVING]
    assert min(abs(final.n1 - s.n1) for s in sym_roots) < 1e-6


def test_integrate_reaches_distinct_states_from_distinct_starts():
    sols = [s for s in find_all_steady_states(FIG2)
            if s.stability is Stability.STABLE]
    finals = []
    for s in sols:
        start = MeanFieldState(s.state.alpha1 * 1.02, s.state.alpha2 * 0.98)
        traj = integrate(FIG2, start, t_final=150.0)
        assert traj.converged
        finals.append(traj.final_state())
    for f, s in zip(finals, sols):
        assert abs(f.alpha1 - s.state.alpha1) < 1e-6
        assert abs(f.alpha2 - s.state.alpha2) < 1e-6
    occs = sorted(round(f.n1 + f.n2, 6) for f in finals)
    assert len(set(occs)) >= 3  # two symmetric levels + mirror pair


def test_integrate_divergence_guard():
    p = make_params(j=0.0, u=10.0, f=10.0, delta_omega=0.0)
    with pytest.raises(RuntimeError):
        integrate(p, MeanFieldState(5.0, 5.0), t_final=5.0, dt=1.0)


def test_integrate_rejects_bad_steps():
    with pytest.raises(ValueError):
        integrate(FIG2, MeanFieldState(0, 0), t_final=-1.0)
    with pytest.raises(ValueError):
        integrate(FIG2, MeanFieldState(0, 0), dt=0.0)


def test_stability_matrix_vacuum_spectrum():
    p = make_params(j=0.7, u=0.6, f=0.0, delta_omega=-3.0)
    sm = stability_matrix(p, MeanFieldState(0, 0))
    expected = [1.0 + 1j * (-3.0 + 0.7), 1.0 + 1j * (-3.0 - 0.7),
                1.0 - 1j * (-3.0 + 0.7), 1.0 - 1j * (-3.0 - 0.7)]
    assert_spectra_match(sm.eigenvalues, expected, tol=1e-12)
    assert classify(p, MeanFieldState(0, 0)).stability is Stability.STABLE


def test_stability_matrix_is_minus_flow_jacobian():
    # Finite-difference oracle in real coordinates, mapped to the
    # (d_alpha, d_alpha*) basis by T = [[1, i], [1, -i]] per site.
    p = make_params(j=0.23, u=0.9, f=1.7, delta_omega=-2.1)
    st = MeanFieldState(0.4 - 0.8j, -0.3 + 0.5j)
    h = 1e-6

    def flow(x):
        s = MeanFieldState(x[0] + 1j * x[1], x[2] + 1j * x[3])
        d1, d2 = rhs(p, s)
        return np.array([d1.real, d1.imag, d2.real, d2.imag])

    x0 = np.array([st.alpha1.real, st.alpha1.imag,
                   st.alpha2.real, st.alpha2.imag])
    jac = np.empty((4, 4))
    for k in range(4):
        e = np.zeros(4)
        e[k] = h
        jac[:, k] = (flow(x0 + e) - flow(x0 - e)) / (2 * h)

    t1 = np.array([[1.0, 1.0j], [1.0, -1.0j]])
    t = np.block([[t1, np.zeros((2, 2))], [np.zeros((2, 2)), t1]])
    a_fd = -t @ jac @ np.linalg.inv(t)
    sm = stability_matrix(p, st)
    assert np.max(np.abs(sm.a - a_fd)) < 1e-8


def test_stability_trace_and_determinant():
    sm = stability_matrix(FIG2, MeanFieldState(0.5 + 0.1j, -0.2 + 0.9j))
    assert abs(sm.trace - 4.0 * FIG2.gamma) < 1e-12
    assert abs(sm.determinant - np.prod(np.linalg.eigvals(sm.a))) < 1e-9
    # At a stable root both Hurwitz quantities are positive.
    for sol in find_all_steady_states(FIG2):
        if sol.stability is Stability.STABLE:
            smr = stability_matrix(FIG2, sol.state)
            assert smr.trace.real > 0
            assert smr.determinant.real > 0
            assert abs(smr.determinant.imag) < 1e-8 * abs(smr.determinant)


def test_single_cavity_middle_branch_unstable():
    p = make_params(j=0.0, u=0.6, f=2.6, delta_omega=-3.0)
    branch = symmetric_branch(p)
    assert len(branch) == 3
    for (n, stab), n_ref in zip(branch, CUBIC_J0):
        assert abs(n - n_ref) < 1e-9
    assert branch[0][1] is Stability.STABLE
    assert branch[1][1] is Stability.UNSTABLE
    assert branch[2][1] is Stability.STABLE


def test_symmetric_branch_u_zero():
    p = make_params(j=0.4, u=0.0, f=1.3, delta_omega=-3.0)
    branch = symmetric_branch(p)
    assert len(branch) == 1
    n, stab = branch[0]
    assert abs(n - 1.69 / (1.0 + 3.4**2)) < 1e-12
    assert stab is Stability.STABLE


def test_symmetric_branch_matches_root_finder():
    branch = symmetric_branch(FIG2)
    assert [round(n, 9) for n, _ in branch] == [round(x, 9) for x in CUBIC_J01]
    sym = [s for s in find_all_steady_states(FIG2)
           if s.symmetry is Symmetry.PRESERVING]
    assert len(sym) == len(branch)
    for (n, stab), sol in zip(branch, sorted(sym, key=lambda s: s.n1)):
        assert abs(n - sol.n1) < 1e-8
        assert stab is sol.stability


def test_find_all_fig2_structure():
    sols = find_all_steady_states(FIG2)
    assert len(sols) == 9
    stable = [s for s in sols if s.stability is Stability.STABLE]
    assert len(stable) == 4
    sym = [s for s in stable if s.symmetry is Symmetry.PRESERVING]
    brk = [s for s in stable if s.symmetry is Symmetry.BREAKING]
    assert len(sym) == 2 and len(brk) == 2
    for s in sym:
        assert abs(s.state.dn) < 1e-6
        assert abs(s.state.dtheta) < 1e-6
    a, b = brk
    assert abs(a.n1 - b.n2) < 1e-8 and abs(a.n2 - b.n1) < 1e-8
    assert abs(a.state.dtheta + b.state.dtheta) < 1e-8


def test_find_all_is_deterministic():
    s1 = find_all_steady_states(FIG2)
    s2 = find_all_steady_states(FIG2)
    assert len(s1) == len(s2)
    for a, b in zip(s1, s2):
        assert a.state.alpha1 == b.state.alpha1
        assert a.state.alpha2 == b.state.alpha2


def test_find_all_f_zero_vacuum_only():
    p = make_params(j=0.4, u=0.6, f=0.0, delta_omega=-3.0)
    sols = find_all_steady_states(p)
    assert len(sols) == 1
    assert abs(sols[0].state.alpha1) < 1e-9
    assert abs(sols[0].state.alpha2) < 1e-9
    assert sols[0].stability is Stability.STABLE


def test_find_all_j0_is_product_of_cubic_roots():
    p = make_params(j=0.0, u=0.6, f=2.6, delta_omega=-3.0)
    sols = find_all_steady_states(p)
    assert len(sols) == 9
    pairs = sorted((round(s.n1, 6), round(s.n2, 6)) for s in sols)
    want = sorted((round(a, 6), round(b, 6))
                  for a, b in itertools.product(CUBIC_J0, CUBIC_J0))
    assert pairs == want
    # Product stability: stable iff both single-cavity factors are stable.
    stab1 = {round(CUBIC_J0[0], 6): True, round(CUBIC_J0[1], 6): False,
             round(CUBIC_J0[2], 6): True}
    for s in sols:
        expect = stab1[round(s.n1, 6)] and stab1[round(s.n2, 6)]
        assert (s.stability is Stability.STABLE) == expect


def test_exchange_symmetry_of_root_set():
    sols = find_all_steady_states(FIG2)
    keys = {(round(s.n1, 7), round(s.n2, 7)) for s in sols}
    for s in sols:
        assert (round(s.n2, 7), round(s.n1, 7)) in keys
        sw = classify(FIG2, s.state.swapped())
        assert_spectra_match(sw.eigenvalues, s.eigenvalues, tol=1e-8)


def test_residuals_small_at_all_roots():
    for f in (1.0, 2.3, 2.6, 3.0, 4.5):
        p = make_params(j=0.1, u=0.6, f=f, delta_omega=-3.0)
        sols = find_all_steady_states(p)
        assert 1 <= len(sols) <= 9
        assert sum(s.stability is Stability.STABLE for s in sols) <= 4
        for s in sols:
            d1, d2 = rhs(p, s.state)
            assert max(abs(d1), abs(d2)) < 1e-7
            r1, r2 = state_equation_residual(p, s.n1, s.n2, s.state.dtheta)
            tol = 1e-7 * (1.0 + abs(p.f) ** 2)
            assert abs(r1) < tol and abs(r2) < tol


def test_state_equation_trivial_cases():
    p = FIG2
    r1, r2 = state_equation_residual(p, 0.0, 0.0, 0.0)
    assert r1 == abs(p.f) ** 2 and r2 == abs(p.f) ** 2
    # Symmetric reduction: both residuals collapse to the same expression.
    n = 1.7
    r1, r2 = state_equation_residual(p, n, n, 0.0)
    g, u, j, dw = p.gamma, p.u, p.j, p.delta_omega
    expect = abs(p.f) ** 2 - (n * (g**2 + (u * n + dw) ** 2)
                              - 2 * j * n * (u * n + dw) + j**2 * n)
    assert abs(r1 - expect) < 1e-12 and abs(r2 - expect) < 1e-12
    with pytest.raises(ValueError):
        state_equation_residual(p, -0.1, 0.0, 0.0)


def test_breaking_pairs_never_isolated():
    for f in (0.5, 1.5, 2.2, 2.4, 2.6, 2.8, 3.0, 3.5):
        p = make_params(j=0.1, u=0.6, f=f, delta_omega=-3.0)
        sols = find_all_steady_states(p)
        stable = [s for s in sols if s.stability is Stability.STABLE]
        n_brk = sum(s.symmetry is Symmetry.BREAKING for s in stable)
        n_sym = sum(s.symmetry is Symmetry.PRESERVING for s in stable)
        assert n_brk in (0, 2)
        if n_brk:
            assert n_sym >= 2


def test_phase_diagram_counts():
    pd = phase_diagram(FIG2, "j", "f",
                       (np.array([0.0, 0.05, 0.1]), np.array([1.0, 2.6, 4.0])))
    assert pd.n_stable.shape == (3, 3)
    # J = 0 column uses the single-cavity convention: 1 or 2, never 4.
    assert pd.n_stable[0, 0] == 1
    assert pd.n_stable[0, 1] == 2
    assert pd.n_stable[0, 2] == 1
    assert pd.n_breaking[0, 1] == 0
    # Multistable interior point carries 4 stable states, 2 breaking.
    assert pd.n_stable[2, 1] == 4
    assert pd.n_breaking[2, 1] == 2
    # Monostable drives.
    assert pd.n_stable[2, 0] == 1 and pd.n_stable[2, 2] == 1
    assert np.all(pd.n_total <= 9)


def test_phase_diagram_rejects_bad_axes():
    with pytest.raises(ValueError):
        phase_diagram(FIG2, "q", "f", (np.array([0, 1]), np.array([0, 1])))
    with pytest.raises(ValueError):
        phase_diagram(FIG2, "j", "f", (np.array([0.1]), np.array([0, 1])))


def test_search_grid_structure():
    g = SearchGrid(n_amp=3, n_phase=4, n_max=9.0)
    starts = g.starts(FIG2)
    branch = symmetric_branch(FIG2)
    # Levels: linspace fill plus {0, branch occupations <= n_max}, each
    # crossed with 4 phases on both sites; then the cross products of
    # the exact symmetric-branch amplitudes.
    n_levels = len({0.0, 9.0} | {n for n, _ in branch if n <= 9.0})
    n_grid = (n_levels * 4) ** 2
    assert starts.shape == (n_grid + len(branch) ** 2, 2)
    assert np.max(np.abs(starts[:n_grid])) <= 3.0 + 1e-12
    # Each seed component is an exact symmetric fixed-point amplitude.
    for a1, a2 in starts[n_grid:]:
        for a in (a1, a2):
            resid = FIG2.f - a * (FIG2.kappa
                                  + 1j * (FIG2.u * abs(a) ** 2 - FIG2.j))
            assert abs(resid) < 1e-9
