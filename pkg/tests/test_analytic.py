"""Steady-state series: reciprocal gamma, summands, and correlator ratios."""

import math

import numpy as np
import pytest
import scipy.special as sps

from kerrdimer import make_params
from kerrdimer.analytic import (
    VALIDITY_THRESHOLD, CorrelatorResult, PSeriesParams, correlators,
    pseries_params, recip_gamma, series_term, validity_metric,
)
from kerrdimer.fockspace import FockBasis
from kerrdimer.master import steady_state_direct

# Fig. 2 drive region parameters reused across the suite.
FIG6 = make_params(j=0.1, u=4.0, f=2.0, delta_omega=-3.0)


def test_recip_gamma_against_scipy():
    rng = np.random.default_rng(3)
    z = rng.uniform(-8, 8, size=200) + 1j * rng.uniform(-8, 8, size=200)
    ours = recip_gamma(z)
    ref = sps.rgamma(z)
    assert np.max(np.abs(ours - ref) / (1.0 + np.abs(ref))) < 1e-12


def test_recip_gamma_spot_values():
    # mpmath at dps=40
    assert abs(recip_gamma(0.5 + 0.5j)
               - (0.653464572282199 + 0.6096559429124806j)) < 1e-13
    assert abs(recip_gamma(-2.5 + 1.0j)
               - (-4.5358163844858445 + 9.3863460387135111j)) < 1e-12
    assert abs(recip_gamma(-1.5 - 0.5j)
               - (0.9363882290535801 + 0.34863660082595869j)) < 1e-13


def test_recip_gamma_exact_pole_zeros():
    assert recip_gamma(0.0) == 0.0
    assert recip_gamma(-3.0) == 0.0
    assert recip_gamma(-17.0) == 0.0
    arr = recip_gamma(np.array([-2.0, -1.0, 0.5, 1.0]))
    assert arr[0] == 0.0 and arr[1] == 0.0
    assert abs(arr[3] - 1.0) < 1e-14


def test_recip_gamma_recurrence():
    # 1/Gamma(z+1) = (1/Gamma(z)) / z
    rng = np.random.default_rng(11)
    z = rng.uniform(-6, 6, size=64) + 1j * rng.uniform(-6, 6, size=64)
    lhs = recip_gamma(z + 1.0)
    rhs = recip_gamma(z) / z
    assert np.max(np.abs(lhs - rhs) / (1.0 + np.abs(rhs))) < 1e-12


def test_pseries_params_reduction():
    sp = pseries_params(FIG6)
    assert sp.x == pytest.approx(1.0)
    assert sp.y == pytest.approx(0.05)
    assert sp.c == pytest.approx(-1.5 - 0.5j)
    assert sp.d == pytest.approx(-1.5 + 0.5j)
    assert sp.index_cap == 30
    sp_pos = pseries_params(make_params(j=0.1, u=4.0, f=2.0, delta_omega=3.0))
    assert sp_pos.index_cap == 12


def test_pseries_params_rejects_bad_drive_and_u():
    with pytest.raises(ValueError):
        pseries_params(make_params(j=0.1, u=4.0, f=1 + 1j, delta_omega=-3.0))
    with pytest.raises(ValueError):
        pseries_params(make_params(j=0.1, u=4.0, f=-1.0, delta_omega=-3.0))
    with pytest.raises(ValueError):
        pseries_params(make_params(j=0.1, u=0.0, f=1.0, delta_omega=-3.0))
    with pytest.raises(ValueError):
        PSeriesParams(c=1j, d=-1j, x=1.0, y=-0.1)
    with pytest.raises(ValueError):
        PSeriesParams(c=1j, d=-1j, x=1.0, y=0.1, index_cap=0)


def test_series_term_oracle_values():
    sp = pseries_params(FIG6)
    # mpmath at dps=40 for x=1, y=0.05, c=-1.5-0.5j
    t0 = series_term((0, 0, 0, 0, 0, 0), sp, 0)
    assert abs(t0 - 0.99674344550379111) < 1e-13
    t1 = series_term((1, 1, 0, 0, 0, 0), sp, 0)
    assert abs(t1 - 0.039869737820151644) < 1e-14
    t2 = series_term((2, 0, 1, 1, 1, 0), sp, 1)
    assert abs(t2 - (-0.0038274948307345579 + 0.0051033264409794105j)) < 1e-15
    t3 = series_term((0, 0, 0, 0, 0, 0), sp, 2)
    assert abs(t3 - 0.79739475640303289) < 1e-13


def test_series_term_vanishes_without_hop():
    p = make_params(j=0.0, u=4.0, f=2.0, delta_omega=-3.0)
    sp = pseries_params(p)
    assert series_term((0, 1, 0, 0, 0, 0), sp, 0) == 0.0
    assert series_term((0, 0, 0, 0, 0, 0), sp, 0) != 0.0


def test_series_term_rejects_bad_indices_and_order():
    sp = pseries_params(FIG6)
    with pytest.raises(ValueError):
        series_term((0, 0, 0, 0, 0, -1), sp, 0)
    with pytest.raises(ValueError):
        series_term((0.5, 0, 0, 0, 0, 0), sp, 0)
    with pytest.raises(ValueError):
        series_term((0, 0, 0, 0, 0, 0), sp, 3)


def test_factorized_matches_direct_summation():
    for p in (FIG6, make_params(j=0.3, u=2.0, f=1.5, delta_omega=-1.0),
              make_params(j=0.0, u=4.0, f=2.0, delta_omega=-3.0)):
        fac = correlators(p, index_cap=7, method="factorized")
        lit = correlators(p, index_cap=7, method="direct")
        for name in ("i0", "g1", "g2"):
            a, b = getattr(fac, name), getattr(lit, name)
            assert abs(a - b) <= 1e-12 * abs(b)


def test_direct_method_cap_limit():
    with pytest.raises(ValueError):
        correlators(FIG6, index_cap=9, method="direct")
    with pytest.raises(ValueError):
        correlators(FIG6, method="no-such-method")


def test_uncoupled_limit_matches_hypergeometric_ratios():
    # 0F2 ratio values from mpmath at dps=40
    cases = (
        (make_params(j=0.0, u=4.0, f=2.0, delta_omega=-3.0),
         1.0224058260592021, 0.86551833532997651),
        (make_params(j=0.0, u=2.0, f=1.5, delta_omega=-1.0),
         1.0575023045306171, 0.76780715405552972),
        (make_params(j=0.0, u=0.6, f=1.0, delta_omega=-3.0),
         0.10449856334358154, 1.2253013484333574),
    )
    for p, n_ref, g2_ref in cases:
        r = correlators(p)
        assert r.converged
        assert abs(r.n - n_ref) < 1e-10 * n_ref
        assert abs(r.g2_norm - g2_ref) < 1e-10 * g2_ref


def test_uncoupled_limit_matches_master_equation():
    p = make_params(j=0.0, u=4.0, f=2.0, delta_omega=-3.0)
    r = correlators(p)
    ms = steady_state_direct(p, FockBasis(n_max=12))
    assert abs(r.n - ms.n1) < 1e-4 * ms.n1
    assert abs(r.g2_norm - ms.g2_1) < 1e-4 * ms.g2_1


def test_correlators_accepts_system_or_series_params():
    via_system = correlators(FIG6)
    via_series = correlators(pseries_params(FIG6))
    assert via_system.n == via_series.n
    assert via_system.g2_norm == via_series.g2_norm


def test_correlator_sums_are_essentially_real():
    # d = conj(c) pairs every summand with its conjugate.
    r = correlators(FIG6)
    for name in ("i0", "g1", "g2"):
        v = getattr(r, name)
        assert abs(v.imag) < 1e-8 * abs(v.real)
    assert r.n > 0
    assert r.g2_norm > 0


def test_convergence_reporting():
    r = correlators(FIG6, index_cap=20)
    assert isinstance(r, CorrelatorResult)
    assert r.converged
    assert r.last_increment < 1e-8
    tiny = correlators(FIG6, index_cap=1)
    assert not tiny.converged
    assert tiny.last_increment == float("inf")


def test_observables_stable_under_cap_increase():
    lo = correlators(FIG6, index_cap=15)
    hi = correlators(FIG6, index_cap=30)
    assert abs(lo.n - hi.n) < 1e-10 * hi.n
    assert abs(lo.g2_norm - hi.g2_norm) < 1e-10 * hi.g2_norm


def test_validity_metric():
    assert validity_metric(make_params(j=0.0, u=4.0, f=1.0,
                                       delta_omega=-3.0)) == 0.0
    assert validity_metric(FIG6) == pytest.approx(0.025)
    assert validity_metric(FIG6) < VALIDITY_THRESHOLD
    strong = make_params(j=1.0, u=0.6, f=1.0, delta_omega=-3.0)
    assert validity_metric(strong) == pytest.approx(1.0 / 0.6)
    assert validity_metric(strong) > VALIDITY_THRESHOLD
    with pytest.raises(ValueError):
        validity_metric(make_params(j=0.1, u=0.0, f=1.0, delta_omega=-3.0))


def test_coupling_correction_direction_at_strong_drive():
    # At F=3 the hop correction raises n; the master equation agrees on
    # the direction and approximate size of the shift.
    p0 = make_params(j=0.0, u=4.0, f=3.0, delta_omega=-3.0)
    p1 = make_params(j=0.1, u=4.0, f=3.0, delta_omega=-3.0)
    shift_series = correlators(p1).n - correlators(p0).n
    basis = FockBasis(n_max=10)
    shift_master = (steady_state_direct(p1, basis).n1
                    - steady_state_direct(p0, basis).n1)
    assert shift_series > 0
    assert shift_master > 0
    assert abs(shift_series - shift_master) < 0.5 * shift_master
