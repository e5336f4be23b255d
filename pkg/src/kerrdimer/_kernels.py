"""Compiled propagation kernels.

Complex vectors are stored as separate real/imaginary float64 planes of
shape (dim, B), column-batched so the innermost loops run contiguously
over the batch; sparse operators are CSR with split value planes.  All
kernels are deterministic for fixed inputs: per-trajectory randomness
comes from SplitMix64 streams seeded per column, and nothing here depends
on thread timing (callers parallelize over fixed column chunks).

Layout conventions shared with the wrappers:
- histogram bin m covers [w*(m-1/2), w*(m+1/2)), i.e. bins are centered
  on integer multiples of the width w; bin index = round(x/w) - m_lo;
- trajectory status codes: 0 ok, 1 norm underflow, 2 divergence,
  3 event capacity exhausted; bit 4 flags a norm-monotonicity violation.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# SplitMix64 constants.
_GOLD = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S12 = np.uint64(12)
_U01 = 2.0 ** -52

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_DIVERGED = 2
STATUS_CAPACITY = 3
NORM_VIOLATION_BIT = 4


@njit(inline="always")
def _next_u01(state):
    """Advance a SplitMix64 state; return (state, uniform in (0, 1))."""
    s = state + _GOLD
    z = s
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    z = z ^ (z >> _S31)
    return s, (np.float64(z >> _S12) + 0.5) * _U01


@njit(inline="always")
def _csr_mv(ap, aj, avr, avi, xr, xi, yr, yi):
    """y = A x on split planes, batched over columns."""
    n, nb = xr.shape
    for i in range(n):
        for b in range(nb):
            yr[i, b] = 0.0
            yi[i, b] = 0.0
        for p in range(ap[i], ap[i + 1]):
            j = aj[p]
            cr = avr[p]
            ci = avi[p]
            for b in range(nb):
                yr[i, b] += cr * xr[j, b] - ci * xi[j, b]
                yi[i, b] += cr * xi[j, b] + ci * xr[j, b]


@njit(inline="always")
def _rk4_step(ap, aj, avr, avi, vr, vi, kr, ki, tr, ti, acr, aci, h):
    """One classical RK4 step of v' = A v, in place on (vr, vi)."""
    n, nb = vr.shape
    h2 = 0.5 * h
    h6 = h / 6.0
    _csr_mv(ap, aj, avr, avi, vr, vi, kr, ki)           # k1
    for i in range(n):
        for b in range(nb):
            acr[i, b] = kr[i, b]
            aci[i, b] = ki[i, b]
            tr[i, b] = vr[i, b] + h2 * kr[i, b]
            ti[i, b] = vi[i, b] + h2 * ki[i, b]
    _csr_mv(ap, aj, avr, avi, tr, ti, kr, ki)           # k2
    for i in range(n):
        for b in range(nb):
            acr[i, b] += 2.0 * kr[i, b]
            aci[i, b] += 2.0 * ki[i, b]
            tr[i, b] = vr[i, b] + h2 * kr[i, b]
            ti[i, b] = vi[i, b] + h2 * ki[i, b]
    _csr_mv(ap, aj, avr, avi, tr, ti, kr, ki)           # k3
    for i in range(n):
        for b in range(nb):
            acr[i, b] += 2.0 * kr[i, b]
            aci[i, b] += 2.0 * ki[i, b]
            tr[i, b] = vr[i, b] + h * kr[i, b]
            ti[i, b] = vi[i, b] + h * ki[i, b]
    _csr_mv(ap, aj, avr, avi, tr, ti, kr, ki)           # k4
    for i in range(n):
        for b in range(nb):
            vr[i, b] += h6 * (acr[i, b] + kr[i, b])
            vi[i, b] += h6 * (aci[i, b] + ki[i, b])


@njit(cache=True, nogil=True, fastmath=True)
def lindblad_rk4_batch(lp, lj, lvr, lvi, vr, vi, tperm, diag_idx,
                       h, n_steps, check_every, tol,
                       status, conv_step, residual):
    """Propagate vectorized density matrices under dv/dt = L v.

    Re-Hermitizes and trace-renormalizes every step; checks the residual
    ||L v||_F every check_every steps and marks columns converged when it
    drops below tol.  Stops early once every column is converged or dead.
    status: 0 running, 1 converged, 2 diverged/invalid.
    """
    dim2, nb = vr.shape
    kr = np.empty((dim2, nb))
    ki = np.empty((dim2, nb))
    tr = np.empty((dim2, nb))
    ti = np.empty((dim2, nb))
    acr = np.empty((dim2, nb))
    aci = np.empty((dim2, nb))
    nd = diag_idx.shape[0]

    for step in range(n_steps):
        _rk4_step(lp, lj, lvr, lvi, vr, vi, kr, ki, tr, ti, acr, aci, h)

        # Hermitize: rho <- (rho + rho^dagger)/2, pairwise via the
        # transpose permutation of vec indices.
        for i in range(dim2):
            t = tperm[i]
            if t > i:
                for b in range(nb):
                    ar = 0.5 * (vr[i, b] + vr[t, b])
                    ai = 0.5 * (vi[i, b] - vi[t, b])
                    vr[i, b] = ar
                    vi[i, b] = ai
                    vr[t, b] = ar
                    vi[t, b] = -ai
            elif t == i:
                for b in range(nb):
                    vi[i, b] = 0.0

        # Renormalize the (now real) trace.
        for b in range(nb):
            trace = 0.0
            for k in range(nd):
                trace += vr[diag_idx[k], b]
            if not (trace > 1e-12) or not np.isfinite(trace):
                if status[b] == 0:
                    status[b] = 2
                    conv_step[b] = step
                continue
            inv = 1.0 / trace
            for i in range(dim2):
                vr[i, b] *= inv
                vi[i, b] *= inv

        if (step + 1) % check_every == 0 or step == n_steps - 1:
            _csr_mv(lp, lj, lvr, lvi, vr, vi, kr, ki)
            alive = False
            for b in range(nb):
                s = 0.0
                for i in range(dim2):
                    s += kr[i, b] * kr[i, b] + ki[i, b] * ki[i, b]
                r = np.sqrt(s)
                if status[b] == 2:
                    continue
                residual[b] = r
                if not np.isfinite(r):
                    status[b] = 2
                    conv_step[b] = step
                elif r < tol:
                    if status[b] == 0:
                        status[b] = 1
                        conv_step[b] = step + 1
                else:
                    status[b] = 0
                    alive = True
            if not alive:
                return step + 1
    return n_steps


@njit(inline="always")
def _reduce_column_sums(vr, vi, w1, w2, wq1, wq2, wedge,
                        s1, s2, q1, q2, se, nrm):
    """Weighted occupation sums and squared norm, per column, one pass."""
    n, nb = vr.shape
    for b in range(nb):
        s1[b] = 0.0
        s2[b] = 0.0
        q1[b] = 0.0
        q2[b] = 0.0
        se[b] = 0.0
        nrm[b] = 0.0
    for i in range(n):
        a1 = w1[i]
        a2 = w2[i]
        b1 = wq1[i]
        b2 = wq2[i]
        ed = wedge[i]
        for b in range(nb):
            p = vr[i, b] * vr[i, b] + vi[i, b] * vi[i, b]
            nrm[b] += p
            s1[b] += a1 * p
            s2[b] += a2 * p
            q1[b] += b1 * p
            q2[b] += b2 * p
            se[b] += ed * p


@njit(inline="always")
def _apply_jump(vr, vi, b, jsrc, jamp):
    """psi <- a_site psi on column b (unnormalized), in place.

    Safe ascending in-place because every source index lies above its
    target; rows with no source carry jamp = 0.
    """
    n = vr.shape[0]
    for t in range(n):
        s = jsrc[t]
        a = jamp[t]
        vr[t, b] = a * vr[s, b]
        vi[t, b] = a * vi[s, b]


@njit(inline="always")
def _bin_index(x, w, m_lo, nbins):
    m = int(np.floor(x / w + 0.5)) - m_lo
    if m < 0:
        m = 0
    elif m >= nbins:
        m = nbins - 1
    return m


@njit(cache=True, nogil=True, fastmath=True)
def mcwf_batch(hp, hj, hvr, hvi,
               w1, w2, wq1, wq2, wedge,
               jsrc1, jamp1, jsrc2, jamp2,
               psi0r, psi0i, seeds,
               h0, n_steps, pmax, two_gamma,
               transient_step, sample_every,
               wfine, m_lo_n1, m_lo_dn, half_b,
               samples, acc, jump_count,
               hist_n1_j, hist_n1_d,
               hist_dn_j1, hist_dn_j2, hist_dn_d,
               status):
    """Monte-Carlo wavefunction ensemble, column-batched and lockstep.

    Between jumps each column evolves under v' = A v with A = -i H_eff;
    the per-(sub)step jump probability is kept below pmax by sub-stepping
    every macro step of h0 at the largest current loss rate in the batch.
    A column jumps when its squared norm decays to its threshold draw;
    the channel is chosen with probability proportional to the site
    occupations, the annihilation map applied, the state renormalized,
    and a fresh threshold drawn.

    Accumulates, per column: post-transient time integrals of n1, n2,
    n1(n1-1), n2(n2-1), elapsed time, and edge population (acc columns
    0..5); uniform samples of (n1, n2); and pooled jump histograms of
    n1_post (count- and dwell-weighted) and dn_post (count-weighted split
    into column halves at half_b, plus dwell-weighted pooled).
    """
    dim, nb = psi0r.shape[0], seeds.shape[0]
    vr = np.empty((dim, nb))
    vi = np.empty((dim, nb))
    kr = np.empty((dim, nb))
    ki = np.empty((dim, nb))
    tr = np.empty((dim, nb))
    ti = np.empty((dim, nb))
    acr = np.empty((dim, nb))
    aci = np.empty((dim, nb))
    s1 = np.empty(nb)
    s2 = np.empty(nb)
    q1 = np.empty(nb)
    q2 = np.empty(nb)
    se = np.empty(nb)
    nrm = np.empty(nb)
    prevn = np.empty(nb)
    rthr = np.empty(nb)
    rng = np.empty(nb, dtype=np.uint64)
    tcol = np.zeros(nb)
    last_n1_bin = np.full(nb, -1, dtype=np.int64)
    last_dn_bin = np.full(nb, -1, dtype=np.int64)
    last_jump_t = np.zeros(nb)
    alive = np.ones(nb, dtype=np.uint8)

    nbins_n1 = hist_n1_j.shape[0]
    nbins_dn = hist_dn_d.shape[0]

    for b in range(nb):
        for i in range(dim):
            vr[i, b] = psi0r[i]
            vi[i, b] = psi0i[i]
        st, u = _next_u01(seeds[b])
        rng[b] = st
        rthr[b] = u

    _reduce_column_sums(vr, vi, w1, w2, wq1, wq2, wedge, s1, s2, q1, q2, se, nrm)
    for b in range(nb):
        samples[b, 0, 0] = s1[b] / nrm[b]
        samples[b, 0, 1] = s2[b] / nrm[b]

    for step in range(n_steps):
        # Sub-step count from the largest loss rate currently in the batch.
        rate = 0.0
        for b in range(nb):
            if alive[b] == 1:
                rb = two_gamma * (s1[b] + s2[b]) / nrm[b]
                if rb > rate:
                    rate = rb
        n_sub = 1 + int(rate * h0 / pmax)
        if n_sub > 8192:
            for b in range(nb):
                if alive[b] == 1 and status[b] == STATUS_OK:
                    status[b] = STATUS_DIVERGED
            return
        h = h0 / n_sub

        for _sub in range(n_sub):
            for b in range(nb):
                prevn[b] = nrm[b]
            _rk4_step(hp, hj, hvr, hvi, vr, vi, kr, ki, tr, ti, acr, aci, h)
            _reduce_column_sums(vr, vi, w1, w2, wq1, wq2, wedge,
                                s1, s2, q1, q2, se, nrm)
            for b in range(nb):
                if alive[b] == 0:
                    continue
                tcol[b] += h
                nb_norm = nrm[b]
                if not np.isfinite(nb_norm) or nb_norm > 4.0:
                    status[b] = STATUS_DIVERGED
                    alive[b] = 0
                    continue
                if nb_norm < 1e-250:
                    status[b] = STATUS_UNDERFLOW
                    alive[b] = 0
                    continue
                if step >= transient_step:
                    inv = h / nb_norm
                    acc[b, 0] += s1[b] * inv
                    acc[b, 1] += s2[b] * inv
                    acc[b, 2] += q1[b] * inv
                    acc[b, 3] += q2[b] * inv
                    acc[b, 4] += h
                    acc[b, 5] += se[b] * inv

                if nb_norm <= rthr[b]:
                    # Jump: pick channel by site occupation.
                    tot = s1[b] + s2[b]
                    if tot <= 0.0:
                        continue
                    st, u = _next_u01(rng[b])
                    rng[b] = st
                    if u * tot < s1[b]:
                        _apply_jump(vr, vi, b, jsrc1, jamp1)
                    else:
                        _apply_jump(vr, vi, b, jsrc2, jamp2)
                    # Renormalize and refresh this column's sums.
                    pn = 0.0
                    for i in range(dim):
                        pn += vr[i, b] * vr[i, b] + vi[i, b] * vi[i, b]
                    if pn <= 0.0:
                        status[b] = STATUS_UNDERFLOW
                        alive[b] = 0
                        continue
                    inv = 1.0 / np.sqrt(pn)
                    a1 = a2 = g1 = g2 = ed = 0.0
                    for i in range(dim):
                        vr[i, b] *= inv
                        vi[i, b] *= inv
                        p = vr[i, b] * vr[i, b] + vi[i, b] * vi[i, b]
                        a1 += w1[i] * p
                        a2 += w2[i] * p
                        g1 += wq1[i] * p
                        g2 += wq2[i] * p
                        ed += wedge[i] * p
                    s1[b] = a1
                    s2[b] = a2
                    q1[b] = g1
                    q2[b] = g2
                    se[b] = ed
                    nrm[b] = 1.0

                    jump_count[b] += 1
                    bn1 = _bin_index(a1, wfine, m_lo_n1, nbins_n1)
                    bdn = _bin_index(a1 - a2, wfine, m_lo_dn, nbins_dn)
                    hist_n1_j[bn1] += 1
                    if b < half_b:
                        hist_dn_j1[bdn] += 1
                    else:
                        hist_dn_j2[bdn] += 1
                    if last_n1_bin[b] >= 0:
                        dwell = tcol[b] - last_jump_t[b]
                        hist_n1_d[last_n1_bin[b]] += dwell
                        hist_dn_d[last_dn_bin[b]] += dwell
                    last_n1_bin[b] = bn1
                    last_dn_bin[b] = bdn
                    last_jump_t[b] = tcol[b]

                    st, u = _next_u01(rng[b])
                    rng[b] = st
                    rthr[b] = u
                elif nb_norm > prevn[b] * (1.0 + 1e-12) and prevn[b] <= 1.0:
                    status[b] |= NORM_VIOLATION_BIT

        if (step + 1) % sample_every == 0:
            k = (step + 1) // sample_every
            if k < samples.shape[1]:
                for b in range(nb):
                    if alive[b] == 1:
                        samples[b, k, 0] = s1[b] / nrm[b]
                        samples[b, k, 1] = s2[b] / nrm[b]

    # Flush terminal dwell intervals.
    for b in range(nb):
        if last_n1_bin[b] >= 0:
            dwell = tcol[b] - last_jump_t[b]
            hist_n1_d[last_n1_bin[b]] += dwell
            hist_dn_d[last_dn_bin[b]] += dwell


@njit(cache=True, nogil=True, fastmath=True)
def mcwf_record(hp, hj, hvr, hvi,
                w1, w2, wq1, wq2, wedge,
                jsrc1, jamp1, jsrc2, jamp2,
                psi0r, psi0i, seed,
                h0, n_steps, pmax, two_gamma, sample_every,
                samples,
                ev_t, ev_ch, ev_n1, ev_n2,
                status):
    """Single Monte-Carlo trajectory with full jump-event recording.

    Identical stochastic scheme to mcwf_batch at batch size 1 (the
    sub-step count adapts to this trajectory's own loss rate).  Events
    fill the ev_* arrays; returns the event count.  If capacity runs out,
    status is set to STATUS_CAPACITY and the count so far is returned.
    """
    dim = psi0r.shape[0]
    vr = np.empty((dim, 1))
    vi = np.empty((dim, 1))
    kr = np.empty((dim, 1))
    ki = np.empty((dim, 1))
    tr = np.empty((dim, 1))
    ti = np.empty((dim, 1))
    acr = np.empty((dim, 1))
    aci = np.empty((dim, 1))
    s1 = np.empty(1)
    s2 = np.empty(1)
    q1 = np.empty(1)
    q2 = np.empty(1)
    se = np.empty(1)
    nrm = np.empty(1)
    capacity = ev_t.shape[0]
    n_events = 0
    t = 0.0

    for i in range(dim):
        vr[i, 0] = psi0r[i]
        vi[i, 0] = psi0i[i]
    rng, rthr = _next_u01(seed)

    _reduce_column_sums(vr, vi, w1, w2, wq1, wq2, wedge, s1, s2, q1, q2, se, nrm)
    samples[0, 0] = s1[0] / nrm[0]
    samples[0, 1] = s2[0] / nrm[0]

    for step in range(n_steps):
        rate = two_gamma * (s1[0] + s2[0]) / nrm[0]
        n_sub = 1 + int(rate * h0 / pmax)
        if n_sub > 8192:
            status[0] = STATUS_DIVERGED
            return n_events
        h = h0 / n_sub

        for _sub in range(n_sub):
            _rk4_step(hp, hj, hvr, hvi, vr, vi, kr, ki, tr, ti, acr, aci, h)
            prev = nrm[0]
            _reduce_column_sums(vr, vi, w1, w2, wq1, wq2, wedge,
                                s1, s2, q1, q2, se, nrm)
            t += h
            if not np.isfinite(nrm[0]) or nrm[0] > 4.0:
                status[0] = STATUS_DIVERGED
                return n_events
            if nrm[0] < 1e-250:
                status[0] = STATUS_UNDERFLOW
                return n_events

            if nrm[0] <= rthr:
                tot = s1[0] + s2[0]
                if tot <= 0.0:
                    continue
                rng, u = _next_u01(rng)
                if u * tot < s1[0]:
                    _apply_jump(vr, vi, 0, jsrc1, jamp1)
                    channel = 1
                else:
                    _apply_jump(vr, vi, 0, jsrc2, jamp2)
                    channel = 2
                pn = 0.0
                for i in range(dim):
                    pn += vr[i, 0] * vr[i, 0] + vi[i, 0] * vi[i, 0]
                if pn <= 0.0:
                    status[0] = STATUS_UNDERFLOW
                    return n_events
                inv = 1.0 / np.sqrt(pn)
                for i in range(dim):
                    vr[i, 0] *= inv
                    vi[i, 0] *= inv
                _reduce_column_sums(vr, vi, w1, w2, wq1, wq2, wedge,
                                    s1, s2, q1, q2, se, nrm)
                if n_events >= capacity:
                    status[0] = STATUS_CAPACITY
                    return n_events
                ev_t[n_events] = t
                ev_ch[n_events] = channel
                ev_n1[n_events] = s1[0]
                ev_n2[n_events] = s2[0]
                n_events += 1
                rng, rthr = _next_u01(rng)
            elif nrm[0] > prev * (1.0 + 1e-12) and prev <= 1.0:
                status[0] |= NORM_VIOLATION_BIT

        if (step + 1) % sample_every == 0:
            k = (step + 1) // sample_every
            if k < samples.shape[0]:
                samples[k, 0] = s1[0] / nrm[0]
                samples[k, 1] = s2[0] / nrm[0]

    return n_events
