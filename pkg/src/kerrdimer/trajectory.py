"""Monte-Carlo wavefunction unraveling of the lossy dimer.

Between jumps the unnormalized state evolves under the non-Hermitian
drift -i H_eff with H_eff = H - i gamma (n1 + n2); a uniform threshold
r in (0, 1) is drawn and the state jumps when ||psi||^2 decays to r.
The channel is site i with probability proportional to 2 gamma <n_i>,
the state is replaced by a_i psi (renormalized), and a fresh threshold
is drawn.  The jump decision is first order in the step, so the step is
sub-divided adaptively to keep the per-step jump probability below 0.1;
residual timing error is O(dt).

Jump statistics follow the post-jump expectations <n_i>, not Fock
eigenvalues.  Histograms of n1 and dn = n1 - n2 are accumulated in fine
bins (width 0.05) inside the compiled kernel and regrouped exactly into
any odd multiple, 0.25 by default; both per-jump counts and dwell-time
weights are kept, per-jump being the default everywhere.

Reproducibility: one SplitMix64 stream per trajectory, keyed through
numpy's SeedSequence from the master seed.  Ensembles are processed in
fixed 64-trajectory chunks so results are identical for any worker
count; within a chunk the sub-step count follows the largest loss rate
in the chunk, which only refines the integration grid.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

from ._kernels import (NORM_VIOLATION_BIT, STATUS_CAPACITY, STATUS_DIVERGED,
                       STATUS_OK, STATUS_UNDERFLOW, mcwf_batch, mcwf_record)
from .fockspace import EDGE_TOL, FockBasis, build_hamiltonian
from .model import SystemParams

__all__ = ["Channel", "TrajectoryConfig", "JumpEvent", "TrajectoryRecord",
           "Histogram", "EnsembleData", "EnsembleResult", "MirrorTest",
           "run_trajectory", "run_ensemble", "ensemble_average",
           "ensemble_statistics", "jump_histograms", "ensemble_histograms",
           "dn_spread_statistic", "mirror_symmetry_ks"]

PMAX_JUMP = 0.095          # per-sub-step jump probability bound (< 0.1)
FINE_WIDTH = 0.05          # in-kernel histogram bin width
CHUNK = 64                 # trajectories per kernel call, fixed for determinism
KS_COEFF_1PCT = 1.628      # two-sample Kolmogorov-Smirnov c(alpha) at 1%
_STATUS_MASK = np.uint8(0xFF ^ NORM_VIOLATION_BIT)


class Channel(Enum):
    """Loss channel labels; values match the CSV encoding."""

    SITE1 = 1
    SITE2 = 2


@dataclass(frozen=True)
class TrajectoryConfig:
    """Run controls for trajectory simulations.

    sample_interval must be an integer multiple of dt; the per-step jump
    probability bound is enforced adaptively by the integrator, so dt
    only needs to satisfy the RK4 stability check against H_eff.
    """

    n_traj: int
    t_final: float = 2000.0
    dt: float = 2e-3
    seed: int = 7041776
    sample_interval: float = 1.0

    def __post_init__(self):
        if self.n_traj < 1:
            raise ValueError("n_traj must be >= 1")
        if not (self.t_final > 0 and math.isfinite(self.t_final)):
            raise ValueError("t_final must be positive and finite")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError("dt must be positive and finite")
        if not (self.sample_interval > 0 and math.isfinite(self.sample_interval)):
            raise ValueError("sample_interval must be positive and finite")
        k = round(self.sample_interval / self.dt)
        if k < 1 or abs(k * self.dt - self.sample_interval) > 1e-9 * max(
                1.0, self.sample_interval):
            raise ValueError("sample_interval must be an integer multiple of dt")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    @property
    def sample_every(self) -> int:
        return int(round(self.sample_interval / self.dt))


@dataclass(frozen=True)
class JumpEvent:
    """One recorded quantum jump; occupations are post-jump expectations."""

    time: float
    channel: Channel
    n1_post: float
    n2_post: float

    @property
    def dn_post(self) -> float:
        return self.n1_post - self.n2_post


@dataclass
class TrajectoryRecord:
    """Single-trajectory output: jump events plus uniform (t, n1, n2) samples.

    Event columns are stored as plain arrays; the jumps property
    materializes JumpEvent objects on demand.  Bit-for-bit reproducible
    from (params, basis, config, seed).
    """

    times: np.ndarray
    channels: np.ndarray
    n1_post: np.ndarray
    n2_post: np.ndarray
    samples: np.ndarray          # (k, 3): time, <n1>, <n2>
    seed: int
    t_final: float
    norm_violation: bool = False

    @cached_property
    def jumps(self) -> list[JumpEvent]:
        return [JumpEvent(float(t), Channel(int(c)), float(a), float(b))
                for t, c, a, b in zip(self.times, self.channels,
                                      self.n1_post, self.n2_post)]

    @property
    def n_jumps(self) -> int:
        return int(self.times.shape[0])

    @property
    def dn_post(self) -> np.ndarray:
        return self.n1_post - self.n2_post


@dataclass
class Histogram:
    """Uniform histogram whose bin m covers [w(m-1/2), w(m+1/2)).

    m runs from m_lo; centers sit on multiples of the width, so a bin is
    always centered on 0 when the range straddles it.  counts are floats
    (dwell weighting integrates time).
    """

    width: float
    m_lo: int
    counts: np.ndarray
    weighting: str = "jump"

    @property
    def centers(self) -> np.ndarray:
        return (self.m_lo + np.arange(self.counts.shape[0])) * self.width

    @property
    def edges(self) -> np.ndarray:
        return (self.m_lo + np.arange(self.counts.shape[0] + 1) - 0.5) * self.width

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    def rebinned(self, factor: int) -> "Histogram":
        """Regroup into bins factor times wider; factor must be odd so the
        coarse centers remain on the fine grid."""
        if factor < 1 or factor % 2 == 0:
            raise ValueError("rebinning factor must be a positive odd integer")
        if factor == 1:
            return Histogram(self.width, self.m_lo, self.counts.copy(),
                             self.weighting)
        nf = self.counts.shape[0]
        half = factor // 2
        lo = math.floor((self.m_lo + half) / factor)
        hi = math.floor((self.m_lo + nf - 1 + half) / factor)
        out = np.zeros(hi - lo + 1)
        for i in range(nf):
            out[(self.m_lo + i + half) // factor - lo] += self.counts[i]
        return Histogram(self.width * factor, lo, out, self.weighting)


@dataclass
class EnsembleData:
    """Raw ensemble output: per-trajectory accumulators and pooled
    fine-binned jump histograms.

    acc columns: post-transient time integrals of n1, n2, n1(n1-1),
    n2(n2-1), elapsed time, edge population.  The dn count histogram is
    split by trajectory halves (first half_count trajectories vs the
    rest) for the mirror-symmetry check.
    """

    acc: np.ndarray              # (n_traj, 6)
    jump_count: np.ndarray       # (n_traj,)
    status: np.ndarray           # (n_traj,) uint8
    samples: np.ndarray          # (n_traj, k, 2)
    sample_times: np.ndarray     # (k,)
    hist_n1_jump: np.ndarray
    hist_n1_dwell: np.ndarray
    hist_dn_jump_half1: np.ndarray
    hist_dn_jump_half2: np.ndarray
    hist_dn_dwell: np.ndarray
    m_lo_n1: int
    m_lo_dn: int
    half_count: int
    traj_seeds: np.ndarray
    config: TrajectoryConfig

    @property
    def hist_dn_jump(self) -> np.ndarray:
        return self.hist_dn_jump_half1 + self.hist_dn_jump_half2

    @property
    def total_jumps(self) -> int:
        return int(self.jump_count.sum())

    @property
    def norm_violations(self) -> int:
        return int(np.count_nonzero(self.status & NORM_VIOLATION_BIT))

    @property
    def cutoff_warning(self) -> bool:
        elapsed = self.acc[:, 4].sum()
        return elapsed > 0 and self.acc[:, 5].sum() / elapsed > EDGE_TOL


@dataclass
class EnsembleResult:
    """Time- and ensemble-averaged observables with standard errors.

    n errors are between-trajectory; g2 errors come from a jackknife
    over trajectories (g2 is a ratio of ensemble means).
    """

    n1: float
    n2: float
    g2_1: float
    g2_2: float
    se_n1: float
    se_n2: float
    se_g2_1: float
    se_g2_2: float
    n_traj: int
    total_jumps: int
    cutoff_warning: bool


@dataclass
class MirrorTest:
    """Two-sample KS comparison of dn against its mirror image."""

    distance: float
    critical: float

    @property
    def symmetric(self) -> bool:
        return self.distance < self.critical


def _effective_hamiltonian_csr(params: SystemParams, basis: FockBasis):
    h = build_hamiltonian(params, basis).tocsr().astype(complex)
    m1, m2 = basis.occupations()
    drift = h.copy()
    drift.setdiag(drift.diagonal() - 1j * params.gamma * (m1 + m2))
    a = (-1j) * drift.tocsr()
    return (a.indptr, a.indices,
            np.ascontiguousarray(a.data.real),
            np.ascontiguousarray(a.data.imag))


def _check_dt_stability(params: SystemParams, basis: FockBasis, dt: float):
    h = build_hamiltonian(params, basis)
    m1, m2 = basis.occupations()
    bound = float(np.max(np.abs(h).sum(axis=1) + params.gamma * (m1 + m2)))
    if bound > 0 and dt > 2.5 / bound:
        raise ValueError(
            f"dt = {dt} outside the RK4 stability region for this cutoff; "
            f"need dt <= {2.5 / bound:.2e}")


def _jump_maps(basis: FockBasis):
    """(source index, amplitude) tables realizing psi <- a_i psi in place.

    Row t takes amplitude sqrt(m_i + 1) from the state one quantum above
    in site i; rows at the cutoff edge have no source (amplitude 0).
    """
    m1, m2 = basis.occupations()
    n = basis.n_max + 1
    idx = np.arange(basis.dim)
    maps = []
    for (m, stride) in ((m1, n), (m2, 1)):
        has_src = m < basis.n_max
        jsrc = np.where(has_src, idx + stride, idx).astype(np.int64)
        jamp = np.where(has_src, np.sqrt(m + 1.0), 0.0)
        maps.append((jsrc, jamp))
    return maps


def _weights(basis: FockBasis):
    m1, m2 = basis.occupations()
    edge = ((m1 == basis.n_max) | (m2 == basis.n_max)).astype(float)
    return (m1.astype(float), m2.astype(float),
            (m1 * (m1 - 1)).astype(float), (m2 * (m2 - 1)).astype(float), edge)


def _initial_state(basis: FockBasis, psi0):
    if psi0 is None:
        v = np.zeros(basis.dim, dtype=complex)
        v[basis.index(0, 0)] = 1.0
        return v.real.copy(), v.imag.copy()
    v = np.asarray(psi0, dtype=complex)
    if v.shape != (basis.dim,):
        raise ValueError("psi0 length does not match the basis dimension")
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise ValueError("psi0 must be nonzero")
    v = v / nrm
    return np.ascontiguousarray(v.real), np.ascontiguousarray(v.imag)


def _hist_extents(basis: FockBasis):
    nbins_n1 = int(round(basis.n_max / FINE_WIDTH)) + 1
    m_hi = int(round(basis.n_max / FINE_WIDTH))
    return nbins_n1, 0, 2 * m_hi + 1, -m_hi


def run_trajectory(params: SystemParams, basis: FockBasis,
                   config: TrajectoryConfig, seed: int | None = None,
                   psi0=None, initial_capacity: int = 1 << 14) -> TrajectoryRecord:
    """Single trajectory with full jump-event recording.

    seed defaults to config.seed.  The event buffer grows and the run is
    repeated (identically, by determinism) if capacity is exhausted.
    """
    if seed is None:
        seed = config.seed
    if initial_capacity < 1:
        raise ValueError("initial_capacity must be >= 1")
    _check_dt_stability(params, basis, config.dt)
    hp, hj, hvr, hvi = _effective_hamiltonian_csr(params, basis)
    w1, w2, wq1, wq2, wedge = _weights(basis)
    (jsrc1, jamp1), (jsrc2, jamp2) = _jump_maps(basis)
    psi0r, psi0i = _initial_state(basis, psi0)
    stream = np.random.SeedSequence(seed).generate_state(1, dtype=np.uint64)[0]

    n_samp = config.n_steps // config.sample_every + 1
    samples = np.full((n_samp, 2), np.nan)
    capacity = initial_capacity
    while True:
        ev_t = np.empty(capacity)
        ev_ch = np.empty(capacity, dtype=np.int8)
        ev_n1 = np.empty(capacity)
        ev_n2 = np.empty(capacity)
        status = np.zeros(1, dtype=np.uint8)
        n_events = mcwf_record(
            hp, hj, hvr, hvi, w1, w2, wq1, wq2, wedge,
            jsrc1, jamp1, jsrc2, jamp2, psi0r, psi0i, stream,
            config.dt, config.n_steps, PMAX_JUMP, 2.0 * params.gamma,
            config.sample_every, samples, ev_t, ev_ch, ev_n1, ev_n2, status)
        if status[0] & _STATUS_MASK == STATUS_CAPACITY:
            capacity *= 4
            continue
        break

    code = status[0] & _STATUS_MASK
    if code == STATUS_DIVERGED:
        raise RuntimeError("trajectory integration diverged; reduce dt")
    if code == STATUS_UNDERFLOW:
        raise RuntimeError("trajectory norm underflow")
    t_samp = np.arange(n_samp) * config.sample_interval
    return TrajectoryRecord(
        times=ev_t[:n_events].copy(), channels=ev_ch[:n_events].copy(),
        n1_post=ev_n1[:n_events].copy(), n2_post=ev_n2[:n_events].copy(),
        samples=np.column_stack([t_samp, samples]),
        seed=int(seed), t_final=config.t_final,
        norm_violation=bool(status[0] & NORM_VIOLATION_BIT))


def run_ensemble(params: SystemParams, basis: FockBasis,
                 config: TrajectoryConfig, psi0=None,
                 workers: int | None = None,
                 transient_fraction: float = 0.2) -> EnsembleData:
    """Ensemble of trajectories with in-kernel statistics accumulation.

    Trajectories run in fixed 64-column chunks (parallelizable across
    threads since the kernels release the GIL); per-chunk histogram
    slabs are summed in a fixed order, so the result is independent of
    the worker count.
    """
    if not 0.0 <= transient_fraction < 1.0:
        raise ValueError("transient_fraction must be in [0, 1)")
    _check_dt_stability(params, basis, config.dt)
    hp, hj, hvr, hvi = _effective_hamiltonian_csr(params, basis)
    w1, w2, wq1, wq2, wedge = _weights(basis)
    (jsrc1, jamp1), (jsrc2, jamp2) = _jump_maps(basis)
    psi0r, psi0i = _initial_state(basis, psi0)

    n_traj = config.n_traj
    seeds = np.random.SeedSequence(config.seed).generate_state(
        n_traj, dtype=np.uint64)
    n_steps = config.n_steps
    n_samp = n_steps // config.sample_every + 1
    transient_step = int(round(transient_fraction * n_steps))
    nbins_n1, m_lo_n1, nbins_dn, m_lo_dn = _hist_extents(basis)
    half = (n_traj + 1) // 2

    acc = np.zeros((n_traj, 6))
    jump_count = np.zeros(n_traj, dtype=np.int64)
    status = np.zeros(n_traj, dtype=np.uint8)
    samples = np.full((n_traj, n_samp, 2), np.nan)

    chunks = [(c, min(c + CHUNK, n_traj)) for c in range(0, n_traj, CHUNK)]
    slabs = []
    for _ in chunks:
        slabs.append((np.zeros(nbins_n1), np.zeros(nbins_n1),
                      np.zeros(nbins_dn), np.zeros(nbins_dn),
                      np.zeros(nbins_dn)))

    def work(ci):
        c0, c1 = chunks[ci]
        h_n1_j, h_n1_d, h_dn_j1, h_dn_j2, h_dn_d = slabs[ci]
        half_b = min(max(half - c0, 0), c1 - c0)
        mcwf_batch(
            hp, hj, hvr, hvi, w1, w2, wq1, wq2, wedge,
            jsrc1, jamp1, jsrc2, jamp2, psi0r, psi0i, seeds[c0:c1],
            config.dt, n_steps, PMAX_JUMP, 2.0 * params.gamma,
            transient_step, config.sample_every,
            FINE_WIDTH, m_lo_n1, m_lo_dn, half_b,
            samples[c0:c1], acc[c0:c1], jump_count[c0:c1],
            h_n1_j, h_n1_d, h_dn_j1, h_dn_j2, h_dn_d, status[c0:c1])

    if workers is None:
        workers = os.cpu_count() or 1
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, range(len(chunks))))
    else:
        for ci in range(len(chunks)):
            work(ci)

    hist_n1_j = np.zeros(nbins_n1)
    hist_n1_d = np.zeros(nbins_n1)
    hist_dn_j1 = np.zeros(nbins_dn)
    hist_dn_j2 = np.zeros(nbins_dn)
    hist_dn_d = np.zeros(nbins_dn)
    for s in slabs:
        hist_n1_j += s[0]
        hist_n1_d += s[1]
        hist_dn_j1 += s[2]
        hist_dn_j2 += s[3]
        hist_dn_d += s[4]

    bad = status & _STATUS_MASK
    if np.any(bad == STATUS_DIVERGED):
        raise RuntimeError("ensemble member diverged; reduce dt")
    if np.any(bad == STATUS_UNDERFLOW):
        raise RuntimeError("ensemble member hit norm underflow")

    return EnsembleData(
        acc=acc, jump_count=jump_count, status=status, samples=samples,
        sample_times=np.arange(n_samp) * config.sample_interval,
        hist_n1_jump=hist_n1_j, hist_n1_dwell=hist_n1_d,
        hist_dn_jump_half1=hist_dn_j1, hist_dn_jump_half2=hist_dn_j2,
        hist_dn_dwell=hist_dn_d, m_lo_n1=m_lo_n1, m_lo_dn=m_lo_dn,
        half_count=half, traj_seeds=seeds, config=config)


def _jackknife_g2(num: np.ndarray, n_int: np.ndarray, elapsed: np.ndarray):
    """Ratio estimate sum(num)/ (sum(n)/T)^2 ... computed as ensemble-mean
    moments, with a leave-one-out jackknife standard error."""
    m = num.shape[0]
    q = num.sum()
    n = n_int.sum()
    t = elapsed.sum()
    full = (q / t) / (n / t) ** 2 if n > 0 else 0.0
    if m < 2 or n <= 0:
        return float(full), float("nan")
    loo = np.empty(m)
    for k in range(m):
        qk = q - num[k]
        nk = n - n_int[k]
        tk = t - elapsed[k]
        loo[k] = (qk / tk) / (nk / tk) ** 2 if nk > 0 else 0.0
    se = math.sqrt((m - 1) / m * np.sum((loo - loo.mean()) ** 2))
    return float(full), se


def ensemble_statistics(data: EnsembleData) -> EnsembleResult:
    """Averages with standard errors from an existing ensemble run.

    n errors are the standard deviation of per-trajectory time averages
    over sqrt(n_traj), g2 errors are jackknife estimates for the ratio
    of pooled moments.
    """
    acc = data.acc
    m = acc.shape[0]
    if m < 2:
        raise ValueError("ensemble averaging needs n_traj >= 2")
    elapsed = acc[:, 4]
    nbar1 = acc[:, 0] / elapsed
    nbar2 = acc[:, 1] / elapsed
    n1 = float(nbar1.mean())
    n2 = float(nbar2.mean())
    se_n1 = float(nbar1.std(ddof=1) / math.sqrt(m))
    se_n2 = float(nbar2.std(ddof=1) / math.sqrt(m))
    g2_1, se_g2_1 = _jackknife_g2(acc[:, 2], acc[:, 0], elapsed)
    g2_2, se_g2_2 = _jackknife_g2(acc[:, 3], acc[:, 1], elapsed)
    return EnsembleResult(
        n1=n1, n2=n2, g2_1=g2_1, g2_2=g2_2, se_n1=se_n1, se_n2=se_n2,
        se_g2_1=se_g2_1, se_g2_2=se_g2_2, n_traj=m,
        total_jumps=data.total_jumps, cutoff_warning=data.cutoff_warning)


def ensemble_average(params: SystemParams, basis: FockBasis,
                     config: TrajectoryConfig, psi0=None,
                     workers: int | None = None) -> EnsembleResult:
    """Post-transient time and ensemble averages with standard errors.

    The first 20% of t_final is discarded; see ensemble_statistics for
    the error estimators.
    """
    if config.n_traj < 2:
        raise ValueError("ensemble averaging needs n_traj >= 2")
    return ensemble_statistics(
        run_ensemble(params, basis, config, psi0=psi0, workers=workers))


def _binning_to_fine_factor(binning: float) -> int:
    factor = round(binning / FINE_WIDTH)
    if factor < 1 or factor % 2 == 0 or abs(
            factor * FINE_WIDTH - binning) > 1e-9 * binning:
        raise ValueError(
            f"bin width must be an odd multiple of {FINE_WIDTH}")
    return factor


def jump_histograms(records, binning: float = 0.25,
                    weighting: str = "jump"):
    """(hist_n1, hist_dn) pooled over the given trajectory records.

    weighting "jump" counts each event once; "dwell" weights each event
    by the time spent in the post-jump state (until the next jump, or
    the end of the run for the last event).  Raises on an empty pool;
    warns below 1000 events (too few for meaningful shapes).
    """
    if weighting not in ("jump", "dwell"):
        raise ValueError("weighting must be 'jump' or 'dwell'")
    records = list(records)
    n1_all, dn_all, w_all = [], [], []
    for rec in records:
        if rec.n_jumps == 0:
            continue
        n1_all.append(rec.n1_post)
        dn_all.append(rec.n1_post - rec.n2_post)
        if weighting == "dwell":
            w_all.append(np.diff(np.append(rec.times, rec.t_final)))
        else:
            w_all.append(np.ones(rec.n_jumps))
    if not n1_all:
        raise ValueError("no jump events in the record set")
    n1 = np.concatenate(n1_all)
    dn = np.concatenate(dn_all)
    w = np.concatenate(w_all)
    if n1.shape[0] < 1000:
        warnings.warn(f"only {n1.shape[0]} jump events pooled; histogram "
                      "shapes are unreliable below 1000", stacklevel=2)
    return (_histogram_from_values(n1, w, binning, weighting),
            _histogram_from_values(dn, w, binning, weighting))


def _histogram_from_values(x, w, binning, weighting) -> Histogram:
    if binning <= 0 or not math.isfinite(binning):
        raise ValueError("bin width must be positive and finite")
    m = np.floor(x / binning + 0.5).astype(np.int64)
    m_lo = int(m.min())
    counts = np.zeros(int(m.max()) - m_lo + 1)
    np.add.at(counts, m - m_lo, w)
    return Histogram(binning, m_lo, counts, weighting)


def ensemble_histograms(data: EnsembleData, binning: float = 0.25,
                        weighting: str = "jump"):
    """(hist_n1, hist_dn) from the in-kernel fine-binned accumulators."""
    if weighting == "jump":
        fine_n1, fine_dn = data.hist_n1_jump, data.hist_dn_jump
    elif weighting == "dwell":
        fine_n1, fine_dn = data.hist_n1_dwell, data.hist_dn_dwell
    else:
        raise ValueError("weighting must be 'jump' or 'dwell'")
    if data.total_jumps == 0:
        raise ValueError("no jump events in the ensemble")
    factor = _binning_to_fine_factor(binning)
    h_n1 = Histogram(FINE_WIDTH, data.m_lo_n1, fine_n1.copy(), weighting)
    h_dn = Histogram(FINE_WIDTH, data.m_lo_dn, fine_dn.copy(), weighting)
    return h_n1.rebinned(factor), h_dn.rebinned(factor)


def dn_spread_statistic(hist: Histogram) -> float:
    """Excess standard deviation of dn beyond the central peak.

    The total second moment about dn = 0 is compared with the variance
    of a Gaussian matched to the central peak's full width at half
    maximum (no lineshape fit is attempted); the square root of the
    positive part is returned.  Zero for a delta at 0; equals the peak
    offset for a symmetric two-delta histogram; large when weight sits
    in side peaks away from 0.
    """
    counts = hist.counts
    total = counts.sum()
    if counts.shape[0] < 2 or total <= 0:
        raise ValueError("histogram is degenerate")
    x = hist.centers
    v_tot = float((counts * x * x).sum() / total)
    i0 = -hist.m_lo
    if i0 < 0 or i0 >= counts.shape[0] or counts[i0] == 0:
        sigma_core = 0.0
    else:
        sigma_core = _fwhm_about(counts, i0, hist.width) / 2.3548200450309493
    return math.sqrt(max(v_tot - sigma_core**2, 0.0))


def _fwhm_about(counts: np.ndarray, i0: int, width: float) -> float:
    """Full width at half maximum of the peak containing bin i0, with
    linear interpolation at the half-height crossings."""
    peak = counts[i0]
    half = 0.5 * peak
    n = counts.shape[0]

    right = i0
    while right + 1 < n and counts[right + 1] >= half:
        right += 1
    if right + 1 < n:
        drop = counts[right] - counts[right + 1]
        frac = (counts[right] - half) / drop if drop > 0 else 0.5
        xr = right + frac
    else:
        xr = float(n - 1)

    left = i0
    while left - 1 >= 0 and counts[left - 1] >= half:
        left -= 1
    if left - 1 >= 0:
        drop = counts[left] - counts[left - 1]
        frac = (counts[left] - half) / drop if drop > 0 else 0.5
        xl = left - frac
    else:
        xl = 0.0
    return (xr - xl) * width


def mirror_symmetry_ks(data: EnsembleData) -> MirrorTest:
    """Kolmogorov-Smirnov check that dn is distributed like -dn.

    The jump-count dn histogram is split by trajectory halves and the
    first half is compared against the mirror image of the second.
    Within-trajectory correlations make raw event counts overstate the
    information content, so the critical value (1% significance)
    conservatively uses the trajectory count per half as the effective
    sample size.
    """
    a = data.hist_dn_jump_half1
    b = data.hist_dn_jump_half2[::-1]   # mirror: bin grid is symmetric
    ta, tb = a.sum(), b.sum()
    if ta == 0 or tb == 0:
        raise ValueError("a trajectory half produced no jump events")
    cdf_a = np.cumsum(a) / ta
    cdf_b = np.cumsum(b) / tb
    distance = float(np.abs(cdf_a - cdf_b).max())
    n1 = data.half_count
    n2 = data.config.n_traj - data.half_count
    if min(n1, n2) < 1:
        raise ValueError("mirror test needs at least 2 trajectories")
    critical = KS_COEFF_1PCT * math.sqrt((n1 + n2) / (n1 * n2))
    return MirrorTest(distance=distance, critical=critical)
