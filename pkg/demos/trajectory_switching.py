"""Quantum-jump trajectories switching between metastable branches.

In the multistable window the full quantum dynamics does not sit on one
mean-field branch: individual trajectories dwell near a branch and jump
stochastically between them.  This script runs a small ensemble at
F = 2.6 (J = 0.1, U = 0.6, delta_omega = -3), plots one trajectory's
occupation record, and builds the jump-weighted histograms of n1 and
n1 - n2 whose bimodal peaks sit at the mean-field branch occupations.
About a minute on one core.  Writes trajectory_switching.png.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from kerrdimer import (FockBasis, TrajectoryConfig, ensemble_histograms,
                       ensemble_statistics, find_all_steady_states,
                       make_params, mirror_symmetry_ks, run_ensemble,
                       run_trajectory)
from kerrdimer.semiclassical import Stability, Symmetry

HERE = pathlib.Path(__file__).resolve().parent

params = make_params(j=0.1, u=0.6, f=2.6, delta_omega=-3.0)
basis = FockBasis(15)
config = TrajectoryConfig(n_traj=48, t_final=600.0)

branch = sorted(s.state.n1 for s in find_all_steady_states(params)
                if s.stability is Stability.STABLE
                and s.symmetry is Symmetry.PRESERVING)
print(f"mean-field branch occupations: {branch[0]:.3f} (dim), "
      f"{branch[1]:.3f} (bright)")

print(f"running {config.n_traj} trajectories to t = {config.t_final} ...")
data = run_ensemble(params, basis, config)
stats = ensemble_statistics(data)
print(f"ensemble averages: n1 = {stats.n1:.3f} +- {stats.se_n1:.3f}, "
      f"n2 = {stats.n2:.3f} +- {stats.se_n2:.3f}, "
      f"g2_1 = {stats.g2_1:.3f} +- {stats.se_g2_1:.3f}")
ks = mirror_symmetry_ks(data)
print(f"mirror-symmetry KS test: D = {ks.distance:.4f}, "
      f"critical = {ks.critical:.4f}, symmetric = {ks.symmetric}")

hist_n1, hist_dn = ensemble_histograms(data, binning=0.25)
peaks = []
mid = 0.5 * (branch[0] + branch[1])
for lo, hi in ((None, mid), (mid, None)):
    sel = np.ones_like(hist_n1.centers, dtype=bool)
    if lo is not None:
        sel &= hist_n1.centers >= lo
    if hi is not None:
        sel &= hist_n1.centers < hi
    peaks.append(hist_n1.centers[sel][np.argmax(hist_n1.counts[sel])])
print(f"histogram modes: {peaks[0]:.2f} and {peaks[1]:.2f} "
      "(compare the branch occupations above)")

single = run_trajectory(params, basis, config, seed=3)

fig, axes = plt.subplots(1, 3, figsize=(12, 3.6))
axes[0].plot(single.samples[:, 0], single.samples[:, 1], lw=0.6)
for n in branch:
    axes[0].axhline(n, c="0.6", ls=":")
axes[0].set_xlabel(r"$t\,\gamma$")
axes[0].set_ylabel(r"$\langle n_1\rangle$")
axes[0].set_title("one trajectory", fontsize=10)

axes[1].stairs(hist_n1.counts, hist_n1.edges, fill=True)
for n in branch:
    axes[1].axvline(n, c="0.3", ls=":")
axes[1].set_xlabel("$n_1$ at jumps")
axes[1].set_title("jump histogram of $n_1$", fontsize=10)

axes[2].stairs(hist_dn.counts, hist_dn.edges, fill=True, color="tab:red")
axes[2].set_xlabel("$n_1 - n_2$ at jumps")
axes[2].set_title("jump histogram of $n_1 - n_2$", fontsize=10)

fig.suptitle("Quantum trajectories at F = 2.6")
fig.tight_layout()
out = HERE / "trajectory_switching.png"
fig.savefig(out, dpi=150)
print(f"wrote {out}")
