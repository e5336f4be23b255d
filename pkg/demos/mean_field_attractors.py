"""Mean-field attractors of the driven Kerr dimer.

At J = 0.1, U = 0.6, F = 2.6, delta_omega = -3 the classical flow has four
stable fixed points: two exchange-symmetric states (both cavities dim, both
bright) and a mirror pair of symmetry-broken states (one dim, one bright).
This script enumerates them, then integrates the equations of motion from a
handful of initial amplitudes and shows each run settling onto one of the
four.  Writes mean_field_attractors.png next to this script.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from kerrdimer import find_all_steady_states, integrate, make_params
from kerrdimer.semiclassical import MeanFieldState, Stability

HERE = pathlib.Path(__file__).resolve().parent

params = make_params(j=0.1, u=0.6, f=2.6, delta_omega=-3.0)

print(f"parameters: J={params.j}, U={params.u}, F={params.f.real}, "
      f"delta_omega={params.delta_omega} (units of gamma)")
print()
print("fixed points:")
for s in find_all_steady_states(params):
    print(f"  n1={s.state.n1:8.4f}  n2={s.state.n2:8.4f}  "
          f"dtheta={s.state.dtheta:+8.4f}  {s.stability.value:8s}  "
          f"{s.symmetry.value}")

# Starts chosen to land in all four basins: near vacuum, both bright,
# and two asymmetric kicks related by exchange.
starts = [
    MeanFieldState(0.1 + 0.0j, 0.1 + 0.0j),
    MeanFieldState(2.4 + 0.0j, 2.4 + 0.0j),
    MeanFieldState(2.4 + 0.0j, 0.3 + 0.0j),
    MeanFieldState(0.3 + 0.0j, 2.4 + 0.0j),
]

fig, axes = plt.subplots(2, 2, figsize=(9, 6), sharex=True, sharey=True)
print()
for ax, initial in zip(axes.ravel(), starts):
    traj = integrate(params, initial, t_final=60.0)
    n1 = np.abs(traj.alpha1) ** 2
    n2 = np.abs(traj.alpha2) ** 2
    ax.plot(traj.times, n1, label="$n_1$")
    ax.plot(traj.times, n2, label="$n_2$", ls="--")
    ax.set_title(f"start $n_1$={initial.n1:.2f}, $n_2$={initial.n2:.2f}",
                 fontsize=9)
    print(f"  start ({initial.n1:.2f}, {initial.n2:.2f}) -> "
          f"({n1[-1]:.4f}, {n2[-1]:.4f}), "
          f"converged={traj.converged} at t={traj.convergence_time}")

for ax in axes[1]:
    ax.set_xlabel(r"$t\,\gamma$")
for ax in axes[:, 0]:
    ax.set_ylabel("occupation")
axes[0, 0].legend(fontsize=8)
fig.suptitle("Four mean-field attractors at F = 2.6")
fig.tight_layout()
out = HERE / "mean_field_attractors.png"
fig.savefig(out, dpi=150)
print(f"\nwrote {out}")
