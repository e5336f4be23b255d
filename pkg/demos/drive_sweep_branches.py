"""Fixed-point branches of the dimer under a drive sweep.

Sweeps the drive amplitude F from 0 to 5 at J = 0.1, U = 0.6,
delta_omega = -3 and plots every fixed-point occupation against F: the
exchange-symmetric S-curve plus the symmetry-broken branches that detach
from it.  The console output locates the window where four stable states
coexist.  Writes drive_sweep_branches.png next to this script.
"""

import pathlib
from dataclasses import replace

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from kerrdimer import find_all_steady_states, make_params
from kerrdimer.semiclassical import Stability, Symmetry

HERE = pathlib.Path(__file__).resolve().parent

base = make_params(j=0.1, u=0.6, f=0.0, delta_omega=-3.0)
drives = [0.025 * k for k in range(201)]

points = {"stable_sym": [], "stable_brk": [], "unstable": []}
window = []
for f in drives:
    sols = find_all_steady_states(replace(base, f=f))
    n_stable = sum(s.stability is Stability.STABLE for s in sols)
    if n_stable == 4:
        window.append(f)
    for s in sols:
        for n in (s.state.n1, s.state.n2):
            if s.stability is not Stability.STABLE:
                points["unstable"].append((f, n))
            elif s.symmetry is Symmetry.PRESERVING:
                points["stable_sym"].append((f, n))
            else:
                points["stable_brk"].append((f, n))

print(f"swept {len(drives)} drive values, F in [0, 5]")
if window:
    print(f"four stable states for F in [{min(window):.3f}, {max(window):.3f}]")
else:
    print("no four-state window on this grid")

fig, ax = plt.subplots(figsize=(7, 5))
style = {
    "unstable": dict(s=2, c="0.75", label="unstable"),
    "stable_sym": dict(s=4, c="tab:blue", label="stable, symmetric"),
    "stable_brk": dict(s=4, c="tab:red", label="stable, broken"),
}
for key in ("unstable", "stable_sym", "stable_brk"):
    fs, ns = zip(*points[key])
    ax.scatter(fs, ns, **style[key])
if window:
    ax.axvspan(min(window), max(window), color="tab:red", alpha=0.08)
ax.set_xlabel(r"$F/\gamma$")
ax.set_ylabel("fixed-point occupations $n_1$, $n_2$")
ax.set_title("Branch structure at J = 0.1, U = 0.6, $\\Delta\\omega$ = -3")
ax.legend(fontsize=8)
fig.tight_layout()
out = HERE / "drive_sweep_branches.png"
fig.savefig(out, dpi=150)
print(f"wrote {out}")
