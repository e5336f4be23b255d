"""Stable-state count over the (J, F) plane.

Maps how many stable mean-field states the dimer supports as a function of
tunneling J and drive F at U = 0.6, delta_omega = -3.  The four-state
region, where symmetry-broken mirror pairs coexist with both symmetric
states, lives inside the bistable tongue; it is reentrant in J near F = 3
and closes for good near J = 1.23.  Writes phase_diagram_map.png next to
this script.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from kerrdimer import make_params, phase_diagram

HERE = pathlib.Path(__file__).resolve().parent

base = make_params(j=0.1, u=0.6, f=2.6, delta_omega=-3.0)
js = np.linspace(0.0, 1.5, 31)
fs = np.linspace(0.0, 5.0, 51)

print(f"computing {js.size} x {fs.size} grid (about a minute on one core)")
diagram = phase_diagram(base, "j", "f", (js, fs))

four = diagram.n_stable == 4
if four.any():
    ji, fi = np.nonzero(four)
    print(f"four-state region: J in [{js[ji.min()]:.3f}, {js[ji.max()]:.3f}], "
          f"F in [{fs[fi.min()]:.2f}, {fs[fi.max()]:.2f}] "
          f"({four.sum()} grid points)")
print(f"stable-count range: {diagram.n_stable.min()} .. {diagram.n_stable.max()}")

fig, ax = plt.subplots(figsize=(7, 5))
mesh = ax.pcolormesh(fs, js, diagram.n_stable, cmap="viridis",
                     vmin=0, vmax=4, shading="nearest")
if four.any():
    ax.contour(fs, js, four.astype(float), levels=[0.5],
               colors="white", linewidths=1.0)
fig.colorbar(mesh, ax=ax, label="number of stable states")
ax.set_xlabel(r"$F/\gamma$")
ax.set_ylabel(r"$J/\gamma$")
ax.set_title("Multistability map at U = 0.6, $\\Delta\\omega$ = -3")
fig.tight_layout()
out = HERE / "phase_diagram_map.png"
fig.savefig(out, dpi=150)
print(f"wrote {out}")
