"""Simulation toolkit for two driven, lossy, tunnel-coupled Kerr cavities.

Layers, from fastest to most complete:

- :mod:`kerrdimer.semiclassical` : mean-field flow, all fixed points,
  stability, phase diagrams.
- :mod:`kerrdimer.master` : density-matrix steady states in a truncated
  two-mode Fock space (direct solve and time propagation).
- :mod:`kerrdimer.trajectory` : stochastic wavefunction unravelling with
  photon-counting jump records.
- :mod:`kerrdimer.analytic` : quantum steady-state correlators from a
  phase-space series, exact for uncoupled cavities and approximate for
  weak tunneling.

All rates are in units of the single-photon loss rate gamma.
"""

from .analytic import correlators, pseries_params, validity_metric
from .fockspace import FockBasis, build_hamiltonian, coherent_state, \
    vacuum_state
from .master import (
    MasterRunResult, evolve_to_steady, steady_state_direct,
    sweep_steady_states,
)
from .model import DerivedConstants, SystemParams, derived, make_params
from .semiclassical import (
    PhaseDiagram, SteadyStateSolution, find_all_steady_states, integrate,
    phase_diagram, symmetric_branch,
)
from .trajectory import (
    TrajectoryConfig, dn_spread_statistic, ensemble_average,
    ensemble_histograms, ensemble_statistics, jump_histograms,
    mirror_symmetry_ks, run_ensemble, run_trajectory,
)

__version__ = "0.1.0"

__all__ = [
    "SystemParams", "DerivedConstants", "make_params", "derived",
    "SteadyStateSolution", "PhaseDiagram", "integrate",
    "find_all_steady_states", "symmetric_branch", "phase_diagram",
    "FockBasis", "build_hamiltonian", "vacuum_state", "coherent_state",
    "MasterRunResult", "steady_state_direct", "evolve_to_steady",
    "sweep_steady_states",
    "TrajectoryConfig", "run_trajectory", "run_ensemble", "ensemble_average",
    "ensemble_statistics", "jump_histograms", "ensemble_histograms",
    "dn_spread_statistic", "mirror_symmetry_ks",
    "correlators", "pseries_params", "validity_metric",
    "__version__",
]
