"""Physical parameters and unit conventions for the driven Kerr dimer.

Two tunnel-coupled single-mode Kerr cavities, coherently driven with equal
amplitude and damped at equal rate gamma.  Every rate in the package is
expressed in units of gamma; the default gamma = 1 makes that explicit.
All other modules consume :class:`SystemParams` and never re-interpret units.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

__all__ = ["SystemParams", "DerivedConstants", "make_params", "derived"]


@dataclass(frozen=True)
class SystemParams:
    """Complete parameter set of the dimer, in units of gamma.

    Attributes
    ----------
    j : float
        Tunneling rate J >= 0 between the cavities.  The sign of J is a
        gauge choice (absorbable into the relative phase of the modes),
        so only J >= 0 is accepted.
    u : float
        Kerr nonlinearity U of each cavity.
    f : complex
        Coherent drive amplitude F, identical on both cavities.  The global
        drive phase is a gauge choice; the analytic series additionally
        requires real F > 0 (see :mod:`kerrdimer.analytic`).
    delta_omega : float
        Drive detuning, cavity frequency minus drive frequency.
    gamma : float
        Single-photon loss rate of each cavity; gamma > 0.  Default 1,
        i.e. gamma is the unit of all rates.
    """

    j: float
    u: float
    f: complex
    delta_omega: float
    gamma: float = 1.0

    def __post_init__(self):
        values = (self.j, self.u, self.f, self.delta_omega, self.gamma)
        if not all(cmath.isfinite(complex(v)) for v in values):
            raise ValueError("all parameters must be finite")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.j < 0:
            raise ValueError("j must be >= 0 (its sign is a gauge choice)")

    @property
    def kappa(self) -> complex:
        """Complex single-cavity decay constant gamma + i*delta_omega."""
        return complex(self.gamma, self.delta_omega)


@dataclass(frozen=True)
class DerivedConstants:
    """Constants derived from :class:`SystemParams`, used by the analytic series.

    kappa = gamma + i*delta_omega, c = kappa/(i*u/2) = -2i*kappa/u,
    d = conj(c).  For real u, c + d = 4*delta_omega/u is real.
    """

    kappa: complex
    c: complex
    d: complex


def make_params(j: float, u: float, f: complex, delta_omega: float,
                gamma: float = 1.0) -> SystemParams:
    """Validate and build a :class:`SystemParams`.

    Parameters
    ----------
    j, u, delta_omega, gamma : float
        Rates in units of gamma (tunneling, Kerr strength, detuning, loss).
    f : complex
        Drive amplitude in units of gamma.

    Returns
    -------
    SystemParams

    Raises
    ------
    ValueError
        For non-finite values, gamma <= 0, or j < 0.
    """
    return SystemParams(j=float(j), u=float(u), f=complex(f),
                        delta_omega=float(delta_omega), gamma=float(gamma))


def derived(params: SystemParams) -> DerivedConstants:
    """Constants kappa, c, d entering the analytic steady-state series.

    Raises
    ------
    ValueError
        If u = 0 (c = -2i*kappa/u is undefined).
    """
    if params.u == 0:
        raise ValueError("c = -2i*kappa/u is undefined for u = 0")
    c = -2j * params.kappa / params.u
    return DerivedConstants(kappa=params.kappa, c=c, d=c.conjugate())


def rescaled(params: SystemParams, s: float) -> SystemParams:
    """Scale every rate by s > 0 (time contracts by 1/s).

    Dimensionless steady-state observables (occupations, phases, g2) are
    invariant under this rescaling; useful for unit self-checks.
    """
    if not (math.isfinite(s) and s > 0):
        raise ValueError("scale factor must be positive and finite")
    return SystemParams(j=params.j * s, u=params.u * s, f=params.f * s,
                        delta_omega=params.delta_omega * s,
                        gamma=params.gamma * s)
