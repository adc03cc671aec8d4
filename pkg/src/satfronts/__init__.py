"""Planar traveling fronts for bistable reaction-diffusion with strongly saturating diffusion.

The second-order profile equation ``eps (P(v'))' - c v' + f(v) = 0`` is solved
through the first-order reduction ``dy/dv = c R(y / eps) - f(v)`` with
``y = eps Q(v')``.
"""

from .diffusion import SaturatingFlux, mean_curvature_flux, power_saturating_flux
from .errors import (
    BracketError,
    DomainError,
    IpofError,
    QuadratureError,
    RegimeError,
    SatFrontsError,
    SeedError,
    StepError,
    ValidationError,
    WindowError,
)
from .limits import ConvergenceReport
from .profiles import WaveProfile
from .reaction import BistableReaction, build_cubic, build_from_table
from .reduced_ode import ReducedField, ReducedTrajectory, Tolerances, shoot
from .shooting import SpeedResult, critical_speed_bistable, critical_speed_monostable

__version__ = "0.1.0"

__all__ = [
    "BistableReaction",
    "BracketError",
    "ConvergenceReport",
    "DomainError",
    "IpofError",
    "QuadratureError",
    "ReducedField",
    "ReducedTrajectory",
    "RegimeError",
    "SatFrontsError",
    "SaturatingFlux",
    "SeedError",
    "SpeedResult",
    "StepError",
    "Tolerances",
    "ValidationError",
    "WaveProfile",
    "WindowError",
    "build_cubic",
    "build_from_table",
    "critical_speed_bistable",
    "critical_speed_monostable",
    "mean_curvature_flux",
    "power_saturating_flux",
    "shoot",
]
