"""Vanishing-diffusion experiments: fronts against their eps -> 0 limits."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .diffusion import SaturatingFlux
from .errors import DomainError, RegimeError, WindowError
from .profiles import (
    WaveProfile,
    bistable_front,
    energy,
    inviscid_front,
    monostable_front,
)
from .reaction import BistableReaction
from .shooting import critical_speed_bistable, monostable_speed_closed_form

MONOSTABLE = "monostable"
BISTABLE = "bistable"

SUP_OUTSIDE_I0 = "sup_outside_I0"
PAIRING = "distributional_pairing"
SPEED = "speed"
ENERGY_IDENTITY = "energy_identity"

MONOSTABLE_GRID = (0.5, 0.25, 0.125, 0.05, 0.01)
BISTABLE_GRID = (0.1, 0.01, 0.008, 0.005, 0.001, 0.0005)
FIXED_SPEED_GRID = (0.04, 0.02, 0.01, 0.005)
DEFAULT_I0 = 0.5
SUP_POINTS = 2001
MONOTONE_SLACK = 0.1


@dataclass
class ConvergenceReport:
    eps_grid: list[float]
    metric_name: str
    values: list[float]
    limit_target: str
    i0_halfwidth: float | None = None
    extra: dict = field(default_factory=dict)
    profiles: list[WaveProfile] | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.eps_grid = [float(e) for e in self.eps_grid]
        self.values = [float(v) for v in self.values]
        if len(self.eps_grid) != len(self.values):
            raise DomainError("eps_grid and values differ in length")
        if not all(math.isfinite(v) for v in self.values):
            raise DomainError(f"non-finite value in report {self.metric_name}: {self.values}")
        if any(b >= a for a, b in zip(self.eps_grid, self.eps_grid[1:])):
            raise DomainError("eps_grid must be strictly decreasing")

    def is_monotone(self, slack: float = MONOTONE_SLACK, strict: bool = False) -> bool:
        """Nonincreasing from the second grid point on, up to a relative slack.

        With ``strict`` every step must decrease and no slack applies.
        """
        vals = self.values
        if strict:
            return all(b < a for a, b in zip(vals, vals[1:]))
        return all(b <= a * (1.0 + slack) for a, b in zip(vals[1:], vals[2:]))

    def header(self) -> dict:
        return {
            "metric": self.metric_name,
            "target": self.limit_target,
            "eps_grid": self.eps_grid,
            "i0_halfwidth": self.i0_halfwidth,
            **{k: v for k, v in self.extra.items() if _jsonable(v)},
        }

    def to_csv(self, path) -> None:
        """``# {json header}`` then ``eps,value`` rows at 17 significant digits."""
        lines = ["# " + json.dumps(self.header(), sort_keys=True), "eps,value"]
        lines += [f"{e:.17g},{v:.17g}" for e, v in zip(self.eps_grid, self.values)]
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")


def _jsonable(v) -> bool:
    try:
        json.dumps(v)
    except TypeError:
        return False
    return True


def _descending(eps_grid) -> list[float]:
    grid = [float(e) for e in eps_grid]
    if not grid:
        raise DomainError("empty eps grid")
    if any(e <= 0.0 for e in grid):
        raise DomainError(f"eps must be positive, got {grid}")
    return sorted(set(grid), reverse=True)


# --- limit objects ----------------------------------------------------------


def step_function(reaction: BistableReaction, which: str) -> Callable[[np.ndarray], np.ndarray]:
    """H_alpha (alpha | 1) for monostable fronts, H_0 (0 | 1) for bistable ones."""
    low = reaction.alpha if which == MONOSTABLE else 0.0
    if which not in (MONOSTABLE, BISTABLE):
        raise DomainError(f"which must be {MONOSTABLE!r} or {BISTABLE!r}, got {which!r}")

    def H(z):
        return np.where(np.asarray(z, dtype=float) < 0.0, low, 1.0)

    return H


def outside_grid(profile: WaveProfile, i0: float, n: int = SUP_POINTS) -> np.ndarray:
    """n points on the profile window with |z| >= i0, including z = -i0 and z = i0."""
    lo, hi = profile.window
    n_left = n // 2
    parts = []
    if lo <= -i0:
        parts.append(np.linspace(lo, -i0, n_left))
    if hi >= i0:
        parts.append(np.linspace(i0, hi, n - n_left))
    if not parts:
        raise WindowError(f"profile window [{lo:.3g}, {hi:.3g}] lies inside |z| < {i0}")
    return np.concatenate(parts)


def sup_outside(profile: WaveProfile, target: Callable, i0: float, n: int = SUP_POINTS) -> float:
    if not i0 > 0.0:
        raise DomainError(f"i0_halfwidth must be positive, got {i0}")
    z = outside_grid(profile, i0, n)
    return float(np.max(np.abs(profile.v_at(z) - target(z))))


# --- test functions --------------------------------------------------------


@dataclass(frozen=True)
class TestFunction:
    """A smooth compactly supported psi with its derivative."""

    value: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    support: tuple[float, float]

    __test__ = False  # not a pytest class

    def __call__(self, z):
        return self.value(z)

    def combine(self, a: float, other: "TestFunction", b: float) -> "TestFunction":
        """a * self + b * other."""
        lo = min(self.support[0], other.support[0])
        hi = max(self.support[1], other.support[1])
        return TestFunction(
            value=lambda z: a * self.value(z) + b * other.value(z),
            derivative=lambda z: a * self.derivative(z) + b * other.derivative(z),
            support=(lo, hi),
        )


def bump(center: float = 0.0, width: float = 1.0) -> TestFunction:
    """psi(z) = exp(1 / (((z - center) / width)^2 - 1)) on the open support, else 0."""
    if not width > 0.0:
        raise DomainError(f"bump width must be positive, got {width}")

    def _x(z):
        return (np.asarray(z, dtype=float) - center) / width

    def value(z):
        x = _x(z)
        inside = np.abs(x) < 1.0
        xs = np.where(inside, x, 0.0)
        return np.where(inside, np.exp(1.0 / (xs * xs - 1.0)), 0.0)

    def derivative(z):
        x = _x(z)
        inside = np.abs(x) < 1.0
        xs = np.where(inside, x, 0.0)
        d = xs * xs - 1.0
        return np.where(inside, np.exp(1.0 / d) * (-2.0 * xs) / (d * d) / width, 0.0)

    return TestFunction(value, derivative, (center - width, center + width))


def distributional_pairing(profile: WaveProfile, test_bump: TestFunction | None = None, n: int = 20001) -> float:
    """-int V psi' dz, i.e. the action of V' on psi.

    V is the piecewise-linear interpolant of the samples; the trapezoid grid
    contains every sample inside the support, so the only error is the
    curvature of psi between grid points.
    """
    psi = bump() if test_bump is None else test_bump
    lo, hi = psi.support
    z_lo, z_hi = profile.window
    if lo < z_lo or hi > z_hi:
        raise WindowError(f"test support [{lo:.3g}, {hi:.3g}] exceeds profile window [{z_lo:.3g}, {z_hi:.3g}]")
    total = 0.0
    # integrate each side of a jump separately so the interpolant never bridges it
    cuts = [lo, hi]
    if profile.jump is not None and lo < 0.0 < hi:
        cuts = [lo, 0.0, hi]
    for a, b in zip(cuts[:-1], cuts[1:]):
        z = np.linspace(a, b, n)
        inner = []
        for p in profile.pieces:
            inner.append(p.z[(p.z > a) & (p.z < b)])
        z = np.union1d(z, np.concatenate(inner))
        v = _values_on(profile, z, left_of_jump=(b <= 0.0 and len(cuts) == 3))
        total += float(np.trapezoid(v * psi.derivative(z), z))
    return -total


def _values_on(profile: WaveProfile, z: np.ndarray, left_of_jump: bool) -> np.ndarray:
    if profile.jump is None:
        return profile.v_at(z)
    # one-sided values at the jump
    v = profile.v_at(z)
    at_zero = z == 0.0
    if np.any(at_zero):
        v = np.where(at_zero, profile.jump[0] if left_of_jump else profile.jump[1], v)
    return v


# --- experiments ------------------------------------------------------------


def fixed_speed_convergence(
    reaction: BistableReaction,
    flux: SaturatingFlux,
    c: float,
    eps_grid=FIXED_SPEED_GRID,
    z_grid=None,
) -> ConvergenceReport:
    """sup over z_grid of |v_{eps,c} - V_c| for the monostable front at a fixed speed c."""
    if not c > 0.0:
        raise DomainError(f"fixed-speed convergence needs c > 0, got {c}")
    grid = _descending(eps_grid)
    for eps in grid:
        c_plus = monostable_speed_closed_form(reaction, flux, eps)
        if c < c_plus:
            raise RegimeError(f"c = {c:.6g} is below the minimal speed {c_plus:.6g} at eps = {eps:.6g}")
    z = np.linspace(-5.0, 5.0, SUP_POINTS) if z_grid is None else np.atleast_1d(np.asarray(z_grid, dtype=float))
    limit = inviscid_front(reaction, c)
    values, energies, profiles = [], [], []
    for eps in grid:
        prof = monostable_front(reaction, flux, eps, c=c)
        values.append(float(np.max(np.abs(prof.v_at(z) - limit.v_at(z)))))
        energies.append(energy(prof))
        profiles.append(prof)
    gap = float(reaction.F(1.0) - reaction.F(reaction.alpha))
    return ConvergenceReport(
        eps_grid=grid,
        metric_name=SUP_OUTSIDE_I0 if z_grid is None else "sup_on_grid",
        values=values,
        limit_target=f"inviscid front V_c, c = {c:.17g}",
        extra={"c": c, "energy": energies, "energy_target": gap},
        profiles=profiles,
    )


def energy_identity(
    reaction: BistableReaction, flux: SaturatingFlux, eps: float, speeds
) -> dict[float, float]:
    """c * int (v')^2 for monostable fronts at each speed (target F(1) - F(alpha))."""
    return {float(c): energy(monostable_front(reaction, flux, eps, c=float(c))) for c in speeds}


def critical_front(reaction: BistableReaction, flux: SaturatingFlux, eps: float, which: str) -> WaveProfile:
    if which == MONOSTABLE:
        return monostable_front(reaction, flux, eps)
    if which == BISTABLE:
        return bistable_front(reaction, flux, eps)
    raise DomainError(f"which must be {MONOSTABLE!r} or {BISTABLE!r}, got {which!r}")


def critical_front_convergence(
    reaction: BistableReaction,
    flux: SaturatingFlux,
    which: str,
    eps_grid=None,
    i0_halfwidth: float = DEFAULT_I0,
    n: int = SUP_POINTS,
) -> ConvergenceReport:
    """sup |V_eps - H| over |z| >= i0_halfwidth along an eps grid."""
    if not i0_halfwidth > 0.0:
        raise DomainError(f"i0_halfwidth must be positive, got {i0_halfwidth}")
    if eps_grid is None:
        eps_grid = MONOSTABLE_GRID if which == MONOSTABLE else BISTABLE_GRID
    grid = _descending(eps_grid)
    H = step_function(reaction, which)
    profiles = [critical_front(reaction, flux, eps, which) for eps in grid]
    values = [sup_outside(p, H, i0_halfwidth, n) for p in profiles]
    target = "H_alpha" if which == MONOSTABLE else "H_0"
    return ConvergenceReport(
        eps_grid=grid,
        metric_name=SUP_OUTSIDE_I0,
        values=values,
        limit_target=target,
        i0_halfwidth=i0_halfwidth,
        extra={"which": which, "speeds": [p.speed_c for p in profiles], "kinds": [p.kind for p in profiles]},
        profiles=profiles,
    )


def pairing_report(
    reaction: BistableReaction,
    flux: SaturatingFlux,
    which: str,
    eps_grid=None,
    test_bump: TestFunction | None = None,
    profiles: list[WaveProfile] | None = None,
) -> ConvergenceReport:
    """Pairings of critical fronts with a bump; the limit is (1 - alpha) psi(0) or psi(0)."""
    psi = bump() if test_bump is None else test_bump
    if eps_grid is None:
        eps_grid = MONOSTABLE_GRID if which == MONOSTABLE else BISTABLE_GRID
    grid = _descending(eps_grid)
    if profiles is None:
        profiles = [critical_front(reaction, flux, eps, which) for eps in grid]
    values = [distributional_pairing(p, psi) for p in profiles]
    weight = 1.0 - reaction.alpha if which == MONOSTABLE else 1.0
    limit = weight * float(psi(0.0))
    return ConvergenceReport(
        eps_grid=grid,
        metric_name=PAIRING,
        values=values,
        limit_target=f"{weight:.17g} * psi(0)",
        extra={"which": which, "limit_value": limit},
        profiles=profiles,
    )


def speed_sweep(
    reaction: BistableReaction, flux: SaturatingFlux, eps_grid
) -> tuple[ConvergenceReport, ConvergenceReport]:
    """c*(eps) and c+(eps) along a grid above the threshold.

    Property flags (monotone c*, sqrt(eps) scaling of c+, c* small at the
    left edge) are recorded in ``extra`` rather than raised.
    """
    grid = _descending(eps_grid)
    stars = [critical_speed_bistable(reaction, flux, eps) for eps in grid]
    c_star = [s.value for s in stars]
    c_plus = [monostable_speed_closed_form(reaction, flux, eps) for eps in grid]
    ratio = [cp / math.sqrt(eps) for cp, eps in zip(c_plus, grid)]
    positive = [c for c in c_star if c > 0.0]
    star_report = ConvergenceReport(
        eps_grid=grid,
        metric_name=SPEED,
        values=c_star,
        limit_target="0 at the threshold",
        extra={
            "which": BISTABLE,
            "regimes": [s.regime for s in stars],
            "monotone": all(b < a for a, b in zip(c_star, c_star[1:]) if a > 0.0),
            "left_edge_ratio": (positive[-1] / positive[0]) if len(positive) > 1 else None,
        },
    )
    plus_report = ConvergenceReport(
        eps_grid=grid,
        metric_name=SPEED,
        values=c_plus,
        limit_target="2 sqrt(f'(alpha) eps)",
        extra={"which": MONOSTABLE, "sqrt_ratio": ratio, "sqrt_ratio_spread": max(ratio) - min(ratio)},
    )
    return star_report, plus_report
