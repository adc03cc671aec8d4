"""Critical speeds of monotone fronts.

* ``c*`` (bistable, 0 -> 1): unique speed of the regular front, found by
  bisection on the outcome of the forward shot from 0.
* ``c+`` (monostable, alpha -> 1): minimal speed, ``2 sqrt(eps f'(alpha))``
  for the mean-curvature flux, checked empirically by backward shots from 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import optimize
from scipy.integrate import solve_ivp

from .diffusion import SaturatingFlux
from .errors import BracketError, IpofError
from .reaction import BistableReaction, validate_ipof
from .reduced_ode import (
    BACKWARD,
    BLOW_UP,
    DEFAULT_TOL,
    FORWARD,
    HIT_ZERO,
    ReducedField,
    Tolerances,
    second_derivative,
    shoot,
)

TOO_LOW = "too_low"
TOO_HIGH = "too_high"
CRITICAL = "critical"

REGULAR_FRONT = "regular_front"
BORDER_STEADY = "border_steady_state"
DISCONTINUOUS_STEADY = "discontinuous_steady_state"

BORDER_TOL = 1e-9
EVENT_TOL = 1e-14


@dataclass(frozen=True)
class SpeedResult:
    kind: str  # "bistable_star" | "monostable_plus"
    value: float
    bracket: tuple[float, float]
    regime: str
    iterations: int
    eps: float
    tol: float = 0.0

    def to_json(self) -> str:
        d = asdict(self)
        d["bracket"] = list(self.bracket)
        return json.dumps(d, indent=2, sort_keys=True)


def classify_bistable(field_: ReducedField, tol: Tolerances = DEFAULT_TOL) -> str:
    """Outcome of the forward shot from 0 at the field's speed."""
    traj = shoot(field_, 0.0, FORWARD, 1.0, tol)
    ev = traj.event
    if ev.kind == HIT_ZERO and ev.v < 1.0:
        return TOO_LOW
    if ev.kind == BLOW_UP:
        return TOO_HIGH
    if abs(ev.y) <= EVENT_TOL * field_.ceiling:
        return CRITICAL
    return TOO_HIGH


def monostable_speed_closed_form(reaction: BistableReaction, flux: SaturatingFlux, eps: float) -> float:
    """Discriminant-zero speed of the seed quadratic at alpha.

    ``2 sqrt(eps f'(alpha))`` for the mean-curvature flux (kappa = sqrt 2).
    """
    return math.sqrt(8.0 * eps * reaction.f_prime_alpha) / flux.kappa


def critical_speed_bistable(
    reaction: BistableReaction,
    flux: SaturatingFlux,
    eps: float,
    tol: float = 1e-7,
    ode_tol: Tolerances = DEFAULT_TOL,
    max_iter: int = 200,
    rel_tol: float = 1e-9,
) -> SpeedResult:
    """Bisection on the forward-shot outcome.

    The bracket is refined until it is below ``tol`` and also below
    ``rel_tol`` times the speed, since c* is tiny just above the threshold.
    """
    if abs(eps - reaction.eps_bar * flux.M0) <= BORDER_TOL:
        return SpeedResult("bistable_star", 0.0, (0.0, 0.0), BORDER_STEADY, 0, eps, tol)
    base = ReducedField(reaction, flux, eps, 0.0)
    at_zero = classify_bistable(base, ode_tol)
    if at_zero == TOO_HIGH:
        return SpeedResult("bistable_star", 0.0, (0.0, 0.0), DISCONTINUOUS_STEADY, 1, eps, tol)
    if at_zero == CRITICAL:
        return SpeedResult("bistable_star", 0.0, (0.0, 0.0), REGULAR_FRONT, 1, eps, tol)

    low = 0.0
    high = monostable_speed_closed_form(reaction, flux, eps)
    cap = 1e3 * (high + 1.0)
    iterations = 1
    while True:
        iterations += 1
        outcome = classify_bistable(base.with_speed(high), ode_tol)
        if outcome == TOO_HIGH:
            break
        if outcome == CRITICAL:
            return SpeedResult("bistable_star", high, (high, high), REGULAR_FRONT, iterations, eps, tol)
        low, high = high, 2.0 * high
        if high > cap:
            raise BracketError(f"no too-high speed below {cap:.3g} at eps = {eps}")

    while (high - low > tol or high - low > rel_tol * high) and iterations < max_iter:
        iterations += 1
        mid = 0.5 * (low + high)
        outcome = classify_bistable(base.with_speed(mid), ode_tol)
        if outcome == TOO_LOW:
            low = mid
        elif outcome == TOO_HIGH:
            high = mid
        else:
            low = high = mid
    return SpeedResult("bistable_star", 0.5 * (low + high), (low, high), REGULAR_FRONT, iterations, eps, tol)


def matching_point(reaction: BistableReaction) -> float:
    """Where the two half-shots are compared.

    Forward shots expand perturbations (dR/dy > 0) and become unreliable near
    the ceiling, which close to the threshold is approached just past alpha;
    matching below alpha keeps the forward part short and well conditioned.
    """
    return 0.5 * reaction.alpha


def _mismatch(base: ReducedField, c: float, v_m: float, tol: Tolerances) -> float:
    """y of the forward shot from 0 minus y of the backward shot from 1 at v_m."""
    fld = base.with_speed(c)
    fwd = shoot(fld, 0.0, FORWARD, v_m, tol)
    y_f = fld.ceiling if fwd.event.kind == BLOW_UP else fwd.y_at(v_m)
    bwd = shoot(fld, 1.0, BACKWARD, v_m, tol)
    y_b = 0.0 if bwd.event.kind == HIT_ZERO else bwd.y_at(v_m)
    return y_f - y_b


def matched_bistable_speed(
    reaction: BistableReaction,
    flux: SaturatingFlux,
    eps: float,
    bracket: tuple[float, float],
    tol: Tolerances = DEFAULT_TOL,
) -> float:
    """Refine c* inside a bisection bracket by matching the two half-shots.

    The mismatch is smooth and increasing in c, so the refined speed makes
    both halves of the front agree to integrator accuracy.
    """
    base = ReducedField(reaction, flux, eps, 0.0)
    v_m = matching_point(reaction)

    def m(c):
        return _mismatch(base, c, v_m, tol)

    lo, hi = bracket
    m_lo, m_hi = m(lo), m(hi)
    if m_lo == 0.0:
        return lo
    width = max(hi - lo, 1e-12 * max(hi, 1e-300))
    for _ in range(60):
        if m_lo * m_hi <= 0.0:
            break
        # the classification bracket can sit a hair off the matching root
        lo, hi = max(lo - width, 0.0), hi + width
        m_lo, m_hi = m(lo), m(hi)
        width *= 2.0
    else:
        raise BracketError("matching mismatch does not change sign")
    return optimize.brentq(m, lo, hi, xtol=1e-300, rtol=1e-14)


def approach_alpha(field_: ReducedField, x_switch: float, y_switch: float, t_end: float, dense: bool = False):
    """Continue a backward shot below ``v = alpha + x_switch`` in log variables.

    Solves for ``p = sqrt(y) / (v - alpha)`` in ``t = -ln(v - alpha)``.  Bounded
    ``p`` means the trajectory lands at alpha; the solution stops early if ``p``
    escapes (no landing) or collapses to 0.
    """
    reaction, flux, eps, c = field_.reaction, field_.flux, field_.eps, field_.speed_c
    alpha = reaction.alpha
    sq_eps = math.sqrt(eps)
    fpa = reaction.f_prime_alpha
    fpp = second_derivative(reaction, alpha)
    mc = flux.name == "mean_curvature"

    def R_over_sqrt(u):
        if mc:
            return math.sqrt(2.0 - u) / (1.0 - u)
        if u <= 0.0:
            return flux.kappa
        return float(flux.R(u)) / math.sqrt(u)

    def rhs(t, state):
        p = state[0]
        x = math.exp(-t)
        u = p * p * x * x / eps
        if u >= flux.M0:
            return [1e300]
        # f(alpha + x) / x loses ~eps_mach * alpha / x to cancellation; use Taylor below 1e-6
        reac = float(reaction.f(alpha + x)) / x if x > 1e-6 else fpa + 0.5 * fpp * x
        return [p - (c * p * R_over_sqrt(u) / sq_eps - reac) / (2.0 * p)]

    k = c * flux.kappa / sq_eps
    p_big = 100.0 * (1.0 + k + math.sqrt(abs(fpa)))

    def escape(t, state):
        return state[0] - p_big

    escape.terminal = True

    def collapse(t, state):
        return state[0] - 1e-12

    collapse.terminal = True
    p0 = math.sqrt(max(y_switch, 0.0)) / x_switch
    return solve_ivp(rhs, (-math.log(x_switch), t_end), [p0], method="DOP853", rtol=1e-11, atol=1e-14,
                     events=(escape, collapse), dense_output=dense)


def lands_at_alpha(
    reaction: BistableReaction,
    flux: SaturatingFlux,
    eps: float,
    c: float,
    tol: Tolerances = DEFAULT_TOL,
    switch_x: float = 1e-2,
    t_max: float = 600.0,
) -> bool:
    """Whether the backward shot from 1 at speed c reaches alpha with y -> 0.

    This replaces a threshold on y(alpha), which sits in the slow passage
    of the trajectory just below c+ and flags landing several percent early.
    """
    fld = ReducedField(reaction, flux, eps, c)
    traj = shoot(fld, 1.0, BACKWARD, reaction.alpha + switch_x, tol)
    if traj.event.kind == HIT_ZERO:
        return traj.event.v >= reaction.alpha
    sol = approach_alpha(fld, switch_x, traj.event.y, t_max)
    return sol.t_events[0].size == 0


def monostable_speed_by_shooting(
    reaction: BistableReaction,
    flux: SaturatingFlux,
    eps: float,
    rel_tol: float = 1e-5,
    tol: Tolerances = DEFAULT_TOL,
) -> SpeedResult:
    """Minimal speed for alpha -> 1 fronts by bisection on ``lands_at_alpha``."""
    low, high = 0.0, math.sqrt(eps)
    iterations = 0
    while not lands_at_alpha(reaction, flux, eps, high, tol):
        low, high = high, 2.0 * high
        iterations += 1
        if iterations > 60:
            raise BracketError("no landing speed found")
    while high - low > rel_tol * high:
        iterations += 1
        mid = 0.5 * (low + high)
        if lands_at_alpha(reaction, flux, eps, mid, tol):
            high = mid
        else:
            low = mid
    return SpeedResult("monostable_plus", 0.5 * (low + high), (low, high), REGULAR_FRONT, iterations, eps,
                       rel_tol)


def critical_speed_monostable(
    reaction: BistableReaction, flux: SaturatingFlux, eps: float, require_exact: bool = False
) -> SpeedResult:
    """Closed-form c+ with a collapsed bracket when |f(s)| <= f'(alpha)|s - alpha| holds.

    Otherwise the closed form is only the lower end of ``estimate_speed_bracket``
    and is reported as such, or IpofError is raised if ``require_exact``.
    """
    ok, s_worst, ratio = validate_ipof(reaction)
    value = monostable_speed_closed_form(reaction, flux, eps)
    if not ok:
        if require_exact:
            raise IpofError(
                f"linear control at alpha fails at s = {s_worst:.6g} (ratio {ratio:.6g}); "
                "only a bracket is available"
            )
        low, high = estimate_speed_bracket(reaction, flux, eps)
        return SpeedResult("monostable_plus", low, (low, high), REGULAR_FRONT, 0, eps)
    return SpeedResult("monostable_plus", value, (value, value), REGULAR_FRONT, 0, eps)


def _control_rhs(M, x):
    return M * x / np.sqrt(1.0 - min(M, 1.0) * x * x)


def estimate_speed_bracket(
    reaction: BistableReaction,
    flux: SaturatingFlux,
    eps: float,
    n_grid: int = 20_001,
    m_cap: float = 1e12,
) -> tuple[float, float]:
    """(lower, upper) bounds for c+ from f'(alpha) and the growth control on [alpha, 1]."""
    alpha = reaction.alpha
    s = np.linspace(alpha, 1.0, n_grid)[1:]
    x = s - alpha
    fs = np.asarray(reaction.f(s), dtype=float)
    scale = math.sqrt(2.0) / flux.kappa
    low = scale * 2.0 * math.sqrt(eps * reaction.f_prime_alpha)

    def holds(M):
        with np.errstate(invalid="ignore", divide="ignore"):
            return bool(np.all(fs <= _control_rhs(M, x) * (1.0 + 1e-12)))

    if not holds(m_cap):
        return low, math.inf
    lo, hi = 0.0, 1.0
    while not holds(hi):
        lo, hi = hi, 2.0 * hi
    while hi - lo > 1e-12 * hi:
        mid = 0.5 * (lo + hi)
        if holds(mid):
            hi = mid
        else:
            lo = mid
    return low, scale * 2.0 * math.sqrt(eps * hi)


def control_constant(reaction: BistableReaction, n_grid: int = 20_001) -> float:
    """Smallest M for which the growth control holds on the grid (inf if none)."""
    from .diffusion import mean_curvature_flux

    _, high = estimate_speed_bracket(reaction, mean_curvature_flux(), 1.0, n_grid)
    return (high / 2.0) ** 2
