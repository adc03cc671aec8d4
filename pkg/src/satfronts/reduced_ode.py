"""First-order reduction of the traveling-wave equation.

For an increasing profile ``v(z)`` the variable ``y(v) = eps * Q(v'(z(v)))``
obeys the scalar equation

    dy/dv = c * R(y / eps) - f(v),     0 <= y < eps * M0,

with ``y = 0`` at the ends of the monotone piece.  Decreasing pieces obey the
same equation with the sign of ``c`` flipped.  ``shoot`` integrates this
equation from a zero of ``y`` in either direction of ``v`` and stops at the
first of three events: ``y`` returns to zero, ``y`` reaches the singular
ceiling ``eps * M0``, or ``v`` reaches the requested endpoint.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import optimize
from scipy.integrate import DOP853, OdeSolution

from .diffusion import SaturatingFlux
from .errors import DomainError, SeedError, StepError
from .reaction import BistableReaction

FORWARD = "forward"
BACKWARD = "backward"

HIT_ZERO = "hit_zero"
BLOW_UP = "blow_up"
REACHED_ENDPOINT = "reached_endpoint"

BLOWUP_MARGIN = 1e-6
EQUILIBRIUM_TOL = 1e-12
EQUILIBRIUM_SEED_H = 1e-4


def _sign(direction: str) -> int:
    if direction == FORWARD:
        return 1
    if direction == BACKWARD:
        return -1
    raise ValueError(f"direction must be {FORWARD!r} or {BACKWARD!r}, got {direction!r}")


@dataclass(frozen=True)
class Tolerances:
    """Integrator tolerances; ``atol`` is measured in units of the ceiling eps*M0.

    Shots tighten the absolute tolerance further to ``rtol`` times the seed
    value, so the tiny-y start is resolved relatively.
    """

    atol: float = 1e-10
    rtol: float = 1e-10

    def halved(self) -> "Tolerances":
        return Tolerances(self.atol / 2.0, self.rtol / 2.0)


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class ReducedField:
    reaction: BistableReaction
    flux: SaturatingFlux
    eps: float
    speed_c: float

    def __post_init__(self):
        if not self.eps > 0.0:
            raise DomainError(f"eps must be positive, got {self.eps}")

    @property
    def ceiling(self) -> float:
        return self.eps * self.flux.M0

    @property
    def b_eps(self) -> float:
        """Speed in the rescaled equation (c / eps)."""
        return self.speed_c / self.eps

    def with_speed(self, c: float) -> "ReducedField":
        return ReducedField(self.reaction, self.flux, self.eps, c)

    def R_eps(self, y: float) -> float:
        """R(y/eps) extended oddly to y < 0 and clipped just below the ceiling.

        Only the integrator uses the extension; it lets a step straddle a zero
        of y so the crossing can be located on the dense output.
        """
        u = y / self.eps
        s = 1.0 if u >= 0.0 else -1.0
        u = min(abs(u), self.flux.M0 * (1.0 - 1e-15))
        if self.flux.name == "mean_curvature":
            return s * math.sqrt(u * (2.0 - u)) / (1.0 - u)
        return s * float(self.flux.R(u))

    def rhs(self, v: float, y: float) -> float:
        return self.speed_c * self.R_eps(y) - float(self.reaction.f(v))


def field_value(field_: ReducedField, v: float, y: float) -> float:
    """c R(y/eps) - f(v) on the admissible strip 0 <= y < eps*M0."""
    if y < 0.0 or y >= field_.ceiling:
        raise DomainError(f"y = {y} outside [0, {field_.ceiling})")
    return field_.speed_c * float(field_.flux.R(y / field_.eps)) - float(field_.reaction.f(v))


@dataclass(frozen=True)
class Seed:
    v_start: float
    y_start: float
    h: float
    kind: str  # "equilibrium" or "interior"
    gamma: float = 0.0  # y ~ gamma (v - q)^2 + delta (v - q)^3 at equilibria
    delta: float = 0.0
    a: float = 0.0  # y ~ a |v - q| + b |v - q|^1.5 at interior zeros
    b: float = 0.0

    def y_model(self, anchor: float, v):
        w = np.asarray(v, dtype=float) - anchor
        d = np.abs(w)
        if self.kind == "equilibrium":
            return (self.gamma + self.delta * w) * d * d
        return self.a * d + self.b * d**1.5


def seed_roots(field_: ReducedField, anchor: float, direction: str) -> tuple[float, list[float]]:
    """Discriminant and admissible roots of the local quadratic at an equilibrium.

    Substituting ``y = gamma (v - q)^2`` and ``R(y/eps) ~ kappa sqrt(y/eps)``
    gives ``2u^2 - s k u + f'(q) = 0`` for ``u = sqrt(gamma)``, with
    ``k = c kappa / sqrt(eps)`` and ``s = +1`` forward, ``-1`` backward.
    """
    s = _sign(direction)
    k = field_.speed_c * field_.flux.kappa / math.sqrt(field_.eps)
    fp = float(field_.reaction.f_prime(anchor))
    disc = k * k - 8.0 * fp
    if disc < 0.0:
        return disc, []
    sq = math.sqrt(disc)
    roots = sorted({(s * k - sq) / 4.0, (s * k + sq) / 4.0})
    return disc, [u for u in roots if u > 0.0]


def second_derivative(r, q: float, h: float = 1e-5) -> float:
    """f''(q) by differencing f' inside [0, 1]."""
    fp = r.f_prime
    if q - 2 * h < 0.0:
        return (-3.0 * fp(q) + 4.0 * fp(q + h) - fp(q + 2 * h)) / (2.0 * h)
    if q + 2 * h > 1.0:
        return (3.0 * fp(q) - 4.0 * fp(q - h) + fp(q - 2 * h)) / (2.0 * h)
    return (fp(q + h) - fp(q - h)) / (2.0 * h)


def seed_offset(field_: ReducedField, anchor: float, direction: str, h: float | None = None) -> Seed:
    """Start point just off a zero of y.

    At an equilibrium anchor the start is ``y = gamma h^2`` with gamma from the
    local quadratic; when both roots are admissible the smaller one is taken.
    At an interior zero (f(anchor) != 0) the start follows the series
    ``y = a h + b h^1.5`` of the non-Lipschitz square-root start.
    """
    s = _sign(direction)
    r = field_.reaction
    fq = float(r.f(anchor))
    if abs(fq) <= EQUILIBRIUM_TOL:
        disc, roots = seed_roots(field_, anchor, direction)
        if not roots:
            raise SeedError(
                f"no admissible seed at anchor {anchor} ({direction}): discriminant {disc:.6g}"
            )
        h = EQUILIBRIUM_SEED_H if h is None else h
        gamma = roots[0] ** 2
        # next order: 3 delta = s k delta / (2 sqrt(gamma)) - f''(q) / 2
        den = 4.0 - float(r.f_prime(anchor)) / gamma
        delta = -second_derivative(r, anchor) / den if abs(den) > 1e-8 else 0.0
        y0 = (gamma + delta * s * h) * h * h
        return Seed(anchor + s * h, y0, h, "equilibrium", gamma=gamma, delta=delta)

    a = -s * fq
    if a <= 0.0:
        raise SeedError(
            f"y cannot grow from the interior zero {anchor} going {direction} (f = {fq:.6g})"
        )
    if h is None:
        dist = min(abs(anchor), abs(anchor - r.alpha), abs(1.0 - anchor))
        h = min(1e-6, 1e-3 * dist)
    b = (2.0 / 3.0) * s * field_.speed_c * field_.flux.kappa * math.sqrt(a / field_.eps)
    y0 = a * h + b * h**1.5
    return Seed(anchor + s * h, max(y0, 0.0), h, "interior", a=a, b=b)


@dataclass(frozen=True)
class TerminalEvent:
    kind: str
    v: float
    y: float


@dataclass
class ReducedTrajectory:
    field: ReducedField
    anchor: float
    direction: str
    event: TerminalEvent
    seed: Seed
    v: np.ndarray
    y: np.ndarray
    tol: Tolerances = DEFAULT_TOL
    _dense: OdeSolution | None = field(default=None, repr=False)
    n_steps: int = 0

    @property
    def v_end(self) -> float:
        return self.event.v

    def covers(self, v: float) -> bool:
        lo, hi = sorted((self.anchor, self.event.v))
        return lo <= v <= hi

    def y_at(self, v):
        """y on the whole span from the anchor to the terminal event."""
        v_arr = np.asarray(v, dtype=float)
        s = _sign(self.direction)
        dist = s * (v_arr - self.anchor)
        near = dist < self.seed.h
        out = np.empty_like(v_arr)
        if np.any(near):
            out[near] = self.seed.y_model(self.anchor, v_arr[near])
        if np.any(~near):
            vv = np.clip(v_arr[~near], *sorted((self.seed.v_start, self.event.v)))
            out[~near] = np.atleast_2d(self._dense(vv))[0]
        out = np.maximum(out, 0.0)
        return float(out) if out.ndim == 0 else out

    def dydv_at(self, v):
        """dy/dv from the equation itself (not from differencing)."""
        v_arr = np.atleast_1d(np.asarray(v, dtype=float))
        yv = np.atleast_1d(self.y_at(v_arr))
        out = np.array([self.field.rhs(a, b) for a, b in zip(v_arr, yv)])
        return float(out[0]) if np.ndim(v) == 0 else out

    def metadata(self) -> dict:
        return {
            "anchor": self.anchor,
            "direction": self.direction,
            "event": self.event.kind,
            "event_location": self.event.v,
            "event_y": self.event.y,
            "eps": self.field.eps,
            "c": self.field.speed_c,
            "tolerances": {"atol": self.tol.atol, "rtol": self.tol.rtol},
        }

    def to_csv(self, path: str | Path) -> None:
        path = Path(path)
        lines = ["v,y"] + [f"{a:.17g},{b:.17g}" for a, b in zip(self.v, self.y)]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        path.with_suffix(".json").write_text(
            json.dumps(self.metadata(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


def shoot(
    field_: ReducedField,
    anchor: float,
    direction: str,
    stop_at: float,
    tol: Tolerances = DEFAULT_TOL,
    seed_h: float | None = None,
    samples_per_step: int = 4,
) -> ReducedTrajectory:
    """Integrate the reduced equation from a zero of y at ``anchor``."""
    s = _sign(direction)
    if not 0.0 <= anchor <= 1.0:
        raise DomainError(f"anchor {anchor} outside [0, 1]")
    if s * (stop_at - anchor) <= 0.0:
        raise DomainError(f"stop_at {stop_at} is not {direction} of anchor {anchor}")

    seed = seed_offset(field_, anchor, direction, seed_h)
    ceiling = field_.ceiling
    guard = (1.0 - BLOWUP_MARGIN) * ceiling

    if s * (stop_at - seed.v_start) <= 0.0:
        raise DomainError("stop_at lies inside the seed offset")

    def fun(v, y):
        return np.array([field_.rhs(v, y[0])])

    solver = DOP853(
        fun,
        seed.v_start,
        np.array([seed.y_start]),
        t_bound=stop_at,
        rtol=tol.rtol,
        # y starts many orders below the ceiling; keep it relatively accurate there
        atol=min(tol.atol * ceiling, tol.rtol * seed.y_start) if seed.y_start > 0.0 else tol.atol * ceiling,
    )

    ts = [seed.v_start]
    interps = []
    vs = [anchor, seed.v_start]
    ys = [0.0, seed.y_start]
    event = None
    n_steps = 0

    while event is None:
        v_old, y_old = solver.t, float(solver.y[0])
        slope = s * field_.rhs(v_old, y_old)
        if slope > 0.0:
            solver.max_step = max(0.25 * (ceiling - y_old) / slope, 1e-15)
        else:
            solver.max_step = np.inf
        solver.step()
        n_steps += 1
        if solver.status == "failed":
            if y_old >= (1.0 - 1e-3) * ceiling:
                event = TerminalEvent(BLOW_UP, v_old, y_old)
                break
            raise StepError(f"integrator failed at v = {v_old:.12g}, y = {y_old:.6g}")

        v_new, y_new = solver.t, float(solver.y[0])
        dense = solver.dense_output()

        def y_dense(v, dense=dense):
            return float(dense(v)[0])

        v_cut = None
        if y_new <= 0.0 < y_old:
            v_cut = optimize.brentq(y_dense, v_old, v_new, xtol=1e-15, rtol=1e-15)
            event = TerminalEvent(HIT_ZERO, v_cut, 0.0)
        elif y_new >= guard:
            v_cut = optimize.brentq(lambda v: y_dense(v) - guard, v_old, v_new, xtol=1e-15, rtol=1e-15)
            event = TerminalEvent(BLOW_UP, v_cut, guard)
        elif solver.status == "finished":
            event = TerminalEvent(REACHED_ENDPOINT, v_new, y_new)

        v_stop = v_new if v_cut is None else v_cut
        if v_stop != v_old:
            ts.append(v_stop)
            interps.append(dense)
            sub = np.linspace(v_old, v_stop, samples_per_step + 1)[1:]
            vs.extend(sub.tolist())
            ys.extend(float(dense(t)[0]) for t in sub)
        if event is not None:
            ys[-1] = event.y
            vs[-1] = event.v

    dense_sol = OdeSolution(np.array(ts), interps) if interps else None
    y_arr = np.maximum(np.array(ys), 0.0)
    return ReducedTrajectory(
        field=field_,
        anchor=anchor,
        direction=direction,
        event=event,
        seed=seed,
        v=np.array(vs),
        y=y_arr,
        tol=tol,
        _dense=dense_sol,
        n_steps=n_steps,
    )
