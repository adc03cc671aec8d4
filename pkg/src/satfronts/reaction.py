"""Bistable reaction terms and the scalars derived from them.

A reaction ``f`` on ``[0, 1]`` vanishes at ``0``, ``alpha`` and ``1``, is
negative on ``(0, alpha)``, positive on ``(alpha, 1)`` and has positive
total integral.  Everything the solvers need (primitives, the singular
threshold ``eps_bar``, the bounce point ``v_zero``) is computed once at
construction; instances are immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, ValidationError

Scalar = Callable[[float], float]

CLOSED_FORM_ZERO_TOL = 1e-10
TABLE_ZERO_TOL = 1e-6


def _extend_by_zero(g):
    """Wrap ``g`` so that it vanishes outside [0, 1]."""

    def wrapped(s):
        s_arr = np.asarray(s, dtype=float)
        inside = (s_arr >= 0.0) & (s_arr <= 1.0)
        out = np.where(inside, g(np.clip(s_arr, 0.0, 1.0)), 0.0)
        return float(out) if out.ndim == 0 else out

    return wrapped


@dataclass(frozen=True)
class BistableReaction:
    f: Scalar
    alpha: float
    f_prime_alpha: float
    lipschitz_l: float
    F: Scalar
    F_minus: Scalar
    F_plus: Scalar
    eps_bar: float
    v_zero: float
    total_integral: float
    f_prime: Scalar
    name: str = "reaction"
    params: dict = field(default_factory=dict, compare=False)

    def g(self, eps: float) -> Scalar:
        """The rescaled reaction f/eps (read-only view)."""
        return lambda s: self.f(s) / eps

    def to_config(self) -> dict:
        return {"type": self.name, **self.params}


def _check_equilibria(f, alpha, tol):
    for label, s in (("f(0)", 0.0), ("f(alpha)", alpha), ("f(1)", 1.0)):
        if abs(f(s)) > tol:
            raise ValidationError(f"bistable hypothesis: equilibrium clause violated: {label} = {f(s):.3e}")


def _lipschitz_constant(f, n=4001):
    s = np.linspace(0.0, 1.0, n)[1:-1]
    vals = f(s)
    return float(max(np.max(-vals / s), np.max(vals / (1.0 - s)), 0.0))


def build_cubic(a: float) -> BistableReaction:
    """Closed-form reaction f(s) = s(1-s)(s-a) for 0 < a < 1/2."""
    if not 0.0 < a < 0.5:
        raise DomainError(f"cubic parameter a must lie in (0, 1/2), got {a}")

    def f_raw(s):
        return s * (1.0 - s) * (s - a)

    def F_raw(s):
        return -a * s**2 / 2.0 + (1.0 + a) * s**3 / 3.0 - s**4 / 4.0

    def fp_raw(s):
        return -a + 2.0 * (1.0 + a) * s - 3.0 * s**2

    total = (1.0 - 2.0 * a) / 12.0
    F1 = F_raw(1.0)

    def F(s):
        s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
        out = F_raw(s)
        return float(out) if out.ndim == 0 else out

    def F_minus(s):
        return -F(s)

    def F_plus(s):
        # int_s^1 f, expanded in t = 1 - s so it stays accurate next to 1
        t = 1.0 - np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
        out = t * t * ((1.0 - a) / 2.0 - (2.0 - a) * t / 3.0 + t * t / 4.0)
        return float(out) if out.ndim == 0 else out

    # F(v) = v^2 (-a/2 + (1+a) v/3 - v^2/4); the bounce point is the smaller
    # root of 3v^2 - 4(1+a)v + 6a = 0.
    b = 4.0 * (1.0 + a)
    disc = b * b - 72.0 * a
    v_zero = (b - math.sqrt(disc)) / 6.0

    r = BistableReaction(
        f=_extend_by_zero(f_raw),
        alpha=a,
        f_prime_alpha=a * (1.0 - a),
        lipschitz_l=max(a, 1.0 - a),
        F=F,
        F_minus=F_minus,
        F_plus=F_plus,
        eps_bar=a**3 * (2.0 - a) / 12.0,
        v_zero=v_zero,
        total_integral=total,
        f_prime=_extend_by_zero(fp_raw),
        name="cubic",
        params={"a": a},
    )
    _check_equilibria(r.f, a, CLOSED_FORM_ZERO_TOL)
    return r


def _check_monotone_pattern(s, vals):
    """Decreasing, increasing, decreasing on the three pieces split at the extrema."""
    i_min = int(np.argmin(vals))
    i_max = int(np.argmax(vals))
    if not i_min < i_max:
        raise ValidationError("bistable hypothesis: sign pattern: minimum of f must precede its maximum")
    slack = TABLE_ZERO_TOL
    pieces = (
        ("[0, s_min]", vals[: i_min + 1], -1),
        ("[s_min, s_max]", vals[i_min : i_max + 1], +1),
        ("[s_max, 1]", vals[i_max:], -1),
    )
    for label, piece, sign in pieces:
        if np.any(sign * np.diff(piece) < -slack):
            raise ValidationError(f"monotonicity pattern violated on {label}")


def build_from_table(samples: Sequence[Sequence[float]], alpha: float) -> BistableReaction:
    """Reaction from tabulated ``(s, f(s))`` pairs via a monotone cubic interpolant."""
    data = np.asarray(samples, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2 or len(data) < 4:
        raise ValidationError("samples must be a list of at least four (s, f) pairs")
    data = data[np.argsort(data[:, 0])]
    s, vals = data[:, 0], data[:, 1]
    if abs(s[0]) > TABLE_ZERO_TOL or abs(s[-1] - 1.0) > TABLE_ZERO_TOL:
        raise ValidationError("bistable hypothesis: domain clause: samples must cover [0, 1]")
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"bistable hypothesis: alpha must lie in (0, 1), got {alpha}")
    if abs(vals[0]) > TABLE_ZERO_TOL or abs(vals[-1]) > TABLE_ZERO_TOL:
        raise ValidationError("bistable hypothesis: equilibrium clause violated: f(0) and f(1) must vanish")

    interior = (s > 0.0) & (s < 1.0) & (np.abs(s - alpha) > TABLE_ZERO_TOL)
    if np.any(vals[interior] * (s[interior] - alpha) <= 0.0):
        bad = s[interior][vals[interior] * (s[interior] - alpha) <= 0.0][0]
        raise ValidationError(
            f"bistable hypothesis: sign pattern violated: f(s)(s - alpha) > 0 fails at s = {bad:.6g}"
        )

    interp = PchipInterpolator(s, vals, extrapolate=False)
    deriv = interp.derivative()
    _check_equilibria(lambda x: float(interp(x)), alpha, TABLE_ZERO_TOL)
    _check_monotone_pattern(s, vals)

    def f_raw(x):
        return interp(x)

    f = _extend_by_zero(f_raw)

    antideriv = interp.antiderivative()
    total = float(antideriv(1.0))
    if not total > 0.0:
        raise ValidationError(f"bistable hypothesis: integral clause violated: int_0^1 f = {total:.6g} <= 0")

    def F(x):
        out = antideriv(np.clip(np.asarray(x, dtype=float), 0.0, 1.0))
        return float(out) if np.ndim(out) == 0 else out

    def F_minus(x):
        return -F(x)

    # primitive from the right end, free of cancellation next to 1
    antideriv_right = PchipInterpolator(1.0 - s[::-1], vals[::-1], extrapolate=False).antiderivative()

    def F_plus(x):
        out = antideriv_right(1.0 - np.clip(np.asarray(x, dtype=float), 0.0, 1.0))
        return float(out) if np.ndim(out) == 0 else out

    fpa = float(deriv(alpha))
    if not fpa > 0.0:
        raise ValidationError(f"bistable hypothesis: requires f'(alpha) > 0, got {fpa:.6g}")
    eps_bar = float(F_minus(alpha))
    v_zero = optimize.brentq(F, alpha, 1.0, xtol=1e-14, rtol=1e-14)

    return BistableReaction(
        f=f,
        alpha=float(alpha),
        f_prime_alpha=fpa,
        lipschitz_l=_lipschitz_constant(f),
        F=F,
        F_minus=F_minus,
        F_plus=F_plus,
        eps_bar=eps_bar,
        v_zero=float(v_zero),
        total_integral=total,
        f_prime=_extend_by_zero(lambda x: deriv(x)),
        name="table",
        params={"alpha": float(alpha), "samples": data.tolist()},
    )


def validate_ipof(r: BistableReaction, n: int = 100_001) -> tuple[bool, float, float]:
    """Check |f(s)| <= f'(alpha)|s - alpha| on a dense grid.

    Returns ``(holds, s_worst, ratio_worst)``; at ``s = alpha`` the ratio is
    taken as its limit 1.
    """
    s = np.linspace(0.0, 1.0, n)
    num = np.abs(np.asarray(r.f(s), dtype=float))
    den = r.f_prime_alpha * np.abs(s - r.alpha)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 1.0)
    i = int(np.argmax(ratio))
    return bool(ratio[i] <= 1.0 + 1e-12), float(s[i]), float(ratio[i])


def reflect(r: BistableReaction) -> BistableReaction:
    """Reaction k(v) = -f(1 - v) used to turn decreasing fronts into increasing ones.

    The result has alpha' = 1 - alpha and negative total integral, so it is
    not a valid bistable reaction for the 0 -> 1 problem; it only serves the
    alpha' -> 1 monostable computations.
    """
    def k(v):
        return -r.f(1.0 - np.asarray(v, dtype=float))

    def K(v):
        # int_0^v -f(1 - s) ds = -int_{1-v}^1 f
        return -r.F_plus(1.0 - np.asarray(v, dtype=float))

    return BistableReaction(
        f=k,
        alpha=1.0 - r.alpha,
        f_prime_alpha=float(r.f_prime(r.alpha)),
        lipschitz_l=r.lipschitz_l,
        F=K,
        F_minus=lambda v: r.F_plus(1.0 - np.asarray(v, dtype=float)),
        F_plus=lambda v: r.F_minus(1.0 - np.asarray(v, dtype=float)),
        eps_bar=float("nan"),
        v_zero=float("nan"),
        total_integral=-r.total_integral,
        f_prime=lambda v: r.f_prime(1.0 - np.asarray(v, dtype=float)),
        name=f"reflected_{r.name}",
        params=dict(r.params),
    )


def from_config(cfg: dict) -> BistableReaction:
    kind = cfg.get("type", "cubic")
    if kind == "cubic":
        return build_cubic(float(cfg.get("a", 0.4)))
    if kind == "table":
        return build_from_table(cfg["samples"], float(cfg["alpha"]))
    raise ValidationError(f"unknown reaction type {kind!r}")
