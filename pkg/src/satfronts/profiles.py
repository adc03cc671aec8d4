"""Wave profiles z -> v(z) rebuilt from reduced trajectories y(v).

Every branch is traced in an arclength-like parameter ``s`` with unit tangent
``(1, R) / sqrt(1 + R^2)``, ``R = R(y(v) / eps)``.  This stays regular both
where the profile turns vertical (y at the ceiling) and along the exponential
tails at the equilibria.  Samples are uniform in ``s`` so the second-order
residual can be checked with fixed finite-difference stencils.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from .diffusion import SaturatingFlux
from .errors import DomainError, RegimeError
from .reaction import BistableReaction
from .reduced_ode import (
    BACKWARD,
    BLOW_UP,
    DEFAULT_TOL,
    FORWARD,
    HIT_ZERO,
    ReducedField,
    ReducedTrajectory,
    Tolerances,
    shoot,
)
from .shooting import (
    DISCONTINUOUS_STEADY,
    BORDER_STEADY,
    approach_alpha,
    critical_speed_bistable,
    matched_bistable_speed,
    matching_point,
    monostable_speed_closed_form,
)

INCREASING = "increasing"
DECREASING = "decreasing"

REGULAR = "regular_front"
DISCONTINUOUS = "discontinuous_steady"
BORDER = "border_steady"
NONMONOTONE = "nonmonotone"
INVISCID = "inviscid"

Z_WINDOW = 50.0
END_TOL = 1e-8
DEFAULT_DS = 0.01
ALPHA_SWITCH = 1e-2
DEFAULT_LAYER = 2.0
# automatic step: pilot run, then fourth-order scaling toward the target residual
PILOT_DS = 0.04
RESIDUAL_TARGET = 1e-6
MIN_DS, MAX_DS = 1e-3, 0.1


@dataclass
class ProfilePiece:
    z: np.ndarray  # ascending
    v: np.ndarray
    monotonicity: str
    s: np.ndarray | None = None  # uniform parameter, same order as z
    n_series: tuple[int, int] = (0, 0)  # samples at each end added by local series

    def __post_init__(self):
        if self.z.size > 1 and np.any(np.diff(self.z) <= 0.0):
            raise ValueError("piece z-samples must be strictly increasing")


@dataclass
class WaveProfile:
    pieces: list[ProfilePiece]
    kind: str
    speed_c: float
    eps: float
    normalization: float
    jump: tuple[float, float] | None = None
    meta: dict = field(default_factory=dict)

    @property
    def z_range(self) -> tuple[float, float]:
        return min(p.z[0] for p in self.pieces), max(p.z[-1] for p in self.pieces)

    @property
    def window(self) -> tuple[float, float]:
        """Nominal z-window; beyond the samples v is held at its end values."""
        lo, hi = self.z_range
        w = self.meta.get("z_window")
        return (lo, hi) if w is None else (min(lo, -w), max(hi, w))

    def samples(self) -> tuple[np.ndarray, np.ndarray]:
        order = sorted(self.pieces, key=lambda p: p.z[0])
        return np.concatenate([p.z for p in order]), np.concatenate([p.v for p in order])

    def v_at(self, z):
        """Piecewise-linear evaluation; right-continuous at a jump, flat beyond the window."""
        z_arr = np.asarray(z, dtype=float)
        order = sorted(self.pieces, key=lambda p: p.z[0])
        out = np.full(z_arr.shape, np.nan)
        for p in order:
            inside = (z_arr >= p.z[0]) & (z_arr <= p.z[-1])
            out[inside] = np.interp(z_arr[inside], p.z, p.v)
        lo, hi = order[0], order[-1]
        out[z_arr < lo.z[0]] = lo.v[0]
        out[z_arr > hi.z[-1]] = hi.v[-1]
        gaps = np.isnan(out)
        if np.any(gaps):
            zs, vs = self.samples()
            out[gaps] = np.interp(z_arr[gaps], zs, vs)
        return float(out) if out.ndim == 0 else out

    def to_csv(self, path: str | Path, reaction: BistableReaction | None = None,
               flux: SaturatingFlux | None = None) -> None:
        """CSV of the samples plus a JSON sidecar; residual statistics need reaction and flux."""
        path = Path(path)
        rows = ["z,v,piece_index,monotonicity"]
        for k, p in enumerate(self.pieces):
            rows.extend(f"{a:.17g},{b:.17g},{k},{p.monotonicity}" for a, b in zip(p.z, p.v))
        path.write_text("\n".join(rows) + "\n")
        meta = {
            "kind": self.kind,
            "jump": list(self.jump) if self.jump else None,
            "speed": self.speed_c,
            "eps": self.eps,
            "normalization": self.normalization,
            **self.meta,
        }
        if reaction is not None and flux is not None:
            r = np.abs(residual(self, reaction, flux))
            meta["residual"] = {
                "max": float(r.max()) if r.size else None,
                "rms": float(np.sqrt(np.mean(r * r))) if r.size else None,
                "count": int(r.size),
            }
        path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


# --- branch tracing -------------------------------------------------------


def _trace_rtol(tol: Tolerances) -> float:
    # near the double-precision limit: second differences amplify tracing noise by 1/ds^2
    return max(tol.rtol * 1e-4, 2.5e-14)


def _tangent(flux: SaturatingFlux, eps: float):
    """(dz/ds, |dv/ds|) as a function of y."""
    M0 = flux.M0
    if flux.name == "mean_curvature":

        def tangent(y):
            u = min(max(y / eps, 0.0), 1.0)
            return 1.0 - u, math.sqrt(u * (2.0 - u))

    else:

        def tangent(y):
            u = min(max(y / eps, 0.0), M0 * (1.0 - 1e-13))
            R = float(flux.R(u))
            n = math.sqrt(1.0 + R * R)
            return 1.0 / n, R / n

    return tangent


def _pace(field_: ReducedField | None, layer: float):
    """Parameter speed (1 + (layer * rate)^2)^(-1/4).

    ``rate = c R'(u) min(1, R(u)) / eps`` is the local contraction rate of the
    reduced equation; it is large only near the ceiling, where y(v) has thin
    layers, and stays finite at the equilibria.
    """
    if field_ is None or layer <= 0.0 or field_.speed_c == 0.0:
        return lambda v, y: 1.0
    eps, c, M0, flux = field_.eps, abs(field_.speed_c), field_.flux.M0, field_.flux
    mc = flux.name == "mean_curvature"

    def pace(v, y):
        u = min(max(y / eps, 0.0), M0 * (1.0 - 1e-13))
        if mc:
            # R' = 1 / ((1-u)^2 sqrt(u(2-u))) and R' R = 1 / (1-u)^3
            root = math.sqrt(u * (2.0 - u))
            if root >= 1.0 - u:
                rate = c / (eps * (1.0 - u) ** 2 * root)
            else:
                rate = c / (eps * (1.0 - u) ** 3)
        else:
            if u <= 0.0:
                rate = c * flux.kappa**2 / (2.0 * eps)
            else:
                R = float(flux.R(u))
                rate = c * min(1.0, R) / (R * float(flux.P_prime(R))) / eps
        return (1.0 + (layer * rate) ** 2) ** -0.25

    return pace


@dataclass
class _Trace:
    s: np.ndarray
    zeta: np.ndarray
    v: np.ndarray
    end_zeta: float
    end_v: float


def _trace(
    y_of_v: Callable[[float], float],
    v_start: float,
    target: float,
    sigma: int,
    eps: float,
    flux: SaturatingFlux,
    ds: float,
    stop_gap: float,
    zeta_limit: float,
    rtol: float,
    field_: ReducedField | None = None,
    layer: float = 0.0,
) -> _Trace:
    """Follow v from v_start toward target (direction sigma in both v and zeta).

    Stops when |v - target| <= stop_gap or |zeta| >= zeta_limit; samples at
    s = 0, ds, 2 ds, ...
    """
    tangent = _tangent(flux, eps)
    pace = _pace(field_, layer)

    def rhs(s, state):
        y = y_of_v(state[1])
        zs, vs = tangent(y)
        g = pace(state[1], y)
        return [sigma * g * zs, sigma * g * vs]

    def near_target(s, state):
        return sigma * (target - state[1]) - stop_gap

    near_target.terminal = True

    def window(s, state):
        return abs(state[0]) - zeta_limit

    window.terminal = True
    # the window or the target event ends the trace; s_max is only a backstop
    s_max = 1e6
    sol = integrate.solve_ivp(
        rhs, (0.0, s_max), [0.0, v_start], method="DOP853", rtol=rtol, atol=rtol * 1e-2,
        events=(near_target, window), dense_output=True, max_step=0.05,
    )
    s_end = float(sol.t[-1])
    n = int(math.floor(s_end / ds + 1e-9))
    s_grid = ds * np.arange(n + 1)
    zv = sol.sol(s_grid)
    return _Trace(s=s_grid, zeta=zv[0], v=zv[1], end_zeta=float(sol.y[0, -1]), end_v=float(sol.y[1, -1]))


def _series_tail(v_zero: float, v_from: float, zeta_from: float, sigma: int, curvature: float, ds: float):
    """Quadratic completion v - v_k = A (zeta - zeta_k)^2 into an interior zero of y."""
    dz = math.sqrt(abs(v_from - v_zero) / curvature)
    zeta_k = zeta_from + sigma * dz
    m = max(int(math.ceil(dz / ds)), 1)
    zeta = zeta_from + sigma * dz * np.arange(1, m + 1) / m
    v = v_zero - sigma * curvature * (zeta - zeta_k) ** 2
    return zeta, v, zeta_k


def _branch(
    y_of_v,
    lo: float,
    hi: float,
    v_mid: float,
    eps: float,
    flux: SaturatingFlux,
    ds: float,
    tol: Tolerances,
    ends: tuple[dict, dict],
    zeta_limit: float = Z_WINDOW,
    end_tol: float = END_TOL,
    field_: ReducedField | None = None,
    layer: float = 0.0,
):
    """Increasing branch v(zeta) on (lo, hi) with v(0) = v_mid.

    ``ends`` describes the lower and upper end: ``{"kind": "equilibrium"}``
    or ``{"kind": "zero", "a": |f(v_k)|}`` for an interior zero of y.
    Returns (zeta, v, s, n_series, zeta_lo, zeta_hi).
    """
    rtol = _trace_rtol(tol)
    parts = []
    zeta_ends = []
    n_series = []
    for sigma, target, end in ((-1, lo, ends[0]), (+1, hi, ends[1])):
        if end["kind"] == "zero":
            curvature = flux.kappa**2 * end["a"] / (4.0 * eps)
            gap = 1e-2 * (hi - lo)
            c_k = end.get("ck", 0.0)
            if c_k > 0.0:
                # keep the series start where the h^1.5 correction is still small
                gap = min(gap, 2.25e-4 * end["a"] * eps / c_k**2)
            tr = _trace(y_of_v, v_mid, target, sigma, eps, flux, ds, gap, math.inf, rtol, field_, layer)
            zt, vt, zk = _series_tail(target, tr.end_v, tr.end_zeta, sigma, curvature, ds)
            zeta = np.concatenate([tr.zeta, zt])
            v = np.concatenate([tr.v, vt])
            s = np.concatenate([tr.s, np.full(zt.size, np.nan)])
            zeta_ends.append(zk)
            n_series.append(zt.size)
        else:
            tr = _trace(y_of_v, v_mid, target, sigma, eps, flux, ds, end_tol, zeta_limit, rtol, field_, layer)
            zeta, v, s = tr.zeta, tr.v, tr.s
            zeta_ends.append(float(zeta[-1]))
            n_series.append(0)
        parts.append((zeta, v, s))
    (zl, vl, sl), (zr, vr, sr) = parts
    zeta = np.concatenate([zl[::-1], zr[1:]])
    v = np.concatenate([vl[::-1], vr[1:]])
    s = np.concatenate([-sl[::-1], sr[1:]])
    return zeta, v, s, tuple(n_series), zeta_ends[0], zeta_ends[1]


def _check_positive(y_of_v, lo, hi):
    grid = np.linspace(lo, hi, 2001)[1:-1]
    width = hi - lo
    grid = grid[(grid - lo > 1e-3 * width) & (hi - grid > 1e-3 * width)]
    vals = np.array([y_of_v(g) for g in grid])
    if np.any(vals <= 0.0):
        raise DomainError(f"trajectory vanishes inside ({lo}, {hi}) at v = {grid[np.argmin(vals)]:.6g}")


def _as_y(source) -> Callable[[float], float]:
    if isinstance(source, ReducedTrajectory):
        return lambda v: float(source.y_at(v))
    return source


def _reconstruct(y_of_v, eps, flux, q1, q2, speed_c, z_window, end_tol, ds, tol, v_mid, field_, layer):
    eq = {"kind": "equilibrium"}
    zeta, v, s, _, _, _ = _branch(
        y_of_v, q1, q2, v_mid, eps, flux, ds, tol, (eq, eq), z_window, end_tol, field_, layer
    )
    piece = ProfilePiece(z=zeta, v=v, monotonicity=INCREASING, s=s)
    return WaveProfile(
        pieces=[piece], kind=REGULAR, speed_c=speed_c, eps=eps, normalization=v_mid,
        meta={"ds": ds, "layer": layer, "q1": q1, "q2": q2, "z_window": z_window},
    )


def reconstruct_front(
    source,
    eps: float,
    flux: SaturatingFlux,
    q1: float,
    q2: float,
    speed_c: float = 0.0,
    z_window: float = Z_WINDOW,
    end_tol: float = END_TOL,
    ds: float | None = None,
    tol: Tolerances = DEFAULT_TOL,
    v_mid: float | None = None,
    field_: ReducedField | None = None,
    layer: float = DEFAULT_LAYER,
) -> WaveProfile:
    """Increasing front from a trajectory (or any callable y(v)) positive on (q1, q2).

    ``field_`` (taken from the trajectory when one is given) lets the sampling
    concentrate in the layers of y(v).  With a field and ``ds=None`` the step
    is chosen from a pilot run so the finite-difference residual lands near
    RESIDUAL_TARGET; the choice is recorded in ``meta["ds"]``.
    """
    if isinstance(source, ReducedTrajectory) and field_ is None:
        field_ = source.field
    y_of_v = _as_y(source)
    _check_positive(y_of_v, q1, q2)
    v_mid = 0.5 * (q1 + q2) if v_mid is None else v_mid
    args = (y_of_v, eps, flux, q1, q2, speed_c, z_window, end_tol)
    if ds is None and field_ is None:
        ds = DEFAULT_DS
    if ds is None:
        pilot = _reconstruct(*args, PILOT_DS, tol, v_mid, field_, layer)
        r0 = max_residual(pilot, field_.reaction, flux)
        ds = PILOT_DS * (RESIDUAL_TARGET / max(r0, 1e-300)) ** 0.25
        ds = float(min(max(ds, MIN_DS), MAX_DS))
    return _reconstruct(*args, ds, tol, v_mid, field_, layer)


# --- regular fronts -------------------------------------------------------


def monostable_y(reaction, flux, eps, c, tol: Tolerances = DEFAULT_TOL, end_tol: float = END_TOL):
    """y(v) on (alpha, 1): backward shot from 1, continued near alpha in log variables."""
    alpha = reaction.alpha
    fld = ReducedField(reaction, flux, eps, c)
    x_s = ALPHA_SWITCH
    traj = shoot(fld, 1.0, BACKWARD, alpha + x_s, tol)
    if traj.event.kind != "reached_endpoint":
        raise RegimeError(f"no alpha -> 1 front at c = {c:.6g} (shot ended with {traj.event.kind})")
    t_end = -math.log(end_tol) + 5.0
    tail = approach_alpha(fld, x_s, traj.event.y, t_end, dense=True)
    if tail.t[-1] < t_end - 1e-9:
        raise RegimeError(f"no alpha -> 1 front at c = {c:.6g} (trajectory misses alpha)")

    def y_of_v(v):
        x = v - alpha
        if x >= x_s:
            return float(traj.y_at(v))
        if x <= 0.0:
            return 0.0
        p = float(tail.sol(min(-math.log(x), t_end))[0])
        return p * p * x * x

    return y_of_v, traj


def monostable_front(
    reaction: BistableReaction,
    flux: SaturatingFlux,
    eps: float,
    c: float | None = None,
    ds: float | None = None,
    tol: Tolerances = DEFAULT_TOL,
    z_window: float = Z_WINDOW,
) -> WaveProfile:
    """alpha -> 1 front at speed c (default: the minimal speed), v(0) = (alpha + 1) / 2."""
    c_plus = monostable_speed_closed_form(reaction, flux, eps)
    c = c_plus if c is None else c
    if c < c_plus * (1.0 - 1e-12):
        raise RegimeError(f"c = {c:.6g} below the minimal speed {c_plus:.6g}")
    y_of_v, _ = monostable_y(reaction, flux, eps, c, tol)
    fld = ReducedField(reaction, flux, eps, c)
    prof = reconstruct_front(y_of_v, eps, flux, reaction.alpha, 1.0, c, z_window, END_TOL, ds, tol, field_=fld)
    prof.meta["which"] = "monostable"
    return prof


def bistable_y(reaction, flux, eps, c, tol: Tolerances = DEFAULT_TOL):
    """y(v) on (0, 1) from the forward shot below the matching point and the backward shot above."""
    fld = ReducedField(reaction, flux, eps, c)
    v_m = matching_point(reaction)
    fwd = shoot(fld, 0.0, FORWARD, v_m, tol)
    bwd = shoot(fld, 1.0, BACKWARD, v_m, tol)
    if fwd.event.kind == BLOW_UP or bwd.event.kind == BLOW_UP:
        raise RegimeError(f"half-shot blows up at c = {c:.6g}")
    if fwd.event.kind == HIT_ZERO or bwd.event.kind == HIT_ZERO:
        raise RegimeError(f"half-shot vanishes before the matching point at c = {c:.6g}")
    mismatch = float(fwd.y_at(v_m) - bwd.y_at(v_m))

    def y_of_v(v):
        return float(fwd.y_at(v)) if v <= v_m else float(bwd.y_at(v))

    return y_of_v, mismatch


def bistable_front(
    reaction: BistableReaction,
    flux: SaturatingFlux,
    eps: float,
    c: float | None = None,
    ds: float | None = None,
    tol: Tolerances = DEFAULT_TOL,
    z_window: float = Z_WINDOW,
) -> WaveProfile:
    """Critical 0 -> 1 front, or the steady state when eps is at or below the threshold."""
    if c is None:
        res = critical_speed_bistable(reaction, flux, eps, ode_tol=tol)
        if res.regime in (DISCONTINUOUS_STEADY, BORDER_STEADY):
            return build_discontinuous_steady(
                reaction, eps, flux, ds=DEFAULT_DS if ds is None else ds, tol=tol, z_window=z_window
            )
        c = matched_bistable_speed(reaction, flux, eps, res.bracket, tol)
    y_of_v, mismatch = bistable_y(reaction, flux, eps, c, tol)
    fld = ReducedField(reaction, flux, eps, c)
    prof = reconstruct_front(y_of_v, eps, flux, 0.0, 1.0, c, z_window, END_TOL, ds, tol, field_=fld)
    prof.meta.update({"which": "bistable", "mid_mismatch": mismatch})
    return prof


def critical_front(reaction, flux, eps, which: str, **kw) -> WaveProfile:
    if which == "monostable":
        return monostable_front(reaction, flux, eps, **kw)
    if which == "bistable":
        return bistable_front(reaction, flux, eps, **kw)
    raise ValueError(f"which must be 'monostable' or 'bistable', got {which!r}")


# --- steady states --------------------------------------------------------


def jump_endpoints(reaction: BistableReaction, level: float) -> tuple[float, float]:
    """(v_minus, v_plus) with F-(v_minus) = level = F+(v_plus)."""
    alpha = reaction.alpha
    if level > reaction.eps_bar + 1e-15:
        raise DomainError(f"level {level:.6g} exceeds the threshold {reaction.eps_bar:.6g}")
    if level >= reaction.eps_bar:
        v_minus = alpha
    else:
        v_minus = optimize.brentq(lambda v: reaction.F_minus(v) - level, 0.0, alpha, xtol=1e-15, rtol=1e-15)
    v_plus = optimize.brentq(lambda v: reaction.F_plus(v) - level, alpha, 1.0, xtol=1e-15, rtol=1e-15)
    return v_minus, v_plus


def build_discontinuous_steady(
    reaction: BistableReaction,
    eps: float,
    flux: SaturatingFlux,
    ds: float = DEFAULT_DS,
    tol: Tolerances = DEFAULT_TOL,
    z_window: float = Z_WINDOW,
) -> WaveProfile:
    """Zero-speed profile with a jump at z = 0 between the F-/F+ branches."""
    level = eps * flux.M0
    if level > reaction.eps_bar + 1e-9:
        raise DomainError(f"eps = {eps:.6g} is above the threshold; a regular front exists")
    level = min(level, reaction.eps_bar)
    v_minus, v_plus = jump_endpoints(reaction, level)
    rtol = _trace_rtol(tol)
    ceiling = eps * flux.M0

    def y_left(v):
        return min(float(reaction.F_minus(v)), ceiling)

    def y_right(v):
        return min(float(reaction.F_plus(v)), ceiling)

    left = _trace(y_left, v_minus, 0.0, -1, eps, flux, ds, END_TOL, z_window, rtol)
    right = _trace(y_right, v_plus, 1.0, +1, eps, flux, ds, END_TOL, z_window, rtol)
    pieces = [
        ProfilePiece(z=left.zeta[::-1], v=left.v[::-1], monotonicity=INCREASING, s=-left.s[::-1]),
        ProfilePiece(z=right.zeta, v=right.v, monotonicity=INCREASING, s=right.s),
    ]
    border = abs(eps - reaction.eps_bar) <= 1e-9
    return WaveProfile(
        pieces=pieces, kind=BORDER if border else DISCONTINUOUS, speed_c=0.0, eps=eps,
        normalization=0.0, jump=(v_minus, v_plus), meta={"ds": ds, "which": "bistable", "z_window": z_window},
    )


# --- nonmonotone waves ----------------------------------------------------


@dataclass
class _GluedPiece:
    traj: ReducedTrajectory
    lo: float
    hi: float
    lo_end: dict
    hi_end: dict
    monotonicity: str
    speed: float
    junction: float  # end shared with the previous piece (the start anchor for the first)


def _zero_end(reaction, v_k, c):
    return {"kind": "zero", "a": abs(float(reaction.f(v_k))), "ck": abs(c)}


def glue_nonmonotone(
    reaction: BistableReaction,
    flux: SaturatingFlux,
    eps: float,
    c: float,
    start: str = "from_one",
    max_turns: int = 6,
    ds: float = DEFAULT_DS,
    tol: Tolerances = DEFAULT_TOL,
    tail: float = Z_WINDOW,
    equilibrium_snap: float = 1e-3,
) -> WaveProfile:
    """Oscillating wave built by alternating shots with sign-flipped speed.

    Pieces meet at interior zeros of y, where v' = 0.  The first junction sits
    at z = 0.  When a zero-speed piece runs into an equilibrium, the next shot
    restarts from that equilibrium.

    ``from_one`` needs c in (c*, c+).  For ``from_zero`` c is a magnitude in
    [0, c+): the wave leaving 0 moves the other way, so the first piece is
    shot with speed -c and the profile records speed_c = -c.
    """
    if start == "from_one":
        anchor, direction, mono, speed = 1.0, BACKWARD, INCREASING, c
    elif start == "from_zero":
        anchor, direction, mono, speed = 0.0, FORWARD, INCREASING, -c
    else:
        raise ValueError("start must be 'from_one' or 'from_zero'")
    base = ReducedField(reaction, flux, eps, speed)
    wave_speed = speed
    zeros: list[float] = []
    glued: list[_GluedPiece] = []
    anchor_end = {"kind": "equilibrium"}
    for _ in range(max_turns + 1):
        fld = base.with_speed(speed)
        stop = 0.0 if direction == BACKWARD else 1.0
        traj = shoot(fld, anchor, direction, stop, tol)
        ev = traj.event
        if ev.kind == BLOW_UP:
            raise RegimeError(f"piece from v = {anchor:.6g} blows up; c = {c:.6g} is not admissible")
        equilibrium = None
        for q in (0.0, 1.0):
            if abs(ev.v - q) <= equilibrium_snap and abs(ev.y) <= equilibrium_snap**2 * eps * flux.M0:
                equilibrium = q
        if equilibrium is not None:
            # rebuild the piece from the equilibrium so its tail is seeded properly
            back = BACKWARD if direction == FORWARD else FORWARD
            traj = shoot(fld, equilibrium, back, anchor, tol)
            far_end = {"kind": "equilibrium"}
            near_end = anchor_end
            lo, hi = sorted((equilibrium, anchor))
            ends = (far_end, near_end) if equilibrium < anchor else (near_end, far_end)
            glued.append(_GluedPiece(traj, lo, hi, ends[0], ends[1], mono, speed, anchor))
            zeros.append(equilibrium)
            anchor, anchor_end = equilibrium, {"kind": "equilibrium"}
            # the shot direction from the equilibrium is toward the interior
            direction = FORWARD if equilibrium == 0.0 else BACKWARD
        elif ev.kind == HIT_ZERO:
            v_k = ev.v
            end = _zero_end(reaction, v_k, speed)
            lo, hi = sorted((anchor, v_k))
            ends = (anchor_end, end) if anchor < v_k else (end, anchor_end)
            glued.append(_GluedPiece(traj, lo, hi, ends[0], ends[1], mono, speed, anchor))
            zeros.append(v_k)
            anchor, anchor_end = v_k, _zero_end(reaction, v_k, -speed)
            direction = FORWARD if direction == BACKWARD else BACKWARD
        else:
            raise RegimeError(f"piece from v = {anchor:.6g} reaches v = {ev.v:.6g} without vanishing")
        speed = -speed
        mono = DECREASING if mono == INCREASING else INCREASING
        if abs(zeros[-1] - reaction.alpha) < 1e-9:
            break

    pieces = []
    junction_slopes = []
    # glue left-to-right along the chain: each piece shares one junction with the previous
    z_join = 0.0
    for idx, gp in enumerate(glued):
        def y_of_v(v, traj=gp.traj):
            return float(traj.y_at(v))

        zeta, v, s, n_series, zeta_lo, zeta_hi = _branch(
            y_of_v, gp.lo, gp.hi, 0.5 * (gp.lo + gp.hi), eps, flux, ds, tol, (gp.lo_end, gp.hi_end), tail
        )
        # the junction shared with the previous piece is at the shot's anchor
        zeta_anchor = zeta_lo if gp.junction == gp.lo else zeta_hi
        zeta_far = zeta_hi if zeta_anchor == zeta_lo else zeta_lo
        if idx == 0:
            # first junction (the first zero) at z = 0
            zeta_ref = zeta_far
        else:
            zeta_ref = zeta_anchor
        sign = 1.0 if gp.monotonicity == INCREASING else -1.0
        z = sign * (zeta - zeta_ref) + z_join
        if idx == 0:
            z_next = z_join
        else:
            z_next = sign * (zeta_far - zeta_ref) + z_join
        order = np.argsort(z)
        pieces.append(ProfilePiece(z=z[order], v=v[order], monotonicity=gp.monotonicity, s=s[order],
                                   n_series=n_series))
        z_join = z_next
        for end_v in (gp.lo, gp.hi):
            if end_v not in (0.0, 1.0):
                y_end = float(gp.traj.y_at(end_v))
                junction_slopes.append(float(flux.R(min(y_end / eps, flux.M0 * (1 - 1e-15)))))
    return WaveProfile(
        pieces=pieces, kind=NONMONOTONE, speed_c=wave_speed, eps=eps, normalization=zeros[0] if zeros else float("nan"),
        meta={"zeros": zeros, "junction_slopes": junction_slopes, "start": start, "ds": ds, "z_window": tail},
    )


# --- inviscid fronts ------------------------------------------------------


def inviscid_front(
    reaction: BistableReaction,
    c: float,
    q1: float | None = None,
    q2: float = 1.0,
    end_tol: float = END_TOL,
    n: int = 4001,
    z_window: float = Z_WINDOW,
) -> WaveProfile:
    """Profile of c v' = f(v) from q1 (default alpha) to q2, v(0) = (q1 + q2) / 2."""
    if not c > 0.0:
        raise DomainError(f"inviscid front needs c > 0, got {c}")
    q1 = reaction.alpha if q1 is None else q1
    mid = 0.5 * (q1 + q2)
    # logit grid: z is close to linear in it near both ends
    L = math.log((q2 - q1) / end_tol)
    xi = np.linspace(-L, L, n)
    v = q1 + (q2 - q1) / (1.0 + np.exp(-xi))
    v = np.union1d(v, [mid])

    def dz(v0, v1):
        return c * integrate.quad(lambda s: 1.0 / float(reaction.f(s)), v0, v1, epsabs=1e-14, epsrel=1e-12,
                                  limit=200)[0]

    i_mid = int(np.searchsorted(v, mid))
    z = np.zeros_like(v)
    for i in range(i_mid + 1, v.size):
        z[i] = z[i - 1] + dz(v[i - 1], v[i])
    for i in range(i_mid - 1, -1, -1):
        z[i] = z[i + 1] + dz(v[i + 1], v[i])
    keep = np.abs(z) <= z_window
    piece = ProfilePiece(z=z[keep], v=v[keep], monotonicity=INCREASING)
    return WaveProfile(pieces=[piece], kind=INVISCID, speed_c=c, eps=0.0, normalization=mid,
                       meta={"z_window": z_window})


# --- diagnostics ----------------------------------------------------------


def _d5(f: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order central first derivative; NaN on the two outer samples at each side."""
    out = np.full_like(f, np.nan)
    out[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    return out


def _d5_2(f: np.ndarray, h: float) -> np.ndarray:
    out = np.full_like(f, np.nan)
    out[2:-2] = (-f[:-4] + 16.0 * f[1:-3] - 30.0 * f[2:-2] + 16.0 * f[3:-1] - f[4:]) / (12.0 * h * h)
    return out


def residual(profile: WaveProfile, reaction: BistableReaction, flux: SaturatingFlux) -> np.ndarray:
    """eps (P(v'))' - c v' + f(v) on the uniformly sampled part of each piece.

    For the mean-curvature flux (P(v'))' is the signed curvature of the graph,
    evaluated from first and second differences in the parameter.
    """
    out = []
    for p in profile.pieces:
        if p.s is None:
            continue
        good = np.isfinite(p.s)
        s, z, v = p.s[good], p.z[good], p.v[good]
        if s.size < 9:
            continue
        h = float(np.median(np.diff(s)))
        zs, vs = _d5(z, h), _d5(v, h)
        with np.errstate(invalid="ignore", divide="ignore"):
            if flux.name == "mean_curvature":
                zss, vss = _d5_2(z, h), _d5_2(v, h)
                # graph curvature: orient the parameter so z increases
                div = np.sign(zs) * (zs * vss - vs * zss) / np.hypot(zs, vs) ** 3
            else:
                w = np.asarray(flux.P(vs / zs), dtype=float)
                div = _d5(w, h) / zs
            r = profile.eps * div - profile.speed_c * vs / zs + np.asarray(reaction.f(v), dtype=float)
        out.append(r[np.isfinite(r)])
    return np.concatenate(out) if out else np.array([])


def max_residual(profile: WaveProfile, reaction: BistableReaction, flux: SaturatingFlux) -> float:
    return float(np.max(np.abs(residual(profile, reaction, flux))))


def energy(profile: WaveProfile) -> float:
    """c * int (v')^2 dz, integrated in the uniform parameter."""
    total = 0.0
    for p in profile.pieces:
        good = np.isfinite(p.s) if p.s is not None else None
        if good is None or np.count_nonzero(good) < 9:
            zs, vs = p.z, p.v
            total += float(integrate.trapezoid(np.gradient(vs, zs) ** 2, zs))
            continue
        s, z, v = p.s[good], p.z[good], p.v[good]
        h = float(np.median(np.diff(s)))
        zs, vs = np.gradient(z, h, edge_order=2), np.gradient(v, h, edge_order=2)
        total += float(integrate.simpson(vs * vs / zs, x=s))
    return profile.speed_c * total


def slope_to_y(profile: WaveProfile, flux: SaturatingFlux) -> tuple[np.ndarray, np.ndarray]:
    """(v, eps Q(v')) from the samples of the first piece, for round-trip checks."""
    p = profile.pieces[0]
    good = np.isfinite(p.s)
    s, z, v = p.s[good], p.z[good], p.v[good]
    h = float(np.median(np.diff(s)))
    vp = _d5(v, h) / _d5(z, h)
    ok = np.isfinite(vp)
    return v[ok], profile.eps * np.asarray(flux.Q(vp[ok]), dtype=float)
