"""Strongly saturating flux functions P and their derived pair (Q, R).

``Q`` is the primitive of ``s P'(s)`` with ``Q(0) = 0``; its range is the
bounded interval ``[0, M0)`` and ``R`` is its inverse, singular at ``M0``.
The reduced equation only ever sees ``R``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from .errors import DomainError, QuadratureError, ValidationError

# Gauss-Legendre nodes for panel integration of s P'(s).
_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


@dataclass(frozen=True)
class SaturatingFlux:
    name: str
    P: Callable
    P_prime: Callable
    Q: Callable
    R: Callable
    M0: float
    kappa: float  # R(y) ~ kappa * sqrt(y) as y -> 0
    params: dict = field(default_factory=dict, compare=False)

    def phi(self, s):
        s = np.abs(np.asarray(s, dtype=float))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(s > 0.0, self.P(np.where(s > 0.0, s, 1.0)) / np.where(s > 0.0, s, 1.0),
                           self.P_prime(0.0))
        return float(out) if out.ndim == 0 else out

    def R_scaled(self, y, eps):
        """R(y / eps) for y in [0, eps * M0)."""
        return self.R(np.asarray(y, dtype=float) / eps)

    def to_config(self) -> dict:
        return {"type": self.name, **self.params}


def _mc_P(s):
    s = np.asarray(s, dtype=float)
    out = s / np.sqrt(1.0 + s * s)
    return float(out) if out.ndim == 0 else out


def _mc_P_prime(s):
    s = np.asarray(s, dtype=float)
    out = (1.0 + s * s) ** -1.5
    return float(out) if out.ndim == 0 else out


def _mc_Q(t):
    t = np.asarray(t, dtype=float)
    # 1 - 1/sqrt(1+t^2) written to avoid cancellation for small t
    out = t * t / (np.sqrt(1.0 + t * t) * (1.0 + np.sqrt(1.0 + t * t)))
    return float(out) if out.ndim == 0 else out


def _mc_R(y):
    y = np.asarray(y, dtype=float)
    if np.any(y < 0.0) or np.any(y >= 1.0):
        raise DomainError("mean-curvature R is defined on [0, 1)")
    out = np.sqrt(y * (2.0 - y)) / (1.0 - y)
    return float(out) if out.ndim == 0 else out


def mean_curvature_flux() -> SaturatingFlux:
    """P(s) = s / sqrt(1 + s^2) with closed-form Q, R and M0 = 1."""
    return SaturatingFlux(
        name="mean_curvature",
        P=_mc_P,
        P_prime=_mc_P_prime,
        Q=_mc_Q,
        R=_mc_R,
        M0=1.0,
        kappa=math.sqrt(2.0),
    )


class _NumericPair:
    """Q on a cached logarithmic grid and R by bracketed inversion of Q."""

    def __init__(self, P_prime, t_min=1e-8, t_max=1e8, n=321):
        self.P_prime = P_prime
        self.grid = np.concatenate([[0.0], np.logspace(math.log10(t_min), math.log10(t_max), n)])
        panels = np.array([self._panel(a, b) for a, b in zip(self.grid[:-1], self.grid[1:])])
        self.cum = np.concatenate([[0.0], np.cumsum(panels)])
        self.M0 = self._limit()

    def integrand(self, s):
        return s * self.P_prime(s)

    def _panel(self, a, b):
        half = 0.5 * (b - a)
        x = a + half * (_GL_X + 1.0)
        return half * float(np.dot(_GL_W, self.integrand(x)))

    def _limit(self):
        t_max = self.grid[-1]
        idx = [np.searchsorted(self.grid, t) for t in (1e4, 1e6, t_max)]
        i4, i6, i8 = (self.cum[i] for i in idx)
        d1, d2 = i6 - i4, i8 - i6
        # geometric decay of successive tail increments signals a finite limit
        if not (d2 >= 0.0 and d2 <= 0.1 * d1 + 1e-300):
            raise QuadratureError(
                "int_0^inf s P'(s) ds does not converge (weakly saturating flux)"
            )
        tail, err = self.tail(t_max)
        if not np.isfinite(tail) or err > 1e-10:
            raise QuadratureError(f"tail quadrature failed: {tail} +/- {err}")
        return float(self.cum[-1] + tail)

    def tail(self, t):
        """int_t^inf s P'(s) ds, computed in the variable u = 1/s."""

        def g(u):
            return self.integrand(1.0 / u) / (u * u) if u > 0.0 else 0.0

        return integrate.quad(g, 0.0, 1.0 / t, epsabs=1e-17, epsrel=1e-12, limit=200)

    def Q(self, t):
        t_arr = np.abs(np.asarray(t, dtype=float))
        out = np.empty_like(t_arr)
        for k, tk in np.ndenumerate(t_arr):
            if tk > self.grid[-1]:
                out[k] = self.M0 - self.tail(tk)[0]
                continue
            i = int(np.searchsorted(self.grid, tk, side="right")) - 1
            out[k] = self.cum[i] + (self._panel(self.grid[i], tk) if tk > self.grid[i] else 0.0)
        return float(out) if out.ndim == 0 else out

    def R(self, y):
        y_arr = np.asarray(y, dtype=float)
        if np.any(y_arr < 0.0) or np.any(y_arr >= self.M0):
            raise DomainError(f"R is defined on [0, {self.M0})")
        out = np.empty_like(y_arr)
        for k, yk in np.ndenumerate(y_arr):
            out[k] = self._invert(float(yk))
        return float(out) if out.ndim == 0 else out

    def _invert(self, y):
        if y == 0.0:
            return 0.0
        # bracket scaled by the mean-curvature inverse at the same relative level
        u = y / self.M0
        hi = max(math.sqrt(u * (2.0 - u)) / (1.0 - u), 1e-12)
        lo = 0.0
        while self.Q(hi) < y:
            lo, hi = hi, 4.0 * hi
            if hi > 1e300:
                raise QuadratureError("R inversion bracket overflow")
        return optimize.brentq(lambda t: self.Q(t) - y, lo, hi, xtol=1e-300, rtol=1e-14, maxiter=400)


def numeric_flux(P: Callable, P_prime: Callable, name: str = "numeric", params=None) -> SaturatingFlux:
    """Flux with Q, M0 by quadrature and R by inversion of Q.

    Raises QuadratureError for weakly saturating fluxes, whose Q is unbounded.
    """
    pair = _NumericPair(P_prime)
    pp0 = float(P_prime(0.0))
    if pp0 > 0.0:
        kappa = math.sqrt(2.0 / pp0)
    else:
        # P'(0) = 0: R grows faster than sqrt near 0; record the local ratio
        y_small = 1e-12 * pair.M0
        kappa = pair.R(y_small) / math.sqrt(y_small)
    return SaturatingFlux(
        name=name,
        P=P,
        P_prime=P_prime,
        Q=pair.Q,
        R=pair.R,
        M0=pair.M0,
        kappa=float(kappa),
        params=dict(params or {}),
    )


def power_saturating_flux(m: float, delta: float) -> SaturatingFlux:
    """P(s) = s^m / sqrt(1 + delta s^(2m)) extended oddly; needs m >= 1, delta > 0."""
    if not m >= 1.0 or not delta > 0.0:
        raise DomainError(f"power flux needs m >= 1 and delta > 0, got m={m}, delta={delta}")

    def P(s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        out = np.sign(s) * a**m / np.sqrt(1.0 + delta * a ** (2 * m))
        return float(out) if out.ndim == 0 else out

    def P_prime(s):
        a = np.abs(np.asarray(s, dtype=float))
        if m == 1.0:
            out = (1.0 + delta * a * a) ** -1.5
        else:
            out = m * a ** (m - 1.0) * (1.0 + delta * a ** (2 * m)) ** -1.5
        return float(out) if np.ndim(out) == 0 else out

    return numeric_flux(P, P_prime, name="power", params={"m": m, "delta": delta})


def power_flux_M0_exact(m: float, delta: float) -> float:
    """Closed form of int_0^inf s P'(s) ds for the power flux via a Beta function."""
    from scipy.special import beta

    return 0.5 * delta ** (-(m + 1.0) / (2.0 * m)) * beta((m + 1.0) / (2.0 * m), (2.0 * m - 1.0) / (2.0 * m))


def from_config(cfg: dict) -> SaturatingFlux:
    kind = cfg.get("type", "mean_curvature")
    if kind == "mean_curvature":
        return mean_curvature_flux()
    if kind == "power":
        return power_saturating_flux(float(cfg.get("m", 2.0)), float(cfg.get("delta", 1.0)))
    raise ValidationError(f"unknown flux type {kind!r}")
