"""Acceptance criteria, one test (or a pair of tests) per criterion.

Each test records a one-line verdict in ``conftest.ACCEPTANCE_LINES``; the
lines are printed at the end of the pytest run, or run this file directly
with python.  Criteria 7 and 8 are expected to fail on the monostable grid (see the
decisions ledger); they are marked ``xfail(strict=True)`` so an unexpected
pass is reported too.
"""

import math
import sys
import time
from fractions import Fraction
from functools import cache

import numpy as np
import pytest
from scipy import optimize

from conftest import ACCEPTANCE_LINES
from satfronts import build_cubic, mean_curvature_flux
from satfronts.limits import (
    BISTABLE,
    MONOSTABLE_GRID,
    BISTABLE_GRID,
    FIXED_SPEED_GRID,
    MONOSTABLE,
    bump,
    distributional_pairing,
    step_function,
    sup_outside,
)
from satfronts.profiles import (
    REGULAR,
    bistable_front,
    energy,
    glue_nonmonotone,
    jump_endpoints,
    max_residual,
    monostable_front,
)
from satfronts.reduced_ode import BACKWARD, DEFAULT_TOL, FORWARD, ReducedField, shoot
from satfronts.shooting import (
    DISCONTINUOUS_STEADY,
    REGULAR_FRONT,
    critical_speed_bistable,
    monostable_speed_by_shooting,
    monostable_speed_closed_form,
)

A = 0.4
REACTION = build_cubic(A)
FLUX = mean_curvature_flux()
I0 = 0.5
_PARTS: dict[int, dict[str, tuple[bool, str]]] = {}


def record(n: int, ok: bool, detail: str, part: str | None = None) -> None:
    if part is None:
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    else:
        parts = _PARTS.setdefault(n, {})
        parts[part] = (ok, detail)
        all_ok = all(p[0] for p in parts.values())
        body = "; ".join(f"{k} {'ok' if v[0] else 'fails'}: {v[1]}" for k, v in sorted(parts.items()))
        line = f"criterion {n:2d}: {'PASS' if all_ok else 'FAIL'}  {body}"
    ACCEPTANCE_LINES[n] = line
    print(line)


# shared profiles -------------------------------------------------------------


@cache
def monostable(eps: float, c: float | None = None):
    return monostable_front(REACTION, FLUX, eps, c=c)


@cache
def bistable(eps: float):
    return bistable_front(REACTION, FLUX, eps)


@cache
def timed_grid(which: str):
    t0 = time.perf_counter()
    grid = MONOSTABLE_GRID if which == MONOSTABLE else BISTABLE_GRID
    profs = [monostable(e) if which == MONOSTABLE else bistable(e) for e in grid]
    return profs, time.perf_counter() - t0


# 1 ---------------------------------------------------------------------------


def test_criterion_01_threshold():
    err = abs(REACTION.eps_bar - 0.0085333333333333)
    ok = err <= 1e-8
    record(1, ok, f"eps_bar = {REACTION.eps_bar:.12g}, |error| = {err:.1e} (tol 1e-8)")
    assert ok


# 2 ---------------------------------------------------------------------------


def test_criterion_02_critical_speed():
    t0 = time.perf_counter()
    res = critical_speed_bistable(REACTION, FLUX, 0.01, tol=1e-7)
    dt = time.perf_counter() - t0
    rel = abs(res.value - 0.0006326) / 0.0006326
    width = res.bracket[1] - res.bracket[0]
    ok = rel <= 0.05 and width <= 1e-7 and dt < 10.0
    record(2, ok, f"c*(0.01) = {res.value:.7g}, rel. error {rel:.2%}, bracket width {width:.1e}, {dt:.1f} s")
    assert ok


# 3 ---------------------------------------------------------------------------


def test_criterion_03_monostable_shooting():
    errs = {}
    for eps in (0.05, 0.01):
        exact = 2.0 * math.sqrt(0.24 * eps)
        errs[eps] = abs(monostable_speed_by_shooting(REACTION, FLUX, eps).value - exact) / exact
    ok = max(errs.values()) <= 0.01
    record(3, ok, ", ".join(f"eps={e}: rel. error {v:.1e}" for e, v in errs.items()) + " (tol 1%)")
    assert ok


# 4 ---------------------------------------------------------------------------


def test_criterion_04_regime_switch():
    expected = {0.0086: REGULAR_FRONT, 0.01: REGULAR_FRONT, 0.0085: DISCONTINUOUS_STEADY, 0.005: DISCONTINUOUS_STEADY}
    got = {eps: critical_speed_bistable(REACTION, FLUX, eps).regime for eps in expected}
    ok = got == expected
    record(4, ok, ", ".join(f"{e}: {r}" for e, r in got.items()))
    assert ok


# 5 ---------------------------------------------------------------------------


def test_criterion_05_speed_vanishes_at_threshold():
    deltas = (0.5, 0.2, 0.1, 0.05)
    c = [critical_speed_bistable(REACTION, FLUX, REACTION.eps_bar * (1.0 + d)).value for d in deltas]
    decreasing = all(b < a for a, b in zip(c, c[1:]))
    ratio = c[-1] / c[0]
    ok = decreasing and ratio <= 0.2
    record(5, ok, f"c* = [{', '.join(f'{x:.3g}' for x in c)}], last/first = {ratio:.3f} (<= 0.2)")
    assert ok


# 6 ---------------------------------------------------------------------------


def test_criterion_06_energy_identity():
    eps = 0.01
    vals = {c: energy(monostable(eps, c)) for c in (0.12, 0.2)}
    rel = {c: abs(e - 0.025) / 0.025 for c, e in vals.items()}
    ok = max(rel.values()) <= 0.01
    exact = float(REACTION.F(1.0) - REACTION.F(A))
    record(6, ok, ", ".join(f"c={c}: {vals[c]:.6f} ({rel[c]:.2%})" for c in vals)
           + f"; exact F(1)-F(alpha) = {exact:.4f}")
    assert ok


# 7 ---------------------------------------------------------------------------


def _step_distances(which):
    profs, dt = timed_grid(which)
    H = step_function(REACTION, which)
    return [sup_outside(p, H, I0) for p in profs], dt


def _check_step(which):
    d, dt = _step_distances(which)
    monotone = all(b < a for a, b in zip(d, d[1:]))
    ok = monotone and d[-1] < 0.02
    detail = f"[{', '.join(f'{x:.3g}' for x in d)}], monotone={monotone}, {dt:.0f} s"
    return ok, detail, dt


def test_criterion_07_step_convergence_bistable():
    ok, detail, _ = _check_step(BISTABLE)
    record(7, ok, detail, part="bistable")
    assert ok


@pytest.mark.xfail(strict=True, reason="monostable grid ends before the critical tail has decayed")
def test_criterion_07_step_convergence_monostable():
    ok, detail, dt = _check_step(MONOSTABLE)
    total = dt + timed_grid(BISTABLE)[1]
    ok = ok and total < 120.0
    record(7, ok, detail + f", both grids {total:.0f} s", part="monostable")
    assert ok


# 8 ---------------------------------------------------------------------------


def _check_pairing(which):
    profs, _ = timed_grid(which)
    psi = bump()
    weight = 1.0 - A if which == MONOSTABLE else 1.0
    target = weight * float(psi(0.0))
    value = distributional_pairing(profs[-1], psi)
    rel = (value - target) / target
    ok = abs(rel) <= 0.02
    grid = MONOSTABLE_GRID if which == MONOSTABLE else BISTABLE_GRID
    return ok, f"eps={grid[-1]}: {value:.6f} vs {target:.6f} ({rel:+.2%})"


def test_criterion_08_pairing_bistable():
    ok, detail = _check_pairing(BISTABLE)
    record(8, ok, detail, part="bistable")
    assert ok


@pytest.mark.xfail(strict=True, reason="monostable pairing is pre-asymptotic at eps = 0.01")
def test_criterion_08_pairing_monostable():
    ok, detail = _check_pairing(MONOSTABLE)
    record(8, ok, detail, part="monostable")
    assert ok


# 9 ---------------------------------------------------------------------------


def test_criterion_09_oracles():
    fld = ReducedField(REACTION, FLUX, 0.05, 0.0)
    fwd = shoot(fld, 0.0, FORWARD, 1.0)
    bwd = shoot(fld, 1.0, BACKWARD, 0.0)
    v1 = np.linspace(0.0, fwd.event.v, 4001)
    v2 = np.linspace(0.0, 1.0, 4001)
    traj_err = max(np.max(np.abs(fwd.y_at(v1) - REACTION.F_minus(v1))),
                   np.max(np.abs(bwd.y_at(v2) - REACTION.F_plus(v2))))

    # endpoints against bisection on the explicit quartic primitive
    def F(v):
        return -v**4 / 4.0 + (1.0 + A) * v**3 / 3.0 - A * v * v / 2.0

    jump_err = 0.0
    for level in (0.001, 0.005, 0.0085):
        vm, vp = jump_endpoints(REACTION, level)
        bm = optimize.bisect(lambda v: -F(v) - level, 0.0, A, xtol=1e-15, maxiter=200)
        bp = optimize.bisect(lambda v: F(1.0) - F(v) - level, A, 1.0, xtol=1e-15, maxiter=200)
        jump_err = max(jump_err, abs(vm - bm), abs(vp - bp))

    # the quadratic factor 3v^2 - 4(1+a)v + 6a has the exact root 2/3 at a = 2/5
    a = Fraction(2, 5)
    v = Fraction(2, 3)
    assert 3 * v * v - 4 * (1 + a) * v + 6 * a == 0
    v0_err = abs(REACTION.v_zero - 2.0 / 3.0)
    ok = traj_err <= 1e-9 and jump_err <= 1e-10 and v0_err <= 4 * np.spacing(2.0 / 3.0)
    record(9, ok, f"trajectory sup error {traj_err:.1e}, endpoint error {jump_err:.1e}, "
                  f"|v0 - 2/3| = {v0_err:.1e} (rounding of 2/5 only)")
    assert ok


# 10 --------------------------------------------------------------------------


def test_criterion_10_nonmonotone_gluing():
    eps = 0.05
    c_star = critical_speed_bistable(REACTION, FLUX, eps).value
    c = 0.5 * (c_star + monostable_speed_closed_form(REACTION, FLUX, eps))
    prof = glue_nonmonotone(REACTION, FLUX, eps, c, "from_one", max_turns=6)
    d = np.array(prof.meta["zeros"]) - A
    alternate = bool(np.all(d[:-1] * d[1:] < 0.0))
    shrinking = bool(np.all(np.abs(d[1:]) < np.abs(d[:-1])))
    slope = max(prof.meta["junction_slopes"])
    ok = alternate and shrinking and d.size >= 4 and slope <= 1e-6
    record(10, ok, f"c = {c:.5f}, {d.size} zeros, |v_k - alpha| = [{', '.join(f'{x:.1e}' for x in np.abs(d))}], "
                   f"max junction slope {slope:.1e}")
    assert ok


# 11 --------------------------------------------------------------------------


def _halved(prof):
    ds = prof.meta["ds"] / 2.0
    tol = DEFAULT_TOL.halved()
    if prof.meta.get("which") == "bistable":
        return bistable_front(REACTION, FLUX, prof.eps, c=prof.speed_c, ds=ds, tol=tol)
    return monostable_front(REACTION, FLUX, prof.eps, c=prof.speed_c, ds=ds, tol=tol)


def test_criterion_11_residuals():
    regular = [bistable(e) for e in (0.5, 0.1, 0.05, 0.01)]
    regular += [p for p in timed_grid(BISTABLE)[0] if p.kind == REGULAR]
    regular += timed_grid(MONOSTABLE)[0]
    regular += [monostable(e, 0.2) for e in FIXED_SPEED_GRID]
    regular += [monostable(0.01, c) for c in (0.12, 0.2)]
    seen, rows = set(), []
    for p in regular:
        key = (p.meta["which"], p.eps, p.speed_c)
        if key in seen:
            continue
        seen.add(key)
        r0 = max_residual(p, REACTION, FLUX)
        r1 = max_residual(_halved(p), REACTION, FLUX)
        rows.append((key, r0, r0 / r1))
    worst = max(r for _, r, _ in rows)
    least = min(q for _, _, q in rows)
    ok = worst <= 1e-4 and least >= 4.0
    record(11, ok, f"{len(rows)} regular profiles, max residual {worst:.1e} (<= 1e-4), "
                   f"smallest halving ratio {least:.1f} (>= 4)")
    for key, r0, q in rows:
        print(f"    {key[0]:10s} eps={key[1]:<8g} c={key[2]:.6g}: residual {r0:.2e}, ratio {q:.1f}")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
