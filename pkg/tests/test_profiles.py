import json
import math

import numpy as np
import pytest
from scipy import integrate

from satfronts.errors import DomainError, RegimeError
from satfronts.profiles import (
    BORDER,
    DECREASING,
    DISCONTINUOUS,
    INCREASING,
    NONMONOTONE,
    bistable_front,
    build_discontinuous_steady,
    energy,
    glue_nonmonotone,
    inviscid_front,
    jump_endpoints,
    max_residual,
    monostable_front,
    residual,
)
from satfronts.shooting import critical_speed_bistable, monostable_speed_closed_form

A = 0.4


def _z_of_v_oracle(reaction, eps, c, v_stop, delta=1e-7):
    """Phase-plane oracle in v: dz/dv = 1/p, dp/dv = (c p - f) (1 + p^2)^{3/2} / (eps p).

    Starts on the stable manifold of v = 1 and integrates downward in v.
    """
    fp1 = float(reaction.f_prime(1.0))
    mu = (c - math.sqrt(c * c - 4.0 * eps * fp1)) / (2.0 * eps)
    v0 = 1.0 - delta

    def rhs(v, state):
        _, p = state
        return [1.0 / p, (c * p - float(reaction.f(v))) * (1.0 + p * p) ** 1.5 / (eps * p)]

    sol = integrate.solve_ivp(rhs, (v0, v_stop), [0.0, mu * (v0 - 1.0)], method="DOP853",
                              rtol=1e-12, atol=1e-14, dense_output=True)
    assert sol.success
    return sol.sol


def _compare_with_oracle(prof, reaction, v_lo, v_mid):
    sol = _z_of_v_oracle(reaction, prof.eps, prof.speed_c, v_lo)
    z, v = prof.samples()
    keep = (v > v_lo + 1e-3) & (v < 0.999)
    z_oracle = sol(v[keep])[0] - sol(v_mid)[0]
    return float(np.max(np.abs(z[keep] - z_oracle)))


def test_monostable_front_matches_phase_plane(cubic, mc):
    prof = monostable_front(cubic, mc, 0.05, c=0.3)
    assert prof.v_at(0.0) == pytest.approx(0.7, abs=1e-9)
    assert _compare_with_oracle(prof, cubic, A + 0.02, 0.7) < 1e-6


def test_bistable_front_matches_phase_plane(cubic, mc):
    prof = bistable_front(cubic, mc, 0.05)
    assert prof.speed_c == pytest.approx(critical_speed_bistable(cubic, mc, 0.05).value, abs=1e-7)
    assert _compare_with_oracle(prof, cubic, 0.05, 0.5) < 1e-6


def test_fronts_are_monotone_with_small_residual(cubic, mc):
    for prof in (monostable_front(cubic, mc, 0.05), bistable_front(cubic, mc, 0.1)):
        _, v = prof.samples()
        assert np.all(np.diff(v) >= 0.0)
        assert prof.kind == "regular_front"
        assert max_residual(prof, cubic, mc) < 1e-5
        assert 1e-3 <= prof.meta["ds"] <= 0.1


def test_monostable_below_minimal_speed(cubic, mc):
    c_plus = monostable_speed_closed_form(cubic, mc, 0.05)
    with pytest.raises(RegimeError):
        monostable_front(cubic, mc, 0.05, c=0.95 * c_plus)


def test_energy_identity(cubic, mc):
    gap = float(cubic.F(1.0) - cubic.F(A))
    for c in (None, 0.3):
        prof = monostable_front(cubic, mc, 0.05, c=c)
        assert energy(prof) == pytest.approx(gap, rel=1e-3)
    assert energy(bistable_front(cubic, mc, 0.05)) == pytest.approx(cubic.total_integral, rel=1e-3)


# --- steady states --------------------------------------------------------


def _poly_roots_in(coeffs, lo, hi):
    r = np.roots(coeffs)
    real = r[np.abs(r.imag) < 1e-12].real
    return real[(real > lo) & (real < hi)]


@pytest.mark.parametrize("level", [0.001, 0.005, 0.008])
def test_jump_endpoints_against_quartic_roots(cubic, level):
    v_minus, v_plus = jump_endpoints(cubic, level)
    # F(v) = -v^4/4 + (1 + a) v^3/3 - a v^2/2
    quartic = np.array([-0.25, (1.0 + A) / 3.0, -A / 2.0, 0.0, 0.0])
    left = _poly_roots_in(-quartic - np.array([0, 0, 0, 0, level]), 0.0, A)
    right = _poly_roots_in(quartic + np.array([0, 0, 0, 0, level - cubic.total_integral]), A, 1.0)
    assert left.size == 1 and right.size == 1
    assert abs(v_minus - left[0]) <= 1e-10
    assert abs(v_plus - right[0]) <= 1e-10


def test_steady_state_branches(cubic, mc):
    eps = 0.005
    prof = build_discontinuous_steady(cubic, eps, mc)
    assert prof.kind == DISCONTINUOUS and prof.speed_c == 0.0
    v_minus, v_plus = prof.jump
    assert (v_minus, v_plus) == jump_endpoints(cubic, eps)
    left, right = prof.pieces
    assert left.z[-1] == pytest.approx(0.0, abs=1e-12) and right.z[0] == pytest.approx(0.0, abs=1e-12)
    assert left.v[-1] == pytest.approx(v_minus) and right.v[0] == pytest.approx(v_plus)
    # oracle: z(v) = -int_v^{v_minus} dv / R(F-(v) / eps) on the left branch
    for zk, vk in list(zip(left.z, left.v))[::200]:
        if vk < 0.05:
            continue
        oracle = -integrate.quad(lambda s: 1.0 / mc.R(min(cubic.F_minus(s) / eps, 1.0 - 1e-16)), vk, v_minus,
                                 epsabs=1e-12, epsrel=1e-10, limit=200)[0]
        assert zk == pytest.approx(oracle, abs=1e-6)
    assert max_residual(prof, cubic, mc) < 1e-4


def test_border_steady_state(cubic, mc):
    prof = bistable_front(cubic, mc, cubic.eps_bar)
    assert prof.kind == BORDER
    assert prof.jump[0] == A


def test_steady_state_above_threshold(cubic, mc):
    with pytest.raises(DomainError):
        build_discontinuous_steady(cubic, 0.01, mc)
    with pytest.raises(DomainError):
        jump_endpoints(cubic, 0.01)


# --- nonmonotone waves ----------------------------------------------------


@pytest.fixture(scope="module")
def oscillating(cubic, mc):
    eps = 0.05
    c_star = critical_speed_bistable(cubic, mc, eps).value
    c = 0.5 * (c_star + monostable_speed_closed_form(cubic, mc, eps))
    return glue_nonmonotone(cubic, mc, eps, c, "from_one", max_turns=6)


def test_oscillating_wave_zeros_alternate_and_converge(oscillating):
    d = np.array(oscillating.meta["zeros"]) - A
    assert d.size >= 5
    assert np.all(d[:-1] * d[1:] < 0.0)
    assert np.all(np.abs(d[1:]) < np.abs(d[:-1]))
    assert max(oscillating.meta["junction_slopes"]) < 1e-6


def test_oscillating_wave_is_continuous(oscillating, cubic, mc):
    assert oscillating.kind == NONMONOTONE
    monos = [p.monotonicity for p in sorted(oscillating.pieces, key=lambda p: p.z[0])]
    assert all(a != b for a, b in zip(monos, monos[1:]))
    assert {INCREASING, DECREASING} == set(monos)
    z = np.linspace(*oscillating.z_range, 20001)
    assert np.max(np.abs(np.diff(oscillating.v_at(z)))) < 1e-2
    assert max_residual(oscillating, cubic, mc) < 1e-4


def test_zero_speed_bounce(cubic, mc):
    prof = glue_nonmonotone(cubic, mc, 0.5, 0.0, "from_zero", max_turns=3)
    zeros = prof.meta["zeros"]
    assert zeros[0] == pytest.approx(2.0 / 3.0, abs=1e-9)
    assert zeros[1] == 0.0 and zeros[2] == pytest.approx(2.0 / 3.0, abs=1e-9)
    assert max_residual(prof, cubic, mc) < 1e-6


def test_from_one_below_critical_speed(cubic, mc):
    c_star = critical_speed_bistable(cubic, mc, 0.05).value
    with pytest.raises(RegimeError):
        glue_nonmonotone(cubic, mc, 0.05, 0.5 * c_star, "from_one")


# --- inviscid fronts ------------------------------------------------------


def _inviscid_z(v, c):
    # partial fractions of 1 / (s (1 - s) (s - a))
    return c * (-np.log(v) / A - np.log(1.0 - v) / (1.0 - A) + np.log(v - A) / (A * (1.0 - A)))


def test_inviscid_front_closed_form(cubic):
    c = 0.3
    prof = inviscid_front(cubic, c)
    z, v = prof.samples()
    oracle = _inviscid_z(v, c) - _inviscid_z(0.7, c)
    assert np.max(np.abs(z - oracle)) < 1e-8
    assert np.all(np.diff(v) > 0.0)


def test_inviscid_front_scales_with_speed(cubic):
    p1, p2 = inviscid_front(cubic, 0.1), inviscid_front(cubic, 0.2)
    z = np.linspace(-1.0, 1.0, 11)
    assert np.allclose(p2.v_at(2.0 * z), p1.v_at(z), atol=1e-6)
    with pytest.raises(DomainError):
        inviscid_front(cubic, 0.0)


# --- output ---------------------------------------------------------------


def test_csv_round_trip(cubic, mc, tmp_path):
    prof = build_discontinuous_steady(cubic, 0.005, mc)
    path = tmp_path / "steady.csv"
    prof.to_csv(path, cubic, mc)
    rows = path.read_text().splitlines()
    assert rows[0] == "z,v,piece_index,monotonicity"
    z = np.array([float(r.split(",")[0]) for r in rows[1:]])
    v = np.array([float(r.split(",")[1]) for r in rows[1:]])
    zs, vs = np.concatenate([p.z for p in prof.pieces]), np.concatenate([p.v for p in prof.pieces])
    assert np.array_equal(z, zs) and np.array_equal(v, vs)
    meta = json.loads(path.with_suffix(".json").read_text())
    assert meta["kind"] == DISCONTINUOUS
    assert meta["jump"] == list(prof.jump)
    r = np.abs(residual(prof, cubic, mc))
    assert meta["residual"]["max"] == pytest.approx(float(r.max()))
    assert meta["residual"]["count"] == r.size
