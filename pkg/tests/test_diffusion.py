import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from satfronts.diffusion import (
    from_config,
    mean_curvature_flux,
    numeric_flux,
    power_flux_M0_exact,
    power_saturating_flux,
)
from satfronts.errors import DomainError, QuadratureError, ValidationError


def test_mean_curvature_pair(mc):
    assert mc.M0 == 1.0
    assert mc.kappa == pytest.approx(math.sqrt(2.0))
    # Q(t) = 1 - 1/sqrt(1+t^2) in closed form
    t = np.array([0.3, 1.0, 10.0, 1e4])
    assert np.allclose(mc.Q(t), 1.0 - 1.0 / np.sqrt(1.0 + t * t), rtol=1e-12, atol=0.0)
    # small t: the series t^2/2 - 3t^4/8 avoids the cancellation of the closed form
    assert mc.Q(1e-6) == pytest.approx(0.5e-12 - 3.0e-24 / 8.0, rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(y=st.floats(0.0, 0.999999))
def test_R_inverts_Q(mc, y):
    assert mc.Q(mc.R(y)) == pytest.approx(y, rel=1e-12, abs=1e-300)


def test_R_near_zero_and_ceiling(mc):
    y = 1e-10
    assert mc.R(y) / math.sqrt(y) == pytest.approx(mc.kappa, rel=1e-9)
    assert mc.R(1.0 - 1e-9) > 1e8
    with pytest.raises(DomainError):
        mc.R(1.0)
    with pytest.raises(DomainError):
        mc.R(-1e-3)


def test_Q_integrand_identity(mc):
    # Q is the primitive of s P'(s): check against quadrature
    for t in (0.5, 2.0, 7.0):
        oracle = integrate.quad(lambda s: s * mc.P_prime(s), 0.0, t, epsrel=1e-13)[0]
        assert mc.Q(t) == pytest.approx(oracle, rel=1e-12)


def test_numeric_flux_reproduces_mean_curvature(mc):
    num = numeric_flux(mc.P, mc.P_prime, name="mc_numeric")
    assert num.M0 == pytest.approx(1.0, abs=1e-10)
    assert num.kappa == pytest.approx(math.sqrt(2.0), rel=1e-12)
    for y in (1e-8, 0.1, 0.5, 0.9, 0.999):
        assert num.R(y) == pytest.approx(mc.R(y), rel=1e-9)


@pytest.mark.parametrize("m,delta", [(1.0, 1.0), (1.5, 0.5), (2.0, 2.0)])
def test_power_flux_bound(m, delta):
    fl = power_saturating_flux(m, delta)
    # oracle: direct quadrature of s P'(s) on (0, inf), independent of the Beta form
    oracle = integrate.quad(lambda s: s * fl.P_prime(s), 0.0, np.inf, epsabs=1e-14, epsrel=1e-12, limit=400)[0]
    assert fl.M0 == pytest.approx(oracle, rel=1e-8)
    assert fl.M0 == pytest.approx(power_flux_M0_exact(m, delta), rel=1e-9)
    y = 0.37 * fl.M0
    assert fl.Q(fl.R(y)) == pytest.approx(y, rel=1e-11)


def test_power_flux_domain():
    with pytest.raises(DomainError):
        power_saturating_flux(0.5, 1.0)
    with pytest.raises(DomainError):
        power_saturating_flux(1.0, 0.0)


def test_weak_saturation_is_rejected():
    # P = arctan: s P'(s) ~ 1/s, so Q grows like log and has no finite bound
    with pytest.raises(QuadratureError):
        numeric_flux(np.arctan, lambda s: 1.0 / (1.0 + np.asarray(s, dtype=float) ** 2))


def test_phi_and_config(mc):
    assert mc.phi(0.0) == 1.0
    assert mc.phi(2.0) == pytest.approx(1.0 / math.sqrt(5.0))
    assert from_config({"type": "mean_curvature"}).M0 == 1.0
    assert from_config({"type": "power", "m": 1.0, "delta": 1.0}).M0 == pytest.approx(1.0, rel=1e-9)
    with pytest.raises(ValidationError):
        from_config({"type": "linear"})


def test_scaled_R(mc):
    assert mc.R_scaled(0.005, 0.01) == pytest.approx(mc.R(0.5))
