import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from talpha import estimates as est
from talpha.errors import DegenerateFitError, DomainError
from talpha.moebius import Params


def test_window_radii():
    r = est.window_radii()
    assert len(r) == 10 and r[0] == pytest.approx(0.9) and r[-1] == pytest.approx(0.999)


@settings(max_examples=40, deadline=None)
@given(st.floats(-4, 4).filter(lambda v: abs(v) > 1e-3), st.floats(0.01, 100))
def test_fit_exponent_recovers_exact_power(e, c):
    d = np.geomspace(0.1, 1e-3, 8)
    fit = est.fit_exponent([(t, c * t**e) for t in d])
    assert fit.fitted_exponent == pytest.approx(e, abs=1e-9)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-9)


def test_fit_exponent_constant_and_noise():
    d = np.geomspace(0.1, 1e-3, 10)
    assert est.fit_exponent([(t, 3.0) for t in d]).fitted_exponent == pytest.approx(0.0, abs=1e-12)
    rng = np.random.default_rng(0)
    noisy = [(t, t**-0.5 * (1 + 0.02 * rng.standard_normal())) for t in d]
    assert -0.55 < est.fit_exponent(noisy).fitted_exponent < -0.45


def test_fit_errors():
    with pytest.raises(DegenerateFitError):
        est.fit_exponent([(0.1, 1.0), (0.01, 2.0)])
    with pytest.raises(DegenerateFitError):
        est.fit_exponent([(0.1, 1.0), (0.1, 2.0), (0.01, 3.0), (0.001, 4.0)])
    with pytest.raises(DegenerateFitError):
        est.fit_exponent([(0.1, 1.0), (0.05, -2.0), (0.01, 3.0), (0.001, 4.0)])


def test_fit_log_growth():
    d = np.geomspace(0.1, 1e-4, 10)
    fit = est.fit_log_growth([(t, 2.0 - 0.5 * math.log(t)) for t in d])
    assert fit.kind == "log"
    assert fit.fitted_exponent == pytest.approx(0.5) and fit.intercept == pytest.approx(2.0)


def test_i_alpha_zero_is_poisson_mass():
    # with alpha = 0 the integrand is the classical Poisson kernel divided by 1 - r^2
    for r in (0.0, 0.5, 0.99, 0.9999):
        assert est.i_alpha(r, 0.0) == pytest.approx(1 / (1 - r * r), rel=1e-10)


def test_i_alpha_matches_scipy_quad():
    r, a = 0.9, 0.5
    f = lambda th: 0.5 * math.sin(th) * (2 * math.sin(th / 2)) ** a / (1 - 2 * r * math.cos(th) + r * r) ** 1.5
    ref = integrate.quad(f, 0, math.pi, points=[1e-3, 1e-2, 0.1], limit=200, epsabs=0, epsrel=1e-12)[0]
    assert est.i_alpha(r, a) == pytest.approx(ref, rel=1e-10)


def test_domain_checks():
    with pytest.raises(DomainError):
        est.i_alpha(1.0, 0.5)
    with pytest.raises(DomainError):
        est.j_alpha_beta(0.5, 0.0, 0.5)
    with pytest.raises(DomainError):
        est.d_integral(0.4, 0.9, 1.0)
    with pytest.raises(DomainError):
        est.gradient_probe(Params(3, 0.0), est.holder_data([0, 0, 1], 0.5), [0, 0, 1])


def test_d_integral_unit_mass():
    assert est.d_integral(0.8, 0.9, 0.0) == pytest.approx(1.0, abs=1e-13)


def test_disc_values():
    assert est.disc_i_alpha(0.0, 0.5) == pytest.approx(1.0, abs=1e-14)
    r = 0.6
    ref = integrate.quad(lambda t: 1 / abs(1 - r * np.exp(1j * t)), 0, 2 * math.pi, epsrel=1e-13)[0] / (2 * math.pi)
    assert est.disc_i_alpha(r, 0.0) == pytest.approx(ref, rel=1e-10)


def test_i_alpha_sweep_rate():
    fit = est.i_alpha_sweep(0.5)
    assert abs(fit.fitted_exponent - (-0.5)) < 0.05 and fit.extra["reference"] == -0.5


def test_j_alpha_beta_sweep_rate():
    fit = est.j_alpha_beta_sweep(1.0, 0.5)
    assert abs(fit.fitted_exponent - (-0.5)) < 0.05


def test_d_integral_regimes():
    assert est.d_regime(3.0, 3) == "power" and est.d_regime(2.0, 3) == "log" and est.d_regime(1.0, 3) == "bounded"
    assert abs(est.d_integral_sweep(3.0).fitted_exponent + 1.0) < 0.05
    assert est.d_integral_sweep(2.0).r_squared > 0.99
    assert abs(est.d_integral_sweep(1.0).fitted_exponent) < 0.05


def test_disc_sweeps():
    assert est.disc_sweep(0.0).kind == "log"
    assert abs(est.disc_sweep(0.5).fitted_exponent) < 0.05


def test_holder_data():
    f = est.holder_data([0, 0, 1], 0.5)
    assert f(np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])) == pytest.approx([0.0, math.sqrt(2)])


@pytest.mark.filterwarnings("ignore::talpha.errors.AccuracyWarning")
def test_gradient_of_constant_data_matches_radial_solution():
    # P_alpha[1](x) = F(a, b; c; |x|^2) / F(a, b; c; 1) with (a, b, c) = (-alpha/2, (n-2-alpha)/2, n/2)
    n, alpha, r = 3, 0.5, 0.6
    a, b, c = -alpha / 2, (n - 2 - alpha) / 2, n / 2
    dr = float(2 * r * a * b / c * mpmath.hyp2f1(a + 1, b + 1, c + 1, r * r) / mpmath.hyp2f1(a, b, c, 1))
    g = est.poisson_gradient(Params(n, alpha), lambda z: np.ones(np.shape(z)[:-1]), np.array([0.0, 0.0, r]))
    assert g[:2] == pytest.approx([0.0, 0.0], abs=1e-8)
    assert g[2] == pytest.approx(dr, rel=1e-5)


def test_local_exponents_cover_window():
    fit = est.fit_exponent([(t, t**-1.0) for t in np.geomspace(0.1, 1e-3, 5)])
    loc = est.local_exponents(fit)
    assert len(loc) == 4 and all(s == pytest.approx(-1.0) for *_, s in loc)
