import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from talpha import fields, kernels
from talpha.errors import DomainError, SingularityError
from talpha.moebius import Params, random_ball_points, random_sphere_points
from talpha.operators import radial_derivative, t_alpha_apply


def test_printed_constants_at_alpha_zero():
    for n in (3, 4, 5):
        kc = kernels.constants(Params(n, 0.0))
        assert kc.c_alpha_paper == pytest.approx(-2.0, abs=1e-14)
        assert kc.d_alpha_paper == pytest.approx(-0.5, abs=1e-14)


@pytest.mark.parametrize("n, alpha, expected", [(3, 0.0, 1.0), (3, 1.0, 1.0), (4, 1.0, 3 * math.pi / 8)])
def test_calibrated_constant_examples(n, alpha, expected):
    assert kernels.calibrate_c_alpha(Params(n, alpha)) == pytest.approx(expected, rel=1e-13)


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 6), st.floats(-0.9, 3.0))
def test_calibrated_constant_matches_mpmath(n, alpha):
    a, b, c = -alpha / 2, (n - 2 - alpha) / 2, n / 2
    ref = 1 / float(mpmath.hyp2f1(a, b, c, 1))
    assert kernels.calibrate_c_alpha(Params(n, alpha)) == pytest.approx(ref, rel=1e-11)


def test_constants_report_ratio():
    d = kernels.constants(Params(3, 0.0)).as_dict()
    assert d["c_alpha_printed_over_calibrated"] == pytest.approx(-2.0)
    assert d["c_times_d_printed"] == pytest.approx(1.0)


def test_poisson_kernel_at_center_is_constant():
    p = Params(4, 0.7)
    z = random_sphere_points(np.random.default_rng(0), 10, 4)
    assert np.allclose(kernels.poisson_kernel(p, np.zeros(4), z), kernels.constants(p).c_alpha_calibrated)


def test_poisson_kernel_euclidean_shape():
    p = Params(3, 0.0)
    x = np.array([0.3, -0.2, 0.4])
    z = np.array([0.0, 0.0, 1.0])
    assert kernels.poisson_kernel(p, x, z) == pytest.approx((1 - x @ x) / np.linalg.norm(x - z) ** 3, rel=1e-14)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_poisson_kernel_proportional_to_hyperbolic(n):
    rng = np.random.default_rng(n)
    p = Params(n, n - 2.0)
    x = random_ball_points(rng, 100, n, 0.99)
    z = random_sphere_points(rng, 100, n)
    ratio = kernels.poisson_kernel(p, x, z) / kernels.poisson_szego(x, z)
    assert np.max(np.abs(ratio / ratio[0] - 1)) < 1e-12


def test_poisson_kernel_is_t_alpha_harmonic():
    rng = np.random.default_rng(1)
    for alpha in (-0.5, 0.5, 1.0):
        p = Params(3, alpha)
        u = fields.poisson_slice(p, np.array([0.0, 0.6, 0.8])).numeric()
        x = random_ball_points(rng, 10, 3, 0.6)
        scale = np.abs(u(x)) + 1
        assert np.max(np.abs(t_alpha_apply(p, u, x)) / scale) < 1e-4


def test_green_vanishes_at_boundary():
    p = Params(3, 0.5)
    vals = [abs(float(kernels.green_profile(p, s))) for s in (0.9, 0.99, 0.999)]
    assert vals[0] > vals[1] > vals[2]
    assert float(kernels.green_profile(p, 1.0)) == 0.0


@pytest.mark.parametrize("n, alpha", [(3, 0.0), (3, 1.0), (4, 0.5)])
def test_green_origin_asymptotics(n, alpha):
    p = Params(n, alpha)
    s = 1e-4
    ratio = s ** (n - 2) * float(kernels.green_profile(p, s))
    assert ratio == pytest.approx(kernels.green_origin_constant(p), rel=1e-3)
    with pytest.raises(SingularityError):
        kernels.green_profile(p, 0.0)


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
def test_green_derivative_matches_finite_differences(alpha):
    p = Params(3, alpha)
    for s in (0.3, 0.6, 0.9):
        h = 1e-5
        fd = s * (float(kernels.green_profile(p, s + h)) - float(kernels.green_profile(p, s - h))) / (2 * h)
        assert float(kernels.green_derivative_profile(p, s)) == pytest.approx(fd, rel=1e-5)


def test_green_derivative_origin_constant():
    p = Params(3, 0.5)
    s = 1e-3
    ratio = float(kernels.green_derivative_profile(p, s)) / s ** (2 - p.n)
    assert ratio == pytest.approx(kernels.green_derivative_origin_constant(p), rel=1e-2)


def test_green_field_gradient_is_radial_derivative():
    p = Params(4, 0.5)
    g = fields.green_field(p)
    x = random_ball_points(np.random.default_rng(2), 10, 4, 0.8) + 0.05
    assert np.allclose(radial_derivative(g, x), radial_derivative(g.numeric(), x), rtol=1e-6)


def test_two_point_green():
    p = Params(3, 0.5)
    y = np.array([0.1, 0.4, -0.2])
    assert kernels.green_two_point(p, np.zeros(3), y) == pytest.approx(float(kernels.green_radial(p, y)), rel=1e-14)
    assert kernels.green_two_point(p, np.zeros(3), -y) == pytest.approx(float(kernels.green_radial(p, y)), rel=1e-14)
    x = np.array([0.3, 0.0, 0.0])
    near = [abs(float(kernels.green_two_point(p, x, r * np.array([0, 0, 1.0])))) for r in (0.9, 0.99, 0.999)]
    assert near[0] > near[1] > near[2]
    with pytest.raises(SingularityError):
        kernels.green_two_point(p, x, x)


def test_h_and_k_densities():
    p = Params(3, 1.0)
    kc = kernels.constants(p)
    assert float(kernels.h_alpha_density(p, 0.999)) == pytest.approx(kc.d_alpha_paper, rel=1e-2)
    assert float(kernels.k_alpha(p, 1e-8)) == pytest.approx(kernels.k_alpha_limit(p), rel=1e-6)
    assert kernels.k_alpha_limit(p) == pytest.approx(4.0, rel=1e-13)
    s = np.linspace(0.05, 0.95, 19)
    assert np.allclose(kernels.h_alpha_density(p, s), kc.d_alpha_paper * s ** (2 - p.n) * kernels.k_alpha(p, s),
                       rtol=1e-12)


def test_radial_ode_residual_small():
    for p in (Params(3, -0.5), Params(3, 0.0), Params(4, 2.0)):
        for t in (0.1, 0.5, 0.9):
            assert abs(kernels.radial_ode_residual(p, t)) < 1e-6


def test_hyperbolic_g_examples():
    assert kernels.hyperbolic_g(0.4, 0.4, 3) == 0.0
    # antiderivative -1/t - t for n = 3: g(1/2, 1) = 0.5
    assert kernels.hyperbolic_g(0.5, 1.0, 3) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(SingularityError):
        kernels.hyperbolic_g(0.0, 1.0, 3)
    with pytest.raises(DomainError):
        kernels.hyperbolic_g(0.6, 0.5, 3)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 0.9), st.floats(0.05, 0.9), st.floats(0.05, 0.9), st.integers(3, 6))
def test_hyperbolic_g_additive_and_closed_form(r, s, t, n):
    r, s, t = sorted((r, s, t))
    assert kernels.hyperbolic_g(r, s, n) + kernels.hyperbolic_g(s, t, n) == pytest.approx(
        kernels.hyperbolic_g(r, t, n), rel=1e-10, abs=1e-12)
    assert float(kernels.hyperbolic_g_closed(r, n, t)) == pytest.approx(kernels.hyperbolic_g(r, t, n), rel=1e-10,
                                                                        abs=1e-12)


def test_poisson_szego_at_center():
    z = random_sphere_points(np.random.default_rng(3), 5, 4)
    assert np.allclose(kernels.poisson_szego(np.zeros(4), z), 1.0)


def test_green_over_g_is_constant_at_alpha_n_minus_2():
    p = Params(3, 1.0)
    s = np.linspace(0.1, 0.9, 17)
    ratio = kernels.green_profile(p, s) / np.array([kernels.hyperbolic_g(v, 1.0, 3) for v in s])
    assert np.max(np.abs(ratio / ratio.mean() - 1)) < 1e-6


def test_green_symmetry_probe():
    from talpha.checks import green_symmetry_probe
    # the bracket form is symmetric in (x, y); the conformal-factor form only at alpha = n - 2
    assert green_symmetry_probe(Params(4, 0.5))["green_kernel"] < 1e-12
    assert green_symmetry_probe(Params(3, 1.0))["green_two_point"] < 1e-12
    assert green_symmetry_probe(Params(3, 0.0))["green_two_point"] > 0.1
