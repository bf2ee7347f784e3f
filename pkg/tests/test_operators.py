import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from talpha import fields
from talpha.moebius import Params, random_ball_points
from talpha.operators import (ScalarField, delta_gamma_apply, delta_h_apply, gradient, invariance_residual,
                              laplacian, liu_peng_residual, radial_derivative, t_alpha_apply, t_alpha_values)

X = np.array([0.5, 0.0, 0.0])


def r2_field():
    return ScalarField(lambda x: np.einsum("...i,...i->...", x, x), name="r2")


def test_radial_derivative_examples():
    assert radial_derivative(fields.constant(2.0), X) == 0.0
    assert radial_derivative(r2_field(), np.array([0.3, 0.2, 0.1])) == pytest.approx(2 * 0.14, abs=1e-8)
    assert radial_derivative(fields.coordinate(0), X) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("n, alpha", [(3, 0.5), (4, 1.0), (5, -0.5)])
def test_t_alpha_of_constant(n, alpha):
    p = Params(n, alpha)
    x = np.full(n, 0.2)
    assert t_alpha_apply(p, fields.constant(1.0), x) == pytest.approx((n - 2 - alpha) * alpha, abs=1e-14)


def test_t_alpha_examples():
    p = Params(3, 1.0)
    assert t_alpha_apply(p, fields.coordinate(0), X) == pytest.approx(1.0, abs=1e-14)
    assert t_alpha_apply(p, fields.one_minus_r2(), np.zeros(3)) == pytest.approx(-6.0, abs=1e-14)


def test_t_alpha_numeric_matches_analytic():
    rng = np.random.default_rng(0)
    x = random_ball_points(rng, 20, 3, 0.8)
    p = Params(3, 0.5)
    poly = fields.Polynomial.random(rng, 3).field()
    for u in (fields.one_minus_r2(), fields.saddle(), fields.one_minus_r2_squared(), poly):
        exact = t_alpha_values(p, u, x)
        fd = t_alpha_apply(p, u.numeric(), x)
        assert np.max(np.abs(exact - fd)) < 1e-5


def test_alpha_zero_reduces_to_weighted_laplacian():
    rng = np.random.default_rng(1)
    u = fields.Polynomial.random(rng, 3).field()
    x = random_ball_points(rng, 10, 3, 0.8)
    rho = 1 - np.einsum("ij,ij->i", x, x)
    assert np.allclose(t_alpha_apply(Params(3, 0.0), u, x), rho * laplacian(u, x), atol=1e-13)


def test_delta_gamma_examples():
    assert delta_gamma_apply(0.0, fields.constant(1.0), X) == 0.0
    assert delta_gamma_apply(0.5, fields.coordinate(0), X) == pytest.approx(0.1875, abs=1e-14)


def test_t_alpha_versus_delta_gamma():
    rng = np.random.default_rng(2)
    u = fields.Polynomial.random(rng, 3).field()
    x = random_ball_points(rng, 10, 3, 0.9)
    for a in (0.5, 1.0, 1.7):
        rho = 1 - np.einsum("ij,ij->i", x, x)
        lhs = t_alpha_apply(Params(3, a), u, x)
        rhs = 4 / rho * delta_gamma_apply(a / 2, u, x)
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_delta_h_examples():
    assert delta_h_apply(fields.constant(1.0), X) == 0.0
    assert delta_h_apply(fields.coordinate(0), X) == pytest.approx(0.75, abs=1e-14)


@pytest.mark.parametrize("n", [3, 4])
def test_delta_h_versus_t_n_minus_2(n):
    rng = np.random.default_rng(n)
    u = fields.Polynomial.random(rng, n).field()
    x = random_ball_points(rng, 10, n, 0.9)
    rho = 1 - np.einsum("ij,ij->i", x, x)
    assert np.allclose(delta_h_apply(u, x), rho * t_alpha_apply(Params(n, n - 2), u, x), atol=1e-8)


def test_invariance_at_origin_and_for_constants():
    p = Params(3, 0.5)
    y = np.array([0.2, -0.1, 0.3])
    u = fields.saddle()
    assert abs(invariance_residual(p, u, np.zeros(3), y)) < 1e-5
    rng = np.random.default_rng(4)
    for x, yy in zip(random_ball_points(rng, 5, 3, 0.6), random_ball_points(rng, 5, 3, 0.6)):
        assert abs(invariance_residual(p, fields.constant(1.0), x, yy)) < 1e-5


def test_invariance_for_random_polynomial():
    rng = np.random.default_rng(5)
    p = Params(3, 0.5)
    u = fields.Polynomial.random(rng, 3).field()
    for x, y in zip(random_ball_points(rng, 5, 3, 0.6), random_ball_points(rng, 5, 3, 0.6)):
        assert abs(invariance_residual(p, u, x, y)) < 1e-4


def test_liu_peng_invariance():
    rng = np.random.default_rng(6)
    u = fields.Polynomial.random(rng, 3).field()
    for x, y in zip(random_ball_points(rng, 5, 3, 0.6), random_ball_points(rng, 5, 3, 0.6)):
        assert abs(liu_peng_residual(0.25, u, x, y)) < 1e-4


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-0.9, 3.0))
def test_t_alpha_is_linear(a, b, alpha):
    p = Params(3, alpha)
    u, v = fields.saddle(), fields.one_minus_r2_squared()
    w = ScalarField(lambda x: a * u(x) + b * v(x), name="combo")
    x = np.array([[0.1, 0.3, -0.2], [0.5, 0.1, 0.2]])
    lhs = t_alpha_apply(p, w, x)
    rhs = a * t_alpha_apply(p, u, x) + b * t_alpha_apply(p, v, x)
    assert np.allclose(lhs, rhs, atol=1e-5 * (1 + abs(a) + abs(b)))


def test_analytic_derivatives_match_finite_differences():
    rng = np.random.default_rng(7)
    x = random_ball_points(rng, 10, 3, 0.8)
    p = Params(3, 0.5)
    corpus = [fields.one_minus_r2(), fields.coordinate(1), fields.saddle(), fields.one_minus_r2_squared(),
              fields.kernel_slice(p, np.ones(3) / np.sqrt(3)), fields.poisson_slice(p, np.eye(3)[2]),
              fields.Polynomial.random(rng, 3).field()]
    for u in corpus:
        assert np.max(np.abs(gradient(u, x) - gradient(u.numeric(), x))) < 1e-6
        assert np.max(np.abs(laplacian(u, x) - laplacian(u.numeric(), x))) < 1e-4


def test_fd_step_warning_near_sphere():
    from talpha.errors import AccuracyWarning
    with pytest.warns(AccuracyWarning):
        laplacian(fields.saddle().numeric(), np.array([0.99995, 0.0, 0.0]))
