import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from talpha.errors import DomainError, IntegrationError
from talpha.kernels import poisson_szego
from talpha.moebius import Params
from talpha.quadrature import (ball_rule, cache_key, cached_sphere_rule, cap_rule, graded_ball_rule,
                               graded_scale, graded_sphere_rule, integrate_ball, integrate_sphere,
                               integrate_zonal, rule_from_csv, rule_to_csv, sphere_rule, zonal_rule)


def sphere_moment(beta):
    """sigma-average of prod x_i^{2 beta_i} on S^{n-1}."""
    n = len(beta)
    num = math.gamma(n / 2) * math.prod(math.gamma(b + 0.5) for b in beta)
    return num / (math.pi ** (n / 2) * math.gamma(sum(beta) + n / 2))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_sphere_rule_weights(n):
    rule = sphere_rule(n, 6)
    assert np.all(rule.weights > 0)
    assert rule.weights.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.allclose(np.linalg.norm(rule.nodes, axis=1), 1.0, atol=1e-14)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_sphere_rule_is_exact_for_even_monomials(n):
    order = 5  # exact to degree 9
    rule = sphere_rule(n, order)
    for beta in itertools.product(range(3), repeat=n):
        if 2 * sum(beta) > 2 * order - 1:
            continue
        val = integrate_sphere(rule, lambda z: np.prod(z ** (2 * np.array(beta)), axis=-1))
        assert val == pytest.approx(sphere_moment(beta), rel=1e-12, abs=1e-15)


def test_sphere_rule_odd_moments_vanish():
    rule = sphere_rule(3, 6)
    assert abs(integrate_sphere(rule, lambda z: z[:, 0] * z[:, 1] ** 2)) < 1e-15


def test_sphere_rule_accepts_params():
    assert len(sphere_rule(Params(3, 1.0), 4)) == 32
    assert len(ball_rule(Params(3, 1.0), 4, 4)) == len(ball_rule(3, 4, 4))


def test_constant_integrates_exactly():
    assert integrate_sphere(sphere_rule(4, 3), 2.5) == pytest.approx(2.5, abs=1e-14)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_ball_volume(n):
    vol = math.pi ** (n / 2) / math.gamma(n / 2 + 1)
    assert integrate_ball(ball_rule(n, 8, 4), 1.0) == pytest.approx(vol, rel=1e-10)


def test_ball_integral_of_one_minus_r2():
    val = integrate_ball(ball_rule(3, 8, 4), lambda y: 1 - np.einsum("ij,ij->i", y, y))
    assert val == pytest.approx(8 * math.pi / 15, rel=1e-12)


def test_annulus_volume():
    val = integrate_ball(ball_rule(3, 8, 4, radius=0.8, inner=0.1), 1.0)
    assert val == pytest.approx(4 * math.pi / 3 * (0.8**3 - 0.1**3), rel=1e-12)


def test_hyperbolic_kernel_has_unit_mean():
    # P_h(x, .) integrates to 1 for every x; oracle: n = 3 closed form is 1
    x = np.array([0.5, 0.0, 0.0])
    rule = cap_rule(x / 0.5, order=24, sub_order=24, theta_min=1e-3)
    assert integrate_sphere(rule, lambda z: poisson_szego(x, z)) == pytest.approx(1.0, abs=1e-8)


def test_zonal_rule_integrates_zonal_polynomials():
    z = zonal_rule(3, 12, theta_min=1e-6)
    # mean of cos^2 on S^2 is 1/3
    assert integrate_zonal(z, lambda th: np.cos(th) ** 2) == pytest.approx(1 / 3, rel=1e-13)
    assert z.weights.sum() == pytest.approx(1.0, rel=1e-13)


def test_graded_rules_are_normalized_and_positive():
    for r in (0.2, 0.9, 0.99):
        s = graded_sphere_rule(3, 8, graded_scale(r))
        assert np.all(s.weights > 0) and s.weights.sum() == pytest.approx(1.0, abs=1e-13)
        b = graded_ball_rule(3, 6, 8, graded_scale(r))
        assert integrate_ball(b, 1.0) == pytest.approx(4 * math.pi / 3, rel=1e-11)


def test_graded_scale_shrinks_toward_boundary():
    assert graded_scale(0.0) == 0.5
    assert graded_scale(0.9) < graded_scale(0.5) < graded_scale(0.1)


def test_integration_error_names_node():
    rule = sphere_rule(3, 4)
    with pytest.raises(IntegrationError) as exc:
        integrate_sphere(rule, lambda z: np.where(z[:, 2] > 0.5, np.inf, 1.0))
    assert exc.value.node is not None


def test_rule_validation():
    with pytest.raises(DomainError):
        sphere_rule(3, 1)
    with pytest.raises(DomainError):
        ball_rule(3, 4, 4, radius=0.5, inner=0.6)


def test_rule_is_deterministic():
    a = integrate_ball(ball_rule(4, 6, 5), lambda y: np.cos(y[:, 0]) * y[:, 1] ** 2)
    b = integrate_ball(ball_rule(4, 6, 5), lambda y: np.cos(y[:, 0]) * y[:, 1] ** 2)
    assert a == b


def test_csv_round_trip_and_cache(tmp_path, monkeypatch):
    rule = sphere_rule(3, 3)
    nodes, weights = rule_from_csv(rule_to_csv(rule))
    assert np.array_equal(nodes, rule.nodes) and np.array_equal(weights, rule.weights)
    monkeypatch.setenv("TALPHA_CACHE_DIR", str(tmp_path))
    first = cached_sphere_rule(3, 3)
    files = list(tmp_path.iterdir())
    assert len(files) == 1 and files[0].name == cache_key("sphere", 3, 3) + ".csv"
    second = cached_sphere_rule(3, 3)
    assert np.array_equal(first.nodes, second.nodes)
    assert "\r" not in files[0].read_text()


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), st.integers(3, 5))
def test_sphere_rule_exactness_property(order, n):
    rule = sphere_rule(n, order)
    k = order - 1  # degree 2k <= 2 order - 1
    assert integrate_sphere(rule, lambda z: z[:, 0] ** (2 * k)) == pytest.approx(
        sphere_moment([k] + [0] * (n - 1)), rel=1e-11)
