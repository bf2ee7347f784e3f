import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from talpha.errors import DomainError
from talpha.moebius import (BallPoint, Params, SpherePoint, bracket, bracket_sq, conformal_factor,
                            moebius_map, pseudo_distance, random_ball_points, self_test)


def ball_point(n):
    vec = arrays(float, n, elements=st.floats(-1, 1))
    return st.tuples(vec, st.floats(0, 0.97)).filter(lambda t: np.linalg.norm(t[0]) > 1e-3).map(
        lambda t: t[0] / np.linalg.norm(t[0]) * t[1])


def test_params_validation():
    with pytest.raises(DomainError, match="alpha > -1"):
        Params(3, -1.0)
    with pytest.raises(DomainError):
        Params(2, 0.0)
    assert Params(4, 1).alpha == 1.0


def test_ball_and_sphere_points():
    x = BallPoint([0.3, 0.4, 0.0])
    assert x.norm == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(DomainError):
        BallPoint([1.0, 0.0, 0.0])
    with pytest.raises(DomainError):
        SpherePoint([0.5, 0.0, 0.0])
    assert np.linalg.norm(SpherePoint.normalized([1, 1, 1]).coords) == pytest.approx(1.0, abs=1e-15)


def test_bracket_examples():
    assert bracket([0.2, -0.7, 0.1], [0.0, 0.0, 0.0]) == pytest.approx(1.0, abs=1e-15)
    # sqrt(1 + 0.25 * 0.25 - 0) = sqrt(1.0625)
    assert bracket([0.5, 0, 0], [0, 0.5, 0]) == pytest.approx(math.sqrt(1.0625), abs=1e-15)


def test_map_at_origin_is_minus_identity():
    y = np.array([0.1, -0.4, 0.3])
    assert np.allclose(moebius_map(np.zeros(3), y), -y, atol=1e-15)


def test_map_sends_zero_to_point():
    x = np.array([0.2, 0.5, -0.1])
    assert np.allclose(moebius_map(x, np.zeros(3)), x, atol=1e-15)


def test_conformal_factor_examples():
    x = np.array([0.5, 0.0, 0.0])
    assert conformal_factor(x, np.zeros(3)) == pytest.approx(0.75, abs=1e-15)
    assert conformal_factor(np.zeros(3), np.array([0.3, 0.2, 0.1])) == pytest.approx(1.0, abs=1e-15)
    # 0.75 / 1.0625
    assert conformal_factor(x, np.array([0, 0.5, 0])) == pytest.approx(0.7058823529411765, abs=1e-15)


def test_pseudo_distance_is_norm_of_image():
    rng = np.random.default_rng(3)
    x = random_ball_points(rng, 50, 4)
    y = random_ball_points(rng, 50, 4)
    assert np.allclose(pseudo_distance(x, y), np.linalg.norm(moebius_map(x, y), axis=-1), atol=1e-13)


def test_self_test_residuals():
    res = self_test(1000, (3, 4, 5), seed=0)
    assert set(res) == {"involution", "one_minus_norm", "bracket_of_image", "boundary"}
    assert max(res.values()) < 1e-12


@settings(max_examples=200)
@given(ball_point(3), ball_point(3))
def test_involution_property(x, y):
    assert np.max(np.abs(moebius_map(x, moebius_map(x, y)) - y)) < 1e-11


@settings(max_examples=200)
@given(ball_point(4), ball_point(4))
def test_norm_identity_property(x, y):
    z = moebius_map(x, y)
    lhs = 1 - z @ z
    rhs = (1 - x @ x) * (1 - y @ y) / bracket_sq(x, y)
    assert abs(lhs - rhs) < 1e-12


@settings(max_examples=100)
@given(ball_point(3), ball_point(3))
def test_bracket_is_symmetric(x, y):
    assert bracket(x, y) == pytest.approx(bracket(y, x), rel=1e-14)
