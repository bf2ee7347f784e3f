"""Points of the unit ball, the bracket [x, a] and the Moebius maps phi_a.

All functions broadcast over leading axes: points are arrays whose last
axis holds the coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

BOUNDARY_TOL = 1e-14


@dataclass(frozen=True)
class Params:
    """Dimension ``n`` and weight ``alpha`` of T_alpha."""

    n: int
    alpha: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise DomainError(f"dimension n must be an integer >= 3, got {self.n}")
        if not self.alpha > -1:
            raise DomainError(f"weight alpha must satisfy alpha > -1, got {self.alpha}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "alpha", float(self.alpha))


@dataclass(frozen=True)
class BallPoint:
    coords: np.ndarray
    norm: float = field(init=False)

    def __post_init__(self):
        c = np.array(self.coords, dtype=float)
        c.setflags(write=False)
        r = float(np.linalg.norm(c))
        if not r < 1.0 - BOUNDARY_TOL:
            raise DomainError(f"|x| = {r} is not inside the open unit ball")
        object.__setattr__(self, "coords", c)
        object.__setattr__(self, "norm", r)

    def __array__(self, dtype=None, copy=None):
        return self.coords if dtype is None else self.coords.astype(dtype)

    @property
    def dim(self) -> int:
        return self.coords.shape[0]


@dataclass(frozen=True)
class SpherePoint:
    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float)
        c.setflags(write=False)
        if abs(np.linalg.norm(c) - 1.0) > BOUNDARY_TOL:
            raise DomainError("point is not on the unit sphere")
        object.__setattr__(self, "coords", c)

    @classmethod
    def normalized(cls, v) -> "SpherePoint":
        v = np.asarray(v, dtype=float)
        return cls(v / np.linalg.norm(v))

    def __array__(self, dtype=None, copy=None):
        return self.coords if dtype is None else self.coords.astype(dtype)

    @property
    def dim(self) -> int:
        return self.coords.shape[0]


def _sq(v):
    return np.einsum("...i,...i->...", v, v)


def bracket_sq(x, a):
    """[x, a]^2 = 1 + |x|^2 |a|^2 - 2<x, a>.

    Summed as |x - a|^2 + (1 - |x|^2)(1 - |a|^2), which is the same polynomial
    but keeps full relative accuracy when x and a approach the same boundary
    point.
    """
    x = np.asarray(x, dtype=float)
    a = np.asarray(a, dtype=float)
    return _sq(x - a) + (1.0 - _sq(x)) * (1.0 - _sq(a))


def bracket(x, a):
    return np.sqrt(bracket_sq(x, a))


def moebius_map(a, x):
    """phi_a(x) = (|x - a|^2 a - (1 - |a|^2)(x - a)) / [x, a]^2."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    d = x - a
    num = _sq(d)[..., None] * a - (1.0 - _sq(a))[..., None] * d
    return num / bracket_sq(x, a)[..., None]


def conformal_factor(x, y):
    """|phi_x'(y)| = (1 - |x|^2) / [x, y]^2."""
    x = np.asarray(x, dtype=float)
    return (1.0 - _sq(x)) / bracket_sq(x, y)


def pseudo_distance(x, y):
    """|phi_x(y)| = |x - y| / [x, y], without forming phi_x(y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.sqrt(_sq(x - y) / bracket_sq(x, y))


def random_ball_points(rng: np.random.Generator, count: int, n: int, rmax: float = 0.95):
    """Points uniform in direction with radius uniform on [0, rmax)."""
    v = rng.standard_normal((count, n))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * rng.uniform(0.0, rmax, size=(count, 1))


def random_sphere_points(rng: np.random.Generator, count: int, n: int):
    v = rng.standard_normal((count, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def self_test(count: int = 1000, dims=(3, 4, 5), seed: int = 0) -> dict:
    """Maximum residuals of the Moebius identities over random pairs."""
    rng = np.random.default_rng(seed)
    out = {"involution": 0.0, "one_minus_norm": 0.0, "bracket_of_image": 0.0, "boundary": 0.0}
    for n in dims:
        x = random_ball_points(rng, count, n)
        y = random_ball_points(rng, count, n)
        z = moebius_map(x, y)
        out["involution"] = max(out["involution"], float(np.max(np.abs(moebius_map(x, z) - y))))
        lhs = 1.0 - _sq(z)
        rhs = (1.0 - _sq(x)) * (1.0 - _sq(y)) / bracket_sq(x, y)
        out["one_minus_norm"] = max(out["one_minus_norm"], float(np.max(np.abs(lhs - rhs))))
        lhs = bracket(x, z)
        rhs = (1.0 - _sq(x)) / bracket(x, y)
        out["bracket_of_image"] = max(out["bracket_of_image"], float(np.max(np.abs(lhs - rhs))))
        zeta = random_sphere_points(rng, count, n)
        img = moebius_map(x, zeta)
        out["boundary"] = max(out["boundary"], float(np.max(np.abs(np.linalg.norm(img, axis=-1) - 1.0))))
    return out
