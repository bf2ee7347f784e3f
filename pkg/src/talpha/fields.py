"""Test fields with analytic gradients, Laplacians and T_alpha images.

The manufactured corpus used by the solver checks lives here, along with
T_alpha-harmonic fields (Poisson kernel, its low spherical-harmonic slices,
the regular radial solution) and the Green function as a field.
"""

from __future__ import annotations

import itertools

import numpy as np

from . import kernels
from .moebius import Params
from .operators import ScalarField
from .specfun import hyp2f1, hyp2f1_at_one, hyp2f1_complement, hyp2f1_derivative


def _radial_value(hp, t):
    """F(a, b; c; t) for 0 <= t <= 1 (rounding may push sphere nodes to t = 1)."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    w = 1.0 - t
    inner = w >= 0.5
    edge = w <= 0.0
    mid = ~inner & ~edge
    if inner.any():
        out[inner] = hyp2f1(hp, t[inner])
    if mid.any():
        out[mid] = hyp2f1_complement(hp, w[mid])
    if edge.any():
        out[edge] = hyp2f1_at_one(hp)
    return out[()]


def _sq(x):
    return np.einsum("...i,...i->...", x, x)


def _t_from(p: Params, x, u, ru, lap):
    rho = 1.0 - _sq(x)
    return rho * lap + 2 * p.alpha * ru + (p.n - 2 - p.alpha) * p.alpha * u


def constant(c: float = 1.0) -> ScalarField:
    return ScalarField(
        value=lambda x: np.full(x.shape[:-1], float(c)),
        gradient=lambda x: np.zeros(x.shape),
        laplacian=lambda x: np.zeros(x.shape[:-1]),
        name=f"const({c})",
        t_alpha_image=lambda p: (lambda x: np.full(x.shape[:-1], (p.n - 2 - p.alpha) * p.alpha * c)),
    )


def one_minus_r2() -> ScalarField:
    def value(x):
        return 1.0 - _sq(x)

    def image(p):
        def t(x):
            r2 = _sq(x)
            return _t_from(p, x, 1.0 - r2, -2.0 * r2, -2.0 * p.n)

        return t

    return ScalarField(value, lambda x: -2.0 * x, lambda x: np.full(x.shape[:-1], -2.0 * x.shape[-1]),
                       name="one-minus-r2", t_alpha_image=image)


def one_minus_r2_squared() -> ScalarField:
    def value(x):
        return (1.0 - _sq(x)) ** 2

    def grad(x):
        return -4.0 * (1.0 - _sq(x))[..., None] * x

    def lap(x):
        n = x.shape[-1]
        return -4.0 * n + 4.0 * (n + 2) * _sq(x)

    def image(p):
        def t(x):
            r2 = _sq(x)
            return _t_from(p, x, (1 - r2) ** 2, -4 * r2 * (1 - r2), lap(x))

        return t

    return ScalarField(value, grad, lap, name="one-minus-r2-squared", t_alpha_image=image)


def coordinate(i: int = 0) -> ScalarField:
    def grad(x):
        g = np.zeros(x.shape)
        g[..., i] = 1.0
        return g

    return ScalarField(
        value=lambda x: x[..., i].copy(),
        gradient=grad,
        laplacian=lambda x: np.zeros(x.shape[:-1]),
        name=f"x{i + 1}",
        t_alpha_image=lambda p: (lambda x: p.alpha * (p.n - p.alpha) * x[..., i]),
    )


def saddle() -> ScalarField:
    """x1^2 - x2^2 (harmonic, homogeneous of degree 2)."""

    def value(x):
        return x[..., 0] ** 2 - x[..., 1] ** 2

    def grad(x):
        g = np.zeros(x.shape)
        g[..., 0] = 2 * x[..., 0]
        g[..., 1] = -2 * x[..., 1]
        return g

    return ScalarField(
        value, grad, lambda x: np.zeros(x.shape[:-1]), name="x1sq-x2sq",
        t_alpha_image=lambda p: (lambda x: p.alpha * (p.n + 2 - p.alpha) * value(x)),
    )


class Polynomial:
    """sum_k c_k x^{e_k} with exact derivatives."""

    def __init__(self, terms: dict):
        self.terms = {tuple(int(v) for v in e): float(c) for e, c in terms.items() if c != 0.0}

    @classmethod
    def random(cls, rng: np.random.Generator, n: int, degree: int = 4, density: float = 0.5):
        terms = {}
        for e in itertools.product(range(degree + 1), repeat=n):
            if sum(e) <= degree and rng.uniform() < density:
                terms[e] = rng.uniform(-1, 1)
        return cls(terms)

    def _eval(self, x, terms):
        out = np.zeros(x.shape[:-1])
        for e, c in terms.items():
            out = out + c * np.prod(x ** np.asarray(e, dtype=float), axis=-1)
        return out

    def _partial(self, i, terms=None):
        res = {}
        for e, c in (terms or self.terms).items():
            if e[i] > 0:
                f = list(e)
                f[i] -= 1
                res[tuple(f)] = res.get(tuple(f), 0.0) + c * e[i]
        return res

    def field(self, name: str = "poly") -> ScalarField:
        n = len(next(iter(self.terms))) if self.terms else 3
        d1 = [self._partial(i) for i in range(n)]
        d2 = [self._partial(i, d1[i]) for i in range(n)]

        def grad(x):
            return np.stack([self._eval(x, d1[i]) for i in range(n)], axis=-1)

        def lap(x):
            return sum(self._eval(x, d2[i]) for i in range(n))

        def value(x):
            return self._eval(x, self.terms)

        def image(p):
            return lambda x: _t_from(p, x, value(x), np.einsum("...i,...i->...", x, grad(x)), lap(x))

        return ScalarField(value, grad, lap, name=name, t_alpha_image=image)


def poisson_slice(p: Params, zeta) -> ScalarField:
    """x -> P_alpha(x, zeta) for fixed zeta on the sphere (T_alpha-harmonic)."""
    zeta = np.asarray(zeta, dtype=float)
    A = 1.0 + p.alpha
    B = (p.n + p.alpha) / 2

    def value(x):
        return kernels.poisson_kernel(p, x, zeta)

    def grad(x):
        u = value(x)
        rho = 1.0 - _sq(x)
        d = x - zeta
        D = _sq(d)
        return u[..., None] * (-2 * A * x / rho[..., None] - 2 * B * d / D[..., None])

    def lap(x):
        n = x.shape[-1]
        c = kernels.constants(p).c_alpha_calibrated
        rho = 1.0 - _sq(x)
        d = x - zeta
        D = _sq(d)
        f = rho**A
        g = D ** (-B)
        lf = -2 * A * n * rho ** (A - 1) + 4 * A * (A - 1) * rho ** (A - 2) * _sq(x)
        lg = D ** (-B - 1) * (-2 * B * n + 4 * B * (B + 1))
        cross = 4 * A * B * rho ** (A - 1) * D ** (-B - 1) * np.einsum("...i,...i->...", x, d)
        return c * (g * lf + 2 * cross + f * lg)

    return ScalarField(value, grad, lap, name="poisson-slice",
                       t_alpha_image=lambda q: (lambda x: np.zeros(x.shape[:-1])))


def _harmonic_parts(k: int, zeta):
    """Zonal harmonic Y_k(x) = |x|^k Z_k(x/|x|, zeta) for sigma-normalized Z_k, k <= 2."""
    zeta = np.asarray(zeta, dtype=float)
    n = zeta.shape[0]
    if k == 0:
        return (lambda x: np.ones(x.shape[:-1]), lambda x: np.zeros(x.shape))
    if k == 1:
        return (lambda x: n * (x @ zeta), lambda x: np.broadcast_to(n * zeta, x.shape).copy())
    if k == 2:
        def y(x):
            t = x @ zeta
            return (n + 2) * (n * t * t - _sq(x)) / 2

        def gy(x):
            t = x @ zeta
            return (n + 2) * (n * t[..., None] * zeta - x)

        return y, gy
    raise ValueError("zonal harmonics implemented for k <= 2")


def radial_solution_params(p: Params, k: int = 0):
    """(a, b, c) with Y_k(x) F(a, b; c; |x|^2) T_alpha-harmonic."""
    return (-p.alpha / 2, (p.n - 2 - p.alpha) / 2 + k, p.n / 2 + k)


def kernel_slice(p: Params, zeta, degrees=(0, 1, 2), normalized: bool = True) -> ScalarField:
    """Sum over k of the degree-k spherical-harmonic slice of P_alpha(., zeta).

    Each slice is Y_k(x) F_k(|x|^2) / F_k(1), the T_alpha-harmonic extension
    of the zonal harmonic Z_k(., zeta); the sum is smooth on the closed ball
    with boundary trace sum_k Z_k(., zeta).  With ``normalized=False`` the
    factors 1/F_k(1) are dropped.
    """
    parts = []
    for k in degrees:
        hp = radial_solution_params(p, k)
        norm = 1.0 / hyp2f1_at_one(hp) if normalized else 1.0
        y, gy = _harmonic_parts(k, zeta)
        parts.append((k, hp, norm, y, gy))

    def value(x):
        t = _sq(x)
        return sum(nm * y(x) * _radial_value(hp, t) for k, hp, nm, y, gy in parts)

    def grad(x):
        t = _sq(x)
        out = np.zeros(x.shape)
        for k, hp, nm, y, gy in parts:
            g = _radial_value(hp, t)
            g1 = hyp2f1_derivative(hp, t)
            out = out + nm * (g[..., None] * gy(x) + 2 * (g1 * y(x))[..., None] * x)
        return out

    def lap(x):
        n = x.shape[-1]
        t = _sq(x)
        out = np.zeros(x.shape[:-1])
        for k, hp, nm, y, gy in parts:
            g1 = hyp2f1_derivative(hp, t)
            g2 = hyp2f1_derivative(hp, t, 2)
            out = out + nm * y(x) * (4 * t * g2 + (2 * n + 4 * k) * g1)
        return out

    def boundary(zs):
        return sum(nm * y(zs) * hyp2f1_at_one(hp) for k, hp, nm, y, gy in parts)

    f = ScalarField(value, grad, lap, name="kernel-slice",
                    t_alpha_image=lambda q: (lambda x: np.zeros(x.shape[:-1])))
    object.__setattr__(f, "boundary", boundary)
    return f


def regular_radial(p: Params) -> ScalarField:
    """F(-alpha/2, (n-2-alpha)/2; n/2; |x|^2), T_alpha-harmonic with value 1 at 0."""
    return kernel_slice(p, np.eye(p.n)[0], degrees=(0,), normalized=False)


def green_field(p: Params) -> ScalarField:
    """G_alpha as a field; gradient from RG_alpha, Laplacian by finite differences."""

    def grad(x):
        s = np.linalg.norm(x, axis=-1)
        return (kernels.green_derivative_profile(p, s) / (s * s))[..., None] * x

    return ScalarField(
        lambda x: kernels.green_radial(p, x), grad, None, name="green",
        t_alpha_image=lambda q: (lambda x: np.zeros(x.shape[:-1])),
    )


MANUFACTURED = {
    "one-minus-r2": one_minus_r2,
    "x1": lambda: coordinate(0),
    "x1sq-x2sq": saddle,
    "one-minus-r2-squared": one_minus_r2_squared,
}


def manufactured(name: str, p: Params | None = None) -> ScalarField:
    if name == "kernel-slice":
        if p is None:
            raise ValueError("kernel-slice needs Params")
        zeta = np.ones(p.n) / np.sqrt(p.n)
        return kernel_slice(p, zeta)
    try:
        return MANUFACTURED[name]()
    except KeyError:
        raise ValueError(f"unknown manufactured case {name!r}; "
                         f"choose from {sorted(MANUFACTURED) + ['kernel-slice']}") from None
