"""T_alpha, Delta_gamma, the hyperbolic Laplacian and the radial derivative.

Fields are vectorized: ``value(x)`` takes an array of shape ``(..., n)`` and
returns shape ``(...)``.  Missing derivatives fall back to central finite
differences.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import AccuracyWarning
from .moebius import Params, bracket, conformal_factor, moebius_map

Array = np.ndarray
RICHARDSON_SHELL = 0.9


@dataclass(frozen=True)
class ScalarField:
    """A real function on the ball with optional analytic derivatives.

    ``t_alpha_image``, when given, maps ``Params`` to a callable returning
    the closed-form T_alpha u; the manufactured corpus ships those.
    """

    value: Callable[[Array], Array]
    gradient: Optional[Callable[[Array], Array]] = None
    laplacian: Optional[Callable[[Array], Array]] = None
    fd_step: float = 1e-4
    name: str = "field"
    t_alpha_image: Optional[Callable[[Params], Callable[[Array], Array]]] = None

    def __call__(self, x) -> Array:
        return self.value(np.asarray(x, dtype=float))

    def numeric(self) -> "ScalarField":
        """Copy that forgets analytic derivatives (forces finite differences)."""
        return ScalarField(self.value, fd_step=self.fd_step, name=self.name + "[fd]")


def _check_step(x: Array, h: float):
    r = np.linalg.norm(x, axis=-1)
    if np.any(r + 2 * h >= 1.0):
        warnings.warn(
            f"finite-difference stencil of step {h:g} reaches within 2 steps of the sphere",
            AccuracyWarning,
            stacklevel=3,
        )


def _fd_gradient(f, x: Array, h: float) -> Array:
    n = x.shape[-1]
    g = np.empty(x.shape)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        g[..., i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def _fd_laplacian(f, x: Array, h: float, f0: Array | None = None) -> Array:
    n = x.shape[-1]
    f0 = f(x) if f0 is None else f0
    acc = np.zeros(x.shape[:-1])
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        acc = acc + (f(x + e) - 2 * f0 + f(x - e))
    return acc / (h * h)


def _richardson(op, x: Array, h: float) -> Array:
    """Central difference, refined once on the outer shell |x| > 0.9."""
    coarse = op(h)
    shell = np.linalg.norm(x, axis=-1) > RICHARDSON_SHELL
    if not np.any(shell):
        return coarse
    fine = op(h / 2)
    refined = (4 * fine - coarse) / 3
    if refined.ndim > shell.ndim:
        shell = shell[..., None]
    return np.where(shell, refined, coarse)


def gradient(u: ScalarField, x) -> Array:
    x = np.asarray(x, dtype=float)
    if u.gradient is not None:
        return np.asarray(u.gradient(x), dtype=float)
    _check_step(x, u.fd_step)
    return _richardson(lambda h: _fd_gradient(u.value, x, h), x, u.fd_step)


def laplacian(u: ScalarField, x) -> Array:
    x = np.asarray(x, dtype=float)
    if u.laplacian is not None:
        return np.asarray(u.laplacian(x), dtype=float)
    _check_step(x, u.fd_step)
    f0 = u.value(x)
    return _richardson(lambda h: _fd_laplacian(u.value, x, h, f0), x, u.fd_step)


def radial_derivative(u: ScalarField, x) -> Array:
    """Ru(x) = <x, grad u(x)>."""
    x = np.asarray(x, dtype=float)
    return np.einsum("...i,...i->...", x, gradient(u, x))


def t_alpha_apply(p: Params, u: ScalarField, x) -> Array:
    """(1-|x|^2) Lap u + 2 alpha <x, grad u> + (n-2-alpha) alpha u."""
    x = np.asarray(x, dtype=float)
    a = p.alpha
    rho = 1.0 - np.einsum("...i,...i->...", x, x)
    out = rho * laplacian(u, x) + (p.n - 2 - a) * a * u.value(x)
    if a != 0.0:
        out = out + 2 * a * radial_derivative(u, x)
    return out


def t_alpha_values(p: Params, u: ScalarField, x) -> Array:
    """T_alpha u from the field's closed form when it has one."""
    if u.t_alpha_image is not None:
        return np.asarray(u.t_alpha_image(p)(np.asarray(x, dtype=float)), dtype=float)
    return t_alpha_apply(p, u, x)


def delta_gamma_apply(gamma: float, u: ScalarField, x) -> Array:
    """(1-|x|^2) { (1-|x|^2)/4 Lap u + gamma <x, grad u> + gamma (n/2 - 1 - gamma) u }."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    rho = 1.0 - np.einsum("...i,...i->...", x, x)
    inner = rho / 4 * laplacian(u, x) + gamma * (n / 2 - 1 - gamma) * u.value(x)
    if gamma != 0.0:
        inner = inner + gamma * radial_derivative(u, x)
    return rho * inner


def delta_h_apply(u: ScalarField, x) -> Array:
    """(1-|x|^2)^2 Lap u + 2(n-2)(1-|x|^2) Ru."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    rho = 1.0 - np.einsum("...i,...i->...", x, x)
    return rho * rho * laplacian(u, x) + 2 * (n - 2) * rho * radial_derivative(u, x)


def moebius_pullback(p: Params, u: ScalarField, x) -> ScalarField:
    """y -> [x, y]^{-(n-2-alpha)} u(phi_x(y)), differentiated numerically."""
    x = np.asarray(x, dtype=float)
    e = p.n - 2 - p.alpha

    def v(y):
        return bracket(x, y) ** (-e) * u.value(moebius_map(x, y))

    return ScalarField(v, fd_step=u.fd_step, name=f"pullback({u.name})")


def invariance_residual(p: Params, u: ScalarField, x, y) -> Array:
    """T_alpha{[x,y]^{-(n-2-alpha)} u(phi_x(y))} minus (1-|x|^2)/[x,y]^{n-alpha} (T_alpha u)(phi_x(y)).

    The left side is differentiated in ``y`` by finite differences.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lhs = t_alpha_apply(p, moebius_pullback(p, u, x), y)
    xx = np.einsum("...i,...i->...", x, x)
    rhs = (1.0 - xx) / bracket(x, y) ** (p.n - p.alpha) * t_alpha_values(p, u, moebius_map(x, y))
    return lhs - rhs


def liu_peng_residual(gamma: float, u: ScalarField, x, y) -> Array:
    """Delta_gamma{|phi_x'(y)|^{(n-2-2g)/2} u(phi_x(y))} - |phi_x'(y)|^{(n-2-2g)/2} (Delta_gamma u)(phi_x(y))."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[-1]
    e = (n - 2 - 2 * gamma) / 2

    def v(z):
        return conformal_factor(x, z) ** e * u.value(moebius_map(x, z))

    lhs = delta_gamma_apply(gamma, ScalarField(v, fd_step=u.fd_step), y)
    rhs = conformal_factor(x, y) ** e * delta_gamma_apply(gamma, u, moebius_map(x, y))
    return lhs - rhs
