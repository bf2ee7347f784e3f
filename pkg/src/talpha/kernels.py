"""Poisson kernel, Green function and their hyperbolic counterparts.

Sphere integrals use the normalized surface measure sigma throughout.  The
Poisson kernel carries the calibrated constant ``c_alpha_calibrated``; the
radial Green function carries ``d_alpha_paper``.  The solver multiplies Green
potentials by ``green_factor`` and an audited sign (see ``solver.audit_sign``).
"""

from __future__ import annotations

import dataclasses
import math
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import DomainError, SingularityError
from .moebius import Params, bracket, conformal_factor, pseudo_distance
from .specfun import fd_derivatives, gamma, hyp2f1_at_one, hyp2f1_complement, limit_ratio_at_one


@dataclasses.dataclass(frozen=True)
class KernelConstants:
    c_alpha_paper: float
    d_alpha_paper: float
    c_alpha_calibrated: float
    # magnitude of the Green-term coefficient under sigma-normalized sphere
    # integrals and Lebesgue volume: 1 / ((alpha + 1) |S^{n-1}|)
    green_factor: float
    sign_audit: dict = dataclasses.field(default_factory=dict)

    @property
    def printed_to_calibrated(self) -> float:
        return self.c_alpha_paper / self.c_alpha_calibrated

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["c_alpha_printed_over_calibrated"] = self.printed_to_calibrated
        d["c_times_d_printed"] = self.c_alpha_paper * self.d_alpha_paper
        return d


def sphere_area(n: int) -> float:
    """Unnormalized area of S^{n-1}."""
    return 2 * math.pi ** (n / 2) / gamma(n / 2)


def ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / gamma(n / 2 + 1)


def radial_params(p: Params):
    """(a, b, c) of the regular radial T_alpha-harmonic solution F(a, b; c; |x|^2)."""
    return (-p.alpha / 2, (p.n - 2 - p.alpha) / 2, p.n / 2)


def green_params(p: Params, shift: int = 0):
    """((alpha+n)/2, (alpha+2)/2, alpha+2-shift) used by G_alpha (shift 0) and RG_alpha (shift 1)."""
    a = p.alpha
    return ((a + p.n) / 2, (a + 2) / 2, a + 2 - shift)


def calibrate_c_alpha(p: Params) -> float:
    """Constant making u(0) = c * int u dsigma for the regular radial solution."""
    return 1.0 / hyp2f1_at_one(radial_params(p))


@lru_cache(maxsize=None)
def constants(p: Params) -> KernelConstants:
    a, n = p.alpha, p.n
    ratio = gamma(a + 1) * gamma(n / 2) / (gamma((a + n) / 2) * gamma((a + 2) / 2))
    return KernelConstants(
        c_alpha_paper=-2.0 * ratio,
        d_alpha_paper=-0.5 / ratio,
        c_alpha_calibrated=calibrate_c_alpha(p),
        green_factor=1.0 / ((a + 1) * sphere_area(n)),
    )


def _sq(v):
    return np.einsum("...i,...i->...", v, v)


def poisson_kernel(p: Params, x, zeta, c: float | None = None):
    """c (1-|x|^2)^{1+alpha} / |x - zeta|^{n+alpha}."""
    x = np.asarray(x, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    c = constants(p).c_alpha_calibrated if c is None else c
    return c * (1.0 - _sq(x)) ** (1 + p.alpha) / _sq(x - zeta) ** ((p.n + p.alpha) / 2)


def green_profile(p: Params, s):
    """G_alpha as a function of s = |x| in (0, 1]."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise SingularityError("G_alpha is singular at the origin")
    if np.any(s > 1):
        raise DomainError("G_alpha is defined for |x| <= 1")
    d = constants(p).d_alpha_paper
    s2 = s * s
    return d * (1.0 - s2) ** (p.alpha + 1) * hyp2f1_complement(green_params(p), s2)


def green_ode_profile(p: Params, t):
    """g(t) = (1-t)^{alpha+1} F((alpha+n)/2, (alpha+2)/2; alpha+2; 1-t), i.e. G_alpha / d_alpha at |x|^2 = t."""
    t = np.asarray(t, dtype=float)
    return (1.0 - t) ** (p.alpha + 1) * hyp2f1_complement(green_params(p), t)


def radial_ode_residual(p: Params, t: float, rel_step: float = 2e-3) -> float:
    """t(1-t)g'' + (n/2 - (n/2-alpha)t)g' + (n-2-alpha)alpha/4 g for g = green_ode_profile.

    Derivatives by the fourth-order central stencil with step
    ``rel_step * min(t, 1-t)``: g varies on the scale of the distance to
    the singular points 0 and 1.
    """
    t = float(t)
    if not 0 < t < 1:
        raise DomainError("radial ODE residual needs 0 < t < 1")
    g, d1, d2 = fd_derivatives(lambda s: float(green_ode_profile(p, s)), t, rel_step * min(t, 1 - t))
    n, a = p.n, p.alpha
    return t * (1 - t) * d2 + (n / 2 - (n / 2 - a) * t) * d1 + (n - 2 - a) * a / 4 * g


def green_radial(p: Params, x):
    return green_profile(p, np.linalg.norm(np.asarray(x, dtype=float), axis=-1))


def green_derivative_profile(p: Params, s):
    """RG_alpha = -2 d (alpha+1) s^2 (1-s^2)^alpha F((alpha+n)/2, (alpha+2)/2; alpha+1; 1-s^2)."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise SingularityError("RG_alpha is singular at the origin")
    if np.any(s >= 1):
        raise DomainError("RG_alpha is evaluated for |x| < 1")
    d = constants(p).d_alpha_paper
    s2 = s * s
    return -2 * d * (p.alpha + 1) * s2 * (1.0 - s2) ** p.alpha * hyp2f1_complement(green_params(p, 1), s2)


def green_radial_derivative(p: Params, x):
    return green_derivative_profile(p, np.linalg.norm(np.asarray(x, dtype=float), axis=-1))


def green_origin_constant(p: Params) -> float:
    """lim_{s->0} s^{n-2} G_alpha(s)."""
    return constants(p).d_alpha_paper * k_alpha_limit(p)


def green_derivative_origin_constant(p: Params) -> float:
    """lim_{s->0} s^{n-2} RG_alpha(s)."""
    a, n = p.alpha, p.n
    g = gamma(a + 1) * gamma(n / 2) / (gamma((a + n) / 2) * gamma((a + 2) / 2))
    return -2 * constants(p).d_alpha_paper * (a + 1) * g


def k_alpha_limit(p: Params) -> float:
    """lim_{s->0} k_alpha(s) = Gamma(alpha+2) Gamma((n-2)/2) / (Gamma((alpha+n)/2) Gamma((alpha+2)/2))."""
    return limit_ratio_at_one(green_params(p))


def k_alpha(p: Params, s):
    """k_alpha(s) = s^{n-2} F((alpha+n)/2, (alpha+2)/2; alpha+2; 1-s^2), continuous at 0."""
    s = np.asarray(s, dtype=float)
    out = np.empty_like(s)
    zero = s == 0
    out[zero] = k_alpha_limit(p)
    pos = ~zero
    if np.any(pos):
        out[pos] = s[pos] ** (p.n - 2) * hyp2f1_complement(green_params(p), s[pos] ** 2)
    return out[()]


def h_alpha_density(p: Params, s):
    """h_alpha(s) = G_alpha(s) (1-s^2)^{-alpha-1} = d s^{2-n} k_alpha(s)."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise SingularityError("h_alpha is singular at the origin")
    return constants(p).d_alpha_paper * s ** (2 - p.n) * k_alpha(p, s)


def green_two_point(p: Params, x, y):
    """|phi_x'(y)|^{(n-2-alpha)/2} G_alpha(phi_x(y)), the Moebius-composed Green function."""
    s = pseudo_distance(x, y)
    if np.any(s == 0):
        raise SingularityError("G_alpha(x, y) is singular at x = y")
    return conformal_factor(x, y) ** ((p.n - 2 - p.alpha) / 2) * green_profile(p, s)


def green_kernel(p: Params, x, y):
    """[x, y]^{-(n-2-alpha)} G_alpha(phi_x(y)).

    This is the kernel that the change of variables z = phi_x(y) produces
    when the center mean-value identity is transported to x.  It differs from
    ``green_two_point`` by the factor (1-|x|^2)^{-(n-2-alpha)/2}, constant in y.
    """
    s = pseudo_distance(x, y)
    if np.any(s == 0):
        raise SingularityError("G_alpha(x, y) is singular at x = y")
    return bracket(x, y) ** (-(p.n - 2 - p.alpha)) * green_profile(p, s)


# --- hyperbolic case -------------------------------------------------------


def _g_integrand(s, n):
    return (1.0 - s * s) ** (n - 2) / s ** (n - 1)


def hyperbolic_g(r: float, t: float = 1.0, n: int = 3) -> float:
    """g(r, t) = int_r^t (1-s^2)^{n-2} / s^{n-1} ds by adaptive Gauss-Kronrod."""
    if not 0 <= r <= t <= 1:
        raise DomainError("hyperbolic_g needs 0 <= r <= t <= 1")
    if r == 0:
        raise SingularityError("g(0, t) diverges for n >= 3")
    if r == t:
        return 0.0
    val, _ = integrate.quad(_g_integrand, r, t, args=(n,), epsabs=1e-12, epsrel=1e-12, limit=200)
    return val


def hyperbolic_g_closed(r, n: int, t=1.0):
    """g(r, t) from the term-wise antiderivative of the binomial expansion (vectorized)."""
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(r <= 0):
        raise SingularityError("g(0, t) diverges for n >= 3")
    out = np.zeros(np.broadcast(r, t).shape)
    for j in range(n - 1):
        coef = math.comb(n - 2, j) * (-1) ** j
        e = 2 * j + 2 - n
        if e == 0:
            out = out + coef * np.log(t / r)
        else:
            out = out + coef * (t**e - r**e) / e
    return out[()]


def hyperbolic_green(x, y):
    """G_h(x, y) = g(|x - y| / [x, y])."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    s = pseudo_distance(x, y)
    if np.any(s == 0):
        raise SingularityError("G_h(x, y) is singular at x = y")
    return hyperbolic_g_closed(s, n)


def poisson_szego(x, zeta):
    """P_h(x, zeta) = ((1-|x|^2) / |zeta - x|^2)^{n-1}."""
    x = np.asarray(x, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    n = x.shape[-1]
    return ((1.0 - _sq(x)) / _sq(zeta - x)) ** (n - 1)


def hyperbolic_green_factor(n: int) -> float:
    """Coefficient of the hyperbolic Green potential: 1 / |S^{n-1}|."""
    return 1.0 / sphere_area(n)
