"""Boundary growth of the singular integrals and of Poisson-integral gradients.

Every sweep samples a quantity at radii r -> 1 and fits a power of (1 - r)
on log-log axes (``fit_exponent``) or a straight line against -log(1 - r)
(``fit_log_growth``).  The sphere integrals are zonal about e_n, so they are
computed with graded one-dimensional rules in the polar angle.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import AccuracyWarning, DegenerateFitError, DomainError
from .moebius import Params
from .quadrature import ZonalRule, cap_rule, integrate_zonal, zonal_rule
from .solver import poisson_integral

WINDOW = (0.9, 0.999)
WINDOW_POINTS = 10


def window_radii(r_min: float = WINDOW[0], r_max: float = WINDOW[1], count: int = WINDOW_POINTS):
    """Radii with 1 - r geometrically spaced between 1 - r_min and 1 - r_max."""
    return 1.0 - np.geomspace(1.0 - r_min, 1.0 - r_max, count)


@dataclass
class ExponentFit:
    samples: list  # (1 - r, value)
    fitted_exponent: float
    r_squared: float
    window: tuple
    intercept: float = 0.0
    kind: str = "power"  # "power": value ~ C (1-r)^e ; "log": value ~ a + b(-log(1-r))
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"fitted_exponent": self.fitted_exponent, "r_squared": self.r_squared,
                "window": list(self.window), "intercept": self.intercept, "kind": self.kind,
                **self.extra}


def _linear_fit(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return float(slope), float(intercept), r2


def _validate(samples):
    if len(samples) < 4:
        raise DegenerateFitError(f"need at least 4 samples, got {len(samples)}")
    d = np.array([s[0] for s in samples], dtype=float)
    v = np.array([s[1] for s in samples], dtype=float)
    if np.any(d <= 0) or np.any(d >= 1):
        raise DegenerateFitError("1 - r must lie in (0, 1)")
    if len(np.unique(d)) != len(d):
        raise DegenerateFitError("radii are not distinct")
    return d, v


def _window(d):
    return (float(1 - d.max()), float(1 - d.min()))


def fit_exponent(samples) -> ExponentFit:
    """Least-squares slope of log(value) against log(1 - r)."""
    d, v = _validate(samples)
    if np.any(v <= 0):
        raise DegenerateFitError("values must be positive for a log-log fit")
    slope, icpt, r2 = _linear_fit(np.log(d), np.log(v))
    return ExponentFit([(float(a), float(b)) for a, b in zip(d, v)], slope, r2, _window(d), icpt)


def fit_log_growth(samples) -> ExponentFit:
    """Straight-line fit of value against -log(1 - r); the slope goes in ``fitted_exponent``."""
    d, v = _validate(samples)
    slope, icpt, r2 = _linear_fit(-np.log(d), v)
    return ExponentFit([(float(a), float(b)) for a, b in zip(d, v)], slope, r2, _window(d), icpt,
                       kind="log")


# --- zonal integrals -----------------------------------------------------------


def _zonal(n: int, r: float, rule: ZonalRule | None, order: int) -> ZonalRule:
    if rule is None:
        return zonal_rule(n, order, theta_min=max(1e-12, (1.0 - r) * 1e-3))
    if rule.theta_min > 0.1 * (1.0 - r):
        warnings.warn(f"zonal rule graded to {rule.theta_min:g} does not resolve 1-r = {1 - r:g}",
                      AccuracyWarning, stacklevel=3)
    return rule


def _dist2(r, theta):
    """|r e_n - t|^2 for t at polar angle theta, accurate near theta = 0, r = 1."""
    return (1.0 - r) ** 2 + 4.0 * r * np.sin(theta / 2) ** 2


def i_alpha(r: float, alpha: float, n: int = 3, rule: ZonalRule | None = None, order: int = 16) -> float:
    """int |e_n - t|^alpha / |r e_n - t|^n dsigma(t)."""
    if not 0 <= r < 1:
        raise DomainError("i_alpha needs 0 <= r < 1")
    z = _zonal(n, r, rule, order)
    return integrate_zonal(z, lambda th: (2 * np.sin(th / 2)) ** alpha / _dist2(r, th) ** (n / 2))


def j_alpha_beta(r: float, alpha: float, beta: float, n: int = 3, rule: ZonalRule | None = None,
                 order: int = 16):
    """(J, I): J = int |e_n - t|^beta / |r e_n - t|^{n+alpha} dsigma and I = (1-r)^alpha J."""
    if not 0 <= r < 1:
        raise DomainError("j_alpha_beta needs 0 <= r < 1")
    if not alpha > 0 or not 0 < beta <= 1:
        raise DomainError("j_alpha_beta needs alpha > 0 and 0 < beta <= 1")
    z = _zonal(n, r, rule, order)
    j = integrate_zonal(z, lambda th: (2 * np.sin(th / 2)) ** beta / _dist2(r, th) ** ((n + alpha) / 2))
    return j, (1.0 - r) ** alpha * j


def d_integral(r: float, rho: float, s: float, n: int = 3, rule: ZonalRule | None = None,
               order: int = 16) -> float:
    """int dsigma(xi) / [r e_n, rho xi]^s."""
    if not (0.5 < r < 1 and 0.5 < rho < 1):
        raise DomainError("d_integral needs 1/2 < r, rho < 1")
    z = _zonal(n, r * rho, rule, order)
    # [x, rho xi]^2 = (1 - r rho)^2 + 4 r rho sin^2(theta/2)
    return integrate_zonal(z, lambda th: _dist2(r * rho, th) ** (-s / 2))


def disc_i_alpha(r: float, alpha: float, order: int = 16) -> float:
    """(1/2pi) int_0^{2pi} (1-r^2)^alpha / |1 - r e^{it}|^{alpha+1} dt."""
    if not 0 <= r < 1:
        raise DomainError("disc_i_alpha needs 0 <= r < 1")
    z = zonal_rule(2, order, theta_min=max(1e-12, (1.0 - r) * 1e-3))
    return integrate_zonal(z, lambda t: (1 - r * r) ** alpha / _dist2(r, t) ** ((alpha + 1) / 2))


# --- sweeps ---------------------------------------------------------------------


def i_alpha_sweep(alpha: float, n: int = 3, radii=None, order: int = 16) -> ExponentFit:
    radii = window_radii() if radii is None else radii
    fit = fit_exponent([(1 - r, i_alpha(r, alpha, n, order=order)) for r in radii])
    fit.extra["reference"] = alpha - 1
    return fit


def j_alpha_beta_sweep(alpha: float, beta: float, n: int = 3, radii=None, order: int = 16) -> ExponentFit:
    radii = window_radii() if radii is None else radii
    fit = fit_exponent([(1 - r, j_alpha_beta(r, alpha, beta, n, order=order)[1]) for r in radii])
    fit.extra["reference"] = beta - 1
    return fit


def d_regime(s: float, n: int) -> str:
    if s > n - 1:
        return "power"
    if s == n - 1:
        return "log"
    return "bounded"


def d_integral_sweep(s: float, n: int = 3, radii=None, order: int = 16) -> ExponentFit:
    """D along the diagonal r = rho -> 1, fitted according to its regime.

    Power regime: exponent -(s - n + 1).  Log regime: straight line against
    -log(1 - rho).  Bounded regime: exponent 0.
    """
    radii = window_radii() if radii is None else radii
    samples = [(1 - r, d_integral(r, r, s, n, order=order)) for r in radii]
    regime = d_regime(s, n)
    fit = fit_log_growth(samples) if regime == "log" else fit_exponent(samples)
    fit.extra["regime"] = regime
    fit.extra["reference"] = {"power": -(s - n + 1), "log": None, "bounded": 0.0}[regime]
    return fit


def disc_sweep(alpha: float, radii=None, order: int = 16) -> ExponentFit:
    """alpha = 0 is fitted against -log(1 - r); alpha > 0 on log-log axes."""
    radii = 1.0 - np.geomspace(0.1, 1e-4, WINDOW_POINTS) if radii is None else radii
    samples = [(1 - r, disc_i_alpha(r, alpha, order)) for r in radii]
    if alpha == 0:
        fit = fit_log_growth(samples)
        fit.extra["reference"] = None
    else:
        fit = fit_exponent(samples)
        fit.extra["reference"] = 0.0
    fit.extra["max_value"] = max(v for _, v in samples)
    return fit


# --- gradient probes ------------------------------------------------------------


def holder_data(x0, beta: float):
    """zeta -> |zeta - x0|^beta."""
    x0 = np.asarray(x0, dtype=float)

    def f(z):
        return np.linalg.norm(np.asarray(z) - x0, axis=-1) ** beta

    return f


def poisson_gradient(p: Params, f, x, order: int = 12, step: float | None = None) -> np.ndarray:
    """Central-difference gradient of P_alpha[f] at x.

    The Poisson integral uses a rule graded toward x/|x| in both the kernel
    peak and the data, sampled directly.  The default step is
    min(1e-4, (1-|x|)/10).
    """
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if step is None:
        step = min(1e-4, (1.0 - r) / 10)
        if step < 1e-4:
            warnings.warn(f"finite-difference step reduced to (1-r)/10 = {step:.3g}",
                          AccuracyWarning, stacklevel=2)
    rule = cap_rule(x / r, order=order, sub_order=order, theta_min=min(1e-3, (1 - r) * 1e-2))
    g = np.empty(p.n)
    for i in range(p.n):
        e = np.zeros(p.n)
        e[i] = step
        plus = poisson_integral(p, f, x + e, rule, method="direct")
        minus = poisson_integral(p, f, x - e, rule, method="direct")
        g[i] = (plus - minus) / (2 * step)
    return g


def gradient_probe(p: Params, f, x0, radii=None, order: int = 12) -> ExponentFit:
    """Fit |grad P_alpha[f](r x0)| against 1 - r."""
    if not p.alpha > 0:
        raise DomainError("gradient probes need alpha > 0")
    x0 = np.asarray(x0, dtype=float)
    radii = window_radii() if radii is None else radii
    samples = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AccuracyWarning)
        for r in radii:
            samples.append((1 - r, float(np.linalg.norm(poisson_gradient(p, f, r * x0, order)))))
    return fit_exponent(samples)


def local_exponents(fit: ExponentFit):
    """Slopes between consecutive samples, for locating a radius window where a rate is violated."""
    d = np.array([s[0] for s in fit.samples])
    v = np.array([s[1] for s in fit.samples])
    order = np.argsort(-d)
    d, v = d[order], v[order]
    slopes = np.diff(np.log(v)) / np.diff(np.log(d))
    return [(float(1 - d[i]), float(1 - d[i + 1]), float(s)) for i, s in enumerate(slopes)]
