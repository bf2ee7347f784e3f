"""Poisson integrals, Green potentials, the Dirichlet solve and identity checks.

Normalizations: sphere integrals use sigma (mass 1), volume integrals use
Lebesgue dV.  With those, the Green term of the representation carries the
factor ``KernelConstants.green_factor`` = 1/((alpha+1)|S^{n-1}|) and a sign
fixed once per (n, alpha) by ``audit_sign``.

Both integrals are evaluated after the change of variables z = phi_x(y),
which moves the singularity of the Green kernel to the origin (resolved by
the Gauss-Jacobi panel of the ball rule) and spreads the Poisson kernel's
peak near the boundary over the whole sphere.
"""

from __future__ import annotations

import dataclasses
import itertools
import json
import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import kernels
from .errors import AccuracyWarning, DomainError, IntegrationError
from .moebius import Params, bracket, moebius_map, pseudo_distance
from .operators import ScalarField, delta_h_apply, radial_derivative, t_alpha_values
from .quadrature import (BallRule, SphereRule, ball_rule, graded_ball_rule, graded_scale,
                         graded_sphere_rule, householder_to, integrate_ball, integrate_sphere,
                         sphere_rule)
from .specfun import hyp2f1_complement

DEFAULT_RADII = (0.0, 0.2, 0.4, 0.6, 0.8)
DEFAULT_DIRECTIONS = 26
MONOTONE_FLOOR = 1e-11


def _sq(v):
    return np.einsum("...i,...i->...", v, v)


@dataclass(frozen=True)
class DirichletProblem:
    """T_alpha u = psi in the ball, u = phi on the sphere."""

    params: Params
    phi: Callable[[np.ndarray], np.ndarray]
    psi: Callable[[np.ndarray], np.ndarray]
    psi_bound_check: Optional[float] = None
    psi_integrable_check: bool = False

    def check(self, sphere: SphereRule, ball: BallRule):
        vals = np.asarray(self.phi(sphere.nodes), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise DomainError("boundary data is not finite on the sphere nodes")
        if self.psi_bound_check is not None:
            m = float(self.psi_bound_check)
            rho = 1.0 - _sq(ball.nodes)
            psi = np.abs(np.asarray(self.psi(ball.nodes), dtype=float))
            worst = float(np.max(psi / rho))
            if worst > m * (1 + 1e-12):
                raise DomainError(f"|psi| <= M (1-|x|^2) fails on the ball nodes: ratio {worst:.6g} > M = {m:g}")
        if self.psi_integrable_check:
            total = float(np.sum(ball.weights * np.abs(np.asarray(self.psi(ball.nodes), dtype=float))))
            if not math.isfinite(total):
                raise DomainError("int |psi| dV is not finite on the ball rule")


@dataclass
class VerifyReport:
    sup_error: float
    residual_tables: list = field(default_factory=list)  # (point tuple, residual)
    convergence: list = field(default_factory=list)  # (order, error, runtime or None)
    sign_audit_outcome: int = 1
    notes: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def monotone(self) -> bool:
        return convergence_is_monotone([e for _, e, *_ in self.convergence])

    def to_dict(self) -> dict:
        return {
            "sup_error": self.sup_error,
            "sign_audit_outcome": self.sign_audit_outcome,
            "monotone": self.monotone,
            "convergence": [{"order": o, "sup_error": e} for o, e, *_ in self.convergence],
            "residual_tables": [{"point": list(pt), "residual": r} for pt, r in self.residual_tables],
            "notes": self.notes,
            **self.extra,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def convergence_csv(self, timing: bool = False) -> str:
        lines = ["order,sup_error,runtime_seconds"]
        for o, e, *rest in self.convergence:
            t = rest[0] if rest and timing and rest[0] is not None else None
            lines.append(f"{o},{e:.17g},{'NA' if t is None else f'{t:.6f}'}")
        return "\n".join(lines) + "\n"


def convergence_is_monotone(errors, floor: float = MONOTONE_FLOOR) -> bool:
    """Non-increasing after the first refinement, ignoring changes below ``floor``.

    Once the error reaches rounding level it fluctuates; differences under the
    floor are not counted as increases.
    """
    errs = list(errors)[1:]
    return all(b <= max(a, floor) for a, b in zip(errs, errs[1:]))


# --- the two integral operators ---------------------------------------------


METHODS = ("graded", "moebius", "direct")


def _rotate_to(nodes, x):
    """Rotate nodes graded toward e_n so that they grade toward x/|x|."""
    r = math.sqrt(float(_sq(x)))
    if r == 0.0:
        return nodes
    return nodes @ householder_to(x / r).T


def local_sphere_rule(x, order: int):
    """(nodes, rule): graded sphere rule of ``order`` pointed at x/|x|."""
    x = np.asarray(x, dtype=float)
    rule = graded_sphere_rule(x.shape[-1], order, graded_scale(math.sqrt(float(_sq(x)))))
    return _rotate_to(rule.nodes, x), rule


def local_ball_rule(x, radial_order: int, sphere_order: int):
    """(nodes, rule): graded ball rule pointed at x/|x|."""
    x = np.asarray(x, dtype=float)
    rule = graded_ball_rule(x.shape[-1], radial_order, sphere_order,
                            graded_scale(math.sqrt(float(_sq(x)))))
    return _rotate_to(rule.nodes, x), rule


def poisson_integral(p: Params, phi, x, rule: SphereRule, method: str = "graded",
                     hyperbolic: bool = False) -> float:
    """c_alpha int P_alpha(x, zeta) phi(zeta) dsigma(zeta).

    ``method="direct"`` samples the kernel at the rule's nodes; it needs
    1 - |x| well above 1/order.  ``method="moebius"`` integrates
    c [x, zeta]^{-(n-2-alpha)} phi(phi_x(zeta)) on the rule's nodes, the same
    integral after zeta -> phi_x(zeta).  ``method="graded"`` does the same on a
    rule of the same order graded toward x/|x|, where the pulled-back data
    varies fastest.  ``hyperbolic`` uses P_h, i.e. alpha = n-2 with constant 1.
    """
    x = np.asarray(x, dtype=float)
    if not _sq(x) < 1.0:
        raise DomainError("poisson_integral needs |x| < 1")
    if hyperbolic:
        p = Params(p.n, p.n - 2)
        c = 1.0
    else:
        c = kernels.constants(p).c_alpha_calibrated
    zs = rule.nodes
    if method == "direct":
        if 1.0 - math.sqrt(float(_sq(x))) < 10.0 / rule.order:
            warnings.warn(
                f"Poisson kernel under-resolved: 1-|x| = {1 - math.sqrt(float(_sq(x))):.3g} "
                f"< 10/order = {10 / rule.order:.3g}", AccuracyWarning, stacklevel=2)
        if hyperbolic:
            k = kernels.poisson_szego(x, zs)
        else:
            k = kernels.poisson_kernel(p, x, zs, c=c)
        return integrate_sphere(rule, k * np.asarray(phi(zs), dtype=float))
    if method in ("moebius", "graded"):
        if method == "graded":
            zs, rule = local_sphere_rule(x, rule.order)
        e = p.n - 2 - p.alpha
        w = bracket(x, zs) ** (-e) if e != 0 else 1.0
        vals = w * np.asarray(phi(moebius_map(x, zs)), dtype=float)
        return c * _checked_sum(rule, vals, zs)
    raise ValueError(f"unknown method {method!r}")


def green_density(p: Params, s, hyperbolic: bool = False):
    """Radial density h(s) of the pulled-back Green potential.

    G_alpha(s) (1-s^2)^{-alpha-1}, or g(s) (1-s^2)^{-n} in the hyperbolic case.
    """
    if hyperbolic:
        s = np.asarray(s, dtype=float)
        return kernels.hyperbolic_g_closed(s, p.n) / (1.0 - s * s) ** p.n
    return kernels.h_alpha_density(p, s)


def green_potential(p: Params, psi, x, rule: BallRule, method: str = "graded",
                    hyperbolic: bool = False, skipped: list | None = None) -> float:
    """int psi(z) G_alpha(x, z) (1-|z|^2)^{-alpha-1} dV(z), without the green_factor.

    The two-point kernel is G_alpha(x, z) = [x, z]^{-(n-2-alpha)} G_alpha(|phi_x(z)|),
    which reduces to G_alpha(z) at x = 0.  With ``hyperbolic`` the kernel is
    G_h(x, z) = g(|phi_x(z)|) against dV / (1-|z|^2)^n.

    ``method="moebius"`` integrates
    (1-|x|^2) [x, y]^{alpha-n} psi(phi_x(y)) h(|y|) dV(y); the hyperbolic
    measure is invariant so there the weight is 1.  ``method="graded"`` does
    the same on a ball rule whose angular part is graded toward x/|x|
    (orders taken from ``rule``).  ``method="direct"``
    samples the kernel at the nodes and skips nodes coinciding with x
    (their indices are appended to ``skipped``).
    """
    x = np.asarray(x, dtype=float)
    if not _sq(x) < 1.0:
        raise DomainError("green_potential needs |x| < 1")
    ys = rule.nodes
    if method in ("moebius", "graded"):
        if method == "graded":
            ys, rule = local_ball_rule(x, rule.radial_order, rule.sphere_order)
        h = green_density(p, rule.radii, hyperbolic)
        vals = np.asarray(psi(moebius_map(x, ys)), dtype=float)
        if hyperbolic:
            w = 1.0
        else:
            w = (1.0 - _sq(x)) * bracket(x, ys) ** (p.alpha - p.n)
        return _checked_sum(rule, w * h * vals, ys)
    if method == "direct":
        s = pseudo_distance(x, ys)
        keep = s > 1e-12
        if skipped is not None:
            skipped.extend(np.flatnonzero(~keep).tolist())
        ys_k, s_k = ys[keep], s[keep]
        rho = 1.0 - _sq(ys_k)
        if hyperbolic:
            k = kernels.hyperbolic_g_closed(s_k, p.n) / rho**p.n
        else:
            k = bracket(x, ys_k) ** (-(p.n - 2 - p.alpha)) * kernels.green_profile(p, s_k) * rho ** (-p.alpha - 1)
        vals = k * np.asarray(psi(ys_k), dtype=float)
        if not np.all(np.isfinite(vals)):
            i = int(np.argmax(~np.isfinite(vals)))
            raise IntegrationError(f"Green integrand not finite at node {ys_k[i]}", node=ys_k[i])
        return float(np.dot(rule.weights[keep], vals))
    raise ValueError(f"unknown method {method!r}")


def _checked_sum(rule, vals, nodes):
    bad = ~np.isfinite(vals)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise IntegrationError(f"Green integrand not finite at node {nodes[i]}", node=nodes[i])
    return float(np.dot(rule.weights, vals))


# --- sign audit -----------------------------------------------------------

_AUDITS: dict = {}


def audit_sign(p: Params, sphere_order: int = 16, radial_order: int = 24) -> kernels.KernelConstants:
    """Fix the sign of the Green term from u = 1-|x|^2 at the center.

    Both signs are tried; the one reproducing u(0) = 1 wins.  The outcome
    and both residuals are stored in the returned constants' ``sign_audit``
    and cached for later solves.
    """
    if p in _AUDITS:
        return _AUDITS[p]
    from .fields import one_minus_r2

    kc = kernels.constants(p)
    u = one_minus_r2()
    sr = sphere_rule(p.n, sphere_order)
    br = ball_rule(p.n, radial_order, sphere_order)
    s1 = kc.c_alpha_calibrated * integrate_sphere(sr, u)
    vol = kc.green_factor * _center_volume(p, u, br)
    plus = abs(s1 + vol - 1.0)
    minus = abs(s1 - vol - 1.0)
    sign = 1 if plus <= minus else -1
    audit = {"sign": sign, "residual_plus": plus, "residual_minus": minus,
             "green_factor": kc.green_factor,
             "green_factor_times_volume": kc.green_factor * kernels.ball_volume(p.n)}
    out = dataclasses.replace(kc, sign_audit=audit)
    _AUDITS[p] = out
    return out


def audited_sign(p: Params) -> int:
    return audit_sign(p).sign_audit["sign"]


def _center_volume(p: Params, u: ScalarField, br: BallRule) -> float:
    tu = t_alpha_values(p, u, br.nodes)
    return integrate_ball(br, tu * kernels.h_alpha_density(p, br.radii))


# --- Dirichlet problem ------------------------------------------------------


def dirichlet_solve(prob: DirichletProblem, eval_points, sphere: SphereRule, ball: BallRule,
                    hyperbolic: bool = False, method: str = "graded") -> np.ndarray:
    """u(x) = P_alpha[phi](x) + sign * green_factor * G_alpha[psi](x) at each point.

    The hyperbolic path assembles int P_h phi dsigma - (1/|S|) int G_h psi dtau
    with psi playing the role of the hyperbolic Laplacian of u.
    """
    p = prob.params
    if hyperbolic and p.alpha != p.n - 2:
        raise DomainError("the hyperbolic path needs alpha = n - 2")
    prob.check(sphere, ball)
    pts = np.atleast_2d(np.asarray(eval_points, dtype=float))
    if hyperbolic:
        coef = -kernels.hyperbolic_green_factor(p.n)
    else:
        coef = audited_sign(p) * kernels.constants(p).green_factor
    out = np.empty(pts.shape[0])
    for i, x in enumerate(pts):
        out[i] = (poisson_integral(p, prob.phi, x, sphere, method, hyperbolic=hyperbolic)
                  + coef * green_potential(p, prob.psi, x, ball, method, hyperbolic=hyperbolic))
    return out


def evaluation_grid(n: int, radii=DEFAULT_RADII, directions: int = DEFAULT_DIRECTIONS) -> np.ndarray:
    """Radii times the first ``directions`` normalized vectors of {-1,0,1}^n (by support size).

    For n = 3 these are the 26 face, edge and corner directions of the cube.
    The origin appears once.
    """
    vecs = [np.array(v, dtype=float) for v in itertools.product((-1, 0, 1), repeat=n) if any(v)]
    vecs.sort(key=lambda v: (int(np.count_nonzero(v)), tuple(-v)))
    dirs = np.array([v / np.linalg.norm(v) for v in vecs[:directions]])
    pts = []
    for r in radii:
        if r == 0:
            pts.append(np.zeros(n))
        else:
            pts.extend(r * dirs)
    return np.array(pts)


def verify_representation(p: Params, u: ScalarField, grid=None, orders=(8, 16, 32),
                          hyperbolic: bool = False, method: str = "graded",
                          radial_factor: float = 1.0) -> VerifyReport:
    """Reconstruct a manufactured u from its trace and T_alpha image, refining the rules.

    Sphere order and radial order both take each value in ``orders``
    (radial order scaled by ``radial_factor``).  The hyperbolic path feeds
    the hyperbolic Laplacian of u instead of T_alpha u.
    """
    grid = evaluation_grid(p.n) if grid is None else np.atleast_2d(np.asarray(grid, dtype=float))
    exact = u(grid)
    if hyperbolic:
        def psi(z):
            return delta_h_apply(u, z)
    else:
        def psi(z):
            return t_alpha_values(p, u, z)
    phi = getattr(u, "boundary", None) or u.value
    prob = DirichletProblem(p, phi, psi)
    conv = []
    err = None
    approx = None
    for order in orders:
        t0 = time.perf_counter()
        sr = sphere_rule(p.n, order)
        br = ball_rule(p.n, max(2, int(round(order * radial_factor))), order)
        approx = dirichlet_solve(prob, grid, sr, br, hyperbolic=hyperbolic, method=method)
        err = np.abs(approx - exact)
        conv.append((order, float(np.max(err)), time.perf_counter() - t0))
    sign = 1 if hyperbolic else audited_sign(p)
    rep = VerifyReport(
        sup_error=conv[-1][1],
        residual_tables=[(tuple(float(v) for v in x), float(e)) for x, e in zip(grid, err)],
        convergence=conv,
        sign_audit_outcome=sign,
        notes=f"{u.name}, n={p.n}, alpha={p.alpha:g}, {'hyperbolic' if hyperbolic else 'T_alpha'} path, "
              f"{method} quadrature",
    )
    rep.extra["values"] = approx.tolist()
    return rep


# --- mean-value and Green identities --------------------------------------


def mean_value_center(p: Params, u: ScalarField, sphere: SphereRule, ball: BallRule,
                      sign: int | None = None) -> float:
    """c_alpha int u dsigma + sign * green_factor * int T_alpha u G_alpha (1-|y|^2)^{-alpha-1} dV."""
    kc = kernels.constants(p)
    sign = audited_sign(p) if sign is None else sign
    return (kc.c_alpha_calibrated * integrate_sphere(sphere, u)
            + sign * kc.green_factor * _center_volume(p, u, ball))


def sphere_flux_coefficient(p: Params, r: float) -> float:
    """c_alpha r^n F((alpha+n)/2, (alpha+2)/2; alpha+1; 1-r^2)."""
    a, n = p.alpha, p.n
    f = hyp2f1_complement(((a + n) / 2, (a + 2) / 2, a + 1), r * r)
    return kernels.constants(p).c_alpha_calibrated * r**n * float(f)


def sphere_mean_value(p: Params, u: ScalarField, r: float, sphere_order: int = 16,
                      radial_order: int = 24) -> dict:
    """Three-term mean value over the sphere of radius r.

    u(0) = c r^n F(.; 1-r^2) int u(r zeta) dsigma
           + sign * green_factor * [ int_{rB} T u (G - G(r)) w dV
                                     + (n-2-alpha) alpha G(r) int_{rB} u w dV ]
    with w = (1-|x|^2)^{-alpha-1}.  Also returns the value with the constants
    as printed in the source derivation (d_alpha in front of the sphere term,
    unit coefficient on the volume terms) for comparison.
    """
    if not 0 < r < 1:
        raise DomainError("sphere_mean_value needs 0 < r < 1")
    kc = kernels.constants(p)
    sign = audited_sign(p)
    sr = sphere_rule(p.n, sphere_order)
    br = ball_rule(p.n, radial_order, sphere_order, radius=r)
    mean = integrate_sphere(sr, lambda z: u(r * z))
    g_r = float(kernels.green_profile(p, r))
    w = (1.0 - _sq(br.nodes)) ** (-p.alpha - 1)
    tu = t_alpha_values(p, u, br.nodes)
    vol1 = integrate_ball(br, tu * (kernels.green_profile(p, br.radii) - g_r) * w)
    vol2 = (p.n - 2 - p.alpha) * p.alpha * g_r * integrate_ball(br, u(br.nodes) * w)
    a, n = p.alpha, p.n
    fval = float(hyp2f1_complement(((a + n) / 2, (a + 2) / 2, a + 1), r * r))
    value = sphere_flux_coefficient(p, r) * mean + sign * kc.green_factor * (vol1 + vol2)
    printed = kc.d_alpha_paper * r**n * fval * mean + vol1 + vol2
    u0 = float(u(np.zeros(p.n)))
    return {"value": value, "u0": u0, "residual": value - u0,
            "printed_value": printed, "printed_residual": printed - u0,
            "sphere_mean": mean, "volume_terms": (vol1, vol2)}


def stoll_mean_value(u: ScalarField, n: int, r: float, sphere_order: int = 16,
                     radial_order: int = 24) -> dict:
    """int u(r zeta) dsigma - (1/|S|) int_{rB} g(|x|, r) Delta_h u dV / (1-|x|^2)^n.

    The sign in front of the volume term is negative with these
    normalizations; the value with a positive sign is returned too.
    """
    sr = sphere_rule(n, sphere_order)
    br = ball_rule(n, radial_order, sphere_order, radius=r)
    mean = integrate_sphere(sr, lambda z: u(r * z))
    g = kernels.hyperbolic_g_closed(br.radii, n, t=r)
    vol = integrate_ball(br, g * delta_h_apply(u, br.nodes) / (1.0 - br.radii**2) ** n)
    fac = kernels.hyperbolic_green_factor(n)
    u0 = float(u(np.zeros(n)))
    return {"value": mean - fac * vol, "printed_value": mean + fac * vol, "u0": u0,
            "residual": mean - fac * vol - u0, "printed_residual": mean + fac * vol - u0}


def _boundary_term(p: Params, u: ScalarField, v: ScalarField, r: float, sr: SphereRule) -> float:
    """r^{n-2} (1-r^2)^{-alpha} int_{|x|=r} (u Rv - v Ru) dS, unnormalized surface measure."""
    z = r * sr.nodes
    f = u(z) * radial_derivative(v, z) - v(z) * radial_derivative(u, z)
    return r ** (p.n - 2) * (1 - r * r) ** (-p.alpha) * kernels.sphere_area(p.n) * integrate_sphere(sr, f)


def green_identity_residual(p: Params, u: ScalarField, v: ScalarField, r: float,
                            sphere_order: int = 32, radial_order: int = 48,
                            annulus: tuple | None = None) -> float:
    """Boundary flux minus volume term of the weighted Green identity.

    On the ball rB the flux is r^{n-2}(1-r^2)^{-alpha} int (u Rv - v Ru) dS and
    the volume term is int (u T v - v T u)(1-|x|^2)^{-alpha-1} dV.  With
    ``annulus=(eps, r)`` the region is eps < |x| < r and the flux is the outer
    term minus the inner one.
    """
    sr = sphere_rule(p.n, sphere_order)
    if annulus is None:
        inner, outer = 0.0, r
    else:
        inner, outer = annulus
    if not 0 <= inner < outer < 1:
        raise DomainError("need 0 <= eps < r < 1")
    br = ball_rule(p.n, radial_order, sphere_order, radius=outer, inner=inner)
    y = br.nodes
    w = (1.0 - _sq(y)) ** (-p.alpha - 1)
    vol = integrate_ball(br, (u(y) * t_alpha_values(p, v, y) - v(y) * t_alpha_values(p, u, y)) * w)
    flux = _boundary_term(p, u, v, outer, sr)
    if inner > 0:
        flux -= _boundary_term(p, u, v, inner, sr)
    return flux - vol
