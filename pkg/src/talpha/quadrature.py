"""Node/weight rules on the sphere, the ball and annuli.

Sphere rules integrate against the normalized measure sigma (total mass 1).
Ball rules integrate against Lebesgue measure dV; the weight
(1-|y|^2)^{-alpha-1} of the Green potentials is applied by the caller,
where it cancels against the decay of G_alpha.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

from .errors import DomainError, IntegrationError

RADIAL_BREAKS = (1e-3, 0.1, 0.9)


@dataclass(frozen=True)
class SphereRule:
    nodes: np.ndarray  # (m, n) unit vectors
    weights: np.ndarray  # (m,), sum 1
    order: int
    kind: str = "product"

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    def __len__(self):
        return self.weights.shape[0]


@dataclass(frozen=True)
class BallRule:
    nodes: np.ndarray  # (m, n)
    weights: np.ndarray  # (m,), Lebesgue measure
    radial_order: int
    sphere_order: int
    grading: tuple
    radii: np.ndarray = field(repr=False)  # |node| per node
    radial_nodes: np.ndarray = field(repr=False)
    radial_weights: np.ndarray = field(repr=False)  # include r^{n-1} |S^{n-1}|
    sphere: SphereRule = field(repr=False)

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    def __len__(self):
        return self.weights.shape[0]


@dataclass(frozen=True)
class ZonalRule:
    """Rule in the polar angle theta for functions of <t, pole> on S^{n-1}.

    Panels are graded geometrically toward theta = 0 so that integrands
    concentrated near the pole at scale ``theta_min`` are resolved.
    """

    theta: np.ndarray
    weights: np.ndarray  # include the sin^{n-2} density; sum to 1
    n: int
    order: int
    theta_min: float


def _sphere_area(n):
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


def _gegenbauer_rule(k: int, order: int):
    """Nodes t = cos(theta), weights for int_0^pi f sin^k(theta) dtheta."""
    if k == 1:
        t, w = leggauss(order)
    else:
        t, w = roots_jacobi(order, (k - 1) / 2, (k - 1) / 2)
    return t, w


@lru_cache(maxsize=64)
def _sphere_rule_cached(n: int, order: int) -> SphereRule:
    if n == 2:
        m = 2 * order
        phi = 2 * math.pi * np.arange(m) / m
        nodes = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        weights = np.full(m, 1.0 / m)
        return SphereRule(nodes, weights, order)
    # S^{n-1}: x_n = cos(theta), rest = sin(theta) * S^{n-2}
    sub = _sphere_rule_cached(n - 1, order)
    t, w = _gegenbauer_rule(n - 2, order)
    st = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    nodes = np.concatenate(
        [
            (st[:, None, None] * sub.nodes[None, :, :]).reshape(-1, n - 1),
            np.repeat(t, len(sub))[:, None],
        ],
        axis=1,
    )
    weights = (w[:, None] * sub.weights[None, :]).reshape(-1)
    weights = weights / weights.sum()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return SphereRule(nodes, weights, order)


def sphere_rule(n, order: int) -> SphereRule:
    """Product rule on S^{n-1}: Gauss-Gegenbauer in each cos(polar angle), trapezoid in azimuth.

    ``order`` Gauss points per polar angle and ``2*order`` azimuthal points;
    exact for polynomials of degree <= 2*order - 1.
    """
    n = _dim(n)
    if n < 2 or order < 2:
        raise DomainError("sphere_rule needs n >= 2 and order >= 2")
    return _sphere_rule_cached(int(n), int(order))


def _panels(breaks):
    return list(zip(breaks[:-1], breaks[1:]))


def radial_rule(n: int, radial_order: int, radius: float = 1.0, inner: float = 0.0,
                breaks=RADIAL_BREAKS):
    """Nodes and weights for int_inner^radius f(r) r^{n-1} dr.

    Panels split at ``breaks * radius``; the panel touching 0 uses Gauss-Jacobi
    with the r^{n-1} weight absorbed, the others Gauss-Legendre.
    """
    cuts = [inner] + [b * radius for b in breaks if inner < b * radius < radius] + [radius]
    xs, ws = [], []
    for lo, hi in _panels(cuts):
        half = (hi - lo) / 2
        if lo == 0.0:
            t, w = roots_jacobi(radial_order, 0.0, n - 1.0)
            r = lo + half * (t + 1)
            # (1+t)^{n-1} = (r/half)^{n-1}
            xs.append(r)
            ws.append(w * half * half ** (n - 1))
        else:
            t, w = leggauss(radial_order)
            r = lo + half * (t + 1)
            xs.append(r)
            ws.append(w * half * r ** (n - 1))
    return np.concatenate(xs), np.concatenate(ws)


@lru_cache(maxsize=32)
def _ball_rule_cached(n, radial_order, sphere_order, radius, inner) -> BallRule:
    sph = sphere_rule(n, sphere_order)
    r, wr = radial_rule(n, radial_order, radius, inner)
    wr = wr * _sphere_area(n)
    nodes = (r[:, None, None] * sph.nodes[None, :, :]).reshape(-1, n)
    weights = (wr[:, None] * sph.weights[None, :]).reshape(-1)
    radii = np.repeat(r, len(sph))
    for a in (nodes, weights, radii):
        a.setflags(write=False)
    grading = ("breaks", tuple(b * radius for b in RADIAL_BREAKS), "inner", inner, "radius", radius)
    return BallRule(nodes, weights, radial_order, sphere_order, grading, radii, r, wr, sph)


def _dim(n) -> int:
    """Accept a dimension or anything with an ``n`` attribute (``Params``)."""
    return int(getattr(n, "n", n))


def ball_rule(n, radial_order: int, sphere_order: int, radius: float = 1.0,
              inner: float = 0.0) -> BallRule:
    """Tensor rule on the ball (or annulus inner < |y| < radius) for Lebesgue measure.

    ``n`` is the dimension or a ``Params``.
    """
    n = _dim(n)
    if radial_order < 2 or sphere_order < 2:
        raise DomainError("ball_rule needs orders >= 2")
    if not 0 <= inner < radius <= 1:
        raise DomainError("need 0 <= inner < radius <= 1")
    return _ball_rule_cached(int(n), int(radial_order), int(sphere_order), float(radius), float(inner))


def zonal_rule(n: int, order: int = 16, theta_min: float = 1e-9, ratio: float = 0.25) -> ZonalRule:
    """Graded rule for int_{S^{n-1}} f(theta) dsigma with theta the angle to a pole (n >= 2)."""
    breaks = [math.pi]
    while breaks[-1] * ratio > theta_min:
        breaks.append(breaks[-1] * ratio)
    breaks.append(0.0)
    breaks = breaks[::-1]
    t, w = leggauss(order)
    th, wt = [], []
    for lo, hi in _panels(breaks):
        half = (hi - lo) / 2
        x = lo + half * (t + 1)
        th.append(x)
        wt.append(w * half * np.sin(x) ** (n - 2))
    theta = np.concatenate(th)
    weights = np.concatenate(wt)
    # density of theta under sigma: Gamma(n/2) / (sqrt(pi) Gamma((n-1)/2)) sin^{n-2}
    weights = weights * math.gamma(n / 2) / (math.sqrt(math.pi) * math.gamma((n - 1) / 2))
    return ZonalRule(theta, weights, n, order, theta_min)


def householder_to(pole):
    """Orthogonal matrix mapping e_n to ``pole``."""
    pole = np.asarray(pole, dtype=float)
    n = pole.shape[0]
    e = np.zeros(n)
    e[-1] = 1.0
    v = e - pole
    nv = np.linalg.norm(v)
    if nv < 1e-15:
        return np.eye(n)
    v /= nv
    return np.eye(n) - 2 * np.outer(v, v)


def cap_rule(pole, order: int = 12, sub_order: int = 16, theta_min: float = 1e-8,
             ratio: float = 0.5) -> SphereRule:
    """Sphere rule graded toward ``pole``: graded polar panels times a product rule on S^{n-2}."""
    pole = np.asarray(pole, dtype=float)
    n = pole.shape[0]
    z = zonal_rule(n, order, theta_min, ratio)
    sub = sphere_rule(n - 1, sub_order)
    st, ct = np.sin(z.theta), np.cos(z.theta)
    local = np.concatenate(
        [
            (st[:, None, None] * sub.nodes[None, :, :]).reshape(-1, n - 1),
            np.repeat(ct, len(sub))[:, None],
        ],
        axis=1,
    )
    weights = (z.weights[:, None] * sub.weights[None, :]).reshape(-1)
    nodes = local @ householder_to(pole).T
    return SphereRule(nodes, weights, order, kind="cap")


GRADING_RATIO = 0.35


def graded_scale(radius: float) -> float:
    """Polar-angle scale of the Moebius pullback at a point of norm ``radius``.

    phi_x stretches the sphere near x/|x| by (1+|x|)/(1-|x|); the graded rules
    refine down to half the reciprocal.
    """
    return 0.5 * (1.0 - radius) / (1.0 + radius)


@lru_cache(maxsize=64)
def _graded_sphere_cached(n: int, order: int, theta_min: float) -> SphereRule:
    pole = np.zeros(n)
    pole[-1] = 1.0
    rule = cap_rule(pole, order, order, theta_min=theta_min, ratio=GRADING_RATIO)
    rule.nodes.setflags(write=False)
    rule.weights.setflags(write=False)
    return SphereRule(rule.nodes, rule.weights, order, kind="graded")


def graded_sphere_rule(n: int, order: int, theta_min: float) -> SphereRule:
    """Sphere rule graded toward e_n down to polar angle ``theta_min``.

    Polar panels shrink by a fixed ratio toward the pole, each carrying
    ``order`` Gauss-Legendre points; the remaining S^{n-2} factor is the
    product rule of the same order.  Rotate the nodes to grade toward
    another pole.
    """
    if order < 2 or not 0 < theta_min < math.pi:
        raise DomainError("graded_sphere_rule needs order >= 2 and 0 < theta_min < pi")
    # round so that nearby scales share a cached rule
    return _graded_sphere_cached(int(n), int(order), float(f"{theta_min:.3g}"))


@lru_cache(maxsize=16)
def _graded_ball_cached(n, radial_order, sphere_order, theta_min) -> BallRule:
    sph = graded_sphere_rule(n, sphere_order, theta_min)
    r, wr = radial_rule(n, radial_order)
    wr = wr * _sphere_area(n)
    nodes = (r[:, None, None] * sph.nodes[None, :, :]).reshape(-1, n)
    weights = (wr[:, None] * sph.weights[None, :]).reshape(-1)
    radii = np.repeat(r, len(sph))
    for a in (nodes, weights, radii):
        a.setflags(write=False)
    grading = ("breaks", RADIAL_BREAKS, "theta_min", theta_min)
    return BallRule(nodes, weights, radial_order, sphere_order, grading, radii, r, wr, sph)


def graded_ball_rule(n: int, radial_order: int, sphere_order: int, theta_min: float) -> BallRule:
    """Unit-ball rule whose angular part is ``graded_sphere_rule`` (pole e_n)."""
    if radial_order < 2:
        raise DomainError("graded_ball_rule needs radial_order >= 2")
    return _graded_ball_cached(int(n), int(radial_order), int(sphere_order), float(f"{theta_min:.3g}"))


def integrate_sphere(rule: SphereRule, f) -> float:
    """sum_i w_i f(node_i) in fixed node order; ``f`` may be a callable or node values."""
    vals = _values(rule.nodes, f)
    return float(np.dot(rule.weights, vals))


def integrate_ball(rule: BallRule, f) -> float:
    vals = _values(rule.nodes, f)
    return float(np.dot(rule.weights, vals))


def integrate_zonal(rule: ZonalRule, f) -> float:
    """``f`` takes the polar angle array."""
    vals = np.asarray(f(rule.theta), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise IntegrationError("integrand not finite on zonal nodes")
    return float(np.dot(rule.weights, vals))


def _values(nodes, f):
    vals = np.asarray(f(nodes) if callable(f) else f, dtype=float)
    if vals.shape != (nodes.shape[0],):
        vals = np.broadcast_to(vals, (nodes.shape[0],))
    bad = ~np.isfinite(vals)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise IntegrationError(f"integrand is not finite at node {i}: {nodes[i]}", node=nodes[i])
    return vals


# --- text serialization ----------------------------------------------------


def rule_to_csv(rule) -> str:
    """CSV text: one row per node, coordinates then weight, 17 significant digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    n = rule.nodes.shape[1]
    w.writerow([f"x{i + 1}" for i in range(n)] + ["weight"])
    for x, wt in zip(rule.nodes, rule.weights):
        w.writerow([f"{v:.17g}" for v in x] + [f"{wt:.17g}"])
    return buf.getvalue()


def rule_from_csv(text: str):
    """Parse ``rule_to_csv`` output into (nodes, weights)."""
    rows = list(csv.reader(io.StringIO(text)))
    body = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    return body[:, :-1], body[:, -1]


def cache_key(kind: str, n: int, order, grading=()) -> str:
    raw = repr((kind, n, order, tuple(grading)))
    return f"{kind}-n{n}-" + hashlib.sha1(raw.encode()).hexdigest()[:12]


def cached_sphere_rule(n: int, order: int, cache_dir: str | os.PathLike | None = None) -> SphereRule:
    """sphere_rule backed by a CSV cache in ``cache_dir`` or $TALPHA_CACHE_DIR."""
    cache_dir = cache_dir or os.environ.get("TALPHA_CACHE_DIR")
    if not cache_dir:
        return sphere_rule(n, order)
    path = Path(cache_dir) / (cache_key("sphere", n, order) + ".csv")
    if path.exists():
        nodes, weights = rule_from_csv(path.read_text())
        return SphereRule(nodes, weights, order)
    rule = sphere_rule(n, order)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(rule_to_csv(rule))
    return rule
