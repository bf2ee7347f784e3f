"""Gamma, digamma and the Gauss hypergeometric function on the real line.

Only real arguments are supported.  ``hyp2f1`` is evaluated by the power
series on ``[0, 1/2]``, by the Pfaff transformation for negative arguments
and by the ``z -> 1 - z`` connection formulas above ``1/2``.  When
``c - a - b`` is an integer the connection has logarithmic terms; those are
summed with the digamma function.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConvergenceError, DegenerateParameterError, DomainError, PoleError

MAX_TERMS = 10_000
ACCURACY = 1e-10

_EPS = np.finfo(float).eps
_INT_TOL = 1e-12
_NEAR_INT_TOL = 1e-5

_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


class HypParams(NamedTuple):
    """Parameters ``(a, b, c)`` of 2F1(a, b; c; z)."""

    a: float
    b: float
    c: float

    def check(self) -> "HypParams":
        if _is_nonpositive_int(self.c):
            raise PoleError(f"c = {self.c} is a non-positive integer")
        if not all(math.isfinite(v) for v in self):
            raise DomainError(f"non-finite parameters {tuple(self)}")
        return self


def _is_nonpositive_int(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def _sinpi(x: float) -> float:
    # fmod and the reflections below are exact, so tiny |x| keeps full precision
    r = math.fmod(x, 2.0)
    if r > 1.0:
        r -= 2.0
    elif r < -1.0:
        r += 2.0
    if r > 0.5:
        r = 1.0 - r
    elif r < -0.5:
        r = -1.0 - r
    return math.sin(math.pi * r)


def gamma(x: float) -> float:
    """Gamma function (Lanczos approximation, reflection below 1/2)."""
    x = float(x)
    if _is_nonpositive_int(x):
        raise PoleError(f"gamma has a pole at {x}")
    if x < 0.5:
        return math.pi / (_sinpi(x) * gamma(1.0 - x))
    x -= 1.0
    acc = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        acc += _LANCZOS[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    if x > 140:
        return math.exp((x + 0.5) * math.log(t) - t) * math.sqrt(2 * math.pi) * acc
    return math.sqrt(2 * math.pi) * t ** (x + 0.5) * math.exp(-t) * acc


def rgamma(x: float) -> float:
    """Reciprocal gamma, zero at the poles."""
    if _is_nonpositive_int(float(x)):
        return 0.0
    return 1.0 / gamma(x)


def _rgamma_shift(x: float, m: int) -> float:
    """1/Gamma(x - m) as (x-1)...(x-m)/Gamma(x), which keeps x - m off a rounded pole."""
    out = rgamma(x)
    for j in range(1, m + 1):
        out *= x - j
    return out


def digamma(x: float) -> float:
    x = float(x)
    if _is_nonpositive_int(x):
        raise PoleError(f"digamma has a pole at {x}")
    if x < 0.5:
        return digamma(1.0 - x) - math.pi * math.cos(math.pi * x) / _sinpi(x)
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    x2 = 1.0 / (x * x)
    # Bernoulli tail B_2k / (2k x^2k), k = 1..6
    tail = x2 * (1 / 12 - x2 * (1 / 120 - x2 * (1 / 252 - x2 * (1 / 240 - x2 * (1 / 132 - x2 * 691 / 32760)))))
    return acc + math.log(x) - 0.5 / x - tail


def _series(a, b, c, z, max_terms=MAX_TERMS):
    """Direct power series, vectorized over ``z``."""
    z = np.asarray(z, dtype=float)
    total = np.ones_like(z)
    term = np.ones_like(z)
    active = np.ones(z.shape, dtype=bool)
    for k in range(max_terms):
        term = term * ((a + k) * (b + k) / ((c + k) * (k + 1.0))) * z
        total = total + np.where(active, term, 0.0)
        small = np.abs(term) <= _EPS * 0.5 * np.abs(total)
        active &= ~small
        if (a + k + 1 == 0) or (b + k + 1 == 0) or not active.any():
            return total
    rel = np.max(np.abs(term[active]) / np.maximum(np.abs(total[active]), 1e-300))
    if rel > ACCURACY:
        raise ConvergenceError(
            f"2F1({a}, {b}; {c}; z) series did not reach {ACCURACY:g} in {max_terms} terms"
        )
    return total


def _terminates(a: float, b: float) -> bool:
    return _is_nonpositive_int(a) or _is_nonpositive_int(b)


def _connection(a, b, c, w):
    """F(a,b;c;1-w) for non-integer c-a-b."""
    s = c - a - b
    gc = gamma(c)
    c1 = gc * gamma(s) * rgamma(c - a) * rgamma(c - b)
    c2 = gc * gamma(-s) * rgamma(a) * rgamma(b)
    out = np.zeros_like(w)
    if c1 != 0.0:
        out = out + c1 * _series(a, b, 1.0 - s, w)
    if c2 != 0.0:
        out = out + c2 * w**s * _series(c - a, c - b, 1.0 + s, w)
    return out


def _log_series(w, coef_fn, max_terms=MAX_TERMS):
    """Sum sum_k coef_k(log w) w^k where coef_fn(k) returns (p_k, q_k) and
    the k-th term is w^k * (p_k * log(w) + q_k)."""
    logw = np.log(w)
    total = np.zeros_like(w)
    wk = np.ones_like(w)
    for k in range(max_terms):
        p, q = coef_fn(k)
        term = wk * (p * logw + q)
        total = total + term
        wk = wk * w
        if k > 4 and np.all(np.abs(term) <= _EPS * 0.5 * np.abs(total)):
            return total
        if p == 0.0 and q == 0.0 and k > 4:
            return total
    raise ConvergenceError("logarithmic connection series did not converge")


def _integer_connection(a, b, c, w, m):
    """F(a,b;c;1-w) for c - a - b = m integer (logarithmic case)."""
    if m >= 0:
        pref = gamma(c) * rgamma(a) * rgamma(b)
        out = np.zeros_like(w)
        if m > 0:
            lead = gamma(m) * gamma(c) * rgamma(a + m) * rgamma(b + m)
            if lead != 0.0:
                poly = np.zeros_like(w)
                coef = 1.0
                for k in range(m):
                    poly = poly + coef * w**k
                    if k + 1 < m:
                        coef *= (a + k) * (b + k) / ((k + 1.0) * (1.0 - m + k))
                out = out + lead * poly
        if pref != 0.0:
            # running Pochhammer ratio (a+m)_k (b+m)_k / (k! (k+m)!)
            state = {"r": 1.0 / math.factorial(m), "k": -1}

            def coef(k):
                if k > 0:
                    state["r"] *= (a + m + k - 1) * (b + m + k - 1) / (k * (k + m))
                r = state["r"]
                q = -digamma(k + 1) - digamma(k + m + 1) + digamma(a + k + m) + digamma(b + k + m)
                return r, r * q

            sgn = -1.0 if m % 2 else 1.0  # (z-1)^m = (-w)^m
            out = out - sgn * pref * w**m * _log_series(w, coef)
        return out
    mm = -m
    out = np.zeros_like(w)
    lead = gamma(mm) * gamma(c) * rgamma(a) * rgamma(b)
    if lead != 0.0:
        poly = np.zeros_like(w)
        coef = 1.0
        for k in range(mm):
            poly = poly + coef * w**k
            if k + 1 < mm:
                coef *= (a - mm + k) * (b - mm + k) / ((k + 1.0) * (1.0 - mm + k))
        out = out + lead * w ** (-mm) * poly
    pref = gamma(c) * _rgamma_shift(a, mm) * _rgamma_shift(b, mm)
    if pref != 0.0:
        state = {"r": 1.0 / math.factorial(mm)}

        def coef(k):
            if k > 0:
                state["r"] *= (a + k - 1) * (b + k - 1) / (k * (k + mm))
            r = state["r"]
            q = -digamma(k + 1) - digamma(k + mm + 1) + digamma(a + k) + digamma(b + k)
            return r, r * q

        sgn = -1.0 if mm % 2 else 1.0
        out = out - sgn * pref * _log_series(w, coef)
    return out


def _near_one(a, b, c, w):
    """F(a,b;c;1-w) for 0 < w < 1/2, given the complement ``w`` directly."""
    if _terminates(a, b):
        return _series(a, b, c, 1.0 - w)
    s = c - a - b
    m = round(s)
    if abs(s - m) < _INT_TOL:
        return _integer_connection(a, b, c, w, int(m))
    if abs(s - m) < _NEAR_INT_TOL:
        return _series(a, b, c, 1.0 - w)
    return _connection(a, b, c, w)


def _as_params(p) -> HypParams:
    return (p if isinstance(p, HypParams) else HypParams(*p)).check()


def hyp2f1(p, z):
    """2F1(a, b; c; z) for real ``-1 < z < 1``.  Vectorized over ``z``."""
    a, b, c = _as_params(p)
    z = np.asarray(z, dtype=float)
    if np.any(~np.isfinite(z)) or np.any(np.abs(z) >= 1.0):
        raise DomainError("hyp2f1 is only defined here for -1 < z < 1")
    out = np.empty_like(z)
    if _terminates(a, b):
        out[...] = _series(a, b, c, z)
        return out[()]
    neg = z < 0
    mid = (z >= 0) & (z <= 0.5)
    high = z > 0.5
    if neg.any():
        zn = z[neg]
        out[neg] = (1.0 - zn) ** (-a) * _series(a, c - b, c, zn / (zn - 1.0))
    if mid.any():
        out[mid] = _series(a, b, c, z[mid])
    if high.any():
        out[high] = _near_one(a, b, c, 1.0 - z[high])
    return out[()]


def hyp2f1_complement(p, w):
    """2F1(a, b; c; 1 - w) for ``0 < w < 2``, accurate when ``w`` is tiny.

    Kernels evaluate 2F1 at ``1 - |x|^2``; passing ``|x|^2`` here avoids the
    cancellation in forming the argument.
    """
    a, b, c = _as_params(p)
    w = np.asarray(w, dtype=float)
    if np.any(~(w > 0)) or np.any(w >= 2):
        raise DomainError("hyp2f1_complement requires 0 < w < 2")
    out = np.empty_like(w)
    near = w < 0.5
    if near.any():
        out[near] = _near_one(a, b, c, w[near])
    if (~near).any():
        out[~near] = hyp2f1((a, b, c), 1.0 - w[~near])
    return out[()]


def hyp2f1_at_one(p) -> float:
    """Gauss summation F(a,b;c;1), valid for c - a - b > 0."""
    a, b, c = _as_params(p)
    if not c - a - b > 0:
        raise DomainError(f"F(a,b;c;1) diverges: c - a - b = {c - a - b} <= 0")
    return gamma(c) * gamma(c - a - b) * rgamma(c - a) * rgamma(c - b)


def limit_ratio_at_one(p) -> float:
    """lim_{z->1-} F(a,b;c;z) / (1-z)^(c-a-b), valid for c - a - b < 0."""
    a, b, c = _as_params(p)
    if not c - a - b < 0:
        raise DomainError(f"limit needs c - a - b < 0, got {c - a - b}")
    return gamma(c) * gamma(a + b - c) * rgamma(a) * rgamma(b)


def hyp2f1_derivative(p, z, order: int = 1):
    """d^k/dz^k 2F1 via (a)_k (b)_k / (c)_k F(a+k, b+k; c+k; z)."""
    a, b, c = _as_params(p)
    scale = 1.0
    for j in range(order):
        scale *= (a + j) * (b + j) / (c + j)
    if scale == 0.0:
        return np.zeros_like(np.asarray(z, dtype=float))[()]
    return scale * hyp2f1((a + order, b + order, c + order), z)


def fd_derivatives(w: Callable[[float], float], z: float, step: float, stencil: int = 5):
    """(w, w', w'') at z by central differences.

    ``stencil=5`` is fourth-order accurate, ``stencil=3`` second-order.  The
    step is rounded so that z +- h are exactly representable.
    """
    z = float(z)
    h = (z + step) - z
    w0 = float(w(z))
    if stencil == 3:
        wp, wm = float(w(z + h)), float(w(z - h))
        return w0, (wp - wm) / (2 * h), (wp - 2 * w0 + wm) / (h * h)
    if stencil == 5:
        h2 = (z + 2 * h) - z
        if h2 != 2 * h:
            h = h2 / 2
        wp, wm = float(w(z + h)), float(w(z - h))
        wp2, wm2 = float(w(z + 2 * h)), float(w(z - 2 * h))
        d1 = (8 * (wp - wm) - (wp2 - wm2)) / (12 * h)
        d2 = (16 * (wp + wm) - (wp2 + wm2) - 30 * w0) / (12 * h * h)
        return w0, d1, d2
    raise ValueError("stencil must be 3 or 5")


def ode_residual(
    p,
    w: Callable[[float], float],
    z: float,
    dw: Callable[[float], float] | None = None,
    d2w: Callable[[float], float] | None = None,
    step: float = 1e-3,
    stencil: int = 5,
) -> float:
    """Value of z(1-z)w'' + [c - (a+b+1)z]w' - ab w at ``z``.

    Missing derivatives come from ``fd_derivatives``.  The default
    fourth-order stencil with step 1e-3 keeps both truncation and rounding
    near 1e-10 for O(1) solutions; a three-point stencil at step 1e-5 would
    be rounding-limited at about 1e-6.
    """
    a, b, c = _as_params(p)
    z = float(z)
    if dw is None or d2w is None:
        w0, f1, f2 = fd_derivatives(w, z, step, stencil)
    else:
        w0 = float(w(z))
    d1 = float(dw(z)) if dw is not None else f1
    d2 = float(d2w(z)) if d2w is not None else f2
    return z * (1 - z) * d2 + (c - (a + b + 1) * z) * d1 - a * b * w0


def _check_open_unit(z):
    z = np.asarray(z, dtype=float)
    if np.any((z <= 0) | (z >= 1)):
        raise DomainError("solutions about z = 1 require 0 < z < 1")
    return z


def x1_at_one(p, z):
    """X1 = F(a, b; 1+a+b-c; 1-z), defined unless 1+a+b-c is a non-positive integer."""
    a, b, c = _as_params(p)
    z = _check_open_unit(z)
    cc = 1 + a + b - c
    if _is_nonpositive_int(cc):
        raise DegenerateParameterError(f"X1 needs 1+a+b-c = {cc} not a non-positive integer")
    return hyp2f1((a, b, cc), 1.0 - z)


def x2_at_one(p, z):
    """X2 = (1-z)^(c-a-b) F(c-a, c-b; 1+c-a-b; 1-z), defined unless 1+c-a-b is a non-positive integer."""
    a, b, c = _as_params(p)
    z = _check_open_unit(z)
    s = c - a - b
    if _is_nonpositive_int(1 + s):
        raise DegenerateParameterError(f"X2 needs 1+c-a-b = {1 + s} not a non-positive integer")
    return (1.0 - z) ** s * hyp2f1((c - a, c - b, 1 + s), 1.0 - z)


def solutions_at_one(p, z):
    """Pair (X1, X2) of solutions of the hypergeometric equation about z = 1.

    X1 = F(a, b; 1+a+b-c; 1-z) and X2 = (1-z)^(c-a-b) F(c-a, c-b; 1+c-a-b; 1-z).
    The pair is independent only when c - a - b is not an integer; for
    c = a + b both coincide and are returned as such.  For a nonzero integer
    c - a - b one of the two is undefined and the other needs a logarithmic
    partner, so the pair is refused; ``x1_at_one`` / ``x2_at_one`` still
    return whichever solution exists.
    """
    a, b, c = _as_params(p)
    s = c - a - b
    z = _check_open_unit(z)
    if s == 0:
        x = hyp2f1((a, b, 1.0), 1.0 - z)
        return x, x
    if s == round(s):
        raise DegenerateParameterError(
            f"c - a - b = {s} is a nonzero integer; the second solution is logarithmic"
        )
    return x1_at_one(p, z), x2_at_one(p, z)
