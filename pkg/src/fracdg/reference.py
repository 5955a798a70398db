"""High-accuracy reference solutions for the convergence experiments.

The scalar problem with alpha = 1/2 has the closed form

    u(t) = u0 E(lam sqrt(t)) + int_0^t E(lam sqrt(t-s)) f(s) ds,

where E(x) = exp(x^2) erfc(x) is the scaled complementary error function;
the substitution s = (1 - y^2) t removes the square-root singularity from
the convolution, so plain Gauss quadrature converges geometrically.

The space-time problem is inverted from its Laplace transform u~(x, z) by
trapezoidal quadrature along a left-opening hyperbola, with the contour
parameters balanced for a prescribed time window.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import erfcx as _scipy_erfcx

from .polylib import gauss_legendre

__all__ = [
    "erfcx",
    "ode_reference",
    "PdeRefParams",
    "pde_transform",
    "ContourRule",
    "pde_reference",
]


def erfcx(x):
    """Scaled complementary error function exp(x^2) erfc(x)."""
    return _scipy_erfcx(x)


def ode_reference(alpha: float, lam: float, f: Callable | None, u0: float,
                  npoints: int = 96, tol: float = 1e-12) -> Callable:
    """Reference solution of u' + lam d_t^{1-alpha} u = f for alpha = 1/2.

    Returns a vectorised callable t -> u(t).  The quadrature count is
    doubled once and the two evaluations must agree to ``tol``.
    """
    if alpha != 0.5:
        raise ValueError("closed-form reference requires alpha = 1/2")
    if lam < 0.0:
        raise ValueError("need lambda >= 0")

    def evaluate(t: np.ndarray, M: int) -> np.ndarray:
        rule = gauss_legendre(M)
        y = 0.5 * (rule.nodes + 1.0)[:, None]  # [0, 1]
        w = 0.5 * rule.weights[:, None]
        t = np.asarray(t, dtype=float)[None, :]
        out = u0 * erfcx(lam * np.sqrt(t))[0]
        if f is not None:
            s = (1.0 - y * y) * t
            integrand = 2.0 * y * t * erfcx(lam * y * np.sqrt(t)) * f(s)
            out = out + np.sum(w * integrand, axis=0)
        return out

    def u(t):
        t = np.asarray(t, dtype=float)
        shape = t.shape
        t = np.atleast_1d(t).ravel()
        if np.any(t < 0.0):
            raise ValueError("reference solution defined for t >= 0")
        coarse = evaluate(t, npoints)
        fine = evaluate(t, 2 * npoints)
        delta = np.abs(fine - coarse).max()
        if delta > tol:
            raise RuntimeError(f"convolution quadrature not converged: delta {delta:.3e}")
        return float(fine[0]) if shape == () else fine.reshape(shape)

    return u


@dataclass(frozen=True)
class PdeRefParams:
    """Data of the 1D space-time problem: u0(x) = C0 x (L-x) and
    f(x, t) = Cf t exp(-t) on (0, L)."""

    alpha: float
    L: float
    C0: float
    Cf: float


def _rho1_taylor(omega, L, x, terms: int = 6):
    """Series of rho1(x) = w^2 int_0^x s(L-s) sinh(ws) ds for small |wx|."""
    out = 0.0
    fact = 1.0
    for m in range(terms):
        fact = fact if m == 0 else fact * (2 * m) * (2 * m + 1)
        out = out + omega ** (2 * m + 3) / fact * (
            L * x ** (2 * m + 3) / (2 * m + 3) - x ** (2 * m + 4) / (2 * m + 4)
        )
    return out


def _rho1_side(omega, L, xs, den):
    """rho1(xs) sinh(w(L-xs)) / sinh(wL), stable for all |w xs|.

    rho1(xs) = (w xs(L-xs) - 2/w) cosh(w xs) + (2 xs - L) sinh(w xs) + 2/w
    cancels to O((w xs)^3), so a series replaces it below |w xs| = 1e-2; the
    hyperbolic ratios are built from E(a) = exp(-w a), bounded for Re w > 0.
    """
    Ex = np.exp(-omega * xs)
    Ey = np.exp(-omega * (L - xs))
    s_ratio = Ex * (1.0 - Ey * Ey) / den                   # sinh(w(L-xs))/sinh(wL)
    cs = (1.0 + Ex * Ex) * (1.0 - Ey * Ey) / (2.0 * den)   # cosh(w xs) * s_ratio
    ss = (1.0 - Ex * Ex) * (1.0 - Ey * Ey) / (2.0 * den)   # sinh(w xs) * s_ratio
    direct = ((omega * xs * (L - xs) - 2.0 / omega) * cs
              + (2.0 * xs - L) * ss + 2.0 / omega * s_ratio)
    small = np.abs(omega * xs) < 1e-2
    if not np.any(small):
        return direct
    with np.errstate(over="ignore", invalid="ignore"):
        series = _rho1_taylor(omega, L, xs) * s_ratio
    return np.where(small, series, direct)


def pde_transform(x, z, params: PdeRefParams):
    """Laplace transform u~(x, z) of the 1D problem, overflow-safe.

    The quadratic-initial-data term is rho1-based; it carries a 1/w relative
    to the forcing term so that w^2 u~ - u~_xx = g and the initial-value
    theorem z u~ -> u0 hold (both enforced by tests).
    """
    L, C0, Cf = params.L, params.C0, params.Cf
    x = np.asarray(x, dtype=float)
    if np.any((x < 0.0) | (x > L)):
        raise ValueError("x outside the spatial domain")
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0.0) or np.any(z == -1.0):
        raise ValueError("z hits a pole of the transform")
    omega = z ** (params.alpha / 2.0)
    EL = np.exp(-omega * L)
    den = 1.0 - EL * EL
    if np.any(np.abs(den) < 1e-12):
        raise ValueError("contour point too close to a zero of sinh(wL)")

    combo1 = _rho1_side(omega, L, x, den) + _rho1_side(omega, L, L - x, den)

    # forcing term: rho2(x) = cosh(wx) - 1
    Ex = np.exp(-omega * x)
    Ey = np.exp(-omega * (L - x))
    cs_x = (1.0 + Ex * Ex) * (1.0 - Ey * Ey) / (2.0 * den)
    cs_y = (1.0 + Ey * Ey) * (1.0 - Ex * Ex) / (2.0 * den)
    sr_x = Ex * (1.0 - Ey * Ey) / den
    sr_y = Ey * (1.0 - Ex * Ex) / den
    combo2 = cs_x - sr_x + cs_y - sr_y

    return C0 / (z * omega) * combo1 + Cf / (z * (z + 1.0) ** 2) * combo2


def transform_rhs(x, z, params: PdeRefParams):
    """g(x, z) = z^(alpha-1) [u0(x) + f~(x, z)], the transformed right side."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=complex)
    return z ** (params.alpha - 1.0) * (
        params.C0 * x * (params.L - x) + params.Cf / (z + 1.0) ** 2
    )


class ContourRule:
    """Trapezoidal rule on a left-opening hyperbola z(u) = mu (1 + sin(iu - d)).

    Inverts a Laplace transform F via u(t) ~ sum_k w_k exp(z_k t) F(z_k) for
    t inside the window [t_min, t_max] the rule was balanced for.  Nodes come
    in conjugate pairs, so the sum is real up to rounding for real signals.
    """

    def __init__(self, t_min: float, t_max: float, K: int = 24):
        if not (0.0 < t_min <= t_max):
            raise ValueError("need 0 < t_min <= t_max")
        if K < 4:
            raise ValueError("need at least 4 one-sided nodes")
        Lam = t_max / t_min
        d, h, mu = _hyperbola_params(Lam, K)
        self.t_min, self.t_max, self.K = t_min, t_max, K
        self.mu, self.d, self.h = mu / t_max, d, h
        u = h * np.arange(-K, K + 1)
        self.nodes = self.mu * (1.0 - np.sin(d) * np.cosh(u) + 1j * np.cos(d) * np.sinh(u))
        dz = self.mu * (np.cos(d) * np.cosh(u) + 1j * np.sin(d) * np.sinh(u))
        self.weights = h / (2.0 * np.pi) * dz

    def invert(self, transform_values: np.ndarray, t: float) -> complex:
        """Complex contour sum at time t; the imaginary part is a rounding
        residual for real-valued signals."""
        if not (self.t_min * (1.0 - 1e-12) <= t <= self.t_max * (1.0 + 1e-12)):
            raise ValueError(f"t={t} outside the window [{self.t_min}, {self.t_max}]")
        phase = np.exp(self.nodes * t)
        return np.asarray(transform_values) @ (self.weights * phase)


def _hyperbola_params(Lam: float, K: int) -> tuple[float, float, float]:
    """Balanced hyperbola parameters (d, h, mu*t_max) for window ratio Lam.

    The three error exponents (strip below, strip above at t_max, truncation
    at t_min) are equalised; the remaining angle d maximises the common rate.
    """

    def acosh_arg(d):
        return (1.0 + Lam * (np.pi / 2.0 - d) / (2.0 * d - np.pi / 2.0)) / np.sin(d)

    def neg_rate(d):
        a = np.arccosh(acosh_arg(d))
        return -2.0 * np.pi * (np.pi / 2.0 - d) * K / a

    res = minimize_scalar(neg_rate, bounds=(np.pi / 4 + 1e-3, np.pi / 2 - 1e-3),
                          method="bounded", options={"xatol": 1e-12})
    d = float(res.x)
    a = float(np.arccosh(acosh_arg(d)))
    h = a / K
    mu_tmax = 2.0 * np.pi * (2.0 * d - np.pi / 2.0) / h
    return d, h, mu_tmax


def pde_reference(params: PdeRefParams, K: int = 24, t_min: float = 1e-3,
                  t_max: float = 2.0, window_ratio: float = 8.0) -> Callable:
    """Reference solution u(x, t) of the 1D problem for t in [t_min, t_max].

    The window is split into geometric subwindows of ratio <= window_ratio,
    each with its own balanced contour; transform values are cached per
    (subwindow, x-grid), so repeated evaluation over a fixed spatial grid
    costs one complex matrix-vector product per time.
    """
    if not (0.0 < t_min <= t_max):
        raise ValueError("need 0 < t_min <= t_max")
    nwin = max(1, int(np.ceil(np.log(t_max / t_min) / np.log(window_ratio) - 1e-12)))
    edges = t_min * (t_max / t_min) ** (np.arange(nwin + 1) / nwin)
    rules = [ContourRule(edges[i], edges[i + 1], K) for i in range(nwin)]
    cache: dict = {}

    def u(x, t: float):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if not (t_min * (1.0 - 1e-12) <= t <= t_max * (1.0 + 1e-12)):
            raise ValueError(f"t={t} outside the window [{t_min}, {t_max}]")
        i = min(int(np.searchsorted(edges, t, side="right")) - 1, nwin - 1)
        i = max(i, 0)
        rule = rules[i]
        key = (i, x.tobytes())
        if key not in cache:
            cache[key] = pde_transform(x[:, None], rule.nodes[None, :], params)
        vals = cache[key] @ (rule.weights * np.exp(rule.nodes * t))
        return vals.real

    return u
