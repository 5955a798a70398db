"""Legendre polynomials, Gauss-Legendre/Gauss-Jacobi rules and right-Radau points.

All rules live on the reference interval [-1, 1].  Gauss nodes are computed
by the Golub-Welsch algorithm (symmetric tridiagonal eigenproblem built from
the closed-form three-term recurrence coefficients), which is robust even for
Jacobi exponents close to the -1 limit.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import exp, lgamma

import numpy as np
from scipy.linalg import eigh_tridiagonal

__all__ = [
    "QuadRule",
    "RadauPoints",
    "legendre_values",
    "legendre_table",
    "gauss_legendre",
    "gauss_jacobi",
    "radau_points",
    "graded_breakpoints",
    "composite_legendre",
]


@dataclass(frozen=True)
class QuadRule:
    """Quadrature nodes/weights exact to degree 2M-1 against the weight.

    ``kind`` is "legendre" (weight 1) or "jacobi" (weight (1-x)^a (1+x)^b).
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    a: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def npoints(self) -> int:
        return self.nodes.size

    def integrate(self, values: np.ndarray) -> float | np.ndarray:
        """Contract integrand values at the nodes (last axis) with the weights."""
        return np.asarray(values) @ self.weights


@dataclass(frozen=True)
class RadauPoints:
    """Zeros of P_r - P_{r-1} on (-1, 1] with -1 prepended (r+2 points total
    would double-count; taus has length r+1 including both endpoints)."""

    degree: int
    taus: np.ndarray

    def __post_init__(self):
        self.taus.setflags(write=False)


def legendre_values(r: int, tau) -> tuple[np.ndarray, np.ndarray]:
    """Values and derivatives of P_0 .. P_{r-1} at a scalar point tau.

    Uses the standard normalisation P_j(1) = 1.
    """
    vals, ders = legendre_table(r, np.asarray([float(tau)]))
    return vals[:, 0], ders[:, 0]


def legendre_table(r: int, taus: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Tables P[j, m] = P_j(tau_m) and dP[j, m] = P_j'(tau_m) for 0 <= j < r.

    Three-term recurrence for the values; the derivative recurrence
    P'_{j+1} = P'_{j-1} + (2j+1) P_j avoids the 1 - tau^2 division and is
    total on the closed interval.
    """
    if r < 1:
        raise ValueError(f"need r >= 1, got {r}")
    taus = np.asarray(taus, dtype=float)
    vals = np.empty((r, taus.size))
    ders = np.empty((r, taus.size))
    vals[0] = 1.0
    ders[0] = 0.0
    if r > 1:
        vals[1] = taus
        ders[1] = 1.0
    for j in range(1, r - 1):
        vals[j + 1] = ((2 * j + 1) * taus * vals[j] - j * vals[j - 1]) / (j + 1)
        ders[j + 1] = ders[j - 1] + (2 * j + 1) * vals[j]
    return vals, ders


def gauss_legendre(M: int) -> QuadRule:
    """M-point Gauss-Legendre rule on [-1, 1] (Golub-Welsch)."""
    if M < 1:
        raise ValueError(f"need M >= 1, got {M}")
    if M == 1:
        return QuadRule(np.zeros(1), np.full(1, 2.0), "legendre")
    i = np.arange(1, M, dtype=float)
    beta = i / np.sqrt(4.0 * i * i - 1.0)
    nodes, vecs = eigh_tridiagonal(np.zeros(M), beta)
    weights = 2.0 * vecs[0] ** 2
    return QuadRule(nodes, weights, "legendre")


def _jacobi_recurrence(M: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray, float]:
    """Diagonal/off-diagonal of the Jacobi matrix plus the zeroth moment."""
    alpha = np.zeros(M)
    beta = np.zeros(M)  # beta[k] multiplies the k-th off-diagonal, k >= 1
    apb = a + b
    alpha[0] = (b - a) / (apb + 2.0)
    # 2^(a+b+1) * Beta(a+1, b+1), via lgamma to stay finite near the -1 limits
    mom0 = exp((apb + 1.0) * np.log(2.0) + lgamma(a + 1.0) + lgamma(b + 1.0) - lgamma(apb + 2.0))
    if M > 1:
        # k = 1 written with the (1+a+b) factor cancelled to avoid 0/0 at a+b = -1
        beta[1] = 4.0 * (1.0 + a) * (1.0 + b) / ((apb + 2.0) ** 2 * (apb + 3.0))
        alpha[1] = (b * b - a * a) / ((apb + 2.0) * (apb + 4.0))
    for k in range(2, M):
        den = 2.0 * k + apb
        alpha[k] = (b * b - a * a) / (den * (den + 2.0))
        beta[k] = (
            4.0 * k * (k + a) * (k + b) * (k + apb)
            / ((den * den - 1.0) * den * den)
        )
    return alpha, beta, mom0


def gauss_jacobi(M: int, a: float, b: float) -> QuadRule:
    """M-point Gauss-Jacobi rule for the weight (1-x)^a (1+x)^b on [-1, 1]."""
    if M < 1:
        raise ValueError(f"need M >= 1, got {M}")
    if a <= -1.0 or b <= -1.0:
        raise ValueError(f"Jacobi exponents must exceed -1, got a={a}, b={b}")
    if a == 0.0 and b == 0.0:
        rule = gauss_legendre(M)
        return QuadRule(rule.nodes, rule.weights, "jacobi", 0.0, 0.0)
    alpha, beta, mom0 = _jacobi_recurrence(M, a, b)
    if M == 1:
        return QuadRule(alpha[:1].copy(), np.full(1, mom0), "jacobi", a, b)
    nodes, vecs = eigh_tridiagonal(alpha, np.sqrt(beta[1:]))
    weights = mom0 * vecs[0] ** 2
    return QuadRule(nodes, weights, "jacobi", a, b)


def _radau_poly(r: int, tau: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(P_r - P_{r-1})(tau) and its derivative."""
    vals, ders = legendre_table(r + 1, np.atleast_1d(np.asarray(tau, dtype=float)))
    return vals[r] - vals[r - 1], ders[r] - ders[r - 1]


def radau_points(r: int, tol: float = 1e-14, max_iter: int = 100) -> RadauPoints:
    """Right-Radau points for degree r: the r zeros of P_r - P_{r-1} on (-1, 1]
    with the left endpoint -1 prepended.

    Safeguarded Newton on each sign-change bracket of a Chebyshev-extrema scan,
    falling back to bisection whenever a Newton step leaves the bracket.
    """
    if r < 1:
        raise ValueError(f"need r >= 1, got {r}")
    if r == 1:
        return RadauPoints(1, np.array([-1.0, 1.0]))
    # scan grid dense enough to separate the r-1 interior zeros
    grid = np.cos(np.pi * np.arange(16 * r, -1, -1) / (16 * r))
    fg, _ = _radau_poly(r, grid)
    roots = []
    for m in range(grid.size - 1):
        lo, hi = grid[m], grid[m + 1]
        flo, fhi = fg[m], fg[m + 1]
        if hi >= 1.0 - 1e-13:  # exclude the known zero at +1
            continue
        if flo == 0.0:
            roots.append(lo)
            continue
        if flo * fhi > 0.0:
            continue
        x = 0.5 * (lo + hi)
        for _ in range(max_iter):
            f, df = _radau_poly(r, x)
            f, df = f[0], df[0]
            if abs(f) <= tol:
                break
            if f * flo > 0.0:
                lo = x
            else:
                hi = x
            x_newton = x - f / df if df != 0.0 else np.inf
            x = x_newton if lo < x_newton < hi else 0.5 * (lo + hi)
        else:
            res, _ = _radau_poly(r, x)
            raise RuntimeError(
                f"Radau root iteration stalled for r={r}: residual {res[0]:.3e}"
            )
        roots.append(x)
    if len(roots) != r - 1:
        raise RuntimeError(f"expected {r - 1} interior Radau points, found {len(roots)}")
    taus = np.concatenate(([-1.0], np.sort(roots), [1.0]))
    return RadauPoints(r, taus)


def graded_breakpoints(a: float, b: float, edge: float, first: float, growth: float = 3.0) -> np.ndarray:
    """Panel breakpoints on [a, b], geometrically refined toward ``edge``
    (one of the endpoints) with smallest panel ``first``."""
    if not (a < b):
        raise ValueError("empty panel interval")
    length = b - a
    if first >= length:
        return np.array([a, b])
    offs = [0.0, first]
    while offs[-1] * growth < length:
        offs.append(offs[-1] * growth)
    offs.append(length)
    offs = np.asarray(offs)
    if edge == a:
        return a + offs
    if edge == b:
        return (b - offs)[::-1].copy()
    raise ValueError("edge must be one of the endpoints")


def composite_legendre(breaks: np.ndarray, M: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights of an M-point Gauss-Legendre rule applied on each panel."""
    base = gauss_legendre(M)
    breaks = np.asarray(breaks, dtype=float)
    mid = 0.5 * (breaks[1:] + breaks[:-1])
    half = 0.5 * (breaks[1:] - breaks[:-1])
    nodes = (mid[:, None] + half[:, None] * base.nodes).ravel()
    weights = (half[:, None] * base.weights).ravel()
    return nodes, weights
