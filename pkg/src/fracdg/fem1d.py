"""Conforming nodal finite elements on (0, L) with zero Dirichlet data.

Continuous piecewise polynomials of degree p on E equal elements; the
Lagrange basis sits on equispaced nodes inside each element, and the two
boundary nodes are eliminated, leaving P = E p - 1 free nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .polylib import gauss_legendre

__all__ = [
    "FemSpace1D",
    "SpatialOperators",
    "assemble",
    "load_vector",
    "l2_project",
    "fem_values",
    "l2_norm",
]


def _lagrange_tables(ref_nodes: np.ndarray, taus: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values and derivatives of the Lagrange basis on ``ref_nodes`` at taus."""
    p1 = ref_nodes.size
    vals = np.ones((p1, taus.size))
    ders = np.zeros((p1, taus.size))
    for i in range(p1):
        for m in range(p1):
            if m == i:
                continue
            dm = ref_nodes[i] - ref_nodes[m]
            ders[i] = (ders[i] * (taus - ref_nodes[m]) + vals[i]) / dm
            vals[i] = vals[i] * (taus - ref_nodes[m]) / dm
    return vals, ders


class FemSpace1D:
    """Degree-p nodal space on E uniform elements of (0, L)."""

    def __init__(self, L: float, elements: int, degree: int):
        if L <= 0.0 or elements < 1 or degree < 1:
            raise ValueError("need L > 0, elements >= 1, degree >= 1")
        self.L = float(L)
        self.elements = elements
        self.degree = degree
        self.h = L / elements
        self.ref_nodes = np.linspace(-1.0, 1.0, degree + 1)
        # global node coordinates, element e owning nodes e*p .. e*p + p
        self.nodes = np.linspace(0.0, L, elements * degree + 1)
        self.P = elements * degree - 1  # free (interior) nodes

    def element_dofs(self, e: int) -> np.ndarray:
        """Free-node indices of element e (-1 marks a Dirichlet node)."""
        glob = np.arange(e * self.degree, (e + 1) * self.degree + 1)
        return np.where((glob == 0) | (glob == self.nodes.size - 1), -1, glob - 1)

    def values_at(self, coeffs: np.ndarray, x) -> np.ndarray:
        return fem_values(self, coeffs, x)


@dataclass(frozen=True)
class SpatialOperators:
    mass: np.ndarray
    stiffness: np.ndarray


def assemble(space: FemSpace1D) -> SpatialOperators:
    """Mass and stiffness matrices, element-wise Gauss exact for both."""
    p = space.degree
    M = np.zeros((space.P, space.P))
    A = np.zeros((space.P, space.P))
    rule = gauss_legendre(p + 1)
    vals, ders = _lagrange_tables(space.ref_nodes, rule.nodes)
    jac = 0.5 * space.h
    m_loc = np.einsum("iq,jq,q->ij", vals, vals, rule.weights) * jac
    a_loc = np.einsum("iq,jq,q->ij", ders, ders, rule.weights) / jac
    for e in range(space.elements):
        dofs = space.element_dofs(e)
        keep = dofs >= 0
        idx = dofs[keep]
        M[np.ix_(idx, idx)] += m_loc[np.ix_(keep, keep)]
        A[np.ix_(idx, idx)] += a_loc[np.ix_(keep, keep)]
    return SpatialOperators(M, A)


def load_vector(space: FemSpace1D, g: Callable, extra: int = 4) -> np.ndarray:
    """<g, phi_p> for all free nodal basis functions."""
    p = space.degree
    rule = gauss_legendre(p + extra)
    vals, _ = _lagrange_tables(space.ref_nodes, rule.nodes)
    jac = 0.5 * space.h
    out = np.zeros(space.P)
    for e in range(space.elements):
        xq = (e + 0.5 * (rule.nodes + 1.0)) * space.h
        gw = np.asarray(g(xq), dtype=float) * rule.weights * jac
        contrib = vals @ gw
        dofs = space.element_dofs(e)
        keep = dofs >= 0
        out[dofs[keep]] += contrib[keep]
    return out


def l2_project(space: FemSpace1D, g: Callable, ops: SpatialOperators | None = None) -> np.ndarray:
    """Coefficients of the L2 projection of g onto the space."""
    ops = ops or assemble(space)
    rhs = load_vector(space, g)
    c = cho_solve(cho_factor(ops.mass), rhs)
    res = np.abs(ops.mass @ c - rhs).max() / max(np.abs(rhs).max(), 1e-300)
    if res > 1e-12:
        raise RuntimeError(f"projection solve residual {res:.3e}")
    return c


def fem_values(space: FemSpace1D, coeffs: np.ndarray, x) -> np.ndarray:
    """Evaluate the FEM function at points x (coeffs over free nodes)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any((x < 0.0) | (x > space.L)):
        raise ValueError("x outside the spatial domain")
    e = np.minimum((x / space.h).astype(int), space.elements - 1)
    tau = 2.0 * (x - e * space.h) / space.h - 1.0
    full = np.concatenate(([0.0], np.asarray(coeffs), [0.0]))
    out = np.zeros_like(x)
    for el in np.unique(e):
        sel = e == el
        vals, _ = _lagrange_tables(space.ref_nodes, tau[sel])
        glob = np.arange(el * space.degree, (el + 1) * space.degree + 1)
        out[sel] = full[glob] @ vals
    return out


def l2_norm(space: FemSpace1D, func: Callable, extra: int = 4) -> float:
    """L2(0, L) norm of a callable x -> values (vectorised)."""
    rule = gauss_legendre(space.degree + extra)
    jac = 0.5 * space.h
    total = 0.0
    for e in range(space.elements):
        xq = (e + 0.5 * (rule.nodes + 1.0)) * space.h
        total += jac * float(np.asarray(func(xq)) ** 2 @ rule.weights)
    return float(np.sqrt(total))
