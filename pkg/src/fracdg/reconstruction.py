"""Post-processing of a dG solution into a degree-raised reconstruction.

On each interval the reconstruction interpolates the dG solution at the
interior right-Radau points, matches its left limit at the interval's right
end, and takes the incoming value from the previous interval at the left
end, which closes the jumps and raises the local degree by one.  In Legendre
coefficients the correction is jump-proportional:

    Uhat^{nj} = U^{nj}                         for j <= r-1,
    Uhat^{nr} = U^{nr} + (-1)^r   jump/2,
    Uhat^{n,r+1} =      (-1)^(r+1) jump/2.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .dg_ode import DGSolution

__all__ = ["ReconstructedSolution", "reconstruct", "raise_coefficients", "recon_max_error"]


class ReconstructedSolution(DGSolution):
    """Continuous piecewise polynomial of degree r produced from a degree
    r-1 dG solution; ``source`` is the solution it post-processes."""

    def __init__(self, mesh, coeffs, u0, source: DGSolution):
        super().__init__(mesh, coeffs, u0)
        self.source = source


def raise_coefficients(coeffs: np.ndarray, jumps: np.ndarray) -> np.ndarray:
    """Apply the jump-proportional degree raise to Legendre coefficient
    arrays of shape (N, r, ...); ``jumps[n-1]`` is the jump entering
    interval n."""
    N, r = coeffs.shape[:2]
    out = np.zeros((N, r + 1) + coeffs.shape[2:])
    out[:, :r] = coeffs
    half = 0.5 * (-1.0) ** r * np.asarray(jumps)
    out[:, r - 1] += half
    out[:, r] = -half
    return out


def reconstruct(sol: DGSolution) -> ReconstructedSolution:
    """Degree-raised reconstruction of a scalar or vector-valued dG solution."""
    N = sol.mesh.N
    jumps = np.stack([sol.jump(n) for n in range(1, N + 1)])
    return ReconstructedSolution(sol.mesh, raise_coefficients(sol.coeffs, jumps),
                                 sol.u0, sol)


def recon_max_error(rec: DGSolution, exact: Callable, samples_per_interval: int = 16) -> float:
    """max_t |rec(t) - exact(t)| over a Chebyshev-Lobatto grid per interval."""
    if samples_per_interval < 10:
        raise ValueError("need at least 10 samples per interval")
    taus = np.cos(np.pi * np.arange(samples_per_interval, -1, -1) / samples_per_interval)
    worst = 0.0
    for n in range(1, rec.mesh.N + 1):
        t = rec.mesh.affine(n, taus)
        err = np.abs(rec.interval_values(n, taus) - exact(t))
        worst = max(worst, float(err.max()))
    return worst
