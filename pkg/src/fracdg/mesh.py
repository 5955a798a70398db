"""Time meshes, affine reference maps and mesh geometry.

A mesh is the partition 0 = t_0 < t_1 < ... < t_N = T.  Interval n (1-based)
is I_n = (t_{n-1}, t_n) with step k_n, and the affine map onto the reference
interval is t_n(tau) = [(1-tau) t_{n-1} + (1+tau) t_n] / 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TimeMesh",
    "make_mesh",
    "affine_map",
    "midpoint_distance",
    "step_ratio",
]


@dataclass(frozen=True)
class TimeMesh:
    levels: np.ndarray
    kind: str = "explicit"
    q: float | None = None

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=float)
        if levels.ndim != 1 or levels.size < 2:
            raise ValueError("mesh needs at least one interval")
        if levels[0] != 0.0:
            raise ValueError("mesh must start at t = 0")
        if np.any(np.diff(levels) <= 0.0):
            raise ValueError("mesh levels must be strictly increasing")
        levels.setflags(write=False)
        object.__setattr__(self, "levels", levels)

    @property
    def N(self) -> int:
        return self.levels.size - 1

    @property
    def T(self) -> float:
        return float(self.levels[-1])

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.levels)

    def step(self, n: int) -> float:
        """k_n = t_n - t_{n-1} for 1 <= n <= N."""
        self._check_index(n)
        return float(self.levels[n] - self.levels[n - 1])

    def midpoint(self, n: int) -> float:
        self._check_index(n)
        return 0.5 * float(self.levels[n] + self.levels[n - 1])

    def affine(self, n: int, tau):
        """Map reference coordinates tau in [-1, 1] onto interval n."""
        self._check_index(n)
        tau = np.asarray(tau, dtype=float)
        t = 0.5 * ((1.0 - tau) * self.levels[n - 1] + (1.0 + tau) * self.levels[n])
        return float(t) if t.ndim == 0 else t

    def inverse_affine(self, n: int, t):
        self._check_index(n)
        t = np.asarray(t, dtype=float)
        tau = (2.0 * t - self.levels[n - 1] - self.levels[n]) / self.step(n)
        return float(tau) if tau.ndim == 0 else tau

    def locate(self, t: float, side: str = "left") -> int:
        """Interval index containing t; at interior mesh points ``side``
        selects between the adjoining intervals."""
        if not (0.0 <= t <= self.T):
            raise ValueError(f"t={t} outside [0, {self.T}]")
        mode = {"left": "left", "right": "right"}[side]
        n = int(np.searchsorted(self.levels, t, side=mode))
        return min(max(n, 1), self.N)

    def _check_index(self, n: int) -> None:
        if not (1 <= n <= self.N):
            raise IndexError(f"interval index {n} out of range 1..{self.N}")


def make_mesh(kind: str, N: int, T: float, q: float | None = None,
              graded_until: float | None = None) -> TimeMesh:
    """Build a time mesh.

    kind = "uniform":   t_n = n T / N.
    kind = "graded":    t_n = (n/N)^q T, q >= 1.
    kind = "composite": graded with exponent q on [0, graded_until], then
        uniform steps up to T.  The split of the N steps matches the grading:
        the uniform step is chosen close to the final graded step.
    """
    if N < 1:
        raise ValueError(f"need N >= 1, got {N}")
    if T <= 0.0:
        raise ValueError(f"need T > 0, got {T}")
    if kind == "uniform":
        return TimeMesh(np.linspace(0.0, T, N + 1), "uniform")
    if kind == "graded":
        if q is None or q < 1.0:
            raise ValueError("graded mesh needs q >= 1")
        n = np.arange(N + 1, dtype=float)
        return TimeMesh(T * (n / N) ** q, "graded", q)
    if kind == "composite":
        if q is None or q < 1.0:
            raise ValueError("composite mesh needs q >= 1")
        if graded_until is None or not (0.0 < graded_until < T):
            raise ValueError("composite mesh needs 0 < graded_until < T")
        ts = graded_until
        # last graded step ~ q ts / N_g, uniform step = (T-ts)/(N-N_g); equate
        n_graded = int(round(q * N * ts / ((T - ts) + q * ts)))
        n_graded = min(max(n_graded, 1), N - 1)
        n = np.arange(n_graded + 1, dtype=float)
        graded = ts * (n / n_graded) ** q
        uniform = np.linspace(ts, T, N - n_graded + 1)[1:]
        return TimeMesh(np.concatenate([graded, uniform]), "composite", q)
    raise ValueError(f"unknown mesh kind {kind!r}")


def affine_map(mesh: TimeMesh, n: int, tau):
    return mesh.affine(n, tau)


def midpoint_distance(mesh: TimeMesh, n: int, ell: int) -> float:
    """D_{n,n-ell} = t_{n-1/2} - t_{ell-1/2}."""
    return mesh.midpoint(n) - mesh.midpoint(ell)


def step_ratio(mesh: TimeMesh, n: int) -> float:
    """rho_n = k_n / k_{n-1} for n >= 2."""
    if n < 2:
        raise IndexError("step ratio needs n >= 2")
    return mesh.step(n) / mesh.step(n - 1)
