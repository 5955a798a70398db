"""Time-stepping coefficient matrices for the fractional-derivative dG scheme.

With the Legendre shape functions, the step matrices G and K have exact
integer entries.  The memory-weight matrices H^{n,lbar} (lbar = n - ell is
the interval lag) are weakly singular integrals; they are evaluated here to
machine precision by splitting each into pieces that are either smooth or
polynomials against a standard Jacobi weight:

* lag 0: an endpoint-weighted one-dimensional integral plus a corner-split
  double integral with weight (1+y)^(alpha-1),
* lag 1: corner-splitting of the double integral into two terms whose outer
  integrals carry (1 -+ x)^alpha weights and whose inner integrands are
  smooth for step ratios of order one,
* lag >= 2: a smooth double integral with kernel (1 + Delta)^(alpha-2),
  handled by a tensor Gauss rule, with geometric panel refinement toward the
  near-singular edge when neighbouring steps differ strongly.

A brute-force oracle (``oracle_h``) integrates the defining formulas
directly with composite Gauss rules graded into every weak singularity; it
shares no code path with the fast evaluators beyond basic quadrature
plumbing.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, gamma

import numpy as np

from .mesh import TimeMesh
from .polylib import (
    composite_legendre,
    gauss_jacobi,
    gauss_legendre,
    graded_breakpoints,
    legendre_table,
)

__all__ = [
    "CoeffSet",
    "g_matrix",
    "k_matrix",
    "h0_matrix",
    "h1_matrix",
    "h_matrix",
    "h_matrix_parts_form",
    "h_far_tensor",
    "uniform_history",
    "oracle_h",
]

# step-ratio window within which the lag-1 inner integrands need no panel
# refinement, and reference-edge gap below which the far kernel does
_RHO_SMOOTH = (0.5, 2.0)
_GAP_SMOOTH = 2.0
_M_CAP = 12


def _check_alpha(alpha: float, allow_one: bool = True) -> None:
    hi_ok = alpha <= 1.0 if allow_one else alpha < 1.0
    if not (0.0 < alpha and hi_ok):
        raise ValueError(f"fractional exponent alpha={alpha} out of range")


def g_matrix(r: int) -> np.ndarray:
    """Trial/test coupling of d/dt plus the upwind jump: exact integers."""
    if r < 1:
        raise ValueError(f"need r >= 1, got {r}")
    i, j = np.indices((r, r)) + 1
    return np.where(i >= j, (-1.0) ** (i + j), 1.0)


def k_matrix(r_now: int, r_prev: int) -> np.ndarray:
    """Coupling to the previous interval's end value: rank-1 sign pattern."""
    if r_now < 1 or r_prev < 1:
        raise ValueError("need positive polynomial counts")
    i = np.arange(1, r_now + 1)
    return np.tile(((-1.0) ** (i - 1))[:, None], (1, r_prev))


def _weighted_table(nodes: np.ndarray, weights: np.ndarray, r: int, derivative: bool = False):
    """vals[j, m] * weights[m] for the Legendre values (or derivatives)."""
    vals, ders = legendre_table(r, nodes)
    return (ders if derivative else vals) * weights


def h0_unit(alpha: float, r: int, margin: int = 2) -> np.ndarray:
    """Lag-0 memory matrix for a unit step (scale by k^alpha for step k)."""
    _check_alpha(alpha)
    if r < 1:
        raise ValueError(f"need r >= 1, got {r}")
    # one-dimensional piece: S_j = int (1-s)^(alpha-1) P_{j-1}(s) ds, exact
    rule_s = gauss_jacobi(ceil(r / 2) + margin, alpha - 1.0, 0.0)
    S = legendre_table(r, rule_s.nodes)[0] @ rule_s.weights
    # double piece: int (1+y)^(alpha-1) (1-y) Phi_ij(y) dy with Phi polynomial
    rule_y = gauss_jacobi(r + 1 + margin, 0.0, alpha - 1.0)
    rule_z = gauss_legendre(r + 1 + margin)
    y = rule_y.nodes[:, None]
    z = rule_z.nodes[None, :]
    u = 0.5 * (1.0 - y) * (1.0 + z) - 1.0
    v = 1.0 - 0.5 * (1.0 - y) * (1.0 - z)
    Pu = legendre_table(r, u.ravel())[0].reshape(r, *u.shape)
    Dv = legendre_table(r, v.ravel())[1].reshape(r, *v.shape)
    phi = 0.5 * np.einsum("jyz,iyz,z->ijy", Pu, Dv, rule_z.weights)
    Y = np.einsum("ijy,y->ij", phi, rule_y.weights * (1.0 - rule_y.nodes))
    return (S[None, :] - Y) / (2.0 ** alpha * gamma(alpha))


def h0_matrix(alpha: float, r: int, k_n: float = 1.0) -> np.ndarray:
    """Lag-0 memory matrix for step size k_n."""
    if k_n <= 0.0:
        raise ValueError(f"need k_n > 0, got {k_n}")
    return k_n ** alpha * h0_unit(alpha, r)


def _rule01(M: int, layer: float | None) -> tuple[np.ndarray, np.ndarray]:
    """M-point Gauss rule on [0, 1], panel-refined toward 0 when the
    integrand has a boundary layer of scale ``layer`` there."""
    if layer is None or layer >= 0.5:
        breaks = np.array([0.0, 1.0])
    else:
        breaks = graded_breakpoints(0.0, 1.0, 0.0, max(layer, 1e-14))
    return composite_legendre(breaks, M)


def h1_matrix(alpha: float, r: int, k_now: float, k_prev: float, M: int = _M_CAP) -> np.ndarray:
    """Lag-1 memory matrix H^{n,n-1} for steps k_{n-1}, k_n.

    Corner-split form: the outer integrals carry the weights (1+tau)^alpha
    and (1-sigma)^alpha, the inner kernels (rho+z)^(alpha-1) and
    (rho z+1)^(alpha-1) are smooth when the step ratio rho is of order one
    and are panel-refined otherwise.  ``M`` controls every sub-rule.
    """
    _check_alpha(alpha)
    if alpha == 1.0:
        return np.zeros((r, r))  # memory-free classical limit
    rho = k_now / k_prev
    scale = (1.0 + rho) ** (1.0 - alpha)
    D = 0.5 * (k_now + k_prev)
    pref = D ** (alpha - 1.0) / gamma(alpha) * 0.5 * k_prev

    # A_j: smooth unless rho << 1 pushes the singular point 2 rho + 1 to sigma = 1
    if rho >= _RHO_SMOOTH[0]:
        rule_a = gauss_legendre(M)
        a_nodes, a_w = rule_a.nodes, rule_a.weights
    else:
        a_nodes, a_w = composite_legendre(graded_breakpoints(-1.0, 1.0, 1.0, 2.0 * rho), M)
    A = legendre_table(r, a_nodes)[0] @ (a_w * (2.0 * rho + 1.0 - a_nodes) ** (alpha - 1.0))

    # B_j: pure Jacobi weight, exact
    rule_b = gauss_jacobi(M, alpha - 1.0, 0.0)
    B = legendre_table(r, rule_b.nodes)[0] @ rule_b.weights

    # first corner term: outer (1+tau)^alpha, inner (rho+z)^(alpha-1)
    outer1 = gauss_jacobi(M, 0.0, alpha)
    z1, wz1 = _rule01(M, rho if rho < _RHO_SMOOTH[0] else None)
    args = 1.0 - z1[None, :] * (1.0 + outer1.nodes[:, None])
    Pin = legendre_table(r, args.ravel())[0].reshape(r, *args.shape)
    inner1 = np.einsum("jtz,z->jt", Pin, wz1 * (rho + z1) ** (alpha - 1.0))
    Dout = legendre_table(r, outer1.nodes)[1]
    C = np.einsum("it,jt,t->ij", Dout, inner1, outer1.weights)

    # second corner term: outer (1-sigma)^alpha, inner (rho z + 1)^(alpha-1)
    outer2 = gauss_jacobi(M, alpha, 0.0)
    z2, wz2 = _rule01(M, 1.0 / rho if rho > _RHO_SMOOTH[1] else None)
    args = z2[None, :] * (1.0 - outer2.nodes[:, None]) - 1.0
    Din = legendre_table(r, args.ravel())[1].reshape(r, *args.shape)
    inner2 = np.einsum("isz,z->is", Din, wz2 * (rho * z2 + 1.0) ** (alpha - 1.0))
    Pout = legendre_table(r, outer2.nodes)[0]
    C = C + np.einsum("is,js,s->ij", inner2, Pout, outer2.weights)

    sign = (-1.0) ** np.arange(1, r + 1)
    return pref * scale * (A[None, :] + sign[:, None] * B[None, :] - C)


def _far_kernel_quads(k_now: float, k_ell: float, gap: float, M: int):
    """Quadrature nodes/weights in tau and sigma for the lag >= 2 kernel.

    ``gap`` = 2 (t_{n-1} - t_ell) / k is the reference-coordinate distance of
    the kernel's singular line from the integration square, per direction.
    """
    gap_tau = gap / k_now
    gap_sig = gap / k_ell
    if gap_tau >= _GAP_SMOOTH:
        tau, wt = gauss_legendre(M).nodes, gauss_legendre(M).weights
    else:
        tau, wt = composite_legendre(graded_breakpoints(-1.0, 1.0, -1.0, 0.5 * gap_tau), M)
    if gap_sig >= _GAP_SMOOTH:
        sig, ws = gauss_legendre(M).nodes, gauss_legendre(M).weights
    else:
        sig, ws = composite_legendre(graded_breakpoints(-1.0, 1.0, 1.0, 0.5 * gap_sig), M)
    return tau, wt, sig, ws


def h_far_tensor(alpha: float, r: int, k_now: float, k_ell: float, D: float,
                 M: int, refine: bool = True) -> np.ndarray:
    """Lag >= 2 memory matrix from the (1+Delta)^(alpha-2) kernel with an
    M x M tensor Gauss rule (plus edge panels when ``refine``)."""
    _check_alpha(alpha)
    gap = 2.0 * D - k_now - k_ell  # = 2 (t_{n-1} - t_ell) > 0
    if refine:
        tau, wt, sig, ws = _far_kernel_quads(k_now, k_ell, gap, M)
    else:
        rule = gauss_legendre(M)
        tau, wt, sig, ws = rule.nodes, rule.weights, rule.nodes, rule.weights
    kern = (1.0 + (tau[:, None] * k_now - sig[None, :] * k_ell) / (2.0 * D)) ** (alpha - 2.0)
    WPt = _weighted_table(tau, wt, r)
    WPs = _weighted_table(sig, ws, r)
    pref = -(1.0 - alpha) / gamma(alpha) * 0.25 * k_now * k_ell * D ** (alpha - 2.0)
    return pref * np.einsum("ia,ab,jb->ij", WPt, kern, WPs)


def _far_row_batch(alpha: float, r: int, mesh: TimeMesh, n: int, M: int = _M_CAP) -> np.ndarray:
    """All lag >= 2 matrices H^{n,n-ell}, ell = 1..n-2, for one step n."""
    levels, steps = mesh.levels, mesh.steps
    ells = np.arange(1, n - 1)
    out = np.zeros((ells.size, r, r))
    if ells.size == 0:
        return out
    k_now = steps[n - 1]
    k_ell = steps[ells - 1]
    D = mesh.midpoint(n) - 0.5 * (levels[ells] + levels[ells - 1])
    gap = 2.0 * (levels[n - 1] - levels[ells])
    smooth = (gap / k_now >= _GAP_SMOOTH) & (gap / k_ell >= _GAP_SMOOTH)

    if np.any(smooth):
        rule = gauss_legendre(M)
        WP = _weighted_table(rule.nodes, rule.weights, r)
        delta = (rule.nodes[:, None] * k_now - rule.nodes[None, :] * k_ell[smooth, None, None])
        kern = (1.0 + delta / (2.0 * D[smooth, None, None])) ** (alpha - 2.0)
        pref = -(1.0 - alpha) / gamma(alpha) * 0.25 * k_now * k_ell[smooth] * D[smooth] ** (alpha - 2.0)
        out[smooth] = pref[:, None, None] * np.einsum("ia,lab,jb->lij", WP, kern, WP)
    for idx in np.nonzero(~smooth)[0]:
        out[idx] = h_far_tensor(alpha, r, k_now, k_ell[idx], D[idx], M)
    return out


def h_matrix(alpha: float, r: int, mesh: TimeMesh, n: int, lbar: int,
             atol: float = 1e-14) -> np.ndarray:
    """Memory matrix H^{n, lbar} on ``mesh`` (lag lbar = n - ell >= 1),
    including the mesh scale."""
    if not (1 <= lbar <= n - 1):
        raise ValueError(f"lag {lbar} out of range for step n={n}")
    if n > mesh.N:
        raise IndexError(f"step {n} beyond mesh size {mesh.N}")
    if lbar == 1:
        return h1_matrix(alpha, r, mesh.step(n), mesh.step(n - 1))
    ell = n - lbar
    D = mesh.midpoint(n) - mesh.midpoint(ell)
    return h_far_tensor(alpha, r, mesh.step(n), mesh.step(ell), D, _M_CAP)


def h_matrix_parts_form(alpha: float, r: int, mesh: TimeMesh, n: int, lbar: int,
                        M: int = 16) -> np.ndarray:
    """Cross-check path for lag >= 2: integration-by-parts form with boundary
    terms and the (1+Delta)^(alpha-1) kernel.  Smooth for lag >= 2, so plain
    Gauss rules suffice on meshes with order-one step ratios."""
    _check_alpha(alpha)
    if lbar < 2:
        raise ValueError("parts form is a cross-check for lag >= 2 only")
    ell = n - lbar
    if ell < 1:
        raise ValueError(f"lag {lbar} out of range for step n={n}")
    k_now, k_ell = mesh.step(n), mesh.step(ell)
    D = mesh.midpoint(n) - mesh.midpoint(ell)
    rule = gauss_legendre(M)
    sig, ws = rule.nodes, rule.weights
    Ps = legendre_table(r, sig)[0]

    def kern(tau):
        return (1.0 + (tau * k_now - sig * k_ell) / (2.0 * D)) ** (alpha - 1.0)

    A = Ps @ (ws * kern(1.0))
    B = Ps @ (ws * kern(-1.0))
    kern2 = (1.0 + (rule.nodes[:, None] * k_now - sig[None, :] * k_ell) / (2.0 * D)) ** (alpha - 1.0)
    WDt = _weighted_table(rule.nodes, rule.weights, r, derivative=True)
    WPs = Ps * ws
    C = np.einsum("ia,ab,jb->ij", WDt, kern2, WPs)
    sign = (-1.0) ** np.arange(1, r + 1)
    pref = D ** (alpha - 1.0) / gamma(alpha) * 0.5 * k_ell
    return pref * (A[None, :] + sign[:, None] * B[None, :] - C)


@dataclass
class CoeffSet:
    """Coefficient provider for one (alpha, r) pair.

    For uniform meshes the memory matrices depend on the lag only, and the
    unit-step family H^{lbar} is cached once (scale k^alpha applied on
    access).  On general meshes each row of matrices is evaluated on demand.
    """

    alpha: float
    r: int
    atol: float = 1e-14
    mesh: TimeMesh | None = None
    mesh_kind: str = "uniform"
    h_unit: np.ndarray | None = None  # (Lmax+1, r, r), unit-step normalisation

    def __post_init__(self):
        self.G = g_matrix(self.r)
        self.K = k_matrix(self.r, self.r)

    # -- construction ------------------------------------------------------

    @classmethod
    def for_mesh(cls, alpha: float, r: int, mesh: TimeMesh, atol: float = 1e-14) -> "CoeffSet":
        steps = mesh.steps
        uniform = np.allclose(steps, steps[0], rtol=1e-12, atol=0.0)
        if uniform:
            cs = uniform_history(alpha, r, mesh.N - 1, atol)
            cs.mesh = mesh
            return cs
        return cls(alpha, r, atol, mesh, "general", None)

    # -- access ------------------------------------------------------------

    def h(self, lbar: int) -> np.ndarray:
        """Unit-step memory matrix H^{lbar} (uniform cache only)."""
        if self.h_unit is None:
            raise ValueError("no unit-step cache on a general-mesh CoeffSet")
        if not (0 <= lbar < self.h_unit.shape[0]):
            raise ValueError(f"lag {lbar} beyond cached range {self.h_unit.shape[0] - 1}")
        return self.h_unit[lbar]

    def h0_for_step(self, n: int) -> np.ndarray:
        k = self.mesh.step(n)
        if self.h_unit is not None:
            return k ** self.alpha * self.h_unit[0]
        return k ** self.alpha * h0_unit(self.alpha, self.r)

    def history_row(self, n: int) -> np.ndarray:
        """Array of shape (n-1, r, r): entry ell-1 is H^{n, n-ell} with the
        mesh scale, for ell = 1..n-1."""
        if self.mesh is None:
            raise ValueError("history_row needs a mesh-bound CoeffSet")
        if self.h_unit is not None:
            k = self.mesh.step(1)
            return k ** self.alpha * self.h_unit[1:n][::-1]
        row = np.empty((n - 1, self.r, self.r))
        if n >= 2:
            row[: n - 2] = _far_row_batch(self.alpha, self.r, self.mesh, n)
            row[n - 2] = h1_matrix(self.alpha, self.r, self.mesh.step(n), self.mesh.step(n - 1))
        return row


def uniform_history(alpha: float, r: int, Lmax: int, atol: float = 1e-14) -> CoeffSet:
    """Unit-step memory family H^{lbar}, lbar = 0..Lmax, for uniform meshes.

    The far-field (lag >= 2) family is evaluated in one batched tensor
    contraction; point counts follow a doubling schedule capped at the
    reference count 12, which resolves every lag to ~1e-15 absolute.
    """
    _check_alpha(alpha)
    if Lmax < 0:
        raise ValueError(f"need Lmax >= 0, got {Lmax}")
    h_unit = np.zeros((Lmax + 1, r, r))
    h_unit[0] = h0_unit(alpha, r)
    if Lmax >= 1:
        h_unit[1] = h1_matrix(alpha, r, 1.0, 1.0)
    if Lmax >= 2:
        lbars = np.arange(2, Lmax + 1, dtype=float)
        rule = gauss_legendre(_M_CAP)
        WP = _weighted_table(rule.nodes, rule.weights, r)
        diff = rule.nodes[:, None] - rule.nodes[None, :]
        kern = (1.0 + diff / (2.0 * lbars[:, None, None])) ** (alpha - 2.0)
        pref = -(1.0 - alpha) / (4.0 * gamma(alpha)) * lbars ** (alpha - 2.0)
        h_unit[2:] = pref[:, None, None] * np.einsum("ia,lab,jb->lij", WP, kern, WP)
    cs = CoeffSet(alpha, r, atol, None, "uniform", h_unit)
    return cs


# -- brute-force oracle ------------------------------------------------------
#
# The oracle integrates the raw time-domain formulas with composite Gauss
# rules graded geometrically into each weak singularity.  All quadrature is
# carried out in offset coordinates (distance from the singular endpoint):
# panel sizes shrink far below the floating-point spacing of the absolute
# time levels, and offsets keep that resolvable.


def _omega(mu: float, x: np.ndarray) -> np.ndarray:
    return x ** (mu - 1.0) / gamma(mu)


def _offset_rule(length: float, first: float, M: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite M-point Gauss rule on (0, length), panels graded toward 0."""
    first = min(max(first, length * 1e-60), length)
    offs = [0.0, first]
    while offs[-1] * 3.0 < length:
        offs.append(offs[-1] * 3.0)
    offs.append(length)
    return composite_legendre(np.asarray(offs), M)


def _singular_first(length: float, alpha: float, tol: float) -> float:
    """First-panel length so that a (t)^(alpha-1)-type endpoint contribution
    stays below ``tol`` relative to the interval scale."""
    return length * min(tol ** (1.0 / alpha), 0.3)


def _oracle_lag0(alpha, r, k, M, tol):
    """Direct H^{n,0} for a step of size k (translation invariant)."""
    endvals = (-1.0) ** np.arange(r)  # psi_j at the interval's left end

    # boundary part: psi_j(t_{n-1}) * int omega_alpha(t - t_{n-1}) psi_i(t) dt
    uq, wq = _offset_rule(k, _singular_first(k, alpha, tol), M)
    Pi = legendre_table(r, 2.0 * uq / k - 1.0)[0]
    bnd = Pi @ (wq * _omega(alpha, uq))
    H = bnd[:, None] * endvals[None, :]

    # bulk part: iint_{s<t} omega_alpha(t-s) psi_j'(s) psi_i(t) ds dt,
    # inner variable v = t - s
    for u, wu in zip(uq, wq):
        vq, wv = _offset_rule(u, _singular_first(u, alpha, tol), M)
        Dj = legendre_table(r, 2.0 * (u - vq) / k - 1.0)[1] * (2.0 / k)
        inner = Dj @ (wv * _omega(alpha, vq))
        Pi_t = legendre_table(r, np.array([2.0 * u / k - 1.0]))[0][:, 0]
        H += wu * np.outer(Pi_t, inner)
    return H


def _oracle_lag(alpha, r, k_n, k_l, gap0, M, tol):
    """Direct H^{n,n-ell}: u is the offset of t into I_n, w the offset of s
    back from the right end of I_ell, so t - s = u + gap0 + w with
    gap0 = t_{n-1} - t_ell >= 0 (zero for adjacent intervals)."""
    first_u = _singular_first(k_n, alpha, tol) if gap0 == 0.0 else 0.25 * k_n
    uq, wq = _offset_rule(k_n, first_u, M)
    H = np.zeros((r, r))
    for u, wu in zip(uq, wq):
        dist = u + gap0
        vq, wv = _offset_rule(k_l, min(0.5 * dist, 0.25 * k_l), M)
        Pj = legendre_table(r, 1.0 - 2.0 * vq / k_l)[0]
        inner = Pj @ (wv * _omega(alpha - 1.0, dist + vq))
        Pi_t = legendre_table(r, np.array([2.0 * u / k_n - 1.0]))[0][:, 0]
        H += wu * np.outer(Pi_t, inner)
    return H


def oracle_h(alpha: float, r: int, mesh: TimeMesh, n: int, lbar: int,
             tol: float = 1e-11) -> np.ndarray:
    """Reference evaluation of H^{n, lbar} straight from its definition.

    Composite Gauss quadrature, geometrically graded into each weak
    singularity; a refined pass must agree with the first to ``tol`` or the
    adaptivity budget is declared exceeded.
    """
    _check_alpha(alpha)
    if tol < 1e-11:
        raise ValueError("oracle tolerance below its design accuracy")
    if not (0 <= lbar <= n - 1):
        raise ValueError(f"lag {lbar} out of range for step n={n}")
    if alpha == 1.0 and lbar >= 1:
        return np.zeros((r, r))
    if lbar == 0:
        k = mesh.step(n)
        coarse = _oracle_lag0(alpha, r, k, 12, tol)
        fine = _oracle_lag0(alpha, r, k, 16, tol * 1e-2)
    else:
        ell = n - lbar
        gap0 = float(mesh.levels[n - 1] - mesh.levels[ell])
        coarse = _oracle_lag(alpha, r, mesh.step(n), mesh.step(ell), gap0, 12, tol)
        fine = _oracle_lag(alpha, r, mesh.step(n), mesh.step(ell), gap0, 16, tol * 1e-2)
    delta = np.abs(fine - coarse).max()
    if delta > tol:
        raise RuntimeError(f"oracle failed to converge: refinement delta {delta:.3e}")
    return fine
