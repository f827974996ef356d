"""Local oscillations of the kernel ``φ = W_u(u)`` and the bounds built on them.

Both oscillations reduce to wavelet transforms of difference vectors::

    σ(x,k) φ(xk) − φ(x)          = (u, ρ(x)(ρ(k)u − u))
    σ̄(k,k⁻¹x) φ(k⁻¹x) − φ(x)     = (ρ(k)u − u, ρ(x)u)

so the suprema over a sampled neighbourhood need no cocycle evaluations.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bergman import HoloFunction, hs_weights
from .group import GGrid, LIE_BASIS, exp_coords, inv, mul
from .representation import (
    GFunction,
    lie_derivative,
    rho_coeffs,
    rho_matrix,
    tail_model,
    wavelet_batch,
)

BOX_SAMPLES = 5


def u_box(eps: float, n: int = BOX_SAMPLES, inverse: bool = False) -> np.ndarray:
    """Elements ``exp(t1X1)exp(t2X2)exp(t3X3)`` on an ``n³`` grid of ``[-ε, ε]³``."""
    t = np.linspace(-eps, eps, n)
    T = np.stack(np.meshgrid(t, t, t, indexing="ij"), axis=-1).reshape(-1, 3)
    E = exp_coords(T)
    return inv(E) if inverse else E


def _difference_vectors(u: HoloFunction, s: float, ks: np.ndarray, kmax: int) -> np.ndarray:
    """Columns ``ρ(k)u − u`` truncated at ``kmax``; shape ``(kmax+1, n)``."""
    D = rho_coeffs(s, ks, u, kmax)
    D[:, : u.K + 1] -= u.coeffs
    return D.T


def _kmax_for(eps: float) -> int:
    # ρ(k)u has coefficients ~ |k·o|^j with |k·o| <= tanh(2ε)
    q = np.tanh(2 * eps) + 1e-3
    return int(min(200, max(24, np.ceil(np.log(1e-16) / np.log(q)) + 8)))


@dataclass
class Pairings:
    """Sup over columns ``w`` of ``D`` of ``|(u, ρ(x)w)|`` or ``|(w, ρ(x)u)|``."""

    u: HoloFunction
    s: float
    D: np.ndarray            # (kmax+1, n) coefficient columns

    @property
    def kmax(self) -> int:
        return self.D.shape[0] - 1

    def right(self, x: np.ndarray, chunk: int = 20000) -> np.ndarray:
        uh = self.u.coeffs * hs_weights(self.s, self.u.K)
        out = np.empty(len(x))
        for a in range(0, len(x), chunk):
            R = rho_matrix(self.s, x[a:a + chunk], self.u.K, self.kmax)     # (n, du+1, kmax+1)
            vals = np.einsum("l,nlk->nk", uh, np.conj(R @ self.D))
            out[a:a + chunk] = np.abs(vals).max(axis=1)
        return out

    def left(self, x: np.ndarray, chunk: int = 20000) -> np.ndarray:
        hD = self.D * hs_weights(self.s, self.kmax)[:, None]
        out = np.empty(len(x))
        for a in range(0, len(x), chunk):
            ru = rho_coeffs(self.s, x[a:a + chunk], self.u, self.kmax)      # (n, kmax+1)
            out[a:a + chunk] = np.abs(np.conj(ru) @ hD).max(axis=1)
        return out


class OscillationKernel(Pairings):
    """Evaluator of ``osc^r_V φ`` and ``osc^ℓ_V φ`` for a sampled box ``V``."""

    def __init__(self, u: HoloFunction, s: float, eps: float, inverse: bool = True,
                 n: int = BOX_SAMPLES):
        self.eps, self.inverse = eps, inverse
        ks = u_box(eps, n, inverse)
        super().__init__(u, s, _difference_vectors(u, s, ks, _kmax_for(eps)))

    def __call__(self, side: str, x: np.ndarray) -> np.ndarray:
        if side == "right":
            return self.right(x)
        if side == "left":
            return self.left(x)
        raise ValueError("side must be 'left' or 'right'")


def oscillation(u: HoloFunction, s: float, eps: float, side: str, grid: GGrid,
                inverse: bool = False) -> GFunction:
    """Sampled local oscillation of ``φ = W_u(u)`` at every grid node."""
    if eps == 0:
        return GFunction(np.zeros(grid.size), grid)
    ok = OscillationKernel(u, s, eps, inverse)
    return GFunction(ok(side, grid.elements), grid)


def abs_convolve(F: np.ndarray, grid: GGrid, kernel, xs: np.ndarray, block: int = 400_000) -> np.ndarray:
    """``(|F| * k)(x) = ∫ |F(y)| k(y⁻¹x) dy`` for a positive kernel callable."""
    wf = grid.weights * np.abs(F)
    keep = wf > 0
    yinv = inv(grid.elements[keep])
    wf = wf[keep]
    out = np.empty(len(xs))
    step = max(1, block // len(wf))
    for a in range(0, len(xs), step):
        g = mul(yinv[None], xs[a:a + step, None])
        out[a:a + step] = kernel(g.reshape(-1, 2, 2)).reshape(g.shape[:2]) @ wf
    return out


@dataclass(frozen=True)
class PairTables:
    """Kernel values on all ``y⁻¹x`` pairs of a grid, reused across probes."""

    osc_r: np.ndarray
    osc_l: np.ndarray
    phi_abs: np.ndarray
    grid: GGrid


def pair_tables(u: HoloFunction, s: float, eps: float, grid: GGrid) -> PairTables:
    ok = OscillationKernel(u, s, eps, inverse=True)
    N = grid.size
    g = mul(inv(grid.elements)[:, None], grid.elements[None]).reshape(-1, 2, 2)   # [y, x]
    r = ok.right(g).reshape(N, N)
    l = ok.left(g).reshape(N, N)
    p = np.abs(wavelet_batch(u, u, g, s)).reshape(N, N)
    return PairTables(r, l, p, grid)


@dataclass(frozen=True)
class NodewiseBounds:
    T1: np.ndarray
    T2: np.ndarray
    T3: np.ndarray


def nodewise_bounds(F: np.ndarray, tables: PairTables) -> NodewiseBounds:
    """Right-hand sides of the three pointwise estimates at every grid node."""
    w = tables.grid.weights
    a = w * np.abs(F)
    g1 = a @ tables.osc_r                          # |f| * osc^r
    g2 = a @ tables.osc_l                          # |f| * osc^ℓ
    g3 = (w * g1) @ (tables.phi_abs + tables.osc_l)
    return NodewiseBounds(g1, g2, g3 + g2)


# ---------------------------------------------------------------------------
# derivative majorant
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DerivativeBound:
    C_right: float
    C_left: float
    tail: float

    @property
    def C(self) -> float:
        return max(self.C_right, self.C_left)


def osc_derivative_bound(u: HoloFunction, s: float, eps: float, grid: GGrid | None = None,
                         inverse: bool = True) -> DerivativeBound:
    """``C_ε`` with ``‖f * osc φ‖₂ <= C_ε ‖f‖₂`` by Young's inequality.

    Pointwise, ``osc φ(x) <= ε Σ_k sup_g |W(x, g, k)|`` where the sup runs
    over the sampled neighbourhood and ``W`` pairs ``dρ(X_k)u`` translated
    by ``g`` against ``u``.  ``C_ε`` is the ``L¹(G)`` norm of this majorant,
    with a model tail beyond the grid.
    """
    if eps == 0:
        return DerivativeBound(0.0, 0.0, 0.0)
    if s <= 2:
        raise ValueError("the majorant is integrable only for s > 2")
    if grid is None:
        from .group import haar_grid

        R = float(np.sqrt(-np.expm1(-30.0)))
        grid = haar_grid(R, 48, 16, 2 * u.K + 3)
    gs = u_box(eps, BOX_SAMPLES, inverse)
    kmax = _kmax_for(eps) + u.K + 2
    Mr = np.zeros(grid.size)
    Ml = np.zeros(grid.size)
    for k in range(LIE_BASIS.dim):
        Xu = lie_derivative(u, k, s, kmax=u.K + 1)
        P = Pairings(u, s, rho_coeffs(s, gs, Xu, kmax).T)            # columns ρ(g) X_k u
        Mr += P.right(grid.elements)
        Ml += P.left(grid.elements)
    Mr *= eps
    Ml *= eps
    rate = s / 2.0 - 1.0
    C, tails = [], []
    for M in (Mr, Ml):
        total = float(np.sum(grid.weights * M))
        Nr = grid.counts[0]
        ring = (grid.weights * M).reshape(Nr, -1).sum(axis=1)
        ring_w = grid.weights.reshape(Nr, -1).sum(axis=1)
        dens = ring[-1] / ring_w[-1] * np.exp(grid.radial_u[-1])
        tail = dens * tail_model(rate, 1.0, grid.radial_u[-1])
        C.append(total + tail)
        tails.append(tail / (total + tail))
    return DerivativeBound(C[0], C[1], float(max(tails)))
