"""Twisted translations and twisted convolution on quadrature grids.

The convolution ``f#g(x) = ∫ f(y) g(y⁻¹x) σ̄(y, y⁻¹x) dy`` is written against
a small group protocol so the same code serves SU(1,1) and the reduced
Heisenberg group used for Gabor checks.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

from .bergman import HoloFunction, hs_norm
from .cocycle import sigma_batch
from .group import GGrid, GroupElement, inv, mul, origin_image
from .representation import Functional, GFunction, g_lp_norm, rho_coeffs, wavelet_batch

log = logging.getLogger(__name__)


class InterpolationError(ValueError):
    pass


class ApproximationWarning(UserWarning):
    pass


class Group(Protocol):
    def mul(self, x: np.ndarray, y: np.ndarray) -> np.ndarray: ...
    def inv(self, x: np.ndarray) -> np.ndarray: ...
    def sigma(self, x: np.ndarray, y: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class SU11Group:
    s: float

    def mul(self, x, y):
        return mul(x, y)

    def inv(self, x):
        return inv(x)

    def sigma(self, x, y):
        return sigma_batch(x, y, self.s)


@dataclass(frozen=True)
class UntwistedSU11(SU11Group):
    """Same group, trivial multiplier."""

    def sigma(self, x, y):
        return np.ones(np.broadcast_shapes(x.shape[:-2], y.shape[:-2]), dtype=complex)


def convolve_nodes(group: Group, ys: np.ndarray, weights: np.ndarray, f_vals: np.ndarray,
                   g_eval: Callable[[np.ndarray], np.ndarray], xs: np.ndarray,
                   block: int = 200_000) -> np.ndarray:
    """Quadrature sum ``Σ_q w_q f(y_q) g(y_q⁻¹x) σ̄(y_q, y_q⁻¹x)`` per output ``x``."""
    yinv = group.inv(ys)
    wf = weights * f_vals
    keep = wf != 0
    yinv, ys_k, wf = yinv[keep], ys[keep], wf[keep]
    nq = len(wf)
    out = np.empty(len(xs), dtype=complex)
    step = max(1, block // max(nq, 1))
    for i in range(0, len(xs), step):
        xb = xs[i:i + step]
        g = group.mul(yinv[None], xb[:, None])  # (b, nq, ...)
        flat = g.reshape((-1,) + g.shape[2:])
        gv = g_eval(flat).reshape(len(xb), nq)
        sg = group.sigma(np.broadcast_to(ys_k[None], g.shape).reshape(flat.shape), flat).reshape(len(xb), nq)
        out[i:i + step] = (gv * np.conj(sg)) @ wf
    return out


# ---------------------------------------------------------------------------
# SU(1,1) grid functions
# ---------------------------------------------------------------------------

def _nearest_node(grid: GGrid, x: np.ndarray) -> np.ndarray:
    """Index of the grid node closest in (u, φ, θ) to each element."""
    Nr, Nt, Nk = grid.counts
    z = origin_image(x)
    r2 = np.abs(z) ** 2
    if np.any(r2 > grid.R ** 2 * (1 + 1e-12)):
        raise InterpolationError("point lies beyond the grid radius")
    u = -np.log1p(-r2)
    iu = np.abs(u[:, None] - grid.radial_u[None, :]).argmin(axis=1)
    phi0 = np.angle(grid.z[0])
    it = np.rint((np.angle(z) - phi0) * Nt / (2 * np.pi)).astype(int) % Nt
    # a section t_z r_θ has d = (1-|z|²)^{-1/2} e^{-iθ}
    theta = np.mod(-np.angle(x[..., 1, 1]), 2 * np.pi)
    ik = np.rint(theta * Nk / (2 * np.pi)).astype(int) % Nk
    return (iu * Nt + it) * Nk + ik


def evaluator(f: GFunction) -> Callable[[np.ndarray], np.ndarray]:
    """Closed form for wavelet transforms, nearest node with a warning otherwise."""
    if f.source is not None:
        return f.evaluate
    warnings.warn("generic GFunction: nearest-node interpolation, reduced accuracy",
                  ApproximationWarning, stacklevel=3)

    def ev(x):
        z2 = np.abs(origin_image(x)) ** 2
        out = np.zeros(len(x), dtype=complex)
        inside = z2 <= f.grid.R ** 2
        if np.any(inside):
            out[inside] = f.values[_nearest_node(f.grid, x[inside])]
        return out

    return ev


def twisted_translate(side: str, y: GroupElement, f: GFunction) -> GFunction:
    """``ℓ^σ_y f(x) = σ̄(y, y⁻¹x) f(y⁻¹x)`` or ``r^σ_y f(x) = σ(x, y) f(xy)``."""
    if f.source is None:
        raise InterpolationError("twisted translation needs a wavelet-type GFunction")
    s = f.source[2]
    xs = f.grid.elements
    Y = np.broadcast_to(y.M, xs.shape)
    if side == "left":
        g = mul(inv(y.M)[None], xs)
        vals = np.conj(sigma_batch(Y, g, s)) * f.evaluate(g)
    elif side == "right":
        g = mul(xs, y.M[None])
        vals = sigma_batch(xs, Y, s) * f.evaluate(g)
    else:
        raise ValueError("side must be 'left' or 'right'")
    return GFunction(vals, f.grid, f.t)


def twisted_convolve(f: GFunction, g: GFunction, out_index=None, untwisted: bool = False) -> GFunction | np.ndarray:
    """``f # g`` on the grid of ``f``.  With ``out_index`` only those nodes are
    computed and a plain array is returned."""
    s = g.source[2] if g.source is not None else (f.source[2] if f.source is not None else None)
    if s is None and not untwisted:
        raise ValueError("cannot infer s; pass wavelet-type functions")
    group = UntwistedSU11(s or 3.0) if untwisted else SU11Group(s)
    grid = f.grid
    xs = grid.elements if out_index is None else grid.elements[out_index]
    vals = convolve_nodes(group, grid.elements, grid.weights, f.values, evaluator(g), xs)
    if out_index is not None:
        return vals
    return GFunction(vals, grid, f.t)


@dataclass
class Kernel:
    phi: GFunction
    u: HoloFunction
    s: float
    analyzing: bool = False

    def __post_init__(self):
        e = np.eye(2, dtype=complex)
        val = complex(wavelet_batch(self.u, self.u, e, self.s)[0])
        if abs(val - hs_norm(self.u, self.s) ** 2) > 1e-10 * max(1.0, abs(val)):
            raise ValueError("kernel does not satisfy φ(e) = ‖u‖²")


def make_kernel(u: HoloFunction, s: float, grid: GGrid, analyzing: bool = False) -> Kernel:
    return Kernel(GFunction.from_wavelet(u, u, s, grid), u, s, analyzing)


def synthesis_vector(f: GFunction, u: HoloFunction, s: float, kmax: int, chunk: int = 20000) -> HoloFunction:
    """``∫ f(y) ρ_s(y)u dy`` by grid quadrature, truncated at degree ``kmax``."""
    grid = f.grid
    wf = grid.weights * f.values
    acc = np.zeros(kmax + 1, dtype=complex)
    for i in range(0, grid.size, chunk):
        acc += wf[i:i + chunk] @ rho_coeffs(s, grid.elements[i:i + chunk], u, kmax)
    return HoloFunction(acc)


def convolve_kernel(f: GFunction, u: HoloFunction, s: float, kmax: int) -> GFunction:
    """``f # W_u(u)`` through ``(f # W_u(u))(x) = (∫ f(y)ρ(y)u dy, ρ(x)u)``.

    The integrand on the right is smooth on the disc, unlike ``y ↦ φ(y⁻¹x)``
    for ``x`` near the boundary, so one grid serves every output node.
    """
    vec = synthesis_vector(f, u, s, kmax)
    return GFunction.from_wavelet(u, vec, s, f.grid, f.t)


def reproducing_residual(u: HoloFunction, v, s: float, grid: GGrid, kmax: int | None = None) -> float:
    """``‖W_u(v)#W_u(u) − W_u(v)‖₂ / ‖W_u(v)‖₂`` on the grid."""
    vec = v.vec if isinstance(v, Functional) else v
    kmax = kmax if kmax is not None else vec.K + 8
    W = GFunction.from_wavelet(u, vec, s, grid)
    conv = convolve_kernel(W, u, s, kmax)
    diff = GFunction(conv.values - W.values, grid)
    return g_lp_norm(diff, 2.0, 0.0) / g_lp_norm(W, 2.0, 0.0)


def coorbit_norm(lam, u: HoloFunction, p: float, t: float, grid: GGrid, s: float) -> float:
    vec = lam.vec if isinstance(lam, Functional) else lam
    if not np.any(vec.coeffs):
        return 0.0
    return g_lp_norm(GFunction.from_wavelet(u, vec, s, grid), p, t)
