"""The multiplier of the holomorphic discrete series and the Mackey group.

The automorphy factor ``a(x, z) = conj(d) - z conj(b)`` never vanishes on the
disc.  Its logarithm is taken on the branch that is continuous in ``z`` and
principal at ``z = 0``::

    L(x, z) = Log conj(d) + log(1 - conj(x·o) z)

(the second term has positive real argument).  With this branch ``ρ_s(x)``
maps holomorphic functions to holomorphic functions, and the chain rule
``a(xy, z) = a(x, z) a(y, x⁻¹·z)`` holds up to an integer winding ``m``:

    L(x, z) + L(y, x⁻¹·z) - L(xy, z) = 2πi m(x, y),    σ(x, y) = exp(2πi s m).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .group import GroupElement, _require_disc, act, inv, mul, origin_image

ROUNDING_TOL = 1e-8
BASE_POINTS = (0.0, 0.3, 0.5j)


class BranchTrackingError(ArithmeticError):
    pass


def automorphy(x: GroupElement, z) -> complex:
    _require_disc(x.n)
    return complex(automorphy_batch(x.M, complex(np.ravel(getattr(z, "z", z))[0])))


def automorphy_batch(x: np.ndarray, z) -> np.ndarray:
    return np.conj(x[..., 1, 1]) - np.asarray(z) * np.conj(x[..., 0, 1])


def log_automorphy(x: np.ndarray, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.log(np.conj(x[..., 1, 1])) + np.log1p(-np.conj(origin_image(x)) * z)


def winding_batch(x: np.ndarray, y: np.ndarray, z0: complex = 0.0):
    """Integer windings ``m(x, y)`` and rounding residuals for batches."""
    xy = mul(x, y)
    w = act(inv(x), z0)
    total = log_automorphy(x, z0) + log_automorphy(y, w) - log_automorphy(xy, z0)
    m_real = total.imag / (2 * np.pi)
    m = np.rint(m_real)
    residual = np.maximum(np.abs(m_real - m), np.abs(total.real) / (2 * np.pi))
    return m.astype(np.int64), residual


def sigma_from_winding(m, s: float) -> np.ndarray:
    # reduce s*m mod 1 first so integer s gives exactly 1
    return np.exp(2j * np.pi * np.mod(s * np.asarray(m, dtype=float), 1.0))


def sigma_batch(x: np.ndarray, y: np.ndarray, s: float, check: bool = False) -> np.ndarray:
    """``σ(x, y)`` for broadcastable batches of elements."""
    m, residual = winding_batch(x, y)
    if check and np.any(residual >= ROUNDING_TOL):
        raise BranchTrackingError(f"winding residual {residual.max():.2e}")
    return sigma_from_winding(m, s)


@dataclass(frozen=True)
class CocycleValue:
    m: int
    sigma: complex
    s: float
    residual: float = 0.0

    def __post_init__(self):
        expected = complex(sigma_from_winding(self.m, self.s))
        if self.sigma != expected:
            raise ValueError("sigma must equal exp(2πi s m)")


def sigma_of(x: GroupElement, y: GroupElement, s: float) -> CocycleValue:
    """Multiplier with z-independence audit over three base points."""
    _require_disc(x.n)
    if s <= x.n:
        raise ValueError(f"s must exceed n = {x.n}")
    ms = []
    worst = 0.0
    for z0 in BASE_POINTS:
        m, res = winding_batch(x.M, y.M, z0)
        ms.append(int(m))
        worst = max(worst, float(res))
    if worst >= ROUNDING_TOL:
        raise BranchTrackingError(f"winding residual {worst:.2e} above {ROUNDING_TOL}")
    if len(set(ms)) != 1:
        raise BranchTrackingError(f"winding depends on the base point: {ms}")
    return CocycleValue(ms[0], complex(sigma_from_winding(ms[0], s)), s, worst)


# ---------------------------------------------------------------------------
# Mackey group G_σ = G × T
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MackeyElement:
    x: GroupElement
    t: complex

    def __post_init__(self):
        if abs(abs(self.t) - 1.0) > 1e-12:
            raise ValueError("torus coordinate must be unimodular")


def mackey_mul(a: MackeyElement, b: MackeyElement, s: float) -> MackeyElement:
    sig = sigma_of(a.x, b.x, s).sigma
    return MackeyElement(a.x @ b.x, np.conj(sig) * a.t * b.t)


def mackey_inv(a: MackeyElement, s: float) -> MackeyElement:
    from .group import invert

    xi = invert(a.x)
    return MackeyElement(xi, sigma_of(a.x, xi, s).sigma * np.conj(a.t))


def mackey_lift_residual(f_values, u, grid, Nt: int, s: float, out_index=None) -> float:
    """Compare the G_σ convolution of ``F(x,t) = t̄ f(x)`` with ``z̄ (f # φ)(x)``.

    ``φ = W_u(u)``.  The left side integrates over grid × torus using the Mackey
    product and inverse; the right side is the twisted convolution on G.
    Returns the maximal deviation relative to ``max |f # φ|``.
    """
    from .representation import wavelet_batch

    if Nt < 8:
        raise ValueError("need at least 8 torus samples")
    f_values = np.asarray(f_values, dtype=complex)
    if out_index is None:
        out_index = np.arange(grid.size)
    xs = grid.elements[out_index]
    ys = grid.elements
    wq = grid.weights
    torus = np.exp(2j * np.pi * (np.arange(Nt) + 0.5) / Nt)

    lhs = np.zeros((len(xs), Nt), dtype=complex)
    rhs = np.zeros(len(xs), dtype=complex)
    yinv = inv(ys)
    sig_y_yinv = sigma_batch(ys, yinv, s)
    for a, x in enumerate(xs):
        g = mul(yinv, x)
        phi = wavelet_batch(u, u, g, s)
        # (y,w)^{-1}(x,z) = (y^{-1}x, conj σ(y^{-1},x) σ(y,y^{-1}) w̄ z)
        twist = np.conj(sigma_batch(yinv, x, s)) * sig_y_yinv
        for l, zt in enumerate(torus):
            acc = 0.0
            for wt in torus:
                tt = twist * np.conj(wt) * zt
                acc = acc + np.sum(wq * np.conj(wt) * f_values * np.conj(tt) * phi) / Nt
            lhs[a, l] = acc
        rhs[a] = np.sum(wq * f_values * phi * np.conj(sigma_batch(ys, g, s)))
    expected = np.conj(torus)[None, :] * rhs[:, None]
    scale = max(np.max(np.abs(rhs)), 1e-300)
    return float(np.max(np.abs(lhs - expected)) / scale)
