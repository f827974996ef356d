"""The projective discrete series ``ρ_s`` and twisted wavelet transforms.

``ρ_s(x) f(z) = a(x, z)^{-s} f(x⁻¹·z)`` with the automorphy branch from
:mod:`coorbit.cocycle`.  On monomials::

    ρ_s(x) z^j = a(x, z)^{-(s+j)} (Ā z - c̄)^j,

and the Taylor coefficients of the right-hand side follow from a short
recurrence.  This coefficient route is exact up to the truncation degree and
is the default; the pointwise route (evaluate, then project) is kept as an
independent cross-check.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .bergman import (
    DEFAULT_K,
    HoloFunction,
    ParameterError,
    ball_quadrature,
    bergman_project,
    hs_inner,
    hs_norm,
    hs_weights,
)
from .cocycle import log_automorphy, sigma_batch
from .group import GGrid, GroupElement, LIE_BASIS, act, exp_coords, inv, mul, origin_image

log = logging.getLogger(__name__)

REPROJECTION_TOL = 1e-6
TAIL_TOL = 1e-4


class TruncationWarning(UserWarning):
    pass


class InsufficientTruncationError(ArithmeticError):
    pass


def _as_batch(x) -> np.ndarray:
    M = x.M if isinstance(x, GroupElement) else np.asarray(x, dtype=complex)
    return M[None] if M.ndim == 2 else M


def rho_matrix(s: float, x, kmax: int, jmax: int) -> np.ndarray:
    """Coefficient matrices ``R[..., k, j]`` with ``ρ_s(x) z^j = Σ_k R[k, j] z^k``.

    Output shape is ``(N, kmax+1, jmax+1)`` for a batch of ``N`` elements.
    """
    X = _as_batch(x)
    A, b, c, d = X[:, 0, 0], X[:, 0, 1], X[:, 1, 0], X[:, 1, 1]
    db, q = np.conj(d), np.conj(b) / np.conj(d)
    N = X.shape[0]
    R = np.zeros((N, kmax + 1, jmax + 1), dtype=complex)
    # column 0: d̄^{-s} (1 - q z)^{-s} by the binomial series
    col = np.empty((N, kmax + 1), dtype=complex)
    col[:, 0] = np.exp(-s * np.log(db))
    for k in range(1, kmax + 1):
        col[:, k] = col[:, k - 1] * q * ((s + k - 1) / k)
    R[:, :, 0] = col
    Ab, cb = np.conj(A)[:, None], np.conj(c)[:, None]
    bb, dbb = np.conj(b), db
    for j in range(1, jmax + 1):
        # multiply by (Ā z - c̄), then divide by (d̄ - b̄ z)
        num = -cb * col
        num[:, 1:] += Ab * col[:, :-1]
        nxt = np.empty_like(col)
        nxt[:, 0] = num[:, 0] / dbb
        for k in range(1, kmax + 1):
            nxt[:, k] = (num[:, k] + bb * nxt[:, k - 1]) / dbb
        col = nxt
        R[:, :, j] = col
    return R


def rho_coeffs(s: float, x, u: HoloFunction, kmax: int) -> np.ndarray:
    """Coefficients of ``ρ_s(x)u`` truncated at ``kmax``; shape ``(N, kmax+1)``."""
    R = rho_matrix(s, x, kmax, u.K)
    return R @ u.coeffs


def rho_eval(s: float, x: GroupElement, u: HoloFunction, z) -> np.ndarray:
    """Pointwise values of ``ρ_s(x)u`` on disc points ``z``."""
    M = x.M
    return np.exp(-s * log_automorphy(M, z)) * u(act(inv(M), z))


def rho_apply(s: float, x: GroupElement, u: HoloFunction, kmax: int | None = None,
              method: str = "series") -> HoloFunction:
    if s <= 1:
        raise ParameterError(f"need s > 1, got s = {s}")
    if kmax is None:
        kmax = max(u.K, DEFAULT_K)
    if method == "series":
        return HoloFunction(rho_coeffs(s, x, u, kmax)[0])
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    alpha = s - 2.0
    quad = ball_quadrature(alpha, max(64, kmax + 16), max(128, 2 * kmax + 16))
    out, resid = bergman_project(rho_eval(s, x, u, quad.nodes), alpha, kmax, quad, with_residual=True)
    if resid > REPROJECTION_TOL:
        warnings.warn(f"reprojection residual {resid:.2e} exceeds {REPROJECTION_TOL:g}",
                      TruncationWarning, stacklevel=2)
    return out


@dataclass(frozen=True)
class Functional:
    """A truncated element of the dual, paired sesquilinearly in ``H_s``."""

    vec: HoloFunction
    growth: float = 0.0

    @property
    def K(self) -> int:
        return self.vec.K

    def pair(self, v: HoloFunction, s: float) -> complex:
        return hs_inner(self.vec, v, s)


def rho_star_apply(s: float, x: GroupElement, lam: Functional, kmax: int | None = None) -> Functional:
    # unitary in the truncated Hilbert setting: ρ*(x) = ρ(x)
    return Functional(rho_apply(s, x, lam.vec, kmax if kmax is not None else lam.K), lam.growth)


def rho_inverse_apply(s: float, x: GroupElement, v: HoloFunction, kmax: int | None = None) -> HoloFunction:
    """``ρ(x)⁻¹ v = σ(x, x⁻¹) ρ(x⁻¹) v``."""
    xi = inv(x.M)
    sig = sigma_batch(x.M, xi, s)
    return rho_apply(s, GroupElement(xi), v, kmax).scaled(complex(sig))


# ---------------------------------------------------------------------------
# wavelet transforms
# ---------------------------------------------------------------------------

def _vec(v) -> HoloFunction:
    return v.vec if isinstance(v, Functional) else v


def wavelet_batch(u: HoloFunction, v, x, s: float, chunk: int = 20000) -> np.ndarray:
    """``W_u(v)(x) = (v, ρ_s(x)u)`` for a batch of elements.

    Only coefficients up to the degree of ``v`` enter the pairing, so the
    result is exact for polynomial ``u`` and ``v``.
    """
    v = _vec(v)
    X = _as_batch(x)
    hv = np.conj(v.coeffs * hs_weights(s, v.K))
    out = np.empty(X.shape[0], dtype=complex)
    for i in range(0, X.shape[0], chunk):
        ru = rho_coeffs(s, X[i:i + chunk], u, v.K)
        out[i:i + chunk] = np.conj(ru @ hv)
    return out


def wavelet(u: HoloFunction, v, points, s: float) -> np.ndarray:
    if not np.any(u.coeffs):
        raise ValueError("analyzing vector must be nonzero")
    if isinstance(points, GroupElement):
        return wavelet_batch(u, v, points.M, s)
    if isinstance(points, (list, tuple)):
        return wavelet_batch(u, v, np.stack([p.M for p in points]), s)
    return wavelet_batch(u, v, points, s)


def lie_derivative(u: HoloFunction, k: int, s: float, h: float = 1e-5, kmax: int | None = None) -> HoloFunction:
    """``dρ(X_k) u`` by a central difference of ``t ↦ ρ(exp t X_k) u``."""
    t = np.zeros((2, 3))
    t[0, k], t[1, k] = h, -h
    kmax = kmax if kmax is not None else u.K + 8
    c = rho_coeffs(s, exp_coords(t), u, kmax)
    return HoloFunction((c[0] - c[1]) / (2 * h))


# ---------------------------------------------------------------------------
# functions on G
# ---------------------------------------------------------------------------

@dataclass
class GFunction:
    values: np.ndarray
    grid: GGrid
    t: float = 0.0
    source: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.grid.size,):
            raise ValueError("values must live on the grid nodes")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("GFunction values must be finite")

    @classmethod
    def from_wavelet(cls, u: HoloFunction, v, s: float, grid: GGrid, t: float = 0.0) -> "GFunction":
        return cls(wavelet_batch(u, v, grid.elements, s), grid, t, source=(u, _vec(v), s))

    def evaluate(self, x) -> np.ndarray:
        """Exact values at arbitrary elements; only for wavelet transforms."""
        if self.source is None:
            raise TypeError("off-grid evaluation needs a closed-form source")
        u, v, s = self.source
        return wavelet_batch(u, v, x, s)


@dataclass(frozen=True)
class NormReport:
    value: float
    tail: float


def _radial_density(grid: GGrid, integrand: np.ndarray) -> np.ndarray:
    Nr, Nt, Nk = grid.counts
    per_ring = integrand.reshape(Nr, Nt * Nk).sum(axis=1)
    ring_w = grid.weights.reshape(Nr, Nt * Nk).sum(axis=1)
    # density in u: Σ w_q F_q over the ring divided by the GL weight (e^u du)
    return per_ring, ring_w


def tail_model(rate: float, power: float, u0: float) -> float:
    """``∫_{u0}^∞ e^{-rate (u-u0)} ((1+u)/(1+u0))^power du``."""
    if rate <= 0:
        return math.inf
    val, _ = integrate.quad(lambda u: np.exp(-rate * (u - u0)) * ((1 + u) / (1 + u0)) ** power, u0, np.inf)
    return float(val)


def g_lp_report(F: GFunction, p: float, t: float | None = None, rate: float | None = None,
                power: float = 0.0) -> NormReport:
    """Weighted ``L^p_t(G)`` norm with a model-based truncation tail.

    ``rate`` is the exponential decay rate in ``u = -log(1-|x·o|²)`` of the
    radial density, when known; otherwise it is read off the last two rings.
    """
    if p < 1:
        raise ParameterError(f"need p >= 1, got p = {p}")
    t = F.t if t is None else t
    grid = F.grid
    integrand = grid.weights * np.abs(F.values) ** p * grid.one_minus_r2() ** t
    total = float(integrand.sum())
    per_ring, ring_w = _radial_density(grid, integrand)
    dens = per_ring / ring_w * np.exp(grid.radial_u)  # density per unit u
    u = grid.radial_u
    if rate is None:
        if dens[-1] > 0 and dens[-2] > 0:
            rate = float(np.log(dens[-2] / dens[-1]) / (u[-1] - u[-2]))
        else:
            rate = math.inf
    tail_abs = 0.0 if dens[-1] == 0 else dens[-1] * tail_model(rate, power, u[-1])
    # the last node sits slightly inside u_max; the model starts there
    value = total ** (1.0 / p)
    tail = tail_abs / total if total > 0 else 0.0
    return NormReport(value, float(tail))


def g_lp_norm(F: GFunction, p: float, t: float | None = None) -> float:
    if p < 1:
        raise ParameterError(f"need p >= 1, got p = {p}")
    t = F.t if t is None else t
    w = F.grid.weights * F.grid.one_minus_r2() ** t
    return float(np.sum(w * np.abs(F.values) ** p) ** (1.0 / p))


def wavelet_decay_rate(s: float, p: float, t: float) -> float:
    """Decay rate in ``u`` of the radial density of ``|W_u(v)|^p v_t``."""
    return p * s / 2.0 + t - 1.0


def radius_for_tail(s: float, p: float, t: float, tol: float, log_power: float | None = None) -> float:
    """Smallest ``R`` whose model tail ``∫_{u_R}^∞ e^{-λu}(1+u)^p du`` is below ``tol``
    relative to the mass of the model density on ``[0, ∞)``."""
    lam = wavelet_decay_rate(s, p, t)
    if lam <= 0:
        raise ParameterError(f"not integrable: t + ps/2 = {t + p * s / 2:g} <= 1")
    k = p if log_power is None else log_power
    f = lambda u: np.exp(-lam * u) * (1 + u) ** k
    total, _ = integrate.quad(f, 0, np.inf)
    lo, hi = 0.0, 1.0
    while integrate.quad(f, hi, np.inf)[0] > tol * total:
        lo, hi = hi, 2 * hi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if integrate.quad(f, mid, np.inf)[0] > tol * total:
            lo = mid
        else:
            hi = mid
    return float(np.sqrt(-np.expm1(-hi)))


@dataclass(frozen=True)
class Calibration:
    c2: float
    u_normalized: HoloFunction
    tail: float


def calibrate_analyzing(u: HoloFunction, s: float, grid: GGrid) -> Calibration:
    """Formal-dimension estimate ``c² = ∫|W_u(u)|² dx / ‖u‖⁴``."""
    nu = hs_norm(u, s)
    if nu == 0:
        raise ValueError("analyzing vector must be nonzero")
    F = GFunction.from_wavelet(u, u, s, grid)
    rep = g_lp_report(F, 2.0, 0.0, rate=wavelet_decay_rate(s, 2.0, 0.0), power=2.0)
    if rep.tail > TAIL_TOL:
        raise InsufficientTruncationError(f"grid tail {rep.tail:.2e} exceeds {TAIL_TOL:g}; enlarge R")
    c2 = rep.value ** 2 / nu ** 4
    return Calibration(float(c2), u.scaled(1.0 / (math.sqrt(c2) * nu)), rep.tail)


def formal_dimension(s: float) -> float:
    """``1/c²`` in the Haar normalisation of :mod:`coorbit.group`."""
    return s - 1.0


@dataclass(frozen=True)
class IntegrabilityReport:
    values: tuple
    radii: tuple
    convergent: bool
    predicted: bool


def integrability_check(u: HoloFunction, v, p: float, t: float, grids, s: float,
                        rel_tol: float = 1e-3) -> IntegrabilityReport:
    """Norms on grids of increasing radius; convergent when the last two agree."""
    grids = sorted(grids, key=lambda g: g.R)
    vals = tuple(g_lp_norm(GFunction.from_wavelet(u, v, s, g), p, t) for g in grids)
    conv = bool(abs(vals[-1] - vals[-2]) < rel_tol * abs(vals[-1]))
    return IntegrabilityReport(vals, tuple(g.R for g in grids), conv, t + p * s / 2.0 > 1.0)
