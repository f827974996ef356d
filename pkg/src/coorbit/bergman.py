"""Weighted Bergman spaces on the unit disc.

Functions are stored by Taylor coefficients.  The measure
``dv_α = (α+1)(1-|z|²)^α dA/π`` is a probability measure and the monomials
are orthogonal with ``‖z^k‖² = k! Γ(α+2) / Γ(k+α+2)``.  The Hilbert space
``H_s`` of the representation is ``A²_α`` with ``α = s - 2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, roots_jacobi

from .group import _require_disc

DEFAULT_K = 32
DEFAULT_NR = 64
DEFAULT_NTHETA = 128


class ParameterError(ValueError):
    """A parameter lies outside the admissible range."""


@dataclass(frozen=True)
class HoloFunction:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a non-empty vector")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @property
    def K(self) -> int:
        return self.coeffs.size - 1

    @classmethod
    def monomial(cls, k: int, K: int | None = None, scale: complex = 1.0) -> "HoloFunction":
        c = np.zeros((K if K is not None else k) + 1, dtype=complex)
        c[k] = scale
        return cls(c)

    def __call__(self, z):
        # Horner from the top coefficient
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for c in self.coeffs[::-1]:
            out = out * z + c
        return out

    def padded(self, K: int) -> "HoloFunction":
        if K < self.K:
            return HoloFunction(self.coeffs[: K + 1])
        return HoloFunction(np.concatenate([self.coeffs, np.zeros(K - self.K, dtype=complex)]))

    def __add__(self, other: "HoloFunction") -> "HoloFunction":
        K = max(self.K, other.K)
        return HoloFunction(self.padded(K).coeffs + other.padded(K).coeffs)

    def __sub__(self, other: "HoloFunction") -> "HoloFunction":
        return self + other.scaled(-1.0)

    def scaled(self, a: complex) -> "HoloFunction":
        return HoloFunction(a * self.coeffs)

    def is_smooth_vector(self, s: float, N: int = 8) -> bool:
        """Coefficient decay test ``‖v_k‖ ≤ C (1+k)^{-N}``.

        ``C`` is fitted on the lower half of the populated range; the flag is
        set when the upper half stays under the fitted envelope.
        """
        a = np.abs(self.coeffs) * np.sqrt(hs_weights(s, self.K))
        env = a * (1.0 + np.arange(self.K + 1)) ** N
        half = self.K // 2 + 1
        C = env[:half].max()
        return bool(np.all(env[half:] <= C * (1 + 1e-12)))


@dataclass(frozen=True)
class BergmanParams:
    p: float
    alpha: float
    s: float
    n: int = 1


def validate_params(params: BergmanParams) -> BergmanParams:
    _require_disc(params.n)
    n, p, a, s = params.n, params.p, params.alpha, params.s
    if not p >= 1:
        raise ParameterError(f"need p >= 1, got p = {p}")
    if not s > n:
        raise ParameterError(f"need s > n, got s = {s} <= {n}")
    if not a > -1:
        raise ParameterError(f"need alpha > -1, got alpha = {a}")
    upper = p * (s - n) - 1
    if not a < upper:
        raise ParameterError(f"need alpha < p(s-n)-1 = {upper:g}, got alpha = {a}")
    return params


def hs_weights(s: float, K: int) -> np.ndarray:
    """Squared monomial norms ``k! Γ(s) / Γ(s+k)`` for ``k = 0..K``."""
    if s <= 1:
        raise ParameterError(f"need s > 1, got s = {s}")
    k = np.arange(K + 1)
    return np.exp(gammaln(k + 1) + gammaln(s) - gammaln(s + k))


def alpha_weights(alpha: float, K: int) -> np.ndarray:
    return hs_weights(alpha + 2.0, K)


def _pad_pair(f: HoloFunction, g: HoloFunction):
    K = max(f.K, g.K)
    return f.padded(K).coeffs, g.padded(K).coeffs, K


def hs_inner(f: HoloFunction, g: HoloFunction, s: float) -> complex:
    a, b, K = _pad_pair(f, g)
    return complex(np.sum(a * np.conj(b) * hs_weights(s, K)))


def hs_norm(f: HoloFunction, s: float) -> float:
    return float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2 * hs_weights(s, f.K))))


@dataclass(frozen=True)
class DiscQuadrature:
    nodes: np.ndarray
    weights: np.ndarray
    alpha: float
    Nr: int = field(default=0)
    Ntheta: int = field(default=0)

    def integrate(self, values) -> complex:
        return complex(np.sum(self.weights * np.asarray(values)))


def ball_quadrature(alpha: float, Nr: int = DEFAULT_NR, Ntheta: int = DEFAULT_NTHETA) -> DiscQuadrature:
    """Gauss–Jacobi in ``r²`` times the trapezoid rule in angle.

    Exact for ``z^j z̄^k`` whenever ``|j-k| < Ntheta`` and ``j+k ≤ 4 Nr - 2``.
    """
    if not alpha > -1:
        raise ParameterError(f"need alpha > -1, got alpha = {alpha}")
    x, w = roots_jacobi(Nr, alpha, 0.0)
    rho = (x + 1.0) / 2.0
    wr = (alpha + 1.0) * w / 2.0 ** (alpha + 1.0)
    phi = 2 * np.pi * np.arange(Ntheta) / Ntheta
    z = np.sqrt(rho)[:, None] * np.exp(1j * phi)[None, :]
    weights = np.repeat(wr[:, None] / Ntheta, Ntheta, axis=1)
    return DiscQuadrature(z.ravel(), weights.ravel(), float(alpha), Nr, Ntheta)


def lp_alpha_norm(f: HoloFunction, p: float, alpha: float, quad: DiscQuadrature | None = None) -> float:
    if p < 1:
        raise ParameterError(f"need p >= 1, got p = {p}")
    if quad is None or quad.alpha != alpha:
        quad = ball_quadrature(alpha, max(DEFAULT_NR, f.K + 8), max(DEFAULT_NTHETA, 2 * f.K + 8))
    vals = np.abs(f(quad.nodes)) ** p
    return float(np.sum(quad.weights * vals) ** (1.0 / p))


def kernel_eval(alpha: float, z, w):
    """Reproducing kernel ``(1 - z w̄)^{-(2+α)}`` on the principal branch."""
    z = complex(np.ravel(getattr(z, "z", z))[0]) if hasattr(z, "z") else np.asarray(z, dtype=complex)
    w = complex(np.ravel(getattr(w, "z", w))[0]) if hasattr(w, "z") else np.asarray(w, dtype=complex)
    val = np.exp(-(2.0 + alpha) * np.log(1.0 - z * np.conj(w)))
    return complex(val) if np.ndim(val) == 0 else val


def kernel_function(alpha: float, w: complex, K: int) -> HoloFunction:
    """Taylor truncation of ``z ↦ K_α(z, w)``."""
    k = np.arange(K + 1)
    return HoloFunction(np.conj(w) ** k / alpha_weights(alpha, K))


def bergman_project(f, alpha: float, K: int = DEFAULT_K, quad: DiscQuadrature | None = None,
                    with_residual: bool = False):
    """Orthogonal projection onto holomorphic polynomials of degree ≤ K.

    ``f`` is either a callable on the disc or its values on the nodes of
    ``quad``.  With ``with_residual`` the relative L²_α distance between
    ``f`` and its projection is also returned.
    """
    if quad is None:
        quad = ball_quadrature(alpha)
    z = quad.nodes
    vals = f(z) if callable(f) else np.asarray(f, dtype=complex)
    if vals.shape != z.shape:
        raise ValueError("sampled values do not match the quadrature nodes")
    powers = np.conj(z)[None, :] ** np.arange(K + 1)[:, None]
    moments = powers @ (quad.weights * vals)
    out = HoloFunction(moments / alpha_weights(alpha, K))
    if not with_residual:
        return out
    total = np.sum(quad.weights * np.abs(vals) ** 2)
    resid = np.sum(quad.weights * np.abs(vals - out(z)) ** 2)
    return out, float(np.sqrt(max(resid, 0.0) / max(total, 1e-300)))
