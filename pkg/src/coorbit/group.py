"""Arithmetic, geometry and quadrature for G = SU(n,1).

Elements are stored as complex ``(n+1, n+1)`` matrices in block form
``[[A, b], [c^t, d]]``.  The data model accepts any ``n``; the numeric
engine (batched products, Möbius action, sections, Lie coordinates, Haar
grids) is implemented for the disc, ``n = 1``, where a batch of elements is a
complex array of shape ``(..., 2, 2)``.

Haar measure is normalised so that for right-K-invariant ``F``::

    ∫_G F(x) dx = ∫_D F(z) (1 - |z|^2)^{-2} dv(z)

with ``dv`` the normalised area measure on the unit disc (``dv(D) = 1``) and
the Haar measure on ``K`` a probability measure.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ALGEBRAIC_TOL = 1e-12
ACTION_TOL = 1e-10


class UnsupportedDimensionError(NotImplementedError):
    """Raised when the numeric engine is asked for n >= 2."""


class NumericDriftError(ArithmeticError):
    """A group invariant drifted beyond tolerance."""


class DegenerateInputError(ArithmeticError):
    pass


def _require_disc(n: int) -> None:
    if n != 1:
        raise UnsupportedDimensionError(
            f"numeric engine supports n = 1 only (got n = {n})"
        )


def j_form(n: int) -> np.ndarray:
    return np.diag(np.r_[-np.ones(n), 1.0]).astype(complex)


def invariant_defects(M: np.ndarray) -> tuple[float, float, float]:
    """Return (|det M - 1|, max|M* J M - J|, ||d|^2 - |b|^2 - 1|)."""
    M = np.asarray(M, dtype=complex)
    n = M.shape[-1] - 1
    J = j_form(n)
    det_err = float(np.max(np.abs(np.linalg.det(M) - 1.0)))
    herm = np.swapaxes(M.conj(), -1, -2) @ J @ M
    j_err = float(np.max(np.abs(herm - J)))
    b = M[..., :n, n]
    d = M[..., n, n]
    bd_err = float(np.max(np.abs(np.abs(d) ** 2 - np.sum(np.abs(b) ** 2, axis=-1) - 1.0)))
    return det_err, j_err, bd_err


def check_invariants(M: np.ndarray, tol: float = ALGEBRAIC_TOL) -> None:
    M = np.asarray(M)
    # tolerance scales with matrix size: products of far-out elements lose digits
    scale = max(1.0, float(np.max(np.abs(M))) ** 2)
    errs = invariant_defects(M)
    if max(errs) > tol * scale:
        raise NumericDriftError(
            f"SU(n,1) invariants violated: det {errs[0]:.2e}, "
            f"J-unitarity {errs[1]:.2e}, |d|^2-|b|^2 {errs[2]:.2e}"
        )


@dataclass(frozen=True)
class GroupElement:
    """A single element of SU(n,1) in block form."""

    M: np.ndarray
    n: int = 1

    def __post_init__(self):
        M = np.array(self.M, dtype=complex)
        if M.shape != (self.n + 1, self.n + 1):
            raise ValueError(f"expected a {(self.n + 1, self.n + 1)} matrix, got {M.shape}")
        check_invariants(M)
        M.setflags(write=False)
        object.__setattr__(self, "M", M)

    @property
    def A(self) -> np.ndarray:
        return self.M[: self.n, : self.n]

    @property
    def b(self) -> np.ndarray:
        return self.M[: self.n, self.n]

    @property
    def c(self) -> np.ndarray:
        return self.M[self.n, : self.n]

    @property
    def d(self) -> complex:
        return complex(self.M[self.n, self.n])

    @classmethod
    def identity(cls, n: int = 1) -> "GroupElement":
        return cls(np.eye(n + 1, dtype=complex), n)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return compose(self, other)


@dataclass(frozen=True)
class BallPoint:
    z: np.ndarray

    def __post_init__(self):
        z = np.atleast_1d(np.asarray(self.z, dtype=complex))
        if np.linalg.norm(z) >= 1.0:
            raise ValueError(f"point {z} is not in the open unit ball")
        object.__setattr__(self, "z", z)

    @property
    def n(self) -> int:
        return self.z.shape[0]

    def __complex__(self) -> complex:
        return complex(self.z[0])


def _as_matrix(x) -> np.ndarray:
    return x.M if isinstance(x, GroupElement) else np.asarray(x, dtype=complex)


def _as_z(z) -> complex | np.ndarray:
    if isinstance(z, BallPoint):
        return complex(z)
    return np.asarray(z, dtype=complex)


def compose(x: GroupElement, y: GroupElement) -> GroupElement:
    if x.n != y.n:
        raise ValueError("elements of different SU(n,1)")
    return GroupElement(x.M @ y.M, x.n)


def invert(x: GroupElement) -> GroupElement:
    n = x.n
    inv = np.empty_like(x.M)
    inv[:n, :n] = x.A.conj().T
    inv[:n, n] = -x.c.conj()
    inv[n, :n] = -x.b.conj()
    inv[n, n] = np.conj(x.d)
    return GroupElement(inv, n)


# ---------------------------------------------------------------------------
# batched n = 1 engine
# ---------------------------------------------------------------------------

def mul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.matmul(x, y)


def inv(x: np.ndarray) -> np.ndarray:
    """Inverse of a batch of SU(1,1) matrices via the block formula."""
    out = np.empty(np.broadcast_shapes(np.shape(x)), dtype=complex)
    out[..., 0, 0] = np.conj(x[..., 0, 0])
    out[..., 0, 1] = -np.conj(x[..., 1, 0])
    out[..., 1, 0] = -np.conj(x[..., 0, 1])
    out[..., 1, 1] = np.conj(x[..., 1, 1])
    return out


def inv_mul(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Batched ``y^{-1} x``."""
    return np.matmul(inv(y), x)


def act(x: np.ndarray, z) -> np.ndarray:
    """Batched Möbius action ``x·z = (A z + b)/(c z + d)``."""
    z = np.asarray(z, dtype=complex)
    den = x[..., 1, 0] * z + x[..., 1, 1]
    if np.any(np.abs(den) < 1e-14):
        raise DegenerateInputError("Möbius denominator vanished")
    return (x[..., 0, 0] * z + x[..., 0, 1]) / den


def origin_image(x: np.ndarray) -> np.ndarray:
    """``x·o = b/d``."""
    return x[..., 0, 1] / x[..., 1, 1]


def mobius(x: GroupElement, z) -> BallPoint:
    _require_disc(x.n)
    w = act(x.M, _as_z(z))
    return BallPoint(np.atleast_1d(w))


def rotations(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    out = np.zeros(theta.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = np.exp(1j * theta)
    out[..., 1, 1] = np.exp(-1j * theta)
    return out


def transvections(w) -> np.ndarray:
    """Positive transvections t_w with t_w·0 = w."""
    w = np.asarray(w, dtype=complex)
    if np.any(np.abs(w) >= 1.0):
        raise ValueError("transvection target must lie in the open disc")
    g = 1.0 / np.sqrt(1.0 - np.abs(w) ** 2)
    out = np.empty(w.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = g
    out[..., 0, 1] = g * w
    out[..., 1, 0] = g * np.conj(w)
    out[..., 1, 1] = g
    return out


def sections(w, theta) -> np.ndarray:
    """Batched ``t_w r_θ`` (global trivialisation G ≅ D × K)."""
    w, theta = np.broadcast_arrays(np.asarray(w, dtype=complex), np.asarray(theta, dtype=float))
    return mul(transvections(w), rotations(theta))


def rotation(theta: float) -> GroupElement:
    return GroupElement(rotations(theta))


def section(w, theta: float = 0.0) -> GroupElement:
    w = _as_z(w)
    if np.ndim(w):
        w = complex(np.asarray(w).ravel()[0])
    return GroupElement(sections(w, theta))


def random_elements(rng: np.random.Generator, size: int, max_radius: float = 0.9) -> np.ndarray:
    """Seeded random batch ``t_w r_θ`` with ``|w| <= max_radius``."""
    r = max_radius * np.sqrt(rng.uniform(0.0, 1.0, size))
    w = r * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, size))
    theta = rng.uniform(0.0, 2 * np.pi, size)
    return sections(w, theta)


def hyperbolic_distance(z, w) -> np.ndarray:
    """Distance ``artanh |z - w| / |1 - conj(w) z|`` (metric |dz|/(1-|z|^2))."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    q = np.abs(z - w) / np.abs(1.0 - np.conj(w) * z)
    return np.arctanh(np.minimum(q, 1.0 - 1e-16))


# ---------------------------------------------------------------------------
# Lie algebra su(1,1) and exponential coordinates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LieBasis:
    """Basis of su(n,1); for n = 1: two boosts and the compact generator."""

    X: tuple
    n: int = 1

    def __post_init__(self):
        J = j_form(self.n)
        for Xk in self.X:
            herm = Xk.conj().T @ J + J @ Xk
            if np.max(np.abs(herm)) > ALGEBRAIC_TOL or abs(np.trace(Xk)) > ALGEBRAIC_TOL:
                raise NumericDriftError("basis element is not in su(n,1)")

    @property
    def dim(self) -> int:
        return len(self.X)


LIE_BASIS = LieBasis(
    (
        np.array([[0, 1], [1, 0]], dtype=complex),
        np.array([[0, 1j], [-1j, 0]], dtype=complex),
        np.array([[1j, 0], [0, -1j]], dtype=complex),
    )
)
COMPACT_DIRECTION = 2


def _exp_factors(t: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    t = np.asarray(t, dtype=float)
    c1, s1 = np.cosh(t[..., 0]), np.sinh(t[..., 0])
    c2, s2 = np.cosh(t[..., 1]), np.sinh(t[..., 1])
    e1 = np.empty(t.shape[:-1] + (2, 2), dtype=complex)
    e1[..., 0, 0] = c1
    e1[..., 0, 1] = s1
    e1[..., 1, 0] = s1
    e1[..., 1, 1] = c1
    e2 = np.empty_like(e1)
    e2[..., 0, 0] = c2
    e2[..., 0, 1] = 1j * s2
    e2[..., 1, 0] = -1j * s2
    e2[..., 1, 1] = c2
    return e1, e2, rotations(t[..., 2])


def exp_coords(t) -> np.ndarray:
    """Batched ``exp(t1 X1) exp(t2 X2) exp(t3 X3)`` for ``t`` of shape (..., 3)."""
    e1, e2, e3 = _exp_factors(t)
    return e1 @ e2 @ e3


def exp_basis(t) -> GroupElement:
    t = np.asarray(t, dtype=float)
    if t.shape != (3,):
        raise UnsupportedDimensionError("exp_basis is implemented for su(1,1) (dim 3)")
    if not np.all(np.isfinite(t)):
        raise ValueError("coordinates must be finite")
    return GroupElement(exp_coords(t))


def solve_coords(y: np.ndarray, maxit: int = 50, tol: float = 1e-12):
    """Invert ``exp_coords`` by Gauss–Newton.

    Returns ``(t, residual, converged)``; ``y`` is a batch ``(..., 2, 2)``.
    The start point is the first-order guess from the su(1,1) components of
    ``y - y^{-1}``.
    """
    y = np.asarray(y, dtype=complex)
    shape = y.shape[:-2]
    Y = y.reshape(-1, 2, 2)
    skew = 0.5 * (Y - inv(Y))
    t = np.stack([skew[:, 0, 1].real, skew[:, 0, 1].imag, skew[:, 0, 0].imag], axis=-1)
    X1, X2, X3 = LIE_BASIS.X
    res = np.full(len(Y), np.inf)
    for _ in range(maxit):
        t = np.clip(t, -20.0, 20.0)
        e1, e2, e3 = _exp_factors(t)
        E = e1 @ e2 @ e3
        R = (E - Y).reshape(-1, 4)
        res = np.max(np.abs(R), axis=-1)
        if np.all(res < tol):
            break
        J1 = (X1 @ E).reshape(-1, 4)
        J2 = (e1 @ X2 @ e2 @ e3).reshape(-1, 4)
        J3 = (E @ X3).reshape(-1, 4)
        Jc = np.stack([J1, J2, J3], axis=-1)
        Jr = np.concatenate([Jc.real, Jc.imag], axis=1)
        Rr = np.concatenate([R.real, R.imag], axis=1)
        step = _lstsq(Jr, Rr)
        t = t - step
    E = exp_coords(t)
    res = np.max(np.abs((E - Y).reshape(-1, 4)), axis=-1)
    return t.reshape(shape + (3,)), res.reshape(shape), (res < 1e-9).reshape(shape)


def _lstsq(J: np.ndarray, r: np.ndarray) -> np.ndarray:
    JtJ = np.einsum("nki,nkj->nij", J, J)
    Jtr = np.einsum("nki,nk->ni", J, r)
    # light Levenberg damping keeps far-from-identity elements from being singular
    damp = 1e-14 * (np.trace(JtJ, axis1=-2, axis2=-1) + 1.0)
    return np.linalg.solve(JtJ + damp[:, None, None] * np.eye(3), Jtr[..., None])[..., 0]


@dataclass
class CoordCheck:
    inside: np.ndarray
    coords: np.ndarray
    converged: np.ndarray


def in_U_eps_batch(y: np.ndarray, eps: float, slack: float = 1e-9) -> CoordCheck:
    if eps <= 0:
        raise ValueError("eps must be positive")
    t, _, ok = solve_coords(y)
    inside = ok & np.all(np.abs(t) <= eps * (1 + slack) + 1e-12, axis=-1)
    return CoordCheck(inside, t, ok)


def in_U_eps(y: GroupElement, eps: float) -> bool:
    """True iff ``y = exp_basis(t)`` for some ``|t_k| <= eps``.

    A failed coordinate solve returns False; the diagnostic is available via
    :func:`in_U_eps_batch`.
    """
    _require_disc(y.n)
    return bool(in_U_eps_batch(y.M[None], eps).inside[0])


# ---------------------------------------------------------------------------
# Haar quadrature on G
# ---------------------------------------------------------------------------

@dataclass
class GGrid:
    """Tensor quadrature on G ≅ D × K truncated at ``|x·o| <= R``.

    Radial nodes are Gauss–Legendre in ``u = -log(1 - |z|^2)``, where the
    Haar density becomes ``e^u du``; the disc angle and the K angle use the
    trapezoid rule.
    """

    R: float
    counts: tuple[int, int, int]
    z: np.ndarray
    theta: np.ndarray
    weights: np.ndarray
    elements: np.ndarray = field(repr=False)
    radial_u: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def u_max(self) -> float:
        return float(-np.log1p(-self.R ** 2))

    def one_minus_r2(self) -> np.ndarray:
        return 1.0 - np.abs(self.z) ** 2

    def manifest(self) -> dict:
        return {
            "R": self.R,
            "u_max": self.u_max,
            "Nr": self.counts[0],
            "Ntheta": self.counts[1],
            "Nk": self.counts[2],
            "nodes": self.size,
            "haar": "dx = (1-|z|^2)^-2 dv(z) dk, dv normalised area, dk probability",
        }


def haar_grid(R: float, Nr: int, Ntheta: int, Nk: int, phase_offset: float = 0.0) -> GGrid:
    if not 0.0 < R < 1.0:
        raise ValueError("radial truncation R must satisfy 0 < R < 1")
    u_max = -np.log1p(-R * R)
    x, w = np.polynomial.legendre.leggauss(Nr)
    u = 0.5 * u_max * (x + 1.0)
    wu = 0.5 * u_max * w * np.exp(u)
    r = np.sqrt(-np.expm1(-u))
    phi = 2 * np.pi * (np.arange(Ntheta) + phase_offset) / Ntheta
    theta = 2 * np.pi * np.arange(Nk) / Nk
    U, PHI, TH = np.meshgrid(np.arange(Nr), phi, theta, indexing="ij")
    z = (r[U] * np.exp(1j * PHI)).ravel()
    weights = (wu[U] / (Ntheta * Nk)).ravel()
    th = TH.ravel()
    return GGrid(
        R=float(R),
        counts=(Nr, Ntheta, Nk),
        z=z,
        theta=th,
        weights=weights,
        elements=sections(z, th),
        radial_u=u,
    )


def haar_mass_disc(rho_max: float) -> float:
    """Haar mass of ``{|x·o|^2 <= rho_max}``: ``rho_max / (1 - rho_max)``."""
    return rho_max / (1.0 - rho_max)
