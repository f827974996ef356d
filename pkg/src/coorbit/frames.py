"""Lattices, partitions of unity, and the discretization operators T1, T2, T3.

Lattice points are ``x = t_z r_θ`` with disc points on hyperbolic circles of
radius ``jδ`` (``δ = ε/2``) and K angles spaced by at most ``ε``.  Each point
owns a polar cell: an annular sector in the disc times an arc in K.  These
cells tile the truncated region exactly, so the indicator functions form a
partition of unity with analytic Haar masses.

For ``f = W_u(v)`` with analyzing ``u``, the three operators act on ``v``::

    T3 v = Σ c_i (v, a_i) a_i,   T1 v = Σ (v, a_i) b_i,   T2 v = Σ (v, b_i) a_i,

where ``a_i = ρ(x_i)u`` and ``b_i = ∫_{cell i} σ(y, y⁻¹x_i) ρ(y)u dy``.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import eigh
from scipy.spatial import cKDTree

from .bergman import HoloFunction, hs_weights
from .cocycle import sigma_batch
from .group import (
    GGrid,
    act,
    hyperbolic_distance,
    in_U_eps_batch,
    inv,
    mul,
    origin_image,
    sections,
)
from .representation import GFunction, rho_coeffs, rho_matrix, wavelet_batch

log = logging.getLogger(__name__)

CHUNK = 100_000


class DensityError(ValueError):
    pass


class NonContractionError(ArithmeticError):
    def __init__(self, message: str, ratio: float):
        super().__init__(message)
        self.ratio = ratio


# ---------------------------------------------------------------------------
# lattice
# ---------------------------------------------------------------------------

def _u_of_tau(tau):
    # u = -log(1 - tanh²τ) = 2 log cosh τ
    return 2.0 * np.log(np.cosh(tau))


@dataclass
class Lattice:
    eps: float
    R: float
    delta: float
    z: np.ndarray            # disc points
    ring: np.ndarray         # ring index per disc point
    u_lo: np.ndarray         # radial cell bounds in u = -log(1-|z|²)
    u_hi: np.ndarray
    phi_lo: np.ndarray       # angular cell bounds
    phi_hi: np.ndarray
    NK: int
    ring_counts: np.ndarray = field(repr=False)
    overlap: int | None = None

    @property
    def theta(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.NK) / self.NK

    @property
    def n_disc(self) -> int:
        return len(self.z)

    @property
    def size(self) -> int:
        return self.n_disc * self.NK

    @property
    def disc_mass(self) -> np.ndarray:
        return (np.exp(self.u_hi) - np.exp(self.u_lo)) * (self.phi_hi - self.phi_lo) / (2 * np.pi)

    @property
    def masses(self) -> np.ndarray:
        """Haar mass ``c_i`` of every cell, atom order ``i = d·NK + m``."""
        return np.repeat(self.disc_mass / self.NK, self.NK)

    def disc_sections(self) -> np.ndarray:
        return sections(self.z, np.zeros(self.n_disc))

    def elements(self, start: int = 0, stop: int | None = None) -> np.ndarray:
        stop = self.size if stop is None else min(stop, self.size)
        idx = np.arange(start, stop)
        return sections(self.z[idx // self.NK], self.theta[idx % self.NK])

    def chunks(self, size: int = CHUNK):
        for a in range(0, self.size, size):
            yield a, self.elements(a, a + size)

    def weights_vt(self, t: float) -> np.ndarray:
        """``∫_{cell} (1-|x·o|²)^t dx`` per atom."""
        if abs(1.0 - t) < 1e-14:
            radial = self.u_hi - self.u_lo
        else:
            radial = (np.exp((1 - t) * self.u_hi) - np.exp((1 - t) * self.u_lo)) / (1 - t)
        return np.repeat(radial * (self.phi_hi - self.phi_lo) / (2 * np.pi) / self.NK, self.NK)

    def locate(self, x: np.ndarray) -> np.ndarray:
        """Index of the cell containing each element (polar partition)."""
        z = origin_image(x)
        tau = np.arctanh(np.minimum(np.abs(z), 1 - 1e-16))
        j = np.clip(np.floor(tau / self.delta + 0.5).astype(int), 0, len(self.ring_counts) - 1)
        starts = np.concatenate([[0], np.cumsum(self.ring_counts)[:-1]])
        n = self.ring_counts[j]
        k = np.rint(np.mod(np.angle(z), 2 * np.pi) * n / (2 * np.pi)).astype(int) % n
        theta = np.mod(-np.angle(x[..., 1, 1]), 2 * np.pi)
        m = np.rint(theta * self.NK / (2 * np.pi)).astype(int) % self.NK
        return (starts[j] + k) * self.NK + m

    def manifest(self) -> dict:
        return {
            "eps": self.eps,
            "R": self.R,
            "delta": self.delta,
            "rings": int(len(self.ring_counts)),
            "disc_points": self.n_disc,
            "NK": self.NK,
            "atoms": self.size,
            "overlap": self.overlap,
        }


def _odd_k_count(eps: float) -> int:
    # odd, so that no K angle equals π: r_π = -I puts conj(d) on the cut of Log
    n = int(math.ceil(2 * np.pi / eps - 1e-12))
    return n if n % 2 else n + 1


def generate_lattice(eps: float, R: float, check_density: bool = False, grid: GGrid | None = None) -> Lattice:
    """Polar lattice on ``{|x·o| <= R}`` with ``δ = ε/2`` hyperbolic spacing."""
    if not eps > 0:
        raise ValueError("need eps > 0")
    if not 0 < R < 1:
        raise ValueError("need 0 < R < 1")
    delta = eps / 2.0
    tau_max = float(np.arctanh(R))
    J = int(math.floor(tau_max / delta))
    counts = [1]
    for j in range(1, J + 1):
        counts.append(int(math.ceil(np.pi * np.sinh(2 * j * delta) / delta)))
    counts = np.array(counts)
    zs, ring, ulo, uhi, plo, phi_hi = [], [], [], [], [], []
    for j, n in enumerate(counts):
        lo = 0.0 if j == 0 else (j - 0.5) * delta
        hi = min((j + 0.5) * delta, tau_max) if j < J else tau_max
        phi = 2 * np.pi * np.arange(n) / n
        zs.append(np.tanh(j * delta) * np.exp(1j * phi))
        ring.append(np.full(n, j))
        ulo.append(np.full(n, _u_of_tau(lo)))
        uhi.append(np.full(n, _u_of_tau(hi)))
        half = np.pi / n
        plo.append(phi - half)
        phi_hi.append(phi + half)
    lat = Lattice(
        eps=float(eps), R=float(R), delta=delta,
        z=np.concatenate(zs), ring=np.concatenate(ring),
        u_lo=np.concatenate(ulo), u_hi=np.concatenate(uhi),
        phi_lo=np.concatenate(plo), phi_hi=np.concatenate(phi_hi),
        NK=_odd_k_count(eps), ring_counts=counts,
    )
    if check_density:
        rep = density_report(lat, grid)
        if not rep["dense"]:
            raise DensityError(f"lattice not U_eps-dense ({rep['uncovered']} nodes); use a smaller delta")
    return lat


def density_report(lat: Lattice, grid: GGrid | None = None, max_nodes: int = 4000) -> dict:
    """Check coverage by ``x_i U_ε`` and count overlaps on sample nodes."""
    if grid is None:
        from .group import haar_grid

        grid = haar_grid(lat.R, 12, 24, 8)
    sel = np.linspace(0, grid.size - 1, min(grid.size, max_nodes)).astype(int)
    x = grid.elements[sel]
    own = lat.locate(x)
    cover = in_U_eps_batch(mul(inv(lat.elements_at(own)), x), lat.eps).inside
    # overlap: candidate atoms near each node, pre-filtered in the disc and in K
    tree = cKDTree(np.c_[lat.z.real, lat.z.imag])
    zx = origin_image(x)
    theta_x = np.mod(-np.angle(x[..., 1, 1]), 2 * np.pi)
    near = tree.query_ball_point(np.c_[zx.real, zx.imag], r=[_euclid_radius(z, 2 * lat.eps) for z in zx])
    node = np.concatenate([np.full(len(nb), a) for a, nb in enumerate(near)]).astype(int)
    disc = np.concatenate([np.asarray(nb, dtype=int) for nb in near])
    close = hyperbolic_distance(zx[node], lat.z[disc]) <= 2 * lat.eps
    node, disc = node[close], disc[close]
    dth = np.abs(np.angle(np.exp(1j * (lat.theta[None, :] - theta_x[node][:, None]))))
    pn, pm = np.nonzero(dth <= 3 * lat.eps)
    node, atom = node[pn], disc[pn] * lat.NK + pm
    inside = in_U_eps_batch(mul(inv(lat.elements_at(atom)), x[node]), lat.eps).inside
    overlap = np.bincount(node[inside], minlength=len(x))
    lat.overlap = int(overlap.max())
    return {"dense": bool(cover.all()), "uncovered": int((~cover).sum()), "overlap": lat.overlap,
            "nodes": int(len(x))}


def _euclid_radius(z: complex, tau: float) -> float:
    """Euclidean radius bound of the hyperbolic ball of radius ``tau`` at ``z``."""
    r2, p = abs(z) ** 2, np.tanh(tau)
    return float((1 - r2) * p / (1 - p * p) * (1 + 1e-9) + 1e-12)


def _elements_at(self: Lattice, idx: np.ndarray) -> np.ndarray:
    idx = np.asarray(idx)
    return sections(self.z[idx // self.NK], self.theta[idx % self.NK])


Lattice.elements_at = _elements_at


# ---------------------------------------------------------------------------
# Voronoi partition on a grid
# ---------------------------------------------------------------------------

@dataclass
class BUPU:
    assign: np.ndarray       # node -> atom index (into ``points``)
    points: np.ndarray       # atoms with non-empty cells
    c: np.ndarray            # Haar mass of each cell
    grid: GGrid

    def psi(self, i: int) -> np.ndarray:
        return (self.assign == i).astype(float)

    def partition_sum(self) -> np.ndarray:
        out = np.zeros(self.grid.size)
        np.add.at(out, np.arange(self.grid.size), 1.0)
        return out


def build_bupu(lat: Lattice, grid: GGrid) -> BUPU:
    """Nearest-point partition of the grid nodes.

    Distance: ``(d_B/δ)² + (Δθ/ε)²``.  The metric separates, so the nearest
    atom pairs the nearest disc point with the nearest K angle.
    """
    tree = cKDTree(np.c_[lat.z.real, lat.z.imag])
    k = min(16, lat.n_disc)
    _, cand = tree.query(np.c_[grid.z.real, grid.z.imag], k=k)
    cand = cand.reshape(grid.size, k)
    dB = hyperbolic_distance(grid.z[:, None], lat.z[cand])
    d = cand[np.arange(grid.size), dB.argmin(axis=1)]
    m = np.rint(grid.theta * lat.NK / (2 * np.pi)).astype(int) % lat.NK
    atom = d * lat.NK + m
    used, assign = np.unique(atom, return_inverse=True)
    if len(used) < lat.size:
        warnings.warn(f"{lat.size - len(used)} empty cells dropped", stacklevel=2)
    c = np.bincount(assign, weights=grid.weights, minlength=len(used))
    return BUPU(assign, lat.elements_at(used), c, grid)


# ---------------------------------------------------------------------------
# sequence spaces, analysis, synthesis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SequenceNorm:
    p: float
    w: np.ndarray

    def __post_init__(self):
        if np.any(self.w <= 0):
            raise ValueError("sequence weights must be positive")

    def __call__(self, c) -> float:
        return float(np.sum(np.abs(c) ** self.p * self.w) ** (1.0 / self.p))


def analyze(f, lat, u: HoloFunction, s: float) -> np.ndarray:
    """Coefficients ``⟨f, ρ(x_i)u⟩`` for every atom."""
    vec = getattr(f, "vec", f)
    if isinstance(lat, Lattice):
        out = np.empty(lat.size, dtype=complex)
        for a, X in lat.chunks():
            out[a:a + len(X)] = wavelet_batch(u, vec, X, s)
        return out
    return wavelet_batch(u, vec, np.asarray(lat), s)


def synthesize(gamma, lat, u: HoloFunction, s: float, kmax: int) -> HoloFunction:
    """``Σ γ_i ρ(x_i)u`` truncated at degree ``kmax``."""
    gamma = np.asarray(gamma, dtype=complex)
    acc = np.zeros(kmax + 1, dtype=complex)
    if isinstance(lat, Lattice):
        for a, X in lat.chunks():
            acc += gamma[a:a + len(X)] @ rho_coeffs(s, X, u, kmax)
    else:
        X = np.asarray(lat)
        for a in range(0, len(X), CHUNK):
            acc += gamma[a:a + CHUNK] @ rho_coeffs(s, X[a:a + CHUNK], u, kmax)
    return HoloFunction(acc)


# ---------------------------------------------------------------------------
# operators in coefficient space
# ---------------------------------------------------------------------------

def _rotation_gram(u: HoloFunction, NK: int) -> np.ndarray:
    """``Σ_m ρ(r_m)u (ρ(r_m)u)^H`` over the K angles."""
    k = np.arange(u.K + 1)
    diff = k[:, None] - k[None, :]
    theta = 2 * np.pi * np.arange(NK) / NK
    F = np.exp(-2j * diff[..., None] * theta).sum(axis=-1)
    return np.outer(u.coeffs, np.conj(u.coeffs)) * F


def polar_cell_nodes(lat: Lattice, gauss=(2, 2, 2), disc_index=None):
    """Gauss nodes of the K-arc-0 cell of each disc point.

    Returns ``(y, w)`` with ``y`` of shape ``(nd, q, 2, 2)`` and weights that
    sum to the atom mass.  Ring 0 uses the trapezoid rule in angle.
    """
    gu, gp, gk = gauss
    idx = np.arange(lat.n_disc) if disc_index is None else np.asarray(disc_index)
    xu, wu = leggauss(gu)
    xp, wp = leggauss(gp)
    xk, wk = leggauss(gk)
    a, b = lat.u_lo[idx], lat.u_hi[idx]
    U = 0.5 * (b - a)[:, None] * (xu + 1)[None] + a[:, None]
    WU = 0.5 * (b - a)[:, None] * wu[None] * np.exp(U)
    p0, p1 = lat.phi_lo[idx], lat.phi_hi[idx]
    P = 0.5 * (p1 - p0)[:, None] * (xp + 1)[None] + p0[:, None]
    WP = 0.5 * (p1 - p0)[:, None] * wp[None] / (2 * np.pi)
    full = lat.ring[idx] == 0
    if np.any(full):
        # full circle: equispaced angles are exact for trigonometric integrands
        P[full] = 2 * np.pi * (np.arange(gp) + 0.5)[None] / gp
        WP[full] = 1.0 / gp
    half = np.pi / lat.NK
    TH = half * xk
    WK = half * wk / (2 * np.pi)
    r = np.sqrt(-np.expm1(-U))
    Z = r[:, :, None] * np.exp(1j * P[:, None, :])               # (nd, gu, gp)
    Z = np.broadcast_to(Z[..., None], Z.shape + (gk,))
    TT = np.broadcast_to(TH, Z.shape)
    W = WU[:, :, None, None] * WP[:, None, :, None] * WK[None, None, None, :]
    nd = len(idx)
    return sections(Z.reshape(nd, -1), TT.reshape(nd, -1)), W.reshape(nd, -1)


@dataclass
class LatticeOperators:
    """Matrices of ``T1, T2, T3`` on polynomials of degree ``<= K``."""

    T1: np.ndarray
    T2: np.ndarray
    T3: np.ndarray
    s: float
    K: int
    meta: dict = field(default_factory=dict)

    @property
    def h(self) -> np.ndarray:
        return hs_weights(self.s, self.K)

    def matrix(self, kind: int) -> np.ndarray:
        return {1: self.T1, 2: self.T2, 3: self.T3}[kind]

    def apply(self, kind: int, v: HoloFunction) -> HoloFunction:
        return HoloFunction(self.matrix(kind) @ v.padded(self.K).coeffs)

    def hermitian_form(self, kind: int) -> np.ndarray:
        """``H^{1/2} T H^{-1/2}``: the operator in an orthonormal basis."""
        sq = np.sqrt(self.h)
        return sq[:, None] * self.matrix(kind) / sq[None, :]

    def deviation_norm(self, kind: int) -> float:
        """``‖T_k - I‖`` in the ``H_s`` norm on the truncated space."""
        A = self.hermitian_form(kind) - np.eye(self.K + 1)
        return float(np.linalg.norm(A, 2))

    def ratio(self, kind: int, v: HoloFunction) -> float:
        v = v.padded(self.K)
        w = self.apply(kind, v).coeffs - v.coeffs
        return float(np.sqrt(np.sum(np.abs(w) ** 2 * self.h) / np.sum(np.abs(v.coeffs) ** 2 * self.h)))

    @classmethod
    def from_polar(cls, lat: Lattice, u: HoloFunction, s: float, K: int, gauss=(2, 2, 2),
                   chunk: int = 20000) -> "LatticeOperators":
        h = hs_weights(s, K)
        M0 = _rotation_gram(u, lat.NK)
        T1 = np.zeros((K + 1, K + 1), dtype=complex)
        T3 = np.zeros_like(T1)
        t_all = lat.disc_sections()
        cd = lat.disc_mass / lat.NK
        for a in range(0, lat.n_disc, chunk):
            sl = slice(a, min(a + chunk, lat.n_disc))
            t = t_all[sl]
            Rt = rho_matrix(s, t, K, u.K)                          # (n, K+1, du+1)
            RtM = Rt @ M0
            T3 += np.einsum("n,nkl,nml->km", cd[sl], RtM, np.conj(Rt))
            y, w = polar_cell_nodes(lat, gauss, np.arange(sl.start, sl.stop))
            nq = y.shape[1]
            yf = y.reshape(-1, 2, 2)
            tf = np.repeat(t, nq, axis=0)
            phase = sigma_batch(yf, mul(inv(yf), tf), s).reshape(-1, nq)
            Ry = rho_matrix(s, yf, K, u.K).reshape(len(t), nq, K + 1, u.K + 1)
            B = np.einsum("nq,nqkl->nkl", w * phase, Ry)           # Σ_q w σ R(y)
            T1 += np.einsum("nkl,lj,nmj->km", B, M0, np.conj(Rt))
        T1 = T1 * h[None, :]
        T3 = T3 * h[None, :]
        T2 = (np.conj(T1).T * h[None, :]) / h[:, None]
        meta = {"construction": "polar", "gauss": list(gauss), **lat.manifest()}
        return cls(T1, T2, T3, s, K, meta)

    @classmethod
    def from_cells(cls, points: np.ndarray, masses: np.ndarray, cell_nodes: np.ndarray,
                   cell_weights: np.ndarray, cell_of_node: np.ndarray, u: HoloFunction, s: float,
                   K: int, untwisted: bool = False) -> "LatticeOperators":
        """Direct sums over explicit atoms and cell quadrature nodes."""
        h = hs_weights(s, K)
        A = rho_coeffs(s, points, u, K)                            # (n, K+1)
        T3 = (A.T * masses) @ np.conj(A)
        if untwisted:
            ph = np.ones(len(cell_nodes), dtype=complex)
        else:
            ph = sigma_batch(cell_nodes, mul(inv(cell_nodes), points[cell_of_node]), s)
        Y = rho_coeffs(s, cell_nodes, u, K) * (cell_weights * ph)[:, None]
        B = np.zeros_like(A)
        np.add.at(B, cell_of_node, Y)
        T1 = B.T @ np.conj(A)
        T2 = A.T @ np.conj(B)
        return cls(T1 * h[None, :], T2 * h[None, :], T3 * h[None, :], s, K, {"construction": "cells"})


def region_operator(R: float, u: HoloFunction, s: float, K: int, Nr: int = 96) -> np.ndarray:
    """``∫_{|y·o| <= R} (·, ρ(y)u) ρ(y)u dy`` as a matrix on degree ``<= K``.

    This is the reproducing formula restricted to the truncated region, the
    target the lattice operators approximate.  Equispaced angles with
    ``2K+3`` disc and ``2 deg u + 1`` K nodes integrate the angular
    dependence exactly.
    """
    from .group import haar_grid

    g = haar_grid(R, Nr, 2 * K + 3, 2 * u.K + 1)
    A = rho_coeffs(s, g.elements, u, K)
    return ((A.T * g.weights) @ np.conj(A)) * hs_weights(s, K)[None, :]


def polar_cells_explicit(lat: Lattice, gauss=(2, 2, 2)):
    """All atoms with their Gauss cell nodes, without any K reduction."""
    y0, w0 = polar_cell_nodes(lat, gauss)
    nd, nq = w0.shape
    R = sections(np.zeros(lat.NK), lat.theta)
    nodes = mul(y0[:, None], R[None, :, None])                    # (nd, NK, nq, 2, 2)
    weights = np.broadcast_to(w0[:, None, :], (nd, lat.NK, nq))
    owner = np.broadcast_to(np.arange(lat.size).reshape(nd, lat.NK, 1), (nd, lat.NK, nq))
    return nodes.reshape(-1, 2, 2), weights.reshape(-1), owner.reshape(-1)


def operators_from_bupu(bupu: BUPU, u: HoloFunction, s: float, K: int, untwisted: bool = False):
    g = bupu.grid
    return LatticeOperators.from_cells(bupu.points, bupu.c, g.elements, g.weights, bupu.assign, u, s, K,
                                       untwisted=untwisted)


# ---------------------------------------------------------------------------
# grid-level operators (small cases, independent of the coefficient route)
# ---------------------------------------------------------------------------

def apply_T(kind: int, f: GFunction, bupu: BUPU, u: HoloFunction, s: float, kmax: int = 60) -> GFunction:
    """``T_k f`` evaluated on the grid nodes from the defining sums."""
    from .twisted import convolve_kernel

    grid = bupu.grid
    X = bupu.points
    if kind == 1:
        xi = X[bupu.assign]
        S1 = f.evaluate(xi) * sigma_batch(grid.elements, mul(inv(grid.elements), xi), s)
        return convolve_kernel(GFunction(S1, grid, f.t), u, s, kmax)
    if kind == 3:
        coef = bupu.c * f.evaluate(X)
    elif kind == 2:
        y = grid.elements
        xi = X[bupu.assign]
        terms = grid.weights * f.values * np.conj(sigma_batch(y, mul(inv(y), xi), s))
        coef = np.bincount(bupu.assign, weights=terms.real, minlength=len(X)) + \
            1j * np.bincount(bupu.assign, weights=terms.imag, minlength=len(X))
    else:
        raise ValueError("kind must be 1, 2 or 3")
    out = np.zeros(grid.size, dtype=complex)
    Xi = inv(X)
    for a in range(0, grid.size, 2000):
        x = grid.elements[a:a + 2000]
        g = mul(Xi[:, None], x[None])                             # x_i^{-1} x
        phi = wavelet_batch(u, u, g.reshape(-1, 2, 2), s).reshape(g.shape[:2])
        sg = sigma_batch(np.broadcast_to(X[:, None], g.shape), g, s)
        out[a:a + 2000] = coef @ (np.conj(sg) * phi)
    return GFunction(out, grid, f.t)


# ---------------------------------------------------------------------------
# iterative solvers and frame bounds
# ---------------------------------------------------------------------------

@dataclass
class NeumannResult:
    x: np.ndarray
    residuals: list
    iterations: int

    @property
    def ratios(self) -> np.ndarray:
        r = np.asarray(self.residuals)
        return r[1:] / r[:-1]


def neumann_solve(apply, g: np.ndarray, tol: float = 1e-12, maxit: int = 500,
                  norm=np.linalg.norm) -> NeumannResult:
    """Iterate ``x ← x + (g − T x)`` until ``‖g − T x‖ < tol ‖g‖``."""
    g = np.asarray(g, dtype=complex)
    x = np.zeros_like(g)
    gn = norm(g)
    if gn == 0:
        return NeumannResult(x, [0.0], 0)
    residuals = []
    for it in range(maxit + 1):
        r = g - apply(x)
        rel = float(norm(r) / gn)
        residuals.append(rel)
        if rel < tol:
            return NeumannResult(x, residuals, it)
        if it >= 3 and rel >= residuals[-2]:
            raise NonContractionError(f"residual stopped decreasing at {rel:.3e}",
                                      rel / residuals[-2])
        x = x + r
    ratio = residuals[-1] / residuals[-2] if len(residuals) > 1 else math.inf
    raise NonContractionError(f"maxit reached, residual {residuals[-1]:.3e}", ratio)


@dataclass(frozen=True)
class FrameBounds:
    A: float
    B: float
    is_frame: bool

    @property
    def ratio(self) -> float:
        return self.B / self.A if self.A > 0 else math.inf


def frame_bounds(S: np.ndarray, floor: float = 1e-10) -> FrameBounds:
    """Extreme eigenvalues of a Hermitian positive semidefinite matrix.

    Only the two end eigenvalues are requested from LAPACK, so clustered
    spectra (frames close to tight) are resolved as well as separated ones.
    A lower bound below ``floor * B`` yields a not-a-frame verdict.
    """
    S = 0.5 * (S + np.conj(S).T)
    n = S.shape[0]
    A = float(eigh(S, eigvals_only=True, subset_by_index=[0, 0])[0])
    B = float(eigh(S, eigvals_only=True, subset_by_index=[n - 1, n - 1])[0])
    A = max(A, 0.0)
    return FrameBounds(A, B, bool(A > floor * max(B, 1e-300)))
