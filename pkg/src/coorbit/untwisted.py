"""Reference implementation for integer ``s``, where the multiplier is trivial.

Everything here uses integer powers of the automorphy factor and direct sums
over atoms, with no logarithms, no winding numbers, and no reduction over the
compact subgroup.  It shares only the lattice geometry with the main code and
serves as an independent check at ``s ∈ {3, 4, ...}``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

import numpy as np

from .frames import Lattice, polar_cell_nodes
from .group import sections


def _check_integer(s) -> int:
    if float(s) != int(s) or int(s) < 2:
        raise ValueError(f"the untwisted reference needs an integer s >= 2, got {s}")
    return int(s)


def monomial_norms(s: int, K: int) -> np.ndarray:
    """``‖z^k‖² = k! (s-1)! / (s+k-1)!`` in exact integer arithmetic."""
    return np.array([factorial(k) * factorial(s - 1) / factorial(s + k - 1) for k in range(K + 1)])


def rho_columns(s: int, x: np.ndarray, u_coeffs: np.ndarray, K: int) -> np.ndarray:
    """Coefficients of ``ρ(x)u`` up to degree ``K`` for a batch ``x``.

    ``ρ(x) z^j = (d̄ - b̄ z)^{-(s+j)} (Ā z - c̄)^j`` expanded with binomial
    coefficients of integer exponents.
    """
    s = _check_integer(s)
    A, b, c, d = (np.conj(x[:, 0, 0]), np.conj(x[:, 0, 1]), np.conj(x[:, 1, 0]), np.conj(x[:, 1, 1]))
    q = b / d
    qp = q[:, None] ** np.arange(K + 1)[None]
    out = np.zeros((len(x), K + 1), dtype=complex)
    for j, uj in enumerate(u_coeffs):
        if uj == 0:
            continue
        n = s + j
        series = np.array([comb(n + l - 1, l) for l in range(K + 1)], dtype=float)[None] * qp
        series *= (d ** (-n))[:, None]
        poly = np.stack([comb(j, i) * A ** i * (-c) ** (j - i) for i in range(j + 1)], axis=1)
        col = np.zeros_like(out)
        for i in range(min(j, K) + 1):
            col[:, i:] += poly[:, i:i + 1] * series[:, : K + 1 - i]
        out += uj * col
    return out


@dataclass
class ReferenceOperators:
    T1: np.ndarray
    T2: np.ndarray
    T3: np.ndarray
    h: np.ndarray


def reference_operators(lat: Lattice, u_coeffs, s: int, K: int, gauss=(2, 2, 2),
                        chunk: int = 2000) -> ReferenceOperators:
    """Direct sums over every atom and every cell node."""
    s = _check_integer(s)
    u_coeffs = np.asarray(u_coeffs, dtype=complex)
    h = monomial_norms(s, K)
    T1 = np.zeros((K + 1, K + 1), dtype=complex)
    T3 = np.zeros_like(T1)
    for a in range(0, lat.n_disc, chunk):
        idx = np.arange(a, min(a + chunk, lat.n_disc))
        y0, w0 = polar_cell_nodes(lat, gauss, idx)
        for m, th in enumerate(lat.theta):
            rot = sections(np.zeros(1), np.array([th]))[0]
            x = sections(lat.z[idx], np.full(len(idx), th))
            atoms = rho_columns(s, x, u_coeffs, K)
            c = lat.disc_mass[idx] / lat.NK
            T3 += (atoms.T * c) @ np.conj(atoms)
            ys = (y0 @ rot).reshape(-1, 2, 2)
            cols = rho_columns(s, ys, u_coeffs, K).reshape(len(idx), -1, K + 1)
            b = np.einsum("nq,nqk->nk", w0, cols)
            T1 += b.T @ np.conj(atoms)
    T1, T3 = T1 * h[None], T3 * h[None]
    T2 = np.conj(T1).T * h[None] / h[:, None]
    return ReferenceOperators(T1, T2, T3, h)


def reference_frame_bounds(ops: ReferenceOperators) -> tuple[float, float]:
    """Extreme eigenvalues by a dense symmetric eigensolver."""
    sq = np.sqrt(ops.h)
    S = sq[:, None] * ops.T3 / sq[None, :]
    ev = np.linalg.eigvalsh(0.5 * (S + np.conj(S).T))
    return float(ev[0]), float(ev[-1])


def reference_deviation(ops: ReferenceOperators, kind: int, target: np.ndarray | None = None) -> float:
    sq = np.sqrt(ops.h)
    T = {1: ops.T1, 2: ops.T2, 3: ops.T3}[kind]
    target = np.eye(len(sq)) if target is None else target
    return float(np.linalg.norm(sq[:, None] * (T - target) / sq[None, :], 2))


def reference_roundtrip(lat: Lattice, ops: ReferenceOperators, u_coeffs, s: int, f_coeffs,
                        K_out: int, chunk: int = 50_000) -> np.ndarray:
    """Invert ``T3`` directly, sample, and resynthesize up to degree ``K_out``."""
    s = _check_integer(s)
    K = len(ops.h) - 1
    f = np.zeros(K + 1, dtype=complex)
    f[: len(f_coeffs)] = f_coeffs
    hcoef = np.linalg.solve(ops.T3, f)
    hw = np.conj(hcoef * ops.h)
    out = np.zeros(K_out + 1, dtype=complex)
    masses = lat.masses
    for a in range(0, lat.size, chunk):
        x = lat.elements(a, a + chunk)
        atoms = rho_columns(s, x, u_coeffs, K_out)
        coeff = np.conj(atoms[:, : K + 1] @ hw)      # (h, a_i)
        out += (masses[a:a + len(x)] * coeff) @ atoms
    return out
