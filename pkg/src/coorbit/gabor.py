"""Phase-space validation: the Heisenberg multiplier on ℝ².

Time-frequency shifts ``ρ(q,p)f(t) = e^{2πipt} f(t−q)`` form a
σ-representation of ℝ² with the continuous multiplier
``σ((q,p),(q',p')) = e^{2πi p' q}``.  The generic convolution and frame code
runs unchanged on this group, and classical Gabor analysis supplies the
ground truth.

Signals live on a uniform periodic grid ``t_k = (k − L/2) h``.  Translations
are band-limited (FFT phase ramps), so on lattices commensurate with the grid
the truncated Gabor system is exactly periodic.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from .bergman import ParameterError
from .frames import FrameBounds, frame_bounds
from .twisted import convolve_nodes

DEFAULT_L = 144
DEFAULT_H = 1.0 / 12.0
PERIODIZATION_TOL = 1e-10


class ShiftError(ValueError):
    """Translation larger than half the periodic window."""


@dataclass(frozen=True)
class HeisenbergGroup:
    """ℝ² with addition; elements are arrays ``(..., 2)`` holding ``(q, p)``."""

    def mul(self, x, y):
        return x + y

    def inv(self, x):
        return -x

    def sigma(self, x, y):
        return np.exp(2j * np.pi * y[..., 1] * x[..., 0])


@dataclass
class Signal:
    samples: np.ndarray
    h: float = DEFAULT_H

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.samples.ndim != 1:
            raise ValueError("a signal is a one-dimensional sample vector")

    @property
    def L(self) -> int:
        return len(self.samples)

    @property
    def t(self) -> np.ndarray:
        return time_axis(self.L, self.h)

    def inner(self, other: "Signal") -> complex:
        return complex(self.h * np.vdot(other.samples, self.samples))

    def norm(self) -> float:
        return float(np.sqrt(self.h) * np.linalg.norm(self.samples))

    def end_mass(self, width: int = 1) -> float:
        """Largest magnitude in the outer ``width`` samples, relative to the peak."""
        a = np.abs(self.samples)
        return float(max(a[:width].max(), a[-width:].max()) / a.max())

    def __sub__(self, other: "Signal") -> "Signal":
        return Signal(self.samples - other.samples, self.h)


def time_axis(L: int, h: float) -> np.ndarray:
    return (np.arange(L) - L // 2) * h


def gaussian_window(L: int = DEFAULT_L, h: float = DEFAULT_H) -> Signal:
    """``g(t) = 2^{1/4} e^{−πt²}``, unit norm in ``L²(ℝ)``."""
    g = Signal(2 ** 0.25 * np.exp(-np.pi * time_axis(L, h) ** 2), h)
    if g.end_mass() > PERIODIZATION_TOL:
        raise ParameterError("window does not decay within the grid; enlarge L·h")
    return g


def heisenberg_rho(q: float, p: float, f: Signal) -> Signal:
    """``e^{2πipt} f(t − q)`` with the translation done spectrally."""
    half = 0.5 * f.L * f.h
    if abs(q) >= half:
        raise ShiftError(f"shift {q} exceeds the half window {half}")
    xi = np.fft.fftfreq(f.L, f.h)
    shifted = np.fft.ifft(np.fft.fft(f.samples) * np.exp(-2j * np.pi * xi * q))
    return Signal(np.exp(2j * np.pi * p * f.t) * shifted, f.h)


def sigma_heisenberg(x, y) -> np.ndarray:
    return HeisenbergGroup().sigma(np.asarray(x, float), np.asarray(y, float))


# ---------------------------------------------------------------------------
# short-time Fourier transform and its kernel
# ---------------------------------------------------------------------------

def stft(f: Signal, points: np.ndarray, chunk: int = 2000) -> np.ndarray:
    """``V_g f(q,p) = (f, ρ(q,p)g)`` for the Gaussian ``g``, evaluated in closed form in ``g``."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    t = f.t
    out = np.empty(len(points), dtype=complex)
    for a in range(0, len(points), chunk):
        q, p = points[a:a + chunk, 0:1], points[a:a + chunk, 1:2]
        atoms = 2 ** 0.25 * np.exp(-np.pi * (t[None] - q) ** 2 + 2j * np.pi * p * t[None])
        out[a:a + chunk] = f.h * (np.conj(atoms) @ f.samples)
    return out


def gaussian_kernel(x: np.ndarray) -> np.ndarray:
    """``φ(q,p) = (g, ρ(q,p)g) = e^{−πiqp} e^{−π(q²+p²)/2}``."""
    q, p = x[..., 0], x[..., 1]
    return np.exp(-1j * np.pi * q * p - 0.5 * np.pi * (q * q + p * p))


@dataclass(frozen=True)
class PhaseGrid:
    """Square trapezoid grid on ``[−Q, Q]²``."""

    Q: float
    n: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @classmethod
    def square(cls, Q: float, n: int) -> "PhaseGrid":
        x = np.linspace(-Q, Q, n)
        w = np.full(n, x[1] - x[0])
        w[[0, -1]] *= 0.5
        X = np.stack(np.meshgrid(x, x, indexing="ij"), axis=-1).reshape(-1, 2)
        W = np.outer(w, w).ravel()
        return cls(Q, n, X, W)

    @property
    def size(self) -> int:
        return len(self.weights)


def twisted_convolve_r2(F: np.ndarray, grid: PhaseGrid, kernel=gaussian_kernel,
                        xs: np.ndarray | None = None) -> np.ndarray:
    """``F # φ`` on ℝ² via the generic quadrature routine."""
    xs = grid.nodes if xs is None else xs
    return convolve_nodes(HeisenbergGroup(), grid.nodes, grid.weights, F, kernel, xs)


def stft_reproducing_residual(f: Signal, grid: PhaseGrid, out_index: np.ndarray) -> float:
    """Relative ``ℓ²`` error of ``V_g f # V_g g = V_g f`` at the chosen nodes."""
    F = stft(f, grid.nodes)
    conv = twisted_convolve_r2(F, grid, xs=grid.nodes[out_index])
    ref = F[out_index]
    return float(np.linalg.norm(conv - ref) / np.linalg.norm(ref))


# ---------------------------------------------------------------------------
# frame operator on the periodic grid
# ---------------------------------------------------------------------------

def _lattice_steps(a: float, b: float, L: int, h: float) -> tuple[int, int]:
    na, nb = a / h, b * L * h
    if abs(na - round(na)) > 1e-9 or abs(nb - round(nb)) > 1e-9 or round(na) < 1 or round(nb) < 1:
        raise ParameterError(f"lattice ({a}, {b}) is not commensurate with L={L}, h={h}")
    if L % round(na) or L % round(nb):
        raise ParameterError(f"lattice ({a}, {b}) does not tile the periodic grid of length {L}")
    return int(round(na)), int(round(nb))


def gabor_atoms(a: float, b: float, window: Signal) -> tuple[np.ndarray, np.ndarray]:
    """All ``ρ(ma, nb)g`` on the period, as columns, with their lattice points."""
    L, h = window.L, window.h
    sa, sb = _lattice_steps(a, b, L, h)
    M, N = L // sa, L // sb
    ms = np.arange(M) - M // 2
    ns = np.arange(N) - N // 2
    t = window.t
    cols, pts = [], []
    for m in ms:
        g = np.roll(window.samples, m * sa)          # exact on-grid translation
        for n in ns:
            cols.append(np.exp(2j * np.pi * n * b * t) * g)
            pts.append((m * a, n * b))
    return np.array(cols).T, np.array(pts, dtype=float)


def frame_operator(a: float, b: float, window: Signal) -> np.ndarray:
    """``S f = Σ (f, g_mn) g_mn`` as an ``L × L`` matrix."""
    G, _ = gabor_atoms(a, b, window)
    return window.h * (G @ np.conj(G).T)


@dataclass(frozen=True)
class GaborFrameReport:
    A: float
    B: float
    is_frame: bool
    n_atoms: int

    @property
    def ratio(self) -> float:
        return self.B / self.A if self.A > 0 else np.inf


def gabor_frame_check(a: float, b: float, window: Signal | None = None,
                      threshold: float = 1e-3) -> GaborFrameReport:
    """Extreme frame-operator eigenvalues on ``aℤ × bℤ``.

    The verdict is positive when ``A > threshold · B``.
    """
    window = gaussian_window() if window is None else window
    G, _ = gabor_atoms(a, b, window)
    S = window.h * (G @ np.conj(G).T)
    fb: FrameBounds = frame_bounds(S, floor=threshold)
    return GaborFrameReport(fb.A, fb.B, fb.is_frame, G.shape[1])


@dataclass(frozen=True)
class Reconstruction:
    signal: Signal
    error: float
    iterations: int


def gabor_reconstruct(f: Signal, a: float, b: float, window: Signal | None = None,
                      tol: float = 1e-13) -> Reconstruction:
    """Recover ``f`` from ``(f, g_mn)`` by conjugate gradients on the frame operator."""
    window = gaussian_window(f.L, f.h) if window is None else window
    G, _ = gabor_atoms(a, b, window)
    h = f.h
    coeffs = h * (np.conj(G).T @ f.samples)
    rhs = G @ coeffs
    S = LinearOperator((f.L, f.L), matvec=lambda v: h * (G @ (np.conj(G).T @ v)), dtype=complex)
    count = [0]

    def tick(_):
        count[0] += 1

    x, info = cg(S, rhs, rtol=tol, atol=0.0, maxiter=10 * f.L, callback=tick)
    if info != 0:
        raise ArithmeticError(f"conjugate gradients did not converge (info={info})")
    rec = Signal(x, h)
    return Reconstruction(rec, (rec - f).norm() / f.norm(), count[0])


def random_gaussian_mixture(rng: np.random.Generator, n_terms: int = 4, L: int = DEFAULT_L,
                            h: float = DEFAULT_H, spread: float = 2.0) -> Signal:
    """Sum of randomly shifted and modulated Gaussians, well inside the window."""
    g = gaussian_window(L, h)
    out = np.zeros(L, dtype=complex)
    for _ in range(n_terms):
        q, p = rng.uniform(-spread, spread, 2)
        c = rng.normal() + 1j * rng.normal()
        out += c * heisenberg_rho(q, p, g).samples
    return Signal(out, h)


# ---------------------------------------------------------------------------
# sampled reproducing operator and its pointwise bound on ℝ²
# ---------------------------------------------------------------------------

def lattice_points(a: float, b: float, Q: float) -> np.ndarray:
    m = np.arange(-int(np.floor(Q / a)), int(np.floor(Q / a)) + 1) * a
    n = np.arange(-int(np.floor(Q / b)), int(np.floor(Q / b)) + 1) * b
    return np.stack(np.meshgrid(m, n, indexing="ij"), axis=-1).reshape(-1, 2)


def apply_T3_r2(F_at_lattice: np.ndarray, points: np.ndarray, cell: float, xs: np.ndarray,
                kernel=gaussian_kernel) -> np.ndarray:
    """``Σ_i |cell| F(x_i) σ̄(x_i, x_i⁻¹x) φ(x_i⁻¹x)`` with rectangular cells."""
    return convolve_nodes(HeisenbergGroup(), points, np.full(len(points), cell),
                          F_at_lattice, kernel, xs)


def box(a: float, b: float, n: int = 5) -> np.ndarray:
    """Sample points of the cell ``[−a/2, a/2] × [−b/2, b/2]``."""
    q = np.linspace(-a / 2, a / 2, n)
    p = np.linspace(-b / 2, b / 2, n)
    return np.stack(np.meshgrid(q, p, indexing="ij"), axis=-1).reshape(-1, 2)


def oscillations_r2(x: np.ndarray, ks: np.ndarray, kernel=gaussian_kernel) -> tuple[np.ndarray, np.ndarray]:
    """Sampled ``osc^r`` and ``osc^ℓ`` of the kernel at the points ``x``."""
    grp = HeisenbergGroup()
    X = x[:, None]
    K = ks[None]
    phi = kernel(x)[:, None]
    right = grp.sigma(X, K) * kernel(X + K) - phi
    left = np.conj(grp.sigma(K, X - K)) * kernel(X - K) - phi
    return np.abs(right).max(axis=1), np.abs(left).max(axis=1)


def t3_nodewise_check(F: np.ndarray, grid: PhaseGrid, a: float, b: float,
                      kernel=gaussian_kernel) -> tuple[np.ndarray, np.ndarray]:
    """``|T₃F − F|`` and its bound ``(|F|*osc^r)*(|φ|+osc^ℓ) + |F|*osc^ℓ`` at every node.

    ``F`` holds values of a function satisfying the reproducing formula on the
    grid nodes; lattice values are read off the grid, so ``a`` and ``b`` must be
    multiples of the grid spacing.
    """
    X = grid.nodes
    step = X[grid.n, 0] - X[0, 0]
    for v in (a, b):
        if abs(v / step - round(v / step)) > 1e-9:
            raise ParameterError("lattice steps must be multiples of the grid spacing")
    pts = lattice_points(a, b, grid.Q)
    idx = np.rint((pts + grid.Q) / step).astype(int)
    flat = idx[:, 0] * grid.n + idx[:, 1]
    T3 = apply_T3_r2(F[flat], pts, a * b, X, kernel)
    diff = np.abs(T3 - F)
    ks = box(a, b)
    N = grid.size
    osc_r = np.empty((N, N))
    osc_l = np.empty((N, N))
    phi = np.empty((N, N))
    rows = max(1, 200_000 // N)
    for y0 in range(0, N, rows):
        D = (X[None, :] - X[y0:y0 + rows, None]).reshape(-1, 2)      # [y, x] → x − y
        r, l = oscillations_r2(D, ks, kernel)
        n = len(D) // N
        osc_r[y0:y0 + n], osc_l[y0:y0 + n] = r.reshape(n, N), l.reshape(n, N)
        phi[y0:y0 + n] = np.abs(kernel(D)).reshape(n, N)
    wF = grid.weights * np.abs(F)
    g1 = wF @ osc_r
    g2 = wF @ osc_l
    g3 = (grid.weights * g1) @ (phi + osc_l)
    return diff, g3 + g2
