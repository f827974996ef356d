"""Experiment drivers returning plain rows and a summary dictionary.

Each driver takes an :class:`ExperimentConfig` and returns an
:class:`Outcome`; the command-line runner only serializes these.  Rows hold
numbers that depend on the configuration and seed alone, never on timing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .bergman import BergmanParams, HoloFunction, hs_norm, hs_weights, validate_params
from .cocycle import BASE_POINTS, sigma_batch, winding_batch
from .frames import (
    LatticeOperators,
    analyze,
    frame_bounds,
    generate_lattice,
    neumann_solve,
    region_operator,
    synthesize,
)
from .group import haar_grid, inv, mul, random_elements
from .oscillation import osc_derivative_bound
from .representation import integrability_check, rho_coeffs

TASKS = ("cocycle-audit", "frame-experiment", "reconstruct", "gabor-validate", "integrability")


@dataclass
class ExperimentConfig:
    task: str = "frame-experiment"
    n: int = 1
    s: tuple = (2.5,)
    p: float = 2.0
    alpha: float = 0.0
    eps: tuple = (0.4, 0.2, 0.1)
    R: float = math.sqrt(0.995)
    K: int = 16
    pairs: int = 1000
    probes: int = 5
    t: tuple = (-0.5, -2.4)
    radii_u: tuple = (4.0, 6.0, 8.0, 10.0)
    grid_r: int = 24
    grid_theta: int = 16
    grid_k: int = 3
    gabor_lattices: tuple = ((1.0, 0.5), (2.0, 1.0))
    seed: int = 0
    reference_untwisted: bool = False
    out: str = "results"

    def validate(self) -> "ExperimentConfig":
        from .bergman import ParameterError

        if self.task not in TASKS:
            raise ParameterError(f"unknown task {self.task!r}; choose from {', '.join(TASKS)}")
        if self.n != 1:
            from .group import UnsupportedDimensionError

            raise UnsupportedDimensionError(f"numeric engine supports n = 1 only (got n = {self.n})")
        if self.task in ("frame-experiment", "reconstruct"):
            for s in self.s:
                validate_params(BergmanParams(self.p, self.alpha, s, self.n))
            if not 0 < self.R < 1:
                raise ParameterError(f"need 0 < R < 1, got R = {self.R}")
            if any(e <= 0 for e in self.eps):
                raise ParameterError("every eps must be positive")
        elif any(s <= self.n for s in self.s):
            raise ParameterError(f"need s > n = {self.n}")
        if self.reference_untwisted and any(float(s) != int(s) for s in self.s):
            raise ParameterError("the untwisted reference needs integer s")
        if self.K < 1:
            raise ParameterError("K must be positive")
        return self

    def as_dict(self) -> dict:
        return {f.name: (list(v) if isinstance(v := getattr(self, f.name), tuple) else v)
                for f in fields(self)}


_TUPLE_FIELDS = {f.name for f in fields(ExperimentConfig) if isinstance(f.default, tuple)}


def parse_config_text(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """``key = value`` lines; ``#`` starts a comment, lists are comma separated.

    Lattice pairs for the Gabor task are written ``1.0x0.5, 2.0x1.0``.
    """
    from .bergman import ParameterError

    cfg = base or ExperimentConfig()
    known = {f.name: f for f in fields(ExperimentConfig)}
    updates = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ParameterError(f"line {lineno}: unknown key {key!r}")
        try:
            updates[key] = _convert(key, value, getattr(cfg, key))
        except ValueError as exc:
            raise ParameterError(f"line {lineno}: bad value for {key}: {exc}") from None
    return replace(cfg, **updates)


def _number(text: str) -> float:
    text = text.strip().lower()
    if text == "pi":
        return math.pi
    if text.startswith("sqrt(") and text.endswith(")"):
        return math.sqrt(float(text[5:-1]))
    return float(text)


def _convert(key: str, value: str, current):
    if key == "gabor_lattices":
        pairs = []
        for item in value.split(","):
            a, b = item.lower().split("x")
            pairs.append((_number(a), _number(b)))
        return tuple(pairs)
    if key in _TUPLE_FIELDS:
        return tuple(_number(v) for v in value.split(",") if v.strip())
    if isinstance(current, bool):
        if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
            raise ValueError("expected a boolean")
        return value.lower() in ("true", "1", "yes")
    if isinstance(current, int):
        return int(value)
    if isinstance(current, float):
        return _number(value)
    return value


@dataclass
class Outcome:
    columns: tuple
    rows: list
    summary: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# cocycle audit
# ---------------------------------------------------------------------------

def cocycle_audit(cfg: ExperimentConfig) -> Outcome:
    """Per pair: winding, multiplier, and the worst cocycle-identity residual."""
    rng = np.random.default_rng(cfg.seed)
    rows = []
    summary = {}
    for s in cfg.s:
        x, y, z = (random_elements(rng, cfg.pairs) for _ in range(3))
        e = np.broadcast_to(np.eye(2, dtype=complex), x.shape)
        ms = [winding_batch(x, y, z0) for z0 in BASE_POINTS]
        m, wres = ms[0]
        base_ok = all(np.array_equal(m, mj) for mj, _ in ms[1:])
        sxy = sigma_batch(x, y, s)
        xy, yz = mul(x, y), mul(y, z)
        ident = np.abs(sigma_batch(xy, z, s) * sxy - sigma_batch(x, yz, s) * sigma_batch(y, z, s))
        unit = np.maximum(np.abs(sigma_batch(x, e, s) - 1), np.abs(sigma_batch(e, x, s) - 1))
        xi = inv(x)
        sym = np.abs(sigma_batch(x, xi, s) - sigma_batch(xi, x, s))
        recip = np.abs(1 / sxy - np.conj(sxy))
        residual = np.maximum.reduce([ident, unit, sym, recip])
        for i in range(cfg.pairs):
            rows.append((s, i, i, int(m[i]), sxy[i].real, sxy[i].imag, residual[i], wres[i]))
        summary[f"s={s:g}"] = {
            "max_cocycle_identity": float(ident.max()),
            "max_unit": float(unit.max()),
            "max_inverse_symmetry": float(sym.max()),
            "max_reciprocal": float(recip.max()),
            "max_winding_rounding": float(np.max([r for _, r in ms])),
            "base_point_independent": bool(base_ok),
            "max_abs_sigma_minus_one": float(np.abs(sxy - 1).max()),
        }
    return Outcome(("s", "x_id", "y_id", "m", "sigma_re", "sigma_im", "residual", "winding_rounding"),
                   rows, summary)


def operator_cocycle_residual(s: float, pairs: int = 100, degree: int = 8, seed: int = 0,
                              kmax: int = 60) -> float:
    """Worst ``‖ρ(xy)u − σ(x,y)ρ(x)ρ(y)u‖ / ‖u‖`` over random pairs and vectors.

    ``ρ(y)u`` is carried to degree ``kmax`` before ``ρ(x)`` acts, so both sides
    are compared on degrees ``<= degree`` where the truncation is negligible.
    """
    from .representation import rho_matrix

    rng = np.random.default_rng(seed)
    x = random_elements(rng, pairs, 0.5)
    y = random_elements(rng, pairs, 0.5)
    h = hs_weights(s, degree)
    worst = 0.0
    sig = sigma_batch(x, y, s)
    Rx = rho_matrix(s, x, degree, kmax)
    for i in range(pairs):
        u = HoloFunction(rng.normal(size=degree + 1) + 1j * rng.normal(size=degree + 1))
        lhs = rho_coeffs(s, mul(x[i:i + 1], y[i:i + 1]), u, degree)[0]
        ry = rho_coeffs(s, y[i:i + 1], u, kmax)[0]
        rhs = sig[i] * (Rx[i] @ ry)
        worst = max(worst, float(np.sqrt(np.sum(np.abs(lhs - rhs) ** 2 * h)) / hs_norm(u, s)))
    return worst


# ---------------------------------------------------------------------------
# frames on the disc
# ---------------------------------------------------------------------------

def probe_vectors(rng: np.random.Generator, count: int, u: HoloFunction) -> list:
    """Random rapidly decaying polynomials plus the analyzing vector."""
    k = np.arange(5)
    out = [HoloFunction((rng.normal(size=5) + 1j * rng.normal(size=5)) * 0.5 ** k) for _ in range(count)]
    return out + [u]


def analyzing_vector(s: float) -> HoloFunction:
    """The constant function, normalized so that ``c² ‖u‖² = 1``."""
    return HoloFunction([math.sqrt(s - 1.0)])


def _rel(T: np.ndarray, v: HoloFunction, h: np.ndarray, K: int) -> float:
    c = v.padded(K).coeffs
    return float(np.sqrt(np.sum(np.abs(T @ c) ** 2 * h) / np.sum(np.abs(c) ** 2 * h)))


def roundtrip(lat, ops: LatticeOperators, u: HoloFunction, s: float, f: HoloFunction):
    """Analyze ``f`` on the lattice, synthesize with the masses, invert ``T3``."""
    K = ops.K
    data = analyze(f, lat, u, s)
    g = synthesize(lat.masses * data, lat, u, s, K).coeffs
    sol = neumann_solve(lambda v: ops.T3 @ v, g, tol=1e-13)
    fc = f.padded(K).coeffs
    h = ops.h
    err = float(np.sqrt(np.sum(np.abs(sol.x - fc) ** 2 * h) / np.sum(np.abs(fc) ** 2 * h)))
    return err, sol


def frame_experiment(cfg: ExperimentConfig, with_roundtrip: bool = True,
                     with_constant: bool = True) -> Outcome:
    """Frame bounds, contraction ratios and round trips over the ``(s, ε)`` sweep."""
    from .untwisted import reference_deviation, reference_frame_bounds, reference_operators

    rng = np.random.default_rng(cfg.seed)
    rows, extra = [], {}
    cols = ["s", "p", "alpha", "eps", "atoms", "A", "B", "B_over_A",
            "dev_T1", "dev_T2", "dev_T3", "ratio_T1", "ratio_T3",
            "trunc_ratio_T1", "trunc_ratio_T3", "recon_error", "neumann_iterations",
            "neumann_max_ratio", "C_eps"]
    if cfg.reference_untwisted:
        cols += ["ref_A", "ref_B", "ref_dev_T3", "max_abs_T_diff", "ref_recon_error"]
    for s in sorted(cfg.s):
        u = analyzing_vector(s)
        probes = probe_vectors(rng, cfg.probes, u)
        P = region_operator(cfg.R, u, s, cfg.K)
        h = hs_weights(s, cfg.K)
        eye = np.eye(cfg.K + 1)
        for eps in sorted(cfg.eps, reverse=True):
            lat = generate_lattice(eps, cfg.R)
            ops = LatticeOperators.from_polar(lat, u, s, cfg.K)
            fb = frame_bounds(ops.hermitian_form(3))
            ratios = {k: max(_rel(ops.matrix(k) - eye, v, h, cfg.K) for v in probes) for k in (1, 3)}
            trunc = {k: max(_rel(ops.matrix(k) - P, v, h, cfg.K) for v in probes) for k in (1, 3)}
            if with_roundtrip:
                err, sol = roundtrip(lat, ops, u, s, HoloFunction([0, 0, 1]))
                iters, rmax = sol.iterations, float(np.max(sol.ratios)) if len(sol.ratios) else 0.0
            else:
                err, iters, rmax = math.nan, 0, math.nan
            C = osc_derivative_bound(u, s, eps).C if with_constant and s > 2 else math.nan
            row = [s, cfg.p, cfg.alpha, eps, lat.size, fb.A, fb.B, fb.ratio,
                   ops.deviation_norm(1), ops.deviation_norm(2), ops.deviation_norm(3),
                   ratios[1], ratios[3], trunc[1], trunc[3], err, iters, rmax, C]
            if cfg.reference_untwisted:
                ref = reference_operators(lat, u.coeffs, int(s), cfg.K)
                rA, rB = reference_frame_bounds(ref)
                diff = max(float(np.abs(ops.matrix(k) - getattr(ref, f"T{k}")).max()) for k in (1, 2, 3))
                rerr = _reference_roundtrip_error(lat, ref, u, int(s), cfg.K)
                row += [rA, rB, reference_deviation(ref, 3), diff, rerr]
            rows.append(tuple(row))
            extra[f"s={s:g},eps={eps:g}"] = {"lattice": lat.manifest()}
    summary = {"haar_normalization": "dx = (1-|z|^2)^-2 dA/pi dk/(2pi), formal dimension s-1",
               "region_radius": cfg.R}
    return Outcome(tuple(cols), rows, summary, extra)


def _reference_roundtrip_error(lat, ref, u: HoloFunction, s: int, K: int) -> float:
    from .untwisted import reference_roundtrip

    f = np.zeros(3, dtype=complex)
    f[2] = 1.0
    g = reference_roundtrip(lat, ref, u.coeffs, s, f, K)
    fc = np.zeros(K + 1, dtype=complex)
    fc[2] = 1.0
    return float(np.sqrt(np.sum(np.abs(g - fc) ** 2 * ref.h) / np.sum(np.abs(fc) ** 2 * ref.h)))


def reconstruct(cfg: ExperimentConfig) -> Outcome:
    """Round trip for ``f = z²`` and a few random probes at every ``(s, ε)``."""
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for s in sorted(cfg.s):
        u = analyzing_vector(s)
        tests = [("z^2", HoloFunction([0, 0, 1]))] + [
            (f"probe{i}", v) for i, v in enumerate(probe_vectors(rng, cfg.probes, u)[:-1])]
        for eps in sorted(cfg.eps, reverse=True):
            lat = generate_lattice(eps, cfg.R)
            ops = LatticeOperators.from_polar(lat, u, s, cfg.K)
            for name, f in tests:
                err, sol = roundtrip(lat, ops, u, s, f)
                rows.append((s, eps, name, err, sol.iterations,
                             float(np.max(sol.ratios)) if len(sol.ratios) else 0.0))
    return Outcome(("s", "eps", "function", "recon_error", "neumann_iterations", "neumann_max_ratio"), rows)


# ---------------------------------------------------------------------------
# integrability and Gabor
# ---------------------------------------------------------------------------

def integrability(cfg: ExperimentConfig) -> Outcome:
    """``‖W_u(u)‖_{L^p_t}`` on grids of growing radius for each ``t``."""
    rows = []
    radii = [math.sqrt(-math.expm1(-ur)) for ur in cfg.radii_u]
    for s in sorted(cfg.s):
        u = analyzing_vector(s)
        grids = [haar_grid(R, cfg.grid_r, cfg.grid_theta, cfg.grid_k) for R in radii]
        for t in cfg.t:
            rep = integrability_check(u, u, cfg.p, t, grids, s)
            for R, ur, val in zip(rep.radii, cfg.radii_u, rep.values):
                rows.append((s, cfg.p, t, ur, R, val, rep.convergent, rep.predicted))
    return Outcome(("s", "p", "t", "u_max", "R", "norm", "convergent", "predicted"), rows)


def gabor_validate(cfg: ExperimentConfig) -> Outcome:
    from .gabor import PhaseGrid, gabor_frame_check, gabor_reconstruct, random_gaussian_mixture, \
        stft_reproducing_residual

    rng = np.random.default_rng(cfg.seed)
    f = random_gaussian_mixture(rng)
    rows = []
    for a, b in cfg.gabor_lattices:
        rep = gabor_frame_check(a, b)
        err = gabor_reconstruct(f, a, b).error if rep.is_frame else math.nan
        rows.append((a, b, a * b, rep.n_atoms, rep.A, rep.B, rep.is_frame, err))
    grid = PhaseGrid.square(6.0, 61)
    idx = rng.choice(grid.size, 200, replace=False)
    summary = {"stft_reproducing_residual": stft_reproducing_residual(f, grid, idx)}
    return Outcome(("a", "b", "ab", "atoms", "A", "B", "is_frame", "recon_error"), rows, summary)


DRIVERS = {
    "cocycle-audit": cocycle_audit,
    "frame-experiment": frame_experiment,
    "reconstruct": reconstruct,
    "gabor-validate": gabor_validate,
    "integrability": integrability,
}


def run_task(cfg: ExperimentConfig) -> Outcome:
    return DRIVERS[cfg.task](cfg.validate())
