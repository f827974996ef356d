import numpy as np
import pytest
from hypothesis import given, strategies as st

from coorbit.bergman import ParameterError
from coorbit.gabor import (
    HeisenbergGroup,
    PhaseGrid,
    ShiftError,
    Signal,
    frame_operator,
    gabor_frame_check,
    gabor_reconstruct,
    gaussian_kernel,
    gaussian_window,
    heisenberg_rho,
    random_gaussian_mixture,
    stft,
    stft_reproducing_residual,
    t3_nodewise_check,
    twisted_convolve_r2,
)

# composite shifts stay within ±2 so the mixture (centres in ±1) keeps its tail
# away from the periodic boundary at ±6, where wraparound breaks the phase law
shift = st.floats(-1.0, 1.0)


@pytest.fixture(scope="module")
def signal():
    return random_gaussian_mixture(np.random.default_rng(5), spread=1.0)


def test_window():
    g = gaussian_window()
    assert abs(g.norm() - 1) < 1e-14
    assert g.end_mass() < 1e-10
    with pytest.raises(ParameterError):
        gaussian_window(24, 1 / 12)


def test_identity_shift(signal):
    assert np.allclose(heisenberg_rho(0, 0, signal).samples, signal.samples, atol=1e-15)
    with pytest.raises(ShiftError):
        heisenberg_rho(6.0, 0, signal)


@given(shift, shift, shift, shift)
def test_composition_phase(q, p, q2, p2):
    f = random_gaussian_mixture(np.random.default_rng(5), spread=1.0)
    lhs = heisenberg_rho(q + q2, p + p2, f).samples
    rhs = heisenberg_rho(q, p, heisenberg_rho(q2, p2, f)).samples
    sig = HeisenbergGroup().sigma(np.array([q, p]), np.array([q2, p2]))
    assert np.abs(lhs - sig * rhs).max() < 1e-10


@given(shift, shift)
def test_inverse_phase(q, p):
    # ρ(x)ρ(x⁻¹) = σ̄(x, x⁻¹) identity
    f = random_gaussian_mixture(np.random.default_rng(6), spread=1.0)
    out = heisenberg_rho(q, p, heisenberg_rho(-q, -p, f)).samples
    sig = HeisenbergGroup().sigma(np.array([q, p]), np.array([-q, -p]))
    assert np.abs(out - np.conj(sig) * f.samples).max() < 1e-10


def test_stft_of_window_is_kernel():
    pts = np.random.default_rng(1).uniform(-3, 3, (50, 2))
    assert np.abs(stft(gaussian_window(), pts) - gaussian_kernel(pts)).max() < 1e-12


def test_frame_verdicts(signal):
    good = gabor_frame_check(1.0, 0.5)
    ev = np.linalg.eigvalsh(frame_operator(1.0, 0.5, gaussian_window()))
    assert good.is_frame and good.A > 0 and good.ratio < 10
    assert abs(good.A - ev[0]) < 1e-10 and abs(good.B - ev[-1]) < 1e-10
    assert gabor_reconstruct(signal, 1.0, 0.5).error < 1e-6
    bad = gabor_frame_check(2.0, 1.0)
    assert not bad.is_frame and bad.A < 1e-3 * bad.B
    with pytest.raises(ParameterError):
        gabor_frame_check(0.3, 0.5)


def test_reproducing_formula(signal):
    grid = PhaseGrid.square(6.0, 61)
    idx = np.random.default_rng(2).choice(grid.size, 100, replace=False)
    assert stft_reproducing_residual(signal, grid, idx) < 1e-6


def test_generic_and_explicit_convolution_agree(signal):
    grid = PhaseGrid.square(4.0, 21)
    F = stft(signal, grid.nodes)
    xs = grid.nodes[::37]
    generic = twisted_convolve_r2(F, grid, xs=xs)
    explicit = np.array([
        np.sum(grid.weights * F * gaussian_kernel(x - grid.nodes)
               * np.exp(-2j * np.pi * (x[1] - grid.nodes[:, 1]) * grid.nodes[:, 0]))
        for x in xs])
    assert np.allclose(generic, explicit, rtol=1e-13, atol=1e-15)


def test_oscillation_bound_for_sampled_operator(signal):
    grid = PhaseGrid.square(4.0, 33)
    diff, bound = t3_nodewise_check(stft(signal, grid.nodes), grid, 1.0, 0.5)
    assert np.all(diff <= bound)


def test_signal_validation():
    with pytest.raises(ValueError):
        Signal(np.ones((2, 2)))
