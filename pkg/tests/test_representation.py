import numpy as np
import pytest
from hypothesis import given, strategies as st

from coorbit.bergman import HoloFunction, ParameterError, hs_inner, hs_norm
from coorbit.experiments import operator_cocycle_residual
from coorbit.group import GroupElement, haar_grid, origin_image, random_elements, rotation, section
from coorbit.representation import (
    Functional,
    GFunction,
    InsufficientTruncationError,
    TruncationWarning,
    calibrate_analyzing,
    formal_dimension,
    g_lp_norm,
    g_lp_report,
    integrability_check,
    lie_derivative,
    radius_for_tail,
    rho_apply,
    rho_coeffs,
    rho_eval,
    rho_inverse_apply,
    rho_star_apply,
    wavelet,
    wavelet_batch,
)

E = GroupElement.identity()


def poly(rng, deg, decay=0.6):
    k = np.arange(deg + 1)
    return HoloFunction((rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1)) * decay ** k)


def test_identity_acts_trivially(rng):
    u = poly(rng, 5)
    assert np.allclose(rho_apply(2.5, E, u, kmax=5).coeffs, u.coeffs, atol=1e-15)
    with pytest.raises(ParameterError):
        rho_apply(1.0, E, u)


@given(st.floats(-np.pi, np.pi), st.integers(0, 6), st.sampled_from([2.5, np.pi, 3.0]))
def test_rotation_phase(theta, k, s):
    out = rho_apply(s, rotation(theta), HoloFunction.monomial(k), kmax=k + 2).coeffs
    expected = np.zeros(k + 3, dtype=complex)
    expected[k] = np.exp(-1j * theta * (s + 2 * k))
    assert np.allclose(out, expected, atol=1e-12)


def test_series_matches_pointwise_reprojection(rng):
    s = 2.5
    for x in random_elements(rng, 4, 0.5):
        u = poly(rng, 4)
        a = rho_apply(s, GroupElement(x), u, kmax=50)
        b = rho_apply(s, GroupElement(x), u, kmax=50, method="quadrature")
        assert np.max(np.abs(a.coeffs - b.coeffs)) < 1e-10
        z = np.array([0.1, -0.3j, 0.2 + 0.2j])
        assert np.allclose(a(z), rho_eval(s, GroupElement(x), u, z), atol=1e-9)


def test_reprojection_warns_when_truncated():
    x = section(0.95, 0)
    with pytest.warns(TruncationWarning):
        rho_apply(2.5, x, HoloFunction([1]), kmax=5, method="quadrature")


@pytest.mark.parametrize("s", [2.5, np.pi, 3.0])
def test_operator_level_cocycle(s):
    assert operator_cocycle_residual(s, pairs=30, degree=8, seed=1) < 1e-8


def test_unitarity_and_dual_action(rng):
    s = 2.5
    for x in random_elements(rng, 5, 0.5):
        X = GroupElement(x)
        lam, v = Functional(poly(rng, 4)), poly(rng, 4)
        lhs = rho_star_apply(s, X, lam, kmax=90).pair(v.padded(90), s)
        rhs = lam.pair(rho_inverse_apply(s, X, v, kmax=90), s)
        assert abs(lhs - rhs) < 1e-8 * hs_norm(lam.vec, s) * hs_norm(v, s)
        assert abs(hs_norm(rho_apply(s, X, v, kmax=120), s) - hs_norm(v, s)) < 1e-8
    assert np.allclose(rho_star_apply(s, E, lam).vec.coeffs, lam.vec.coeffs)


def test_dual_cocycle(rng):
    s = np.pi
    x, y = (GroupElement(m) for m in random_elements(rng, 2, 0.4))
    from coorbit.cocycle import sigma_of

    lam = Functional(poly(rng, 3))
    lhs = rho_star_apply(s, x @ y, lam, kmax=10).vec
    inner = rho_star_apply(s, y, lam, kmax=80)
    rhs = rho_star_apply(s, x, inner, kmax=10).vec.scaled(sigma_of(x, y, s).sigma)
    assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) < 1e-8


def test_wavelet_of_constants_at_identity():
    assert abs(wavelet(HoloFunction([1]), HoloFunction([1]), E, 2.5)[0] - 1) < 1e-15
    with pytest.raises(ValueError):
        wavelet(HoloFunction([0]), HoloFunction([1]), E, 2.5)


@pytest.mark.parametrize("s", [2.5, np.pi, 3.0])
def test_wavelet_closed_form(s, rng):
    g = haar_grid(0.99, 12, 9, 5)
    f = poly(rng, 6, 0.9)
    W = wavelet_batch(HoloFunction([1]), f, g.elements, s)
    z = origin_image(g.elements)
    ref = (1 - np.abs(z) ** 2) ** (s / 2) * np.abs(f(z))
    assert np.max(np.abs(np.abs(W) - ref)) < 1e-8


def test_wavelet_decay_envelope(rng):
    s = 2.5
    u, v = poly(rng, 3), poly(rng, 3)
    r = 1 - np.logspace(-1, -8, 40)
    x = np.stack([section(ri, 0).M for ri in r])
    w = np.abs(wavelet_batch(u, v, x, s))
    env = (1 - r ** 2) ** (s / 2) * (1 - np.log(1 - r ** 2))
    C = (w / env).max()
    assert np.all(w <= C * env) and np.isfinite(C)
    # the envelope is sharp up to a bounded factor
    assert (w / env)[-1] > 1e-3 * C


def test_g_lp_norm_of_indicator():
    R = 0.8
    g = haar_grid(R, 24, 4, 1)
    F = GFunction(np.ones(g.size), g)
    assert abs(g_lp_norm(F, 1, 3) - (R ** 2 - R ** 4 / 2)) < 1e-12
    assert g_lp_norm(GFunction(np.zeros(g.size), g), 2) == 0
    with pytest.raises(ParameterError):
        g_lp_norm(F, 0.5)


def test_k_phase_invariant_norm_independent_of_nk():
    vals = []
    for nk in (1, 3, 5):
        g = haar_grid(0.9, 16, 8, nk)
        vals.append(g_lp_norm(GFunction(np.exp(1j * g.theta) * np.abs(g.z), g), 2))
    assert np.ptp(vals) < 1e-13


def test_formal_dimension_and_calibration():
    s = 2.5
    R = radius_for_tail(s, 2, 0, 1e-8)
    g = haar_grid(R, 48, 5, 3)
    u = HoloFunction([1])
    cal = calibrate_analyzing(u, s, g)
    assert abs(cal.c2 - 1 / formal_dimension(s)) < 1e-6
    assert abs(calibrate_analyzing(u.scaled(2), s, g).c2 - cal.c2) < 1e-12 * cal.c2
    assert abs(hs_norm(cal.u_normalized, s) - np.sqrt(s - 1)) < 1e-5
    with pytest.raises(InsufficientTruncationError):
        calibrate_analyzing(u, s, haar_grid(0.5, 8, 5, 3))


def test_orthogonality_relation(rng):
    s = 2.5
    R = radius_for_tail(s, 2, 0, 1e-6)
    g = haar_grid(R, 64, 13, 7)
    c2 = 1 / formal_dimension(s)
    for _ in range(5):
        u1, u2, v1, v2 = (poly(rng, 2) for _ in range(4))
        lhs = np.sum(g.weights * wavelet_batch(u1, v1, g.elements, s)
                     * np.conj(wavelet_batch(u2, v2, g.elements, s)))
        rhs = c2 * hs_inner(u2, u1, s) * hs_inner(v1, v2, s)
        scale = c2 * hs_norm(u1, s) * hs_norm(u2, s) * hs_norm(v1, s) * hs_norm(v2, s)
        assert abs(lhs - rhs) / scale < 1e-3


def test_radius_for_tail_monotone_and_rejects_divergence():
    assert radius_for_tail(2.5, 2, 0, 1e-8) > radius_for_tail(2.5, 2, 0, 1e-4)
    with pytest.raises(ParameterError):
        radius_for_tail(2.5, 2, -2.4, 1e-4)


def test_integrability_dichotomy():
    s = 2.5
    u = HoloFunction([1])
    grids = [haar_grid(np.sqrt(-np.expm1(-um)), 24, 4, 1) for um in (4, 6, 8, 10, 12)]
    good = integrability_check(u, u, 2, -0.5, grids, s)
    bad = integrability_check(u, u, 2, -2.4, grids, s)
    assert good.convergent and good.predicted
    assert not bad.convergent and not bad.predicted
    assert all(b > a for a, b in zip(bad.values, bad.values[1:]))
    # u = v = 1, p = 2, t = 0: ∫ (1-r²)^{s-2} dv = 1/(s-1)
    t0 = integrability_check(u, u, 2, 0.0, grids, s)
    assert abs(t0.values[-1] ** 2 - 1 / (s - 1)) < 1e-5


def test_lie_derivative_of_constant():
    # ρ(r_θ)1 = e^{-isθ}, so dρ(X3)1 = -is
    d = lie_derivative(HoloFunction([1]), 2, 2.5)
    assert abs(d.coeffs[0] + 2.5j) < 1e-8 and np.allclose(d.coeffs[1:], 0, atol=1e-8)


def test_gfunction_validation():
    g = haar_grid(0.5, 2, 2, 1)
    with pytest.raises(ValueError):
        GFunction(np.ones(3), g)
    with pytest.raises(TypeError):
        GFunction(np.ones(g.size), g).evaluate(np.eye(2)[None])


def test_norm_report_tail_small_for_wide_grid():
    s = 2.5
    g = haar_grid(radius_for_tail(s, 2, 0, 1e-8), 48, 5, 3)
    rep = g_lp_report(GFunction.from_wavelet(HoloFunction([1]), HoloFunction([1]), s, g), 2, 0)
    assert rep.tail < 1e-6
