import warnings

import numpy as np
import pytest

from coorbit.bergman import HoloFunction, hs_norm, hs_weights
from coorbit.frames import (
    LatticeOperators,
    NonContractionError,
    SequenceNorm,
    analyze,
    apply_T,
    build_bupu,
    density_report,
    frame_bounds,
    generate_lattice,
    neumann_solve,
    operators_from_bupu,
    polar_cells_explicit,
    region_operator,
    synthesize,
)
from coorbit.group import haar_grid, haar_mass_disc, in_U_eps_batch, inv, mul
from coorbit.representation import GFunction, rho_coeffs, wavelet_batch

S = 2.5
U = HoloFunction([np.sqrt(S - 1)])


@pytest.fixture(scope="module")
def lat04():
    return generate_lattice(0.4, 0.9)


@pytest.fixture(scope="module")
def bupu04():
    g = haar_grid(0.9, 12, 16, 9)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return build_bupu(generate_lattice(0.4, 0.9), g)


def test_lattice_masses_partition_region(lat04):
    assert abs(lat04.masses.sum() - haar_mass_disc(0.81)) < 1e-12 * lat04.masses.sum()
    assert lat04.NK % 2 == 1
    assert np.all(np.abs(lat04.z) <= 0.9)


def test_lattice_growth_under_refinement():
    n = [generate_lattice(e, 0.95).size for e in (0.4, 0.2, 0.1)]
    for a, b in zip(n, n[1:]):
        assert 3.5 * 2 <= b / a <= 4.5 * 2


def test_single_point_lattice():
    one = generate_lattice(7.0, 0.1)
    assert one.size == 1 and one.z[0] == 0
    assert abs(one.masses[0] - haar_mass_disc(0.01)) < 1e-15
    assert density_report(one, haar_grid(0.1, 3, 4, 3))["dense"]


def test_density_and_overlap(lat04):
    rep = density_report(lat04, max_nodes=400)
    assert rep["dense"] and rep["uncovered"] == 0
    assert 1 <= rep["overlap"] < 200
    # every lattice point covers itself
    X = lat04.elements(0, 50)
    assert in_U_eps_batch(mul(inv(X), X), lat04.eps).inside.all()


def test_locate_inverts_elements(lat04):
    idx = np.arange(0, lat04.size, 97)
    assert np.array_equal(lat04.locate(lat04.elements_at(idx)), idx)


def test_bupu_support_and_mass(bupu04):
    g = bupu04.grid
    y = mul(inv(bupu04.points[bupu04.assign]), g.elements)
    assert in_U_eps_batch(y, 0.4 * (1 + 1e-9)).inside.all()
    assert abs(bupu04.c.sum() - g.weights.sum()) < 1e-12 * g.weights.sum()


def test_polar_collapse_matches_explicit_cells(lat04):
    K = 10
    a = LatticeOperators.from_polar(lat04, U, S, K)
    nodes, w, owner = polar_cells_explicit(lat04)
    b = LatticeOperators.from_cells(lat04.elements(), lat04.masses, nodes, w, owner, U, S, K)
    for k in (1, 2, 3):
        assert np.abs(a.matrix(k) - b.matrix(k)).max() < 1e-12


def test_grid_level_operators_match_coefficients(bupu04):
    K = 120
    ops = operators_from_bupu(bupu04, U, S, K)
    v = HoloFunction([0.3, 0.2, 0.1j])
    F = GFunction.from_wavelet(U, v, S, bupu04.grid)
    for k in (1, 2, 3):
        T = apply_T(k, F, bupu04, U, S, kmax=K)
        ref = wavelet_batch(U, ops.apply(k, v), bupu04.grid.elements, S)
        assert np.abs(T.values - ref).max() < 1e-8 * np.abs(ref).max()


def test_single_point_T3_collapses():
    one = generate_lattice(7.0, 0.1)
    g = haar_grid(0.1, 3, 4, 3)
    bu = build_bupu(one, g)
    v = HoloFunction([0.5, 0.3])
    F = GFunction.from_wavelet(U, v, S, g)
    T = apply_T(3, F, bu, U, S)
    phi = wavelet_batch(U, U, g.elements, S)
    assert np.allclose(T.values, bu.c[0] * F.evaluate(np.eye(2)[None])[0] * phi, atol=1e-14)


def test_rank_deficient_single_point_frame():
    one = generate_lattice(7.0, 0.1)
    ops = LatticeOperators.from_polar(one, U, S, 6)
    fb = frame_bounds(ops.hermitian_form(3))
    assert not fb.is_frame and fb.A < 1e-12


def test_contraction_on_kernel_at_small_eps():
    lat = generate_lattice(0.1, np.sqrt(0.98))
    ops = LatticeOperators.from_polar(lat, U, S, 16)
    for k in (1, 2, 3):
        assert ops.ratio(k, U) < 1


def test_analysis_of_an_atom(lat04):
    j = 1234
    f = HoloFunction(rho_coeffs(S, lat04.elements_at([j]), U, 80)[0])
    c = analyze(f, lat04, U, S)
    nu2 = hs_norm(U, S) ** 2
    assert abs(c[j] - nu2) < 1e-8 * nu2
    assert np.all(np.abs(c) <= nu2 * (1 + 1e-8))
    assert np.all(analyze(HoloFunction([0]), lat04, U, S) == 0)


def test_synthesis_of_a_single_atom(lat04):
    gamma = np.zeros(lat04.size)
    gamma[77] = 1
    out = synthesize(gamma, lat04, U, S, 20)
    assert np.allclose(out.coeffs, rho_coeffs(S, lat04.elements_at([77]), U, 20)[0], atol=1e-14)


def test_sequence_norm_within_frame_bounds(lat04, rng):
    K = 16
    ops = LatticeOperators.from_polar(lat04, U, S, K)
    fb = frame_bounds(ops.hermitian_form(3))
    norm = SequenceNorm(2.0, lat04.masses)
    h = hs_weights(S, K)
    for _ in range(20):
        f = HoloFunction((rng.normal(size=5) + 1j * rng.normal(size=5)) * 0.4 ** np.arange(5))
        r = norm(analyze(f, lat04, U, S)) ** 2 / hs_norm(f, S) ** 2
        # beyond degree K the truncated bounds do not apply, so f stays low degree
        assert fb.A * (1 - 1e-9) <= r <= fb.B * (1 + 1e-9)
    with pytest.raises(ValueError):
        SequenceNorm(2.0, np.array([1.0, 0.0]))


def test_frame_bounds_against_eigvalsh(rng):
    G = rng.normal(size=(20, 20)) + 1j * rng.normal(size=(20, 20))
    M = G @ G.conj().T
    ev = np.linalg.eigvalsh(M)
    fb = frame_bounds(M)
    assert abs(fb.A - ev[0]) < 1e-10 * ev[-1] and abs(fb.B - ev[-1]) < 1e-10 * ev[-1]
    fb = frame_bounds(np.diag([1.0, 0.0, 0.5]))
    assert not fb.is_frame and fb.B == pytest.approx(1.0)


def test_neumann(rng):
    g = rng.normal(size=6) + 0j
    res = neumann_solve(lambda v: v, g)
    assert res.iterations == 1 and np.allclose(res.x, g)
    T = np.eye(6) + 0.2 * np.diag(rng.uniform(-1, 1, 6))
    res = neumann_solve(lambda v: T @ v, g, tol=1e-12)
    assert np.allclose(T @ res.x, g, atol=1e-10)
    assert np.all(res.ratios <= 0.2 + 1e-9)
    with pytest.raises(NonContractionError) as exc:
        neumann_solve(lambda v: 3 * v, g)
    assert exc.value.ratio >= 1


def test_region_operator_is_a_contraction():
    P = region_operator(0.9, U, S, 8)
    h = np.sqrt(hs_weights(S, 8))
    Ph = h[:, None] * P / h[None, :]
    ev = np.linalg.eigvalsh(0.5 * (Ph + Ph.conj().T))
    assert 0 < ev.min() and ev.max() < 1
    # on constants it is the truncated Duflo–Moore integral 1 - (1-R²)^{s-1}
    assert abs(P[0, 0] - (1 - (1 - 0.81) ** (S - 1))) < 1e-10


def test_frame_bounds_clustered_spectrum(rng):
    # nearly tight frame: eigenvalues within 1% of each other
    Q, _ = np.linalg.qr(rng.normal(size=(17, 17)) + 1j * rng.normal(size=(17, 17)))
    ev = np.sort(1.0 + 0.01 * rng.random(17))
    fb = frame_bounds((Q * ev) @ Q.conj().T)
    assert abs(fb.A - ev[0]) < 1e-13 and abs(fb.B - ev[-1]) < 1e-13
