import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad
from scipy.linalg import expm

from coorbit.group import (
    LIE_BASIS,
    GroupElement,
    NumericDriftError,
    UnsupportedDimensionError,
    act,
    compose,
    exp_basis,
    exp_coords,
    haar_grid,
    haar_mass_disc,
    hyperbolic_distance,
    in_U_eps,
    in_U_eps_batch,
    inv,
    invert,
    mobius,
    mul,
    random_elements,
    rotation,
    section,
    solve_coords,
)

E = GroupElement.identity()
H = GroupElement([[5 / 4, 3 / 4], [3 / 4, 5 / 4]])

disc = st.builds(lambda r, a: r * np.exp(1j * a),
                 st.floats(0, 0.95), st.floats(0, 2 * np.pi))
angles = st.floats(-np.pi, np.pi)


def test_compose_frozen_product():
    assert np.allclose(compose(H, H).M, [[17 / 8, 15 / 8], [15 / 8, 17 / 8]], atol=1e-15)


def test_invert_frozen():
    assert np.allclose(invert(H).M, [[5 / 4, -3 / 4], [-3 / 4, 5 / 4]], atol=1e-15)


def test_identity_and_inverse():
    assert np.allclose(compose(E, H).M, H.M)
    assert np.allclose(compose(H, invert(H)).M, np.eye(2), atol=1e-14)
    assert np.allclose(invert(E).M, np.eye(2))
    assert np.allclose(invert(rotation(0.7)).M, rotation(-0.7).M)


def test_invalid_matrix_rejected():
    with pytest.raises(NumericDriftError):
        GroupElement([[1, 1], [0, 1]])
    with pytest.raises(ValueError):
        GroupElement(np.eye(3))


def test_higher_dimension_engine_refused():
    x = GroupElement(np.eye(3), n=2)
    with pytest.raises(UnsupportedDimensionError):
        mobius(x, [0.1, 0.2])


@given(disc, angles, disc, angles, disc)
def test_mobius_is_an_action(w1, t1, w2, t2, z):
    x, y = section(w1, t1), section(w2, t2)
    lhs = complex(mobius(compose(x, y), z))
    rhs = complex(mobius(x, mobius(y, z)))
    assert abs(lhs - rhs) < 1e-10
    assert abs(lhs) < 1


@given(disc, angles)
def test_section_maps_origin(w, t):
    assert abs(complex(mobius(section(w, t), 0)) - w) < 1e-12


@given(angles, disc)
def test_rotation_acts_by_double_angle(t, z):
    assert abs(complex(mobius(rotation(t), z)) - np.exp(2j * t) * z) < 1e-12


def test_section_frozen_determinant_identity():
    x = section(0.6, 0.0)
    assert abs(abs(x.d) ** 2 - abs(x.b[0]) ** 2 - 1) < 1e-14
    assert np.allclose(section(0, 0).M, np.eye(2))


def test_batched_inverse(rng):
    x = random_elements(rng, 200)
    assert np.allclose(mul(x, inv(x)), np.eye(2), atol=1e-12)


def test_exp_basis_against_expm(rng):
    for t in rng.uniform(-1, 1, (20, 3)):
        ref = expm(t[0] * LIE_BASIS.X[0]) @ expm(t[1] * LIE_BASIS.X[1]) @ expm(t[2] * LIE_BASIS.X[2])
        assert np.allclose(exp_coords(t), ref, atol=1e-13)
    assert np.allclose(exp_basis([0, 0, 0]).M, np.eye(2))
    assert np.allclose(exp_basis([0, 0, 0.4]).M, rotation(0.4).M, atol=1e-15)


@pytest.mark.parametrize("k", range(3))
def test_exp_derivative_is_basis_element(k):
    h = 1e-5
    t = np.zeros(3)
    t[k] = h
    d = (exp_coords(t) - exp_coords(-t)) / (2 * h)
    assert np.allclose(d, LIE_BASIS.X[k], atol=1e-9)


def test_solve_coords_roundtrip(rng):
    t = rng.uniform(-0.5, 0.5, (100, 3))
    s, res, ok = solve_coords(exp_coords(t))
    assert ok.all()
    assert np.abs(s - t).max() < 1e-10


def test_in_U_eps():
    assert in_U_eps(E, 1e-3)
    assert in_U_eps(exp_basis([0.2, 0, 0]), 0.2)
    assert not in_U_eps(exp_basis([0.25, 0, 0]), 0.2)
    assert not in_U_eps(section(0.99, 0), 0.1)
    with pytest.raises(ValueError):
        in_U_eps_batch(np.eye(2)[None], 0.0)


def test_hyperbolic_distance_invariance(rng):
    x = random_elements(rng, 50, 0.8)
    z, w = 0.5 * rng.uniform(size=50) * np.exp(1j * rng.uniform(0, 7, 50)), 0.3j * np.ones(50)
    assert np.allclose(hyperbolic_distance(act(x, z), act(x, w)), hyperbolic_distance(z, w), atol=1e-10)
    # distance from the origin is artanh |z|
    assert abs(hyperbolic_distance(0.5, 0.0) - np.arctanh(0.5)) < 1e-15


@pytest.mark.parametrize("R", [0.3, 0.9, 0.99])
def test_haar_grid_truncated_mass(R):
    g = haar_grid(R, 40, 4, 3)
    oracle = quad(lambda r: 2 * r / (1 - r * r) ** 2, 0, R, epsabs=0, epsrel=1e-12)[0]
    assert abs(g.weights.sum() - oracle) < 1e-10 * oracle
    assert abs(haar_mass_disc(R * R) - oracle) < 1e-10 * oracle


def test_haar_grid_k_invariant_independent_of_nk():
    vals = [np.sum(haar_grid(0.9, 20, 8, nk).weights * np.abs(haar_grid(0.9, 20, 8, nk).z) ** 2)
            for nk in (1, 3, 7)]
    assert np.ptp(vals) < 1e-13


def test_haar_grid_power_integral():
    # ∫ (1-|x·o|²)^3 dx = ∫_0^1 2r (1-r²) dr = 1/2
    g = haar_grid(np.sqrt(-np.expm1(-30.0)), 64, 4, 1)
    assert abs(np.sum(g.weights * g.one_minus_r2() ** 3) - 0.5) < 1e-10


def test_grid_rejects_bad_radius():
    with pytest.raises(ValueError):
        haar_grid(1.0, 4, 4, 1)
