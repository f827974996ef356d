import numpy as np
import pytest
from hypothesis import given, strategies as st

from coorbit.bergman import HoloFunction
from coorbit.cocycle import (
    BASE_POINTS,
    CocycleValue,
    MackeyElement,
    automorphy,
    automorphy_batch,
    mackey_inv,
    mackey_lift_residual,
    mackey_mul,
    sigma_batch,
    sigma_of,
    winding_batch,
)
from coorbit.group import GroupElement, act, haar_grid, inv, mul, random_elements, section
from coorbit.representation import wavelet_batch

E = GroupElement.identity()
S_VALUES = [2.5, np.pi, 3.0]


def test_automorphy_identity_and_section():
    assert automorphy(E, 0.4 + 0.1j) == 1
    for w in (0.1, 0.6, -0.8):
        assert abs(automorphy(section(w, 0), 0) - (1 - w * w) ** -0.5) < 1e-14


def test_automorphy_chain_rule(rng):
    x, y = random_elements(rng, 1000), random_elements(rng, 1000)
    z = 0.9 * np.sqrt(rng.uniform(size=1000)) * np.exp(2j * np.pi * rng.uniform(size=1000))
    lhs = automorphy_batch(mul(x, y), z)
    rhs = automorphy_batch(x, z) * automorphy_batch(y, act(inv(x), z))
    assert np.max(np.abs(lhs - rhs) / np.abs(lhs)) < 1e-10


@pytest.mark.parametrize("s", S_VALUES)
def test_unit_and_symmetry(s, rng):
    x = random_elements(rng, 300)
    e = np.broadcast_to(np.eye(2, dtype=complex), x.shape)
    assert np.all(sigma_batch(x, e, s) == 1) and np.all(sigma_batch(e, x, s) == 1)
    assert np.max(np.abs(sigma_batch(x, inv(x), s) - sigma_batch(inv(x), x, s))) < 1e-12


@pytest.mark.parametrize("s", S_VALUES)
def test_cocycle_identity(s, rng):
    x, y, z = (random_elements(rng, 1000) for _ in range(3))
    lhs = sigma_batch(mul(x, y), z, s) * sigma_batch(x, y, s)
    rhs = sigma_batch(x, mul(y, z), s) * sigma_batch(y, z, s)
    assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_windings_independent_of_base_point(rng):
    x, y = random_elements(rng, 1000), random_elements(rng, 1000)
    ms = [winding_batch(x, y, z0) for z0 in BASE_POINTS]
    for m, res in ms:
        assert np.array_equal(m, ms[0][0])
        assert res.max() < 1e-8
    # the sample must exercise nonzero windings
    assert np.any(ms[0][0] != 0)


def test_integer_s_is_exactly_trivial(rng):
    x, y = random_elements(rng, 1000), random_elements(rng, 1000)
    assert np.all(sigma_batch(x, y, 3.0) == 1)
    assert np.all(sigma_batch(x, y, 4) == 1)


def test_near_identity_has_zero_winding(rng):
    w = 0.3 * np.sqrt(rng.uniform(size=500)) * np.exp(2j * np.pi * rng.uniform(size=500))
    from coorbit.group import sections

    x = sections(w, rng.uniform(-0.3, 0.3, 500))
    y = sections(w[::-1], rng.uniform(-0.3, 0.3, 500))
    assert np.all(winding_batch(x, y)[0] == 0)


@given(st.integers(-3, 3), st.floats(1.01, 6))
def test_cocycle_value_validation(m, s):
    from coorbit.cocycle import sigma_from_winding

    CocycleValue(m, complex(sigma_from_winding(m, s)), s)
    with pytest.raises(ValueError):
        CocycleValue(m, complex(sigma_from_winding(m, s)) * 1j, s)


def test_sigma_of_requires_s_above_n():
    with pytest.raises(ValueError):
        sigma_of(E, E, 1.0)
    v = sigma_of(section(0.5, 1.0), E, 2.5)
    assert v.m == 0 and v.sigma == 1


def test_mackey_group(rng):
    s = 2.5
    xs = [GroupElement(m) for m in random_elements(rng, 6)]
    ts = np.exp(2j * np.pi * rng.uniform(size=6))
    a = MackeyElement(xs[0], ts[0])
    one = MackeyElement(E, 1.0)
    r = mackey_mul(one, a, s)
    assert np.allclose(r.x.M, a.x.M) and abs(r.t - a.t) < 1e-15
    for left in (mackey_mul(a, mackey_inv(a, s), s), mackey_mul(mackey_inv(a, s), a, s)):
        assert np.allclose(left.x.M, np.eye(2), atol=1e-12) and abs(left.t - 1) < 1e-12
    assert mackey_inv(one, s).t == 1
    for i in range(3):
        p, q, r_ = (MackeyElement(xs[j], ts[j]) for j in (i, i + 1, i + 2))
        lhs = mackey_mul(mackey_mul(p, q, s), r_, s)
        rhs = mackey_mul(p, mackey_mul(q, r_, s), s)
        assert np.allclose(lhs.x.M, rhs.x.M, atol=1e-10) and abs(lhs.t - rhs.t) < 1e-10
    with pytest.raises(ValueError):
        MackeyElement(E, 2.0)


@pytest.mark.parametrize("s", [3.0, 2.5])
def test_mackey_lift(s):
    u = HoloFunction([np.sqrt(s - 1)])
    g = haar_grid(0.9, 8, 8, 5)
    f = wavelet_batch(u, HoloFunction([0.3, 0.5, 0.2j]), g.elements, s)
    idx = np.arange(0, g.size, 37)
    r8 = mackey_lift_residual(f, u, g, 8, s, idx)
    r16 = mackey_lift_residual(f, u, g, 16, s, idx)
    assert r8 < 1e-9
    assert abs(r8 - r16) < 1e-12
    with pytest.raises(ValueError):
        mackey_lift_residual(f, u, g, 4, s, idx)
