import math

import numpy as np
import pytest

from boltzspec.smoothing import (
    BumpProfile,
    WeightSpec,
    apply_projection,
    bump_phi,
    bump_sqrt_phi,
    projection_multiplier,
    psi_r,
    weight_mk,
)
from boltzspec.torus import PhysicalField, forward, l2_norm, make_spec


def test_bump_values():
    assert bump_phi(np.array([0.0])) == pytest.approx(1.0)
    assert bump_phi(np.array([0.9])) == pytest.approx(1.0)
    assert bump_phi(np.array([1.0])) == pytest.approx(0.0)
    assert bump_phi(np.array([0.95])) == pytest.approx(0.5)
    x = np.linspace(-1.2, 1.2, 241)
    np.testing.assert_allclose(bump_sqrt_phi(x) ** 2, bump_phi(x), atol=1e-14)
    assert bump_phi(np.array([-0.95])) == pytest.approx(0.5)


def test_bump_smoothstep_polynomial():
    # on the ramp the profile is the cubic 1 - 3t^2 + 2t^3 in t = 10(|x|-0.9)
    for x in (0.91, 0.93, 0.97, 0.99):
        t = 10.0 * (x - 0.9)
        assert bump_phi(np.array([x])) == pytest.approx(1 - 3 * t**2 + 2 * t**3)


def test_projection_sqrt_twice_equals_full():
    spec = make_spec(2.0, 8, 0.0)
    rng = np.random.default_rng(3)
    f = forward(PhysicalField(spec, 1, rng.standard_normal((16, 16, 16))))
    twice = apply_projection(apply_projection(f, BumpProfile.SQRT), BumpProfile.SQRT)
    once = apply_projection(f, BumpProfile.FULL)
    np.testing.assert_allclose(
        twice.coeffs, once.coeffs, atol=1e-15 * np.max(np.abs(f.coeffs))
    )


def test_projection_contraction_and_sharp_identity():
    spec = make_spec(2.0, 8, 0.0)
    rng = np.random.default_rng(4)
    f = forward(PhysicalField(spec, 1, rng.standard_normal((16, 16, 16))))
    assert l2_norm(apply_projection(f, BumpProfile.FULL)) <= l2_norm(f) * (1 + 1e-14)
    sharp = apply_projection(f, BumpProfile.SHARP)
    np.testing.assert_array_equal(sharp.coeffs, f.coeffs)


def test_projection_kills_boundary_shell():
    spec = make_spec(2.0, 4, 0.0)
    mult = projection_multiplier(spec, BumpProfile.FULL)
    assert np.all(mult[0, :, :] == 0.0)
    assert np.all(mult[:, 0, :] == 0.0)
    assert np.all(mult[:, :, 0] == 0.0)


def test_psi_ramp():
    spec = make_spec(2.0, 8, 0.0)
    pts = np.array(
        [[0.0, 0.0, 0.0], [0.0, 0.0, 1.7], [0.0, 0.0, 1.9], [0.0, 0.0, 2.1]]
    )
    vals = psi_r(pts, spec)
    assert vals[0] == 1.0
    assert vals[1] == 1.0  # inside 0.9 R = 1.8
    assert vals[2] == pytest.approx(10.0 * (1.0 - 1.9 / 2.0))
    assert vals[3] == 0.0


def test_weight_mk_regions():
    spec = make_spec(2.0, 8, 0.0)
    k = 3
    ws = WeightSpec(k, spec)
    inside = np.array([[0.5, 0.0, 0.0]])
    assert weight_mk(inside, ws)[0] == pytest.approx(1.25 ** (k / 2))
    far = np.array([[0.0, 0.0, 4.3]])  # beyond 2R = 4
    assert weight_mk(far, ws)[0] == pytest.approx((spec.R + 1.0) ** k)
    # transition region lies between the two plateau values
    mid = np.array([[0.0, 0.0, 3.0]])
    val = weight_mk(mid, ws)[0]
    assert spec.R**k <= val <= (spec.R + 1.0) ** k


def test_weight_mk_at_least_polynomial_weight_inside():
    spec = make_spec(2.0, 8, 0.0)
    rng = np.random.default_rng(5)
    v = rng.uniform(-1.9, 1.9, size=(50, 3))
    v = v[np.linalg.norm(v, axis=1) <= spec.R]
    ws = WeightSpec(2, spec)
    expected = (1.0 + np.sum(v**2, axis=1)) ** 1.0
    np.testing.assert_allclose(weight_mk(v, ws), expected, rtol=1e-12)
