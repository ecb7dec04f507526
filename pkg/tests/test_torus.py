import math

import numpy as np
import pytest

from boltzspec.torus import (
    HALF_SIDE_RATIO,
    PhysicalField,
    SpectralField,
    TransformError,
    analyze,
    forward,
    inverse,
    l2_norm,
    make_spec,
    sample_function,
    spec_from_half_side,
    synthesize,
)


def test_geometry_ratios():
    spec = make_spec(2.0, 8, 0.0)
    assert spec.L == pytest.approx(HALF_SIDE_RATIO * 2.0)
    assert spec.lam == pytest.approx(2.0 / (3.0 + math.sqrt(2.0)))
    spec2 = spec_from_half_side(spec.L, 8, 0.0)
    assert spec2.R == pytest.approx(2.0)


def test_spec_invariants():
    with pytest.raises(ValueError):
        make_spec(-1.0, 8, 0.0)
    with pytest.raises(ValueError):
        make_spec(2.0, 0, 0.0)
    with pytest.raises(ValueError):
        make_spec(2.0, 8, 2.0)


def test_grid_shape_and_spacing():
    spec = make_spec(2.0, 4, 0.0)
    for p in (1, 2):
        g = spec.grid1d(p)
        assert g.shape == (8 * p,)
        assert g[0] == pytest.approx(-spec.L)
        assert g[1] - g[0] == pytest.approx(spec.spacing(p))
        assert spec.spacing(p) == pytest.approx(spec.L / (p * 4))


def test_roundtrip_identity():
    spec = make_spec(3.0, 8, 0.0)
    rng = np.random.default_rng(0)
    vals = rng.standard_normal((16, 16, 16))
    f = forward(PhysicalField(spec, 1, vals))
    back = inverse(f, 1)
    np.testing.assert_allclose(back.samples, vals, atol=1e-12)


def test_single_mode_analysis():
    # one plane wave cos(pi k v1 / L) has two symmetric coefficients
    spec = make_spec(2.0, 4, 0.0)
    k0 = 2

    def wave(v):
        return np.cos(math.pi * k0 * v[..., 0] / spec.L)

    f = forward(sample_function(wave, spec, 1))
    n = spec.N
    expected = (2 * spec.L) ** 3 / 2.0
    assert f.coeffs[n + k0, n, n] == pytest.approx(expected)
    assert f.coeffs[n - k0, n, n] == pytest.approx(expected)
    others = np.abs(f.coeffs).sum() - 2 * expected
    assert others < 1e-8 * expected


def test_oversampled_synthesis_consistent():
    spec = make_spec(2.0, 6, 0.0)
    rng = np.random.default_rng(1)
    coeffs = forward(PhysicalField(spec, 1, rng.standard_normal((12, 12, 12)))).coeffs
    fine = synthesize(coeffs, spec, 2)
    again = analyze(fine, spec, 2)
    np.testing.assert_allclose(again, coeffs, atol=1e-10 * np.max(np.abs(coeffs)))
    # p=2 samples agree with p=1 samples at shared nodes
    coarse = synthesize(coeffs, spec, 1)
    np.testing.assert_allclose(fine[::2, ::2, ::2], coarse, atol=1e-10)


def test_parseval():
    spec = make_spec(2.0, 8, 0.0)
    rng = np.random.default_rng(2)
    vals = rng.standard_normal((16, 16, 16))
    f = forward(PhysicalField(spec, 1, vals))
    grid_norm = math.sqrt(spec.spacing(1) ** 3 * float(np.sum(vals**2)))
    assert l2_norm(f) == pytest.approx(grid_norm, rel=1e-12)


def test_inverse_rejects_large_imaginary_part():
    spec = make_spec(2.0, 4, 0.0)
    coeffs = np.zeros((8, 8, 8), dtype=np.complex128)
    coeffs[5, 4, 4] = 1.0j  # no conjugate partner content
    with pytest.raises(TransformError):
        inverse(SpectralField(spec, coeffs), 1)
