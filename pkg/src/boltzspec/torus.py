"""Truncated-torus geometry and the spectral/physical transform pair.

The velocity domain is the cube [-L, L)^3 with L tied to the truncation
radius R by L = (3+sqrt(2))/2 * R.  Spectral data lives on the asymmetric
index cube J_N = [-N, N-1]^3 with the integral-scaled coefficient
convention

    fhat(k) = int_{[-L,L]^3} f(v) exp(-i pi k.v / L) dv,

so synthesis carries the factor (2L)^{-3}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# L / R for the periodization that keeps relative velocities |z| <= 2R
# free of wrap-around on the torus.
HALF_SIDE_RATIO = (3.0 + math.sqrt(2.0)) / 2.0


class TransformError(ValueError):
    """Raised when a transform contract is violated (spec mismatch,
    non-negligible imaginary residue on synthesis)."""


@dataclass(frozen=True)
class TorusSpec:
    """Geometry of the truncated, periodized velocity domain."""

    R: float
    L: float
    lam: float
    N: int
    gamma: float

    def __post_init__(self) -> None:
        if not self.R > 0:
            raise ValueError(f"nonpositive radius R={self.R}")
        if self.N < 2:
            raise ValueError(f"need N >= 2, got N={self.N}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if abs(self.L - HALF_SIDE_RATIO * self.R) > 1e-12 * self.L:
            raise ValueError("L is not (3+sqrt(2))/2 * R")
        if abs(self.lam * self.L - self.R) > 1e-12 * self.R:
            raise ValueError("lambda*L != R")

    @property
    def modes(self) -> np.ndarray:
        """Integer modes along one axis, k = -N .. N-1."""
        return np.arange(-self.N, self.N)

    def grid1d(self, oversample: int = 1) -> np.ndarray:
        """Collocation nodes v_j = -L + j*h along one axis."""
        m = 2 * oversample * self.N
        return -self.L + (2.0 * self.L / m) * np.arange(m)

    def grid(self, oversample: int = 1) -> np.ndarray:
        """Collocation nodes as an (M, M, M, 3) array."""
        v = self.grid1d(oversample)
        out = np.empty((v.size, v.size, v.size, 3))
        out[..., 0] = v[:, None, None]
        out[..., 1] = v[None, :, None]
        out[..., 2] = v[None, None, :]
        return out

    def spacing(self, oversample: int = 1) -> float:
        return self.L / (oversample * self.N)


def make_spec(R: float, N: int, gamma: float) -> TorusSpec:
    """Build a TorusSpec from the truncation radius, deriving L and lambda."""
    if not R > 0:
        raise ValueError(f"nonpositive radius R={R}")
    L = HALF_SIDE_RATIO * R
    return TorusSpec(R=R, L=L, lam=R / L, N=int(N), gamma=float(gamma))


def spec_from_half_side(L: float, N: int, gamma: float) -> TorusSpec:
    """Build a TorusSpec from the torus half-side L instead of R."""
    if not L > 0:
        raise ValueError(f"nonpositive half-side L={L}")
    return make_spec(L / HALF_SIDE_RATIO, N, gamma)


@dataclass(frozen=True)
class SpectralField:
    """Fourier coefficients on J_N, stored as coeffs[i] with k = i - N."""

    spec: TorusSpec
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        n2 = 2 * self.spec.N
        if self.coeffs.shape != (n2, n2, n2):
            raise TransformError(
                f"coefficient array shape {self.coeffs.shape} does not match 2N={n2}"
            )

    def copy(self) -> "SpectralField":
        return SpectralField(self.spec, self.coeffs.copy())


@dataclass(frozen=True)
class PhysicalField:
    """Real collocation samples on the uniform grid over [-L, L)^3."""

    spec: TorusSpec
    oversample: int
    samples: np.ndarray

    def __post_init__(self) -> None:
        m = 2 * self.oversample * self.spec.N
        if self.samples.shape != (m, m, m):
            raise TransformError(
                f"sample array shape {self.samples.shape} does not match grid size {m}"
            )


def _alternating_signs(spec: TorusSpec) -> np.ndarray:
    """(-1)^(k1+k2+k3) on the J_N cube, as a (2N,2N,2N) array."""
    s = np.where(spec.modes % 2 == 0, 1.0, -1.0)
    return s[:, None, None] * s[None, :, None] * s[None, None, :]


def analyze(samples: np.ndarray, spec: TorusSpec, oversample: int) -> np.ndarray:
    """Discrete forward transform of grid samples to J_N coefficients.

    Accepts complex samples; modes outside J_N are discarded when the
    grid is oversampled.
    """
    n, m = spec.N, 2 * oversample * spec.N
    if samples.shape != (m, m, m):
        raise TransformError(
            f"sample shape {samples.shape} does not match oversample={oversample}"
        )
    h = spec.spacing(oversample)
    fs = np.fft.fftshift(np.fft.fftn(samples))
    c = m // 2
    block = fs[c - n : c + n, c - n : c + n, c - n : c + n]
    return (h**3) * _alternating_signs(spec) * block


def synthesize(coeffs: np.ndarray, spec: TorusSpec, oversample: int) -> np.ndarray:
    """Inverse transform of J_N coefficients to complex grid samples."""
    n, m = spec.N, 2 * oversample * spec.N
    h = spec.spacing(oversample)
    full = np.zeros((m, m, m), dtype=np.complex128)
    c = m // 2
    full[c - n : c + n, c - n : c + n, c - n : c + n] = (
        _alternating_signs(spec) * coeffs
    )
    return np.fft.ifftn(np.fft.ifftshift(full)) / (h**3)


def forward(field: PhysicalField) -> SpectralField:
    """Approximate fhat(k) = h^3 sum_j f(v_j) exp(-i pi k.v_j / L) on J_N."""
    return SpectralField(
        field.spec, analyze(field.samples, field.spec, field.oversample)
    )


def inverse(
    field: SpectralField, oversample: int = 1, imag_tol: float = 1e-10
) -> PhysicalField:
    """Synthesize real collocation samples from a spectral field.

    The imaginary residue left after synthesis is asserted to be below
    imag_tol relative to the field amplitude; a larger residue indicates
    broken Hermitian symmetry in the coefficients.
    """
    c = synthesize(field.coeffs, field.spec, oversample)
    scale = float(np.max(np.abs(c.real)))
    resid = float(np.max(np.abs(c.imag)))
    if resid > imag_tol * max(scale, 1e-300):
        raise TransformError(
            f"imaginary residue {resid:.3e} exceeds {imag_tol:.1e} x amplitude {scale:.3e}"
        )
    return PhysicalField(field.spec, oversample, np.ascontiguousarray(c.real))


def sample_function(
    fn, spec: TorusSpec, oversample: int = 1
) -> PhysicalField:
    """Sample a callable fn(v), v of shape (...,3), on the collocation grid."""
    vals = np.asarray(fn(spec.grid(oversample)), dtype=np.float64)
    return PhysicalField(spec, oversample, vals)


def l2_norm(field: SpectralField) -> float:
    """L^2(D_L) norm computed spectrally via the Parseval identity."""
    return math.sqrt(
        float(np.sum(np.abs(field.coeffs) ** 2)) / (2.0 * field.spec.L) ** 3
    )
