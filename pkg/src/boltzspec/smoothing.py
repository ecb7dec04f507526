"""Mode-truncation bump, smoothing projections, velocity truncation, and
the periodic polynomial-type weight.

The bump is the cubic smoothstep ramp on the sup-norm shell
0.9 <= |x|_inf <= 1; its square root is evaluated in the closed form
(1-t) sqrt(1+2t), exact since 1 - 3t^2 + 2t^3 = (1-t)^2 (1+2t).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .torus import SpectralField, TorusSpec, analyze, synthesize


class BumpProfile(enum.Enum):
    FULL = "full"      # Phi(k/N)
    SQRT = "sqrt"      # sqrt(Phi)(k/N)
    SHARP = "sharp"    # indicator of [-1,1]^3: identity on J_N


def _ramp_t(s: np.ndarray) -> np.ndarray:
    return np.clip(10.0 * (np.asarray(s, dtype=np.float64) - 0.9), 0.0, 1.0)


def bump_phi(x) -> np.ndarray:
    """Cubic smoothstep bump of the sup-norm: 1 inside [-0.9,0.9]^3,
    0 outside [-1,1]^3, 1 - 3t^2 + 2t^3 on the shell with t = 10(|x|_inf - 0.9)."""
    x = np.asarray(x, dtype=np.float64)
    s = np.max(np.abs(x), axis=-1)
    t = _ramp_t(s)
    return (1.0 - t) ** 2 * (1.0 + 2.0 * t)


def bump_sqrt_phi(x) -> np.ndarray:
    """Closed-form sqrt(Phi): (1-t) sqrt(1+2t) on the ramp."""
    x = np.asarray(x, dtype=np.float64)
    s = np.max(np.abs(x), axis=-1)
    t = _ramp_t(s)
    return (1.0 - t) * np.sqrt(1.0 + 2.0 * t)


def projection_multiplier(spec: TorusSpec, profile: BumpProfile) -> np.ndarray:
    """Coefficient-wise multiplier profile(k/N) on the J_N cube."""
    n2 = 2 * spec.N
    if profile is BumpProfile.SHARP:
        return np.ones((n2, n2, n2))
    s1 = np.abs(spec.modes) / spec.N
    sup = np.maximum(
        np.maximum(s1[:, None, None], s1[None, :, None]), s1[None, None, :]
    )
    t = _ramp_t(sup)
    if profile is BumpProfile.FULL:
        return (1.0 - t) ** 2 * (1.0 + 2.0 * t)
    return (1.0 - t) * np.sqrt(1.0 + 2.0 * t)


def apply_projection(f: SpectralField, profile: BumpProfile) -> SpectralField:
    """Smoothing projection: ghat(k) = fhat(k) * profile(k/N)."""
    return SpectralField(f.spec, f.coeffs * projection_multiplier(f.spec, profile))


def psi_r(v, spec: TorusSpec, radius: float | None = None) -> np.ndarray:
    """Radial velocity truncation: 1 for |v| < 0.9R, the linear ramp
    10(1-|v|/R) for 0.9R <= |v| <= R, 0 beyond R (Euclidean norm)."""
    v = np.asarray(v, dtype=np.float64)
    r = np.sqrt(np.sum(v * v, axis=-1)) / (spec.R if radius is None else radius)
    return 1.0 - _ramp_t(r)


def psi_grid(spec: TorusSpec, oversample: int, squared: bool = False) -> np.ndarray:
    w = psi_r(spec.grid(oversample), spec)
    return w * w if squared else w


def multiply_psi(
    f: SpectralField, squared: bool = False, oversample: int = 2
) -> SpectralField:
    """Pointwise multiplication by psi^R (or its square) in physical space.

    The field is synthesized on the oversampled grid, multiplied, and
    re-analyzed with truncation back to J_N.  No projection profile is
    applied here; callers compose with apply_projection explicitly.
    """
    c = synthesize(f.coeffs, f.spec, oversample)
    c *= psi_grid(f.spec, oversample, squared)
    return SpectralField(f.spec, analyze(c, f.spec, oversample))


@dataclass(frozen=True)
class WeightSpec:
    """Order and geometry of the periodic weight m_k."""

    k: int
    spec: TorusSpec

    def __post_init__(self) -> None:
        if self.k < 0:
            raise ValueError("weight order k must be nonnegative")


def weight_mk(v, w: WeightSpec) -> np.ndarray:
    """Periodic positive weight: <v>^k inside B(0,R), the psi^{2R}-blend of
    R and R+1 on R < |v| < 2R, and (R+1)^k beyond."""
    v = np.asarray(v, dtype=np.float64)
    r = np.sqrt(np.sum(v * v, axis=-1))
    R = w.spec.R
    psi2 = 1.0 - _ramp_t(r / (2.0 * R))
    blended = psi2 * R + (1.0 - psi2) * (R + 1.0)
    inner = np.sqrt(1.0 + r * r)
    base = np.where(r <= R, inner, blended)
    return np.asarray(base**w.k)
