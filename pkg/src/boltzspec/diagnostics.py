"""Scalar functionals of the state: moments, temperature, entropies,
Fisher information, and weighted L^2 errors.

All quadratures are plain rectangle-rule sums over the collocation grid
of D_L (the numerical solution is zero-extended outside).  Spectral
solutions are not sign-preserving, so logarithms and Fisher denominators
clamp at a floor of 1e-30 and floored nodes contribute zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import MaxwellianParams, maxwellian
from .smoothing import WeightSpec, weight_mk
from .torus import PhysicalField, SpectralField, analyze, inverse, synthesize

FLOOR = 1e-30


class NonpositiveMassError(ValueError):
    """The grid mass of the state is not positive."""


@dataclass(frozen=True)
class DiagRecord:
    """One time sample of all diagnostic functionals."""

    t: float
    mass: float
    momentum: tuple[float, float, float]
    energy: float
    temperature: float
    entropy: float
    rel_entropy: float | None
    fisher: float
    l2_error: float | None
    l2_to_equilibrium: float | None

    def is_finite(self) -> bool:
        vals = [self.mass, self.energy, self.temperature, self.entropy,
                self.fisher, *self.momentum]
        for x in (self.rel_entropy, self.l2_error, self.l2_to_equilibrium):
            if x is not None:
                vals.append(x)
        return all(math.isfinite(x) for x in vals)


def moments(f: PhysicalField) -> tuple[float, np.ndarray, float]:
    """Mass rho, bulk velocity u, and temperature T = (3 rho)^-1 int |v-u|^2 f."""
    h3 = f.spec.spacing(f.oversample) ** 3
    v = f.spec.grid(f.oversample)
    rho = h3 * float(np.sum(f.samples))
    if rho <= 0:
        raise NonpositiveMassError(f"grid mass {rho} is not positive")
    u = h3 * np.einsum("xyzd,xyz->d", v, f.samples) / rho
    d2 = np.sum((v - u) ** 2, axis=-1)
    temp = h3 * float(np.sum(d2 * f.samples)) / (3.0 * rho)
    return rho, u, temp


def energy(f: PhysicalField) -> float:
    """Second moment int |v|^2 f dv over D_L."""
    h3 = f.spec.spacing(f.oversample) ** 3
    v2 = np.sum(f.spec.grid(f.oversample) ** 2, axis=-1)
    return h3 * float(np.sum(v2 * f.samples))


def entropy(f: PhysicalField) -> float:
    """H(f) = int f log f with the floor convention."""
    h3 = f.spec.spacing(f.oversample) ** 3
    s = f.samples
    mask = s > FLOOR
    vals = np.where(mask, s, 1.0)
    return h3 * float(np.sum(np.where(mask, vals * np.log(vals), 0.0)))


def local_maxwellian_params(f: PhysicalField) -> MaxwellianParams:
    rho, u, temp = moments(f)
    return MaxwellianParams(rho=rho, u=u, T=temp)


def relative_entropy(f: PhysicalField, mu_params: MaxwellianParams | None = None) -> float:
    """H(f|mu) = int [f+ log(f+/mu) - f + mu] against the local Maxwellian
    built from the moments of f (pointwise nonnegative by convexity)."""
    if mu_params is None:
        mu_params = local_maxwellian_params(f)
    mu = maxwellian(f.spec.grid(f.oversample), mu_params)
    h3 = f.spec.spacing(f.oversample) ** 3
    s = f.samples
    fplus = np.maximum(s, FLOOR)
    integrand = fplus * (np.log(fplus) - np.log(mu)) - s + mu
    return h3 * float(np.sum(integrand))


def fisher(f: SpectralField) -> float:
    """I(f) = int |grad f|^2 / f, evaluated in the equivalent square-root
    form 4 int |grad sqrt(f)|^2 with spectral differentiation.

    The quotient form amplifies spectral ringing at grid nodes where f is
    tiny; squaring the gradient of sqrt(f) keeps that error quadratically
    small instead. Nodes at or below the floor contribute zero.
    """
    spec = f.spec
    scale = 1j * math.pi / spec.L
    k = spec.modes
    phys = synthesize(f.coeffs, spec, 1).real
    root = np.sqrt(np.where(phys > FLOOR, phys, 0.0))
    root_hat = analyze(root, spec, 1)
    grad2 = np.zeros_like(phys)
    for axis in range(3):
        shape = [1, 1, 1]
        shape[axis] = 2 * spec.N
        mult = (scale * k).reshape(shape)
        grad2 += synthesize(root_hat * mult, spec, 1).real ** 2
    h3 = spec.spacing(1) ** 3
    return 4.0 * h3 * float(np.sum(grad2))


def l2_error(f: SpectralField, reference, weight_k: int | None = None) -> float:
    """Weighted grid L^2 distance between the synthesized field and a
    reference callable v -> f(v), on the p=1 grid over D_L."""
    spec = f.spec
    v = spec.grid(1)
    phys = inverse(f, 1).samples
    diff2 = (phys - np.asarray(reference(v), dtype=np.float64)) ** 2
    if weight_k is not None:
        diff2 = diff2 * weight_mk(v, WeightSpec(weight_k, spec)) ** 2
    return math.sqrt(spec.spacing(1) ** 3 * float(np.sum(diff2)))


def l2_to_equilibrium(f: PhysicalField, mu_params: MaxwellianParams | None = None) -> float:
    if mu_params is None:
        mu_params = local_maxwellian_params(f)
    mu = maxwellian(f.spec.grid(f.oversample), mu_params)
    h3 = f.spec.spacing(f.oversample) ** 3
    return math.sqrt(h3 * float(np.sum((f.samples - mu) ** 2)))


def diagnose(
    t: float,
    f: SpectralField,
    reference=None,
) -> DiagRecord:
    """Assemble a full diagnostic record from the spectral state."""
    phys = inverse(f, 1)
    rho, u, temp = moments(phys)
    # Heavily under-resolved states can alias to a non-positive temperature;
    # the local Maxwellian is then undefined and the quantities measured
    # against it are recorded as missing.
    mu_params = MaxwellianParams(rho=rho, u=u, T=temp) if temp > 0 else None
    err = None if reference is None else l2_error(f, reference)
    return DiagRecord(
        t=t,
        mass=rho,
        momentum=tuple(rho * u),
        energy=energy(phys),
        temperature=temp,
        entropy=entropy(phys),
        rel_entropy=None if mu_params is None else relative_entropy(phys, mu_params),
        fisher=fisher(f),
        l2_error=err,
        l2_to_equilibrium=None if mu_params is None else l2_to_equilibrium(phys, mu_params),
    )
