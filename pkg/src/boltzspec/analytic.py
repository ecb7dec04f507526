"""Exact and reference velocity distributions: the BKW solution for
Maxwellian molecules, the global Maxwellian, and the two-Gaussian
hard-sphere initial condition."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class BkwParams:
    """Shape history K(t) = 1 - (1 - K0) exp(-t/tau) with K0 = 0.6,
    tau = 6; K >= 0.6 keeps the polynomial prefactor nonnegative."""

    K0: float = 0.6
    tau: float = 6.0

    def K(self, t: float) -> float:
        return 1.0 - (1.0 - self.K0) * math.exp(-t / self.tau)

    def dK(self, t: float) -> float:
        return (1.0 - self.K0) * math.exp(-t / self.tau) / self.tau


def bkw(t: float, v, p: BkwParams = BkwParams()) -> np.ndarray:
    """BKW solution
    f(t,v) = (2(2 pi K)^{3/2})^{-1} e^{-|v|^2/2K} [(5K-3)/K + (1-K)/K^2 |v|^2].
    """
    if t < 0:
        raise ValueError("bkw requires t >= 0")
    v = np.asarray(v, dtype=np.float64)
    s = np.sum(v * v, axis=-1)
    k = p.K(t)
    c = 1.0 / (2.0 * (TWO_PI * k) ** 1.5)
    return c * np.exp(-s / (2.0 * k)) * ((5.0 * k - 3.0) / k + (1.0 - k) / k**2 * s)


def bkw_dt(t: float, v, p: BkwParams = BkwParams()) -> np.ndarray:
    """Closed-form time derivative of the BKW solution (chain rule in K)."""
    if t < 0:
        raise ValueError("bkw_dt requires t >= 0")
    v = np.asarray(v, dtype=np.float64)
    s = np.sum(v * v, axis=-1)
    k = p.K(t)
    c = 1.0 / (2.0 * (TWO_PI * k) ** 1.5)
    gauss = np.exp(-s / (2.0 * k))
    poly = (5.0 * k - 3.0) / k + (1.0 - k) / k**2 * s
    dpoly = 3.0 / k**2 + (k - 2.0) / k**3 * s
    df_dk = c * gauss * ((-1.5 / k + s / (2.0 * k**2)) * poly + dpoly)
    return p.dK(t) * df_dk


@dataclass(frozen=True)
class MaxwellianParams:
    rho: float = 1.0
    u: np.ndarray = field(default_factory=lambda: np.zeros(3))
    T: float = 1.0

    def __post_init__(self) -> None:
        if not (self.rho > 0 and self.T > 0):
            raise ValueError("Maxwellian requires rho > 0 and T > 0")


def maxwellian(v, p: MaxwellianParams = MaxwellianParams()) -> np.ndarray:
    """Gibbs equilibrium rho (2 pi T)^{-3/2} exp(-|v-u|^2 / 2T)."""
    v = np.asarray(v, dtype=np.float64)
    d = v - np.asarray(p.u, dtype=np.float64)
    s = np.sum(d * d, axis=-1)
    return p.rho / (TWO_PI * p.T) ** 1.5 * np.exp(-s / (2.0 * p.T))


_U1 = np.array([0.0, 0.0, 2.0])
_U2 = np.array([0.0, 0.0, -2.0])


def two_gaussian_ic(v) -> np.ndarray:
    """Equal-weight sum of unit-temperature Gaussians centered at
    u1 = (0,0,2) and u2 = (0,0,-2); mass 1, energy 7."""
    v = np.asarray(v, dtype=np.float64)
    s1 = np.sum((v - _U1) ** 2, axis=-1)
    s2 = np.sum((v - _U2) ** 2, axis=-1)
    return (np.exp(-s1 / 2.0) + np.exp(-s2 / 2.0)) / (2.0 * TWO_PI**1.5)
