"""Fourier spectral solver for the spatially homogeneous cutoff Boltzmann
equation on a truncated velocity torus."""

from .analytic import BkwParams, MaxwellianParams, bkw, bkw_dt, maxwellian, two_gaussian_ic
from .collision import (
    CollisionContext,
    GainMethod,
    GainQuadrature,
    KernelMethod,
    KernelTable,
    gain_direct,
    gain_fast,
    loss_fft,
    q_scheme,
    qp,
)
from .diagnostics import (
    DiagRecord,
    diagnose,
    entropy,
    fisher,
    l2_error,
    l2_to_equilibrium,
    moments,
    relative_entropy,
)
from .sim import (
    BlowUpError,
    ConfigError,
    RunConfig,
    Scenario,
    TimeSeries,
    parse_config,
    rk4_step,
    run,
    sweep,
)
from .smoothing import (
    BumpProfile,
    WeightSpec,
    apply_projection,
    bump_phi,
    bump_sqrt_phi,
    multiply_psi,
    psi_r,
    weight_mk,
)
from .torus import (
    PhysicalField,
    SpectralField,
    TorusSpec,
    forward,
    inverse,
    l2_norm,
    make_spec,
    spec_from_half_side,
)

__version__ = "0.1.0"
