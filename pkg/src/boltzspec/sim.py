"""Time integration, scenario orchestration, configuration, sweeps, and
persistence.

The discrete system advanced here is

    d/dt fhat = kernel_scale * Q_N^R(f, f),
    fhat(0)   = P_N( f0 * psi^R )   (sharp truncation to J_N),

integrated with the classical fourth-order Runge-Kutta scheme at fixed dt.
"""

from __future__ import annotations

import configparser
import csv
import enum
import hashlib
import json
import math
import struct
import time as _time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .analytic import BkwParams, bkw, two_gaussian_ic
from .collision import CollisionContext, GainMethod, q_scheme
from .diagnostics import DiagRecord, diagnose
from .smoothing import psi_grid
from .torus import (
    HALF_SIDE_RATIO,
    SpectralField,
    TorusSpec,
    analyze,
    inverse,
    make_spec,
    spec_from_half_side,
)

_STATE_MAGIC = b"BZSTAT\x01\n"

KERNEL_SCALE_DEFAULT = 1.0 / (4.0 * math.pi)


class ConfigError(ValueError):
    """Invalid run configuration (CLI exit code 2)."""


class BlowUpError(RuntimeError):
    """Non-finite state encountered (CLI exit code 3)."""

    def __init__(self, message: str, last_valid_time: float):
        super().__init__(message)
        self.last_valid_time = last_valid_time


class Scenario(enum.Enum):
    BKW_MAXWELL = "bkw_maxwell"
    TWO_GAUSSIAN_HARD_SPHERE = "two_gaussian_hard_sphere"
    CUSTOM = "custom"


_SCENARIO_GAMMA = {
    Scenario.BKW_MAXWELL: 0.0,
    Scenario.TWO_GAUSSIAN_HARD_SPHERE: 1.0,
}


@dataclass(frozen=True)
class RunConfig:
    scenario: Scenario = Scenario.BKW_MAXWELL
    R: float | None = None
    L: float | None = None
    N: int = 8
    dt: float = 0.01
    t_final: float = 1.0
    gamma: float | None = None
    kernel_scale: float = KERNEL_SCALE_DEFAULT
    gain_method: GainMethod = GainMethod.AUTO
    radial_nodes: int = 16
    sphere_degree: int | None = None
    oversample: int = 2
    diag_every: int = 10
    snapshot_times: tuple[float, ...] = ()
    deterministic: bool = True
    out_dir: str | None = None
    resume_path: str | None = None

    def validate(self) -> None:
        if self.R is None and self.L is None:
            raise ConfigError("one of R or L must be given")
        if self.R is not None and self.L is not None:
            if abs(self.L - HALF_SIDE_RATIO * self.R) > 1e-9 * self.L:
                raise ConfigError("R and L are both given but inconsistent")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.t_final < self.dt:
            raise ConfigError("t_final must be at least dt")
        if self.N < 2:
            raise ConfigError(f"N must be >= 2, got {self.N}")
        if self.gain_method is GainMethod.FAST and self.radial_nodes < 8:
            raise ConfigError("fast gain requires radial_nodes >= 8")
        if self.oversample not in (1, 2):
            raise ConfigError("oversample must be 1 or 2")
        if self.diag_every < 1:
            raise ConfigError("diag_every must be >= 1")
        if self.scenario is Scenario.CUSTOM and self.gamma is None:
            raise ConfigError("custom scenario requires gamma")

    def resolved_gamma(self) -> float:
        if self.scenario is Scenario.CUSTOM:
            return float(self.gamma)
        return _SCENARIO_GAMMA[self.scenario]

    def build_spec(self) -> TorusSpec:
        gamma = self.resolved_gamma()
        if self.R is not None:
            return make_spec(self.R, self.N, gamma)
        return spec_from_half_side(self.L, self.N, gamma)

    def fingerprint(self) -> str:
        payload = json.dumps(
            {
                "scenario": self.scenario.value,
                "R": self.R,
                "L": self.L,
                "N": self.N,
                "dt": self.dt,
                "t_final": self.t_final,
                "gamma": self.gamma,
                "kernel_scale": self.kernel_scale,
                "gain_method": self.gain_method.value,
                "radial_nodes": self.radial_nodes,
                "sphere_degree": self.sphere_degree,
                "oversample": self.oversample,
                "diag_every": self.diag_every,
                "snapshot_times": list(self.snapshot_times),
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


_BOOLS = {"true": True, "false": False}


def parse_config(path: str | Path) -> RunConfig:
    """Read the flat key = value config format (single [run] section)."""
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    if "run" not in cp:
        raise ConfigError("config must contain a [run] section")
    sec = cp["run"]
    known = {
        "scenario", "r", "l", "n", "dt", "t_final", "gamma", "kernel_scale",
        "gain_method", "radial_nodes", "sphere_degree", "oversample",
        "diag_every", "snapshot_times", "deterministic", "out_dir",
    }
    for key in sec:
        if key not in known:
            raise ConfigError(f"unknown config key '{key}'")

    def fget(key, cast, default):
        raw = sec.get(key)
        if raw is None or raw.strip() == "":
            return default
        try:
            return cast(raw.strip())
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc

    def parse_bool(raw: str) -> bool:
        if raw.lower() not in _BOOLS:
            raise ValueError(raw)
        return _BOOLS[raw.lower()]

    def parse_times(raw: str) -> tuple[float, ...]:
        return tuple(float(x) for x in raw.split(",") if x.strip())

    scenario_raw = fget("scenario", str, Scenario.BKW_MAXWELL.value)
    try:
        scenario = Scenario(scenario_raw)
    except ValueError:
        raise ConfigError(f"unknown scenario '{scenario_raw}'") from None
    method_raw = fget("gain_method", str, GainMethod.AUTO.value)
    try:
        gain_method = GainMethod(method_raw)
    except ValueError:
        raise ConfigError(f"unknown gain_method '{method_raw}'") from None

    cfg = RunConfig(
        scenario=scenario,
        R=fget("r", float, None),
        L=fget("l", float, None),
        N=fget("n", int, 8),
        dt=fget("dt", float, 0.01),
        t_final=fget("t_final", float, 1.0),
        gamma=fget("gamma", float, None),
        kernel_scale=fget("kernel_scale", float, KERNEL_SCALE_DEFAULT),
        gain_method=gain_method,
        radial_nodes=fget("radial_nodes", int, 16),
        sphere_degree=fget("sphere_degree", int, None),
        oversample=fget("oversample", int, 2),
        diag_every=fget("diag_every", int, 10),
        snapshot_times=fget("snapshot_times", parse_times, ()),
        deterministic=fget("deterministic", parse_bool, True),
        out_dir=fget("out_dir", str, None),
    )
    cfg.validate()
    return cfg


@dataclass
class TimeSeries:
    records: list[DiagRecord]
    fingerprint: str
    wall_seconds: float
    final_state: SpectralField | None = None
    metadata: dict = field(default_factory=dict)


def rk4_step(f: SpectralField, dt: float, rhs) -> SpectralField:
    """Classical RK4 update; signals non-finite output (blow-up)."""
    if not dt > 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    k1 = rhs(f)
    k2 = rhs(SpectralField(f.spec, f.coeffs + 0.5 * dt * k1.coeffs))
    k3 = rhs(SpectralField(f.spec, f.coeffs + 0.5 * dt * k2.coeffs))
    k4 = rhs(SpectralField(f.spec, f.coeffs + dt * k3.coeffs))
    new = f.coeffs + (dt / 6.0) * (
        k1.coeffs + 2.0 * k2.coeffs + 2.0 * k3.coeffs + k4.coeffs
    )
    if not np.all(np.isfinite(new.view(np.float64))):
        raise BlowUpError("non-finite coefficients after RK4 step", math.nan)
    return SpectralField(f.spec, new)


def initial_condition(config: RunConfig):
    if config.scenario is Scenario.BKW_MAXWELL:
        params = BkwParams()
        return lambda v: bkw(0.0, v, params)
    if config.scenario is Scenario.TWO_GAUSSIAN_HARD_SPHERE:
        return two_gaussian_ic
    raise ConfigError("custom scenario requires an explicit initial condition")


def reference_solution(config: RunConfig):
    """Time-dependent exact reference, or None if the scenario has none."""
    if config.scenario is Scenario.BKW_MAXWELL:
        params = BkwParams()
        return lambda t: (lambda v: bkw(t, v, params))
    return None


def initialize_state(config: RunConfig, spec: TorusSpec, f0=None) -> SpectralField:
    """Sharp projection of the psi^R-truncated initial datum onto J_N.

    The three planes with an index component equal to -N have no conjugate
    partner inside the cube; their content is an aliasing artifact that
    would otherwise break the realness contract of the inverse transform
    throughout the run, so they are zeroed here. The smoothing profile in
    the collision scheme keeps them at zero afterwards.
    """
    if f0 is None:
        f0 = initial_condition(config)
    p = config.oversample
    vals = np.asarray(f0(spec.grid(p)), dtype=np.float64) * psi_grid(spec, p)
    coeffs = analyze(vals, spec, p)
    coeffs[0, :, :] = 0.0
    coeffs[:, 0, :] = 0.0
    coeffs[:, :, 0] = 0.0
    return SpectralField(spec, coeffs)


def save_state(path: str | Path, f: SpectralField, t: float) -> None:
    spec = f.spec
    with open(path, "wb") as fh:
        fh.write(_STATE_MAGIC)
        fh.write(struct.pack("<dddq", spec.R, spec.gamma, t, spec.N))
        fh.write(np.ascontiguousarray(f.coeffs).tobytes())


def load_state(path: str | Path, spec: TorusSpec) -> tuple[SpectralField, float]:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _STATE_MAGIC:
            raise ValueError(f"bad state magic {magic!r}")
        R, gamma, t, n = struct.unpack("<dddq", fh.read(32))
        if not (R == spec.R and gamma == spec.gamma and n == spec.N):
            raise ValueError("state fingerprint does not match spec")
        m = 2 * spec.N
        buf = fh.read(m * m * m * 16)
    coeffs = np.frombuffer(buf, dtype=np.complex128).reshape(m, m, m).copy()
    return SpectralField(spec, coeffs), t


_DIAG_COLUMNS = [
    "t", "mass", "px", "py", "pz", "energy", "temperature",
    "entropy", "rel_entropy", "fisher", "l2_error", "l2_to_equilibrium",
]


def _fmt(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def write_diag_csv(path: str | Path, records: list[DiagRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_DIAG_COLUMNS)
        for r in records:
            w.writerow(
                [
                    _fmt(r.t), _fmt(r.mass),
                    _fmt(r.momentum[0]), _fmt(r.momentum[1]), _fmt(r.momentum[2]),
                    _fmt(r.energy), _fmt(r.temperature), _fmt(r.entropy),
                    _fmt(r.rel_entropy), _fmt(r.fisher), _fmt(r.l2_error),
                    _fmt(r.l2_to_equilibrium),
                ]
            )


def _write_slice(path: Path, f: SpectralField) -> None:
    spec = f.spec
    phys = inverse(f, 1)
    v3 = spec.grid1d(1)
    line = phys.samples[spec.N, spec.N, :]  # v1 = v2 = 0 grid line
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["v3", "f"])
        for x, y in zip(v3, line):
            w.writerow([repr(float(x)), repr(float(y))])


def run(config: RunConfig, out_dir: str | Path | None = None) -> TimeSeries:
    """Advance the discrete system, emit diagnostics and snapshots, and
    persist outputs to the configured directory (if any)."""
    config.validate()
    started = _time.perf_counter()
    spec = config.build_spec()
    ctx = CollisionContext.build(
        spec,
        mode=config.gain_method,
        radial_count=config.radial_nodes,
        sphere_degree=config.sphere_degree,
        oversample=config.oversample,
    )
    scale = config.kernel_scale

    def rhs(f: SpectralField) -> SpectralField:
        q = q_scheme(f, ctx)
        return SpectralField(spec, scale * q.coeffs)

    if config.resume_path is not None:
        state, t0 = load_state(config.resume_path, spec)
    else:
        state, t0 = initialize_state(config, spec), 0.0

    ref_factory = reference_solution(config)
    if config.t_final <= t0:
        raise ConfigError(f"t_final={config.t_final} not beyond resume time {t0}")
    n_steps = max(1, round((config.t_final - t0) / config.dt))
    snapshot_steps = {
        min(n_steps, max(0, round((t - t0) / config.dt))): t
        for t in config.snapshot_times
    }

    out = Path(out_dir) if out_dir is not None else (
        Path(config.out_dir) if config.out_dir else None
    )
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    def record_at(step: int) -> DiagRecord:
        t = t0 + step * config.dt
        ref = None if ref_factory is None else ref_factory(t)
        rec = diagnose(t, state, ref)
        if not rec.is_finite():
            raise BlowUpError(f"non-finite diagnostics at t={t}", last_valid)
        return rec

    records: list[DiagRecord] = []
    last_valid = t0
    error: BlowUpError | None = None
    try:
        records.append(record_at(0))
        if out is not None and 0 in snapshot_steps:
            _write_slice(out / f"slice_t{snapshot_steps[0]:g}.csv", state)
        for step in range(1, n_steps + 1):
            try:
                state = rk4_step(state, config.dt, rhs)
            except BlowUpError as exc:
                raise BlowUpError(str(exc), last_valid) from None
            last_valid = t0 + step * config.dt
            if step % config.diag_every == 0 or step == n_steps:
                records.append(record_at(step))
            if out is not None and step in snapshot_steps:
                _write_slice(out / f"slice_t{snapshot_steps[step]:g}.csv", state)
    except BlowUpError as exc:
        error = exc

    wall = _time.perf_counter() - started
    series = TimeSeries(
        records=records,
        fingerprint=config.fingerprint(),
        wall_seconds=wall,
        final_state=None if error else state,
        metadata={
            "scenario": config.scenario.value,
            "L": spec.L,
            "R": spec.R,
            "N": spec.N,
            "dt": config.dt,
            "t_final": config.t_final,
            "note": "desk-scale parameters; trends match the full-scale study",
        },
    )
    if out is not None:
        try:
            write_diag_csv(out / "diag.csv", records)
            meta = dict(series.metadata)
            meta.update(
                fingerprint=series.fingerprint,
                wall_seconds=wall,
                completed=error is None,
                last_valid_time=last_valid if error else t0 + n_steps * config.dt,
            )
            with open(out / "meta.json", "w") as fh:
                json.dump(meta, fh, indent=2, sort_keys=True)
            if error is None:
                save_state(out / "state.bin", state, t0 + n_steps * config.dt)
        except OSError as exc:
            raise OSError(f"failed writing outputs under {out}: {exc}") from exc
    if error is not None:
        raise error
    return series


@dataclass
class SweepResult:
    axis: str
    values: list[float]
    series: list[TimeSeries | None]
    failures: dict[float, str]


def sweep(
    base: RunConfig,
    axis: str,
    values,
    out_dir: str | Path | None = None,
) -> SweepResult:
    """Run one configuration per axis value; individual failures are
    recorded and the sweep continues."""
    if axis not in ("L", "N"):
        raise ConfigError(f"sweep axis must be L or N, got {axis!r}")
    values = list(values)
    if not values:
        raise ConfigError("sweep requires a nonempty value list")
    out = Path(out_dir) if out_dir is not None else (
        Path(base.out_dir) if base.out_dir else None
    )
    result = SweepResult(axis=axis, values=values, series=[], failures={})
    rows = []
    for value in values:
        if axis == "L":
            cfg = replace(base, L=float(value), R=None, out_dir=None)
        else:
            cfg = replace(base, N=int(value), out_dir=None)
        sub = None if out is None else out / f"{axis}_{value:g}"
        try:
            series = run(cfg, sub)
        except (BlowUpError, ConfigError, OSError) as exc:
            result.series.append(None)
            result.failures[value] = str(exc)
            continue
        result.series.append(series)
        for rec in series.records:
            rows.append((value, rec.t, rec.l2_error))
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "summary.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([axis, "t", "l2_error"])
            for value, t, err in rows:
                w.writerow([f"{value:g}", repr(float(t)), _fmt(err)])
    return result
