"""Fourier kernel beta(l,m), the periodic collision operator in spectral
space (gain and loss), the separable fast gain evaluator, and the full
scheme operator.

beta(l,m) depends on (l,m) only through the integer radii
a^2 = |l+m|^2 and b^2 = |l-m|^2; the kernel table memoizes on the
canonical (sorted) pair, which makes the symmetries
beta(l,m) = beta(m,l) and beta(l,-l) = beta(l,l) exact equalities.
"""

from __future__ import annotations

import enum
import math
import struct
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .smoothing import BumpProfile, apply_projection, multiply_psi
from .torus import SpectralField, TorusSpec

FOUR_PI = 4.0 * math.pi

_TABLE_MAGIC = b"BZKTBL\x01\n"


class KernelMethod(enum.Enum):
    CLOSED_FORM = "closed_form"   # gamma in {0, 1}
    QUADRATURE = "quadrature"     # general gamma in [0, 1]


# ---------------------------------------------------------------------------
# radial integral B(xi, eta) = int_0^1 r^{2+gamma} sinc(xi r) sinc(eta r) dr
# ---------------------------------------------------------------------------

def _sinc(x):
    return np.sinc(np.asarray(x) / np.pi)


def _int_r_cos(w):
    """int_0^1 r cos(w r) dr, series-stabilized near w = 0."""
    w = np.asarray(w, dtype=np.float64)
    w2 = w * w
    small = np.abs(w) < 0.5
    ws = np.where(small, 0.0, w)
    direct = np.where(
        small, 0.0, (np.cos(ws) + ws * np.sin(ws) - 1.0) / np.where(small, 1.0, w2)
    )
    series = 0.5 - w2 / 8.0 + w2**2 / 144.0 - w2**3 / 5760.0 + w2**4 / 403200.0
    return np.where(small, series, direct)


def _radial_closed_gamma0(xi, eta):
    xi = np.asarray(xi, dtype=np.float64)
    eta = np.asarray(eta, dtype=np.float64)
    lo, hi = np.minimum(xi, eta), np.maximum(xi, eta)
    both_zero = hi == 0.0
    one_zero = (lo == 0.0) & ~both_zero
    w = np.where(one_zero, hi, 1.0)
    single = (np.sin(w) - w * np.cos(w)) / w**3
    denom = np.where(lo > 0.0, 2.0 * xi * eta, 1.0)
    general = (_sinc(xi - eta) - _sinc(xi + eta)) / denom
    return np.where(both_zero, 1.0 / 3.0, np.where(one_zero, single, general))


def _radial_closed_gamma1(xi, eta):
    xi = np.asarray(xi, dtype=np.float64)
    eta = np.asarray(eta, dtype=np.float64)
    lo, hi = np.minimum(xi, eta), np.maximum(xi, eta)
    both_zero = hi == 0.0
    one_zero = (lo == 0.0) & ~both_zero
    w = np.where(one_zero, hi, 1.0)
    single = (2.0 * w * np.sin(w) - (w * w - 2.0) * np.cos(w) - 2.0) / w**4
    denom = np.where(lo > 0.0, 2.0 * xi * eta, 1.0)
    general = (_int_r_cos(xi - eta) - _int_r_cos(xi + eta)) / denom
    return np.where(both_zero, 0.25, np.where(one_zero, single, general))


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


def _radial_quadrature(xi: float, eta: float, gamma: float) -> float:
    """Composite Gauss-Legendre evaluation of B(xi, eta), with the panel
    count scaled to the oscillation (>= 4 panels per period of the
    product's fastest frequency xi + eta)."""
    freq = xi + eta
    panels = max(8, int(math.ceil(4.0 * freq / (2.0 * math.pi))))
    edges = np.linspace(0.0, 1.0, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    r = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    w = half[:, None] * _GL_WEIGHTS[None, :]
    vals = r ** (2.0 + gamma) * _sinc(xi * r) * _sinc(eta * r)
    return float(np.sum(w * vals))


def beta_closed_form(a2, b2, spec: TorusSpec):
    """Vectorized closed-form beta over integer radius pairs
    (a2, b2) = (|l+m|^2, |l-m|^2); gamma must be 0 or 1."""
    scale = (2.0 * spec.R) ** (3.0 + spec.gamma) * FOUR_PI**2
    xi = math.pi * spec.lam * np.sqrt(np.asarray(a2, dtype=np.float64))
    eta = math.pi * spec.lam * np.sqrt(np.asarray(b2, dtype=np.float64))
    if spec.gamma == 0.0:
        return scale * _radial_closed_gamma0(xi, eta)
    if spec.gamma == 1.0:
        return scale * _radial_closed_gamma1(xi, eta)
    raise ValueError("closed form requires gamma in {0, 1}")


def beta_quadrature(a2, b2, spec: TorusSpec):
    """Quadrature fallback for beta, valid for any gamma in [0, 1]."""
    scale = (2.0 * spec.R) ** (3.0 + spec.gamma) * FOUR_PI**2
    xi = math.pi * spec.lam * math.sqrt(float(a2))
    eta = math.pi * spec.lam * math.sqrt(float(b2))
    return scale * _radial_quadrature(xi, eta, spec.gamma)


# ---------------------------------------------------------------------------
# kernel table
# ---------------------------------------------------------------------------

@dataclass
class KernelTable:
    """Memoized beta values keyed by the canonical pair of integer radii.

    The memo dict is only mutated through insert-or-read of immutable
    floats, which is safe under the interpreter lock; for free-threaded
    use, pre-populate via dense_table before sharing.
    """

    spec: TorusSpec
    method: KernelMethod = KernelMethod.CLOSED_FORM
    memo: dict = field(default_factory=dict)
    _dense: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.method is KernelMethod.CLOSED_FORM and self.spec.gamma not in (0.0, 1.0):
            raise ValueError("closed-form kernel table requires gamma in {0, 1}")

    def _eval(self, a2: int, b2: int) -> float:
        if self.method is KernelMethod.CLOSED_FORM:
            return float(beta_closed_form(a2, b2, self.spec))
        return float(beta_quadrature(a2, b2, self.spec))

    def beta_key(self, a2: int, b2: int) -> float:
        key = (a2, b2) if a2 <= b2 else (b2, a2)
        val = self.memo.get(key)
        if val is None:
            val = self._eval(*key)
            self.memo[key] = val
        return val

    def beta(self, l, m) -> float:
        l = np.asarray(l, dtype=np.int64)
        m = np.asarray(m, dtype=np.int64)
        a2 = int(np.sum((l + m) ** 2))
        b2 = int(np.sum((l - m) ** 2))
        return self.beta_key(a2, b2)

    def dense_table(self, a2_max: int, b2_max: int) -> np.ndarray:
        """Dense (a2_max+1, b2_max+1) lookup array of beta values."""
        cached = self._dense
        if cached is not None and cached.shape[0] > a2_max and cached.shape[1] > b2_max:
            return cached
        a2 = np.arange(a2_max + 1)[:, None]
        b2 = np.arange(b2_max + 1)[None, :]
        if self.method is KernelMethod.CLOSED_FORM:
            dense = beta_closed_form(a2, b2, self.spec)
        else:
            dense = np.empty((a2_max + 1, b2_max + 1))
            for i in range(a2_max + 1):
                for j in range(b2_max + 1):
                    dense[i, j] = self.beta_key(i, j)
        dense = np.ascontiguousarray(dense)
        self._dense = dense
        return dense

    def dense_for_modes(self) -> np.ndarray:
        n = self.spec.N
        return self.dense_table(12 * n * n, 3 * (3 * n - 1) ** 2)


def dump_table(table: KernelTable, path: str) -> None:
    """Write the memoized (a^2, b^2, beta) triples with a fingerprint header."""
    spec = table.spec
    keys = sorted(table.memo)
    with open(path, "wb") as fh:
        fh.write(_TABLE_MAGIC)
        fh.write(struct.pack("<ddqq", spec.R, spec.gamma, spec.N, len(keys)))
        for a2, b2 in keys:
            fh.write(struct.pack("<qqd", a2, b2, table.memo[(a2, b2)]))


def load_table(path: str, spec: TorusSpec,
               method: KernelMethod = KernelMethod.CLOSED_FORM) -> KernelTable:
    """Load a dumped kernel table, rejecting any fingerprint mismatch."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _TABLE_MAGIC:
            raise ValueError(f"bad kernel table magic {magic!r}")
        R, gamma, n, count = struct.unpack("<ddqq", fh.read(32))
        if not (R == spec.R and gamma == spec.gamma and n == spec.N):
            raise ValueError(
                f"kernel table fingerprint (R={R}, gamma={gamma}, N={n}) does not "
                f"match spec (R={spec.R}, gamma={spec.gamma}, N={spec.N})"
            )
        memo = {}
        for _ in range(count):
            a2, b2, val = struct.unpack("<qqd", fh.read(24))
            memo[(a2, b2)] = val
    return KernelTable(spec=spec, method=method, memo=memo)


# ---------------------------------------------------------------------------
# direct gain (reference path, numba-compiled)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _gain_core_complex(g, hpad, dense, n):  # pragma: no cover - compiled
    m = 2 * n
    out = np.zeros((m, m, m), dtype=np.complex128)
    for ix in range(m):
        kx = ix - n
        for iy in range(m):
            ky = iy - n
            for iz in range(m):
                kz = iz - n
                a2 = kx * kx + ky * ky + kz * kz
                acc = 0.0 + 0.0j
                for jx in range(m):
                    lx = jx - n
                    bx = (2 * lx - kx) ** 2
                    px = kx - lx + 2 * n
                    for jy in range(m):
                        ly = jy - n
                        bxy = bx + (2 * ly - ky) ** 2
                        py = ky - ly + 2 * n
                        for jz in range(m):
                            gz = g[jx, jy, jz]
                            if gz != 0.0:
                                lz = jz - n
                                b2 = bxy + (2 * lz - kz) ** 2
                                acc += gz * hpad[px, py, kz - lz + 2 * n] * dense[a2, b2]
                out[ix, iy, iz] = acc
    return out


@njit(cache=True)
def _gain_core_real(g, hpad, dense, n):  # pragma: no cover - compiled
    m = 2 * n
    out = np.zeros((m, m, m))
    for ix in range(m):
        kx = ix - n
        for iy in range(m):
            ky = iy - n
            for iz in range(m):
                kz = iz - n
                a2 = kx * kx + ky * ky + kz * kz
                acc = 0.0
                for jx in range(m):
                    lx = jx - n
                    bx = (2 * lx - kx) ** 2
                    px = kx - lx + 2 * n
                    for jy in range(m):
                        ly = jy - n
                        bxy = bx + (2 * ly - ky) ** 2
                        py = ky - ly + 2 * n
                        for jz in range(m):
                            gz = g[jx, jy, jz]
                            if gz != 0.0:
                                lz = jz - n
                                b2 = bxy + (2 * lz - kz) ** 2
                                acc += gz * hpad[px, py, kz - lz + 2 * n] * dense[a2, b2]
                out[ix, iy, iz] = acc
    return out


def _pad_center(coeffs: np.ndarray, n: int) -> np.ndarray:
    p = 4 * n
    out = np.zeros((p, p, p), dtype=coeffs.dtype)
    out[n : 3 * n, n : 3 * n, n : 3 * n] = coeffs
    return out


def _is_real(coeffs: np.ndarray) -> bool:
    scale = float(np.max(np.abs(coeffs)))
    if scale == 0.0:
        return True
    return float(np.max(np.abs(coeffs.imag))) <= 1e-13 * scale


def gain_direct(g: SpectralField, h: SpectralField, table: KernelTable) -> SpectralField:
    """Gain coefficients by the exact double sum
    Qhat+(k) = (2L)^-3 sum_{l+m=k} ghat(l) hhat(m) beta(l,m), k in J_N.

    Cost O(|J_N|^2); a real-coefficient fast path is used when both
    inputs have (numerically) real spectra, which holds for even initial
    data and is preserved by the scheme.
    """
    if g.spec != h.spec:
        raise ValueError("gain_direct requires fields on the same spec")
    spec = g.spec
    n = spec.N
    dense = table.dense_for_modes()
    if _is_real(g.coeffs) and _is_real(h.coeffs):
        gr = np.ascontiguousarray(g.coeffs.real)
        hpad = _pad_center(gr if h.coeffs is g.coeffs else
                           np.ascontiguousarray(h.coeffs.real), n)
        out = _gain_core_real(gr, hpad, dense, n).astype(np.complex128)
    else:
        gc = np.ascontiguousarray(g.coeffs)
        hpad = _pad_center(np.ascontiguousarray(h.coeffs), n)
        out = _gain_core_complex(gc, hpad, dense, n)
    out /= (2.0 * spec.L) ** 3
    return SpectralField(spec, out)


# ---------------------------------------------------------------------------
# loss (exact FFT convolution)
# ---------------------------------------------------------------------------

def _linear_convolve(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """Linear (non-circular) convolution of two J_N cubes, truncated back
    to J_N, via zero-padding to size 4N per axis."""
    p = 4 * n
    fa = np.fft.fftn(a, s=(p, p, p))
    fb = np.fft.fftn(b, s=(p, p, p))
    conv = np.fft.ifftn(fa * fb)
    # index s = i_l + i_m = (l+m) + 2N; k in [-N, N-1] -> s in [N, 3N)
    return conv[n : 3 * n, n : 3 * n, n : 3 * n]


def loss_fft(g: SpectralField, h: SpectralField, table: KernelTable) -> SpectralField:
    """Loss coefficients Qhat-(k) = (2L)^-3 sum_{l+m=k} ghat(l) beta(l,l) hhat(m),
    exact up to roundoff via zero-padded FFT convolution."""
    if g.spec != h.spec:
        raise ValueError("loss_fft requires fields on the same spec")
    spec = g.spec
    n = spec.N
    k = spec.modes
    ll2 = k[:, None, None] ** 2 + k[None, :, None] ** 2 + k[None, None, :] ** 2
    dense = table.dense_for_modes()
    beta_ll = dense[4 * ll2, 0]  # beta(l,l): a2 = |2l|^2, b2 = 0
    conv = _linear_convolve(g.coeffs * beta_ll, h.coeffs, n)
    return SpectralField(spec, conv / (2.0 * spec.L) ** 3)


# ---------------------------------------------------------------------------
# fast separable gain
# ---------------------------------------------------------------------------

MIN_RADIAL_NODES = 8
MIN_SPHERE_DEGREE = 17


def sphere_quadrature(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Product Gauss-Legendre (cos theta) x uniform (phi) quadrature on S^2,
    exact for spherical harmonics up to the given degree; weights sum to 4 pi."""
    n_t = (degree + 2) // 2
    x, w = np.polynomial.legendre.leggauss(n_t)
    n_phi = max(2 * n_t, degree + 1)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    st = np.sqrt(1.0 - x**2)
    pts = np.empty((n_t * n_phi, 3))
    pts[:, 0] = np.outer(st, np.cos(phi)).ravel()
    pts[:, 1] = np.outer(st, np.sin(phi)).ravel()
    pts[:, 2] = np.outer(x, np.ones(n_phi)).ravel()
    wts = np.outer(w * (2.0 * math.pi / n_phi), np.ones(n_phi)).ravel()
    return pts, wts


@dataclass(frozen=True)
class GainQuadrature:
    """Radial Gauss-Legendre rule on [0,1] and a sphere rule exact to the
    stated spherical-harmonic degree."""

    radial_nodes: np.ndarray
    radial_weights: np.ndarray
    sphere_points: np.ndarray
    sphere_weights: np.ndarray
    sphere_degree: int

    @classmethod
    def build(cls, radial_count: int, sphere_degree: int) -> "GainQuadrature":
        x, w = np.polynomial.legendre.leggauss(radial_count)
        pts, wts = sphere_quadrature(sphere_degree)
        return cls(
            radial_nodes=0.5 * (x + 1.0),
            radial_weights=0.5 * w,
            sphere_points=pts,
            sphere_weights=wts,
            sphere_degree=sphere_degree,
        )


def default_sphere_degree(n: int) -> int:
    """Sphere rule degree scaled linearly with the mode count: the plane
    wave in the separable decomposition has bandwidth pi*lam*2*sqrt(3)*N
    ~= 4.93 N; a margin above that keeps the rule in the superalgebraic
    decay regime of the spherical Bessel tail."""
    return max(MIN_SPHERE_DEGREE, int(math.ceil(6.0 * n)) + 11)


def gain_fast(
    g: SpectralField,
    h: SpectralField,
    quad: GainQuadrature,
    table: KernelTable,
) -> SpectralField:
    """Separable-quadrature gain evaluator.

    Uses sinc(pi lam r |l-m|) = (1/4pi) int_{S^2} exp(i pi lam r sigma.(l-m))
    and the fact that the other sinc factor depends only on k = l+m, so each
    (radial node, sphere node) pair contributes one zero-padded fast
    convolution of phase-modulated copies of ghat and hhat.
    """
    if g.spec != h.spec:
        raise ValueError("gain_fast requires fields on the same spec")
    spec = g.spec
    n = spec.N
    if quad.radial_nodes.size < MIN_RADIAL_NODES:
        raise ValueError(
            f"radial rule has {quad.radial_nodes.size} nodes; "
            f"minimum is {MIN_RADIAL_NODES}"
        )
    if quad.sphere_degree < MIN_SPHERE_DEGREE:
        raise ValueError(
            f"sphere rule degree {quad.sphere_degree} below minimum "
            f"{MIN_SPHERE_DEGREE}"
        )
    p = 4 * n
    k = spec.modes
    kabs = np.sqrt(
        k[:, None, None] ** 2 + k[None, :, None] ** 2 + k[None, None, :] ** 2
    )
    out = np.zeros((2 * n, 2 * n, 2 * n), dtype=np.complex128)
    gamma = spec.gamma
    for rq, wq in zip(quad.radial_nodes, quad.radial_weights):
        c = math.pi * spec.lam * rq
        accum = np.zeros((p, p, p), dtype=np.complex128)
        for sigma, ws in zip(quad.sphere_points, quad.sphere_weights):
            ph = [np.exp(1j * c * sigma[d] * k) for d in range(3)]
            mod = (
                ph[0][:, None, None] * ph[1][None, :, None] * ph[2][None, None, :]
            )
            fa = np.fft.fftn(g.coeffs * mod, s=(p, p, p))
            fb = np.fft.fftn(h.coeffs * np.conj(mod), s=(p, p, p))
            accum += ws * (fa * fb)
        conv = np.fft.ifftn(accum)[n : 3 * n, n : 3 * n, n : 3 * n]
        out += (wq * rq ** (2.0 + gamma)) * np.sinc(spec.lam * rq * kabs) * conv
    out *= (2.0 * spec.R) ** (3.0 + gamma) * FOUR_PI / (2.0 * spec.L) ** 3
    return SpectralField(spec, out)


# ---------------------------------------------------------------------------
# assembled operator
# ---------------------------------------------------------------------------

class GainMethod(enum.Enum):
    DIRECT = "direct"
    FAST = "fast"
    AUTO = "auto"


@dataclass
class CollisionContext:
    """Everything q_scheme needs: kernel table, quadrature for the fast
    path, gain method selection, and the physical-space oversample factor."""

    spec: TorusSpec
    table: KernelTable
    quad: GainQuadrature
    mode: GainMethod = GainMethod.AUTO
    oversample: int = 2

    @classmethod
    def build(
        cls,
        spec: TorusSpec,
        mode: GainMethod = GainMethod.AUTO,
        radial_count: int = 16,
        sphere_degree: int | None = None,
        oversample: int = 2,
        method: KernelMethod | None = None,
    ) -> "CollisionContext":
        if method is None:
            method = (
                KernelMethod.CLOSED_FORM
                if spec.gamma in (0.0, 1.0)
                else KernelMethod.QUADRATURE
            )
        if sphere_degree is None:
            sphere_degree = default_sphere_degree(spec.N)
        return cls(
            spec=spec,
            table=KernelTable(spec=spec, method=method),
            quad=GainQuadrature.build(radial_count, sphere_degree),
            mode=mode,
            oversample=oversample,
        )

    def resolve_mode(self) -> GainMethod:
        if self.mode is not GainMethod.AUTO:
            return self.mode
        # Measured on this implementation the compiled double sum beats the
        # separable quadrature path at every mode count the acceptance
        # suite exercises; the fast path takes over only at large N.
        return GainMethod.DIRECT if self.spec.N <= 24 else GainMethod.FAST


def qp(
    g: SpectralField,
    h: SpectralField,
    ctx: CollisionContext,
    mode: GainMethod | None = None,
) -> SpectralField:
    """Periodic collision operator Qhat_p = gain - loss, bilinear in (g, h)."""
    use = ctx.resolve_mode() if mode is None or mode is GainMethod.AUTO else mode
    if use is GainMethod.FAST:
        gain = gain_fast(g, h, ctx.quad, ctx.table)
    else:
        gain = gain_direct(g, h, ctx.table)
    loss = loss_fft(g, h, ctx.table)
    return SpectralField(g.spec, gain.coeffs - loss.coeffs)


def q_scheme(f: SpectralField, ctx: CollisionContext) -> SpectralField:
    """Full scheme operator: with F_N = P~_N(f psi^R),

        Q_N^R(f,f) = P~_N^{1/2}( P~_N^{1/2}( Q_p(F_N, F_N) ) psi^R ).

    Output lies in the span of modes with Phi(k/N) > 0.
    """
    fn = apply_projection(
        multiply_psi(f, oversample=ctx.oversample), BumpProfile.FULL
    )
    q = qp(fn, fn, ctx)
    q = apply_projection(q, BumpProfile.SQRT)
    q = multiply_psi(q, oversample=ctx.oversample)
    return apply_projection(q, BumpProfile.SQRT)
