"""Range-Doppler-acceleration compression with a per-pulse linearized delay.

Within pulse ``m`` the target is taken to move at the constant velocity
``v_m = v0 + a0 T_m`` ("cruise"), while acceleration acts from pulse to
pulse ("go").  The delay is then affine in fast time, ``phi_m + gamma_m dt``,
and the matched filter for every range hypothesis of a given ``(v0, a0)``
becomes a single FFT correlation with a frequency-remapped template:

    RDA_m(tau0) = rho/(1-gamma) e^{i 2 pi fc alpha}
                  IFFT{ X(rho f) S*((rho f + fc gamma)/(1-gamma)) e^{i 2 pi rho f zeta'} }(tau0)

with ``alpha = tau0/rho + zeta``.  Both spectra are read from densely
zero-padded tables by linear interpolation.  Pulses are then summed
coherently for each hypothesis.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.fft as sfft

from .classic import argmax_with_ties, next_pow2
from .errors import KinematicsError, ParameterError
from .motion import RadarParams, TargetTruth
from .synth import EchoCube
from .waveform import SpectrumTable, Waveform, lerp_centered, spectrum, spectrum_of

# Table density relative to the source length; matches U=16 on the pulse.
SPECTRAL_DENSITY = 16


@dataclass(frozen=True)
class HypothesisGrid:
    v_values: tuple
    a_values: tuple
    upsample: int = 1          # output delay samples per 1/fs
    delay_shift: float = 0.0   # sub-sample offset of the delay grid, s

    def __post_init__(self):
        for name in ("v_values", "a_values"):
            vals = np.asarray(getattr(self, name), dtype=float)
            if vals.size == 0 or np.any(np.diff(vals) <= 0):
                raise ParameterError(f"{name} must be non-empty and strictly increasing")
            object.__setattr__(self, name, tuple(float(x) for x in vals))
        if int(self.upsample) < 1:
            raise ParameterError("upsample must be >= 1")

    @property
    def shape(self):
        return len(self.a_values), len(self.v_values)

    @staticmethod
    def default_steps(rp: RadarParams):
        """Velocity and acceleration resolution of a coherent CPI."""
        lam = rp.wavelength
        return lam / (2 * rp.Tcpi), lam / rp.Tcpi ** 2

    @classmethod
    def around(cls, truth: TargetTruth, rp: RadarParams, v_cells: int = 10,
               a_cells: int = 5, dv: Optional[float] = None,
               da: Optional[float] = None, **kw) -> "HypothesisGrid":
        dv0, da0 = cls.default_steps(rp)
        dv = dv0 if dv is None else dv
        da = da0 if da is None else da
        v = truth.v0 + dv * np.arange(-v_cells, v_cells + 1)
        a = truth.a0 + da * np.arange(-a_cells, a_cells + 1)
        return cls(tuple(v), tuple(a), **kw)


@dataclass(frozen=True, eq=False)
class RDAMap:
    values: np.ndarray   # (n_a, n_v, n_delay)
    delays: np.ndarray
    v_values: np.ndarray
    a_values: np.ndarray
    c0: float


@dataclass(frozen=True)
class PeakReport:
    r0: float
    v0: float
    a0: float
    peak_db: float
    peak_complex_sum_magnitude: float


@dataclass(frozen=True, eq=False)
class CompressionPlan:
    """FFT length, output sampling and the template table for one waveform."""

    nfft: int
    upsample: int
    n_out: int
    fs: float
    record_U: int
    template: SpectrumTable
    freqs: np.ndarray  # FFT-ordered processing bins


def make_plan(w: Waveform, n_r: int, upsample: int = 1,
              density: int = SPECTRAL_DENSITY, n_out: Optional[int] = None) -> CompressionPlan:
    """Choose the transform length ``next_pow2(n_r + 2 n_t)`` and build tables.

    The tables use the transform length as base so that every processing
    bin is a table node; the upsampling factor is picked to give at least
    ``density`` nodes per source-length bin.
    """
    n_t = w.n_samples
    if n_r < n_t:
        raise ParameterError(f"record length {n_r} is shorter than the pulse ({n_t})")
    nfft = next_pow2(n_r + 2 * n_t)
    u_t = max(1, math.ceil(density * n_t / nfft))
    u_r = max(1, math.ceil(density * n_r / nfft))
    tab = spectrum(w, u_t, nfft)
    upsample = int(upsample)
    if n_out is None:
        n_out = upsample * n_r
    return CompressionPlan(nfft, upsample, int(n_out), w.fs, u_r, tab,
                           np.fft.fftfreq(nfft, 1.0 / w.fs))


def record_table(plan: CompressionPlan, record) -> SpectrumTable:
    return spectrum_of(record, plan.fs, plan.record_U, plan.nfft)


def delay_axis(plan: CompressionPlan, t_off: float, delay_shift: float = 0.0):
    return t_off + delay_shift + np.arange(plan.n_out) / (plan.upsample * plan.fs)


def _pulse_terms(v0, a0, m, rp):
    c0 = rp.c0
    T = (m - 1) * rp.Tpri
    v = v0 + a0 * T
    if not abs(v) < c0:
        raise KinematicsError(f"hypothesis velocity reaches c0 at pulse {m}")
    d = v0 * T + 0.5 * a0 * T * T
    gamma = 2 * v / (c0 + v)
    rho = (c0 - v) / c0
    zeta = 2 * d / (c0 - v)
    return v, gamma, rho, zeta


def _phasor(start, step, n, split=None):
    """``exp(i 2 pi (start + step k))`` for ``k = 0..n-1``.

    With ``split`` the indices past ``split`` are taken as ``k - n`` (FFT
    order).  Built as an outer product of two short tables.
    """
    step = math.fmod(step, 1.0)
    inner = 256
    outer = -(-n // inner)
    hi = np.exp(2j * np.pi * np.mod(step * inner * np.arange(outer), 1.0))
    lo = np.exp(2j * np.pi * np.mod(start + step * np.arange(inner), 1.0))
    out = np.multiply.outer(hi, lo).ravel()[:n]
    if split is not None:
        out[split:] *= np.exp(-2j * np.pi * math.fmod(step * n, 1.0))
    return out


def _lerp(tab: SpectrumTable, k_scale, k_offset, n):
    """Table read at ``f = k_offset + k_scale * k`` for FFT-ordered ``k``."""
    k = np.fft.fftfreq(n, 1.0 / n)
    pos = k * (k_scale / tab.df)
    pos += (k_offset - tab.f0) / tab.df
    inside = None
    if pos[n // 2] < 0 or pos[n // 2 - 1] > tab.size:
        inside = (pos >= 0) & (pos <= tab.size)
        np.clip(pos, 0, tab.size, out=pos)
    i0 = pos.astype(np.int64)
    np.minimum(i0, tab.size - 1, out=i0)
    pos -= i0
    out = tab.diffs[i0]
    out *= pos
    out += tab.centered[i0]
    if inside is not None:
        out[~inside] = 0
    return out


def _compress(plan, xtab, v0, a0, m, rp, t_off, delay_shift, stretch):
    v, gamma, rho, zeta = _pulse_terms(v0, a0, m, rp)
    fc, c0 = rp.fc, rp.c0
    if stretch:
        # Correlate with s*((1-gamma)u) e^{i2pi fc gamma u}; sample at
        # alpha = tau0/rho + zeta.
        kappa, offset = rho, zeta
        inv_kappa_m1 = v / (c0 - v)
        carrier_scale = 1.0
        t_scale, gain = kappa / (1 - gamma), kappa / ((1 - gamma) * plan.fs)
        t_shift = fc * gamma / (1 - gamma)
    else:
        # Template s*(dt - phi): Doppler phase kept, no time scaling; the
        # sampling point is phi = (1-gamma) alpha.
        kappa, offset = rho / (1 - gamma), (1 - gamma) * zeta
        inv_kappa_m1 = -v / (c0 + v)
        carrier_scale = 1 + gamma
        t_scale, gain = kappa, kappa / plan.fs
        t_shift = fc * gamma
    L, P = plan.nfft, plan.upsample
    df = plan.fs / L
    tab = plan.template
    # Sampling point relative to the record's time origin t_off.
    base = t_off + delay_shift
    off_loc = offset + base * inv_kappa_m1 + delay_shift
    # Record read at kappa f, template at t_scale f + t_shift (f = k df).
    prod = _lerp(xtab, kappa * df, 0.0, L)
    prod *= np.conj(_lerp(tab, t_scale * df, t_shift, L))
    # Phase of the centered tables and the zeta' shift, affine in k.
    ramp_step = df * (kappa * (off_loc - xtab.t_center) + t_scale * tab.t_center)
    ramp_start = math.fmod(t_shift * tab.t_center, 1.0)
    prod *= _phasor(ramp_start, ramp_step, L, split=L // 2)
    if P == 1:
        out = sfft.ifft(prod, overwrite_x=True)
    else:
        padded = np.zeros(P * L, dtype=complex)
        padded[: L // 2] = prod[: L // 2]
        padded[-(L // 2):] = prod[L // 2:]
        out = sfft.ifft(padded, overwrite_x=True) * P
    out = out[: plan.n_out]
    # Carrier exp(i 2 pi fc alpha) (or fc (1+gamma) phi) at each output delay.
    cf = fc * carrier_scale
    c_start = math.fmod(cf * (base / kappa + offset), 1.0)
    c_step = cf / (kappa * P * plan.fs)
    out *= _phasor(c_start, c_step, plan.n_out)
    out *= gain
    return out


def rda_pulse(cube: EchoCube, w: Waveform, v0: float, a0: float, m: int,
              plan: Optional[CompressionPlan] = None,
              xtab: Optional[SpectrumTable] = None, stretch: bool = True,
              delay_shift: float = 0.0):
    """Complex single-pulse response over the delay grid for one ``(v0, a0)``.

    Returns ``(delays, profile)``; ``stretch=False`` drops the time scaling
    of the template while keeping everything else.
    """
    rp = cube.rp
    if not 1 <= m <= rp.Np:
        raise ParameterError(f"pulse index {m} outside 1..{rp.Np}")
    if plan is None:
        plan = make_plan(w, cube.n_r)
    if xtab is None:
        xtab = record_table(plan, cube.records[m - 1])
    prof = _compress(plan, xtab, v0, a0, m, rp, cube.t_off, delay_shift, stretch)
    return delay_axis(plan, cube.t_off, delay_shift), prof


def _accumulate(cube, w, hyps, plan, stretch, delay_shift, workers):
    rp = cube.rp
    acc = np.zeros((len(hyps), plan.n_out), dtype=complex)
    pool = ThreadPoolExecutor(workers) if workers and workers > 1 else None
    try:
        for m in range(1, rp.Np + 1):
            xtab = record_table(plan, cube.records[m - 1])

            def one(h, m=m, xtab=xtab):
                return _compress(plan, xtab, h[0], h[1], m, rp, cube.t_off,
                                 delay_shift, stretch)

            results = pool.map(one, hyps) if pool else map(one, hyps)
            # Fixed summation order: pulse by pulse, same for any worker count.
            for i, prof in enumerate(results):
                acc[i] += prof
    finally:
        if pool:
            pool.shutdown()
    return acc


def rda_integrate(cube: EchoCube, w: Waveform, v0: float, a0: float,
                  plan: Optional[CompressionPlan] = None, stretch: bool = True,
                  delay_shift: float = 0.0, complex_output: bool = False):
    """Coherent sum over pulses; returns ``(delays, |sum|)`` (or the complex sum)."""
    if plan is None:
        plan = make_plan(w, cube.n_r)
    acc = _accumulate(cube, w, [(v0, a0)], plan, stretch, delay_shift, 1)[0]
    delays = delay_axis(plan, cube.t_off, delay_shift)
    return delays, (acc if complex_output else np.abs(acc))


def rda_map(cube: EchoCube, w: Waveform, grid: HypothesisGrid,
            plan: Optional[CompressionPlan] = None, stretch: bool = True,
            workers: int = 1) -> RDAMap:
    """Magnitude of the coherent sum for every ``(a, v)`` on the grid."""
    if plan is None or plan.upsample != grid.upsample:
        plan = make_plan(w, cube.n_r, upsample=grid.upsample)
    hyps = [(v, a) for a in grid.a_values for v in grid.v_values]
    acc = _accumulate(cube, w, hyps, plan, stretch, grid.delay_shift, workers)
    n_a, n_v = grid.shape
    values = np.abs(acc).reshape(n_a, n_v, plan.n_out)
    return RDAMap(values, delay_axis(plan, cube.t_off, grid.delay_shift),
                  np.asarray(grid.v_values), np.asarray(grid.a_values), cube.rp.c0)


def rda_estimate(rda: RDAMap) -> PeakReport:
    """Grid maximum; ties go to lowest delay, then lowest |v|, then lowest |a|."""
    if rda.values.size == 0:
        raise ParameterError("empty map")
    ia, iv, j = argmax_with_ties(
        rda.values,
        lambda c: (rda.delays[c[2]], abs(rda.v_values[c[1]]), abs(rda.a_values[c[0]])),
    )
    peak = float(rda.values[ia, iv, j])
    return PeakReport(
        r0=float(rda.c0 * rda.delays[j] / 2),
        v0=float(rda.v_values[iv]),
        a0=float(rda.a_values[ia]),
        peak_db=20 * math.log10(peak) if peak > 0 else -math.inf,
        peak_complex_sum_magnitude=peak,
    )
