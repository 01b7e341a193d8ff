"""Stop-and-go baseline: FFT range compression, then a slow-time transform."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .motion import C0, RadarParams
from .synth import EchoCube
from .waveform import Waveform


def next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


@dataclass(frozen=True, eq=False)
class RDMap:
    values: np.ndarray      # (n_doppler, n_delay) magnitudes
    delays: np.ndarray      # absolute two-way delay, s
    doppler: np.ndarray     # Hz
    velocity: np.ndarray    # m/s, -f_d c0 / (2 fc)
    c0: float = C0


def range_compress(cube: EchoCube, w: Waveform):
    """Matched-filter every pulse; returns ``(delays, profiles)``.

    ``profiles[m, j]`` is the correlation at absolute delay
    ``t_off + j/fs`` with the carrier term ``exp(i 2 pi fc tau0)`` applied.
    """
    n_r, n_t = cube.n_r, w.n_samples
    if n_r < n_t:
        raise ParameterError(f"record length {n_r} is shorter than the pulse ({n_t})")
    if w.fs != cube.rp.fs:
        raise ParameterError("waveform and cube sample rates differ")
    nfft = next_pow2(n_r + n_t - 1)
    tmpl = np.conj(np.fft.fft(w.samples, nfft))
    spec = np.fft.fft(cube.records, nfft, axis=1)
    corr = np.fft.ifft(spec * tmpl, axis=1)[:, :n_r] / cube.rp.fs
    delays = cube.t_off + np.arange(n_r) / cube.rp.fs
    carrier = np.exp(2j * np.pi * np.mod(cube.rp.fc * delays, 1.0))
    return delays, corr * carrier


def doppler_process(profiles, delays, rp: RadarParams, zero_pad: int = 4) -> RDMap:
    """Slow-time transform per delay bin, ``sum_m p_m exp(-i 2 pi f_d T_m)``."""
    profiles = np.asarray(profiles)
    n_dop = int(zero_pad) * profiles.shape[0]
    spec = np.fft.fftshift(np.fft.fft(profiles, n_dop, axis=0), axes=0)
    doppler = np.fft.fftshift(np.fft.fftfreq(n_dop, rp.Tpri))
    velocity = -doppler * rp.c0 / (2 * rp.fc)
    return RDMap(np.abs(spec), np.asarray(delays), doppler, velocity, rp.c0)


def argmax_with_ties(values: np.ndarray, keys):
    """Index of the maximum; exact ties resolved by ``keys(index)`` ascending."""
    peak = values.max()
    cands = np.argwhere(values == peak)
    best = min((tuple(c) for c in cands), key=keys)
    return best


def classic_estimate(rd: RDMap):
    """``(tau_hat, v_hat, peak_db)`` at the map maximum.

    Ties go to the lowest delay, then the lowest |Doppler|.
    """
    if rd.values.size == 0:
        raise ParameterError("empty map")
    i, j = argmax_with_ties(rd.values, lambda c: (rd.delays[c[1]], abs(rd.doppler[c[0]])))
    peak = rd.values[i, j]
    peak_db = 20 * math.log10(peak) if peak > 0 else -math.inf
    return float(rd.delays[j]), float(rd.velocity[i]), peak_db
