"""Brute-force time-domain correlators used as ground truth.

Both evaluate the template analytically at the continuous delayed times of
the receive samples and integrate with measure ``1/fs``.  They are slow by
design: O(Np * N_r) per point for the exact filter, O(N_t) per pulse and
delay bin for the linearized one.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from .motion import TargetTruth, _kinematics, exact_delay
from .synth import EchoCube
from .waveform import Waveform

_CHUNK_ELEMENTS = 1 << 21


def matched_filter_exact(cube: EchoCube, w: Waveform, theta: TargetTruth) -> complex:
    """Coherent sum of the exact-delay matched filter at ``theta``."""
    rp = cube.rp
    dt = cube.fast_time
    total = 0j
    for m in range(1, rp.Np + 1):
        tau = exact_delay(theta, (m - 1) * rp.Tpri + dt, rp.c0)
        tmpl = w.eval(dt - tau)
        live = tmpl != 0
        cycles = np.mod(rp.fc * tau[live], 1.0)
        total += np.sum(cube.records[m - 1, live] * np.conj(tmpl[live])
                        * np.exp(2j * np.pi * cycles))
    return total / rp.fs


def matched_filter_cago_td(cube: EchoCube, w: Waveform, theta: TargetTruth,
                           delays=None, pulses: Optional[Sequence[int]] = None,
                           per_pulse: bool = False, stretch: bool = True):
    """Direct correlation with ``tau(dt) = phi_m + gamma_m dt``.

    ``theta`` supplies ``v0`` and ``a0``.  Without ``delays`` the range is
    ``theta.r0`` and a single complex value is returned (summed over
    ``pulses``, default all); with ``delays`` the range hypothesis follows
    ``r0 = c0 tau0 / 2`` for each entry.  ``per_pulse`` keeps one row per
    pulse instead of summing.
    """
    rp = cube.rp
    c0, fs, fc = rp.c0, rp.fs, rp.fc
    scalar = delays is None
    tau0 = np.atleast_1d(np.asarray(
        [2 * theta.r0 / c0] if scalar else delays, dtype=float))
    if pulses is None:
        pulses = range(1, rp.Np + 1)
    pulses = list(pulses)
    out = np.zeros((len(pulses), tau0.size), dtype=complex)
    n_r = cube.n_r
    for row, m in enumerate(pulses):
        k = _kinematics(0.0, theta.v0, theta.a0, m, rp)
        v, gamma = k.v_m, k.gamma_m
        x = cube.records[m - 1]
        r_m = c0 * tau0 / 2 + k.r_m  # k.r_m is the displacement since CPI start
        phi = 2 * r_m / (c0 + v)
        alpha = phi / (1 - gamma)
        span = int(math.ceil(w.Tp / (1 - gamma) * fs)) + 2
        n0 = np.ceil((alpha - cube.t_off) * fs).astype(np.int64) - 1
        offs = np.arange(span)
        step = max(1, _CHUNK_ELEMENTS // span)
        for s in range(0, tau0.size, step):
            sl = slice(s, s + step)
            idx = n0[sl, None] + offs[None, :]
            ok = (idx >= 0) & (idx < n_r)
            idx_c = np.clip(idx, 0, n_r - 1)
            dt = cube.t_off + idx_c / fs
            if stretch:
                arg = dt - phi[sl, None] - gamma * dt
            else:
                arg = dt - phi[sl, None]
            tmpl = w.eval(arg)
            cycles = np.mod(fc * phi[sl, None], 1.0) + fc * gamma * dt
            terms = x[idx_c] * np.conj(tmpl) * np.exp(2j * np.pi * np.mod(cycles, 1.0))
            out[row, sl] = np.sum(np.where(ok, terms, 0), axis=1) / fs
    if per_pulse:
        return out[:, 0] if scalar else out
    total = out.sum(axis=0)
    return complex(total[0]) if scalar else total
