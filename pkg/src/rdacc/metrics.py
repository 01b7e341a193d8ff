"""Figures of merit: correlation loss, peaks, ambiguity levels, speedup."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cago import PeakReport, RDAMap, make_plan, rda_estimate, rda_integrate
from .classic import RDMap, classic_estimate
from .errors import DegenerateSceneError, ParameterError
from .motion import TargetTruth
from .oracle import matched_filter_exact
from .synth import EchoCube
from .waveform import Waveform


def grid_shift_for(tau: float, t_off: float, fs: float, upsample: int = 1) -> float:
    """Delay-grid offset that puts one output bin exactly on ``tau``."""
    step = 1.0 / (fs * upsample)
    return (tau - t_off) % step


def correlation_loss(cube: EchoCube, w: Waveform, theta_true: TargetTruth,
                     plan=None, stretch: bool = True) -> float:
    """``20 log10(peak of the FFT processor / exact matched filter)`` in dB.

    The processor runs at the true ``(v0, a0)`` on a delay grid shifted so
    that one bin falls on the true ``2 r0 / c0``; the peak over delay is
    compared with the exact-delay correlator at ``theta_true``.
    """
    rp = cube.rp
    ref = abs(matched_filter_exact(cube, w, theta_true))
    if ref == 0 or not math.isfinite(ref):
        raise DegenerateSceneError("exact matched filter response is zero at theta_true")
    if plan is None:
        plan = make_plan(w, cube.n_r)
    shift = grid_shift_for(2 * theta_true.r0 / rp.c0, cube.t_off, rp.fs, plan.upsample)
    _, prof = rda_integrate(cube, w, theta_true.v0, theta_true.a0, plan=plan,
                            stretch=stretch, delay_shift=shift)
    return 20 * math.log10(prof.max() / ref)


def extract_peak(rmap, reference: Optional[float] = None) -> PeakReport:
    """Peak of a range-Doppler(-acceleration) map.

    ``peak_db`` is relative to ``reference`` (a linear magnitude, e.g. the
    maximum of another run) when given, else absolute.  For an ``RDMap``
    the acceleration field is 0.
    """
    if isinstance(rmap, RDAMap):
        rep = rda_estimate(rmap)
    elif isinstance(rmap, RDMap):
        tau, v, _ = classic_estimate(rmap)
        peak = float(rmap.values.max())
        rep = PeakReport(rmap.c0 * tau / 2, v, 0.0,
                         20 * math.log10(peak) if peak > 0 else -math.inf, peak)
    else:
        raise ParameterError(f"unsupported map type {type(rmap).__name__}")
    if reference is not None:
        if reference <= 0:
            raise ParameterError("reference magnitude must be positive")
        mag = rep.peak_complex_sum_magnitude
        db = 20 * math.log10(mag / reference) if mag > 0 else -math.inf
        rep = PeakReport(rep.r0, rep.v0, rep.a0, db, mag)
    return rep


@dataclass(frozen=True)
class AmbiguityLevels:
    levels_db: tuple      # ambiguity order 1, 2, ... relative to the main peak
    velocities: tuple     # where each level was found, m/s
    main_velocity: float
    truncated: bool


def sidelobe_levels(profile, v_axis, v_main: float, v_amb: float,
                    resolution: float, n: int = 4, search_cells: float = 2.0) -> AmbiguityLevels:
    """Ambiguity-peak levels along a velocity cut.

    ``profile[i]`` is the response at ``v_axis[i]`` (already maximized over
    a delay neighbourhood).  For ambiguity order ``k`` the larger of the
    local maxima near ``v_main - k v_amb`` and ``v_main + k v_amb`` is taken,
    searching ``search_cells`` resolution cells either side.  Orders whose
    windows leave the axis on both sides end the list, with ``truncated``
    set.
    """
    profile = np.asarray(profile, dtype=float)
    v_axis = np.asarray(v_axis, dtype=float)
    if profile.shape != v_axis.shape or profile.size == 0:
        raise ParameterError("profile and velocity axis must be non-empty and aligned")
    if resolution <= 0 or v_amb <= 0:
        raise ParameterError("v_amb and resolution must be positive")
    i_main = int(np.argmin(np.abs(v_axis - v_main)))
    lo_win = v_main - search_cells * resolution
    hi_win = v_main + search_cells * resolution
    sel = (v_axis >= lo_win) & (v_axis <= hi_win)
    main = profile[sel].max() if sel.any() else profile[i_main]
    if main <= 0:
        raise DegenerateSceneError("main peak is zero")
    levels, where = [], []
    truncated = False
    half = search_cells * resolution
    for k in range(1, n + 1):
        best, best_v = -1.0, math.nan
        covered = False
        for centre in (v_main - k * v_amb, v_main + k * v_amb):
            if centre - half < v_axis[0] or centre + half > v_axis[-1]:
                continue
            covered = True
            sel = (v_axis >= centre - half) & (v_axis <= centre + half)
            i = np.flatnonzero(sel)[np.argmax(profile[sel])]
            if profile[i] > best:
                best, best_v = profile[i], float(v_axis[i])
        if not covered:
            truncated = True
            break
        levels.append(20 * math.log10(best / main) if best > 0 else -math.inf)
        where.append(best_v)
    return AmbiguityLevels(tuple(levels), tuple(where), float(v_main), truncated)


def speedup_estimate(n_r: int, n_t: int) -> float:
    """``N_r N_t / ((N_r + 2 N_t) ln(N_r + 2 N_t))``; natural log."""
    if n_r <= 0 or n_t <= 0:
        raise ParameterError("sample counts must be positive")
    n = n_r + 2 * n_t
    return n_r * n_t / (n * math.log(n))
