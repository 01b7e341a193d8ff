"""Per-pulse receive records for point targets under the exact delay model."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import SynthesisError
from .motion import RadarParams, TargetTruth, exact_delay
from .waveform import Waveform, read_header, read_iq, write_header, write_iq

LEAD_GUARD = 16
TAIL_GUARD = 16


@dataclass(frozen=True, eq=False)
class EchoCube:
    """``records[m-1, n]`` is sampled at ``T_m + t_off + n/fs``."""

    rp: RadarParams
    records: np.ndarray
    t_off: float
    noise_power: float = 0.0
    seed: Optional[int] = None

    @property
    def n_r(self) -> int:
        return self.records.shape[1]

    @property
    def fast_time(self) -> np.ndarray:
        """Fast time of each record sample, relative to its pulse's transmit."""
        return self.t_off + np.arange(self.n_r) / self.rp.fs

    def scaled(self, factor) -> "EchoCube":
        return replace(self, records=self.records * factor)


def echo_span(tgt: TargetTruth, m: int, w: Waveform, rp: RadarParams):
    """Fast-time interval ``[start, end)`` occupied by pulse ``m``'s echo."""
    T = (m - 1) * rp.Tpri
    out = []
    for offset in (0.0, w.Tp):
        dt = exact_delay(tgt, T, rp.c0) + offset
        # dt - tau(T + dt) = offset is a contraction (slope ~ 2v/c0).
        for _ in range(8):
            dt = exact_delay(tgt, T + dt, rp.c0) + offset
        out.append(dt)
    return out[0], out[1]


def receive_window(rp: RadarParams, targets: Sequence[TargetTruth], w: Waveform,
                   r_ref: Optional[float] = None, lead: int = LEAD_GUARD,
                   tail: int = TAIL_GUARD):
    """Common ``(t_off, n_r)`` covering every target's echo in every pulse.

    ``t_off`` is ``floor(fs * 2 r_ref / c0) / fs`` moved back by ``lead``
    samples (further if an echo starts earlier).
    """
    if not targets:
        raise SynthesisError("at least one target is required")
    if r_ref is None:
        r_ref = targets[0].r0
    fs = rp.fs
    starts, ends = [], []
    for tgt in targets:
        for m in range(1, rp.Np + 1):
            s, e = echo_span(tgt, m, w, rp)
            starts.append(s)
            ends.append(e)
    first = min(2 * r_ref / rp.c0, min(starts))
    t_off = (math.floor(fs * first) - lead) / fs
    n_r = math.ceil((max(ends) - t_off) * fs) + tail
    return t_off, n_r


def synthesize_echo(rp: RadarParams, targets: Sequence[TargetTruth], w: Waveform,
                    n_r: Optional[int] = None, t_off: Optional[float] = None) -> EchoCube:
    """Noise-free echoes, ``sum_k s(dt - tau_k) exp(-i 2 pi fc tau_k)``.

    The waveform is evaluated analytically at the exact (implicit) delay for
    every sample, so intra-pulse stretch and range walk are built in.
    """
    targets = list(targets)
    if n_r is None or t_off is None:
        auto_off, auto_n = receive_window(rp, targets, w)
        t_off = auto_off if t_off is None else t_off
        n_r = auto_n if n_r is None else n_r
    fs = rp.fs
    dt = t_off + np.arange(n_r) / fs
    t_end = t_off + n_r / fs
    records = np.zeros((rp.Np, n_r), dtype=complex)
    for tgt in targets:
        for m in range(1, rp.Np + 1):
            s, e = echo_span(tgt, m, w, rp)
            if s < t_off or e > t_end:
                need_off = math.floor(s * fs) / fs
                need_n = math.ceil((e - min(t_off, need_off)) * fs)
                raise SynthesisError(
                    f"echo of pulse {m} spans [{s:.9e}, {e:.9e}) s, outside the "
                    f"window [{t_off:.9e}, {t_end:.9e}); use t_off <= {need_off:.9e} "
                    f"and n_r >= {need_n}"
                )
            T = (m - 1) * rp.Tpri
            tau = exact_delay(tgt, T + dt, rp.c0)
            cycles = np.mod(rp.fc * tau, 1.0)
            records[m - 1] += w.eval(dt - tau) * np.exp(-2j * np.pi * cycles)
    return EchoCube(rp, records, float(t_off))


def add_noise(cube: EchoCube, snr_db: float, seed: int) -> EchoCube:
    """Complex white Gaussian noise at per-sample SNR ``snr_db`` (unit echo).

    Each pulse draws from its own stream keyed by ``(seed, m)``, so the
    result does not depend on how pulses are scheduled.
    """
    if math.isinf(snr_db) and snr_db > 0:
        return cube
    if cube.noise_power:
        raise SynthesisError("cube already contains noise")
    power = 10.0 ** (-snr_db / 10.0)
    out = cube.records.copy()
    scale = math.sqrt(power / 2)
    for m in range(cube.rp.Np):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), m])))
        noise = rng.standard_normal((2, cube.n_r))
        out[m] += scale * (noise[0] + 1j * noise[1])
    return replace(cube, records=out, noise_power=power, seed=int(seed))


_RP_FIELDS = ("fc", "B", "Tpri", "Tp", "Np", "fs", "c0")


def save_cube(cube: EchoCube, path) -> Path:
    """Interleaved little-endian float64 samples plus a ``.hdr`` sidecar."""
    path = Path(path)
    write_iq(path, cube.records)
    items = {k: getattr(cube.rp, k) for k in _RP_FIELDS}
    items.update(n_pulses=cube.rp.Np, n_r=cube.n_r, t_off=cube.t_off,
                 seed="none" if cube.seed is None else cube.seed,
                 noise_power=float(cube.noise_power))
    hdr = path.with_name(path.name + ".hdr")
    write_header(hdr, items)
    return hdr


def load_cube(path) -> EchoCube:
    path = Path(path)
    hdr = read_header(path.with_name(path.name + ".hdr"))
    rp = RadarParams(**{k: (int(hdr[k]) if k == "Np" else float(hdr[k])) for k in _RP_FIELDS})
    records = read_iq(path, (rp.Np, int(hdr["n_r"])))
    seed = None if hdr["seed"] == "none" else int(hdr["seed"])
    return EchoCube(rp, records, float(hdr["t_off"]), float(hdr["noise_power"]), seed)
