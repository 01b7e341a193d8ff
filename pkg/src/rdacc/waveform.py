"""Baseband transmit pulses and their densely sampled spectra.

A :class:`Waveform` can be evaluated at arbitrary continuous times, which the
echo synthesizer and the time-domain correlators rely on.  A
:class:`SpectrumTable` holds a zero-padded DFT of the pulse samples so that
the frequency-domain processor can read the spectrum at remapped (off-grid)
frequencies by linear interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ConstructionError, ParameterError

DEFAULT_OVERSAMPLING = 1.25

# Hand-checked arrays for orders that the Welch family does not reach.
_SMALL_COSTAS = {
    7: (0, 1, 5, 3, 6, 2, 4),
    8: (0, 1, 4, 6, 5, 3, 7, 2),
}

_MAX_WELCH_PRIME = 10007


@dataclass(frozen=True, eq=False)
class Waveform:
    """A single baseband pulse of duration ``Tp`` sampled at ``fs``.

    ``params`` carries the kind-specific settings: ``k`` (chirp rate) for
    LFM, ``sequence`` and ``subpulse`` for Costas, ``samples`` only for
    imported pulses.
    """

    kind: str
    Tp: float
    B: float
    fs: float
    params: dict
    samples: np.ndarray = field(repr=False)

    @property
    def n_samples(self) -> int:
        return len(self.samples)

    def eval(self, t):
        return evaluate(self, t)


def _check_positive(**kwargs):
    for name, value in kwargs.items():
        if not np.isfinite(value) or value <= 0:
            raise ParameterError(f"{name} must be positive, got {value!r}")


def _sample_times(Tp, fs):
    n = int(round(Tp * fs))
    if n < 1:
        raise ParameterError("pulse shorter than one sample")
    return np.arange(n) / fs


def make_lfm(Tp: float, B: float, fs: float) -> Waveform:
    """Centered linear FM chirp sweeping ``[-B/2, B/2]`` over ``[0, Tp)``."""
    _check_positive(Tp=Tp, B=B, fs=fs)
    if fs < B:
        raise ParameterError(f"fs={fs} is below the bandwidth B={B}")
    params = {"k": B / Tp}
    proto = Waveform("lfm", float(Tp), float(B), float(fs), params, np.empty(0))
    samples = evaluate(proto, _sample_times(Tp, fs))
    return Waveform("lfm", float(Tp), float(B), float(fs), params, samples)


# -- Costas sequences --------------------------------------------------------


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for d in range(2, int(math.isqrt(n)) + 1):
        if n % d == 0:
            return False
    return True


def _primitive_root(p: int) -> int:
    phi = p - 1
    factors = {d for d in range(2, phi + 1) if phi % d == 0 and _is_prime(d)}
    for g in range(2, p):
        if all(pow(g, phi // q, p) != 1 for q in factors):
            return g
    raise ConstructionError(f"no primitive root modulo {p}")


def supported_costas_orders(limit: int = 512) -> list[int]:
    """Orders ``<= limit`` for which :func:`costas_sequence` succeeds."""
    orders = set(_SMALL_COSTAS)
    for p in range(3, min(limit + 2, _MAX_WELCH_PRIME) + 1):
        if _is_prime(p):
            orders.update(n for n in (p - 1, p - 2) if n >= 3)
    return sorted(n for n in orders if n <= limit)


def costas_sequence(n: int) -> list[int]:
    """A Costas permutation of ``{0..n-1}``.

    Uses the exponential Welch construction (order ``p-1``), its corner-dot
    reduction (order ``p-2``), or a short table of small arrays.
    """
    if n < 3:
        raise ConstructionError("Costas order must be at least 3")
    if n in _SMALL_COSTAS:
        return list(_SMALL_COSTAS[n])
    if _is_prime(n + 1) and n + 1 <= _MAX_WELCH_PRIME:
        p = n + 1
        g = _primitive_root(p)
        return [pow(g, i, p) - 1 for i in range(1, p)]
    if _is_prime(n + 2) and n + 2 <= _MAX_WELCH_PRIME:
        p = n + 2
        g = _primitive_root(p)
        # i = 0 gives the corner dot (0, 0); dropping it keeps the property.
        return [pow(g, i, p) - 2 for i in range(1, p - 1)]
    near = [k for k in supported_costas_orders(max(64, 2 * n)) if abs(k - n) <= 16]
    raise ConstructionError(
        f"no Costas sequence of order {n}; supported orders nearby: {near}"
    )


def is_costas(seq: Sequence[int]) -> bool:
    """Brute-force difference-triangle check."""
    n = len(seq)
    if sorted(seq) != list(range(n)):
        return False
    seen = set()
    for i in range(n):
        for j in range(i + 1, n):
            vec = (j - i, seq[j] - seq[i])
            if vec in seen:
                return False
            seen.add(vec)
    return True


def default_costas_order(Tp: float, B: float) -> int:
    """Supported order closest to ``sqrt(B*Tp)``.

    With that order the tone spacing ``B/N`` roughly equals the inverse
    subpulse length ``N/Tp``, the usual Costas design rule.
    """
    target = math.sqrt(B * Tp)
    orders = supported_costas_orders(int(2 * target) + 8)
    return min(orders, key=lambda k: (abs(k - target), k))


def make_costas(
    N_hops: Optional[int], Tp: float, B: float, fs: float,
    sequence: Optional[Sequence[int]] = None,
) -> Waveform:
    """Phase-continuous Costas frequency-hopped pulse.

    Subpulse ``j`` lasts ``Tp/N`` and sits at ``(c_j - (N-1)/2) * B/N``.
    ``N_hops=None`` selects :func:`default_costas_order`.
    """
    _check_positive(Tp=Tp, B=B, fs=fs)
    if fs < B:
        raise ParameterError(f"fs={fs} is below the bandwidth B={B}")
    if sequence is None:
        if N_hops is None:
            N_hops = default_costas_order(Tp, B)
        if N_hops < 3:
            raise ConstructionError("Costas pulses need at least 3 hops")
        sequence = costas_sequence(int(N_hops))
    sequence = [int(c) for c in sequence]
    if not is_costas(sequence):
        raise ConstructionError("supplied sequence is not a Costas permutation")
    n = len(sequence)
    if n < 3:
        raise ConstructionError("Costas pulses need at least 3 hops")
    tb = Tp / n
    freqs = (np.asarray(sequence, dtype=float) - (n - 1) / 2.0) * (B / n)
    # Phase at the start of each subpulse, in cycles, reduced mod 1.
    start = np.concatenate([[0.0], np.cumsum(freqs * tb)[:-1]]) % 1.0
    params = {"sequence": sequence, "subpulse": tb,
              "freqs": freqs, "start_cycles": start}
    proto = Waveform("costas", float(Tp), float(B), float(fs), params, np.empty(0))
    samples = evaluate(proto, _sample_times(Tp, fs))
    return Waveform("costas", float(Tp), float(B), float(fs), params, samples)


def from_samples(samples, fs: float, B: float) -> Waveform:
    """Wrap externally supplied pulse samples (time origin at sample 0)."""
    samples = np.asarray(samples, dtype=complex).copy()
    _check_positive(fs=fs, B=B)
    if samples.ndim != 1 or samples.size == 0:
        raise ParameterError("samples must be a non-empty 1-D sequence")
    Tp = samples.size / fs
    return Waveform("samples", Tp, float(B), float(fs), {}, samples)


# -- evaluation --------------------------------------------------------------


def _sinc_interp(samples, fs, t, half_taps=16):
    n = np.asarray(t) * fs
    base = np.floor(n).astype(np.int64)
    out = np.zeros(n.shape, dtype=complex)
    beta = 8.0
    for k in range(-half_taps + 1, half_taps + 1):
        idx = base + k
        ok = (idx >= 0) & (idx < len(samples))
        x = n - idx
        taper = np.i0(beta * np.sqrt(np.clip(1 - (x / half_taps) ** 2, 0, None)))
        weight = np.sinc(x) * taper / np.i0(beta)
        out[ok] += weight[ok] * samples[idx[ok]]
    return out


def evaluate(w: Waveform, t):
    """Analytic value of the pulse at times ``t`` (zero outside ``[0, Tp)``)."""
    t_arr = np.asarray(t, dtype=float)
    inside = (t_arr >= 0.0) & (t_arr < w.Tp)
    out = np.zeros(t_arr.shape, dtype=complex)
    if w.kind == "lfm":
        u = t_arr[inside] - w.Tp / 2
        out[inside] = np.exp(1j * np.pi * w.params["k"] * u * u)
    elif w.kind == "costas":
        tb = w.params["subpulse"]
        ti = t_arr[inside]
        j = np.minimum((ti / tb).astype(np.int64), len(w.params["sequence"]) - 1)
        cycles = w.params["start_cycles"][j] + w.params["freqs"][j] * (ti - j * tb)
        out[inside] = np.exp(2j * np.pi * cycles)
    elif w.kind == "samples":
        out[inside] = _sinc_interp(w.samples, w.fs, t_arr[inside])
    else:
        raise ParameterError(f"unknown waveform kind {w.kind!r}")
    if np.ndim(t) == 0:
        return complex(out)
    return out


# -- spectra -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpectrumTable:
    """Zero-padded DFT of ``n_source`` samples on ``U * n_base`` bins.

    Internally the table stores the spectrum of the time-centered sequence
    (phase ramp of the mid-sample removed), which varies slowly with
    frequency and therefore interpolates far better.  ``values`` returns the
    plain DFT ordered over ``[-fs/2, fs/2)``.
    """

    U: int
    fs: float
    n_source: int
    n_base: int
    f0: float
    df: float
    t_center: float
    centered: np.ndarray = field(repr=False)  # length size + 1, wrap point last
    diffs: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.diffs is None:
            object.__setattr__(self, "diffs", np.diff(self.centered))

    @property
    def size(self) -> int:
        return len(self.centered) - 1

    @property
    def freqs(self) -> np.ndarray:
        return self.f0 + self.df * np.arange(self.size)

    @property
    def values(self) -> np.ndarray:
        f = self.freqs
        return self.centered[:-1] * np.exp(-2j * np.pi * f * self.t_center)


def spectrum_of(samples, fs: float, U: int = 16, nfft: Optional[int] = None) -> SpectrumTable:
    """Table for an arbitrary sample sequence (used for receive records too)."""
    samples = np.asarray(samples, dtype=complex)
    if U < 1:
        raise ParameterError("U must be >= 1")
    n_source = len(samples)
    n_base = n_source if nfft is None else int(nfft)
    if n_base < n_source:
        raise ParameterError("nfft shorter than the sequence")
    size = int(U) * n_base
    spec = np.fft.fftshift(np.fft.fft(samples, size))
    freqs = np.fft.fftshift(np.fft.fftfreq(size, 1.0 / fs))
    t_center = (n_source - 1) / (2.0 * fs)
    centered = np.empty(size + 1, dtype=complex)
    centered[:-1] = spec * np.exp(2j * np.pi * freqs * t_center)
    # The DTFT repeats every fs; the closing point lets the last cell interpolate.
    centered[-1] = centered[0] * np.exp(2j * np.pi * fs * t_center)
    return SpectrumTable(int(U), float(fs), n_source, n_base, float(freqs[0]),
                         float(fs / size), t_center, centered)


def spectrum(w: Waveform, U: int = 16, nfft: Optional[int] = None) -> SpectrumTable:
    """Zero-padded transform of the pulse samples, grid step ``fs/(U*N)``.

    ``nfft`` replaces ``N`` as the base length; the processor uses its FFT
    length there so the table contains every processing bin exactly.
    """
    return spectrum_of(w.samples, w.fs, U, nfft)


def lerp_centered(tab: SpectrumTable, f):
    """Linear interpolation in the centered domain; zero outside the band."""
    f = np.asarray(f, dtype=float)
    pos = (f - tab.f0) / tab.df
    inside = (pos >= 0.0) & (pos <= tab.size)
    pos = np.where(inside, pos, 0.0)
    i0 = np.minimum(pos.astype(np.int64), tab.size - 1)
    frac = pos - i0
    out = tab.centered[i0] + frac * tab.diffs[i0]
    return np.where(inside, out, 0.0)


def spectrum_at(tab: SpectrumTable, f):
    """Spectrum at arbitrary frequency ``f`` (Hz); exact on grid points."""
    f_arr = np.asarray(f, dtype=float)
    out = lerp_centered(tab, f_arr) * np.exp(-2j * np.pi * f_arr * tab.t_center)
    if np.ndim(f) == 0:
        return complex(out)
    return out


def dtft(samples, fs: float, f):
    """Direct discrete-time Fourier sum, for checking the tables."""
    samples = np.asarray(samples, dtype=complex)
    n = np.arange(len(samples))
    f = np.atleast_1d(np.asarray(f, dtype=float))
    return np.array([np.sum(samples * np.exp(-2j * np.pi * fk * n / fs)) for fk in f])


# -- raw file I/O ------------------------------------------------------------


def write_header(path: Path, items: dict) -> None:
    lines = [f"{k} = {v!r}" if isinstance(v, float) else f"{k} = {v}"
             for k, v in items.items()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_header(path: Path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def write_iq(path: Path, data: np.ndarray) -> None:
    data = np.ascontiguousarray(data, dtype=np.complex128)
    inter = np.empty(data.shape + (2,), dtype="<f8")
    inter[..., 0] = data.real
    inter[..., 1] = data.imag
    Path(path).write_bytes(inter.tobytes())


def read_iq(path: Path, shape=None) -> np.ndarray:
    raw = np.frombuffer(Path(path).read_bytes(), dtype="<f8")
    data = raw[0::2] + 1j * raw[1::2]
    return data.reshape(shape) if shape is not None else data


def save_waveform(w: Waveform, path) -> Path:
    """Write samples (``path``) and a ``.hdr`` sidecar; returns the sidecar."""
    path = Path(path)
    write_iq(path, w.samples)
    hdr = path.with_name(path.name + ".hdr")
    items = {"kind": w.kind, "fs": w.fs, "Tp": w.Tp, "B": w.B,
             "n_samples": w.n_samples}
    if w.kind == "costas":
        items["sequence"] = ",".join(str(c) for c in w.params["sequence"])
    write_header(hdr, items)
    return hdr


def load_waveform(path) -> Waveform:
    """Read a file written by :func:`save_waveform`.

    LFM and Costas pulses are rebuilt analytically; anything else comes back
    as an imported sample sequence.
    """
    path = Path(path)
    hdr = read_header(path.with_name(path.name + ".hdr"))
    fs, Tp, B = float(hdr["fs"]), float(hdr["Tp"]), float(hdr["B"])
    if hdr["kind"] == "lfm":
        return make_lfm(Tp, B, fs)
    if hdr["kind"] == "costas":
        seq = [int(c) for c in hdr["sequence"].split(",")]
        return make_costas(None, Tp, B, fs, sequence=seq)
    return from_samples(read_iq(path), fs, B)
