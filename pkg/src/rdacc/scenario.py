"""Scenario configuration: INI text, built-in presets and validation.

A scenario file has ``[scenario]``, ``[radar]``, ``[waveform]``, ``[grid]``,
``[processing]`` and one ``[target.N]`` section per point target.  Loss
sweeps add a ``[sweep]`` section holding comma-separated value lists.
Serialization is canonical: ``to_ini(from_ini(to_ini(s))) == to_ini(s)``.
"""

from __future__ import annotations

import configparser
import itertools
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .cago import HypothesisGrid
from .errors import ParameterError, RdaccError
from .motion import C0, RadarParams, TargetTruth, exact_delay
from .waveform import (DEFAULT_OVERSAMPLING, Waveform, default_costas_order,
                       make_costas, make_lfm)

WAVEFORM_KINDS = ("lfm", "costas")


@dataclass(frozen=True)
class WaveformSpec:
    kind: str = "costas"
    hops: Optional[int] = None   # Costas order; None picks the default

    def build(self, rp: RadarParams) -> Waveform:
        if self.kind == "lfm":
            return make_lfm(rp.Tp, rp.B, rp.fs)
        if self.kind == "costas":
            return make_costas(self.hops, rp.Tp, rp.B, rp.fs)
        raise ParameterError(f"unknown waveform kind {self.kind!r}; use one of {WAVEFORM_KINDS}")


@dataclass(frozen=True)
class GridSpec:
    """Hypothesis window around the first target, in resolution cells.

    Explicit ``v_values``/``a_values`` override the windows.  ``dv``/``da``
    of ``None`` use ``HypothesisGrid.default_steps``.
    """

    v_cells: int = 10
    a_cells: int = 5
    full_v_cells: int = 60
    full_a_cells: int = 10
    dv: Optional[float] = None
    da: Optional[float] = None
    upsample: int = 1
    v_values: Optional[tuple] = None
    a_values: Optional[tuple] = None

    def build(self, rp: RadarParams, truth: TargetTruth, full: bool = False,
              delay_shift: float = 0.0) -> HypothesisGrid:
        dv0, da0 = HypothesisGrid.default_steps(rp)
        dv = dv0 if self.dv is None else self.dv
        da = da0 if self.da is None else self.da
        vc = self.full_v_cells if full else self.v_cells
        ac = self.full_a_cells if full else self.a_cells
        v = (self.v_values if self.v_values is not None
             else tuple(truth.v0 + dv * np.arange(-vc, vc + 1)))
        a = (self.a_values if self.a_values is not None
             else tuple(truth.a0 + da * np.arange(-ac, ac + 1)))
        return HypothesisGrid(v, a, upsample=self.upsample, delay_shift=delay_shift)


@dataclass(frozen=True)
class ProcessingSpec:
    stretch: bool = True
    doppler_zero_pad: int = 4
    csv_delay_window: int = 256   # delay bins each side of the peak; 0 writes all
    oracle_bins: int = 8          # delay bins each side of the reference for --method oracle
    align_grid: bool = True       # shift the delay grid so one bin sits on 2 r_ref / c0


@dataclass(frozen=True)
class SweepSpec:
    """Cartesian product of parameter lists for the loss sweep."""

    fc: tuple
    B: tuple
    Tpri: tuple
    Tp: tuple
    r0: tuple
    v0: tuple
    a0: tuple
    Np: tuple
    subset: int = 64
    smoke: int = 16
    waveform: str = "costas"
    oversampling: float = DEFAULT_OVERSAMPLING

    AXES = ("fc", "B", "Tpri", "Tp", "r0", "v0", "a0", "Np")

    def combinations(self) -> list[dict]:
        lists = [getattr(self, k) for k in self.AXES]
        return [dict(zip(self.AXES, combo)) for combo in itertools.product(*lists)]

    def stratified(self, n: int, seed: int) -> list[dict]:
        """``n`` combinations spread evenly over the ``a0`` values.

        Within each ``a0`` stratum rows are drawn without replacement from a
        seeded permutation; the result keeps enumeration order.
        """
        combos = self.combinations()
        if n >= len(combos):
            return combos
        strata: dict = {}
        for i, c in enumerate(combos):
            strata.setdefault(c["a0"], []).append(i)
        keys = sorted(strata)
        base, extra = divmod(n, len(keys))
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), 4])))
        chosen = []
        for j, key in enumerate(keys):
            idx = strata[key]
            take = min(len(idx), base + (1 if j < extra else 0))
            chosen.extend(int(i) for i in rng.permutation(idx)[:take])
        return [combos[i] for i in sorted(chosen)]


@dataclass(frozen=True)
class Scenario:
    name: str
    radar: RadarParams
    targets: tuple
    waveform: WaveformSpec = WaveformSpec()
    grid: GridSpec = GridSpec()
    processing: ProcessingSpec = ProcessingSpec()
    seed: int = 0
    snr_db: float = math.inf
    r_ref: Optional[float] = None
    sweep: Optional[SweepSpec] = None

    @property
    def truth(self) -> TargetTruth:
        return self.targets[0]

    @property
    def reference_range(self) -> float:
        return self.truth.r0 if self.r_ref is None else self.r_ref

    def validate(self) -> "Scenario":
        """Check every precondition the pipeline relies on; returns ``self``."""
        rp = self.radar
        if not self.targets:
            raise ParameterError("scenario needs at least one target")
        t_end = rp.Tcpi + rp.Tpri
        for k, tgt in enumerate(self.targets, 1):
            for t in (0.0, t_end, -tgt.v0 / tgt.a0 if tgt.a0 else 0.0):
                if 0.0 <= t <= t_end and tgt.range_at(t) <= 0:
                    raise ParameterError(f"target {k}: range not positive at t={t:.6g} s")
            for t in (0.0, t_end):
                if abs(tgt.velocity_at(t)) >= rp.c0:
                    raise ParameterError(f"target {k}: speed reaches c0 within the CPI")
            exact_delay(tgt, np.array([0.0, t_end]), rp.c0)
        self.waveform.build(rp)
        if self.grid.upsample < 1:
            raise ParameterError("grid upsample must be >= 1")
        if self.processing.doppler_zero_pad < 1:
            raise ParameterError("doppler_zero_pad must be >= 1")
        return self

    def with_waveform(self, kind: str, hops: Optional[int] = None) -> "Scenario":
        return replace(self, waveform=WaveformSpec(kind, hops))


# -- INI round trip ------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ", ".join(_fmt(v) for v in value)
    return str(value)


def _float(text: str) -> float:
    return float(text.strip())


def _opt(text: str, conv):
    text = text.strip()
    return None if text.lower() == "auto" else conv(text)


def _list(text: str, conv=float) -> tuple:
    return tuple(conv(t) for t in text.split(",") if t.strip())


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ParameterError(f"not a boolean: {text!r}")


_RADAR_KEYS = ("fc", "B", "Tpri", "Tp", "Np", "fs", "c0")


def to_ini(sc: Scenario) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp["scenario"] = {"name": sc.name, "seed": str(sc.seed), "snr_db": _fmt(float(sc.snr_db)),
                      "r_ref": _fmt(sc.r_ref)}
    cp["radar"] = {k: _fmt(getattr(sc.radar, k)) for k in _RADAR_KEYS}
    cp["waveform"] = {"kind": sc.waveform.kind, "hops": _fmt(sc.waveform.hops)}
    cp["grid"] = {f.name: _fmt(getattr(sc.grid, f.name)) for f in fields(GridSpec)}
    cp["processing"] = {f.name: _fmt(getattr(sc.processing, f.name))
                        for f in fields(ProcessingSpec)}
    for k, tgt in enumerate(sc.targets, 1):
        cp[f"target.{k}"] = {"r0": _fmt(float(tgt.r0)), "v0": _fmt(float(tgt.v0)),
                             "a0": _fmt(float(tgt.a0))}
    if sc.sweep is not None:
        cp["sweep"] = {f.name: _fmt(getattr(sc.sweep, f.name)) for f in fields(SweepSpec)}
    lines = []
    for section in cp.sections():
        lines.append(f"[{section}]")
        lines.extend(f"{k} = {v}" for k, v in cp[section].items())
        lines.append("")
    return "\n".join(lines)


def from_ini(text: str) -> Scenario:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ParameterError(f"malformed scenario file: {exc}") from None
    for required in ("scenario", "radar"):
        if required not in cp:
            raise ParameterError(f"scenario file lacks a [{required}] section")
    try:
        s = cp["scenario"]
        r = cp["radar"]
        radar = RadarParams(
            fc=_float(r["fc"]), B=_float(r["B"]), Tpri=_float(r["Tpri"]), Tp=_float(r["Tp"]),
            Np=int(r["Np"]),
            fs=_float(r["fs"]) if "fs" in r else DEFAULT_OVERSAMPLING * _float(r["B"]),
            c0=_float(r.get("c0", repr(C0))),
        )
        targets = []
        for name in sorted((n for n in cp.sections() if n.startswith("target")),
                           key=lambda n: int(n.split(".")[1]) if "." in n else 0):
            t = cp[name]
            targets.append(TargetTruth(_float(t["r0"]), _float(t.get("v0", "0")),
                                       _float(t.get("a0", "0"))))
        wf = WaveformSpec()
        if "waveform" in cp:
            w = cp["waveform"]
            wf = WaveformSpec(w.get("kind", "costas").strip().lower(),
                              _opt(w.get("hops", "auto"), int))
        grid = GridSpec()
        if "grid" in cp:
            g = cp["grid"]
            kw = {}
            for f in fields(GridSpec):
                if f.name not in g:
                    continue
                raw = g[f.name]
                if f.name in ("v_values", "a_values"):
                    kw[f.name] = _opt(raw, _list)
                elif f.name in ("dv", "da"):
                    kw[f.name] = _opt(raw, float)
                else:
                    kw[f.name] = int(raw)
            grid = GridSpec(**kw)
        proc = ProcessingSpec()
        if "processing" in cp:
            p = cp["processing"]
            kw = {}
            for f in fields(ProcessingSpec):
                if f.name in p:
                    kw[f.name] = (_bool(p[f.name]) if f.type in ("bool", bool)
                                  else int(p[f.name]))
            proc = ProcessingSpec(**kw)
        sweep = None
        if "sweep" in cp:
            w = cp["sweep"]
            kw = {k: _list(w[k], int if k == "Np" else float) for k in SweepSpec.AXES}
            for k, conv in (("subset", int), ("smoke", int), ("waveform", str),
                            ("oversampling", float)):
                if k in w:
                    kw[k] = conv(w[k].strip())
            sweep = SweepSpec(**kw)
        return Scenario(
            name=s.get("name", "custom").strip(), radar=radar, targets=tuple(targets),
            waveform=wf, grid=grid, processing=proc, seed=int(s.get("seed", "0")),
            snr_db=_float(s.get("snr_db", "inf")), r_ref=_opt(s.get("r_ref", "auto"), float),
            sweep=sweep,
        )
    except KeyError as exc:
        raise ParameterError(f"scenario file lacks key {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, RdaccError):
            raise
        raise ParameterError(f"bad value in scenario file: {exc}") from None


# -- presets -------------------------------------------------------------------


def _preset(name, fc, B, Tpri, Tp, r0, v0, a0, Np, waveform, **kw) -> Scenario:
    rp = RadarParams(fc=fc, B=B, Tpri=Tpri, Tp=Tp, Np=Np, fs=DEFAULT_OVERSAMPLING * B)
    return Scenario(name, rp, (TargetTruth(r0, v0, a0),), WaveformSpec(waveform), **kw)


def _table4_sweep() -> SweepSpec:
    return SweepSpec(
        fc=(650e6, 1300e6), B=(2e6,), Tpri=(25e-3, 50e-3, 75e-3, 100e-3),
        Tp=(4e-3, 8e-3), r0=(3000e3, 10000e3), v0=(0.0, 4000.0),
        a0=tuple(float(a) for a in range(0, 601, 50)), Np=(12, 24),
    )


PRESETS = {
    "table1": lambda: _preset("table1", 1.3e9, 8e6, 5e-3, 2e-3, 310e3, 500.0, 300.0, 120,
                              "costas"),
    "table2": lambda: _preset("table2", 2e9, 80e6, 30e-3, 6e-3, 1000e3, 4.0, 0.0, 5, "lfm",
                              grid=GridSpec(v_cells=2, a_cells=0, full_v_cells=10,
                                            full_a_cells=0)),
    "table3": lambda: _preset("table3", 1.3e9, 2e6, 27e-3, 4.5e-3, 1000e3, 0.0, 0.0, 6,
                              "costas",
                              grid=GridSpec(v_cells=30, a_cells=0, full_v_cells=60,
                                            full_a_cells=0, upsample=4)),
    "table4": lambda: replace(
        _preset("table4", 1.3e9, 2e6, 25e-3, 8e-3, 10000e3, 4000.0, 400.0, 12, "costas"),
        sweep=_table4_sweep()),
}


def preset(name: str) -> Scenario:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ParameterError(f"unknown preset {name!r}; available: {sorted(PRESETS)}") from None


def load_scenario(spec: str) -> Scenario:
    """A preset name or the path of a scenario file."""
    if spec in PRESETS:
        return preset(spec)
    path = Path(spec)
    if not path.is_file():
        raise ParameterError(f"{spec!r} is neither a preset ({sorted(PRESETS)}) nor a file")
    return from_ini(path.read_text())
