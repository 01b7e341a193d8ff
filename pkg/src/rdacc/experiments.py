"""Experiment drivers behind the command line and the demo scripts.

Each ``run_*`` function writes plain data files (raw cubes, CSV, JSON) into
an output directory and returns a small dict describing what it produced.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .cago import (HypothesisGrid, PeakReport, RDAMap, make_plan, rda_integrate,
                   rda_map, record_table, rda_pulse)
from .classic import RDMap, doppler_process, range_compress
from .errors import ParameterError, RdaccError
from .metrics import (correlation_loss, extract_peak, grid_shift_for,
                      sidelobe_levels, speedup_estimate)
from .motion import RadarParams, TargetTruth, acceleration_ratio, predicted_loss
from .oracle import matched_filter_cago_td
from .scenario import Scenario, SweepSpec, WaveformSpec
from .synth import (EchoCube, add_noise, receive_window, save_cube,
                    synthesize_echo)
from .waveform import make_lfm

METHODS = ("classic", "cago", "oracle")


def _outdir(out) -> Path:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def build_cube(sc: Scenario, seed: Optional[int] = None):
    """``(waveform, cube)`` for a validated scenario, noise added if configured."""
    sc.validate()
    w = sc.waveform.build(sc.radar)
    if sc.r_ref is None:
        cube = synthesize_echo(sc.radar, sc.targets, w)
    else:
        t_off, n_r = receive_window(sc.radar, sc.targets, w, r_ref=sc.r_ref)
        cube = synthesize_echo(sc.radar, sc.targets, w, n_r=n_r, t_off=t_off)
    if math.isfinite(sc.snr_db):
        cube = add_noise(cube, sc.snr_db, sc.seed if seed is None else seed)
    return w, cube


def run_synth(sc: Scenario, out, seed: Optional[int] = None) -> dict:
    w, cube = build_cube(sc, seed)
    out = _outdir(out)
    path = out / "cube.iq"
    hdr = save_cube(cube, path)
    return {"cube": str(path), "header": str(hdr), "n_pulses": cube.rp.Np, "n_r": cube.n_r}


# -- map export ------------------------------------------------------------------


def _db(values, ref):
    with np.errstate(divide="ignore"):
        return 20 * np.log10(np.asarray(values) / ref)


def _fmt_db(x) -> str:
    return "-inf" if np.isneginf(x) else f"{x:.6f}"


def _crop(delays, values, centre_idx: int, window: int):
    if window <= 0:
        return delays, values
    lo = max(0, centre_idx - window)
    hi = min(len(delays), centre_idx + window + 1)
    return delays[lo:hi], values[..., lo:hi]


def write_rd_csv(rd: RDMap, path, window: int = 0) -> Path:
    """Rows: delay axis, Doppler axis, velocity axis, then one dB row per Doppler bin."""
    peak = rd.values.max()
    i, j = np.unravel_index(np.argmax(rd.values), rd.values.shape)
    delays, vals = _crop(rd.delays, rd.values, int(j), window)
    db = _db(vals, peak) if peak > 0 else np.full(vals.shape, -np.inf)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["delay_s"] + [repr(float(d)) for d in delays])
        wr.writerow(["doppler_hz"] + [repr(float(d)) for d in rd.doppler])
        wr.writerow(["velocity_mps"] + [repr(float(v)) for v in rd.velocity])
        for row in db:
            wr.writerow(["db"] + [_fmt_db(x) for x in row])
    return Path(path)


def write_rda_csvs(rda: RDAMap, out: Path, window: int = 0, prefix: str = "rda") -> list:
    """One file per acceleration hypothesis, dB relative to the whole map's peak."""
    peak = rda.values.max()
    ia, iv, j = np.unravel_index(np.argmax(rda.values), rda.values.shape)
    delays, vals = _crop(rda.delays, rda.values, int(j), window)
    paths = []
    for k, a in enumerate(rda.a_values):
        path = out / f"{prefix}_a{k:03d}.csv"
        db = _db(vals[k], peak) if peak > 0 else np.full(vals[k].shape, -np.inf)
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["delay_s"] + [repr(float(d)) for d in delays])
            wr.writerow(["a_mps2", repr(float(a))])
            wr.writerow(["v_mps\\db"])
            for v, row in zip(rda.v_values, db):
                wr.writerow([repr(float(v))] + [_fmt_db(x) for x in row])
        paths.append(path)
    return paths


def write_peak_json(rep: PeakReport, path) -> Path:
    data = {k: (None if isinstance(v, float) and not math.isfinite(v) else v)
            for k, v in asdict(rep).items()}
    Path(path).write_text(json.dumps(data, indent=2) + "\n")
    return Path(path)


def write_profile_csv(path, columns: dict) -> Path:
    keys = list(columns)
    n = len(columns[keys[0]])
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(keys)
        for i in range(n):
            wr.writerow([repr(float(columns[k][i])) for k in keys])
    return Path(path)


# -- maps ------------------------------------------------------------------------


def _oracle_map(cube, w, grid: HypothesisGrid, centre_tau: float, bins: int) -> RDAMap:
    fs = cube.rp.fs * grid.upsample
    j0 = int(round((centre_tau - cube.t_off - grid.delay_shift) * fs))
    js = np.arange(max(0, j0 - bins), j0 + bins + 1)
    delays = cube.t_off + grid.delay_shift + js / fs
    vals = np.zeros((len(grid.a_values), len(grid.v_values), len(delays)))
    for ia, a in enumerate(grid.a_values):
        for iv, v in enumerate(grid.v_values):
            prof = matched_filter_cago_td(cube, w, TargetTruth(0.0, v, a), delays=delays)
            vals[ia, iv] = np.abs(prof)
    return RDAMap(vals, delays, np.asarray(grid.v_values), np.asarray(grid.a_values),
                  cube.rp.c0)


def run_map(sc: Scenario, method: str, out, seed: Optional[int] = None, full: bool = False,
            workers: int = 1, a_values: Optional[Sequence[float]] = None,
            v_values: Optional[Sequence[float]] = None, stretch: Optional[bool] = None,
            cube: Optional[EchoCube] = None) -> dict:
    """Process a scenario with one method and write map CSVs plus a peak JSON.

    ``a_values`` forces the acceleration hypotheses (the mismatch mode);
    ``stretch`` overrides the scenario's stretch setting for ``cago``.
    """
    if method not in METHODS:
        raise ParameterError(f"unknown method {method!r}; use one of {METHODS}")
    if cube is None:
        w, cube = build_cube(sc, seed)
    else:
        w = sc.validate().waveform.build(sc.radar)
    out = _outdir(out)
    window = 0 if full else sc.processing.csv_delay_window
    result = {"method": method}
    if method == "classic":
        delays, profiles = range_compress(cube, w)
        rd = doppler_process(profiles, delays, cube.rp, sc.processing.doppler_zero_pad)
        rep = extract_peak(rd)
        result["map"] = [str(write_rd_csv(rd, out / "rd_map.csv", window))]
    else:
        grid_spec = sc.grid
        if a_values is not None:
            grid_spec = replace(grid_spec, a_values=tuple(float(a) for a in a_values))
        if v_values is not None:
            grid_spec = replace(grid_spec, v_values=tuple(float(v) for v in v_values))
        shift = 0.0
        if sc.processing.align_grid:
            shift = grid_shift_for(2 * sc.reference_range / sc.radar.c0, cube.t_off,
                                   sc.radar.fs, grid_spec.upsample)
        grid = grid_spec.build(sc.radar, sc.truth, full=full, delay_shift=shift)
        if method == "cago":
            use_stretch = sc.processing.stretch if stretch is None else stretch
            rda = rda_map(cube, w, grid, stretch=use_stretch, workers=workers)
        else:
            rda = _oracle_map(cube, w, grid, 2 * sc.reference_range / sc.radar.c0,
                              sc.processing.oracle_bins)
        rep = extract_peak(rda)
        result["map"] = [str(p) for p in write_rda_csvs(rda, out, window)]
    result["peak"] = str(write_peak_json(rep, out / "peak.json"))
    result["report"] = asdict(rep)
    return result


# -- experiment drivers -------------------------------------------------------------


def acceleration_mismatch(sc: Scenario, cube=None, w=None, coarse_step: float = 1.0,
                          margin: float = 10.0, refine_cells: int = 10, workers: int = 1,
                          out=None) -> dict:
    """Matched versus zero-acceleration response of an accelerating target.

    The zero-acceleration family is scanned over every velocity the target
    passes through (plus ``margin``) at ``coarse_step`` and then refined at
    the native velocity resolution around the best coarse point.
    """
    if w is None or cube is None:
        w, cube = build_cube(sc)
    rp, tgt = sc.radar, sc.truth
    plan = make_plan(w, cube.n_r)
    _, matched = rda_integrate(cube, w, tgt.v0, tgt.a0, plan=plan)
    v_end = tgt.v0 + tgt.a0 * rp.Tcpi
    lo, hi = min(tgt.v0, v_end) - margin, max(tgt.v0, v_end) + margin
    coarse = tuple(np.arange(lo, hi + coarse_step / 2, coarse_step))
    m0 = rda_map(cube, w, HypothesisGrid(coarse, (0.0,)), plan=plan, workers=workers)
    best = m0.values[0].max(axis=1)
    v_best = coarse[int(np.argmax(best))]
    dv, _ = HypothesisGrid.default_steps(rp)
    fine = tuple(v_best + dv * np.arange(-refine_cells, refine_cells + 1))
    m1 = rda_map(cube, w, HypothesisGrid(fine, (0.0,)), plan=plan, workers=workers)
    fine_best = m1.values[0].max(axis=1)
    i = int(np.argmax(fine_best))
    mism = max(float(fine_best[i]), float(best.max()))
    res = {
        "matched_peak_db": 20 * math.log10(matched.max()),
        "mismatched_peak_db": 20 * math.log10(mism),
        "mismatched_velocity": float(fine[i]) if fine_best[i] >= best.max() else float(v_best),
        "difference_db": 20 * math.log10(matched.max() / mism),
    }
    if out is not None:
        out = _outdir(out)
        write_profile_csv(out / "mismatch_scan.csv",
                          {"v_mps": np.asarray(coarse), "peak_db": _db(best, matched.max())})
        Path(out / "mismatch.json").write_text(json.dumps(res, indent=2) + "\n")
    return res


def stretch_comparison(sc: Scenario, cube=None, w=None, out=None) -> dict:
    """Single-hypothesis profiles at truth with and without stretch compensation."""
    if w is None or cube is None:
        w, cube = build_cube(sc)
    rp, tgt = sc.radar, sc.truth
    plan = make_plan(w, cube.n_r)
    tau0 = exact_tau0(tgt, rp)
    cell = rp.c0 / (2 * rp.B)
    res, profiles = {"range_cell_m": cell}, {}
    for label, flag in (("on", True), ("off", False)):
        delays, prof = rda_integrate(cube, w, tgt.v0, tgt.a0, plan=plan, stretch=flag)
        j = int(np.argmax(prof))
        profiles[label] = prof
        res[f"peak_db_{label}"] = 20 * math.log10(prof[j])
        res[f"bias_m_{label}"] = float((delays[j] - tau0) * rp.c0 / 2)
    res["degradation_db"] = res["peak_db_on"] - res["peak_db_off"]
    res["bias_cells_off"] = abs(res["bias_m_off"]) / cell
    res["bias_cells_on"] = abs(res["bias_m_on"]) / cell
    if out is not None:
        out = _outdir(out)
        j = int(np.argmax(profiles["on"]))
        sl = slice(max(0, j - 200), j + 201)
        ref = profiles["on"].max()
        write_profile_csv(out / "stretch_profiles.csv", {
            "range_m": (delays[sl] * rp.c0 / 2),
            "stretch_on_db": _db(profiles["on"][sl], ref),
            "stretch_off_db": _db(profiles["off"][sl], ref),
        })
        Path(out / "stretch.json").write_text(json.dumps(res, indent=2) + "\n")
    return res


def exact_tau0(tgt: TargetTruth, rp: RadarParams) -> float:
    return 2 * tgt.r0 / rp.c0


def ambiguity_levels(sc: Scenario, n: int = 4, full: bool = False, workers: int = 1,
                     out=None) -> dict:
    """Velocity-ambiguity peak levels of a stationary-scene velocity cut."""
    w, cube = build_cube(sc)
    rp, tgt = sc.radar, sc.truth
    grid = sc.grid.build(rp, tgt, full=full)
    rda = rda_map(cube, w, grid, workers=workers)
    P = grid.upsample
    j0 = int(np.argmin(np.abs(rda.delays - exact_tau0(tgt, rp))))
    # Delay neighbourhood wide enough for the range-Doppler coupling shift.
    nb = 8 * P
    prof = rda.values[0][:, max(0, j0 - nb): j0 + nb + 1].max(axis=1)
    dv, _ = HypothesisGrid.default_steps(rp)
    lv = sidelobe_levels(prof, rda.v_values, tgt.v0, rp.v_amb, dv, n=n)
    res = {"waveform": sc.waveform.kind, "levels_db": list(lv.levels_db),
           "velocities": list(lv.velocities), "truncated": lv.truncated}
    if out is not None:
        out = _outdir(out)
        write_rda_csvs(rda, out, sc.processing.csv_delay_window, prefix=f"amb_{sc.waveform.kind}")
        write_profile_csv(out / f"amb_{sc.waveform.kind}_cut.csv",
                          {"v_mps": rda.v_values, "peak_db": _db(prof, prof.max())})
    return res


# -- loss sweep ------------------------------------------------------------------


SWEEP_COLUMNS = ("fc", "B", "Tpri", "Tp", "r0", "v0", "a0", "Np", "upsilon", "loss_db",
                 "predicted_db", "status")


def _sweep_row(combo: dict, spec: SweepSpec) -> dict:
    row = dict(combo)
    try:
        rp = RadarParams(fc=combo["fc"], B=combo["B"], Tpri=combo["Tpri"], Tp=combo["Tp"],
                         Np=int(combo["Np"]), fs=spec.oversampling * combo["B"])
        tgt = TargetTruth(combo["r0"], combo["v0"], combo["a0"])
        w = WaveformSpec(spec.waveform).build(rp)
        cube = synthesize_echo(rp, [tgt], w)
        ups = acceleration_ratio(tgt.a0, rp.Tp, exact_tau0(tgt, rp), rp.fc, rp.c0)
        row.update(upsilon=ups, loss_db=correlation_loss(cube, w, tgt),
                   predicted_db=predicted_loss(ups), status="ok")
    except RdaccError as exc:
        row.update(upsilon=math.nan, loss_db=math.nan, predicted_db=math.nan,
                   status=f"skipped: {exc}")
    return row


def sweep_rows(spec: SweepSpec, full: bool = False, smoke: bool = False, seed: int = 0,
               workers: int = 1) -> list:
    if full:
        combos = spec.combinations()
    else:
        combos = spec.stratified(spec.smoke if smoke else spec.subset, seed)
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda c: _sweep_row(c, spec), combos))
    return [_sweep_row(c, spec) for c in combos]


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "-inf" if v < 0 else "inf"
    return repr(v)


def run_loss_sweep(sc: Scenario, out, full: bool = False, smoke: bool = False,
                   seed: Optional[int] = None, workers: int = 1) -> dict:
    if sc.sweep is None:
        raise ParameterError(f"scenario {sc.name!r} has no [sweep] section (try table4)")
    rows = sweep_rows(sc.sweep, full, smoke, sc.seed if seed is None else seed, workers)
    out = _outdir(out)
    path = out / "loss_sweep.csv"
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(SWEEP_COLUMNS)
        for row in rows:
            wr.writerow([_cell(row[k]) for k in SWEEP_COLUMNS])
    return {"csv": str(path), "rows": len(rows)}


# -- benchmark -------------------------------------------------------------------------


DEFAULT_BENCH_SIZES = ((16384, 4096), (32768, 8192), (65536, 16384), (131072, 32768))


def bench_one(n_r: int, n_t: int, fs: float = 1e6, oracle_bins: Optional[int] = 512,
              repeats: int = 3, seed: int = 0) -> dict:
    """Per-hypothesis wall clock of the FFT path and the time-domain oracle.

    Both run one pulse at one ``(v0, a0)`` over the full ``n_r``-bin delay
    grid.  With ``oracle_bins`` the oracle is timed on that many evenly
    spaced bins and scaled to ``n_r`` (its cost is the same for every bin).
    """
    if n_r < n_t:
        raise ParameterError("n_r must be at least n_t")
    Tp = n_t / fs
    rp = RadarParams(fc=1e9, B=0.8 * fs, Tpri=4 * (Tp + n_r / fs), Tp=Tp, Np=1, fs=fs)
    w = make_lfm(rp.Tp, rp.B, fs)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), n_r, n_t])))
    rec = rng.standard_normal((1, n_r)) + 1j * rng.standard_normal((1, n_r))
    cube = EchoCube(rp, rec, t_off=10 * Tp)
    hyp = TargetTruth(0.0, 300.0, 10.0)
    plan = make_plan(w, n_r)
    xtab = record_table(plan, rec[0])
    times = []
    for _ in range(repeats):
        t = time.perf_counter()
        delays, _ = rda_pulse(cube, w, hyp.v0, hyp.a0, 1, plan=plan, xtab=xtab)
        times.append(time.perf_counter() - t)
    cago_s = float(np.median(times))
    n_bins = n_r if oracle_bins is None else min(n_r, int(oracle_bins))
    sel = np.linspace(0, n_r - 1, n_bins).round().astype(int)
    t = time.perf_counter()
    matched_filter_cago_td(cube, w, hyp, delays=delays[sel])
    oracle_s = (time.perf_counter() - t) * n_r / n_bins
    return {"n_r": n_r, "n_t": n_t, "nfft": plan.nfft, "cago_s": cago_s,
            "oracle_s": oracle_s, "oracle_bins_timed": n_bins,
            "measured_ratio": oracle_s / cago_s, "speedup_estimate": speedup_estimate(n_r, n_t)}


BENCH_COLUMNS = ("n_r", "n_t", "nfft", "cago_s", "oracle_s", "oracle_bins_timed",
                 "measured_ratio", "speedup_estimate")


def run_bench(out, sizes=DEFAULT_BENCH_SIZES, full: bool = False) -> dict:
    rows = [bench_one(n_r, n_t, oracle_bins=None if full else 512) for n_r, n_t in sizes]
    out = _outdir(out)
    path = out / "bench.csv"
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(BENCH_COLUMNS)
        for row in rows:
            wr.writerow([_cell(row[k]) for k in BENCH_COLUMNS])
    return {"csv": str(path), "rows": rows}


def nlogn_fit_r2(rows) -> float:
    """R^2 of ``cago_s = c (N_r + 2 N_t) ln(N_r + 2 N_t)`` through the origin."""
    x = np.array([(r["n_r"] + 2 * r["n_t"]) * math.log(r["n_r"] + 2 * r["n_t"]) for r in rows])
    y = np.array([r["cago_s"] for r in rows])
    c = float(x @ y / (x @ x))
    resid = y - c * x
    return 1.0 - float(resid @ resid) / float(((y - y.mean()) ** 2).sum())
