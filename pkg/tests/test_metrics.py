import math

import numpy as np
import pytest

from rdacc.cago import HypothesisGrid, RDAMap, rda_map
from rdacc.classic import RDMap, doppler_process, range_compress
from rdacc.errors import DegenerateSceneError, ParameterError
from rdacc.metrics import (correlation_loss, extract_peak, grid_shift_for,
                           sidelobe_levels, speedup_estimate)
from rdacc.motion import C0, RadarParams, TargetTruth, acceleration_ratio, predicted_loss
from rdacc.synth import EchoCube, synthesize_echo


def test_grid_shift_lands_on_delay():
    fs, t_off, tau = 1e6, 1.23456e-3, 2.000000333e-3
    for P in (1, 4):
        d = grid_shift_for(tau, t_off, fs, P)
        assert 0 <= d < 1 / (fs * P)
        k = (tau - t_off - d) * fs * P
        assert k == pytest.approx(round(k), abs=1e-6)


def test_loss_of_linear_target(linear_cube, small_lfm, linear_target):
    loss = correlation_loss(linear_cube, small_lfm, linear_target)
    assert -0.05 <= loss <= 0.0


def test_loss_follows_sinc_law():
    # Long pulse and strong acceleration: Upsilon near 0.3.
    rp = RadarParams(fc=3e9, B=5e5, Tpri=20e-3, Tp=8e-3, Np=4, fs=6.25e5)
    from rdacc.waveform import make_costas
    w = make_costas(None, rp.Tp, rp.B, rp.fs)
    tgt = TargetTruth(500e3, 1000.0, 350.0)
    ups = acceleration_ratio(tgt.a0, rp.Tp, 2 * tgt.r0 / C0, rp.fc)
    assert 0.2 < ups < 0.5
    cube = synthesize_echo(rp, [tgt], w)
    assert correlation_loss(cube, w, tgt) == pytest.approx(predicted_loss(ups), abs=0.1)


def test_loss_rejects_empty_scene(small_rp, small_lfm, linear_target):
    blank = EchoCube(small_rp, np.zeros((small_rp.Np, 2000), complex), 0.9e-3)
    with pytest.raises(DegenerateSceneError):
        correlation_loss(blank, small_lfm, linear_target)


def test_extract_peak_reference(accel_cube, small_costas, accel_target):
    g = HypothesisGrid((accel_target.v0,), (accel_target.a0,))
    rmap = rda_map(accel_cube, small_costas, g)
    rep = extract_peak(rmap)
    rel = extract_peak(rmap, reference=rep.peak_complex_sum_magnitude)
    assert rel.peak_db == pytest.approx(0.0, abs=1e-12)
    assert (rel.r0, rel.v0, rel.a0) == (rep.r0, rep.v0, rep.a0)
    with pytest.raises(ParameterError):
        extract_peak(rmap, reference=0.0)


def test_extract_peak_from_rd_map(linear_cube, small_lfm, small_rp):
    d, p = range_compress(linear_cube, small_lfm)
    rep = extract_peak(doppler_process(p, d, small_rp))
    assert rep.a0 == 0.0
    assert rep.peak_db == pytest.approx(20 * math.log10(rep.peak_complex_sum_magnitude))


def test_extract_peak_rejects_other_types():
    with pytest.raises(ParameterError):
        extract_peak(np.zeros((2, 2)))


def _comb(v_axis, v_main, v_amb, levels_db, width):
    prof = np.exp(-0.5 * ((v_axis - v_main) / width) ** 2)
    for k, lv in enumerate(levels_db, 1):
        for s in (-1, 1):
            prof = np.maximum(prof, 10 ** (lv / 20) * np.exp(
                -0.5 * ((v_axis - v_main - s * k * v_amb) / width) ** 2))
    return prof


def test_sidelobe_levels_read_back():
    v = np.linspace(-50, 50, 2001)
    want = [-0.4, -1.7, -4.0, -7.9]
    lv = sidelobe_levels(_comb(v, 0.0, 10.0, want, 0.3), v, 0.0, 10.0, 0.5)
    assert lv.levels_db == pytest.approx(tuple(want), abs=1e-3)
    assert not lv.truncated
    assert [abs(x) for x in lv.velocities] == pytest.approx([10, 20, 30, 40], abs=0.06)


def test_sidelobe_levels_truncate():
    v = np.linspace(-25, 25, 1001)
    lv = sidelobe_levels(_comb(v, 0.0, 10.0, [-1, -2], 0.3), v, 0.0, 10.0, 0.5, n=4)
    assert lv.truncated and len(lv.levels_db) == 2


def test_sidelobe_levels_validation():
    with pytest.raises(ParameterError):
        sidelobe_levels([1.0, 2.0], [0.0], 0.0, 1.0, 0.1)
    with pytest.raises(ParameterError):
        sidelobe_levels([1.0], [0.0], 0.0, 0.0, 0.1)
    with pytest.raises(DegenerateSceneError):
        sidelobe_levels([0.0, 0.0], [0.0, 1.0], 0.0, 1.0, 0.1)


def test_speedup_frozen():
    # mpmath: 50000*20000 / (90000 ln 90000)
    assert speedup_estimate(50000, 20000) == pytest.approx(974.0125, abs=1e-4)
    with pytest.raises(ParameterError):
        speedup_estimate(0, 10)
