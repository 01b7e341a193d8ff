import numpy as np
import pytest

from rdacc.cago import rda_pulse
from rdacc.classic import (RDMap, classic_estimate, doppler_process, next_pow2,
                           range_compress)
from rdacc.errors import ParameterError
from rdacc.motion import C0, RadarParams, TargetTruth
from rdacc.oracle import matched_filter_exact
from rdacc.synth import EchoCube, synthesize_echo
from rdacc.waveform import make_lfm


def on_grid_range(rp, n):
    return C0 * n / (2 * rp.fs)


@pytest.fixture(scope="module")
def stationary(small_rp, small_lfm):
    tgt = TargetTruth(on_grid_range(small_rp, 1250), 0.0)
    return tgt, synthesize_echo(small_rp, [tgt], small_lfm)


def test_next_pow2():
    assert [next_pow2(n) for n in (1, 2, 3, 1024, 1025)] == [1, 2, 4, 1024, 2048]


def test_stationary_profile(stationary, small_lfm, small_rp):
    tgt, cube = stationary
    delays, prof = range_compress(cube, small_lfm)
    j = np.argmax(np.abs(prof[0]))
    assert delays[j] == pytest.approx(2 * tgt.r0 / C0, abs=1e-12)
    assert np.allclose(prof, prof[0], atol=1e-12)
    assert abs(prof[0, j]) == pytest.approx(small_rp.Tp, rel=1e-9)


def test_matches_exact_filter_for_stationary(stationary, small_lfm):
    tgt, cube = stationary
    delays, prof = range_compress(cube, small_lfm)
    j = np.argmax(np.abs(prof[0]))
    ref = matched_filter_exact(cube, small_lfm, tgt)
    total = prof[:, j].sum()
    assert abs(20 * np.log10(abs(total) / abs(ref))) < 0.05


def test_short_record_rejected(small_rp, small_lfm):
    cube = EchoCube(small_rp, np.zeros((small_rp.Np, 10), complex), 0.0)
    with pytest.raises(ParameterError):
        range_compress(cube, small_lfm)


def test_stationary_doppler_zero(stationary, small_lfm, small_rp):
    _, cube = stationary
    d, p = range_compress(cube, small_lfm)
    rd = doppler_process(p, d, small_rp)
    _, v, _ = classic_estimate(rd)
    assert v == 0.0
    assert rd.doppler[np.argmax(rd.values.max(axis=1))] == 0.0


def test_doppler_of_slow_target():
    rp = RadarParams(fc=2e9, B=1e6, Tpri=1e-3, Tp=2e-4, Np=64, fs=1.25e6)
    w = make_lfm(rp.Tp, rp.B, rp.fs)
    cube = synthesize_echo(rp, [TargetTruth(60e3, 4.0)], w)
    d, p = range_compress(cube, w)
    rd = doppler_process(p, d, rp)
    i = np.argmax(rd.values.max(axis=1))
    step = rd.doppler[1] - rd.doppler[0]
    assert rd.doppler[i] == pytest.approx(-2 * 4.0 * rp.fc / C0, abs=step)
    assert -2 * 4.0 * rp.fc / C0 == pytest.approx(-53.4, abs=0.05)


def test_doppler_wraps():
    rp = RadarParams(fc=2e9, B=1e6, Tpri=1e-3, Tp=2e-4, Np=64, fs=1.25e6)
    w = make_lfm(rp.Tp, rp.B, rp.fs)
    delta = 12.0
    cube = synthesize_echo(rp, [TargetTruth(60e3, rp.v_amb + delta)], w)
    d, p = range_compress(cube, w)
    _, v, _ = classic_estimate(doppler_process(p, d, rp))
    assert v == pytest.approx(delta, abs=rp.v_amb / (4 * rp.Np) * 1.01)


def test_accelerating_target_defocuses():
    from rdacc.scenario import preset
    from rdacc.experiments import build_cube
    w, cube = build_cube(preset("table1"))
    d, p = range_compress(cube, w)
    rd = doppler_process(p, d, cube.rp, zero_pad=1)
    i, j = np.unravel_index(np.argmax(rd.values), rd.values.shape)
    cut = rd.values[:, j]
    assert np.count_nonzero(cut > rd.values.max() / 10 ** 0.5) > 20


def test_estimate_scale_invariant(linear_cube, small_lfm, small_rp):
    d, p = range_compress(linear_cube, small_lfm)
    a = classic_estimate(doppler_process(p, d, small_rp))
    d2, p2 = range_compress(linear_cube.scaled(3.7 - 1.1j), small_lfm)
    b = classic_estimate(doppler_process(p2, d2, small_rp))
    assert a[:2] == b[:2]


def test_tie_break_prefers_lower_delay():
    vals = np.zeros((4, 6))
    vals[1, 4] = vals[2, 1] = 5.0
    rd = RDMap(vals, np.arange(6.0), np.array([-2.0, -1.0, 0.0, 1.0]),
               np.array([2.0, 1.0, 0.0, -1.0]))
    tau, v, _ = classic_estimate(rd)
    assert (tau, v) == (1.0, 0.0)


def test_zero_hypothesis_matches_cago(linear_cube, small_lfm):
    d, p = range_compress(linear_cube, small_lfm)
    for m in (1, 5):
        d2, q = rda_pulse(linear_cube, small_lfm, 0.0, 0.0, m)
        assert np.allclose(d, d2, rtol=0, atol=1e-15)
        rel = np.max(np.abs(np.abs(q) - np.abs(p[m - 1]))) / np.abs(p[m - 1]).max()
        assert rel < 1e-6
