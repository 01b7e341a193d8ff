import math

import numpy as np
import pytest

from rdacc.cago import (HypothesisGrid, RDAMap, delay_axis, make_plan, rda_estimate,
                        rda_integrate, rda_map, rda_pulse, record_table)
from rdacc.errors import KinematicsError, ParameterError
from rdacc.metrics import grid_shift_for
from rdacc.motion import C0, RadarParams, TargetTruth
from rdacc.oracle import matched_filter_cago_td
from rdacc.synth import synthesize_echo


def _bins_near_peak(prof, width=24):
    j = int(np.argmax(np.abs(prof)))
    return j, np.arange(max(0, j - width), min(len(prof), j + width + 1))


@pytest.mark.parametrize("stretch", [True, False])
def test_pulse_matches_time_domain_oracle(accel_cube, small_costas, accel_target, stretch):
    rp = accel_cube.rp
    plan = make_plan(small_costas, accel_cube.n_r)
    for m in (1, 4, rp.Np):
        delays, prof = rda_pulse(accel_cube, small_costas, accel_target.v0, accel_target.a0,
                                 m, plan=plan, stretch=stretch)
        j, sel = _bins_near_peak(prof)
        ref = matched_filter_cago_td(accel_cube, small_costas, accel_target,
                                     delays=delays[sel], pulses=[m], stretch=stretch)
        got = prof[sel]
        assert abs(20 * np.log10(abs(prof[j]) / np.abs(ref).max())) < 0.1
        strong = np.abs(ref) > np.abs(ref).max() / 10
        rel = (np.abs(got[strong]) - np.abs(ref[strong])) / np.abs(ref[strong])
        assert np.sqrt(np.mean(rel ** 2)) < 0.01
        # Phase agreement matters for the coherent sum.
        k = int(np.argmax(np.abs(ref)))
        assert abs(np.angle(got[k] / ref[k])) < 0.01


def test_coherent_gain_at_truth(accel_cube, small_costas, accel_target):
    rp = accel_cube.rp
    shift = grid_shift_for(2 * accel_target.r0 / C0, accel_cube.t_off, rp.fs)
    _, prof = rda_integrate(accel_cube, small_costas, accel_target.v0, accel_target.a0,
                            delay_shift=shift)
    assert prof.max() == pytest.approx(rp.Np * rp.Tp, rel=2e-3)


def test_gain_grows_linearly_with_pulses(small_costas):
    peaks = []
    counts = (2, 4, 8, 16)
    for n in counts:
        rp = RadarParams(fc=1.3e9, B=1e6, Tpri=5e-3, Tp=1e-3, Np=n, fs=1.25e6)
        tgt = TargetTruth(90e3, -200.0, 150.0)
        cube = synthesize_echo(rp, [tgt], small_costas)
        shift = grid_shift_for(2 * tgt.r0 / C0, cube.t_off, rp.fs)
        _, prof = rda_integrate(cube, small_costas, tgt.v0, tgt.a0, delay_shift=shift)
        peaks.append(prof.max())
    slope = np.polyfit(np.log(counts), np.log(peaks), 1)[0]
    assert slope == pytest.approx(1.0, abs=0.01)


def test_delay_axis_and_upsampling(accel_cube, small_costas):
    p1 = make_plan(small_costas, accel_cube.n_r)
    p4 = make_plan(small_costas, accel_cube.n_r, upsample=4)
    d1 = delay_axis(p1, accel_cube.t_off)
    d4 = delay_axis(p4, accel_cube.t_off)
    assert len(d4) == 4 * len(d1)
    assert np.allclose(d4[::4], d1, rtol=0, atol=1e-15)
    assert p1.nfft >= accel_cube.n_r + 2 * small_costas.n_samples
    assert p1.nfft & (p1.nfft - 1) == 0


def test_upsampled_grid_interleaves(accel_cube, small_costas, accel_target):
    _, a = rda_pulse(accel_cube, small_costas, accel_target.v0, accel_target.a0, 2)
    plan = make_plan(small_costas, accel_cube.n_r, upsample=4)
    _, b = rda_pulse(accel_cube, small_costas, accel_target.v0, accel_target.a0, 2, plan=plan)
    assert np.max(np.abs(b[::4] - a)) < 1e-3 * np.abs(a).max()


def test_plan_rejects_short_record(small_costas):
    with pytest.raises(ParameterError):
        make_plan(small_costas, small_costas.n_samples - 1)


def test_pulse_index_checked(accel_cube, small_costas):
    with pytest.raises(ParameterError, match="pulse index"):
        rda_pulse(accel_cube, small_costas, 0.0, 0.0, 0)


def test_superluminal_hypothesis_rejected(accel_cube, small_costas):
    with pytest.raises(KinematicsError):
        rda_pulse(accel_cube, small_costas, 1.1 * C0, 0.0, 1)
    with pytest.raises(KinematicsError):
        rda_pulse(accel_cube, small_costas, 0.0, C0 / 0.01, 3)


@pytest.mark.parametrize("bad", [(), (1.0, 1.0), (2.0, 1.0)])
def test_grid_requires_increasing_values(bad):
    with pytest.raises(ParameterError):
        HypothesisGrid(bad, (0.0,))


def test_grid_around_is_centred(small_rp):
    tgt = TargetTruth(1e5, 300.0, 200.0)
    g = HypothesisGrid.around(tgt, small_rp, v_cells=3, a_cells=2)
    assert g.shape == (5, 7)
    assert g.v_values[3] == 300.0 and g.a_values[2] == 200.0
    dv, da = HypothesisGrid.default_steps(small_rp)
    assert dv == pytest.approx(small_rp.wavelength / (2 * small_rp.Tcpi))
    assert da == pytest.approx(small_rp.wavelength / small_rp.Tcpi ** 2)


def test_single_cell_map_equals_integrate(accel_cube, small_costas, accel_target):
    g = HypothesisGrid((accel_target.v0,), (accel_target.a0,))
    rmap = rda_map(accel_cube, small_costas, g)
    _, prof = rda_integrate(accel_cube, small_costas, accel_target.v0, accel_target.a0)
    assert rmap.values.shape == (1, 1, len(prof))
    assert np.array_equal(rmap.values[0, 0], prof)


@pytest.fixture(scope="module")
def windowed_map(accel_cube, small_costas, accel_target):
    rp = accel_cube.rp
    shift = grid_shift_for(2 * accel_target.r0 / C0, accel_cube.t_off, rp.fs)
    g = HypothesisGrid.around(accel_target, rp, v_cells=3, a_cells=2, delay_shift=shift)
    return g, rda_map(accel_cube, small_costas, g)


def test_estimate_recovers_truth_on_grid(windowed_map, accel_target):
    _, rmap = windowed_map
    rep = rda_estimate(rmap)
    assert rep.v0 == accel_target.v0
    assert rep.a0 == accel_target.a0
    assert rep.r0 == pytest.approx(accel_target.r0, abs=1e-6)
    assert rep.peak_db == pytest.approx(20 * math.log10(rep.peak_complex_sum_magnitude))


def test_estimate_picks_nearest_cell_off_grid(accel_cube, small_costas, accel_target):
    rp = accel_cube.rp
    dv, da = HypothesisGrid.default_steps(rp)
    g = HypothesisGrid(tuple(accel_target.v0 + dv * (np.arange(-3, 4) + 0.3)),
                       (accel_target.a0,))
    rep = rda_estimate(rda_map(accel_cube, small_costas, g))
    assert rep.v0 == pytest.approx(accel_target.v0 + 0.3 * dv)
    cell = C0 / (2 * rp.B)
    assert abs(rep.r0 - accel_target.r0) < cell


def test_worker_count_does_not_change_map(accel_cube, small_costas, windowed_map):
    g, rmap = windowed_map
    again = rda_map(accel_cube, small_costas, g, workers=3)
    assert np.array_equal(again.values, rmap.values)


def test_estimate_on_empty_map():
    empty = RDAMap(np.zeros((1, 1, 0)), np.zeros(0), np.zeros(1), np.zeros(1), C0)
    with pytest.raises(ParameterError):
        rda_estimate(empty)


def test_estimate_tie_break():
    vals = np.zeros((2, 3, 4))
    vals[1, 0, 2] = vals[0, 2, 2] = vals[0, 1, 3] = 1.0
    rmap = RDAMap(vals, np.arange(4.0), np.array([-2.0, 1.0, 1.5]), np.array([0.0, 5.0]), 2.0)
    rep = rda_estimate(rmap)
    # Same delay for the first two: smaller |v| (1.5 < 2) wins.
    assert (rep.r0, rep.v0, rep.a0) == (2.0, 1.5, 0.0)


def test_record_table_reused(accel_cube, small_costas, accel_target):
    plan = make_plan(small_costas, accel_cube.n_r)
    xtab = record_table(plan, accel_cube.records[2])
    _, a = rda_pulse(accel_cube, small_costas, 350.0, 400.0, 3, plan=plan, xtab=xtab)
    _, b = rda_pulse(accel_cube, small_costas, 350.0, 400.0, 3, plan=plan)
    assert np.array_equal(a, b)
